use super::VerifyError;
use crate::ecr::{aggregate, relax_most_violated, AggregatedInequality, CutKey};
use crate::lp::{solve_default, LpSolution, LpStatus};
use crate::model::{BilinearSet, Point, SetLp};
use crate::network::Sign;
use crate::structures::{feasible_partitions, tree_node_sets, tree_to_assignment, TreeStructure};
use std::collections::HashSet;

/// Aggregations of every tree with at most `max_nodes` nodes, every feasible
/// partition and both class signs, for every triple (m = 1).
pub fn tree_assignments(s: &BilinearSet, max_nodes: usize) -> Vec<AggregatedInequality> {
    let mut out = Vec::new();
    for t in s.triples() {
        for sign in [Sign::Pos, Sign::Neg] {
            out.extend(aggregate(s, &crate::ecr::EcrAssignment::empty(t.k, sign, s.m())));
            for (nodes, side) in tree_node_sets(s.net(), t.arc, max_nodes) {
                for (part1, part2) in feasible_partitions(s, &nodes, side, sign) {
                    let ts = TreeStructure { class_k: t.k, anchor: t.arc, side, part1, part2 };
                    if let Ok(a) = tree_to_assignment(s, &ts, sign) {
                        out.extend(aggregate(s, &a));
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub solution: LpSolution,
    pub point: Point,
    pub rounds: usize,
    pub cuts_added: usize,
}

/// Cutting-plane fixpoint: solve, add the most violated relaxation of every
/// aggregation whose violation exceeds `1e-7·max(1, ‖cut‖∞)`, repeat. Cuts
/// already in the LP are never re-added, so LP tolerance cannot cycle.
pub fn tree_closure(
    s: &BilinearSet,
    lp: &mut SetLp,
    aggs: &[AggregatedInequality],
    seen: &mut HashSet<CutKey>,
    max_rounds: usize,
) -> Result<ClosureReport, VerifyError> {
    let mut added = 0;
    for round in 1..=max_rounds {
        let sol = solve_default(&lp.lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(VerifyError::BadStatus(format!("{:?}", sol.status)));
        }
        let p = lp.point(&sol);
        let mut fresh = 0;
        for agg in aggs {
            let cut = relax_most_violated(agg, s, &p).expect("tree aggregations relax");
            if cut.violation(&p) > 1e-7 * cut.norm_inf().max(1.0) && seen.insert(cut.key()) {
                lp.add_cut(&cut, format!("tc{}", seen.len()));
                fresh += 1;
            }
        }
        added += fresh;
        if fresh == 0 {
            return Ok(ClosureReport { solution: sol, point: p, rounds: round, cuts_added: added });
        }
    }
    Err(VerifyError::BadStatus("closure did not converge".into()))
}
