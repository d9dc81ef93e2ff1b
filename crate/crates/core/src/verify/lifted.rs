use super::{rel_close, tree_assignments, tree_closure, VerifyError};
use crate::lp::{solve_default, Cmp, LpStatus, Sense, VarId};
use crate::model::{extended_formulation, mccormick, BilinearSet, Point, SetLp, Triple};
use crate::network::{ArcId, Network};
use crate::rational::{self, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::{BTreeMap, HashSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedReport {
    pub pass: bool,
    /// (tree-cut closure ∩ D, disjunctive S̃¹, extended formulation ∩ D) per objective
    pub values: Vec<(f64, f64, f64)>,
    pub max_rel_err: f64,
}

/// Appends z̃_k = Ã^k w with w the z variables of S¹ (one per arc).
fn add_lift(m: &mut SetLp, atilde: &[BTreeMap<ArcId, Rational>]) -> Vec<VarId> {
    atilde
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let zt = m.lp.add_var(format!("zt{k}"), f64::NEG_INFINITY, f64::INFINITY, 0.0);
            let mut coefs = vec![(zt, 1.0)];
            coefs.extend(row.iter().map(|(a, c)| (m.z[&a.0], -rational::to_f64(c))));
            m.lp.add_row(format!("lift{k}"), coefs, Cmp::Eq, 0.0);
            zt
        })
        .collect()
}

fn set_obj(m: &mut SetLp, zt: &[VarId], c: &Point, cz: &[f64]) {
    m.set_objective(Sense::Minimize, c);
    for (v, w) in zt.iter().zip(cz) {
        m.lp.set_objective(*v, *w);
    }
}

/// Checks conv((S¹ × R^κ) ∩ D) = (conv(S¹) × R^κ) ∩ D with
/// D = {z̃_k = Ã^k w} on `objectives` random objectives over (x, y, w, z̃).
/// conv(S¹) enters through the tree-cut closure and through the extended
/// formulation; the left side is computed disjunct by disjunct.
pub fn lifted_hull_check(
    net: &Network,
    atilde: &[BTreeMap<ArcId, Rational>],
    objectives: usize,
    seed: u64,
) -> Result<LiftedReport, VerifyError> {
    let triples = net.arcs().iter().map(|a| Triple { k: a.id.0, arc: a.id, j: 0 }).collect();
    let s1 = BilinearSet::new(net.clone(), 1, triples).map_err(|e| VerifyError::Dimension(e.to_string()))?;
    if atilde.iter().flat_map(|r| r.keys()).any(|a| !net.has_arc(*a)) {
        return Err(VerifyError::Dimension("Ã references an unknown arc".into()));
    }
    let aggs = tree_assignments(&s1, net.nodes().len());
    let mut cl = mccormick(&s1);
    let cl_zt = add_lift(&mut cl, atilde);
    let mut ext = extended_formulation(&s1);
    let ext_zt = add_lift(&mut ext.inner, atilde);
    let mut seen = HashSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LiftedReport { pass: true, values: Vec::new(), max_rel_err: 0.0 };
    for _ in 0..objectives {
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let c = Point {
            x: net.arcs().iter().map(|a| (a.id, g())).collect(),
            y: vec![g()],
            z: net.arcs().iter().map(|a| (a.id.0, g())).collect(),
        };
        let cz: Vec<f64> = atilde.iter().map(|_| g()).collect();

        set_obj(&mut cl, &cl_zt, &c, &cz);
        let a = tree_closure(&s1, &mut cl, &aggs, &mut seen, 500)?.solution.objective;

        // disjuncts: y = 0 gives w = 0; y = 1 gives w = x
        let mut b = f64::INFINITY;
        for y in [0.0, 1.0] {
            let mut eff = Point { x: c.x.clone(), y: vec![0.0], z: BTreeMap::new() };
            for (a_id, v) in eff.x.iter_mut() {
                *v += y * c.z(a_id.0);
                for (row, w) in atilde.iter().zip(&cz) {
                    if let Some(q) = row.get(a_id) {
                        *v += y * w * rational::to_f64(q);
                    }
                }
            }
            let j = (y == 1.0).then_some(0);
            if let Some((v, _)) = super::disjunct_min(&s1, j, &eff, y * c.y[0])? {
                b = b.min(v);
            }
        }

        set_obj(&mut ext.inner, &ext_zt, &c, &cz);
        let sol = solve_default(&ext.inner.lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(VerifyError::BadStatus(format!("extended formulation {:?}", sol.status)));
        }
        let e = sol.objective;
        let err = [(a, b), (e, b)].iter().map(|(u, v)| (u - v).abs() / 1f64.max(v.abs())).fold(0.0, f64::max);
        report.max_rel_err = report.max_rel_err.max(err);
        report.pass &= rel_close(a, b, 1e-6) && rel_close(e, b, 1e-6);
        report.values.push((a, b, e));
    }
    Ok(report)
}
