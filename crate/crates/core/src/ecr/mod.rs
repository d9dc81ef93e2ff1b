//! Extended cancel-and-relax: aggregate weighted constraints so bilinear
//! terms cancel, then relax the survivors into linear terms.

mod closed_form;
mod cut;
mod relax;

pub use closed_form::{closed_form_cut, weights_for, AggregationWeights};
pub use cut::{CutFile, CutKey, LinearCut, Provenance, TaggedCut, TermChoice};
pub use relax::{relax_all, relax_most_violated, relax_with, remaining_terms, RelaxOption, RemainingTerm};

use crate::model::BilinearSet;
use crate::network::{ArcId, FlowBalanceRef, NodeId, Sign};
use crate::rational::{self, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// `[I_1, …, I_m, Ī | J, J̄]` for class `(class_k, sign)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EcrAssignment {
    pub class_k: u32,
    pub sign: Sign,
    /// rows weighted by y_j, one set per y
    pub layers: Vec<BTreeSet<FlowBalanceRef>>,
    /// rows weighted by 1 − Σy
    pub ibar: BTreeSet<FlowBalanceRef>,
    /// lower bounds x_i ≥ 0 weighted by 1 − Σy
    pub j_lower: BTreeSet<ArcId>,
    /// upper bounds u_i − x_i ≥ 0 weighted by 1 − Σy
    pub j_upper: BTreeSet<ArcId>,
}

impl EcrAssignment {
    pub fn empty(class_k: u32, sign: Sign, m: usize) -> Self {
        EcrAssignment {
            class_k,
            sign,
            layers: vec![BTreeSet::new(); m],
            ibar: BTreeSet::new(),
            j_lower: BTreeSet::new(),
            j_upper: BTreeSet::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum::<usize>() + self.ibar.len() + self.j_lower.len() + self.j_upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Nodes whose rows are used (Ĩ in the tree results).
    pub fn nodes_used(&self) -> BTreeSet<NodeId> {
        self.layers.iter().flatten().chain(&self.ibar).map(|r| r.node).collect()
    }
}

impl fmt::Display for EcrAssignment {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let set = |s: &BTreeSet<FlowBalanceRef>| s.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        let arcs = |s: &BTreeSet<ArcId>| s.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        let layers: Vec<String> = self.layers.iter().map(|l| format!("{{{}}}", set(l))).collect();
        write!(
            f,
            "[{}, {{{}}} | {{{}}}, {{{}}}] class {}{}",
            layers.join(", "),
            set(&self.ibar),
            arcs(&self.j_lower),
            arcs(&self.j_upper),
            self.class_k,
            self.sign
        )
    }
}

/// One aggregated constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constraint {
    Base,
    Layer(usize, FlowBalanceRef),
    Bar(FlowBalanceRef),
    Lower(ArcId),
    Upper(ArcId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// fewer cancellations than aggregated constraints
    C1,
    /// some constraint has none of its bilinear terms canceled
    C2,
    /// a bilinear term is produced by more than two constraints (m > 1)
    Pairwise,
    /// the assignment uses a flow-balance row that Ξ does not contain
    UnavailableRow,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EcrError {
    #[error("condition {condition:?} violated: {detail}")]
    ConditionViolated { condition: Condition, detail: String },
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("no relaxation option for the term y{j}·x{arc}")]
    OptionUnavailable { arc: ArcId, j: usize },
    #[error("point does not match the set dimensions")]
    DimensionMismatch,
}

/// `Σ bilinear·y_j x_i + Σ x + Σ y + Σ z + constant ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedInequality {
    pub assignment: EcrAssignment,
    /// nonzero bilinear coefficients keyed by (arc, j)
    pub bilinear: BTreeMap<(ArcId, usize), Rational>,
    pub x: BTreeMap<ArcId, Rational>,
    pub y: Vec<Rational>,
    pub z: BTreeMap<u32, Rational>,
    pub constant: Rational,
    pub cancel_count: usize,
    pub canceled: BTreeSet<(ArcId, usize)>,
    /// per non-base constraint: did one of its terms cancel
    pub flags: Vec<(Constraint, bool)>,
    /// largest number of constraints producing one bilinear term
    pub max_producers: usize,
}

impl AggregatedInequality {
    pub fn c1(&self) -> bool {
        self.cancel_count >= self.assignment.size()
    }

    pub fn c2(&self) -> bool {
        self.flags.iter().all(|f| f.1)
    }

    /// The linear part as a cut (meaningful when no bilinear terms remain).
    pub fn linear_part(&self) -> LinearCut {
        LinearCut::from_parts(self.x.clone(), self.y.clone(), self.z.clone(), -self.constant.clone())
    }
}

fn check_assignment(s: &BilinearSet, a: &EcrAssignment) -> Result<(), EcrError> {
    let bad = |m: String| Err(EcrError::InvalidAssignment(m));
    if s.triple(a.class_k).is_none() {
        return bad(format!("unknown class {}", a.class_k));
    }
    if a.layers.len() != s.m() {
        return bad(format!("{} layers for m = {}", a.layers.len(), s.m()));
    }
    for r in a.layers.iter().flatten().chain(&a.ibar) {
        if !s.net().has_node(r.node) {
            return bad(format!("unknown node {}", r.node));
        }
    }
    for arc in a.j_lower.iter().chain(&a.j_upper) {
        if !s.net().has_arc(*arc) {
            return bad(format!("unknown arc {arc}"));
        }
    }
    if let Some(arc) = a.j_lower.intersection(&a.j_upper).next() {
        return bad(format!("arc {arc} in both J and J̄"));
    }
    let both_signs = |rows: &mut dyn Iterator<Item = &FlowBalanceRef>| {
        let mut seen: BTreeMap<NodeId, Sign> = BTreeMap::new();
        for r in rows {
            if let Some(&s) = seen.get(&r.node) {
                if s != r.sign {
                    return Some(r.node);
                }
            }
            seen.insert(r.node, r.sign);
        }
        None
    };
    if s.m() == 1 {
        if let Some(r) = a.layers[0].intersection(&a.ibar).next() {
            return bad(format!("{r} weighted by both y and 1 − y"));
        }
        if let Some(v) = both_signs(&mut a.layers[0].iter().chain(&a.ibar)) {
            return bad(format!("node {v} used with both signs"));
        }
    } else {
        for set in a.layers.iter().chain(std::iter::once(&a.ibar)) {
            if let Some(v) = both_signs(&mut set.iter()) {
                return bad(format!("node {v} used with both signs"));
            }
        }
    }
    for r in a.layers.iter().flatten().chain(&a.ibar) {
        if !s.net().row_available(*r) {
            return Err(EcrError::ConditionViolated {
                condition: Condition::UnavailableRow,
                detail: format!("row {r} is not part of Ξ"),
            });
        }
    }
    Ok(())
}

struct Acc<'a> {
    s: &'a BilinearSet,
    bil: BTreeMap<(ArcId, usize), Rational>,
    producers: BTreeMap<(ArcId, usize), Vec<usize>>,
    x: BTreeMap<ArcId, Rational>,
    y: Vec<Rational>,
    z: BTreeMap<u32, Rational>,
    constant: Rational,
}

impl Acc<'_> {
    fn bil(&mut self, key: (ArcId, usize), c: &Rational, who: usize) {
        *self.bil.entry(key).or_insert_with(rational::zero) += c;
        self.producers.entry(key).or_default().push(who);
    }

    fn x(&mut self, a: ArcId, c: &Rational) {
        *self.x.entry(a).or_insert_with(rational::zero) += c;
    }
}

/// Weighted sum of the assignment's constraints, without checking (C1)/(C2).
pub fn accumulate(s: &BilinearSet, a: &EcrAssignment) -> Result<AggregatedInequality, EcrError> {
    check_assignment(s, a)?;
    let m = s.m();
    let mut acc = Acc {
        s,
        bil: BTreeMap::new(),
        producers: BTreeMap::new(),
        x: BTreeMap::new(),
        y: vec![rational::zero(); m],
        z: BTreeMap::new(),
        constant: rational::zero(),
    };
    let mut constraints = vec![Constraint::Base];
    // base: ±(y_j' x_i' − z_l)
    let base = *s.triple(a.class_k).expect("checked");
    let c = rational::int(a.sign.factor());
    acc.bil((base.arc, base.j), &c, 0);
    *acc.z.entry(base.k).or_insert_with(rational::zero) -= &c;

    for (j, layer) in a.layers.iter().enumerate() {
        for r in layer {
            let who = constraints.len();
            constraints.push(Constraint::Layer(j, *r));
            let row = acc.s.net().flow_balance_row(*r).expect("checked");
            for (arc, coef) in &row.coefs {
                acc.bil((*arc, j), coef, who);
            }
            acc.y[j] -= &row.rhs;
        }
    }
    for r in &a.ibar {
        let who = constraints.len();
        constraints.push(Constraint::Bar(*r));
        let row = acc.s.net().flow_balance_row(*r).expect("checked");
        for (arc, coef) in &row.coefs {
            acc.x(*arc, coef);
            for j in 0..m {
                acc.bil((*arc, j), &-coef.clone(), who);
            }
        }
        acc.constant -= &row.rhs;
        for yj in acc.y.iter_mut() {
            *yj += &row.rhs;
        }
    }
    let one = rational::one();
    for arc in &a.j_lower {
        let who = constraints.len();
        constraints.push(Constraint::Lower(*arc));
        acc.x(*arc, &one);
        for j in 0..m {
            acc.bil((*arc, j), &-one.clone(), who);
        }
    }
    for arc in &a.j_upper {
        let who = constraints.len();
        constraints.push(Constraint::Upper(*arc));
        let u = s.capacity(*arc);
        acc.constant += &u;
        acc.x(*arc, &-one.clone());
        for yj in acc.y.iter_mut() {
            *yj -= &u;
        }
        for j in 0..m {
            acc.bil((*arc, j), &one, who);
        }
    }

    let canceled: BTreeSet<(ArcId, usize)> = acc.bil.iter().filter(|(_, v)| v.is_zero()).map(|(k, _)| *k).collect();
    let mut hit = vec![false; constraints.len()];
    for key in &canceled {
        for &w in &acc.producers[key] {
            hit[w] = true;
        }
    }
    let max_producers = acc
        .producers
        .values()
        .map(|v| {
            let mut v = v.clone();
            v.sort();
            v.dedup();
            v.len()
        })
        .max()
        .unwrap_or(0);
    let flags = constraints.iter().zip(&hit).skip(1).map(|(c, h)| (*c, *h)).collect();
    let mut bilinear = acc.bil;
    bilinear.retain(|_, v| !v.is_zero());
    let mut x = acc.x;
    x.retain(|_, v| !v.is_zero());
    let mut z = acc.z;
    z.retain(|_, v| !v.is_zero());
    Ok(AggregatedInequality {
        assignment: a.clone(),
        bilinear,
        x,
        y: acc.y,
        z,
        constant: acc.constant,
        cancel_count: canceled.len(),
        canceled,
        flags,
        max_producers,
    })
}

/// Aggregates with unit weights and checks (C1), (C2) and, for m > 1,
/// pairwise cancellation (the premise under which unit weights suffice).
pub fn aggregate(s: &BilinearSet, a: &EcrAssignment) -> Result<AggregatedInequality, EcrError> {
    let agg = accumulate(s, a)?;
    if a.is_empty() {
        return Ok(agg);
    }
    if !agg.c1() {
        return Err(EcrError::ConditionViolated {
            condition: Condition::C1,
            detail: format!("{} cancellations for {} constraints", agg.cancel_count, a.size()),
        });
    }
    if let Some((c, _)) = agg.flags.iter().find(|f| !f.1) {
        return Err(EcrError::ConditionViolated {
            condition: Condition::C2,
            detail: format!("no term of {c:?} is canceled"),
        });
    }
    if s.m() > 1 && agg.max_producers > 2 {
        return Err(EcrError::ConditionViolated {
            condition: Condition::Pairwise,
            detail: format!("a bilinear term is produced by {} constraints", agg.max_producers),
        });
    }
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{sc_arc, spiked_cycle_set};
    use crate::network::FlowBalanceRef as R;

    #[test]
    fn empty_assignment_is_bare_base_row() {
        let s = spiked_cycle_set(1);
        let a = EcrAssignment::empty(sc_arc(1, 5).0, Sign::Pos, 1);
        let agg = aggregate(&s, &a).unwrap();
        assert_eq!(agg.cancel_count, 0);
        assert_eq!(agg.bilinear.len(), 1);
        assert_eq!(agg.bilinear[&(sc_arc(1, 5), 0)], rational::one());
        assert_eq!(agg.z[&1], rational::int(-1));
        assert!(agg.x.is_empty() && agg.constant.is_zero());
    }

    #[test]
    fn rejects_both_signs_and_overlaps() {
        let s = spiked_cycle_set(1);
        let mut a = EcrAssignment::empty(1, Sign::Pos, 1);
        a.layers[0].insert(R::new(1, Sign::Pos));
        a.ibar.insert(R::new(1, Sign::Neg));
        assert!(matches!(aggregate(&s, &a), Err(EcrError::InvalidAssignment(_))));
        let mut b = EcrAssignment::empty(1, Sign::Pos, 1);
        b.j_lower.insert(ArcId(2));
        b.j_upper.insert(ArcId(2));
        assert!(matches!(aggregate(&s, &b), Err(EcrError::InvalidAssignment(_))));
    }

    #[test]
    fn missing_row_sign_is_a_condition_violation() {
        let s0 = spiked_cycle_set(1);
        let nodes = s0
            .net()
            .nodes()
            .iter()
            .cloned()
            .map(|mut n| {
                n.balance = crate::network::Balance::Le;
                n
            })
            .collect();
        let net = crate::network::Network::new(nodes, s0.net().arcs().to_vec()).unwrap();
        let s = BilinearSet::new(net, 1, s0.triples().to_vec()).unwrap();
        let mut a = EcrAssignment::empty(1, Sign::Pos, 1);
        a.layers[0].insert(R::new(5, Sign::Pos));
        assert!(matches!(
            aggregate(&s, &a),
            Err(EcrError::ConditionViolated { condition: Condition::UnavailableRow, .. })
        ));
    }

    #[test]
    fn lone_row_without_cancellation_fails_c1() {
        let s = spiked_cycle_set(1);
        let mut a = EcrAssignment::empty(1, Sign::Pos, 1);
        a.layers[0].insert(R::new(3, Sign::Pos));
        assert!(matches!(
            aggregate(&s, &a),
            Err(EcrError::ConditionViolated { condition: Condition::C1, .. })
        ));
    }
}
