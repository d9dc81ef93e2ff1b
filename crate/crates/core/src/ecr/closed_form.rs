use super::{remaining_terms, AggregatedInequality, EcrError, LinearCut, RelaxOption};
use crate::model::BilinearSet;
use crate::network::{ArcId, FlowBalanceRef, Sign};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// Multipliers of one projected inequality:
/// γ (rows × y_j), θ (rows × (1 − Σy)), λ (x ≥ 0 × (1 − Σy)),
/// μ ((u − x) ≥ 0 × (1 − Σy)), ρ ((u − x) ≥ 0 × y_j), η (x ≥ 0 × y_j),
/// β⁺ (y x − z ≥ 0), β⁻ (z − y x ≥ 0). The base equality is part of β.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregationWeights {
    pub gamma: Vec<BTreeMap<FlowBalanceRef, Rational>>,
    pub theta: BTreeMap<FlowBalanceRef, Rational>,
    pub lambda: BTreeMap<ArcId, Rational>,
    pub mu: BTreeMap<ArcId, Rational>,
    pub rho: Vec<BTreeMap<ArcId, Rational>>,
    pub eta: Vec<BTreeMap<ArcId, Rational>>,
    pub beta_plus: BTreeMap<u32, Rational>,
    pub beta_minus: BTreeMap<u32, Rational>,
}

fn bump<K: Ord>(m: &mut BTreeMap<K, Rational>, k: K, v: Rational) {
    *m.entry(k).or_insert_with(rational::zero) += v;
}

impl AggregationWeights {
    pub fn zero(m: usize) -> Self {
        AggregationWeights {
            gamma: vec![BTreeMap::new(); m],
            rho: vec![BTreeMap::new(); m],
            eta: vec![BTreeMap::new(); m],
            ..Default::default()
        }
    }

    /// Coefficient of every y_j x_i in Σ π·(constraints); zero for a
    /// projected inequality.
    pub fn bilinear_residual(&self, s: &BilinearSet) -> BTreeMap<(ArcId, usize), Rational> {
        let net = s.net();
        let m = s.m();
        let mut out = BTreeMap::new();
        for (j, g) in self.gamma.iter().enumerate() {
            for (r, w) in g {
                for (a, c) in net.flow_balance_row(*r).expect("row").coefs {
                    bump(&mut out, (a, j), c * w);
                }
            }
        }
        for (r, w) in &self.theta {
            for (a, c) in net.flow_balance_row(*r).expect("row").coefs {
                for j in 0..m {
                    bump(&mut out, (a, j), -(&c * w));
                }
            }
        }
        for (a, w) in &self.lambda {
            for j in 0..m {
                bump(&mut out, (*a, j), -w.clone());
            }
        }
        for (a, w) in &self.mu {
            for j in 0..m {
                bump(&mut out, (*a, j), w.clone());
            }
        }
        for (j, rho) in self.rho.iter().enumerate() {
            for (a, w) in rho {
                bump(&mut out, (*a, j), -w.clone());
            }
        }
        for (j, eta) in self.eta.iter().enumerate() {
            for (a, w) in eta {
                bump(&mut out, (*a, j), w.clone());
            }
        }
        for (k, w) in &self.beta_plus {
            let t = s.triple(*k).expect("triple");
            bump(&mut out, (t.arc, t.j), w.clone());
        }
        for (k, w) in &self.beta_minus {
            let t = s.triple(*k).expect("triple");
            bump(&mut out, (t.arc, t.j), -w.clone());
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

/// Weights realising `aggregate` followed by `relax_with(choices)`.
pub fn weights_for(
    agg: &AggregatedInequality,
    s: &BilinearSet,
    choices: &[RelaxOption],
) -> Result<AggregationWeights, EcrError> {
    let a = &agg.assignment;
    let mut w = AggregationWeights::zero(s.m());
    let one = rational::one();
    let base = s.triple(a.class_k).ok_or_else(|| EcrError::InvalidAssignment("unknown class".into()))?;
    match a.sign {
        Sign::Pos => bump(&mut w.beta_plus, base.k, one.clone()),
        Sign::Neg => bump(&mut w.beta_minus, base.k, one.clone()),
    }
    for (j, layer) in a.layers.iter().enumerate() {
        for r in layer {
            bump(&mut w.gamma[j], *r, one.clone());
        }
    }
    for r in &a.ibar {
        bump(&mut w.theta, *r, one.clone());
    }
    for arc in &a.j_lower {
        bump(&mut w.lambda, *arc, one.clone());
    }
    for arc in &a.j_upper {
        bump(&mut w.mu, *arc, one.clone());
    }
    let terms = remaining_terms(agg, s)?;
    if terms.len() != choices.len() {
        return Err(EcrError::InvalidAssignment("choice count differs from term count".into()));
    }
    for (t, &o) in terms.iter().zip(choices) {
        let mag = t.coef.abs();
        let pos = t.coef.is_positive();
        match (pos, o) {
            (true, RelaxOption::BoundLower) => bump(&mut w.lambda, t.arc, mag),
            (true, RelaxOption::BoundUpper) => bump(&mut w.rho[t.j], t.arc, mag),
            (false, RelaxOption::BoundLower) => bump(&mut w.eta[t.j], t.arc, mag),
            (false, RelaxOption::BoundUpper) => bump(&mut w.mu, t.arc, mag),
            (true, RelaxOption::Bilinear) => bump(&mut w.beta_minus, s.triple_for(t.arc, t.j).expect("triple").k, mag),
            (false, RelaxOption::Bilinear) => bump(&mut w.beta_plus, s.triple_for(t.arc, t.j).expect("triple").k, mag),
        }
    }
    Ok(w)
}

/// Coefficients of the projected inequality straight from the multipliers:
/// q_i = Σ_t E_ti θ_t + λ_i − μ_i,
/// r_j = Σ_t f_t (θ_t − γ^j_t) + Σ_i u_i (ρ^j_i − μ_i),
/// s_k = β⁻_k − β⁺_k,
/// t   = Σ_t f_t θ_t − Σ_i u_i μ_i.
pub fn closed_form_cut(s: &BilinearSet, w: &AggregationWeights) -> LinearCut {
    let net = s.net();
    let m = s.m();
    let mut q: BTreeMap<ArcId, Rational> = BTreeMap::new();
    let mut r = vec![rational::zero(); m];
    let mut t = rational::zero();
    for (row, th) in &w.theta {
        let fr = net.flow_balance_row(*row).expect("row");
        for (a, c) in &fr.coefs {
            bump(&mut q, *a, c * th);
        }
        let ft = &fr.rhs * th;
        for rj in r.iter_mut() {
            *rj += &ft;
        }
        t += ft;
    }
    for (j, g) in w.gamma.iter().enumerate() {
        for (row, gw) in g {
            let fr = net.flow_balance_row(*row).expect("row");
            r[j] -= &fr.rhs * gw;
        }
    }
    for (a, l) in &w.lambda {
        bump(&mut q, *a, l.clone());
    }
    for (a, mu) in &w.mu {
        let u = s.capacity(*a);
        bump(&mut q, *a, -mu.clone());
        for rj in r.iter_mut() {
            *rj -= &u * mu;
        }
        t -= &u * mu;
    }
    for (j, rho) in w.rho.iter().enumerate() {
        for (a, v) in rho {
            r[j] += s.capacity(*a) * v;
        }
    }
    let mut sk: BTreeMap<u32, Rational> = BTreeMap::new();
    for (k, v) in &w.beta_minus {
        bump(&mut sk, *k, v.clone());
    }
    for (k, v) in &w.beta_plus {
        bump(&mut sk, *k, -v.clone());
    }
    LinearCut::from_parts(q, r, sk, t)
}
