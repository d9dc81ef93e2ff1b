use super::{VerifyError, VALIDITY_TOL};
use crate::ecr::LinearCut;
use crate::lp::{solve_default, LpModel, LpStatus, Sense, VarId};
use crate::model::{extended_formulation, BilinearSet, Point};
use crate::network::ArcId;
use crate::rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub valid: bool,
    /// smallest slack over all nonempty disjuncts (+∞ when S is empty)
    pub min_slack: f64,
    /// minimizing point of the worst disjunct when invalid
    pub certificate: Option<Point>,
}

fn x_lp(s: &BilinearSet) -> (LpModel, BTreeMap<ArcId, VarId>) {
    let mut lp = LpModel::new(Sense::Minimize);
    let x = s
        .net()
        .arcs()
        .iter()
        .map(|a| (a.id, lp.add_var(format!("x{}", a.id), 0.0, rational::to_f64(&a.capacity), 0.0)))
        .collect();
    BilinearSet::add_xi_rows(s.net(), &mut lp, &x, "");
    (lp, x)
}

/// `ŷ` of disjunct `j` (None is the origin).
fn yhat(m: usize, j: Option<usize>) -> Vec<f64> {
    let mut y = vec![0.0; m];
    if let Some(j) = j {
        y[j] = 1.0;
    }
    y
}

/// Minimum of `c·(x, ŷ, z) + constant` over disjunct `j` (y = ŷ, z_k =
/// x_i ŷ_j, x ∈ Ξ). `None` when the disjunct is empty.
pub fn disjunct_min(
    s: &BilinearSet,
    j: Option<usize>,
    c: &Point,
    constant: f64,
) -> Result<Option<(f64, Point)>, VerifyError> {
    let (mut lp, x) = x_lp(s);
    let yh = yhat(s.m(), j);
    let mut cx: BTreeMap<ArcId, f64> = x.keys().map(|a| (*a, c.x(*a))).collect();
    for t in s.triples() {
        if Some(t.j) == j {
            *cx.get_mut(&t.arc).expect("arc") += c.z(t.k);
        }
    }
    for (a, v) in &x {
        lp.set_objective(*v, cx[a]);
    }
    let sol = solve_default(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(None),
        LpStatus::Unbounded => return Err(VerifyError::BadStatus("unbounded".into())),
    }
    let konst: f64 = c.y.iter().zip(&yh).map(|(a, b)| a * b).sum::<f64>() + constant;
    let xs = x.iter().map(|(a, v)| (*a, sol.value(*v))).collect();
    Ok(Some((sol.objective + konst, Point::lifted(s, xs, &yh))))
}

fn cut_as_objective(cut: &LinearCut) -> (Point, f64) {
    let f = rational::to_f64;
    let c = Point {
        x: cut.q.iter().map(|(a, v)| (*a, f(v))).collect(),
        y: cut.r.iter().map(f).collect(),
        z: cut.s.iter().map(|(k, v)| (*k, f(v))).collect(),
    };
    (c, -f(&cut.t))
}

pub fn validity_check(cut: &LinearCut, s: &BilinearSet) -> Result<Validity, VerifyError> {
    validity_check_tol(cut, s, VALIDITY_TOL)
}

/// Minimizes the cut slack over every vertex ŷ of Δ_m with z = x ŷ; valid
/// iff no disjunct goes below −tol.
pub fn validity_check_tol(cut: &LinearCut, s: &BilinearSet, tol: f64) -> Result<Validity, VerifyError> {
    if !cut.conforms(s) {
        return Err(VerifyError::Dimension("cut does not match the set".into()));
    }
    let (c, konst) = cut_as_objective(cut);
    let mut worst: Option<(f64, Point)> = None;
    for j in std::iter::once(None).chain((0..s.m()).map(Some)) {
        if let Some((v, p)) = disjunct_min(s, j, &c, konst)? {
            if worst.as_ref().is_none_or(|w| v < w.0) {
                worst = Some((v, p));
            }
        }
    }
    Ok(match worst {
        None => Validity { valid: true, min_slack: f64::INFINITY, certificate: None },
        Some((v, p)) => {
            let valid = v >= -tol;
            Validity { valid, min_slack: v, certificate: (!valid).then_some(p) }
        }
    })
}

/// Minimum cut slack over the extended (disjunctive) formulation; `None`
/// when it is infeasible.
pub fn ext_validity(cut: &LinearCut, s: &BilinearSet) -> Result<Option<f64>, VerifyError> {
    if !cut.conforms(s) {
        return Err(VerifyError::Dimension("cut does not match the set".into()));
    }
    let mut ext = extended_formulation(s);
    let (c, konst) = cut_as_objective(cut);
    ext.inner.set_objective(Sense::Minimize, &c);
    let sol = solve_default(&ext.inner.lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(sol.objective + konst)),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(VerifyError::BadStatus("unbounded".into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullOptimum {
    pub value: f64,
    pub point: Point,
    /// disjunct attaining it (None = origin)
    pub disjunct: Option<usize>,
}

/// Optimum of `c` over conv(S) as the best disjunct optimum.
pub fn hull_optimum(s: &BilinearSet, c: &Point, sense: Sense) -> Result<Option<HullOptimum>, VerifyError> {
    let flip = match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let neg = Point {
        x: c.x.iter().map(|(a, v)| (*a, flip * v)).collect(),
        y: c.y.iter().map(|v| flip * v).collect(),
        z: c.z.iter().map(|(k, v)| (*k, flip * v)).collect(),
    };
    let mut best: Option<HullOptimum> = None;
    for j in std::iter::once(None).chain((0..s.m()).map(Some)) {
        if let Some((v, p)) = disjunct_min(s, j, &neg, 0.0)? {
            if best.as_ref().is_none_or(|b| v < flip * b.value) {
                best = Some(HullOptimum { value: flip * v, point: p, disjunct: j });
            }
        }
    }
    Ok(best)
}
