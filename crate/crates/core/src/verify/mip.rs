use super::VerifyError;
use crate::lp::{solve_default, LpModel, LpStatus, Sense, VarId};
use crate::model::{BilinearSet, Point, Program};
use crate::network::ArcId;
use crate::rational;
use std::collections::BTreeMap;

/// Most binary patterns `mip_optimum` will enumerate.
pub const PATTERN_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MipOptimum {
    pub value: f64,
    pub y: Vec<u8>,
    pub point: Point,
    pub patterns: u64,
}

/// Depth-first walk over y ∈ {0,1}^ny respecting the side rows; calls
/// `visit` per feasible pattern until it returns false.
fn walk(p: &Program, visit: &mut dyn FnMut(&[u8]) -> bool) {
    let ny = p.ny;
    // row usage per y and the least contribution still to come
    let mut uses: Vec<Vec<(usize, i64)>> = vec![Vec::new(); ny];
    for (r, row) in p.y_rows.iter().enumerate() {
        for &(j, c) in &row.coefs {
            uses[j].push((r, c));
        }
    }
    let mut rest_min = vec![vec![0i64; p.y_rows.len()]; ny + 1];
    for j in (0..ny).rev() {
        rest_min[j] = rest_min[j + 1].clone();
        for &(r, c) in &uses[j] {
            rest_min[j][r] += c.min(0);
        }
    }
    let mut acc = vec![0i64; p.y_rows.len()];
    let mut y = vec![0u8; ny];
    fn rec(
        j: usize,
        p: &Program,
        uses: &[Vec<(usize, i64)>],
        rest_min: &[Vec<i64>],
        acc: &mut Vec<i64>,
        y: &mut Vec<u8>,
        visit: &mut dyn FnMut(&[u8]) -> bool,
    ) -> bool {
        if (0..acc.len()).any(|r| acc[r] + rest_min[j][r] > p.y_rows[r].rhs) {
            return true;
        }
        if j == y.len() {
            return visit(y);
        }
        for v in [0u8, 1] {
            y[j] = v;
            if v == 1 {
                for &(r, c) in &uses[j] {
                    acc[r] += c;
                }
            }
            let go = rec(j + 1, p, uses, rest_min, acc, y, visit);
            if v == 1 {
                for &(r, c) in &uses[j] {
                    acc[r] -= c;
                }
            }
            if !go {
                return false;
            }
        }
        y[j] = 0;
        true
    }
    rec(0, p, &uses, &rest_min, &mut acc, &mut y, visit);
}

/// Feasible binary patterns, counting stops once `limit` is exceeded.
pub fn count_patterns(p: &Program, limit: u64) -> u64 {
    let mut n = 0u64;
    walk(p, &mut |_| {
        n += 1;
        n <= limit
    });
    n
}

/// Exact optimum of a program by enumerating its binary patterns and solving
/// the flow LP with z = x·y substituted for each one.
pub fn mip_optimum(p: &Program) -> Result<MipOptimum, VerifyError> {
    let n = count_patterns(p, PATTERN_CAP);
    if n > PATTERN_CAP {
        return Err(VerifyError::TooLarge { patterns: n });
    }
    let mut lp = LpModel::new(Sense::Minimize);
    let x: BTreeMap<ArcId, VarId> = p
        .net
        .arcs()
        .iter()
        .map(|a| (a.id, lp.add_var(format!("x{}", a.id), 0.0, rational::to_f64(&a.capacity), 0.0)))
        .collect();
    BilinearSet::add_xi_rows(&p.net, &mut lp, &x, "");
    let mut best: Option<MipOptimum> = None;
    let mut err = None;
    walk(p, &mut |y| {
        let mut cx: BTreeMap<ArcId, f64> = x.keys().map(|a| (*a, p.cost_x.get(a).copied().unwrap_or(0.0))).collect();
        for t in &p.triples {
            if y[t.j] == 1 {
                *cx.get_mut(&t.arc).expect("arc") += p.cost_z.get(&t.k).copied().unwrap_or(0.0);
            }
        }
        for (a, v) in &x {
            lp.set_objective(*v, cx[a]);
        }
        let sol = match solve_default(&lp) {
            Ok(s) => s,
            Err(e) => {
                err = Some(e);
                return false;
            }
        };
        if sol.status != LpStatus::Optimal {
            return true;
        }
        let value = sol.objective + p.cost_y.iter().zip(y).map(|(c, &b)| c * b as f64).sum::<f64>();
        if best.as_ref().is_none_or(|b| value < b.value - 1e-12) {
            let xs: BTreeMap<ArcId, f64> = x.iter().map(|(a, v)| (*a, sol.value(*v))).collect();
            let z = p.triples.iter().map(|t| (t.k, xs[&t.arc] * y[t.j] as f64)).collect();
            let yf = y.iter().map(|&b| b as f64).collect();
            best = Some(MipOptimum { value, y: y.to_vec(), point: Point { x: xs, y: yf, z }, patterns: n });
        }
        true
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    best.ok_or(VerifyError::Infeasible)
}
