use super::{balance_terms, BilinearSet, SetLp};
use crate::lp::{Cmp, VarId};
use crate::network::{ArcId, Balance};
use crate::rational;
use std::collections::BTreeMap;

/// The disjunctive (exact hull) formulation of conv(S) in the space
/// (x, y, z, w¹..wᵐ, v).
#[derive(Debug, Clone)]
pub struct ExtendedLp {
    pub inner: SetLp,
    pub w: Vec<BTreeMap<ArcId, VarId>>,
    pub v: BTreeMap<(u32, usize), VarId>,
}

pub fn extended_formulation(s: &BilinearSet) -> ExtendedLp {
    let mut m = SetLp::base(s);
    let net = s.net();
    let lp = &mut m.lp;
    let w: Vec<BTreeMap<ArcId, VarId>> = (0..s.m())
        .map(|j| {
            net.arcs()
                .iter()
                .map(|a| (a.id, lp.add_var(format!("w{j}_{}", a.id), 0.0, f64::INFINITY, 0.0)))
                .collect()
        })
        .collect();
    let mut v = BTreeMap::new();
    for t in s.triples() {
        for j in 0..s.m() {
            v.insert((t.k, j), lp.add_var(format!("v{j}_{}", t.k), f64::NEG_INFINITY, f64::INFINITY, 0.0));
        }
    }
    // v^j_k = A^k_j· w^j
    for t in s.triples() {
        for j in 0..s.m() {
            let mut row = vec![(v[&(t.k, j)], 1.0)];
            if t.j == j {
                row.push((w[j][&t.arc], -1.0));
            }
            lp.add_row(format!("link{j}_{}", t.k), row, Cmp::Eq, 0.0);
        }
    }
    // z_k = Σ_j v^j_k
    for t in s.triples() {
        let mut row = vec![(m.z[&t.k], 1.0)];
        row.extend((0..s.m()).map(|j| (v[&(t.k, j)], -1.0)));
        lp.add_row(format!("zsum{}", t.k), row, Cmp::Eq, 0.0);
    }
    for n in net.nodes() {
        let cmp = match n.balance {
            Balance::Eq => Cmp::Eq,
            Balance::Ge => Cmp::Ge,
            Balance::Le => Cmp::Le,
            Balance::Free => continue,
        };
        let f = rational::to_f64(&n.supply);
        // E w^j (cmp) f y_j
        for j in 0..s.m() {
            let mut row = balance_terms(net, n.id, &w[j], 1.0);
            row.push((m.y[j], -f));
            lp.add_row(format!("wbal{j}_{}", n.id), row, cmp, 0.0);
        }
        // E(x − Σ w^j) (cmp) f(1 − Σ y)
        let mut row = balance_terms(net, n.id, &m.x, 1.0);
        for wj in &w {
            row.extend(balance_terms(net, n.id, wj, -1.0));
        }
        row.extend(m.y.iter().map(|&y| (y, f)));
        lp.add_row(format!("rbal{}", n.id), row, cmp, f);
    }
    for a in net.arcs() {
        let u = rational::to_f64(&a.capacity);
        // w^j ≤ u y_j
        for j in 0..s.m() {
            lp.add_row(format!("wcap{j}_{}", a.id), vec![(w[j][&a.id], 1.0), (m.y[j], -u)], Cmp::Le, 0.0);
        }
        // 0 ≤ x − Σ w^j ≤ u(1 − Σ y)
        let mut lo = vec![(m.x[&a.id], 1.0)];
        lo.extend(w.iter().map(|wj| (wj[&a.id], -1.0)));
        let mut hi = lo.clone();
        hi.extend(m.y.iter().map(|&y| (y, u)));
        lp.add_row(format!("rlo{}", a.id), lo, Cmp::Ge, 0.0);
        lp.add_row(format!("rhi{}", a.id), hi, Cmp::Le, u);
    }
    ExtendedLp { inner: m, w, v }
}
