use super::{BilinearSet, Point};
use crate::ecr::LinearCut;
use crate::lp::{Cmp, LpModel, LpSolution, Sense, VarId};
use crate::network::ArcId;
use crate::rational;
use std::collections::BTreeMap;

/// An LP over the (x, y, z) space of a set, with handles to its variables.
#[derive(Debug, Clone)]
pub struct SetLp {
    pub lp: LpModel,
    pub x: BTreeMap<ArcId, VarId>,
    pub y: Vec<VarId>,
    pub z: BTreeMap<u32, VarId>,
}

impl SetLp {
    /// Ξ, bounds and Δ_m only (no z rows); z variables are free.
    pub fn base(s: &BilinearSet) -> SetLp {
        let mut lp = LpModel::new(Sense::Minimize);
        let x: BTreeMap<ArcId, VarId> = s
            .net()
            .arcs()
            .iter()
            .map(|a| (a.id, lp.add_var(format!("x{}", a.id), 0.0, rational::to_f64(&a.capacity), 0.0)))
            .collect();
        let y: Vec<VarId> = (0..s.m()).map(|j| lp.add_var(format!("y{j}"), 0.0, 1.0, 0.0)).collect();
        let z = s
            .triples()
            .iter()
            .map(|t| (t.k, lp.add_var(format!("z{}", t.k), f64::NEG_INFINITY, f64::INFINITY, 0.0)))
            .collect();
        BilinearSet::add_xi_rows(s.net(), &mut lp, &x, "");
        if s.m() > 0 {
            lp.add_row("simplex", y.iter().map(|&v| (v, 1.0)).collect(), Cmp::Le, 1.0);
        }
        SetLp { lp, x, y, z }
    }

    /// Appends `Σ q x + Σ r y + Σ s z ≥ t`.
    pub fn add_cut(&mut self, cut: &LinearCut, name: impl Into<String>) {
        let mut coefs: Vec<(VarId, f64)> = cut.q.iter().map(|(a, c)| (self.x[a], rational::to_f64(c))).collect();
        coefs.extend(cut.r.iter().enumerate().map(|(j, c)| (self.y[j], rational::to_f64(c))));
        coefs.extend(cut.s.iter().map(|(k, c)| (self.z[k], rational::to_f64(c))));
        coefs.retain(|c| c.1 != 0.0);
        self.lp.add_row(name, coefs, Cmp::Ge, rational::to_f64(&cut.t));
    }

    pub fn point(&self, sol: &LpSolution) -> Point {
        Point {
            x: self.x.iter().map(|(&a, &v)| (a, sol.value(v))).collect(),
            y: self.y.iter().map(|&v| sol.value(v)).collect(),
            z: self.z.iter().map(|(&k, &v)| (k, sol.value(v))).collect(),
        }
    }

    /// Sets a linear objective over the point coordinates.
    pub fn set_objective(&mut self, sense: Sense, c: &Point) {
        self.lp.sense = sense;
        self.lp.clear_objective();
        for (a, v) in &self.x {
            self.lp.set_objective(*v, c.x(*a));
        }
        for (j, v) in self.y.iter().enumerate() {
            self.lp.set_objective(*v, c.y.get(j).copied().unwrap_or(0.0));
        }
        for (k, v) in &self.z {
            self.lp.set_objective(*v, c.z(*k));
        }
    }
}

/// McCormick relaxation: Ξ, 0 ≤ x ≤ u, y ∈ Δ_m and the four envelope rows per triple.
pub fn mccormick(s: &BilinearSet) -> SetLp {
    let mut m = SetLp::base(s);
    for t in s.triples() {
        let z = m.z[&t.k];
        m.lp.set_bounds(z, 0.0, f64::INFINITY);
        let (x, y) = (m.x[&t.arc], m.y[t.j]);
        let u = rational::to_f64(&s.capacity(t.arc));
        m.lp.add_row(format!("mc_lo{}", t.k), vec![(z, 1.0), (y, -u), (x, -1.0)], Cmp::Ge, -u);
        m.lp.add_row(format!("mc_uy{}", t.k), vec![(z, 1.0), (y, -u)], Cmp::Le, 0.0);
        m.lp.add_row(format!("mc_ux{}", t.k), vec![(z, 1.0), (x, -1.0)], Cmp::Le, 0.0);
    }
    m
}
