use super::{BilinearSet, ModelError, Point, SetLp, Triple};
use crate::ecr::LinearCut;
use crate::lp::{Cmp, LpModel, Sense, VarId};
use crate::network::{ArcId, Balance, Network};
use crate::rational;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// `Σ coef·y ≤ rhs` over the binary y variables of a program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YRow {
    pub coefs: Vec<(usize, i64)>,
    pub rhs: i64,
}

/// A benchmark mixed-binary bilinear program:
/// min cᵀx + dᵀy + eᵀz  s.t. x ∈ Ξ, y binary with side rows, z_k = y_j x_i.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub net: Network,
    pub ny: usize,
    /// `j` is the program-level y index
    pub triples: Vec<Triple>,
    pub y_rows: Vec<YRow>,
    pub cost_x: BTreeMap<ArcId, f64>,
    pub cost_y: Vec<f64>,
    pub cost_z: BTreeMap<u32, f64>,
}

pub type ProgramLp = SetLp;

impl Program {
    pub fn validate(&self) -> Result<(), ModelError> {
        BilinearSet::new(self.net.clone(), self.ny, self.triples.clone())?;
        for r in &self.y_rows {
            if let Some(&(j, _)) = r.coefs.iter().find(|(j, _)| *j >= self.ny) {
                return Err(ModelError::YOutOfRange(j));
            }
        }
        if self.cost_y.len() != self.ny {
            return Err(ModelError::Malformed("cost_y length differs from ny".into()));
        }
        Ok(())
    }

    /// The set over the y variables `ys` (local index = position in `ys`).
    pub fn set(&self, ys: &[usize]) -> BilinearSet {
        let pos: HashMap<usize, usize> = ys.iter().enumerate().map(|(p, &j)| (j, p)).collect();
        let triples = self
            .triples
            .iter()
            .filter_map(|t| pos.get(&t.j).map(|&p| Triple { k: t.k, arc: t.arc, j: p }))
            .collect();
        BilinearSet::with_labels(self.net.clone(), ys.len(), triples, ys.to_vec()).expect("program is valid")
    }

    pub fn y_rows_hold(&self, y: &[f64]) -> bool {
        self.y_rows.iter().all(|r| r.coefs.iter().map(|&(j, c)| c as f64 * y[j]).sum::<f64>() <= r.rhs as f64 + 1e-9)
    }

    fn skeleton(&self) -> SetLp {
        let mut lp = LpModel::new(Sense::Minimize);
        let x: BTreeMap<ArcId, VarId> = self
            .net
            .arcs()
            .iter()
            .map(|a| {
                let c = self.cost_x.get(&a.id).copied().unwrap_or(0.0);
                (a.id, lp.add_var(format!("x{}", a.id), 0.0, rational::to_f64(&a.capacity), c))
            })
            .collect();
        let y: Vec<VarId> = (0..self.ny).map(|j| lp.add_var(format!("y{j}"), 0.0, 1.0, self.cost_y[j])).collect();
        let z = self
            .triples
            .iter()
            .map(|t| {
                let c = self.cost_z.get(&t.k).copied().unwrap_or(0.0);
                (t.k, lp.add_var(format!("z{}", t.k), 0.0, f64::INFINITY, c))
            })
            .collect();
        BilinearSet::add_xi_rows(&self.net, &mut lp, &x, "");
        for (i, r) in self.y_rows.iter().enumerate() {
            lp.add_row(format!("yrow{i}"), r.coefs.iter().map(|&(j, c)| (y[j], c as f64)).collect(), Cmp::Le, r.rhs as f64);
        }
        SetLp { lp, x, y, z }
    }

    /// LP relaxation with McCormick envelopes for every product.
    pub fn mccormick(&self) -> ProgramLp {
        let mut m = self.skeleton();
        for t in &self.triples {
            let u = rational::to_f64(&self.net.arc(t.arc).expect("arc").capacity);
            add_envelope(&mut m.lp, m.z[&t.k], m.x[&t.arc], m.y[t.j], u, &format!("{}", t.k));
        }
        m
    }

    /// Level-1 RLT: every structural row times y_j and (1 − y_j), linearized;
    /// products x_i y_j reuse z when a triple matches.
    pub fn rlt1(&self) -> ProgramLp {
        let mut m = self.mccormick();
        let pair: HashMap<(ArcId, usize), u32> = self.triples.iter().map(|t| ((t.arc, t.j), t.k)).collect();
        // W[(arc, j)] = x_arc y_j
        let mut w: HashMap<(ArcId, usize), VarId> = HashMap::new();
        for j in 0..self.ny {
            for a in self.net.arcs() {
                let u = rational::to_f64(&a.capacity);
                let var = match pair.get(&(a.id, j)) {
                    Some(k) => m.z[k],
                    None => {
                        let v = m.lp.add_var(format!("w{}_{j}", a.id), 0.0, f64::INFINITY, 0.0);
                        add_envelope(&mut m.lp, v, m.x[&a.id], m.y[j], u, &format!("w{}_{j}", a.id));
                        v
                    }
                };
                w.insert((a.id, j), var);
            }
        }
        // Y[(k, j)] = y_k y_j, k < j
        let mut yy: HashMap<(usize, usize), VarId> = HashMap::new();
        for k in 0..self.ny {
            for j in k + 1..self.ny {
                let v = m.lp.add_var(format!("yy{k}_{j}"), 0.0, 1.0, 0.0);
                m.lp.add_row(format!("yyk{k}_{j}"), vec![(v, 1.0), (m.y[k], -1.0)], Cmp::Le, 0.0);
                m.lp.add_row(format!("yyj{k}_{j}"), vec![(v, 1.0), (m.y[j], -1.0)], Cmp::Le, 0.0);
                m.lp.add_row(format!("yyl{k}_{j}"), vec![(v, 1.0), (m.y[k], -1.0), (m.y[j], -1.0)], Cmp::Ge, -1.0);
                yy.insert((k, j), v);
            }
        }
        let yprod = |k: usize, j: usize| -> Option<VarId> {
            match k.cmp(&j) {
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Less => Some(yy[&(k, j)]),
                std::cmp::Ordering::Greater => Some(yy[&(j, k)]),
            }
        };
        // structural rows as (x terms, y terms, rhs, cmp)
        let mut rows: Vec<(String, Vec<(ArcId, f64)>, Vec<(usize, f64)>, f64, Cmp)> = Vec::new();
        for n in self.net.nodes() {
            let cmp = match n.balance {
                Balance::Eq => Cmp::Eq,
                Balance::Ge => Cmp::Ge,
                Balance::Le => Cmp::Le,
                Balance::Free => continue,
            };
            let mut xs: Vec<(ArcId, f64)> = self.net.out_arcs(n.id).iter().map(|&a| (a, 1.0)).collect();
            xs.extend(self.net.in_arcs(n.id).iter().map(|&a| (a, -1.0)));
            rows.push((format!("bal{}", n.id), xs, vec![], rational::to_f64(&n.supply), cmp));
        }
        for (i, r) in self.y_rows.iter().enumerate() {
            let ys = r.coefs.iter().map(|&(j, c)| (j, c as f64)).collect();
            rows.push((format!("yrow{i}"), vec![], ys, r.rhs as f64, Cmp::Le));
        }
        for j in 0..self.ny {
            let yj = m.y[j];
            for (name, xs, ys, rhs, cmp) in &rows {
                // g·y_j:  Σ α W + Σ β Y − rhs y_j (cmp) 0
                let mut by: Vec<(VarId, f64)> = xs.iter().map(|&(a, c)| (w[&(a, j)], c)).collect();
                let mut coef_yj = -rhs;
                for &(k, c) in ys {
                    match yprod(k, j) {
                        Some(v) => by.push((v, c)),
                        None => coef_yj += c,
                    }
                }
                by.push((yj, coef_yj));
                m.lp.add_row(format!("rlt_{name}_y{j}"), by.clone(), *cmp, 0.0);
                // g·(1 − y_j) = g − g·y_j
                let mut comp: Vec<(VarId, f64)> = xs.iter().map(|&(a, c)| (m.x[&a], c)).collect();
                comp.extend(ys.iter().map(|&(k, c)| (m.y[k], c)));
                comp.extend(by.into_iter().map(|(v, c)| (v, -c)));
                m.lp.add_row(format!("rlt_{name}_1my{j}"), comp, *cmp, *rhs);
            }
        }
        m
    }

    /// Objective value of a point in program coordinates.
    pub fn objective(&self, p: &Point) -> f64 {
        self.cost_x.iter().map(|(a, c)| c * p.x(*a)).sum::<f64>()
            + self.cost_y.iter().zip(&p.y).map(|(c, v)| c * v).sum::<f64>()
            + self.cost_z.iter().map(|(k, c)| c * p.z(*k)).sum::<f64>()
    }
}

fn add_envelope(lp: &mut LpModel, z: VarId, x: VarId, y: VarId, u: f64, tag: &str) {
    lp.add_row(format!("mc_lo{tag}"), vec![(z, 1.0), (y, -u), (x, -1.0)], Cmp::Ge, -u);
    lp.add_row(format!("mc_uy{tag}"), vec![(z, 1.0), (y, -u)], Cmp::Le, 0.0);
    lp.add_row(format!("mc_ux{tag}"), vec![(z, 1.0), (x, -1.0)], Cmp::Le, 0.0);
}

impl SetLp {
    /// Appends a cut generated on `set`, mapping its local y indices to this
    /// LP's y variables through the set's labels.
    pub fn add_lifted_cut(&mut self, set: &BilinearSet, cut: &LinearCut, name: impl Into<String>) {
        let mut coefs: Vec<(VarId, f64)> = cut.q.iter().map(|(a, c)| (self.x[a], rational::to_f64(c))).collect();
        coefs.extend(cut.r.iter().enumerate().map(|(j, c)| (self.y[set.y_ids()[j]], rational::to_f64(c))));
        coefs.extend(cut.s.iter().map(|(k, c)| (self.z[k], rational::to_f64(c))));
        coefs.retain(|c| c.1 != 0.0);
        self.lp.add_row(name, coefs, Cmp::Ge, rational::to_f64(&cut.t));
    }

    /// Restriction of a program-level point to the coordinates of `set`.
    pub fn local_point(p: &Point, set: &BilinearSet) -> Point {
        Point {
            x: p.x.clone(),
            y: set.y_ids().iter().map(|&j| p.y[j]).collect(),
            z: set.triples().iter().map(|t| (t.k, p.z(t.k))).collect(),
        }
    }
}
