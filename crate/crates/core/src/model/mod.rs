//! The bilinear set S = {(x, y, z) : x ∈ Ξ, y ∈ Δ_m, z_k = y_j x_i} and its
//! relaxations.

mod extended;
mod mccormick;
mod program;

pub use extended::{extended_formulation, ExtendedLp};
pub use mccormick::{mccormick, SetLp};
pub use program::{Program, ProgramLp, YRow};

use crate::lp::{Cmp, LpModel, VarId};
use crate::network::{ArcId, Balance, Network, NetworkError, NodeId};
use crate::rational::{self, Rational};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// `z_k = y_j · x_arc`. `j` is a 0-based index into the set's y vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub k: u32,
    #[serde(rename = "i")]
    pub arc: ArcId,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("z index {0} used twice")]
    DuplicateK(u32),
    #[error("arc {0} and y index {1} appear in two triples")]
    DuplicatePair(ArcId, usize),
    #[error("y index {0} out of range")]
    YOutOfRange(usize),
    #[error("malformed input: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSet {
    net: Network,
    m: usize,
    triples: Vec<Triple>,
    by_pair: HashMap<(ArcId, usize), usize>,
    by_k: HashMap<u32, usize>,
    /// labels of the y variables in an enclosing program (defaults to 0..m)
    y_ids: Vec<usize>,
}

impl BilinearSet {
    pub fn new(net: Network, m: usize, triples: Vec<Triple>) -> Result<Self, ModelError> {
        Self::with_labels(net, m, triples, (0..m).collect())
    }

    pub fn with_labels(net: Network, m: usize, triples: Vec<Triple>, y_ids: Vec<usize>) -> Result<Self, ModelError> {
        if y_ids.len() != m {
            return Err(ModelError::Malformed(format!("{} y labels for m = {m}", y_ids.len())));
        }
        let mut by_pair = HashMap::new();
        let mut by_k = HashMap::new();
        for (p, t) in triples.iter().enumerate() {
            net.arc(t.arc)?;
            if t.j >= m {
                return Err(ModelError::YOutOfRange(t.j));
            }
            if by_k.insert(t.k, p).is_some() {
                return Err(ModelError::DuplicateK(t.k));
            }
            if by_pair.insert((t.arc, t.j), p).is_some() {
                return Err(ModelError::DuplicatePair(t.arc, t.j));
            }
        }
        Ok(BilinearSet { net, m, triples, by_pair, by_k, y_ids })
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn y_ids(&self) -> &[usize] {
        &self.y_ids
    }

    pub fn triple(&self, k: u32) -> Option<&Triple> {
        self.by_k.get(&k).map(|&p| &self.triples[p])
    }

    pub fn triple_for(&self, arc: ArcId, j: usize) -> Option<&Triple> {
        self.by_pair.get(&(arc, j)).map(|&p| &self.triples[p])
    }

    pub fn capacity(&self, arc: ArcId) -> Rational {
        self.net.arc(arc).map(|a| a.capacity.clone()).unwrap_or_else(|_| rational::zero())
    }

    /// Adds the rows of Ξ (one row per node and per existing sign; `Eq`
    /// nodes give a single equality) over the given x variables.
    pub(crate) fn add_xi_rows(net: &Network, lp: &mut LpModel, x: &BTreeMap<ArcId, VarId>, tag: &str) {
        for n in net.nodes() {
            let cmp = match n.balance {
                Balance::Eq => Cmp::Eq,
                Balance::Ge => Cmp::Ge,
                Balance::Le => Cmp::Le,
                Balance::Free => continue,
            };
            lp.add_row(format!("{tag}bal{}", n.id), balance_terms(net, n.id, x, 1.0), cmp, rational::to_f64(&n.supply));
        }
    }
}

/// Σ_out x − Σ_in x, scaled.
pub(crate) fn balance_terms(net: &Network, v: NodeId, x: &BTreeMap<ArcId, VarId>, scale: f64) -> Vec<(VarId, f64)> {
    let mut t: Vec<(VarId, f64)> = net.out_arcs(v).iter().map(|a| (x[a], scale)).collect();
    t.extend(net.in_arcs(v).iter().map(|a| (x[a], -scale)));
    t
}

/// A point (x, y, z) in the space of a set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: BTreeMap<ArcId, f64>,
    pub y: Vec<f64>,
    pub z: BTreeMap<u32, f64>,
}

impl Point {
    pub fn x(&self, a: ArcId) -> f64 {
        self.x.get(&a).copied().unwrap_or(0.0)
    }

    pub fn z(&self, k: u32) -> f64 {
        self.z.get(&k).copied().unwrap_or(0.0)
    }

    pub fn conforms(&self, s: &BilinearSet) -> bool {
        self.y.len() == s.m()
            && s.net().arcs().iter().all(|a| self.x.contains_key(&a.id))
            && s.triples().iter().all(|t| self.z.contains_key(&t.k))
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let p: Point = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        if p.x.values().chain(&p.y).chain(p.z.values()).any(|v| !v.is_finite()) {
            return Err(ModelError::Malformed("non-finite coordinate".into()));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("point serializes")
    }

    /// The point with binary y = `yhat` and z_k = x_i ŷ_j.
    pub fn lifted(s: &BilinearSet, x: BTreeMap<ArcId, f64>, yhat: &[f64]) -> Point {
        let z = s.triples().iter().map(|t| (t.k, x[&t.arc] * yhat[t.j])).collect();
        Point { x, y: yhat.to_vec(), z }
    }
}

/// JSON form of a set: the network schema plus `{m, triples, family, params}`.
#[derive(Serialize, Deserialize)]
pub(crate) struct SetJson {
    #[serde(flatten)]
    pub network: crate::network::NetworkJson,
    pub m: usize,
    pub triples: Vec<Triple>,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl BilinearSet {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: SetJson = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        if raw.m > 64 {
            return Err(ModelError::Malformed("m too large".into()));
        }
        BilinearSet::new(raw.network.build()?, raw.m, raw.triples)
    }

    pub fn to_json(&self) -> String {
        let raw = SetJson {
            network: crate::network::NetworkJson::from_network(&self.net),
            m: self.m,
            triples: self.triples.clone(),
            family: Some("set".into()),
            params: serde_json::Value::Null,
        };
        serde_json::to_string_pretty(&raw).expect("set serializes")
    }
}
