//! Directed networks and their flow-balance rows.

use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for ArcId {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(ArcId)
    }
}

impl std::str::FromStr for NodeId {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(NodeId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn factor(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Sign::Pos => "+",
            Sign::Neg => "-",
        })
    }
}

/// Which flow-balance rows of a node belong to Ξ.
///
/// `Eq` keeps both the positive and the negative row (net outflow equals the
/// supply). Benchmark formulations print one-sided rows: a supply row
/// `Σ_out x ≤ s` is the negative row with f = s, a demand row `Σ_in x ≥ d`
/// is the negative row with f = −d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Balance {
    #[default]
    Eq,
    /// only the positive row: net outflow ≥ f
    Ge,
    /// only the negative row: net outflow ≤ f
    Le,
    /// no row at all
    Free,
}

impl Balance {
    pub fn allows(self, sign: Sign) -> bool {
        matches!(
            (self, sign),
            (Balance::Eq, _) | (Balance::Ge, Sign::Pos) | (Balance::Le, Sign::Neg)
        )
    }
}

/// Index of a flow-balance inequality: `i⁺` or `i⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowBalanceRef {
    pub node: NodeId,
    pub sign: Sign,
}

impl FlowBalanceRef {
    pub fn new(node: u32, sign: Sign) -> Self {
        FlowBalanceRef { node: NodeId(node), sign }
    }
}

impl fmt::Display for FlowBalanceRef {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}{}", self.node, self.sign)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub supply: Rational,
    pub balance: Balance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub id: ArcId,
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: Rational,
}

/// Sparse row `Σ coefs·x ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRow {
    pub coefs: BTreeMap<ArcId, Rational>,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown arc {0}")]
    UnknownArc(ArcId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate arc id {0}")]
    DuplicateArc(ArcId),
    #[error("arc {0} is a self-loop")]
    SelfLoop(ArcId),
    #[error("arc {0} has a negative capacity")]
    NegativeCapacity(ArcId),
    #[error("malformed network: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    node_pos: HashMap<NodeId, usize>,
    arc_pos: HashMap<ArcId, usize>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.arcs == other.arcs
    }
}

impl Network {
    pub fn new(nodes: Vec<Node>, arcs: Vec<Arc>) -> Result<Self, NetworkError> {
        let mut node_pos = HashMap::new();
        for (p, n) in nodes.iter().enumerate() {
            if node_pos.insert(n.id, p).is_some() {
                return Err(NetworkError::DuplicateNode(n.id));
            }
        }
        let mut arc_pos = HashMap::new();
        let mut out_arcs = vec![Vec::new(); nodes.len()];
        let mut in_arcs = vec![Vec::new(); nodes.len()];
        for (p, a) in arcs.iter().enumerate() {
            if arc_pos.insert(a.id, p).is_some() {
                return Err(NetworkError::DuplicateArc(a.id));
            }
            if a.tail == a.head {
                return Err(NetworkError::SelfLoop(a.id));
            }
            if a.capacity.is_negative() {
                return Err(NetworkError::NegativeCapacity(a.id));
            }
            let t = *node_pos.get(&a.tail).ok_or(NetworkError::UnknownNode(a.tail))?;
            let h = *node_pos.get(&a.head).ok_or(NetworkError::UnknownNode(a.head))?;
            out_arcs[t].push(a.id);
            in_arcs[h].push(a.id);
        }
        for v in out_arcs.iter_mut().chain(in_arcs.iter_mut()) {
            v.sort();
        }
        Ok(Network { nodes, arcs, node_pos, arc_pos, out_arcs, in_arcs })
    }

    /// Builds a network from `(tail, head)` pairs; arc ids are 1-based positions,
    /// supplies zero, capacities given.
    pub fn from_pairs(node_ids: &[u32], pairs: &[(u32, u32)], capacity: i64) -> Result<Self, NetworkError> {
        let nodes = node_ids
            .iter()
            .map(|&id| Node { id: NodeId(id), supply: rational::zero(), balance: Balance::Eq })
            .collect();
        let arcs = pairs
            .iter()
            .enumerate()
            .map(|(p, &(t, h))| Arc {
                id: ArcId(p as u32 + 1),
                tail: NodeId(t),
                head: NodeId(h),
                capacity: rational::int(capacity),
            })
            .collect();
        Network::new(nodes, arcs)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, NetworkError> {
        self.node_pos.get(&id).map(|&p| &self.nodes[p]).ok_or(NetworkError::UnknownNode(id))
    }

    pub fn arc(&self, id: ArcId) -> Result<&Arc, NetworkError> {
        self.arc_pos.get(&id).map(|&p| &self.arcs[p]).ok_or(NetworkError::UnknownArc(id))
    }

    pub fn has_node(&self, id: NodeId) -> bool {
        self.node_pos.contains_key(&id)
    }

    pub fn has_arc(&self, id: ArcId) -> bool {
        self.arc_pos.contains_key(&id)
    }

    /// Arc with tail `t` and head `h` (first by id when parallel arcs exist).
    pub fn arc_between(&self, t: u32, h: u32) -> Option<ArcId> {
        let p = *self.node_pos.get(&NodeId(t))?;
        self.out_arcs[p].iter().copied().find(|a| self.arcs[self.arc_pos[a]].head == NodeId(h))
    }

    pub fn out_arcs(&self, v: NodeId) -> &[ArcId] {
        self.node_pos.get(&v).map(|&p| self.out_arcs[p].as_slice()).unwrap_or(&[])
    }

    pub fn in_arcs(&self, v: NodeId) -> &[ArcId] {
        self.node_pos.get(&v).map(|&p| self.in_arcs[p].as_slice()).unwrap_or(&[])
    }

    /// Incident arcs in ascending id order.
    pub fn incident_arcs(&self, v: NodeId) -> Vec<ArcId> {
        let mut all: Vec<ArcId> = self.out_arcs(v).iter().chain(self.in_arcs(v)).copied().collect();
        all.sort();
        all
    }

    /// Undirected neighbours in ascending id order.
    pub fn neighbors(&self, v: NodeId) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self
            .incident_arcs(v)
            .into_iter()
            .map(|a| {
                let arc = self.arc(a).expect("incident arc");
                if arc.tail == v {
                    arc.head
                } else {
                    arc.tail
                }
            })
            .collect();
        set.into_iter().collect()
    }

    /// +1 if `v` is the tail of `a`, −1 if it is the head, 0 otherwise.
    pub fn incidence(&self, v: NodeId, a: ArcId) -> i64 {
        match self.arc(a) {
            Ok(arc) if arc.tail == v => 1,
            Ok(arc) if arc.head == v => -1,
            _ => 0,
        }
    }

    pub fn row_available(&self, r: FlowBalanceRef) -> bool {
        self.node(r.node).map(|n| n.balance.allows(r.sign)).unwrap_or(false)
    }

    /// Rows of Ξ that exist, in node order, positive before negative.
    pub fn available_rows(&self) -> Vec<FlowBalanceRef> {
        let mut out = Vec::new();
        for n in &self.nodes {
            for s in [Sign::Pos, Sign::Neg] {
                if n.balance.allows(s) {
                    out.push(FlowBalanceRef { node: n.id, sign: s });
                }
            }
        }
        out
    }

    pub fn flow_balance_row(&self, r: FlowBalanceRef) -> Result<SparseRow, NetworkError> {
        let node = self.node(r.node)?;
        let s = rational::int(r.sign.factor());
        let mut coefs = BTreeMap::new();
        for &a in self.out_arcs(r.node) {
            *coefs.entry(a).or_insert_with(rational::zero) += &s;
        }
        for &a in self.in_arcs(r.node) {
            *coefs.entry(a).or_insert_with(rational::zero) -= &s;
        }
        coefs.retain(|_, v: &mut Rational| !v.is_zero());
        Ok(SparseRow { coefs, rhs: &node.supply * &s })
    }

    pub fn incident_endpoint_count(&self, node_set: &BTreeSet<NodeId>, arc: ArcId) -> Result<u8, NetworkError> {
        let a = self.arc(arc)?;
        Ok(node_set.contains(&a.tail) as u8 + node_set.contains(&a.head) as u8)
    }

    /// Connectivity of the subgraph induced by `set` in the undirected graph.
    pub fn is_connected(&self, set: &BTreeSet<NodeId>) -> bool {
        let Some(&start) = set.iter().next() else { return true };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if set.contains(&w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == set.len()
    }
}

// ---- JSON ----

#[derive(Serialize, Deserialize)]
pub(crate) struct NodeJson {
    pub id: u32,
    #[serde(with = "rational::serde_q", default = "rational::zero")]
    pub supply: Rational,
    #[serde(default, skip_serializing_if = "is_eq")]
    pub rows: Balance,
}

fn is_eq(b: &Balance) -> bool {
    *b == Balance::Eq
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ArcJson {
    pub id: u32,
    pub tail: u32,
    pub head: u32,
    #[serde(with = "rational::serde_q")]
    pub capacity: Rational,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct NetworkJson {
    pub nodes: Vec<NodeJson>,
    pub arcs: Vec<ArcJson>,
}

impl NetworkJson {
    pub fn build(self) -> Result<Network, NetworkError> {
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| Node { id: NodeId(n.id), supply: n.supply, balance: n.rows })
            .collect();
        let arcs = self
            .arcs
            .into_iter()
            .map(|a| Arc { id: ArcId(a.id), tail: NodeId(a.tail), head: NodeId(a.head), capacity: a.capacity })
            .collect();
        Network::new(nodes, arcs)
    }

    pub fn from_network(net: &Network) -> Self {
        NetworkJson {
            nodes: net
                .nodes
                .iter()
                .map(|n| NodeJson { id: n.id.0, supply: n.supply.clone(), rows: n.balance })
                .collect(),
            arcs: net
                .arcs
                .iter()
                .map(|a| ArcJson { id: a.id.0, tail: a.tail.0, head: a.head.0, capacity: a.capacity.clone() })
                .collect(),
        }
    }
}

impl Network {
    /// Parses `{nodes:[{id, supply, rows?}], arcs:[{id, tail, head, capacity}]}`.
    pub fn from_json(s: &str) -> Result<Self, NetworkError> {
        let raw: NetworkJson = serde_json::from_str(s).map_err(|e| NetworkError::Malformed(e.to_string()))?;
        raw.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkJson::from_network(self)).expect("network serializes")
    }
}
