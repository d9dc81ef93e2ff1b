use super::StructureError;
use crate::ecr::EcrAssignment;
use crate::model::BilinearSet;
use crate::network::{ArcId, FlowBalanceRef, Network, NodeId, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Which endpoint of the anchor arc lies in the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Tail,
    Head,
}

/// The four sign patterns: (i) head/+, (ii) head/−, (iii) tail/+, (iv) tail/−.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TreeCase {
    I,
    II,
    III,
    IV,
}

impl TreeCase {
    pub fn of(side: Endpoint, sign: Sign) -> TreeCase {
        match (side, sign) {
            (Endpoint::Head, Sign::Pos) => TreeCase::I,
            (Endpoint::Head, Sign::Neg) => TreeCase::II,
            (Endpoint::Tail, Sign::Pos) => TreeCase::III,
            (Endpoint::Tail, Sign::Neg) => TreeCase::IV,
        }
    }

    pub fn side(self) -> Endpoint {
        match self {
            TreeCase::I | TreeCase::II => Endpoint::Head,
            TreeCase::III | TreeCase::IV => Endpoint::Tail,
        }
    }

    pub fn sign(self) -> Sign {
        match self {
            TreeCase::I | TreeCase::III => Sign::Pos,
            TreeCase::II | TreeCase::IV => Sign::Neg,
        }
    }

    /// Sign of the rows of Ĩ₁ (Ĩ₂ gets the opposite).
    pub fn first_sign(self) -> Sign {
        match self {
            TreeCase::I | TreeCase::IV => Sign::Pos,
            TreeCase::II | TreeCase::III => Sign::Neg,
        }
    }
}

/// A connected node set Ĩ holding exactly one endpoint of the anchor arc,
/// split into Ĩ₁ (rows times y) and Ĩ₂ (rows times 1 − y).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeStructure {
    pub class_k: u32,
    pub anchor: ArcId,
    pub side: Endpoint,
    pub part1: BTreeSet<NodeId>,
    pub part2: BTreeSet<NodeId>,
}

impl TreeStructure {
    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.part1.union(&self.part2).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeEnumOptions {
    pub max_nodes: usize,
    /// all partitions up to this many nodes, sampled beyond
    pub partition_cap_bits: u32,
    pub seed: u64,
}

impl Default for TreeEnumOptions {
    fn default() -> Self {
        TreeEnumOptions { max_nodes: 3, partition_cap_bits: 10, seed: 0 }
    }
}

/// Connected node sets of size ≤ `max_nodes` containing exactly one endpoint
/// of `anchor`, ordered by size, then side (tail first), then node list.
pub fn tree_node_sets(net: &Network, anchor: ArcId, max_nodes: usize) -> Vec<(Vec<NodeId>, Endpoint)> {
    let Ok(arc) = net.arc(anchor) else { return Vec::new() };
    let mut out = Vec::new();
    for (side, root, other) in [(Endpoint::Tail, arc.tail, arc.head), (Endpoint::Head, arc.head, arc.tail)] {
        if max_nodes == 0 {
            break;
        }
        let mut level: BTreeSet<Vec<NodeId>> = BTreeSet::from([vec![root]]);
        for size in 1..=max_nodes {
            out.extend(level.iter().map(|s| (s.clone(), side)));
            if size == max_nodes {
                break;
            }
            let mut next = BTreeSet::new();
            for set in &level {
                for v in set {
                    for w in net.neighbors(*v) {
                        if w == other || set.binary_search(&w).is_ok() {
                            continue;
                        }
                        let mut grown = set.clone();
                        let pos = grown.binary_search(&w).unwrap_err();
                        grown.insert(pos, w);
                        next.insert(grown);
                    }
                }
            }
            level = next;
        }
    }
    out.sort_by(|a, b| (a.0.len(), a.1, &a.0).cmp(&(b.0.len(), b.1, &b.0)));
    out
}

fn partition_masks(n: usize, opts: &TreeEnumOptions) -> Vec<u64> {
    if n as u32 <= opts.partition_cap_bits {
        return (0..1u64 << n).collect();
    }
    let cap = 1usize << opts.partition_cap_bits;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ n as u64);
    let mut masks: BTreeSet<u64> = BTreeSet::new();
    while masks.len() < cap {
        // uniform over subsets of the first 64 nodes
        let all = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        masks.insert(rng.gen::<u64>() & all);
    }
    masks.into_iter().collect()
}

pub fn enumerate_trees(s: &BilinearSet, class_k: u32, max_nodes: usize) -> Vec<TreeStructure> {
    enumerate_trees_with(s, class_k, &TreeEnumOptions { max_nodes, ..Default::default() })
}

/// Every tree node set with all its partitions (bit p of the mask puts the
/// p-th smallest node into Ĩ₁).
pub fn enumerate_trees_with(s: &BilinearSet, class_k: u32, opts: &TreeEnumOptions) -> Vec<TreeStructure> {
    let Some(t) = s.triple(class_k) else { return Vec::new() };
    let mut out = Vec::new();
    for (nodes, side) in tree_node_sets(s.net(), t.arc, opts.max_nodes) {
        for mask in partition_masks(nodes.len(), opts) {
            let (mut part1, mut part2) = (BTreeSet::new(), BTreeSet::new());
            for (p, v) in nodes.iter().enumerate() {
                if mask >> p & 1 == 1 {
                    part1.insert(*v);
                } else {
                    part2.insert(*v);
                }
            }
            out.push(TreeStructure { class_k, anchor: t.arc, side, part1, part2 });
        }
    }
    out
}

/// Partitions of `nodes` whose rows all exist in Ξ for class sign `sign`:
/// a node with only one row is forced to the side that uses that sign.
pub fn feasible_partitions(
    s: &BilinearSet,
    nodes: &[NodeId],
    side: Endpoint,
    sign: Sign,
) -> Vec<(BTreeSet<NodeId>, BTreeSet<NodeId>)> {
    let first = TreeCase::of(side, sign).first_sign();
    let mut fixed: Vec<Option<bool>> = Vec::with_capacity(nodes.len());
    for v in nodes {
        let in1 = s.net().row_available(FlowBalanceRef { node: *v, sign: first });
        let in2 = s.net().row_available(FlowBalanceRef { node: *v, sign: first.flip() });
        fixed.push(match (in1, in2) {
            (true, true) => None,
            (true, false) => Some(true),
            (false, true) => Some(false),
            (false, false) => return Vec::new(),
        });
    }
    let free: Vec<usize> = (0..nodes.len()).filter(|&p| fixed[p].is_none()).collect();
    let mut out = Vec::with_capacity(1 << free.len().min(20));
    for mask in 0..1u64 << free.len().min(20) {
        let (mut p1, mut p2) = (BTreeSet::new(), BTreeSet::new());
        for (p, v) in nodes.iter().enumerate() {
            let one = match fixed[p] {
                Some(b) => b,
                None => mask >> free.iter().position(|&q| q == p).expect("free") & 1 == 1,
            };
            if one {
                p1.insert(*v);
            } else {
                p2.insert(*v);
            }
        }
        out.push((p1, p2));
    }
    out
}

fn actual_side(s: &BilinearSet, ts: &TreeStructure) -> Result<Endpoint, StructureError> {
    let arc = s.net().arc(ts.anchor).map_err(|e| StructureError::Invalid(e.to_string()))?;
    if !ts.part1.is_disjoint(&ts.part2) {
        return Err(StructureError::Invalid("partition sides overlap".into()));
    }
    let nodes = ts.nodes();
    match (nodes.contains(&arc.tail), nodes.contains(&arc.head)) {
        (true, false) => Ok(Endpoint::Tail),
        (false, true) => Ok(Endpoint::Head),
        _ => Err(StructureError::Invalid(format!("arc {} must have exactly one endpoint in the tree", ts.anchor))),
    }
}

/// The assignment of the case fixed by the tree's side and `sign`.
pub fn tree_to_assignment(s: &BilinearSet, ts: &TreeStructure, sign: Sign) -> Result<EcrAssignment, StructureError> {
    tree_to_assignment_case(s, ts, TreeCase::of(ts.side, sign))
}

/// `[{i^σ}_{Ĩ₁}, {i^{−σ}}_{Ĩ₂}]` with σ given by `case`.
pub fn tree_to_assignment_case(
    s: &BilinearSet,
    ts: &TreeStructure,
    case: TreeCase,
) -> Result<EcrAssignment, StructureError> {
    if s.m() != 1 {
        return Err(StructureError::Invalid("trees generate assignments for m = 1 only".into()));
    }
    let side = actual_side(s, ts)?;
    if side != ts.side || case.side() != side {
        return Err(StructureError::CaseMismatch { anchor: ts.anchor, requested: case, needed: side });
    }
    let first = case.first_sign();
    let mut a = EcrAssignment::empty(ts.class_k, case.sign(), 1);
    a.layers[0] = ts.part1.iter().map(|&node| FlowBalanceRef { node, sign: first }).collect();
    a.ibar = ts.part2.iter().map(|&node| FlowBalanceRef { node, sign: first.flip() }).collect();
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecr::aggregate;
    use crate::fixtures::{sc_arc, spiked_cycle_set};

    fn ids(v: &[u32]) -> BTreeSet<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn singletons_at_size_one() {
        let s = spiked_cycle_set(1);
        let sets = tree_node_sets(s.net(), sc_arc(1, 5), 1);
        assert_eq!(sets, vec![(vec![NodeId(1)], Endpoint::Tail), (vec![NodeId(5)], Endpoint::Head)]);
    }

    #[test]
    fn path_excludes_both_endpoints() {
        let net = Network::from_pairs(&[1, 2, 3], &[(1, 2), (2, 3)], 5).unwrap();
        let sets: Vec<Vec<u32>> = tree_node_sets(&net, ArcId(1), 3).into_iter().map(|(s, _)| s.iter().map(|v| v.0).collect()).collect();
        assert!(sets.contains(&vec![2]) && sets.contains(&vec![2, 3]) && sets.contains(&vec![1]));
        assert!(!sets.iter().any(|s| s.contains(&1) && s.contains(&2)));
    }

    #[test]
    fn spiked_tree_is_enumerated() {
        let s = spiked_cycle_set(1);
        let k = sc_arc(1, 5).0;
        let trees = enumerate_trees(&s, k, 5);
        let want = TreeStructure {
            class_k: k,
            anchor: sc_arc(1, 5),
            side: Endpoint::Tail,
            part1: ids(&[8, 2]),
            part2: ids(&[4, 1, 6]),
        };
        assert!(trees.contains(&want));
        let a = tree_to_assignment(&s, &want, Sign::Pos).unwrap();
        assert_eq!(a.to_string(), "[{2-,8-}, {1+,4+,6+} | {}, {}] class 1+");
    }

    #[test]
    fn every_small_tree_aggregates() {
        let s = spiked_cycle_set(1);
        for t in s.triples() {
            for ts in enumerate_trees(&s, t.k, 3) {
                for sign in [Sign::Pos, Sign::Neg] {
                    let a = tree_to_assignment(&s, &ts, sign).unwrap();
                    let agg = aggregate(&s, &a).unwrap();
                    let nodes = ts.nodes();
                    let induced = s.net().arcs().iter().filter(|a| nodes.contains(&a.tail) && nodes.contains(&a.head)).count();
                    assert_eq!(agg.cancel_count, induced + 1);
                    assert!(agg.c1() && agg.c2());
                }
            }
        }
    }

    #[test]
    fn wrong_case_is_rejected() {
        let s = spiked_cycle_set(1);
        let ts = TreeStructure { class_k: 1, anchor: ArcId(1), side: Endpoint::Tail, part1: ids(&[1]), part2: BTreeSet::new() };
        assert!(matches!(tree_to_assignment_case(&s, &ts, TreeCase::I), Err(StructureError::CaseMismatch { .. })));
        let lie = TreeStructure { side: Endpoint::Head, ..ts };
        assert!(matches!(tree_to_assignment(&s, &lie, Sign::Pos), Err(StructureError::CaseMismatch { .. })));
    }
}
