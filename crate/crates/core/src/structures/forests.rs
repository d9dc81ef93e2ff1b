use super::StructureError;
use crate::ecr::EcrAssignment;
use crate::model::BilinearSet;
use crate::network::{ArcId, FlowBalanceRef, Network, NodeId, Sign};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// An element of a forest structure: a node of parallel network `j`, a
/// connection node, or a connection arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Member {
    Layer(usize, NodeId),
    Conn(NodeId),
    Arc(ArcId),
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Member::Layer(j, v) => write!(f, "node {v} of layer {}", j + 1),
            Member::Conn(v) => write!(f, "connection node {v}"),
            Member::Arc(a) => write!(f, "connection arc {a}"),
        }
    }
}

/// Node sets Ĩ^j per parallel network, connection nodes Ĩ and connection
/// arcs J̃ for the class triple `class_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ForestStructure {
    pub class_k: u32,
    pub layers: Vec<BTreeSet<NodeId>>,
    pub conn: BTreeSet<NodeId>,
    pub arcs: BTreeSet<ArcId>,
}

impl ForestStructure {
    pub fn empty(class_k: u32, m: usize) -> Self {
        ForestStructure { class_k, layers: vec![BTreeSet::new(); m], conn: BTreeSet::new(), arcs: BTreeSet::new() }
    }

    pub fn members(&self) -> Vec<Member> {
        let mut out: Vec<Member> = Vec::new();
        for (j, l) in self.layers.iter().enumerate() {
            out.extend(l.iter().map(|&v| Member::Layer(j, v)));
        }
        out.extend(self.conn.iter().map(|&v| Member::Conn(v)));
        out.extend(self.arcs.iter().map(|&a| Member::Arc(a)));
        out
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum::<usize>() + self.conn.len() + self.arcs.len()
    }

    pub fn from_members(class_k: u32, m: usize, members: &[Member]) -> Self {
        let mut fs = Self::empty(class_k, m);
        for mem in members {
            match *mem {
                Member::Layer(j, v) => {
                    fs.layers[j].insert(v);
                }
                Member::Conn(v) => {
                    fs.conn.insert(v);
                }
                Member::Arc(a) => {
                    fs.arcs.insert(a);
                }
            }
        }
        fs
    }

    /// All nodes of the forests plus the connection nodes.
    pub fn node_union(&self) -> BTreeSet<NodeId> {
        self.layers.iter().flatten().chain(&self.conn).copied().collect()
    }

    fn touches(&self, v: NodeId, j: usize) -> bool {
        self.conn.contains(&v) || self.layers[j].contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForestCondition {
    Malformed,
    /// the anchor arc is a connection arc xor has exactly one endpoint in Ĩ ∪ Ĩ^{j'}
    AnchorIncidence,
    /// a connection arc has both endpoints in Ĩ ∪ Ĩ^j
    ConnectionArcIncidence,
    /// a node of Ĩ ∩ Ĩ^j is not isolated in Ĩ ∪ Ĩ^j
    SharedNodeIsolation,
    /// forest nodes and connection nodes are not connected in G
    Connected,
    /// a connection arc touches no forest or connection node
    ArcCoverage,
    /// the trees are not vertically connected
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestViolation {
    pub condition: ForestCondition,
    pub detail: String,
}

fn fail<T>(condition: ForestCondition, detail: String) -> Result<T, ForestViolation> {
    Err(ForestViolation { condition, detail })
}

fn check_shape(s: &BilinearSet, fs: &ForestStructure) -> Result<(ArcId, usize), ForestViolation> {
    let Some(t) = s.triple(fs.class_k) else {
        return fail(ForestCondition::Malformed, format!("unknown class {}", fs.class_k));
    };
    if fs.layers.len() != s.m() {
        return fail(ForestCondition::Malformed, format!("{} layers for m = {}", fs.layers.len(), s.m()));
    }
    let net = s.net();
    if let Some(v) = fs.node_union().into_iter().find(|v| !net.has_node(*v)) {
        return fail(ForestCondition::Malformed, format!("unknown node {v}"));
    }
    if let Some(a) = fs.arcs.iter().find(|a| !net.has_arc(**a)) {
        return fail(ForestCondition::Malformed, format!("unknown arc {a}"));
    }
    Ok((t.arc, t.j))
}

/// The pairwise-cancellation conditions; adding members never repairs one
/// of these, except an anchor with no endpoint covered yet.
fn check_pairwise(net: &Network, fs: &ForestStructure, anchor: ArcId, jp: usize) -> Result<(), ForestViolation> {
    let arc = net.arc(anchor).expect("checked");
    let covered = fs.touches(arc.tail, jp) as u8 + fs.touches(arc.head, jp) as u8;
    if covered == 2 || (covered == 1 && fs.arcs.contains(&anchor)) {
        return fail(ForestCondition::AnchorIncidence, format!("anchor arc {anchor} is covered twice"));
    }
    for &a in &fs.arcs {
        let arc = net.arc(a).expect("checked");
        for j in 0..fs.layers.len() {
            if fs.touches(arc.tail, j) && fs.touches(arc.head, j) {
                return fail(
                    ForestCondition::ConnectionArcIncidence,
                    format!("connection arc {a} has both endpoints in layer {}", j + 1),
                );
            }
        }
    }
    for (j, layer) in fs.layers.iter().enumerate() {
        for v in layer.intersection(&fs.conn) {
            if let Some(w) = net.neighbors(*v).into_iter().find(|w| fs.touches(*w, j)) {
                return fail(
                    ForestCondition::SharedNodeIsolation,
                    format!("shared node {v} of layer {} is adjacent to {w}", j + 1),
                );
            }
            let bad = net.incident_arcs(*v).into_iter().find(|a| fs.arcs.contains(a) || (j == jp && *a == anchor));
            if let Some(a) = bad {
                return fail(
                    ForestCondition::SharedNodeIsolation,
                    format!("shared node {v} of layer {} meets arc {a}", j + 1),
                );
            }
        }
    }
    Ok(())
}

fn components(net: &Network, set: &BTreeSet<NodeId>) -> Vec<BTreeSet<NodeId>> {
    let mut left = set.clone();
    let mut out = Vec::new();
    while let Some(&start) = left.iter().next() {
        let mut comp = BTreeSet::from([start]);
        let mut stack = vec![start];
        left.remove(&start);
        while let Some(v) = stack.pop() {
            for w in net.neighbors(v) {
                if left.remove(&w) {
                    comp.insert(w);
                    stack.push(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// Checks the forest conditions in a fixed order and reports the first one
/// that fails. The empty structure (the bare base row) passes.
pub fn validate_forest(s: &BilinearSet, fs: &ForestStructure) -> Result<(), ForestViolation> {
    let (anchor, jp) = check_shape(s, fs)?;
    if fs.size() == 0 {
        return Ok(());
    }
    let net = s.net();
    let arc = net.arc(anchor).expect("checked");
    let covered = fs.touches(arc.tail, jp) as u8 + fs.touches(arc.head, jp) as u8;
    if !(fs.arcs.contains(&anchor) ^ (covered == 1)) {
        return fail(ForestCondition::AnchorIncidence, format!("anchor arc {anchor} is not covered exactly once"));
    }
    check_pairwise(net, fs, anchor, jp)?;

    let union = fs.node_union();
    if !net.is_connected(&union) {
        return fail(ForestCondition::Connected, "forest and connection nodes are not connected".into());
    }
    for &a in &fs.arcs {
        let arc = net.arc(a).expect("checked");
        if union.is_empty() {
            if a != anchor {
                return fail(ForestCondition::ArcCoverage, format!("connection arc {a} without nodes"));
            }
        } else if !union.contains(&arc.tail) && !union.contains(&arc.head) {
            return fail(ForestCondition::ArcCoverage, format!("connection arc {a} touches no node"));
        }
    }

    // trees of every layer, linked by connection arcs and connection-node paths
    let trees: Vec<BTreeSet<NodeId>> = fs.layers.iter().flat_map(|l| components(net, l)).collect();
    if trees.len() > 1 {
        let mut parent: Vec<usize> = (0..trees.len()).collect();
        let link = |group: Vec<usize>, parent: &mut Vec<usize>| {
            for w in group.windows(2) {
                let (a, b) = (find(parent, w[0]), find(parent, w[1]));
                parent[a] = b;
            }
        };
        for &a in &fs.arcs {
            let arc = net.arc(a).expect("checked");
            let group = (0..trees.len())
                .filter(|&t| trees[t].contains(&arc.tail) || trees[t].contains(&arc.head))
                .collect();
            link(group, &mut parent);
        }
        for comp in components(net, &fs.conn) {
            let reach: BTreeSet<NodeId> =
                comp.iter().flat_map(|v| net.neighbors(*v)).chain(comp.iter().copied()).collect();
            let group = (0..trees.len()).filter(|&t| !trees[t].is_disjoint(&reach)).collect();
            link(group, &mut parent);
        }
        let root = find(&mut parent, 0);
        if (1..trees.len()).any(|t| find(&mut parent, t) != root) {
            return fail(ForestCondition::Vertical, "trees are not vertically connected".into());
        }
    }
    Ok(())
}

struct Labeler<'a> {
    net: &'a Network,
    fs: &'a ForestStructure,
    labels: BTreeMap<Member, Sign>,
    queue: VecDeque<Member>,
}

impl Labeler<'_> {
    fn set(&mut self, m: Member, l: Sign) -> Result<(), StructureError> {
        match self.labels.get(&m) {
            Some(&old) if old != l => Err(StructureError::LabelConflict { member: m }),
            Some(_) => Ok(()),
            None => {
                self.labels.insert(m, l);
                self.queue.push_back(m);
                Ok(())
            }
        }
    }

    fn process(&mut self, i: Member) -> Result<(), StructureError> {
        let li = self.labels[&i];
        let fs = self.fs;
        match i {
            Member::Layer(j, v) => {
                for w in self.net.neighbors(v) {
                    if fs.layers[j].contains(&w) {
                        self.set(Member::Layer(j, w), li)?;
                    }
                    if fs.conn.contains(&w) {
                        self.set(Member::Conn(w), li.flip())?;
                    }
                }
                for a in self.net.incident_arcs(v) {
                    if fs.arcs.contains(&a) {
                        let tail = self.net.arc(a).expect("arc").tail == v;
                        self.set(Member::Arc(a), if tail { li } else { li.flip() })?;
                    }
                }
            }
            Member::Conn(v) => {
                for j in 0..fs.layers.len() {
                    if fs.layers[j].contains(&v) {
                        self.set(Member::Layer(j, v), li)?;
                    }
                }
                for w in self.net.neighbors(v) {
                    for j in 0..fs.layers.len() {
                        if fs.layers[j].contains(&w) {
                            self.set(Member::Layer(j, w), li.flip())?;
                        }
                    }
                    if fs.conn.contains(&w) {
                        self.set(Member::Conn(w), li)?;
                    }
                }
                for a in self.net.incident_arcs(v) {
                    if fs.arcs.contains(&a) {
                        let tail = self.net.arc(a).expect("arc").tail == v;
                        self.set(Member::Arc(a), if tail { li.flip() } else { li })?;
                    }
                }
            }
            Member::Arc(a) => {
                let arc = self.net.arc(a).expect("arc");
                let (t, h) = (arc.tail, arc.head);
                for j in 0..fs.layers.len() {
                    if fs.layers[j].contains(&t) {
                        self.set(Member::Layer(j, t), li)?;
                    }
                    if fs.layers[j].contains(&h) {
                        self.set(Member::Layer(j, h), li.flip())?;
                    }
                }
                if fs.conn.contains(&t) {
                    self.set(Member::Conn(t), li.flip())?;
                }
                if fs.conn.contains(&h) {
                    self.set(Member::Conn(h), li)?;
                }
            }
        }
        Ok(())
    }
}

/// Labels of every member by label propagation from the anchor arc: seed at
/// the unique member covering the anchor, then a FIFO sweep over members in
/// insertion order (neighbours in ascending id order). A rule that reaches
/// an already labelled member with the other label is a `LabelConflict`.
pub fn forest_labels(s: &BilinearSet, fs: &ForestStructure, sign: Sign) -> Result<BTreeMap<Member, Sign>, StructureError> {
    let (anchor, jp) = check_shape(s, fs).map_err(|v| StructureError::Invalid(v.detail))?;
    let net = s.net();
    let mut lab = Labeler { net, fs, labels: BTreeMap::new(), queue: VecDeque::new() };
    if fs.size() == 0 {
        return Ok(lab.labels);
    }
    let arc = net.arc(anchor).expect("checked");
    let (t, h) = (arc.tail, arc.head);
    let seed = if fs.arcs.contains(&anchor) {
        (Member::Arc(anchor), sign)
    } else if fs.layers[jp].contains(&h) {
        (Member::Layer(jp, h), sign)
    } else if fs.conn.contains(&t) {
        (Member::Conn(t), sign)
    } else if fs.layers[jp].contains(&t) {
        (Member::Layer(jp, t), sign.flip())
    } else if fs.conn.contains(&h) {
        (Member::Conn(h), sign.flip())
    } else {
        return Err(StructureError::Invalid(format!("no member covers the anchor arc {anchor}")));
    };
    lab.set(seed.0, seed.1)?;
    while let Some(i) = lab.queue.pop_front() {
        lab.process(i)?;
    }
    if let Some(m) = fs.members().into_iter().find(|m| !lab.labels.contains_key(m)) {
        return Err(StructureError::Unreached { member: m });
    }
    Ok(lab.labels)
}

/// The assignment of a labelled forest: layer nodes go to I_j and
/// connection nodes to Ī with their label as row sign; connection arcs
/// labelled + are lower bounds (J), labelled − upper bounds (J̄).
pub fn label_forest(s: &BilinearSet, fs: &ForestStructure, sign: Sign) -> Result<EcrAssignment, StructureError> {
    let labels = forest_labels(s, fs, sign)?;
    let mut a = EcrAssignment::empty(fs.class_k, sign, s.m());
    for (m, l) in labels {
        match m {
            Member::Layer(j, node) => {
                a.layers[j].insert(FlowBalanceRef { node, sign: l });
            }
            Member::Conn(node) => {
                a.ibar.insert(FlowBalanceRef { node, sign: l });
            }
            Member::Arc(arc) => {
                match l {
                    Sign::Pos => a.j_lower.insert(arc),
                    Sign::Neg => a.j_upper.insert(arc),
                };
            }
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ForestEnumOptions {
    /// structures have at most budget + 1 members
    pub budget: usize,
    /// arcs whose endpoints are preferred when the output is truncated
    pub priority: Vec<ArcId>,
    pub max_structures: Option<usize>,
}

fn member_neighbors(net: &Network, m: usize, mem: Member) -> Vec<Member> {
    let mut out = Vec::new();
    match mem {
        Member::Layer(j, v) => {
            out.push(Member::Conn(v));
            for w in net.neighbors(v) {
                out.push(Member::Layer(j, w));
                out.push(Member::Conn(w));
            }
            out.extend(net.incident_arcs(v).into_iter().map(Member::Arc));
        }
        Member::Conn(v) => {
            for w in net.neighbors(v) {
                out.extend((0..m).map(|j| Member::Layer(j, w)));
                out.push(Member::Conn(w));
            }
            out.extend((0..m).map(|j| Member::Layer(j, v)));
            out.extend(net.incident_arcs(v).into_iter().map(Member::Arc));
        }
        Member::Arc(a) => {
            let arc = net.arc(a).expect("arc");
            for v in [arc.tail, arc.head] {
                out.extend((0..m).map(|j| Member::Layer(j, v)));
                out.push(Member::Conn(v));
            }
        }
    }
    out
}

/// Breadth-first growth of member-connected sets from the members that can
/// cover the anchor arc, pruning sets that break a pairwise condition, and
/// keeping those that pass `validate_forest`. Output order: size, then
/// structures touching a priority arc, then canonical member order.
pub fn enumerate_forests(s: &BilinearSet, class_k: u32, opts: &ForestEnumOptions) -> Vec<ForestStructure> {
    let Some(t) = s.triple(class_k) else { return Vec::new() };
    let net = s.net();
    let m = s.m();
    let arc = net.arc(t.arc).expect("triple arc");
    let seeds = [
        Member::Arc(t.arc),
        Member::Layer(t.j, arc.tail),
        Member::Layer(t.j, arc.head),
        Member::Conn(arc.tail),
        Member::Conn(arc.head),
    ];
    let mut level: BTreeSet<Vec<Member>> = seeds.iter().map(|&s| vec![s]).collect();
    let mut found: Vec<ForestStructure> = Vec::new();
    for size in 1..=opts.budget + 1 {
        let mut kept = BTreeSet::new();
        for set in level {
            let fs = ForestStructure::from_members(class_k, m, &set);
            if check_pairwise(net, &fs, t.arc, t.j).is_err() {
                continue;
            }
            if validate_forest(s, &fs).is_ok() {
                found.push(fs);
            }
            kept.insert(set);
        }
        if size == opts.budget + 1 {
            break;
        }
        let mut next = BTreeSet::new();
        for set in &kept {
            for mem in set {
                for cand in member_neighbors(net, m, *mem) {
                    if let Err(p) = set.binary_search(&cand) {
                        let mut grown = set.clone();
                        grown.insert(p, cand);
                        next.insert(grown);
                    }
                }
            }
        }
        level = next;
    }
    let hot: BTreeSet<NodeId> = opts
        .priority
        .iter()
        .filter_map(|a| net.arc(*a).ok())
        .flat_map(|a| [a.tail, a.head])
        .collect();
    let touches = |fs: &ForestStructure| {
        !fs.node_union().is_disjoint(&hot) || fs.arcs.iter().any(|a| opts.priority.contains(a))
    };
    found.sort_by_cached_key(|fs| (fs.size(), !touches(fs), fs.members()));
    if let Some(cap) = opts.max_structures {
        found.truncate(cap);
    }
    found
}
