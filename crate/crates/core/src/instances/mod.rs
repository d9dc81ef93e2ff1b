//! Seeded generators for the fixed-charge (fc) and transportation-with-conflicts
//! (tr) benchmark families, and their reduction to bilinear sets.

mod manifest;

pub use manifest::{read_manifest, write_manifest, Family, ManifestRow};

use crate::lp::{solve_default, Cmp, LpModel, Sense};
use crate::model::{BilinearSet, ModelError, Program, Triple, YRow};
use crate::network::{Arc, ArcId, Balance, Network, NetworkJson, Node, NodeId};
use crate::rational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("no feasible demand vector after {0} attempts")]
    InfeasibleGeneration(usize),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcArc {
    pub id: u32,
    pub tail: u32,
    pub head: u32,
    pub capacity: i64,
    pub slope: i64,
    /// c_ij, rounded to cents
    pub fixed: f64,
    /// index into the y vector when the arc has the fixed-charge structure
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcInstance {
    pub seed: u64,
    pub frac: f64,
    /// supply nodes are 1..=n_supply, demand nodes follow
    pub supplies: Vec<i64>,
    pub demands: Vec<i64>,
    pub arcs: Vec<FcArc>,
    pub ny: usize,
    pub budget: i64,
    pub demand_attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrArc {
    pub id: u32,
    pub tail: u32,
    pub head: u32,
    pub capacity: i64,
    pub cost: f64,
    /// r^k_ij per service
    pub incentive: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrInstance {
    pub seed: u64,
    pub services: usize,
    pub supplies: Vec<i64>,
    pub demands: Vec<i64>,
    pub arcs: Vec<TrArc>,
    pub conflicts: Vec<(usize, usize)>,
    pub demand_attempts: usize,
}

fn cents(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// round(frac · n), at least 1.
fn share(n: usize, frac: f64) -> usize {
    ((n as f64 * frac).round() as usize).max(1)
}

fn split(n_nodes: usize) -> Result<(usize, usize), InstanceError> {
    if n_nodes < 2 {
        return Err(InstanceError::BadParameter("need at least two nodes".into()));
    }
    Ok((n_nodes / 2, n_nodes - n_nodes / 2))
}

fn bipartite_network(supplies: &[i64], demands: &[i64], caps: &[i64]) -> Network {
    let ns = supplies.len() as u32;
    let mut nodes: Vec<Node> = supplies
        .iter()
        .enumerate()
        .map(|(i, &s)| Node { id: NodeId(i as u32 + 1), supply: rational::int(s), balance: Balance::Le })
        .collect();
    nodes.extend(demands.iter().enumerate().map(|(j, &d)| Node {
        id: NodeId(ns + j as u32 + 1),
        supply: rational::int(-d),
        balance: Balance::Le,
    }));
    let nd = demands.len() as u32;
    let arcs = (0..ns)
        .flat_map(|i| (0..nd).map(move |j| (i, j)))
        .enumerate()
        .map(|(p, (i, j))| Arc {
            id: ArcId(p as u32 + 1),
            tail: NodeId(i + 1),
            head: NodeId(ns + j + 1),
            capacity: rational::int(caps[p]),
        })
        .collect();
    Network::new(nodes, arcs).expect("bipartite network is well formed")
}

/// Whether the capacitated transportation rows admit a flow.
fn transport_feasible(supplies: &[i64], demands: &[i64], caps: &[i64]) -> bool {
    if demands.iter().sum::<i64>() > supplies.iter().sum::<i64>() {
        return false;
    }
    let net = bipartite_network(supplies, demands, caps);
    let mut lp = LpModel::new(Sense::Minimize);
    let x: BTreeMap<ArcId, _> =
        net.arcs().iter().map(|a| (a.id, lp.add_var("", 0.0, rational::to_f64(&a.capacity), 0.0))).collect();
    for n in net.nodes() {
        let mut row: Vec<_> = net.out_arcs(n.id).iter().map(|a| (x[a], 1.0)).collect();
        row.extend(net.in_arcs(n.id).iter().map(|a| (x[a], -1.0)));
        lp.add_row("", row, Cmp::Le, rational::to_f64(&n.supply));
    }
    matches!(solve_default(&lp), Ok(s) if s.is_optimal())
}

/// Draws demands until the instance is feasible.
fn draw_demands(
    rng: &mut ChaCha8Rng,
    supplies: &[i64],
    nd: usize,
    range: (i64, i64),
    caps: &[i64],
) -> Result<(Vec<i64>, usize), InstanceError> {
    for attempt in 1..=MAX_ATTEMPTS {
        let d: Vec<i64> = (0..nd).map(|_| rng.gen_range(range.0..=range.1)).collect();
        if transport_feasible(supplies, &d, caps) {
            return Ok((d, attempt));
        }
    }
    Err(InstanceError::InfeasibleGeneration(MAX_ATTEMPTS))
}

/// Fixed-charge instance on a complete bipartite graph with `n_nodes` nodes
/// (half supply, half demand); `frac` = ε/u on the fixed-charge arcs.
pub fn gen_fc(seed: u64, n_nodes: usize, frac: f64) -> Result<FcInstance, InstanceError> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(InstanceError::BadParameter("frac must lie in (0, 1]".into()));
    }
    let (ns, nd) = split(n_nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_arcs = ns * nd;
    let supplies: Vec<i64> = (0..ns).map(|_| rng.gen_range(20..=50)).collect();
    let caps: Vec<i64> = (0..n_arcs).map(|_| rng.gen_range(1..=50)).collect();
    let slopes: Vec<i64> = (0..n_arcs).map(|_| rng.gen_range(50..=100)).collect();
    let ny = share(n_arcs, 0.2);
    let mut chosen = sample(&mut rng, n_arcs, ny).into_vec();
    chosen.sort_unstable();
    let mut y_of = vec![None; n_arcs];
    for (j, &p) in chosen.iter().enumerate() {
        y_of[p] = Some(j);
    }
    let fixed: Vec<f64> = y_of
        .iter()
        .map(|y| cents(if y.is_some() { rng.gen_range(1.0..5.0) } else { rng.gen_range(10.0..20.0) }))
        .collect();
    let (demands, demand_attempts) = draw_demands(&mut rng, &supplies, nd, (20, 50), &caps)?;
    let arcs = (0..n_arcs)
        .map(|p| FcArc {
            id: p as u32 + 1,
            tail: (p / nd) as u32 + 1,
            head: (ns + p % nd) as u32 + 1,
            capacity: caps[p],
            slope: slopes[p],
            fixed: fixed[p],
            y: y_of[p],
        })
        .collect();
    let inst = FcInstance {
        seed,
        frac,
        supplies,
        demands,
        arcs,
        ny,
        budget: share(ny, 0.2) as i64,
        demand_attempts,
    };
    inst.check_ranges();
    Ok(inst)
}

/// Transportation instance with `services` binary services and 10% of the
/// service pairs in conflict.
///
/// Supply/demand ranges (100–200 at 25+25 nodes) are scaled by
/// (nodes per side)/25 below that size so that 1–25 capacities can carry them.
pub fn gen_tr(seed: u64, n_nodes: usize, services: usize) -> Result<TrInstance, InstanceError> {
    if services < 2 {
        return Err(InstanceError::BadParameter("need at least two services".into()));
    }
    let (ns, nd) = split(n_nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_arcs = ns * nd;
    let scale = (ns.min(nd) as f64 / 25.0).min(1.0);
    let lo = ((100.0 * scale).round() as i64).max(1);
    let hi = ((200.0 * scale).round() as i64).max(lo);
    let supplies: Vec<i64> = (0..ns).map(|_| rng.gen_range(lo..=hi)).collect();
    let caps: Vec<i64> = (0..n_arcs).map(|_| rng.gen_range(1..=25)).collect();
    let k = services as f64;
    let costs: Vec<f64> = (0..n_arcs).map(|_| cents(rng.gen_range(20.0..40.0) * k)).collect();
    let incentives: Vec<Vec<f64>> =
        (0..n_arcs).map(|_| (0..services).map(|_| cents(rng.gen_range(-10.0..10.0))).collect()).collect();
    let pairs: Vec<(usize, usize)> = (0..services).flat_map(|a| (a + 1..services).map(move |b| (a, b))).collect();
    let mut picked = sample(&mut rng, pairs.len(), share(pairs.len(), 0.1)).into_vec();
    picked.sort_unstable();
    let conflicts = picked.into_iter().map(|p| pairs[p]).collect();
    let (demands, demand_attempts) = draw_demands(&mut rng, &supplies, nd, (lo, hi), &caps)?;
    let arcs = (0..n_arcs)
        .map(|p| TrArc {
            id: p as u32 + 1,
            tail: (p / nd) as u32 + 1,
            head: (ns + p % nd) as u32 + 1,
            capacity: caps[p],
            cost: costs[p],
            incentive: incentives[p].clone(),
        })
        .collect();
    let inst = TrInstance { seed, services, supplies, demands, arcs, conflicts, demand_attempts };
    inst.check_ranges();
    Ok(inst)
}

impl FcInstance {
    fn check_ranges(&self) {
        debug_assert!(self.supplies.iter().chain(&self.demands).all(|v| (20..=50).contains(v)));
        debug_assert!(self.arcs.iter().all(|a| (1..=50).contains(&a.capacity) && (50..=100).contains(&a.slope)));
        debug_assert!(self
            .arcs
            .iter()
            .all(|a| if a.y.is_some() { (1.0..=5.0).contains(&a.fixed) } else { (10.0..=20.0).contains(&a.fixed) }));
    }

    pub fn network(&self) -> Network {
        let caps: Vec<i64> = self.arcs.iter().map(|a| a.capacity).collect();
        bipartite_network(&self.supplies, &self.demands, &caps)
    }

    /// ε_ij = frac · u_ij
    pub fn epsilon(&self, a: &FcArc) -> f64 {
        self.frac * a.capacity as f64
    }

    /// min Σ (c + t/ε) x + t y − (t/ε) z on fixed-charge arcs, c x elsewhere;
    /// z_k with k = arc id.
    pub fn program(&self) -> Program {
        let mut cost_x = BTreeMap::new();
        let mut cost_y = vec![0.0; self.ny];
        let mut cost_z = BTreeMap::new();
        let mut triples = Vec::new();
        for a in &self.arcs {
            let id = ArcId(a.id);
            match a.y {
                Some(j) => {
                    let te = a.slope as f64 / self.epsilon(a);
                    cost_x.insert(id, a.fixed + te);
                    cost_y[j] = a.slope as f64;
                    cost_z.insert(a.id, -te);
                    triples.push(Triple { k: a.id, arc: id, j });
                }
                None => {
                    cost_x.insert(id, a.fixed);
                }
            }
        }
        Program {
            net: self.network(),
            ny: self.ny,
            triples,
            y_rows: vec![YRow { coefs: (0..self.ny).map(|j| (j, 1)).collect(), rhs: self.budget }],
            cost_x,
            cost_y,
            cost_z,
        }
    }
}

impl TrInstance {
    fn check_ranges(&self) {
        debug_assert!(self.arcs.iter().all(|a| (1..=25).contains(&a.capacity)));
        debug_assert!(self.arcs.iter().all(|a| a.incentive.iter().all(|r| (-10.0..=10.0).contains(r))));
    }

    pub fn network(&self) -> Network {
        let caps: Vec<i64> = self.arcs.iter().map(|a| a.capacity).collect();
        bipartite_network(&self.supplies, &self.demands, &caps)
    }

    /// z^k_ij has id k·|A| + arc id.
    pub fn z_id(&self, service: usize, arc: u32) -> u32 {
        (service * self.arcs.len()) as u32 + arc
    }

    pub fn program(&self) -> Program {
        let mut triples = Vec::new();
        let mut cost_z = BTreeMap::new();
        for k in 0..self.services {
            for a in &self.arcs {
                let id = self.z_id(k, a.id);
                triples.push(Triple { k: id, arc: ArcId(a.id), j: k });
                cost_z.insert(id, a.incentive[k]);
            }
        }
        Program {
            net: self.network(),
            ny: self.services,
            triples,
            y_rows: self.conflicts.iter().map(|&(a, b)| YRow { coefs: vec![(a, 1), (b, 1)], rhs: 1 }).collect(),
            cost_x: self.arcs.iter().map(|a| (ArcId(a.id), a.cost)).collect(),
            cost_y: vec![0.0; self.services],
            cost_z,
        }
    }
}

/// One single-y set per fixed-charge arc.
pub fn fc_relaxations(inst: &FcInstance) -> Vec<BilinearSet> {
    let p = inst.program();
    (0..p.ny).map(|j| p.set(&[j])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrMode {
    Single,
    ConflictPair,
}

pub fn tr_relaxations(inst: &TrInstance, mode: TrMode) -> Vec<BilinearSet> {
    let p = inst.program();
    match mode {
        TrMode::Single => (0..p.ny).map(|j| p.set(&[j])).collect(),
        TrMode::ConflictPair => inst.conflicts.iter().map(|&(a, b)| p.set(&[a, b])).collect(),
    }
}

/// A generated instance of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Fc(FcInstance),
    Tr(TrInstance),
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    #[serde(flatten)]
    network: NetworkJson,
    m: usize,
    triples: Vec<Triple>,
    family: String,
    params: serde_json::Value,
}

impl Instance {
    pub fn program(&self) -> Program {
        match self {
            Instance::Fc(i) => i.program(),
            Instance::Tr(i) => i.program(),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Instance::Fc(_) => Family::Fc,
            Instance::Tr(_) => Family::Tr,
        }
    }

    /// Network schema plus `{m, triples, family, params}`; `params` carries the
    /// generator data the rest is derived from.
    pub fn to_json(&self) -> String {
        let p = self.program();
        let params = match self {
            Instance::Fc(i) => serde_json::to_value(i),
            Instance::Tr(i) => serde_json::to_value(i),
        }
        .expect("instance serializes");
        let raw = InstanceJson {
            network: NetworkJson::from_network(&p.net),
            m: p.ny,
            triples: p.triples,
            family: self.family().to_string(),
            params,
        };
        serde_json::to_string_pretty(&raw).expect("instance serializes") + "\n"
    }

    /// Parses an instance file; the network and triples must agree with what
    /// the params generate.
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let raw: InstanceJson = serde_json::from_str(text).map_err(|e| InstanceError::Malformed(e.to_string()))?;
        let bad = |e: serde_json::Error| InstanceError::Malformed(e.to_string());
        let inst = match raw.family.as_str() {
            "fc" => {
                let i: FcInstance = serde_json::from_value(raw.params).map_err(bad)?;
                i.validate()?;
                Instance::Fc(i)
            }
            "tr" => {
                let i: TrInstance = serde_json::from_value(raw.params).map_err(bad)?;
                i.validate()?;
                Instance::Tr(i)
            }
            f => return Err(InstanceError::Malformed(format!("unknown family {f:?}"))),
        };
        let net = raw.network.build().map_err(ModelError::from)?;
        let p = inst.program();
        if net != p.net || raw.m != p.ny || raw.triples != p.triples {
            return Err(InstanceError::Malformed("network or triples differ from params".into()));
        }
        Ok(inst)
    }
}

fn check_bipartite(supplies: &[i64], demands: &[i64], arcs: impl Iterator<Item = (u32, u32, u32, i64)>) -> Result<(), InstanceError> {
    let bad = |s: &str| Err(InstanceError::Malformed(s.into()));
    let (ns, nd) = (supplies.len(), demands.len());
    if ns == 0 || nd == 0 || ns > 1000 || nd > 1000 {
        return bad("node counts out of range");
    }
    let mut count = 0;
    for (p, (id, t, h, cap)) in arcs.enumerate() {
        let want_t = (p / nd) as u32 + 1;
        let want_h = (ns + p % nd) as u32 + 1;
        if id != p as u32 + 1 || t != want_t || h != want_h || cap < 0 {
            return bad("arcs must list the complete bipartite graph in order");
        }
        count += 1;
    }
    if count != ns * nd {
        return bad("arc count differs from |S|·|D|");
    }
    Ok(())
}

impl FcInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        check_bipartite(&self.supplies, &self.demands, self.arcs.iter().map(|a| (a.id, a.tail, a.head, a.capacity)))?;
        if !(self.frac > 0.0 && self.frac <= 1.0) {
            return Err(InstanceError::Malformed("frac out of range".into()));
        }
        if self.ny > self.arcs.len() {
            return Err(InstanceError::Malformed("more y variables than arcs".into()));
        }
        let mut seen = vec![false; self.ny];
        for a in &self.arcs {
            if let Some(j) = a.y {
                if j >= self.ny || std::mem::replace(&mut seen[j], true) {
                    return Err(InstanceError::Malformed("bad y index".into()));
                }
                if a.capacity == 0 {
                    return Err(InstanceError::Malformed("fixed-charge arc with zero capacity".into()));
                }
            }
            if !a.fixed.is_finite() {
                return Err(InstanceError::Malformed("non-finite cost".into()));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(InstanceError::Malformed("unused y index".into()));
        }
        Ok(())
    }
}

impl TrInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        check_bipartite(&self.supplies, &self.demands, self.arcs.iter().map(|a| (a.id, a.tail, a.head, a.capacity)))?;
        if self.services == 0 || self.services > 64 {
            return Err(InstanceError::Malformed("services out of range".into()));
        }
        if self
            .arcs
            .iter()
            .any(|a| a.incentive.len() != self.services || !a.cost.is_finite() || a.incentive.iter().any(|r| !r.is_finite()))
        {
            return Err(InstanceError::Malformed("bad arc costs".into()));
        }
        if self.conflicts.iter().any(|&(a, b)| a >= b || b >= self.services) {
            return Err(InstanceError::Malformed("bad conflict pair".into()));
        }
        Ok(())
    }
}

/// Generates the instance a manifest row describes.
pub fn generate(row: &ManifestRow) -> Result<Instance, InstanceError> {
    match row.family {
        Family::Fc => gen_fc(row.seed, row.nodes, row.param).map(Instance::Fc),
        Family::Tr => {
            if row.param.fract() != 0.0 || row.param < 0.0 {
                return Err(InstanceError::BadParameter("services must be a whole number".into()));
            }
            gen_tr(row.seed, row.nodes, row.param as usize).map(Instance::Tr)
        }
    }
}
