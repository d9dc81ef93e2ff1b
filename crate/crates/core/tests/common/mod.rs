//! Random instances shared by the integration tests.
#![allow(dead_code)]

use ecrnet::model::{BilinearSet, Point, Triple};
use ecrnet::network::{Arc, ArcId, Balance, Network, Node, NodeId};
use ecrnet::rational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::HashSet;

/// Connected network on nodes 1..=n: a random spanning tree plus up to
/// `max_extra` arcs, random orientation, capacities 1..=10 and supplies
/// f = E·x̂ of a random integer flow x̂ (so Ξ is nonempty). With probability
/// `one_sided`, each node keeps a random subset of its two rows.
pub fn random_network(rng: &mut ChaCha8Rng, n: u32, max_extra: usize, one_sided: f64) -> Network {
    let extra = rng.gen_range(0..=max_extra);
    let one_sided = rng.gen_bool(one_sided);
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut used = HashSet::new();
    let mut order: Vec<u32> = (1..=n).collect();
    order.shuffle(rng);
    for i in 1..order.len() {
        let a = order[i];
        let b = order[rng.gen_range(0..i)];
        pairs.push(if rng.gen() { (a, b) } else { (b, a) });
        used.insert((a.min(b), a.max(b)));
    }
    let mut tries = 0;
    while pairs.len() < (n as usize - 1) + extra && tries < 200 {
        tries += 1;
        let (a, b) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
        if a != b && used.insert((a.min(b), a.max(b))) {
            pairs.push((a, b));
        }
    }
    let caps: Vec<i64> = pairs.iter().map(|_| rng.gen_range(1..=10)).collect();
    let mut supply = vec![0i64; n as usize + 1];
    for (&(t, h), &u) in pairs.iter().zip(&caps) {
        let x = rng.gen_range(0..=u);
        supply[t as usize] += x;
        supply[h as usize] -= x;
    }
    let nodes = (1..=n)
        .map(|v| {
            let balance = if one_sided {
                [Balance::Eq, Balance::Ge, Balance::Le, Balance::Free][rng.gen_range(0..4)]
            } else {
                Balance::Eq
            };
            Node { id: NodeId(v), supply: rational::int(supply[v as usize]), balance }
        })
        .collect();
    let arcs = pairs
        .iter()
        .zip(&caps)
        .enumerate()
        .map(|(p, (&(t, h), &u))| Arc { id: ArcId(p as u32 + 1), tail: NodeId(t), head: NodeId(h), capacity: rational::int(u) })
        .collect();
    Network::new(nodes, arcs).expect("random network is well formed")
}

/// A triple for every (arc, j): k = arc + |A|·j.
pub fn full_set(net: Network, m: usize) -> BilinearSet {
    let na = net.arcs().len() as u32;
    let triples = (0..m)
        .flat_map(|j| net.arcs().iter().map(move |a| Triple { k: a.id.0 + na * j as u32, arc: a.id, j }).collect::<Vec<_>>())
        .collect();
    BilinearSet::new(net, m, triples).expect("set is well formed")
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random objective over (x, y, z).
pub fn random_objective(rng: &mut ChaCha8Rng, s: &BilinearSet) -> Point {
    Point {
        x: s.net().arcs().iter().map(|a| (a.id, normal(rng))).collect(),
        y: (0..s.m()).map(|_| normal(rng)).collect(),
        z: s.triples().iter().map(|t| (t.k, normal(rng))).collect(),
    }
}

/// Random point on a coarse grid (many exact ties between options).
pub fn grid_point(rng: &mut ChaCha8Rng, s: &BilinearSet) -> Point {
    Point {
        x: s
            .net()
            .arcs()
            .iter()
            .map(|a| (a.id, rng.gen_range(0..=2 * rational::to_f64(&a.capacity) as i64) as f64 / 2.0))
            .collect(),
        y: (0..s.m()).map(|_| rng.gen_range(0..=4) as f64 / 4.0).collect(),
        z: s.triples().iter().map(|t| (t.k, rng.gen_range(-4..=20) as f64 / 2.0)).collect(),
    }
}
