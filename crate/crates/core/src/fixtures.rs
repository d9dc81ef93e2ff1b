//! Small hand-checkable instances used by tests, docs and the CLI.

use crate::model::{BilinearSet, Triple};
use crate::network::{Arc, ArcId, Balance, Network, Node, NodeId};
use crate::rational;

/// Arc list of the spiked cycle: a 4-cycle on nodes 1..4 (mixed orientation)
/// with one spike per cycle node. Arc ids are 1..8 in this order.
pub const SPIKED_CYCLE_ARCS: [(u32, u32); 8] = [(1, 5), (2, 1), (4, 1), (2, 3), (4, 3), (6, 2), (3, 7), (8, 4)];

/// A feasible flow used to derive supplies (f = E·x*), so Ξ is nonempty.
const SPIKED_CYCLE_FLOW: [i64; 8] = [3, 2, 1, 2, 1, 4, 2, 1];

/// The spiked cycle with capacities 10 and supplies from a feasible flow.
pub fn spiked_cycle() -> Network {
    let mut supply = [0i64; 9];
    for (&(t, h), &x) in SPIKED_CYCLE_ARCS.iter().zip(&SPIKED_CYCLE_FLOW) {
        supply[t as usize] += x;
        supply[h as usize] -= x;
    }
    let nodes = (1..=8)
        .map(|v| Node { id: NodeId(v), supply: rational::int(supply[v as usize]), balance: Balance::Eq })
        .collect();
    let arcs = SPIKED_CYCLE_ARCS
        .iter()
        .enumerate()
        .map(|(p, &(t, h))| Arc {
            id: ArcId(p as u32 + 1),
            tail: NodeId(t),
            head: NodeId(h),
            capacity: rational::int(10),
        })
        .collect();
    Network::new(nodes, arcs).expect("fixture is well formed")
}

/// Spiked cycle with `m` y-variables and a triple for every (arc, j):
/// `k = arc + 8·j`, so for m = 1 the z index equals the arc id.
pub fn spiked_cycle_set(m: usize) -> BilinearSet {
    let net = spiked_cycle();
    let triples = (0..m)
        .flat_map(|j| (1..=8u32).map(move |a| Triple { k: a + 8 * j as u32, arc: ArcId(a), j }))
        .collect();
    BilinearSet::new(net, m, triples).expect("fixture is well formed")
}

/// Arc id of `(t, h)` in the spiked cycle.
pub fn sc_arc(t: u32, h: u32) -> ArcId {
    let p = SPIKED_CYCLE_ARCS.iter().position(|&e| e == (t, h)).expect("arc of the spiked cycle");
    ArcId(p as u32 + 1)
}
