//! Property tests over small random networks and sets.

mod common;

use common::{full_set, random_network, random_objective};
use ecrnet::ecr::{aggregate, relax_all, EcrAssignment, LinearCut};
use ecrnet::lp::{solve_default, Sense};
use ecrnet::model::{extended_formulation, mccormick, BilinearSet, Point, SetLp};
use ecrnet::network::{FlowBalanceRef, Network, NodeId, Sign};
use ecrnet::rational::{self, Rational};
use ecrnet::separation::{cut_loop, separate, SeparationConfig};
use ecrnet::structures::{enumerate_forests, enumerate_trees, label_forest, tree_to_assignment, ForestEnumOptions};
use ecrnet::verify::{disjunct_min, ext_validity, hull_optimum, validity_check};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Full-length variable vector for a point in the space of `lp`.
fn to_vec(lp: &SetLp, p: &Point) -> Vec<f64> {
    let mut v = vec![0.0; lp.lp.num_vars()];
    for (a, var) in &lp.x {
        v[var.0] = p.x(*a);
    }
    for (j, var) in lp.y.iter().enumerate() {
        v[var.0] = p.y[j];
    }
    for (k, var) in &lp.z {
        v[var.0] = p.z(*k);
    }
    v
}

/// A point of disjunct `j` of S (None = y = 0), minimizing a random objective.
fn disjunct_point(r: &mut ChaCha8Rng, s: &BilinearSet, j: Option<usize>) -> Option<Point> {
    let c = random_objective(r, s);
    disjunct_min(s, j, &c, 0.0).expect("lp solves").map(|(_, p)| p)
}

fn induced_arcs(net: &Network, nodes: &BTreeSet<NodeId>) -> usize {
    net.arcs().iter().filter(|a| nodes.contains(&a.tail) && nodes.contains(&a.head)).count()
}

fn q(v: i64) -> Rational {
    rational::int(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flow_rows_are_antisymmetric_and_sum_to_zero(seed in any::<u64>(), n in 2u32..12) {
        let net = random_network(&mut rng(seed), n, 4, 0.5);
        let mut total: BTreeMap<_, Rational> = BTreeMap::new();
        let mut rhs = rational::zero();
        for node in net.nodes() {
            let pos = net.flow_balance_row(FlowBalanceRef::new(node.id.0, Sign::Pos)).unwrap();
            let neg = net.flow_balance_row(FlowBalanceRef::new(node.id.0, Sign::Neg)).unwrap();
            prop_assert_eq!(pos.coefs.len(), neg.coefs.len());
            for (a, c) in &pos.coefs {
                prop_assert_eq!(&-c.clone(), &neg.coefs[a]);
                *total.entry(*a).or_insert_with(rational::zero) += c;
            }
            prop_assert_eq!(-pos.rhs.clone(), neg.rhs);
            rhs += &pos.rhs;
        }
        prop_assert!(total.values().all(|c| c.is_zero()));
        // supplies come from a flow, so they balance too
        prop_assert!(rhs.is_zero());
    }

    #[test]
    fn json_round_trips(seed in any::<u64>(), n in 2u32..9, m in 1usize..3) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 3, 0.5), m);
        let back = BilinearSet::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(back.net(), s.net());
        prop_assert_eq!(back.triples(), s.triples());
        let p = random_objective(&mut r, &s);
        prop_assert_eq!(Point::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn lp_objective_matches_primals_and_resolve_is_identical(seed in any::<u64>(), n in 2u32..9, m in 1usize..3) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 3, 0.3), m);
        let mut lp = mccormick(&s);
        lp.set_objective(Sense::Minimize, &random_objective(&mut r, &s));
        let a = solve_default(&lp.lp).unwrap();
        prop_assert!(a.is_optimal());
        let recomputed = lp.lp.objective_value(&a.x);
        prop_assert!((recomputed - a.objective).abs() <= 1e-8 * a.objective.abs().max(1.0));
        prop_assert!(lp.lp.max_violation(&a.x) <= 1e-7);
        let b = solve_default(&lp.lp).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn points_of_s_satisfy_both_relaxations(seed in any::<u64>(), n in 2u32..9, m in 1usize..3) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 3, 0.3), m);
        let mc = mccormick(&s);
        let ext = extended_formulation(&s);
        for j in std::iter::once(None).chain((0..m).map(Some)) {
            let Some(p) = disjunct_point(&mut r, &s, j) else { continue };
            prop_assert!(mc.lp.max_violation(&to_vec(&mc, &p)) <= 1e-7);
            // the hull formulation with all weight on disjunct j
            let mut v = to_vec(&ext.inner, &p);
            if let Some(j) = j {
                for (a, var) in &ext.w[j] {
                    v[var.0] = p.x(*a);
                }
                for t in s.triples().iter().filter(|t| t.j == j) {
                    v[ext.v[&(t.k, j)].0] = p.z(t.k);
                }
            }
            prop_assert!(ext.inner.lp.max_violation(&v) <= 1e-7);
        }
    }

    #[test]
    fn hull_formulation_matches_disjunctive_optimum(seed in any::<u64>(), n in 2u32..8, m in 1usize..3) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 3, 0.3), m);
        let c = random_objective(&mut r, &s);
        let hull = hull_optimum(&s, &c, Sense::Minimize).unwrap().unwrap();
        let mut ext = extended_formulation(&s);
        ext.inner.set_objective(Sense::Minimize, &c);
        let e = solve_default(&ext.inner.lp).unwrap();
        prop_assert!(e.is_optimal());
        prop_assert!((e.objective - hull.value).abs() <= 1e-6 * hull.value.abs().max(1.0));
        let mut mc = mccormick(&s);
        mc.set_objective(Sense::Minimize, &c);
        let relaxed = solve_default(&mc.lp).unwrap().objective;
        prop_assert!(relaxed <= hull.value + 1e-6 * hull.value.abs().max(1.0));
    }

    #[test]
    fn tree_assignments_are_sound(seed in any::<u64>(), n in 2u32..10) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 3, 0.0), 1);
        let k = s.triples()[r.gen_range(0..s.triples().len())].k;
        for ts in enumerate_trees(&s, k, 3) {
            for sign in [Sign::Pos, Sign::Neg] {
                let a = tree_to_assignment(&s, &ts, sign).unwrap();
                let nodes = ts.nodes();
                prop_assert_eq!(a.nodes_used(), nodes.clone());
                let agg = aggregate(&s, &a).unwrap();
                prop_assert!(agg.c1() && agg.c2());
                prop_assert_eq!(agg.cancel_count, induced_arcs(s.net(), &nodes) + 1);
            }
        }
    }

    #[test]
    fn labelled_forests_cancel_pairwise(seed in any::<u64>(), n in 2u32..7) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 2, 0.3), 2);
        let k = s.triples()[r.gen_range(0..s.triples().len())].k;
        let opts = ForestEnumOptions { budget: 3, priority: vec![], max_structures: Some(200) };
        for fs in enumerate_forests(&s, k, &opts) {
            for sign in [Sign::Pos, Sign::Neg] {
                let Ok(a) = label_forest(&s, &fs, sign) else { continue };
                if let Ok(agg) = aggregate(&s, &a) {
                    prop_assert!(agg.max_producers <= 2);
                    for cut in relax_all(&agg, &s).unwrap().iter().take(4) {
                        prop_assert!(validity_check(cut, &s).unwrap().valid);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_assignment_gives_the_envelopes(seed in any::<u64>(), n in 2u32..8) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 3, 0.3), 1);
        for t in s.triples() {
            let mut keys = BTreeSet::new();
            for sign in [Sign::Pos, Sign::Neg] {
                let agg = aggregate(&s, &EcrAssignment::empty(t.k, sign, 1)).unwrap();
                keys.extend(relax_all(&agg, &s).unwrap().iter().map(LinearCut::key));
            }
            let u = s.capacity(t.arc);
            let cut = |x: i64, y: Rational, z: i64, rhs: Rational| {
                LinearCut::from_parts(BTreeMap::from([(t.arc, q(x))]), vec![y], BTreeMap::from([(t.k, q(z))]), rhs).key()
            };
            // z ≥ 0, z ≤ x, z ≤ u y, z ≥ x + u y − u
            let envelopes = [
                cut(0, q(0), 1, q(0)),
                cut(1, q(0), -1, q(0)),
                cut(0, u.clone(), -1, q(0)),
                cut(-1, -u.clone(), 1, -u.clone()),
            ];
            for e in envelopes {
                prop_assert!(keys.contains(&e), "missing envelope {:?}", e);
            }
        }
    }

    #[test]
    fn oracles_agree(seed in any::<u64>(), n in 2u32..7, m in 1usize..3) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 2, 0.3), m);
        let c = random_objective(&mut r, &s);
        let hull = hull_optimum(&s, &c, Sense::Minimize).unwrap().unwrap();
        // c·p ≥ hull − δ is valid iff δ ≥ 0
        let delta: f64 = r.gen_range(-2.0..2.0);
        let f = |v: f64| rational::from_f64(v).unwrap();
        let cut = LinearCut::from_parts(
            c.x.iter().map(|(a, v)| (*a, f(*v))).collect(),
            c.y.iter().map(|v| f(*v)).collect(),
            c.z.iter().map(|(k, v)| (*k, f(*v))).collect(),
            f(hull.value - delta),
        );
        let v = validity_check(&cut, &s).unwrap();
        let e = ext_validity(&cut, &s).unwrap().unwrap();
        prop_assert!((v.min_slack - e).abs() <= 1e-6 * hull.value.abs().max(1.0));
        if delta.abs() > 1e-3 {
            prop_assert_eq!(v.valid, delta > 0.0);
            prop_assert_eq!(v.certificate.is_some(), delta < 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cut_loop_is_sandwiched_and_deterministic(seed in any::<u64>(), n in 2u32..7, m in 1usize..3) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 2, 0.3), m);
        let c = random_objective(&mut r, &s);
        let cfg = SeparationConfig { max_rounds: 5, ..Default::default() };
        let a = cut_loop(&s, &c, &cfg).unwrap();
        let hull = hull_optimum(&s, &c, Sense::Minimize).unwrap().unwrap().value;
        let tol = 1e-6 * hull.abs().max(1.0);
        prop_assert!(a.lp_bound <= a.final_bound + tol);
        prop_assert!(a.final_bound <= hull + tol);
        prop_assert!(a.bounds.windows(2).all(|w| w[0] <= w[1] + tol));
        let b = cut_loop(&s, &c, &cfg).unwrap();
        prop_assert_eq!(a.bounds, b.bounds);
        prop_assert_eq!(a.cuts_per_round, b.cuts_per_round);
    }

    #[test]
    fn looser_stop_never_adds_rounds(seed in any::<u64>(), n in 2u32..7) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 2, 0.3), 1);
        let c = random_objective(&mut r, &s);
        let tight = SeparationConfig { improvement_stop: 0.01, max_rounds: 8, ..Default::default() };
        let loose = SeparationConfig { improvement_stop: 0.02, ..tight.clone() };
        prop_assert!(cut_loop(&s, &c, &loose).unwrap().rounds <= cut_loop(&s, &c, &tight).unwrap().rounds);
    }

    #[test]
    fn points_of_s_are_never_cut(seed in any::<u64>(), n in 2u32..8, m in 1usize..3) {
        let mut r = rng(seed);
        let s = full_set(random_network(&mut r, n, 3, 0.3), m);
        let j = r.gen_range(0..=m);
        let Some(p) = disjunct_point(&mut r, &s, (j < m).then_some(j)) else { return Ok(()) };
        prop_assert!(separate(&p, &s, &SeparationConfig::default()).is_empty());
    }
}

#[test]
fn set_without_triples_runs_one_empty_round() {
    let mut r = rng(11);
    let net = random_network(&mut r, 5, 2, 0.0);
    let s = BilinearSet::new(net, 1, vec![]).unwrap();
    let c = random_objective(&mut r, &s);
    let rep = cut_loop(&s, &c, &SeparationConfig::default()).unwrap();
    assert_eq!(rep.total_cuts, 0);
    assert_eq!(rep.rounds, 1);
    assert_eq!(rep.lp_bound, rep.final_bound);
}
