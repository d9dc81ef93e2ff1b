use ecrnet::instances::{
    fc_relaxations, gen_fc, gen_tr, generate, tr_relaxations, Family, Instance, InstanceError, ManifestRow, TrMode,
};
use ecrnet::lp::{solve_default, LpModel, Sense};
use ecrnet::model::{BilinearSet, Program};
use ecrnet::rational;
use ecrnet::verify::mip_optimum;
use std::collections::BTreeMap;

/// Every set is Ξ of the program over a subset of its y variables, with the
/// program's triples for those y (relabelled locally).
fn assert_restriction(p: &Program, sets: &[BilinearSet]) {
    let by_k: BTreeMap<u32, _> = p.triples.iter().map(|t| (t.k, t)).collect();
    for s in sets {
        assert_eq!(s.net(), &p.net);
        for t in s.triples() {
            let orig = by_k[&t.k];
            assert_eq!(orig.arc, t.arc);
            assert_eq!(orig.j, s.y_ids()[t.j]);
        }
        let expected = p.triples.iter().filter(|t| s.y_ids().contains(&t.j)).count();
        assert_eq!(s.triples().len(), expected);
    }
}

#[test]
fn relaxations_restrict_the_program() {
    for seed in 1..=5 {
        let fc = gen_fc(seed, 10, 0.2).unwrap();
        let sets = fc_relaxations(&fc);
        assert_eq!(sets.len(), fc.ny);
        assert_restriction(&fc.program(), &sets);
        let tr = gen_tr(seed, 10, 6).unwrap();
        assert_restriction(&tr.program(), &tr_relaxations(&tr, TrMode::Single));
        let pairs = tr_relaxations(&tr, TrMode::ConflictPair);
        assert_eq!(pairs.len(), tr.conflicts.len());
        assert_restriction(&tr.program(), &pairs);
    }
}

#[test]
fn generated_values_stay_in_range() {
    for seed in 1..=10 {
        let fc = gen_fc(seed, 10, 0.2).unwrap();
        fc.validate().unwrap();
        assert!(fc.supplies.iter().chain(&fc.demands).all(|v| (20..=50).contains(v)));
        assert!(fc.supplies.iter().sum::<i64>() >= fc.demands.iter().sum::<i64>());
        for a in &fc.arcs {
            assert!((1..=50).contains(&a.capacity) && (50..=100).contains(&a.slope));
            let range = if a.y.is_some() { 1.0..=5.0 } else { 10.0..=20.0 };
            assert!(range.contains(&a.fixed), "fixed cost {}", a.fixed);
            assert_eq!((a.fixed * 100.0).round() / 100.0, a.fixed);
        }
        assert_eq!(fc.ny, 5);
        assert_eq!(fc.budget, 1);

        let tr = gen_tr(seed, 10, 6).unwrap();
        tr.validate().unwrap();
        // 5 nodes per side: 100..200 scaled by 5/25
        assert!(tr.supplies.iter().chain(&tr.demands).all(|v| (20..=40).contains(v)));
        for a in &tr.arcs {
            assert!((1..=25).contains(&a.capacity));
            assert!((120.0..=240.0).contains(&a.cost));
            assert!(a.incentive.iter().all(|r| (-10.0..=10.0).contains(r)));
        }
        assert_eq!(tr.conflicts.len(), 2);
    }
}

#[test]
fn generation_is_deterministic_and_json_round_trips() {
    for family in [Family::Fc, Family::Tr] {
        let row = ManifestRow { family, nodes: 10, param: if family == Family::Fc { 0.2 } else { 4.0 }, seed: 3 };
        let a = generate(&row).unwrap();
        assert_eq!(a, generate(&row).unwrap());
        let text = a.to_json();
        assert_eq!(Instance::from_json(&text).unwrap().to_json(), text);
    }
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(matches!(gen_fc(1, 10, 0.0), Err(InstanceError::BadParameter(_))));
    assert!(matches!(gen_fc(1, 10, 1.5), Err(InstanceError::BadParameter(_))));
    assert!(matches!(gen_tr(1, 10, 1), Err(InstanceError::BadParameter(_))));
    assert!(gen_fc(1, 1, 0.2).is_err());
    let row = ManifestRow { family: Family::Tr, nodes: 10, param: 2.5, seed: 1 };
    assert!(matches!(generate(&row), Err(InstanceError::BadParameter(_))));
}

#[test]
fn fixed_charge_lp_is_feasible_and_weaker_than_mip() {
    let mut strict = 0;
    for seed in 1..=10 {
        let p = gen_fc(seed, 10, 0.2).unwrap().program();
        let lp = solve_default(&p.mccormick().lp).unwrap();
        assert!(lp.is_optimal(), "seed {seed}: {:?}", lp.status);
        let mip = mip_optimum(&p).unwrap();
        assert!(lp.objective <= mip.value + 1e-6 * mip.value.abs());
        if lp.objective < mip.value - 1e-6 * mip.value.abs() {
            strict += 1;
        }
    }
    assert!(strict >= 9, "LP strictly below MIP on only {strict}/10 seeds");
}

/// Minimum transport cost Σ c x over Ξ alone.
fn transport_lp(p: &Program) -> f64 {
    let mut lp = LpModel::new(Sense::Minimize);
    let x: BTreeMap<_, _> = p
        .net
        .arcs()
        .iter()
        .map(|a| (a.id, lp.add_var(format!("x{}", a.id), 0.0, rational::to_f64(&a.capacity), p.cost_x[&a.id])))
        .collect();
    for n in p.net.nodes() {
        let mut row: Vec<_> = p.net.out_arcs(n.id).iter().map(|a| (x[a], 1.0)).collect();
        row.extend(p.net.in_arcs(n.id).iter().map(|a| (x[a], -1.0)));
        lp.add_row(format!("n{}", n.id), row, ecrnet::lp::Cmp::Le, rational::to_f64(&n.supply));
    }
    solve_default(&lp).unwrap().objective
}

#[test]
fn transport_without_incentives_is_the_plain_lp() {
    for seed in 1..=3 {
        let mut tr = gen_tr(seed, 8, 4).unwrap();
        for a in &mut tr.arcs {
            a.incentive.iter_mut().for_each(|r| *r = 0.0);
        }
        let p = tr.program();
        let plain = transport_lp(&p);
        let relaxed = solve_default(&p.mccormick().lp).unwrap().objective;
        let mip = mip_optimum(&p).unwrap().value;
        let tol = 1e-6 * plain.abs().max(1.0);
        assert!((relaxed - plain).abs() <= tol, "{relaxed} vs {plain}");
        assert!((mip - plain).abs() <= tol, "{mip} vs {plain}");
    }
}
