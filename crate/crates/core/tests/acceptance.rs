//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

mod common;

use common::{full_set, grid_point, random_network, random_objective};
use ecrnet::bench::{run_instance, BenchRow};
use ecrnet::ecr::{
    aggregate, closed_form_cut, relax_all, relax_most_violated, relax_with, remaining_terms, weights_for,
    AggregatedInequality, EcrAssignment, EcrError, LinearCut,
};
use ecrnet::fixtures::{sc_arc, spiked_cycle, spiked_cycle_set};
use ecrnet::instances::{Family, ManifestRow};
use ecrnet::lp::Sense;
use ecrnet::model::{mccormick, BilinearSet};
use ecrnet::network::{ArcId, FlowBalanceRef, Network, Node, NodeId, Sign};
use ecrnet::rational::{self, Rational};
use ecrnet::separation::SeparationConfig;
use ecrnet::structures::{enumerate_forests, enumerate_trees, label_forest, tree_to_assignment, validate_forest, ForestEnumOptions, ForestStructure};
use ecrnet::verify::{ext_validity, hull_optimum, lifted_hull_check, tree_assignments, tree_closure, validity_check};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

type Outcome = Result<String, String>;

fn refs(v: &[(u32, Sign)]) -> BTreeSet<FlowBalanceRef> {
    v.iter().map(|&(n, s)| FlowBalanceRef::new(n, s)).collect()
}

fn ids(v: &[u32]) -> BTreeSet<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

use Sign::{Neg as M, Pos as P};

/// The spiked cycle with supplies replaced by `f` (index = node id).
fn spiked_with(f: &[i64; 9]) -> BilinearSet {
    let net = spiked_cycle();
    let nodes: Vec<Node> =
        net.nodes().iter().map(|n| Node { supply: rational::int(f[n.id.0 as usize]), ..n.clone() }).collect();
    let net = Network::new(nodes, net.arcs().to_vec()).unwrap();
    full_set(net, 1)
}

fn spiked_tree_assignment() -> EcrAssignment {
    let mut a = EcrAssignment::empty(sc_arc(1, 5).0, P, 1);
    a.layers[0] = refs(&[(8, M), (2, M)]);
    a.ibar = refs(&[(4, P), (1, P), (6, P)]);
    a
}

fn criterion1() -> Outcome {
    let a = spiked_tree_assignment();
    let at = |f: &[i64; 9]| aggregate(&spiked_with(f), &a).map_err(|e| e.to_string());
    let base = at(&[0; 9])?;
    let q = |v: i64| rational::int(v);
    let want_x: BTreeMap<ArcId, Rational> = [((1, 5), 1), ((2, 1), -1), ((4, 3), 1), ((8, 4), -1), ((6, 2), 1)]
        .iter()
        .map(|&((t, h), c)| (sc_arc(t, h), q(c)))
        .collect();
    let want_bil: BTreeMap<(ArcId, usize), Rational> =
        [((2, 3), -1), ((4, 3), -1)].iter().map(|&((t, h), c)| ((sc_arc(t, h), 0), q(c))).collect();
    let want_z: BTreeMap<u32, Rational> = [(sc_arc(1, 5).0, q(-1))].into();
    let mut errs = Vec::new();
    if base.x != want_x {
        errs.push(format!("x part {:?}", base.x));
    }
    if base.bilinear != want_bil {
        errs.push(format!("bilinear part {:?}", base.bilinear));
    }
    if base.z != want_z {
        errs.push(format!("z part {:?}", base.z));
    }
    if base.y != vec![q(0)] || base.constant != q(0) {
        errs.push("y/constant not zero at f = 0".into());
    }
    // symbolic f terms: y coefficient f8+f2+f1+f4+f6, constant −f1−f4−f6
    for v in 1..=8usize {
        let mut f = [0i64; 9];
        f[v] = 1;
        let e = at(&f)?;
        let wy = q([8, 2, 1, 4, 6].contains(&v) as i64);
        let wc = q(-([1, 4, 6].contains(&v) as i64));
        if e.y[0] != wy || e.constant != wc || e.x != base.x || e.bilinear != base.bilinear || e.z != base.z {
            errs.push(format!("f{v}: y {} constant {}", e.y[0], e.constant));
        }
    }
    let cuts = relax_all(&base, &spiked_with(&[0; 9])).map_err(|e| e.to_string())?;
    if cuts.len() != 9 {
        errs.push(format!("{} cuts", cuts.len()));
    }
    if errs.is_empty() {
        Ok(format!("aggregated inequality matches symbolically; {} cuts", cuts.len()))
    } else {
        Err(errs.join("; "))
    }
}

fn layered_forest() -> ForestStructure {
    ForestStructure {
        class_k: sc_arc(1, 5).0,
        layers: vec![ids(&[1, 2, 6, 8]), ids(&[1, 4])],
        conn: ids(&[3]),
        arcs: BTreeSet::from([sc_arc(8, 4)]),
    }
}

fn criterion2() -> Outcome {
    let s = spiked_cycle_set(2);
    let got = label_forest(&s, &layered_forest(), P).map_err(|e| e.to_string())?;
    let mut want = EcrAssignment::empty(sc_arc(1, 5).0, P, 2);
    want.layers[0] = refs(&[(1, M), (2, M), (6, M), (8, M)]);
    want.layers[1] = refs(&[(1, M), (4, M)]);
    want.ibar = refs(&[(3, P)]);
    want.j_upper = BTreeSet::from([sc_arc(8, 4)]);
    let agg = aggregate(&s, &got).map_err(|e| e.to_string())?;
    let n = relax_all(&agg, &s).map_err(|e| e.to_string())?.len();
    let printed_is_ecr = aggregate(&s, &want).map(|_| "yes".to_string()).unwrap_or_else(|e| format!("no ({e})"));
    let detail = format!("labels {got}; expected {want}; {n} cuts; printed assignment EC&R: {printed_is_ecr}");
    if got == want && n == 128 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion3() -> Outcome {
    let s = spiked_cycle_set(2);
    let mut a = EcrAssignment::empty(sc_arc(8, 4).0, P, 2);
    a.layers[0] = refs(&[(4, P), (3, P)]);
    a.layers[1] = refs(&[(2, M)]);
    a.ibar = refs(&[(1, P)]);
    a.j_lower = BTreeSet::from([sc_arc(4, 1)]);
    a.j_upper = BTreeSet::from([sc_arc(2, 3)]);
    let ex2 = match aggregate(&s, &a) {
        Err(EcrError::ConditionViolated { condition, .. }) => format!("{condition:?}"),
        other => return Err(format!("overlapping assignment gave {other:?}")),
    };
    let fs = ForestStructure { class_k: sc_arc(1, 5).0, layers: vec![ids(&[1, 2]), ids(&[2, 6])], conn: ids(&[6]), arcs: BTreeSet::new() };
    let structural = validate_forest(&s, &fs).err().map(|v| format!("{:?}", v.condition)).unwrap_or("none".into());
    let mut conds = BTreeSet::new();
    for mask in 0u32..32 {
        let sg = |b: u32| if mask >> b & 1 == 1 { P } else { M };
        let mut a = EcrAssignment::empty(sc_arc(1, 5).0, P, 2);
        a.layers[0] = refs(&[(1, sg(0)), (2, sg(1))]);
        a.layers[1] = refs(&[(2, sg(2)), (6, sg(3))]);
        a.ibar = refs(&[(6, sg(4))]);
        match aggregate(&s, &a) {
            Err(EcrError::ConditionViolated { condition, .. }) => {
                conds.insert(format!("{condition:?}"));
            }
            other => return Err(format!("isolation-breaking forest labeling {mask:05b} gave {other:?}")),
        }
    }
    Ok(format!("overlapping assignment: {ex2}; isolation-breaking forest: structure fails {structural}, all 32 labelings violate {conds:?}"))
}

/// Aggregations from random trees (m = 1) or labeled forests (m = 2).
fn random_aggregations(rng: &mut ChaCha8Rng, s: &BilinearSet, per_class: usize) -> Vec<AggregatedInequality> {
    let mut out = Vec::new();
    let t = *s.triples().choose(rng).unwrap();
    for sign in [P, M] {
        if s.m() == 1 {
            let mut trees = enumerate_trees(s, t.k, 3);
            trees.shuffle(rng);
            for ts in trees.iter().take(per_class) {
                if let Ok(a) = tree_to_assignment(s, ts, sign) {
                    out.extend(aggregate(s, &a));
                }
            }
        } else {
            let mut forests = enumerate_forests(s, t.k, &ForestEnumOptions { budget: 2, ..Default::default() });
            forests.shuffle(rng);
            for fs in forests.iter().take(per_class) {
                if let Ok(a) = label_forest(s, fs, sign) {
                    out.extend(aggregate(s, &a));
                }
            }
        }
    }
    out
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut per_m) = (0usize, [0usize; 2]);
    let mut worst = f64::INFINITY;
    let mut seeds = 0;
    while checked < 2000 || per_m.iter().any(|&c| c < 500) {
        seeds += 1;
        let n = rng.gen_range(3..=12);
        let net = random_network(&mut rng, n, 3, 0.3);
        let m = if per_m[0] <= per_m[1] { 1 } else { 2 };
        let s = full_set(net, m);
        for agg in random_aggregations(&mut rng, &s, 4) {
            let mut cuts = relax_all(&agg, &s).map_err(|e| e.to_string())?;
            cuts.shuffle(&mut rng);
            for cut in cuts.iter().take(6) {
                let v = validity_check(cut, &s).map_err(|e| e.to_string())?;
                let e = ext_validity(cut, &s).map_err(|e| e.to_string())?.unwrap_or(f64::INFINITY);
                worst = worst.min(v.min_slack).min(e);
                if !v.valid || v.min_slack < -1e-6 || e < -1e-6 {
                    return Err(format!("invalid cut {} (slack {} / {e})", cut.pretty(), v.min_slack));
                }
                checked += 1;
                per_m[m - 1] += 1;
            }
        }
    }
    Ok(format!("{checked} cuts ({} m=1, {} m=2) on {seeds} networks valid under both oracles; min slack {worst:.2e}", per_m[0], per_m[1]))
}

fn criterion5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut cuts = 0;
    for inst in 0..20 {
        let n = rng.gen_range(3..=6);
        let s = full_set(random_network(&mut rng, n, 3, 0.0), 1);
        let aggs = tree_assignments(&s, n as usize);
        let mut lp = mccormick(&s);
        let mut seen = HashSet::new();
        for _ in 0..20 {
            let c = random_objective(&mut rng, &s);
            lp.set_objective(Sense::Minimize, &c);
            let cl = tree_closure(&s, &mut lp, &aggs, &mut seen, 200).map_err(|e| e.to_string())?;
            let hull = hull_optimum(&s, &c, Sense::Minimize).map_err(|e| e.to_string())?.ok_or("empty set")?;
            let err = (cl.solution.objective - hull.value).abs() / hull.value.abs().max(1.0);
            worst = worst.max(err);
            if err > 1e-6 {
                return Err(format!("instance {inst}: closure {} vs hull {}", cl.solution.objective, hull.value));
            }
        }
        cuts += seen.len();
    }
    Ok(format!("20 instances × 20 objectives, max relative error {worst:.2e}, {cuts} tree cuts used"))
}

fn criterion6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pool: Vec<(BilinearSet, AggregatedInequality)> = Vec::new();
    while pool.len() < 200 {
        let n = rng.gen_range(3..=8);
        let m = rng.gen_range(1..=2);
        let s = full_set(random_network(&mut rng, n, 3, 0.3), m);
        for agg in random_aggregations(&mut rng, &s, 3) {
            if agg.bilinear.len() <= 8 && !agg.bilinear.is_empty() {
                pool.push((s.clone(), agg));
            }
        }
    }
    let mut max_terms = 0;
    for i in 0..1000 {
        let (s, agg) = pool.choose(&mut rng).unwrap();
        let p = grid_point(&mut rng, s);
        let fast = relax_most_violated(agg, s, &p).map_err(|e| e.to_string())?;
        let mut best: Option<(Rational, LinearCut)> = None;
        for c in relax_all(agg, s).map_err(|e| e.to_string())? {
            let v = c.slack_exact(&p);
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, c));
            }
        }
        let (_, brute) = best.ok_or("no cuts")?;
        if fast.key() != brute.key() || fast.provenance != brute.provenance {
            return Err(format!("point {i}: {} vs enumeration {}", fast.pretty(), brute.pretty()));
        }
        max_terms = max_terms.max(remaining_terms(agg, s).unwrap().len());
    }
    Ok(format!("1000 points over {} aggregations (≤ {max_terms} terms): identical cut and choices", pool.len()))
}

fn criterion7() -> Outcome {
    let cfg = SeparationConfig::default();
    let rows: Vec<ManifestRow> = (1..=10)
        .map(|seed| ManifestRow { family: Family::Fc, nodes: 20, param: if seed % 2 == 1 { 0.2 } else { 0.5 }, seed })
        .chain((1..=10).map(|seed| ManifestRow { family: Family::Tr, nodes: 10, param: 6.0, seed }))
        .collect();
    let threads = std::thread::available_parallelism().map_or(2, |n| n.get()).min(8);
    let results: Vec<Result<BenchRow, String>> = std::thread::scope(|sc| {
        let chunks: Vec<Vec<(usize, &ManifestRow)>> =
            (0..threads).map(|t| rows.iter().enumerate().filter(|(i, _)| i % threads == t).collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let cfg = &cfg;
                sc.spawn(move || chunk.into_iter().map(|(i, r)| (i, run_instance(r, cfg).map_err(|e| e.to_string()))).collect::<Vec<_>>())
            })
            .collect();
        let mut all: Vec<(usize, Result<BenchRow, String>)> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
        all.sort_by_key(|(i, _)| *i);
        all.into_iter().map(|(_, r)| r).collect()
    });
    let results: Vec<BenchRow> = results.into_iter().collect::<Result<_, _>>()?;
    let (fc, tr) = results.split_at(10);
    let mut errs = Vec::new();
    let improved = fc.iter().filter(|r| r.tree.final_bound > r.lp + 1e-6 * r.lp.abs().max(1.0)).count();
    if improved < 8 {
        errs.push(format!("fc strict improvement on {improved}/10"));
    }
    for r in fc {
        if r.tree.final_bound > r.mip + 1e-6 * r.mip.abs().max(1.0) {
            errs.push(format!("{}: bound {} exceeds MIP {}", r.instance, r.tree.final_bound, r.mip));
        }
        if r.tree_gap > r.rlt_gap + 1e-6 {
            errs.push(format!("{}: tree gap {} > RLT gap {}", r.instance, r.tree_gap, r.rlt_gap));
        }
    }
    let forest_ok = tr.iter().filter(|r| r.forest_gap.unwrap_or(f64::NEG_INFINITY) >= r.tree_gap - 1e-6).count();
    if forest_ok < 7 {
        errs.push(format!("tr forest ≥ tree on {forest_ok}/10"));
    }
    let mean = |v: &[BenchRow], f: &dyn Fn(&BenchRow) -> f64| v.iter().map(f).sum::<f64>() / v.len() as f64;
    let detail = format!(
        "fc: improved {improved}/10, avg tree gap {:.3} vs RLT {:.3}; tr: forest ≥ tree on {forest_ok}/10, avg tree {:.3} forest {:.3}",
        mean(fc, &|r| r.tree_gap),
        mean(fc, &|r| r.rlt_gap),
        mean(tr, &|r| r.tree_gap),
        mean(tr, &|r| r.forest_gap.unwrap_or(0.0))
    );
    if errs.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", errs.join("; ")))
    }
}

fn criterion8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    let mut forests = 0;
    while done < 100 {
        let n = rng.gen_range(3..=9);
        let m = rng.gen_range(1..=2);
        let s = full_set(random_network(&mut rng, n, 3, 0.3), m);
        for agg in random_aggregations(&mut rng, &s, 2) {
            let terms = remaining_terms(&agg, &s).map_err(|e| e.to_string())?;
            let choices: Vec<_> = terms.iter().map(|t| *t.options.choose(&mut rng).unwrap()).collect();
            let w = weights_for(&agg, &s, &choices).map_err(|e| e.to_string())?;
            if !w.bilinear_residual(&s).is_empty() {
                return Err(format!("weights leave bilinear terms for {}", agg.assignment));
            }
            let direct = relax_with(&agg, &s, &choices).map_err(|e| e.to_string())?;
            let closed = closed_form_cut(&s, &w);
            if direct.key() != closed.key() {
                return Err(format!("{}: {} vs {}", agg.assignment, direct.pretty(), closed.pretty()));
            }
            done += 1;
            forests += (m == 2) as usize;
        }
    }
    Ok(format!("{done} assignments ({forests} from forests): identical coefficients"))
}

fn criterion9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for inst in 0..10 {
        let n = rng.gen_range(3..=6);
        let net = random_network(&mut rng, n, 2, 0.0);
        let arcs: Vec<ArcId> = net.arcs().iter().map(|a| a.id).collect();
        let atilde: Vec<BTreeMap<ArcId, Rational>> = if inst == 0 {
            vec![BTreeMap::from([(arcs[0], rational::int(2)), (arcs[1], rational::int(-5))])]
        } else {
            (0..rng.gen_range(1..=2))
                .map(|_| {
                    let mut row = BTreeMap::new();
                    for _ in 0..rng.gen_range(1..=3) {
                        row.insert(*arcs.choose(&mut rng).unwrap(), rational::int(rng.gen_range(-5..=5)));
                    }
                    row
                })
                .collect()
        };
        let rep = lifted_hull_check(&net, &atilde, 20, inst).map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_rel_err);
        if !rep.pass || rep.max_rel_err > 1e-6 {
            return Err(format!("instance {inst}: max relative error {}", rep.max_rel_err));
        }
    }
    Ok(format!("10 instances × 20 objectives (first: 2x_i − 5x_j), max relative error {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("spiked-cycle tree aggregation", criterion1),
        ("layered forest labelling", criterion2),
        ("non-pairwise structures rejected", criterion3),
        ("validity suite", criterion4),
        ("tree-cut hull completeness", criterion5),
        ("separation vs enumeration", criterion6),
        ("benchmark behavior", criterion7),
        ("closed-form differential", criterion8),
        ("lifted-hull identity", criterion9),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != n + 1) {
            continue;
        }
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("criterion {} ({name}): PASS [{secs:.1}s] {d}", n + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {d}", n + 1)
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
