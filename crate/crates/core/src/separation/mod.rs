//! Residual-driven separation of EC&R cuts and the cut loop around it.

mod cut_loop;

pub use cut_loop::{cut_loop, gap_closed, program_cut_loop, program_relaxation, LoopReport, LoopSet};

use crate::ecr::{aggregate, relax_most_violated, AggregatedInequality, EcrAssignment, LinearCut};
use crate::model::{BilinearSet, Point};
use crate::network::{ArcId, Sign};
use crate::structures::{
    enumerate_forests, feasible_partitions, label_forest, tree_node_sets, tree_to_assignment, ForestEnumOptions,
    TreeStructure,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparationConfig {
    /// classes tried per set, by decreasing residual
    pub top_classes: usize,
    /// most constraints aggregated besides the base row
    pub max_aggregations: usize,
    /// stop once a round improves the bound by less than this fraction
    pub improvement_stop: f64,
    pub violation_tol: f64,
    /// forests have at most budget + 1 members (default max_aggregations − 1)
    pub forest_budget: Option<usize>,
    /// cap on forests per class after priority ordering
    pub max_forests: usize,
    pub max_rounds: usize,
    pub verify_cuts: bool,
    pub seed: u64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            top_classes: 35,
            max_aggregations: 3,
            improvement_stop: 0.01,
            violation_tol: 1e-6,
            forest_budget: None,
            max_forests: 5000,
            max_rounds: 100,
            verify_cuts: false,
            seed: 0,
        }
    }
}

impl SeparationConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.top_classes == 0 || self.max_aggregations == 0 || self.max_rounds == 0 || self.max_forests == 0 {
            return Err("counts must be positive".into());
        }
        if !(self.improvement_stop > 0.0 && self.improvement_stop < 1.0) {
            return Err("improvement_stop must lie in (0, 1)".into());
        }
        if !(self.violation_tol > 0.0 && self.violation_tol.is_finite()) {
            return Err("violation_tol must be positive".into());
        }
        Ok(())
    }

    /// Reads a TOML-style `key = value` file; missing keys keep their defaults.
    pub fn from_kv(text: &str) -> Result<Self, String> {
        let cfg = Self::parse_kv(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `from_kv` without range validation, for merging with overrides first.
    pub fn parse_kv(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    pub fn to_kv(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn budget(&self) -> usize {
        self.forest_budget.unwrap_or(self.max_aggregations.saturating_sub(1))
    }
}

/// `(k, sign, Ψ_k)` with Ψ_k = |ȳ_j x̄_i − z̄_k|, by decreasing Ψ then
/// increasing k; the sign is + when ȳ_j x̄_i < z̄_k.
pub fn residual_ranking(p: &Point, s: &BilinearSet) -> Vec<(u32, Sign, f64)> {
    let mut out: Vec<(u32, Sign, f64)> = s
        .triples()
        .iter()
        .map(|t| {
            let d = p.y.get(t.j).copied().unwrap_or(0.0) * p.x(t.arc) - p.z(t.k);
            (t.k, if d < 0.0 { Sign::Pos } else { Sign::Neg }, d.abs())
        })
        .collect();
    out.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::spiked_cycle_set;

    #[test]
    fn kv_round_trip_and_errors() {
        let c = SeparationConfig::from_kv("# loop\ntop_classes = 5\nimprovement_stop = 0.05\n").unwrap();
        assert_eq!(c.top_classes, 5);
        assert_eq!(c.max_aggregations, 3);
        assert_eq!(SeparationConfig::from_kv(&c.to_kv()).unwrap(), c);
        assert!(SeparationConfig::from_kv("nope = 1").is_err());
        assert!(SeparationConfig::from_kv("improvement_stop = 1.5").is_err());
        assert!(SeparationConfig::from_kv("top_classes = 0").is_err());
    }

    #[test]
    fn ranking_order_and_signs() {
        let s = spiked_cycle_set(1);
        let ks: Vec<u32> = s.triples().iter().map(|t| t.k).collect();
        let mut p = Point { x: s.net().arcs().iter().map(|a| (a.id, 1.0)).collect(), y: vec![1.0], z: Default::default() };
        for (n, &k) in ks.iter().enumerate() {
            p.z.insert(k, 1.0 - [0.5, -0.2, 0.9].get(n).copied().unwrap_or(0.0));
        }
        let r = residual_ranking(&p, &s);
        if ks.len() >= 3 {
            assert_eq!((r[0].0, r[1].0, r[2].0), (ks[2], ks[0], ks[1]));
            // y x − z = 0.9 > 0 → class sign −; −0.2 → +
            assert_eq!(r[0].1, Sign::Neg);
            assert_eq!(r[2].1, Sign::Pos);
        }
        assert!(r.windows(2).all(|w| w[0].2 > w[1].2 || (w[0].2 == w[1].2 && w[0].0 < w[1].0)));
    }
}

/// Caches the point-independent aggregations of a set per class.
#[derive(Debug, Default)]
pub struct Separator {
    cache: HashMap<(u32, Sign), Vec<AggregatedInequality>>,
}

impl Separator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every aggregated inequality of class (k, sign) within the configured
    /// structure size, computed once per class.
    pub fn class_aggregations(
        &mut self,
        s: &BilinearSet,
        k: u32,
        sign: Sign,
        priority: &[ArcId],
        cfg: &SeparationConfig,
    ) -> &[AggregatedInequality] {
        self.cache.entry((k, sign)).or_insert_with(|| {
            let t = *s.triple(k).expect("ranked triple");
            let mut out: Vec<AggregatedInequality> = aggregate(s, &EcrAssignment::empty(k, sign, s.m())).into_iter().collect();
            if s.m() == 1 {
                for (nodes, side) in tree_node_sets(s.net(), t.arc, cfg.max_aggregations) {
                    for (part1, part2) in feasible_partitions(s, &nodes, side, sign) {
                        let ts = TreeStructure { class_k: k, anchor: t.arc, side, part1, part2 };
                        if let Ok(a) = tree_to_assignment(s, &ts, sign) {
                            out.extend(aggregate(s, &a));
                        }
                    }
                }
            } else {
                let opts = ForestEnumOptions {
                    budget: cfg.budget(),
                    priority: priority.to_vec(),
                    max_structures: Some(cfg.max_forests),
                };
                for fs in enumerate_forests(s, k, &opts) {
                    if let Ok(a) = label_forest(s, &fs, sign) {
                        out.extend(aggregate(s, &a));
                    }
                }
            }
            out
        })
    }

    /// Violated cuts for `p` from the top residual classes, deduplicated and
    /// sorted by decreasing violation.
    pub fn separate(&mut self, p: &Point, s: &BilinearSet, cfg: &SeparationConfig) -> Vec<LinearCut> {
        let ranking = residual_ranking(p, s);
        let top: Vec<(u32, Sign, f64)> = ranking.iter().take(cfg.top_classes).copied().collect();
        let priority: Vec<ArcId> = top.iter().map(|(k, _, _)| s.triple(*k).expect("triple").arc).collect();
        let mut seen = HashSet::new();
        let mut cuts: Vec<(f64, LinearCut)> = Vec::new();
        for &(k, sign, psi) in &top {
            let signs: &[Sign] = if psi == 0.0 { &[Sign::Pos, Sign::Neg] } else { std::slice::from_ref(&sign) };
            for &sg in signs {
                for agg in self.class_aggregations(s, k, sg, &priority, cfg) {
                    let Ok(cut) = relax_most_violated(agg, s, p) else { continue };
                    let v = cut.violation(p);
                    if v > cfg.violation_tol && seen.insert(cut.key()) {
                        cuts.push((v, cut));
                    }
                }
            }
        }
        cuts.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.key().cmp(&b.1.key())));
        cuts.into_iter().map(|c| c.1).collect()
    }
}

/// One-shot separation (no cache reuse).
pub fn separate(p: &Point, s: &BilinearSet, cfg: &SeparationConfig) -> Vec<LinearCut> {
    Separator::new().separate(p, s, cfg)
}

/// Ψ per triple, for diagnostics.
pub fn residuals(p: &Point, s: &BilinearSet) -> BTreeMap<u32, f64> {
    residual_ranking(p, s).into_iter().map(|(k, _, r)| (k, r)).collect()
}
