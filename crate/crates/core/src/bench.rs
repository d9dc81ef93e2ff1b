//! Benchmark rows: McCormick, brute-force MIP, tree/forest EC&R loops and RLT-1
//! on one generated instance.

use crate::instances::{fc_relaxations, generate, tr_relaxations, Instance, InstanceError, ManifestRow, TrMode};
use crate::lp::solve_default;
use crate::model::BilinearSet;
use crate::separation::{gap_closed, program_cut_loop, LoopReport, LoopSet, SeparationConfig};
use crate::verify::{mip_optimum, VerifyError};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub lp: f64,
    pub mip: f64,
    /// gap closed after the first tree round
    pub root_gap: f64,
    pub tree_gap: f64,
    /// tr only: tree cuts on single-y sets plus forest cuts on conflict pairs
    pub forest_gap: Option<f64>,
    pub rlt_gap: f64,
    pub cuts: usize,
    pub rounds: usize,
    pub seconds: f64,
    pub tree: LoopReport,
    pub forest: Option<LoopReport>,
}

pub const CSV_HEADER: &str = "instance,LP,MIP*,root-gap-proxy,tree-gap,forest-gap,RLT-gap,cuts,rounds,time";

fn run_loop(inst: &Instance, sets: Vec<BilinearSet>, cfg: &SeparationConfig, opt: f64) -> Result<LoopReport, VerifyError> {
    let mut lp = inst.program().mccormick();
    let mut sets: Vec<LoopSet> = sets.into_iter().map(LoopSet::new).collect();
    let mut rep = program_cut_loop(&mut lp, &mut sets, cfg)?;
    rep.set_optimum(opt);
    Ok(rep)
}

pub fn run_instance(row: &ManifestRow, cfg: &SeparationConfig) -> Result<BenchRow, BenchError> {
    let start = Instant::now();
    let inst = generate(row)?;
    let program = inst.program();
    let mip = mip_optimum(&program)?.value;
    log::debug!("{}: MIP {mip} after {:?}", row.id(), start.elapsed());
    let rlt = solve_default(&program.rlt1().lp).map_err(VerifyError::from)?;
    if !rlt.is_optimal() {
        return Err(VerifyError::BadStatus(format!("RLT-1: {:?}", rlt.status)).into());
    }
    let (tree_sets, forest_sets) = match &inst {
        Instance::Fc(i) => (fc_relaxations(i), None),
        Instance::Tr(i) => {
            let mut both = tr_relaxations(i, TrMode::Single);
            both.extend(tr_relaxations(i, TrMode::ConflictPair));
            (tr_relaxations(i, TrMode::Single), Some(both))
        }
    };
    log::debug!("{}: RLT-1 {} after {:?}", row.id(), rlt.objective, start.elapsed());
    let tree = run_loop(&inst, tree_sets, cfg, mip)?;
    log::debug!("{}: tree loop done after {:?}", row.id(), start.elapsed());
    let forest = forest_sets.map(|s| run_loop(&inst, s, cfg, mip)).transpose()?;
    let lp = tree.lp_bound;
    let root = tree.bounds.get(1).copied().unwrap_or(lp);
    let headline = forest.as_ref().unwrap_or(&tree);
    Ok(BenchRow {
        instance: row.id(),
        lp,
        mip,
        root_gap: gap_closed(lp, root, mip),
        tree_gap: tree.gap_improvement.unwrap_or(0.0),
        forest_gap: forest.as_ref().and_then(|f| f.gap_improvement),
        rlt_gap: gap_closed(lp, rlt.objective, mip),
        cuts: headline.total_cuts,
        rounds: headline.rounds,
        seconds: start.elapsed().as_secs_f64(),
        tree: tree.clone(),
        forest,
    })
}

impl BenchRow {
    pub fn csv(&self) -> String {
        let forest = self.forest_gap.map(|g| format!("{g:.4}")).unwrap_or_default();
        format!(
            "{},{:.2},{:.2},{:.4},{:.4},{forest},{:.4},{},{},{:.2}",
            self.instance, self.lp, self.mip, self.root_gap, self.tree_gap, self.rlt_gap, self.cuts, self.rounds, self.seconds
        )
    }
}

/// The "avg" row over gaps, cuts, rounds and time (LP and MIP* left blank).
pub fn average_row(rows: &[BenchRow]) -> String {
    let n = rows.len().max(1) as f64;
    let mean = |f: &dyn Fn(&BenchRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let forest: Vec<f64> = rows.iter().filter_map(|r| r.forest_gap).collect();
    let forest = if forest.is_empty() {
        String::new()
    } else {
        format!("{:.4}", forest.iter().sum::<f64>() / forest.len() as f64)
    };
    format!(
        "avg,,,{:.4},{:.4},{forest},{:.4},{:.1},{:.1},{:.2}",
        mean(&|r| r.root_gap),
        mean(&|r| r.tree_gap),
        mean(&|r| r.rlt_gap),
        mean(&|r| r.cuts as f64),
        mean(&|r| r.rounds as f64),
        mean(&|r| r.seconds)
    )
}
