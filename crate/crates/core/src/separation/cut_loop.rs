use super::{SeparationConfig, Separator};
use crate::lp::{solve_default, LpStatus, Sense};
use crate::model::{mccormick, BilinearSet, Point, Program, ProgramLp, SetLp};
use crate::verify::{validity_check, VerifyError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopReport {
    /// relaxation bound before any cut, then after every round
    pub bounds: Vec<f64>,
    pub cuts_per_round: Vec<usize>,
    pub total_cuts: usize,
    pub lp_bound: f64,
    pub final_bound: f64,
    pub rounds: usize,
    pub gap_improvement: Option<f64>,
}

impl LoopReport {
    /// (final − LP) / (opt − LP); a zero gap counts as fully closed.
    pub fn set_optimum(&mut self, opt: f64) {
        self.gap_improvement = Some(gap_closed(self.lp_bound, self.final_bound, opt));
    }

    pub fn csv_header() -> &'static str {
        "instance,lp_bound,final_bound,gap,cuts,rounds,time_s"
    }

    pub fn csv_row(&self, instance: &str, seconds: f64) -> String {
        let gap = self.gap_improvement.map(|g| format!("{g:.6}")).unwrap_or_default();
        format!(
            "{instance},{:.6},{:.6},{gap},{},{},{seconds:.3}",
            self.lp_bound, self.final_bound, self.total_cuts, self.rounds
        )
    }
}

pub fn gap_closed(lp: f64, bound: f64, opt: f64) -> f64 {
    let den = opt - lp;
    if den.abs() <= 1e-9 * 1f64.max(opt.abs()) {
        1.0
    } else {
        (bound - lp) / den
    }
}

/// A set taking part in a program-level loop.
pub struct LoopSet {
    pub set: BilinearSet,
    separator: Separator,
}

impl LoopSet {
    pub fn new(set: BilinearSet) -> Self {
        LoopSet { set, separator: Separator::new() }
    }
}

fn stop(old: f64, new: f64, cfg: &SeparationConfig) -> bool {
    let threshold = if old.abs() > 1e-9 { cfg.improvement_stop * old.abs() } else { 1e-9 };
    new - old < threshold
}

/// Rounds of {solve, separate on every set, add lifted cuts} on `lp`, a
/// minimization relaxation of `p`, until a round improves the bound by less
/// than `improvement_stop` (relative to |bound|) or yields no cut.
pub fn program_cut_loop(
    lp: &mut ProgramLp,
    sets: &mut [LoopSet],
    cfg: &SeparationConfig,
) -> Result<LoopReport, VerifyError> {
    cfg.validate().map_err(VerifyError::Dimension)?;
    let solve = |lp: &ProgramLp| -> Result<(f64, Point), VerifyError> {
        let sol = solve_default(&lp.lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(VerifyError::BadStatus(format!("{:?}", sol.status)));
        }
        Ok((sol.objective, lp.point(&sol)))
    };
    let (lp_bound, mut point) = solve(lp)?;
    let mut report = LoopReport {
        bounds: vec![lp_bound],
        cuts_per_round: Vec::new(),
        total_cuts: 0,
        lp_bound,
        final_bound: lp_bound,
        rounds: 0,
        gap_improvement: None,
    };
    let mut bound = lp_bound;
    for _ in 0..cfg.max_rounds {
        let mut added = 0;
        for ls in sets.iter_mut() {
            let local = SetLp::local_point(&point, &ls.set);
            for cut in ls.separator.separate(&local, &ls.set, cfg) {
                if cfg.verify_cuts && !validity_check(&cut, &ls.set)?.valid {
                    return Err(VerifyError::BadStatus(format!("invalid cut generated: {}", cut.pretty())));
                }
                report.total_cuts += 1;
                lp.add_lifted_cut(&ls.set, &cut, format!("ecr{}", report.total_cuts));
                added += 1;
            }
        }
        report.rounds += 1;
        report.cuts_per_round.push(added);
        if added == 0 {
            break;
        }
        let (nb, np) = solve(lp)?;
        report.bounds.push(nb);
        let done = stop(bound, nb, cfg);
        bound = nb;
        point = np;
        if done {
            break;
        }
    }
    report.final_bound = bound;
    Ok(report)
}

/// The loop on a single set with its McCormick relaxation and objective `c`
/// (minimization).
pub fn cut_loop(s: &BilinearSet, c: &Point, cfg: &SeparationConfig) -> Result<LoopReport, VerifyError> {
    let mut lp = mccormick(s);
    lp.set_objective(Sense::Minimize, c);
    let mut sets = [LoopSet::new(s.clone())];
    program_cut_loop(&mut lp, &mut sets, cfg)
}

/// McCormick relaxation of a program, ready for `program_cut_loop`.
pub fn program_relaxation(p: &Program) -> ProgramLp {
    p.mccormick()
}
