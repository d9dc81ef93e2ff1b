//! Exact oracles: cut validity over conv(S), desk-scale MIP optima, the
//! tree-cut closure, the lifted-hull identity and tightness diagnostics.

mod closure;
mod lifted;
mod mip;
mod oracle;
mod tightness;

pub use closure::{tree_assignments, tree_closure, ClosureReport};
pub use lifted::{lifted_hull_check, LiftedReport};
pub use mip::{count_patterns, mip_optimum, MipOptimum, PATTERN_CAP};
pub use oracle::{disjunct_min, ext_validity, hull_optimum, validity_check, validity_check_tol, HullOptimum, Validity};
pub use tightness::{affine_rank, tightness_report, TightnessReport};

use crate::lp::LpError;

/// Absolute slack tolerance of the validity oracles.
pub const VALIDITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{patterns} binary patterns exceed the enumeration cap")]
    TooLarge { patterns: u64 },
    #[error("no feasible binary pattern")]
    Infeasible,
    #[error("relaxation is {0}")]
    BadStatus(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// |a − b| ≤ tol · max(1, |a|, |b|).
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
