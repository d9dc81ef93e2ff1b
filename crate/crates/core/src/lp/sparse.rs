// Sparse backend delegating to `microlp` for models too large for a dense tableau.

use super::{Cmp, LpError, LpModel, LpOptions, LpSolution, LpStatus, Sense, VarId};
use microlp::{ComparisonOp, Error, LinearExpr, OptimizationDirection, Problem, SolveOutcome};

pub(super) fn solve(model: &LpModel, _opts: &LpOptions) -> Result<LpSolution, LpError> {
    let n = model.num_vars();
    let dir = match model.sense {
        Sense::Minimize => OptimizationDirection::Minimize,
        Sense::Maximize => OptimizationDirection::Maximize,
    };
    let mut p = Problem::new(dir);
    let vars: Vec<_> = (0..n)
        .map(|j| {
            let (l, u) = model.bounds(VarId(j));
            p.add_var(model.objective_coef(VarId(j)), (l, u))
        })
        .collect();
    for r in model.rows() {
        // microlp wants each variable once per row
        let mut merged = std::collections::BTreeMap::new();
        for &(v, c) in &r.coefs {
            *merged.entry(v.0).or_insert(0.0) += c;
        }
        let mut e = LinearExpr::empty();
        for (v, c) in merged {
            e.add(vars[v], c);
        }
        let op = match r.cmp {
            Cmp::Le => ComparisonOp::Le,
            Cmp::Ge => ComparisonOp::Ge,
            Cmp::Eq => ComparisonOp::Eq,
        };
        p.add_constraint(e, op, r.rhs);
    }
    let empty = |status| LpSolution { status, x: vec![0.0; n], objective: f64::NAN, max_violation: 0.0, iterations: 0 };
    match p.solve() {
        Ok(SolveOutcome::Solution(sol)) => {
            let x: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: sol.objective(),
                max_violation: model.max_violation(&x),
                x,
                iterations: 0,
            })
        }
        Ok(SolveOutcome::Interrupted(_)) => Err(LpError::NumericalFailure { iterations: 0 }),
        Err(Error::Infeasible) => Ok(empty(LpStatus::Infeasible)),
        Err(Error::Unbounded) => Ok(empty(LpStatus::Unbounded)),
        Err(_) => Err(LpError::NumericalFailure { iterations: 0 }),
    }
}
