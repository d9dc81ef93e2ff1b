//! Linear programs: a small modelling layer, a dense bounded-variable primal
//! simplex, a sparse backend for large models, and a plain-text dump.

mod dense;
mod sparse;

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coefs: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub sense: Sense,
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    obj: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// primal values (meaningful when Optimal)
    pub x: Vec<f64>,
    pub objective: f64,
    /// max violation of rows and bounds at `x`
    pub max_violation: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.0]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("simplex stalled after {iterations} iterations")]
    NumericalFailure { iterations: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// dense tableau for small models, sparse otherwise
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub backend: Backend,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { feas_tol: 1e-7, opt_tol: 1e-7, backend: Backend::Auto }
    }
}

/// Tableau size (rows × columns) above which `Backend::Auto` goes sparse.
const DENSE_LIMIT: usize = 4_000_000;

impl LpModel {
    pub fn new(sense: Sense) -> Self {
        LpModel { sense, names: vec![], lower: vec![], upper: vec![], obj: vec![], rows: vec![] }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> VarId {
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.obj.push(obj);
        VarId(self.names.len() - 1)
    }

    pub fn add_row(&mut self, name: impl Into<String>, coefs: Vec<(VarId, f64)>, cmp: Cmp, rhs: f64) {
        self.rows.push(Row { name: name.into(), coefs, cmp, rhs });
    }

    pub fn set_objective(&mut self, v: VarId, c: f64) {
        self.obj[v.0] = c;
    }

    pub fn clear_objective(&mut self) {
        self.obj.iter_mut().for_each(|c| *c = 0.0);
    }

    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) {
        self.lower[v.0] = lower;
        self.upper[v.0] = upper;
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn bounds(&self, v: VarId) -> (f64, f64) {
        (self.lower[v.0], self.upper[v.0])
    }

    pub fn objective_coef(&self, v: VarId) -> f64 {
        self.obj[v.0]
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for (j, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!("bad bounds on {}", self.names[j])));
            }
            if !self.obj[j].is_finite() {
                return Err(LpError::InvalidModel(format!("non-finite objective on {}", self.names[j])));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!("non-finite rhs in {}", r.name)));
            }
            for &(v, c) in &r.coefs {
                if v.0 >= self.names.len() {
                    return Err(LpError::InvalidModel(format!("row {} references undeclared variable", r.name)));
                }
                if !c.is_finite() {
                    return Err(LpError::InvalidModel(format!("non-finite coefficient in {}", r.name)));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.names.len() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for r in &self.rows {
            let act: f64 = r.coefs.iter().map(|&(v, c)| c * x[v.0]).sum();
            let viol = match r.cmp {
                Cmp::Le => act - r.rhs,
                Cmp::Ge => r.rhs - act,
                Cmp::Eq => (act - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Deterministic text in CPLEX LP syntax.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let name = |j: usize| sanitize(&self.names[j], 'x', j);
        s.push_str(match self.sense {
            Sense::Minimize => "Minimize\n",
            Sense::Maximize => "Maximize\n",
        });
        s.push_str(" obj:");
        let terms: Vec<(VarId, f64)> =
            self.obj.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, &c)| (VarId(j), c)).collect();
        write_terms(&mut s, &terms, &name);
        s.push_str("\nSubject To\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, " {}:", sanitize(&r.name, 'r', i));
            write_terms(&mut s, &r.coefs, &name);
            let op = match r.cmp {
                Cmp::Le => "<=",
                Cmp::Ge => ">=",
                Cmp::Eq => "=",
            };
            let _ = writeln!(s, " {op} {}", fmt_num(r.rhs));
        }
        s.push_str("Bounds\n");
        for j in 0..self.names.len() {
            let (l, u) = (self.lower[j], self.upper[j]);
            let n = name(j);
            match (l.is_finite(), u.is_finite()) {
                (false, false) => {
                    let _ = writeln!(s, " {n} free");
                }
                (true, true) if l == u => {
                    let _ = writeln!(s, " {n} = {}", fmt_num(l));
                }
                (true, true) => {
                    let _ = writeln!(s, " {} <= {n} <= {}", fmt_num(l), fmt_num(u));
                }
                (true, false) => {
                    let _ = writeln!(s, " {n} >= {}", fmt_num(l));
                }
                (false, true) => {
                    let _ = writeln!(s, " -inf <= {n} <= {}", fmt_num(u));
                }
            }
        }
        s.push_str("End\n");
        s
    }
}

fn sanitize(name: &str, prefix: char, idx: usize) -> String {
    let ok: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' }).collect();
    if ok.is_empty() || ok.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        format!("{prefix}{idx}_{ok}")
    } else {
        ok
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn write_terms(s: &mut String, terms: &[(VarId, f64)], name: &dyn Fn(usize) -> String) {
    if terms.is_empty() {
        s.push_str(" 0");
    }
    for &(v, c) in terms {
        let sign = if c < 0.0 { '-' } else { '+' };
        let _ = write!(s, " {sign} {} {}", fmt_num(c.abs()), name(v.0));
    }
}

pub fn solve(model: &LpModel, opts: &LpOptions) -> Result<LpSolution, LpError> {
    model.validate()?;
    let backend = match opts.backend {
        Backend::Auto => {
            let m = model.num_rows();
            if m * (m + model.num_vars()) > DENSE_LIMIT {
                Backend::Sparse
            } else {
                Backend::Dense
            }
        }
        b => b,
    };
    let mut sol = match backend {
        Backend::Sparse => sparse::solve(model, opts)?,
        _ => dense::solve(model, opts)?,
    };
    if sol.status == LpStatus::Optimal {
        sol.max_violation = model.max_violation(&sol.x);
        sol.objective = model.objective_value(&sol.x);
        if sol.max_violation > opts.feas_tol * (1.0 + max_abs_rhs(model)) {
            return Err(LpError::NumericalFailure { iterations: sol.iterations });
        }
    }
    Ok(sol)
}

pub fn solve_default(model: &LpModel) -> Result<LpSolution, LpError> {
    solve(model, &LpOptions::default())
}

fn max_abs_rhs(model: &LpModel) -> f64 {
    model.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both(model: &LpModel) -> [LpSolution; 2] {
        let d = solve(model, &LpOptions { backend: Backend::Dense, ..Default::default() }).unwrap();
        let s = solve(model, &LpOptions { backend: Backend::Sparse, ..Default::default() }).unwrap();
        [d, s]
    }

    #[test]
    fn lower_bound_row() {
        let mut m = LpModel::new(Sense::Minimize);
        let x = m.add_var("x", 0.0, 10.0, 1.0);
        m.add_row("c", vec![(x, 1.0)], Cmp::Ge, 3.0);
        for s in both(&m) {
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.value(x) - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_variable_unbounded() {
        let mut m = LpModel::new(Sense::Maximize);
        m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        for s in both(&m) {
            assert_eq!(s.status, LpStatus::Unbounded);
        }
    }

    #[test]
    fn infeasible_rows() {
        let mut m = LpModel::new(Sense::Minimize);
        let x = m.add_var("x", 0.0, 1.0, 1.0);
        m.add_row("c", vec![(x, 1.0)], Cmp::Ge, 2.0);
        for s in both(&m) {
            assert_eq!(s.status, LpStatus::Infeasible);
        }
    }

    #[test]
    fn small_mixed_program() {
        // max 3a + 2b + c, a + b + c = 4, a − b ≤ 1, b ≤ 2.5, c ∈ [−1, 1]
        let mut m = LpModel::new(Sense::Maximize);
        let a = m.add_var("a", 0.0, f64::INFINITY, 3.0);
        let b = m.add_var("b", 0.0, 2.5, 2.0);
        let c = m.add_var("c", -1.0, 1.0, 1.0);
        m.add_row("sum", vec![(a, 1.0), (b, 1.0), (c, 1.0)], Cmp::Eq, 4.0);
        m.add_row("diff", vec![(a, 1.0), (b, -1.0)], Cmp::Le, 1.0);
        for s in both(&m) {
            assert_eq!(s.status, LpStatus::Optimal);
            // a = b + 1, c = 4 − 2b − 1 ≥ −1 → b ≤ 2; obj = 3b+3+2b+3−2b = 3b + 6 → b = 2
            assert!((s.objective - 12.0).abs() < 1e-8, "{}", s.objective);
        }
    }

    #[test]
    fn deterministic_resolve() {
        let mut m = LpModel::new(Sense::Minimize);
        let v: Vec<VarId> = (0..6).map(|j| m.add_var(format!("v{j}"), 0.0, 5.0, (j as f64) - 2.5)).collect();
        m.add_row("a", v.iter().map(|&x| (x, 1.0)).collect(), Cmp::Le, 7.0);
        m.add_row("b", vec![(v[0], 1.0), (v[5], -2.0)], Cmp::Ge, -1.0);
        let s1 = solve_default(&m).unwrap();
        let s2 = solve_default(&m).unwrap();
        assert_eq!(s1.objective.to_bits(), s2.objective.to_bits());
        assert_eq!(s1.x, s2.x);
    }

    #[test]
    fn dump_is_stable_and_complete() {
        let mut m = LpModel::new(Sense::Minimize);
        let x = m.add_var("x[1]", 0.0, 10.0, 1.0);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY, -2.0);
        m.add_row("c1", vec![(x, 1.0), (y, -1.0)], Cmp::Ge, 3.0);
        let d = m.dump();
        assert_eq!(d, m.dump());
        assert!(d.contains("Minimize\n obj: + 1.0 x[1] - 2.0 y\n"));
        assert!(d.contains(" c1: + 1.0 x[1] - 1.0 y >= 3.0\n"));
        assert!(d.contains(" y free\n"));
        assert!(d.ends_with("End\n"));
    }

    #[test]
    fn rejects_undeclared_variables() {
        let mut m = LpModel::new(Sense::Minimize);
        m.add_row("bad", vec![(VarId(3), 1.0)], Cmp::Le, 1.0);
        assert!(matches!(solve_default(&m), Err(LpError::InvalidModel(_))));
    }
}
