// Dense-tableau bounded-variable primal simplex.
//
// Row i of the model becomes  Σ a_ij x_j + s_i (+ σ_i t_i) = b_i  with slack
// bounds encoding the comparison and an artificial t_i only where the
// starting point violates the row. Phase 1 minimises Σ t, phase 2 the
// objective. Pricing is Dantzig with a Harris ratio test; after a run of
// degenerate pivots the rule falls back to Bland until progress resumes.

use super::{Cmp, LpError, LpModel, LpOptions, LpSolution, LpStatus, Sense};

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const REFRESH_EVERY: usize = 100;
const MAX_REFACTORS: usize = 3;

struct Tableau {
    m: usize,
    n: usize,
    ncol: usize,
    t: Vec<f64>,
    // original columns of A_full, sparse: (row, coef)
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    val: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<usize>, // row or usize::MAX
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    cap: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.ncol + j]
    }

    fn is_art(&self, j: usize) -> bool {
        j >= self.n + self.m
    }

    fn reduced_costs(&mut self) {
        let ncol = self.ncol;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * ncol..(i + 1) * ncol];
                for (dj, &a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// x_B = B⁻¹ (b − N x_N), with B⁻¹ read off the slack columns.
    fn refresh_values(&mut self) {
        let mut r = self.b.clone();
        for j in 0..self.ncol {
            if self.in_basis[j] == usize::MAX && self.val[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    r[i] -= a * self.val[j];
                }
            }
        }
        for i in 0..self.m {
            let mut v = 0.0;
            for (k, rk) in r.iter().enumerate() {
                v += self.at(i, self.n + k) * rk;
            }
            self.val[self.basis[i]] = v;
        }
    }

    /// Rebuild the tableau from the original columns for the current basis.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        // B as dense m×m, inverted by Gauss–Jordan with partial pivoting
        let mut bm = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[j] {
                bm[i * m + c] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&a, &b| bm[a * m + c].abs().total_cmp(&bm[b * m + c].abs())).unwrap();
            if bm[p * m + c].abs() < 1e-12 {
                return false;
            }
            if p != c {
                for k in 0..m {
                    bm.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = bm[c * m + c];
            for k in 0..m {
                bm[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for i in 0..m {
                if i != c {
                    let f = bm[i * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            bm[i * m + k] -= f * bm[c * m + k];
                            inv[i * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        // row c of inv corresponds to basis position c
        let ncol = self.ncol;
        self.t.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..ncol {
            for &(i, a) in &self.cols[j] {
                for r in 0..m {
                    let v = inv[r * m + i];
                    if v != 0.0 {
                        self.t[r * ncol + j] += v * a;
                    }
                }
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                self.t[i * ncol + j] = if i == r { 1.0 } else { 0.0 };
            }
        }
        true
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncol = self.ncol;
        let piv = self.t[r * ncol + q];
        for v in &mut self.t[r * ncol..(r + 1) * ncol] {
            *v /= piv;
        }
        self.t[r * ncol + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * ncol);
        let (prow, after) = rest.split_at_mut(ncol);
        for row in before.chunks_exact_mut(ncol).chain(after.chunks_exact_mut(ncol)) {
            let f = row[q];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (x, &p) in self.d.iter_mut().zip(prow.iter()) {
                *x -= f * p;
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.in_basis[leaving] = usize::MAX;
        self.basis[r] = q;
        self.in_basis[q] = r;
    }

    fn run(&mut self, opts: &LpOptions, feas_tol: f64) -> Result<Outcome, LpError> {
        self.reduced_costs();
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut since_refresh = 0usize;
        loop {
            if self.iterations >= self.cap {
                return Err(LpError::NumericalFailure { iterations: self.iterations });
            }
            // pricing
            let mut enter: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ncol {
                if self.in_basis[j] != usize::MAX || self.upper[j] - self.lower[j] <= 0.0 {
                    continue;
                }
                let dj = self.d[j];
                let (l, u, v) = (self.lower[j], self.upper[j], self.val[j]);
                let can_up = v < u - feas_tol || (u.is_infinite() && v < u);
                let can_down = v > l + feas_tol || (l.is_infinite() && v > l);
                let dir = if dj < -opts.opt_tol && can_up {
                    1.0
                } else if dj > opts.opt_tol && can_down {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((q, dir)) = enter else { return Ok(Outcome::Optimal) };

            // ratio test
            let flip = self.upper[q] - self.lower[q];
            let limit = |s: &Self, i: usize, tol: f64| -> Option<f64> {
                let alpha = s.at(i, q);
                if alpha.abs() < PIVOT_TOL {
                    return None;
                }
                let delta = -dir * alpha;
                let b = s.basis[i];
                if delta < 0.0 {
                    s.lower[b].is_finite().then(|| ((s.val[b] - s.lower[b] + tol) / -delta).max(0.0))
                } else {
                    s.upper[b].is_finite().then(|| ((s.upper[b] - s.val[b] + tol) / delta).max(0.0))
                }
            };
            let mut leave: Option<usize> = None;
            let mut theta;
            if bland {
                theta = f64::INFINITY;
                for i in 0..self.m {
                    if let Some(lim) = limit(self, i, 0.0) {
                        let better = match leave {
                            None => true,
                            Some(r) => lim < theta - 1e-12 || (lim <= theta + 1e-12 && self.basis[i] < self.basis[r]),
                        };
                        if better {
                            theta = lim;
                            leave = Some(i);
                        }
                    }
                }
            } else {
                let mut cap = f64::INFINITY;
                for i in 0..self.m {
                    if let Some(lim) = limit(self, i, feas_tol) {
                        cap = cap.min(lim);
                    }
                }
                theta = f64::INFINITY;
                let mut best_alpha = 0.0;
                if cap.is_finite() {
                    for i in 0..self.m {
                        if let Some(lim) = limit(self, i, 0.0) {
                            let a = self.at(i, q).abs();
                            if lim <= cap && a > best_alpha {
                                best_alpha = a;
                                theta = lim;
                                leave = Some(i);
                            }
                        }
                    }
                }
            }
            if flip <= theta {
                theta = flip;
                leave = None;
            }
            if !theta.is_finite() {
                return Ok(Outcome::Unbounded);
            }

            self.iterations += 1;
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            for i in 0..self.m {
                let a = self.at(i, q);
                if a != 0.0 {
                    let b = self.basis[i];
                    self.val[b] -= dir * a * theta;
                }
            }
            self.val[q] += dir * theta;
            match leave {
                None => {
                    self.val[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                }
                Some(r) => {
                    let b = self.basis[r];
                    let delta = -dir * self.at(r, q);
                    self.val[b] = if delta < 0.0 { self.lower[b] } else { self.upper[b] };
                    self.pivot(r, q);
                }
            }
            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                since_refresh = 0;
                self.refresh_values();
                self.reduced_costs();
            }
        }
    }

    fn row_violation(&self, model: &LpModel) -> f64 {
        model.max_violation(&self.val[..self.n])
    }
}

pub(super) fn solve(model: &LpModel, opts: &LpOptions) -> Result<LpSolution, LpError> {
    let n = model.num_vars();
    let m = model.num_rows();
    let feas_tol = opts.feas_tol;

    let mut lower: Vec<f64> = (0..n).map(|j| model.bounds(super::VarId(j)).0).collect();
    let mut upper: Vec<f64> = (0..n).map(|j| model.bounds(super::VarId(j)).1).collect();
    for j in 0..n {
        if lower[j] > upper[j] {
            return Ok(infeasible(n));
        }
    }
    let mut val: Vec<f64> = (0..n)
        .map(|j| {
            if lower[j].is_finite() {
                lower[j]
            } else if upper[j].is_finite() {
                upper[j]
            } else {
                0.0
            }
        })
        .collect();

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut b = vec![0.0; m];
    for (i, row) in model.rows().iter().enumerate() {
        b[i] = row.rhs;
        for &(v, c) in &row.coefs {
            if c != 0.0 {
                cols[v.0].push((i, c));
            }
        }
    }
    // merge duplicate entries of one variable in one row
    for col in cols.iter_mut() {
        col.sort_by_key(|e| e.0);
        col.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
    }
    let mut resid = b.clone();
    for j in 0..n {
        for &(i, a) in &cols[j] {
            resid[i] -= a * val[j];
        }
    }
    // slacks
    let mut arts: Vec<(usize, f64, f64)> = Vec::new(); // (row, sigma, value)
    let mut basis = vec![usize::MAX; m];
    for (i, row) in model.rows().iter().enumerate() {
        let (sl, su) = match row.cmp {
            Cmp::Le => (0.0, f64::INFINITY),
            Cmp::Ge => (f64::NEG_INFINITY, 0.0),
            Cmp::Eq => (0.0, 0.0),
        };
        cols.push(vec![(i, 1.0)]);
        lower.push(sl);
        upper.push(su);
        let r = resid[i];
        if r >= sl && r <= su {
            val.push(r);
            basis[i] = n + i;
        } else {
            let clamped = r.clamp(sl, su);
            val.push(clamped);
            let d = r - clamped;
            arts.push((i, d.signum(), d.abs()));
        }
    }
    for &(i, sigma, v) in &arts {
        basis[i] = cols.len();
        cols.push(vec![(i, sigma)]);
        lower.push(0.0);
        upper.push(f64::INFINITY);
        val.push(v);
    }
    let ncol = cols.len();
    let mut t = vec![0.0; m * ncol];
    for (j, col) in cols.iter().enumerate() {
        for &(i, a) in col {
            t[i * ncol + j] = a;
        }
    }
    for &(i, sigma, _) in &arts {
        if sigma < 0.0 {
            for v in &mut t[i * ncol..(i + 1) * ncol] {
                *v = -*v;
            }
        }
    }
    let mut in_basis = vec![usize::MAX; ncol];
    for (i, &j) in basis.iter().enumerate() {
        in_basis[j] = i;
    }
    let mut tab = Tableau {
        m,
        n,
        ncol,
        t,
        cols,
        b,
        lower,
        upper,
        val,
        basis,
        in_basis,
        cost: vec![0.0; ncol],
        d: vec![0.0; ncol],
        iterations: 0,
        cap: 50 * (m + n).max(1),
    };

    // phase 1
    if !arts.is_empty() {
        for j in n + m..ncol {
            tab.cost[j] = 1.0;
        }
        tab.run(opts, feas_tol)?;
        tab.refresh_values();
        let scale = 1.0 + tab.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let infeas: f64 = (n + m..ncol).map(|j| tab.val[j]).sum();
        if infeas > feas_tol * scale {
            return Ok(LpSolution { iterations: tab.iterations, ..infeasible(n) });
        }
        for j in n + m..ncol {
            tab.upper[j] = 0.0;
            tab.cost[j] = 0.0;
            if tab.in_basis[j] == usize::MAX {
                tab.val[j] = 0.0;
            }
        }
        // drive basic artificials out where possible
        for r in 0..m {
            let j = tab.basis[r];
            if !tab.is_art(j) {
                continue;
            }
            let q = (0..n + m)
                .filter(|&c| tab.in_basis[c] == usize::MAX)
                .max_by(|&a, &c| tab.at(r, a).abs().total_cmp(&tab.at(r, c).abs()));
            if let Some(q) = q {
                if tab.at(r, q).abs() > 1e-7 {
                    tab.pivot(r, q);
                    tab.val[j] = 0.0;
                }
            }
        }
        tab.refresh_values();
    }

    // phase 2
    let sgn = if model.sense == Sense::Maximize { -1.0 } else { 1.0 };
    for j in 0..n {
        tab.cost[j] = sgn * model.objective_coef(super::VarId(j));
    }
    let mut refactors = 0;
    loop {
        match tab.run(opts, feas_tol)? {
            Outcome::Unbounded => {
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    x: tab.val[..n].to_vec(),
                    objective: sgn * f64::NEG_INFINITY,
                    max_violation: 0.0,
                    iterations: tab.iterations,
                })
            }
            Outcome::Optimal => {}
        }
        tab.refresh_values();
        let scale = 1.0 + tab.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if tab.row_violation(model) <= feas_tol * scale || refactors >= MAX_REFACTORS {
            break;
        }
        refactors += 1;
        if !tab.refactor() {
            return Err(LpError::NumericalFailure { iterations: tab.iterations });
        }
        tab.refresh_values();
    }
    let x: Vec<f64> = tab.val[..n].to_vec();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: model.objective_value(&x),
        max_violation: model.max_violation(&x),
        x,
        iterations: tab.iterations,
    })
}

fn infeasible(n: usize) -> LpSolution {
    LpSolution { status: LpStatus::Infeasible, x: vec![0.0; n], objective: f64::NAN, max_violation: f64::INFINITY, iterations: 0 }
}
