//! Dense bounded-variable primal simplex for small linear programs.
//!
//! Problems are stated as `maximize cᵀx` subject to linear rows and per
//! variable bounds `l ≤ x ≤ u` (`l` finite, `u` may be infinite). The solver
//! keeps an explicit basis inverse, which is fine for the handful of rows a
//! zonal market produces, and returns row duals alongside the primal point.
//!
//! Every optimal answer is certified before it is returned: the primal point
//! must satisfy the rows, and the dual bound built from the row duals and
//! reduced costs must match the primal objective to a relative `1e-7`.
// Dense tableau code reads best with explicit indices.
#![allow(clippy::needless_range_loop)]

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const CERT_TOL: f64 = 1e-7;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_BEFORE_BLAND: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    /// `residuals[i]` is `rhs_i − row_i(x)` at the least-infeasible point
    /// found; its sign tells which way row `i` cannot be met.
    #[error("problem is infeasible")]
    Infeasible { residuals: Vec<f64> },
    #[error("objective is unbounded along variable {variable}")]
    Unbounded { variable: usize },
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("basis became singular")]
    Singular,
    #[error("optimality could not be certified (duality gap {gap}, residual {residual})")]
    NotCertified { gap: f64, residual: f64 },
    #[error("variable {0} has invalid bounds")]
    InvalidBounds(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    /// Marginal objective value of each row's right-hand side.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub duality_gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_variable(&mut self, objective: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(objective);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn maximize(&self) -> Result<LpSolution, LpError> {
        for j in 0..self.num_variables() {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !l.is_finite() || u.is_nan() || u < l || !self.objective[j].is_finite() {
                return Err(LpError::InvalidBounds(j));
            }
        }
        let mut s = Simplex::build(self);
        s.phase_one()?;
        s.phase_two(self)?;
        s.certify(self)
    }
}

/// Working state. Columns are structural variables, then one slack per
/// inequality row, then one artificial per row.
struct Simplex {
    m: usize,
    n_struct: usize,
    n_real: usize,
    cols: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n_struct = lp.num_variables();
        let n_slack = lp.rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n_real = n_struct + n_slack;
        let ncols = n_real + m;
        let mut cols = vec![0.0; ncols * m];
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut cost = vec![0.0; ncols];
        let mut slack = n_struct;
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j * m + i] += a;
            }
            match row.relation {
                Relation::Eq => {}
                Relation::Le | Relation::Ge => {
                    cols[slack * m + i] = if row.relation == Relation::Le { 1.0 } else { -1.0 };
                    slack += 1;
                }
            }
        }
        lower.resize(n_real, 0.0);
        upper.resize(n_real, f64::INFINITY);
        let mut x: Vec<f64> = lower.clone();
        let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();

        // Artificial i absorbs the residual of row i at the starting point.
        let mut residual = rhs.clone();
        for j in 0..n_real {
            if x[j] != 0.0 {
                for i in 0..m {
                    residual[i] -= cols[j * m + i] * x[j];
                }
            }
        }
        let mut binv = vec![0.0; m * m];
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            let sign = if residual[i] < 0.0 { -1.0 } else { 1.0 };
            let a = n_real + i;
            cols[a * m + i] = sign;
            binv[i * m + i] = sign;
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(residual[i].abs());
            cost[a] = -1.0;
            basis.push(a);
        }
        let mut in_basis = vec![false; ncols];
        for &b in &basis {
            in_basis[b] = true;
        }
        Self {
            m,
            n_struct,
            n_real,
            cols,
            lower,
            upper,
            cost,
            rhs,
            x,
            basis,
            in_basis,
            binv,
            iterations: 0,
            since_refactor: 0,
        }
    }

    fn ncols(&self) -> usize {
        self.lower.len()
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for i in 0..m {
                    y[i] += cb * row[i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, y: &[f64], j: usize) -> f64 {
        let col = self.col(j);
        self.cost[j] - col.iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let col = self.col(j);
        (0..m)
            .map(|k| {
                let row = &self.binv[k * m..(k + 1) * m];
                row.iter().zip(col).map(|(b, a)| b * a).sum()
            })
            .collect()
    }

    /// Rebuilds the basis inverse and basic values from scratch.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        // Gauss-Jordan on [B | I].
        let mut a = vec![0.0; m * m];
        for (k, &b) in self.basis.iter().enumerate() {
            for i in 0..m {
                a[i * m + k] = self.cols[b * m + i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&r, &s| a[r * m + c].abs().total_cmp(&a[s * m + c].abs()))
                .expect("non-empty range");
            if a[p * m + c].abs() < PIVOT_TOL {
                return Err(LpError::Singular);
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;

        let mut r = self.rhs.clone();
        for j in 0..self.ncols() {
            if !self.in_basis[j] && self.x[j] != 0.0 {
                for i in 0..m {
                    r[i] -= self.cols[j * m + i] * self.x[j];
                }
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            self.x[self.basis[k]] = row.iter().zip(&r).map(|(b, v)| b * v).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, leave_pos: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[leave_pos];
        for k in 0..m {
            self.binv[leave_pos * m + k] /= piv;
        }
        for i in 0..m {
            if i != leave_pos && alpha[i] != 0.0 {
                let f = alpha[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[leave_pos * m + k];
                }
            }
        }
    }

    fn run(&mut self) -> Result<(), LpError> {
        let limit = 1000 + 50 * (self.ncols() + self.m);
        let cost_scale = self.cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let dtol = OPT_TOL * cost_scale;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = degenerate_run >= DEGENERATE_BEFORE_BLAND;
            let y = self.duals();

            // Pricing.
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.ncols() {
                if self.in_basis[j] || self.upper[j] - self.lower[j] <= 0.0 {
                    continue;
                }
                let d = self.reduced_cost(&y, j);
                let at_lower = self.x[j] <= self.lower[j];
                let dir = if at_lower && d > dtol {
                    1.0
                } else if !at_lower && d < -dtol {
                    -1.0
                } else {
                    continue;
                };
                match entering {
                    None => entering = Some((j, dir, d.abs())),
                    Some((_, _, best)) if !bland && d.abs() > best => {
                        entering = Some((j, dir, d.abs()))
                    }
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some((j, dir, _)) = entering else {
                return Ok(());
            };

            // Ratio test.
            let alpha = self.ftran(j);
            let mut step = self.upper[j] - self.lower[j];
            let mut leave: Option<(usize, bool)> = None;
            for k in 0..self.m {
                let rate = -dir * alpha[k];
                let b = self.basis[k];
                let (t, to_upper) = if rate < -PIVOT_TOL {
                    ((self.x[b] - self.lower[b]) / -rate, false)
                } else if rate > PIVOT_TOL {
                    ((self.upper[b] - self.x[b]) / rate, true)
                } else {
                    continue;
                };
                let t = t.max(0.0);
                let better = if t < step - 1e-12 {
                    true
                } else if t <= step + 1e-12 {
                    // Ties: Bland takes the lowest variable index, otherwise the
                    // largest pivot element. A tie with a bound flip keeps the flip.
                    match leave {
                        Some((pos, _)) if bland => b < self.basis[pos],
                        Some((pos, _)) => alpha[k].abs() > alpha[pos].abs(),
                        None => false,
                    }
                } else {
                    false
                };
                if better {
                    step = t;
                    leave = Some((k, to_upper));
                }
            }
            if !step.is_finite() {
                return Err(LpError::Unbounded { variable: j });
            }

            self.iterations += 1;
            if step <= 0.0 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.x[j] += dir * step;
            for k in 0..self.m {
                let b = self.basis[k];
                self.x[b] += step * (-dir * alpha[k]);
            }
            match leave {
                None => {
                    self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
                }
                Some((pos, to_upper)) => {
                    let out = self.basis[pos];
                    self.x[out] = if to_upper { self.upper[out] } else { self.lower[out] };
                    self.pivot(pos, &alpha);
                    self.basis[pos] = j;
                    self.in_basis[out] = false;
                    self.in_basis[j] = true;
                    self.since_refactor += 1;
                }
            }
        }
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        self.run()?;
        self.refactor()?;
        let infeasibility: f64 = (self.n_real..self.ncols()).map(|a| self.x[a]).sum();
        let scale = self.rhs.iter().fold(1.0f64, |acc, b| acc.max(b.abs()));
        if infeasibility > FEAS_TOL * scale * self.m.max(1) as f64 {
            let residuals = (0..self.m)
                .map(|i| {
                    let a = self.n_real + i;
                    self.cols[a * self.m + i] * self.x[a]
                })
                .collect();
            return Err(LpError::Infeasible { residuals });
        }
        Ok(())
    }

    fn phase_two(&mut self, lp: &LinearProgram) -> Result<(), LpError> {
        for a in self.n_real..self.ncols() {
            self.upper[a] = 0.0;
            self.cost[a] = 0.0;
            if !self.in_basis[a] {
                self.x[a] = 0.0;
            }
        }
        self.cost[..self.n_struct].copy_from_slice(&lp.objective);
        self.run()?;
        self.refactor()
    }

    fn certify(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        // Snap to bounds; basic values drift by rounding only.
        for j in 0..self.n_real {
            self.x[j] = self.x[j].clamp(self.lower[j], self.upper[j]);
        }
        let y = self.duals();
        let rhs_scale = self.rhs.iter().fold(1.0f64, |acc, b| acc.max(b.abs()));
        let mut residual = 0.0f64;
        for i in 0..self.m {
            let ax: f64 = (0..self.n_real).map(|j| self.cols[j * self.m + i] * self.x[j]).sum();
            residual = residual.max((ax - self.rhs[i]).abs());
        }
        let primal: f64 = (0..self.n_struct).map(|j| lp.objective[j] * self.x[j]).sum();
        let mut dual: f64 = self.rhs.iter().zip(&y).map(|(b, yi)| b * yi).sum();
        let mut reduced = Vec::with_capacity(self.n_struct);
        for j in 0..self.n_real {
            let d = self.reduced_cost(&y, j);
            if j < self.n_struct {
                reduced.push(d);
            }
            if d > 0.0 {
                if self.upper[j].is_finite() {
                    dual += d * self.upper[j];
                } else if d > OPT_TOL * 1e3 {
                    dual = f64::INFINITY;
                }
            } else {
                dual += d * self.lower[j];
            }
        }
        let gap = dual - primal;
        let gap_ok = gap.abs() <= CERT_TOL * primal.abs().max(1.0);
        let residual_ok = residual <= CERT_TOL * rhs_scale;
        if !gap_ok || !residual_ok {
            return Err(LpError::NotCertified { gap, residual });
        }
        Ok(LpSolution {
            values: self.x[..self.n_struct].to_vec(),
            objective: primal,
            duals: y,
            reduced_costs: reduced,
            iterations: self.iterations,
            duality_gap: gap,
        })
    }
}
