//! Dense revised simplex for `min cᵀx s.t. Ax = b, x ≥ 0`.
//!
//! Columns are sparse; the basis inverse is kept dense and refactored
//! periodically. Pricing is Dantzig's rule, switching to Bland's rule after
//! a run of degenerate pivots. The right-hand side is perturbed while
//! pivoting; a dual simplex pass on the final basis restores the exact one.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_RUN: usize = 50;
const PERTURBATION: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible (phase-one residual {0})")]
    Infeasible(f64),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("basis became singular")]
    Singular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub cost: f64,
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub rhs: Vec<f64>,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Row duals `y` with `c_j - yᵀA_j ≥ 0` at optimality.
    pub duals: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(rows: usize) -> Self {
        Self {
            rhs: vec![0.0; rows],
            columns: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_column(&mut self, cost: f64, entries: Vec<(usize, f64)>) -> usize {
        self.columns.push(Column { cost, entries });
        self.columns.len() - 1
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Simplex::new(self).run()
    }
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.rows();
        let sign: Vec<f64> = lp
            .rhs
            .iter()
            .map(|&r| if r < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let b: Vec<f64> = lp
            .rhs
            .iter()
            .zip(&sign)
            .enumerate()
            .map(|(i, (r, s))| r * s + PERTURBATION * (1.0 + ((i * 7919) % 997) as f64 / 997.0))
            .collect();
        let ncols = lp.columns.len();
        let mut binv = vec![0.0; m * m];
        let mut basis: Vec<usize> = (ncols..ncols + m).collect();
        let mut in_basis = vec![false; ncols + m];
        let mut xb = b.clone();
        // start from positive singleton columns where available
        for (j, col) in lp.columns.iter().enumerate() {
            if let [(r, a)] = col.entries[..] {
                let a = a * sign[r];
                if a > PIVOT_TOL && basis[r] >= ncols {
                    basis[r] = j;
                    binv[r * m + r] = 1.0 / a;
                    xb[r] = b[r] / a;
                }
            }
        }
        for (i, &j) in basis.iter().enumerate() {
            in_basis[j] = true;
            if j >= ncols {
                binv[i * m + i] = 1.0;
            }
        }
        Self {
            lp,
            m,
            sign,
            xb,
            b,
            basis,
            in_basis,
            binv,
            pivots: 0,
        }
    }

    fn ncols(&self) -> usize {
        self.lp.columns.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.ncols()
    }

    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if self.is_artificial(j) {
            f(j - self.ncols(), 1.0);
        } else {
            for &(r, a) in &self.lp.columns[j].entries {
                f(r, a * self.sign[r]);
            }
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        self.for_column(j, |r, a| {
            for (i, ui) in u.iter_mut().enumerate() {
                *ui += self.binv[i * m + r] * a;
            }
        });
        u
    }

    /// `c_Bᵀ B^{-1}`.
    fn btran(&self, cost: &impl Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let c = cost(bj);
            if c != 0.0 {
                for (r, yr) in y.iter_mut().enumerate() {
                    *yr += c * self.binv[i * m + r];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, c: f64, y: &[f64]) -> f64 {
        let mut d = c;
        self.for_column(j, |r, a| d -= y[r] * a);
        d
    }

    fn pivot(&mut self, r: usize, q: usize, u: &[f64]) {
        let m = self.m;
        let theta = self.xb[r] / u[r];
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * u[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-11 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let piv = u[r];
        for c in 0..m {
            self.binv[r * m + c] /= piv;
        }
        for i in 0..m {
            if i != r && u[i] != 0.0 {
                let f = u[i];
                for c in 0..m {
                    self.binv[i * m + c] -= f * self.binv[r * m + c];
                }
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.pivots += 1;
        if self.pivots.is_multiple_of(REFACTOR_EVERY) {
            // keep the last good inverse if refactoring fails
            let _ = self.refactor();
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        // augmented [B | I], Gauss-Jordan with partial pivoting
        let w = 2 * m;
        let mut a = vec![0.0; m * w];
        for (col, &j) in self.basis.iter().enumerate() {
            self.for_column(j, |r, v| a[r * w + col] = v);
        }
        for i in 0..m {
            a[i * w + m + i] = 1.0;
        }
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))
                .unwrap();
            if a[p * w + col].abs() < 1e-12 {
                return Err(LpError::Singular);
            }
            if p != col {
                for c in 0..w {
                    a.swap(p * w + c, col * w + c);
                }
            }
            let piv = a[col * w + col];
            for c in 0..w {
                a[col * w + c] /= piv;
            }
            for r in 0..m {
                if r != col {
                    let f = a[r * w + col];
                    if f != 0.0 {
                        for c in 0..w {
                            a[r * w + c] -= f * a[col * w + c];
                        }
                    }
                }
            }
        }
        for r in 0..m {
            self.binv[r * m..(r + 1) * m].copy_from_slice(&a[r * w + m..(r + 1) * w]);
        }
        for i in 0..m {
            let mut s = 0.0;
            for r in 0..m {
                s += self.binv[i * m + r] * self.b[r];
            }
            self.xb[i] = if s < 0.0 && s > -1e-9 { 0.0 } else { s };
        }
        Ok(())
    }

    fn optimize(&mut self, cost: impl Fn(usize) -> f64, allow_artificial: bool) -> Result<(), LpError> {
        let total = self.ncols() + if allow_artificial { self.m } else { 0 };
        let limit = 50 * (total + self.m) + 10_000;
        let mut bland = false;
        let mut degenerate = 0usize;
        for _ in 0..limit {
            let y = self.btran(&cost);
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..total {
                if self.in_basis[j] {
                    continue;
                }
                let d = self.reduced_cost(j, cost(j), &y);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Ok(());
            };
            let u = self.ftran(q);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if u[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / u[i];
                    let better = match leave {
                        None => true,
                        Some((r, best_ratio)) => {
                            if ratio < best_ratio - 1e-12 {
                                true
                            } else if ratio <= best_ratio + 1e-12 {
                                if bland {
                                    self.basis[i] < self.basis[r]
                                } else {
                                    u[i] > u[r]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio < 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.xb[r] = self.xb[r].max(0.0);
            self.pivot(r, q, &u);
        }
        Err(LpError::IterationLimit)
    }

    /// Pivots basic artificials at level zero out of the basis where a real
    /// column can replace them.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.ncols() {
                if self.in_basis[j] {
                    continue;
                }
                let mut alpha = 0.0;
                self.for_column(j, |row, a| alpha += self.binv[r * m + row] * a);
                if alpha.abs() > 1e-7 && best.is_none_or(|(_, b)| alpha.abs() > b) {
                    best = Some((j, alpha.abs()));
                }
            }
            if let Some((j, _)) = best {
                let u = self.ftran(j);
                self.pivot(r, j, &u);
            }
        }
    }

    /// Dual simplex pivots until the basic solution is nonnegative.
    fn restore_feasibility(&mut self, cost: &impl Fn(usize) -> f64) -> Result<(), LpError> {
        let m = self.m;
        let n = self.ncols();
        for _ in 0..10 * (n + m) + 100 {
            let Some(r) = (0..m)
                .filter(|&i| self.xb[i] < -1e-10)
                .min_by(|&a, &b| self.xb[a].total_cmp(&self.xb[b]))
            else {
                return Ok(());
            };
            let y = self.btran(cost);
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.in_basis[j] {
                    continue;
                }
                let mut alpha = 0.0;
                self.for_column(j, |row, a| alpha += self.binv[r * m + row] * a);
                if alpha < -PIVOT_TOL {
                    let ratio = self.reduced_cost(j, cost(j), &y).max(0.0) / -alpha;
                    if entering.is_none_or(|(_, best)| ratio < best) {
                        entering = Some((j, ratio));
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Err(LpError::Infeasible(-self.xb[r]));
            };
            let u = self.ftran(q);
            self.pivot(r, q, &u);
        }
        Err(LpError::IterationLimit)
    }

    fn run(mut self) -> Result<LpSolution, LpError> {
        let n = self.ncols();
        self.optimize(|j| if j >= n { 1.0 } else { 0.0 }, true)?;
        let residual: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&j, _)| j >= n)
            .map(|(_, &x)| x)
            .sum();
        let scale = 1.0 + self.b.iter().sum::<f64>();
        if residual > 1e-7 * scale {
            return Err(LpError::Infeasible(residual));
        }
        self.drive_out_artificials();
        let lp = self.lp;
        let cost = |j: usize| if j >= n { 0.0 } else { lp.columns[j].cost };
        self.optimize(cost, false)?;
        self.b = self.lp.rhs.iter().zip(&self.sign).map(|(r, s)| r * s).collect();
        self.refactor()?;
        self.restore_feasibility(&cost)?;
        self.refactor()?;
        let mut x = vec![0.0; n];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = self.xb[i].max(0.0);
            }
        }
        let y = self.btran(&cost);
        let duals = y.iter().zip(&self.sign).map(|(y, s)| y * s).collect();
        let objective = x.iter().zip(&lp.columns).map(|(x, c)| x * c.cost).sum();
        Ok(LpSolution { x, duals, objective })
    }
}
