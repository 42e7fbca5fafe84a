//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `max cᵀx  s.t.  Ax ≤ b,  x ≥ 0` for right-hand sides of any sign.
//! Intended for small problems (a few hundred rows); there is no sparse
//! machinery and no refactorization.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplexError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("pivot limit of {0} reached")]
    PivotLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Basic variable of each row.
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_Bᵀ B⁻¹ A_j`; last entry holds `-c_Bᵀ x_B`.
    reduced: Vec<f64>,
    width: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let mut reduced = costs.to_vec();
        reduced.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (r, t) in reduced.iter_mut().zip(&self.rows[i]) {
                    *r -= cb * t;
                }
            }
        }
        self.reduced = reduced;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        self.rows[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs Bland's rule until optimal; `allowed` filters entering columns.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool) -> Result<(), SimplexError> {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(SimplexError::PivotLimit(MAX_PIVOTS));
            }
            let entering = (0..self.width).find(|&j| allowed(j) && self.reduced[j] > COST_TOL);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best || (ratio == best && self.basis[i] < self.basis[k]) {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(SimplexError::Unbounded);
            };
            self.pivot(row, col);
        }
    }
}

/// Maximizes `objectiveᵀx` subject to `constraints · x ≤ rhs` and `x ≥ 0`.
pub fn maximize(
    objective: &[f64],
    constraints: &[Vec<f64>],
    rhs: &[f64],
) -> Result<LpSolution, SimplexError> {
    let n = objective.len();
    let m = constraints.len();
    if rhs.len() != m {
        return Err(SimplexError::Dimension(format!(
            "{m} constraint rows but {} right-hand sides",
            rhs.len()
        )));
    }
    if let Some(i) = constraints.iter().position(|r| r.len() != n) {
        return Err(SimplexError::Dimension(format!(
            "constraint row {i} has {} coefficients, expected {n}",
            constraints[i].len()
        )));
    }

    // Columns: originals, one slack per row, one artificial per negative row.
    let negative: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0.0).collect();
    let width = n + m + negative.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sign * constraints[i][j];
        }
        row[n + i] = sign;
        row[width] = sign * rhs[i];
        match negative.iter().position(|&k| k == i) {
            Some(a) => {
                row[n + m + a] = 1.0;
                basis.push(n + m + a);
            }
            None => basis.push(n + i),
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis,
        reduced: Vec::new(),
        width,
        pivots: 0,
    };
    let is_artificial = |j: usize| j >= n + m;

    if !negative.is_empty() {
        let phase1: Vec<f64> = (0..width).map(|j| if is_artificial(j) { -1.0 } else { 0.0 }).collect();
        t.set_objective(&phase1);
        t.optimize(|_| true)?;
        let infeasibility = t.reduced[width];
        let scale = rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if infeasibility.abs() > 1e-9 * scale {
            return Err(SimplexError::Infeasible);
        }
        // Drive degenerate artificials out of the basis where possible.
        for i in 0..m {
            if is_artificial(t.basis[i]) {
                if let Some(col) = (0..n + m).find(|&j| t.rows[i][j].abs() > PIVOT_TOL) {
                    t.pivot(i, col);
                }
            }
        }
    }

    let mut costs = objective.to_vec();
    costs.resize(width, 0.0);
    t.set_objective(&costs);
    t.optimize(|j| !is_artificial(j))?;

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i);
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective: value,
        pivots: t.pivots,
    })
}
