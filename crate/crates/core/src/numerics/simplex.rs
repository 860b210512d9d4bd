//! Dense two-phase simplex for `max c.x  s.t.  A x = b, x >= 0`.
//!
//! Entering and leaving variables follow Bland's rule, so the method
//! terminates on degenerate problems (the parity constraints here are highly
//! degenerate and partly redundant).

use serde::Serialize;

use crate::error::{PomError, Result};

/// Smallest pivot magnitude accepted.
pub const PIVOT_TOL: f64 = 1e-11;

/// Reduced costs at or below this count as non-improving.
const OPTIMALITY_TOL: f64 = 1e-11;

/// Phase-one residual above this declares the problem infeasible.
const FEASIBILITY_TOL: f64 = 1e-9;

/// An equality-constrained LP over nonnegative variables.
#[derive(Clone, Debug)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, constraints: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        if constraints.len() != rhs.len() {
            return Err(PomError::DimensionMismatch(format!(
                "{} constraint rows but {} right-hand sides",
                constraints.len(),
                rhs.len()
            )));
        }
        for row in &constraints {
            if row.len() != objective.len() {
                return Err(PomError::LpShape {
                    expected: objective.len(),
                    got: row.len(),
                });
            }
        }
        let all_finite = objective.iter().chain(rhs.iter()).all(|x| x.is_finite())
            && constraints.iter().flatten().all(|x| x.is_finite());
        if !all_finite {
            return Err(PomError::NonFinite("LP coefficients"));
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of `A x = b` or `x >= 0`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .constraints
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        let neg = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        eq.max(neg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when `status` is optimal.
    pub value: f64,
    pub x: Vec<f64>,
}

struct Tableau {
    /// Row-major `(rows) x (cols + 1)`; last column is the right-hand side.
    cells: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Reduced costs for the current phase objective (length `cols`) and the
    /// negated objective value in the final slot.
    reduced: Vec<f64>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.cells[row * w + col];
        for v in &mut self.cells[row * w..(row + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.cells[row * w..(row + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let f = self.cells[r * w + col];
            if f == 0.0 {
                continue;
            }
            for (v, &pr) in self.cells[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.cells[r * w + col] = 0.0;
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (v, &pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let w = self.width();
        let mut reduced = vec![0.0; w];
        reduced[..costs.len()].copy_from_slice(costs);
        for r in 0..self.rows {
            let cb = costs.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb == 0.0 {
                continue;
            }
            for (v, &a) in reduced.iter_mut().zip(&self.cells[r * w..(r + 1) * w]) {
                *v -= cb * a;
            }
        }
        self.reduced = reduced;
    }

    /// Runs Bland's-rule pivots over columns `< allowed`. Returns false when
    /// the objective is unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.reduced[j] > OPTIMALITY_TOL) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, col);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                let better = match best {
                    None => true,
                    Some((br, _, bvar)) => {
                        ratio < br - 1e-14 * br.abs().max(1.0)
                            || ((ratio - br).abs() <= 1e-14 * br.abs().max(1.0)
                                && self.basis[r] < bvar)
                    }
                };
                if better {
                    best = Some((ratio, r, self.basis[r]));
                }
            }
            match best {
                Some((_, row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Maximizes the LP objective.
pub fn simplex_maximize(problem: &LpProblem) -> LpSolution {
    let n = problem.num_vars();
    let m = problem.num_constraints();
    let cols = n + m;
    let w = cols + 1;

    let mut cells = vec![0.0; m * w];
    for r in 0..m {
        let flip = if problem.rhs[r] < 0.0 { -1.0 } else { 1.0 };
        for (j, &a) in problem.constraints[r].iter().enumerate() {
            cells[r * w + j] = flip * a;
        }
        cells[r * w + n + r] = 1.0;
        cells[r * w + cols] = flip * problem.rhs[r];
    }
    let mut t = Tableau {
        cells,
        rows: m,
        cols,
        basis: (n..n + m).collect(),
        reduced: Vec::new(),
    };

    // Phase one: maximize minus the sum of artificials.
    let mut phase_one = vec![0.0; cols];
    for c in &mut phase_one[n..] {
        *c = -1.0;
    }
    t.set_objective(&phase_one);
    t.optimize(cols);
    let infeasibility: f64 = (0..m)
        .filter(|&r| t.basis[r] >= n)
        .map(|r| t.rhs(r).abs())
        .sum();
    if infeasibility > FEASIBILITY_TOL {
        return LpSolution {
            status: LpStatus::Infeasible,
            value: f64::NAN,
            x: vec![0.0; n],
        };
    }

    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are redundant and are dropped.
    let mut r = 0;
    while r < t.rows {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t.at(r, j).abs() > PIVOT_TOL) {
                t.pivot(r, j);
                r += 1;
            } else {
                t.cells.drain(r * w..(r + 1) * w);
                t.basis.remove(r);
                t.rows -= 1;
            }
        } else {
            r += 1;
        }
    }

    t.set_objective(problem.objective());
    if !t.optimize(n) {
        return LpSolution {
            status: LpStatus::Unbounded,
            value: f64::INFINITY,
            x: vec![0.0; n],
        };
    }

    let mut x = vec![0.0; n];
    for r in 0..t.rows {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    LpSolution {
        status: LpStatus::Optimal,
        value: problem.objective_at(&x),
        x,
    }
}
