//! Dense two-phase simplex for `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, ties in the
//! ratio test broken by lowest basic index), so the method terminates on
//! degenerate problems. After the final basis is found the basic solution
//! is recomputed from the original data by Gaussian elimination.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-10;
const FEASIBILITY_RTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint row {row} has {found} coefficients, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{rows} constraint rows but {rhs} right-hand sides")]
    RhsLength { rows: usize, rhs: usize },
    #[error("more constraints ({rows}) than variables ({vars})")]
    TooManyRows { rows: usize, vars: usize },
    #[error("non-finite coefficient in the program")]
    NonFinite,
}

/// Equality-form linear program over nonnegative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    cost: Vec<f64>,
    eq_matrix: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>, eq_matrix: Vec<Vec<f64>>, eq_rhs: Vec<f64>) -> Result<Self, LpError> {
        let n = cost.len();
        if eq_matrix.len() != eq_rhs.len() {
            return Err(LpError::RhsLength {
                rows: eq_matrix.len(),
                rhs: eq_rhs.len(),
            });
        }
        if eq_matrix.len() > n {
            return Err(LpError::TooManyRows {
                rows: eq_matrix.len(),
                vars: n,
            });
        }
        for (i, row) in eq_matrix.iter().enumerate() {
            if row.len() != n {
                return Err(LpError::RowLength {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
        }
        let finite = cost.iter().chain(eq_rhs.iter()).chain(eq_matrix.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(LpError::NonFinite);
        }
        Ok(Self {
            cost,
            eq_matrix,
            eq_rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn eq_matrix(&self) -> &[Vec<f64>] {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    /// `max_i |(Ax − b)_i|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.eq_matrix
            .iter()
            .zip(&self.eq_rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn iteration_cap(&self) -> usize {
        50 * (self.num_vars() + self.num_rows())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iteration cap was reached before a terminal basis was found.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Final basic solution (optimal only when `status` is `Optimal`).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Simplex tableau. Columns `0..n` are structural, `n..n+p` artificial.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Reduced costs for every column.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Original constraint index of each tableau row.
    origin: Vec<usize>,
    n: usize,
    iterations: usize,
    cap: usize,
}

enum Phase {
    Done,
    Unbounded,
    Stalled,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let p = lp.num_rows();
        let mut rows = Vec::with_capacity(p);
        let mut rhs = Vec::with_capacity(p);
        for (i, (row, &b)) in lp.eq_matrix.iter().zip(&lp.eq_rhs).enumerate() {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            let mut r: Vec<f64> = row.iter().map(|a| sign * a).collect();
            r.extend((0..p).map(|k| if k == i { 1.0 } else { 0.0 }));
            rows.push(r);
            rhs.push(sign * b);
        }
        // phase-one reduced costs: minimize the sum of artificials
        let mut obj = vec![0.0; n + p];
        for r in &rows {
            for j in 0..n {
                obj[j] -= r[j];
            }
        }
        Self {
            rows,
            rhs,
            obj,
            basis: (n..n + p).collect(),
            origin: (0..p).collect(),
            n,
            iterations: 0,
            cap: lp.iteration_cap(),
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let piv = self.rows[r][col];
        self.rows[r].iter_mut().for_each(|v| *v /= piv);
        self.rhs[r] /= piv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][col];
            if f != 0.0 {
                for (v, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                self.rows[i][col] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.obj[col] = 0.0;
        }
        self.basis[r] = col;
        self.iterations += 1;
    }

    /// Runs Bland-rule pivots over columns `0..allowed` until no reduced
    /// cost is negative.
    fn run(&mut self, allowed: usize) -> Phase {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.obj[j] < -PIVOT_TOL) else {
                return Phase::Done;
            };
            if self.iterations >= self.cap {
                return Phase::Stalled;
            }
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((k, r)) => {
                        let tie = (ratio - r).abs() <= 1e-12 * (1.0 + r.abs());
                        if ratio < r && !tie || tie && self.basis[i] < self.basis[k] {
                            Some((i, ratio))
                        } else {
                            Some((k, r))
                        }
                    }
                };
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return Phase::Unbounded,
            }
        }
    }

    /// Pivots artificial variables out of the basis after phase one and
    /// drops rows that turn out to be linearly dependent.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.n {
                r += 1;
                continue;
            }
            let col = (0..self.n)
                .filter(|&j| self.rows[r][j].abs() > PIVOT_TOL)
                .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()).then(b.cmp(&a)));
            match col {
                Some(j) => {
                    self.pivot(r, j);
                    self.iterations -= 1;
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.rhs.remove(r);
                    self.basis.remove(r);
                    self.origin.remove(r);
                }
            }
        }
    }

    fn set_cost(&mut self, cost: &[f64]) {
        let width = self.obj.len();
        let mut obj = vec![0.0; width];
        obj[..self.n].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = if b < self.n { cost[b] } else { 0.0 };
            if cb != 0.0 {
                for (o, a) in obj.iter_mut().zip(&self.rows[i]) {
                    *o -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            obj[b] = 0.0;
        }
        self.obj = obj;
    }

    fn basic_solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs[i].max(0.0);
            }
        }
        x
    }
}

/// Solves `B x_B = b` for the basic columns using the original data and
/// partial pivoting. Returns `None` if the basis is numerically singular.
fn refine(lp: &LinearProgram, basis: &[usize], origin: &[usize]) -> Option<Vec<f64>> {
    let k = basis.len();
    let mut a: Vec<Vec<f64>> = origin
        .iter()
        .map(|&r| {
            let mut row: Vec<f64> = basis.iter().map(|&j| lp.eq_matrix[r][j]).collect();
            row.push(lp.eq_rhs[r]);
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for i in (col + 1)..k {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for c in col..=k {
                    a[i][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut xb = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|c| a[i][c] * xb[c]).sum();
        xb[i] = (a[i][k] - s) / a[i][i];
    }
    let mut x = vec![0.0; lp.num_vars()];
    for (&j, v) in basis.iter().zip(xb) {
        x[j] = v;
    }
    Some(x)
}

/// Two-phase simplex with Bland's rule. Deterministic for a given program.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars();
    let mut t = Tableau::new(lp);
    let finish = |status, x: Vec<f64>, iterations| {
        let objective = lp.cost.iter().zip(&x).map(|(c, x)| c * x).sum();
        LpSolution {
            status,
            x,
            objective,
            iterations,
        }
    };

    // Phase one over structural columns only; artificials can leave but
    // never re-enter.
    match t.run(n) {
        Phase::Done => {}
        Phase::Stalled => return finish(LpStatus::Stalled, t.basic_solution(), t.iterations),
        Phase::Unbounded => unreachable!("phase one is bounded below by zero"),
    }
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&b, _)| b >= n)
        .map(|(_, &v)| v.abs())
        .sum();
    let scale = 1.0 + lp.eq_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if infeasibility > FEASIBILITY_RTOL * scale {
        return finish(LpStatus::Infeasible, t.basic_solution(), t.iterations);
    }

    t.expel_artificials();
    t.set_cost(&lp.cost);
    match t.run(n) {
        Phase::Done => {}
        Phase::Unbounded => return finish(LpStatus::Unbounded, t.basic_solution(), t.iterations),
        Phase::Stalled => return finish(LpStatus::Stalled, t.basic_solution(), t.iterations),
    }

    let mut x = t.basic_solution();
    if let Some(refined) = refine(lp, &t.basis, &t.origin) {
        if refined.iter().all(|&v| v >= -1e-9) {
            let clamped: Vec<f64> = refined.into_iter().map(|v| v.max(0.0)).collect();
            if lp.residual(&clamped) <= lp.residual(&x) {
                x = clamped;
            }
        }
    }
    finish(LpStatus::Optimal, x, t.iterations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_optimum() {
        let lp = LinearProgram::new(vec![1.0, 0.0], vec![vec![1.0, 1.0]], vec![1.0]).unwrap();
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
        assert_eq!(s.x, vec![0.0, 1.0]);
    }

    #[test]
    fn unbounded_ray() {
        let lp = LinearProgram::new(vec![-1.0, 0.0], vec![vec![1.0, -1.0]], vec![0.0]).unwrap();
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_sign() {
        let lp = LinearProgram::new(vec![1.0], vec![vec![1.0]], vec![-1.0]).unwrap();
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        // second row is twice the first
        let lp = LinearProgram::new(
            vec![2.0, 1.0, 3.0],
            vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![1.0, 0.0, -1.0]],
            vec![1.0, 2.0, 0.0],
        )
        .unwrap();
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        // x1 = x3, x1 + x2 + x3 = 1 → best is x2 = 1
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(lp.residual(&s.x) < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling instance in equality form with slacks.
        let lp = LinearProgram::new(
            vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
            vec![
                vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-10, "{}", s.objective);
    }

    #[test]
    fn dimension_errors() {
        assert_eq!(
            LinearProgram::new(vec![1.0], vec![vec![1.0, 2.0]], vec![1.0]),
            Err(LpError::RowLength {
                row: 0,
                expected: 1,
                found: 2
            })
        );
        assert_eq!(
            LinearProgram::new(vec![1.0], vec![vec![1.0]], vec![]),
            Err(LpError::RhsLength { rows: 1, rhs: 0 })
        );
        assert_eq!(
            LinearProgram::new(vec![1.0], vec![vec![1.0], vec![1.0]], vec![1.0, 1.0]),
            Err(LpError::TooManyRows { rows: 2, vars: 1 })
        );
    }

    #[test]
    fn no_constraints() {
        let lp = LinearProgram::new(vec![1.0, 2.0], vec![], vec![]).unwrap();
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
        let lp = LinearProgram::new(vec![-1.0], vec![], vec![]).unwrap();
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }
}
