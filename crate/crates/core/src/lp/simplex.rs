//! Revised primal simplex for covering LPs with a rejection slack per row:
//!
//! ```text
//! min  sum_j c_j x_j + R sum_k r_k
//! s.t. sum_j a_kj x_j + r_k >= 1   for every row k
//!      x, r >= 0
//! ```
//!
//! The all-rejection basis is primal feasible, so no phase one is needed.
//! The basis inverse is kept dense and updated in product form, with a full
//! refactorization every [`REFACTOR_EVERY`] pivots.

use crate::error::{Error, Result};
use crate::scalar::Real;

const REFACTOR_EVERY: usize = 64;
/// Consecutive degenerate pivots before pricing switches to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSolution<T> {
    /// Value of each structural column.
    pub x: Vec<T>,
    /// Rejection value of each row.
    pub r: Vec<T>,
    /// Row duals, within `[0, R]`.
    pub duals: Vec<T>,
    pub objective: T,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Column(usize),
    Reject(usize),
    Surplus(usize),
}

struct Tableau<'a, T> {
    n_rows: usize,
    columns: &'a [(&'a [usize], T)],
    rejection_cost: T,
    basic: Vec<Var>,
    is_basic: Vec<bool>,
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
}

impl<'a, T: Real> Tableau<'a, T> {
    fn n_vars(&self) -> usize {
        self.columns.len() + 2 * self.n_rows
    }

    fn var(&self, idx: usize) -> Var {
        let nc = self.columns.len();
        if idx < nc {
            Var::Column(idx)
        } else if idx < nc + self.n_rows {
            Var::Reject(idx - nc)
        } else {
            Var::Surplus(idx - nc - self.n_rows)
        }
    }

    fn index(&self, var: Var) -> usize {
        let nc = self.columns.len();
        match var {
            Var::Column(j) => j,
            Var::Reject(k) => nc + k,
            Var::Surplus(k) => nc + self.n_rows + k,
        }
    }

    fn cost(&self, var: Var) -> T {
        match var {
            Var::Column(j) => self.columns[j].1,
            Var::Reject(_) => self.rejection_cost,
            Var::Surplus(_) => T::zero(),
        }
    }

    /// Calls `f(row, coefficient)` for every nonzero of the constraint column.
    fn for_each_entry(&self, var: Var, mut f: impl FnMut(usize, T)) {
        match var {
            Var::Column(j) => self.columns[j].0.iter().for_each(|&row| f(row, T::one())),
            Var::Reject(k) => f(k, T::one()),
            Var::Surplus(k) => f(k, -T::one()),
        }
    }

    fn duals(&self) -> Vec<T> {
        let m = self.n_rows;
        let mut y = vec![T::zero(); m];
        for (i, &var) in self.basic.iter().enumerate() {
            let cb = self.cost(var);
            if cb != T::zero() {
                for (yj, &b) in y.iter_mut().zip(&self.binv[i]) {
                    *yj = *yj + cb * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, var: Var, y: &[T]) -> T {
        let mut d = self.cost(var);
        self.for_each_entry(var, |row, a| d = d - y[row] * a);
        d
    }

    fn direction(&self, var: Var) -> Vec<T> {
        let mut d = vec![T::zero(); self.n_rows];
        self.for_each_entry(var, |row, a| {
            for (di, binv_row) in d.iter_mut().zip(&self.binv) {
                *di = *di + binv_row[row] * a;
            }
        });
        d
    }

    fn pivot(&mut self, leave_pos: usize, enter: Var, d: &[T]) {
        let m = self.n_rows;
        let step = self.xb[leave_pos] / d[leave_pos];
        for i in 0..m {
            if i != leave_pos {
                self.xb[i] = self.xb[i] - step * d[i];
                if self.xb[i] < T::zero() {
                    self.xb[i] = T::zero();
                }
            }
        }
        self.xb[leave_pos] = step;

        let inv_piv = T::one() / d[leave_pos];
        let pivot_row: Vec<T> = self.binv[leave_pos].iter().map(|&v| v * inv_piv).collect();
        for (i, row) in self.binv.iter_mut().enumerate() {
            if i == leave_pos || d[i] == T::zero() {
                continue;
            }
            for (v, &p) in row.iter_mut().zip(&pivot_row) {
                *v = *v - d[i] * p;
            }
        }
        self.binv[leave_pos] = pivot_row;

        let leaving = self.basic[leave_pos];
        let (li, ei) = (self.index(leaving), self.index(enter));
        self.is_basic[li] = false;
        self.is_basic[ei] = true;
        self.basic[leave_pos] = enter;
    }

    /// Rebuilds the basis inverse from scratch by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<()> {
        let m = self.n_rows;
        let mut a = vec![vec![T::zero(); m]; m];
        for (pos, &var) in self.basic.iter().enumerate() {
            self.for_each_entry(var, |row, v| a[row][pos] = v);
        }
        let mut inv: Vec<Vec<T>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            if a[piv][col].abs() <= T::epsilon() {
                return Err(Error::Solver("singular basis during refactorization".into()));
            }
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = T::one() / a[col][col];
            for v in a[col].iter_mut() {
                *v = *v * p;
            }
            for v in inv[col].iter_mut() {
                *v = *v * p;
            }
            for i in 0..m {
                if i != col {
                    let f = a[i][col];
                    if f != T::zero() {
                        for j in 0..m {
                            a[i][j] = a[i][j] - f * a[col][j];
                            inv[i][j] = inv[i][j] - f * inv[col][j];
                        }
                    }
                }
            }
        }
        // B x_B = 1, so x_B is the row sums of the inverse.
        self.xb = inv
            .iter()
            .map(|row| {
                let s: T = row.iter().copied().sum();
                if s < T::zero() {
                    T::zero()
                } else {
                    s
                }
            })
            .collect();
        self.binv = inv;
        Ok(())
    }
}

/// Solves the covering LP. `columns` holds `(covered rows, cost)` pairs.
pub fn solve_covering<T: Real>(
    n_rows: usize,
    columns: &[(&[usize], T)],
    rejection_cost: T,
) -> Result<CoveringSolution<T>> {
    for (j, (rows, cost)) in columns.iter().enumerate() {
        if let Some(&row) = rows.iter().find(|&&r| r >= n_rows) {
            return Err(Error::Solver(format!("column {j} covers unknown row {row}")));
        }
        if !cost.is_finite() || *cost < T::zero() {
            return Err(Error::Solver(format!("column {j} has invalid cost {cost}")));
        }
    }
    let m = n_rows;
    let mut tab = Tableau {
        n_rows,
        columns,
        rejection_cost,
        basic: (0..m).map(Var::Reject).collect(),
        is_basic: vec![false; columns.len() + 2 * m],
        binv: (0..m)
            .map(|i| (0..m).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect(),
        xb: vec![T::one(); m],
    };
    for k in 0..m {
        let idx = tab.index(Var::Reject(k));
        tab.is_basic[idx] = true;
    }

    let scale = columns
        .iter()
        .map(|c| c.1)
        .fold(rejection_cost.abs(), T::max)
        .max(T::one());
    let price_tol = T::feasibility_tol() * scale;
    let pivot_tol = T::feasibility_tol();
    let budget = 1000 + 50 * tab.n_vars();

    let mut pivots = 0;
    let mut since_refactor = 0;
    let mut degenerate = 0;
    loop {
        let y = tab.duals();
        let bland = degenerate >= DEGENERATE_STREAK;
        let mut entering: Option<(Var, T)> = None;
        for idx in 0..tab.n_vars() {
            if tab.is_basic[idx] {
                continue;
            }
            let var = tab.var(idx);
            let d = tab.reduced_cost(var, &y);
            if d < -price_tol {
                match entering {
                    None => entering = Some((var, d)),
                    Some((_, best)) if !bland && d < best => entering = Some((var, d)),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
        }
        let Some((enter, _)) = entering else {
            break;
        };
        if pivots >= budget {
            return Err(Error::Solver(format!("pivot budget of {budget} exhausted")));
        }

        let d = tab.direction(enter);
        let mut leave: Option<(usize, T)> = None;
        for (i, &di) in d.iter().enumerate() {
            if di > pivot_tol {
                let ratio = tab.xb[i] / di;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((p, best)) => {
                        let tie = (ratio - best).abs() <= pivot_tol;
                        if ratio < best - pivot_tol
                            || (tie && tab.index(tab.basic[i]) < tab.index(tab.basic[p]))
                        {
                            Some((i, ratio))
                        } else {
                            Some((p, best))
                        }
                    }
                };
            }
        }
        let Some((leave_pos, step)) = leave else {
            return Err(Error::Solver("covering LP reported unbounded".into()));
        };
        if step <= pivot_tol {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        tab.pivot(leave_pos, enter, &d);
        pivots += 1;
        since_refactor += 1;
        if since_refactor >= REFACTOR_EVERY {
            tab.refactor()?;
            since_refactor = 0;
        }
    }

    let mut x = vec![T::zero(); columns.len()];
    let mut r = vec![T::zero(); m];
    let mut objective = T::zero();
    for (pos, &var) in tab.basic.iter().enumerate() {
        let value = tab.xb[pos];
        objective = objective + tab.cost(var) * value;
        match var {
            Var::Column(j) => x[j] = value,
            Var::Reject(k) => r[k] = value,
            Var::Surplus(_) => {}
        }
    }
    let duals = tab
        .duals()
        .into_iter()
        .map(|v| v.max(T::zero()).min(rejection_cost))
        .collect();
    Ok(CoveringSolution {
        x,
        r,
        duals,
        objective,
        pivots,
    })
}
