//! Dense two-phase tableau simplex, kept deliberately independent of the
//! network simplex so the two can cross-check each other.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; last row is the objective,
    /// last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

const PIVOT_TOL: f64 = 1e-11;

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let pv = self.t[pr * w + pc];
        for c in 0..w {
            self.t[pr * w + c] /= pv;
        }
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    self.t[r * w + c] -= f * prow[c];
                }
                self.t[r * w + pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Loads the objective row as reduced costs of `cost` w.r.t. the basis.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.cols + 1;
        let obj = self.rows * w;
        for c in 0..w {
            self.t[obj + c] = if c < cost.len() { cost[c] } else { 0.0 };
        }
        for r in 0..self.rows {
            let cb = cost.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for c in 0..w {
                    self.t[obj + c] -= cb * self.t[r * w + c];
                }
            }
        }
    }

    /// Runs simplex pivots over columns `0..allowed`. Dantzig pricing, with
    /// Bland's rule after a run of degenerate pivots.
    fn optimize(&mut self, allowed: usize, max_iter: usize, iterations: &mut usize) -> Result<()> {
        let mut degenerate_run = 0;
        loop {
            let bland = degenerate_run > 50;
            let mut enter = None;
            let mut best = -1e-10;
            for c in 0..allowed {
                let rc = self.at(self.rows, c);
                if rc < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(pc) = enter else { return Ok(()) };
            let mut leave = None;
            let mut ratio = f64::INFINITY;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let q = self.rhs(r) / a;
                    let better = q < ratio - 1e-14
                        || (q <= ratio + 1e-14 && leave.is_some_and(|l: usize| self.basis[r] < self.basis[l]));
                    if better {
                        ratio = q;
                        leave = Some(r);
                    }
                }
            }
            let Some(pr) = leave else {
                return Err(Error::SolverFailure("linear program is unbounded".into()));
            };
            degenerate_run = if ratio <= 1e-14 { degenerate_run + 1 } else { 0 };
            self.pivot(pr, pc);
            *iterations += 1;
            if *iterations > max_iter {
                return Err(Error::SolverFailure("dense simplex iteration limit".into()));
            }
        }
    }
}

/// Minimises `c.x` subject to `A x = b`, `x >= 0`, with `A` given row-major
/// as `rows x cols`.
pub(crate) fn minimize(a: &[f64], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let rows = b.len();
    let n = c.len();
    assert_eq!(a.len(), rows * n);
    // Columns: structural 0..n, artificial n..n+rows.
    let cols = n + rows;
    let w = cols + 1;
    let mut t = vec![0.0; (rows + 1) * w];
    for r in 0..rows {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[r * w + j] = sign * a[r * n + j];
        }
        t[r * w + n + r] = 1.0;
        t[r * w + cols] = sign * b[r];
    }
    let mut tab = Tableau { rows, cols, t, basis: (n..n + rows).collect() };
    let max_iter = 50 * (rows + cols) + 10_000;
    let mut iterations = 0;

    let mut phase1 = vec![0.0; cols];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    tab.set_objective(&phase1);
    tab.optimize(cols, max_iter, &mut iterations)?;
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if -tab.rhs(rows) > 1e-9 * scale {
        return Err(Error::SolverFailure("linear program is infeasible".into()));
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // redundant and get dropped.
    let mut r = 0;
    while r < tab.rows {
        if tab.basis[r] >= n {
            let pc = (0..n).max_by(|&x, &y| tab.at(r, x).abs().total_cmp(&tab.at(r, y).abs()));
            match pc {
                Some(pc) if tab.at(r, pc).abs() > PIVOT_TOL => tab.pivot(r, pc),
                _ => {
                    drop_row(&mut tab, r);
                    continue;
                }
            }
        }
        r += 1;
    }

    tab.set_objective(c);
    tab.optimize(n, max_iter, &mut iterations)?;
    let mut x = vec![0.0; n];
    for r in 0..tab.rows {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r).max(0.0);
        }
    }
    let objective = x.iter().zip(c).map(|(x, c)| x * c).sum();
    Ok(LpSolution { x, objective, iterations })
}

fn drop_row(tab: &mut Tableau, r: usize) {
    let w = tab.cols + 1;
    tab.t.drain(r * w..(r + 1) * w);
    tab.basis.remove(r);
    tab.rows -= 1;
}

/// Dense transportation LP: `min sum c_ij x_ij`, rows summing to `supply`,
/// columns to `demand`.
pub(crate) fn transport<C>(supply: &[f64], demand: &[f64], cost: &C) -> Result<LpSolution>
where
    C: Fn(usize, usize) -> f64,
{
    let (p, q) = (supply.len(), demand.len());
    let n = p * q;
    let rows = p + q;
    let mut a = vec![0.0; rows * n];
    let mut c = vec![0.0; n];
    for i in 0..p {
        for j in 0..q {
            let v = i * q + j;
            a[i * n + v] = 1.0;
            a[(p + j) * n + v] = 1.0;
            c[v] = cost(i, j);
        }
    }
    let b: Vec<f64> = supply.iter().chain(demand).copied().collect();
    minimize(&a, &b, &c)
}
