//! Entropy-regularised transport, log-domain Sinkhorn with epsilon scaling.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_distribution, support, CostMatrix, TransportResult, MASS_TOLERANCE};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Target L1 violation of the row marginal.
    pub tol: f64,
    /// Anneal epsilon geometrically from the largest cost down to the target.
    pub epsilon_scaling: bool,
}

impl SinkhornOptions {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, max_iter: 10_000, tol: 1e-9, epsilon_scaling: true }
    }
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self::new(1e-2)
    }
}

struct State<'a> {
    c: Vec<f64>,
    la: Vec<f64>,
    lb: Vec<f64>,
    a: &'a [f64],
    f: Vec<f64>,
    g: Vec<f64>,
}

impl State<'_> {
    fn q(&self) -> usize {
        self.g.len()
    }

    fn update(&mut self, eps: f64) {
        let q = self.q();
        for i in 0..self.f.len() {
            let row = &self.c[i * q..(i + 1) * q];
            let g = &self.g;
            self.f[i] = eps * self.la[i] - eps * math::log_sum_exp((0..q).map(|j| (g[j] - row[j]) / eps));
        }
        for j in 0..q {
            let f = &self.f;
            let c = &self.c;
            self.g[j] = eps * self.lb[j] - eps * math::log_sum_exp((0..f.len()).map(|i| (f[i] - c[i * q + j]) / eps));
        }
    }

    fn plan_entry(&self, i: usize, j: usize, eps: f64) -> f64 {
        math::exp((self.f[i] + self.g[j] - self.c[i * self.q() + j]) / eps)
    }

    /// L1 violation of the row marginal; columns are exact after each update.
    fn violation(&self, eps: f64) -> f64 {
        (0..self.f.len())
            .map(|i| ((0..self.q()).map(|j| self.plan_entry(i, j, eps)).sum::<f64>() - self.a[i]).abs())
            .sum()
    }
}

/// Sinkhorn iterations for `min <C, pi> - eps H(pi)`. Reports `<C, pi>`.
/// Running out of iterations is not an error: the last iterate comes back
/// with `converged = false`.
pub fn sinkhorn(cost: &CostMatrix, mu: &[f64], nu: &[f64], opts: &SinkhornOptions) -> Result<TransportResult> {
    if !(opts.epsilon > 0.0) || !opts.epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let sm = check_distribution(cost, mu, "mu")?;
    let sn = check_distribution(cost, nu, "nu")?;
    if (sm - sn).abs() > MASS_TOLERANCE {
        return Err(Error::MassMismatch { mu: sm, nu: sn });
    }
    let n = cost.len();
    if sm == 0.0 {
        return Ok(TransportResult::balanced(n, vec![0.0; n * n], 0.0, 0, None));
    }
    let rows = support(mu);
    let cols = support(nu);
    let a: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let scale = sm / sn;
    let b: Vec<f64> = cols.iter().map(|&j| nu[j] * scale).collect();
    let q = cols.len();
    let mut c = vec![0.0; rows.len() * q];
    for (r, &i) in rows.iter().enumerate() {
        for (k, &j) in cols.iter().enumerate() {
            c[r * q + k] = cost.get(i, j);
        }
    }
    let max_c = c.iter().copied().fold(0.0, f64::max);
    let mut st = State {
        la: a.iter().map(|&v| math::ln(v)).collect(),
        lb: b.iter().map(|&v| math::ln(v)).collect(),
        c,
        a: &a,
        f: vec![0.0; rows.len()],
        g: vec![0.0; q],
    };

    let target = opts.epsilon;
    let mut eps = if opts.epsilon_scaling { max_c.max(target) } else { target };
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let last_stage = eps <= target;
        let stage_tol = if last_stage { opts.tol } else { opts.tol.max(1e-3) };
        while iterations < opts.max_iter {
            st.update(eps);
            iterations += 1;
            if st.violation(eps) < stage_tol {
                converged = last_stage;
                break;
            }
        }
        if last_stage || iterations >= opts.max_iter {
            break;
        }
        eps = (eps * 0.5).max(target);
    }

    let mut plan = vec![0.0; n * n];
    let mut total = 0.0;
    for (r, &i) in rows.iter().enumerate() {
        for (k, &j) in cols.iter().enumerate() {
            let p = st.plan_entry(r, k, eps);
            plan[i * n + j] = p;
            total += p * st.c[r * q + k];
        }
    }
    let mut res = TransportResult::balanced(n, plan, total, iterations, None);
    res.converged = converged;
    Ok(res)
}
