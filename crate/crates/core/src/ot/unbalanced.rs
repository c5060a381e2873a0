//! Transport where mass may also be destroyed at a source or created at a
//! target, each unit of teleported mass paying `lambda` in total variation.
//!
//! Solved as a balanced problem with one dummy point: destroying is an arc
//! to the dummy and creating an arc from it, each priced `lambda / 2` since
//! `TV = 1/2 ||.||_1` counts the removed and the added mass once each.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_distribution, lp, network_simplex, support, CostMatrix, TransportResult, LP_LIMIT};
use crate::{Error, Result};

/// Largest instance accepted by [`tv_unbalanced_emd`].
pub const UNBALANCED_LIMIT: usize = 500;

struct Augmented {
    rows: Vec<usize>,
    cols: Vec<usize>,
    supply: Vec<f64>,
    demand: Vec<f64>,
}

/// Supports of `mu` and `nu`, each extended by the dummy point which
/// supplies `sum(nu)` and demands `sum(mu)`.
fn augment(mu: &[f64], nu: &[f64]) -> Augmented {
    let rows = support(mu);
    let cols = support(nu);
    let mut supply: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let mut demand: Vec<f64> = cols.iter().map(|&j| nu[j]).collect();
    let sm: f64 = supply.iter().sum();
    let sn: f64 = demand.iter().sum();
    supply.push(sn);
    demand.push(sm);
    Augmented { rows, cols, supply, demand }
}

fn validate(cost: &CostMatrix, mu: &[f64], nu: &[f64], lambda: f64, limit: usize) -> Result<(f64, f64)> {
    if cost.len() > limit {
        return Err(Error::InstanceTooLarge { n: cost.len(), limit });
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("teleport penalty must be nonnegative, got {lambda}")));
    }
    Ok((check_distribution(cost, mu, "mu")?, check_distribution(cost, nu, "nu")?))
}

fn assemble(cost: &CostMatrix, aug: &Augmented, flow: &[f64], lambda: f64, iterations: usize, gap: Option<f64>) -> TransportResult {
    let n = cost.len();
    let p = aug.rows.len();
    let q = aug.cols.len();
    let w = q + 1;
    let mut r = TransportResult::balanced(n, vec![0.0; n * n], 0.0, iterations, gap);
    for (a, &i) in aug.rows.iter().enumerate() {
        for (b, &j) in aug.cols.iter().enumerate() {
            r.plan[i * n + j] = flow[a * w + b];
        }
        r.destroyed[i] = flow[a * w + q];
    }
    for (b, &j) in aug.cols.iter().enumerate() {
        r.created[j] = flow[p * w + b];
    }
    r.destroyed_mass = r.destroyed.iter().sum();
    r.created_mass = r.created.iter().sum();
    let moved: f64 = r.plan.iter().zip(cost.values()).map(|(f, c)| f * c).sum();
    r.cost = moved + 0.5 * lambda * (r.destroyed_mass + r.created_mass);
    r
}

fn trivial(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> TransportResult {
    let n = cost.len();
    let mut r = TransportResult::balanced(n, vec![0.0; n * n], 0.0, 0, Some(0.0));
    r.destroyed = mu.to_vec();
    r.created = nu.to_vec();
    r.destroyed_mass = mu.iter().sum();
    r.created_mass = nu.iter().sum();
    r
}

/// `inf_s W_d(mu + s, nu) + lambda * TV(mu + s, mu)`; the masses of `mu` and
/// `nu` need not agree.
pub fn tv_unbalanced_emd(cost: &CostMatrix, mu: &[f64], nu: &[f64], lambda: f64) -> Result<TransportResult> {
    let (sm, sn) = validate(cost, mu, nu, lambda, UNBALANCED_LIMIT)?;
    if lambda == 0.0 || sm == 0.0 || sn == 0.0 {
        let mut r = trivial(cost, mu, nu);
        r.cost = 0.5 * lambda * (sm + sn);
        return Ok(r);
    }
    let aug = augment(mu, nu);
    let (p, q) = (aug.rows.len(), aug.cols.len());
    let half = 0.5 * lambda;
    let c = |a: usize, b: usize| match (a == p, b == q) {
        (false, false) => cost.get(aug.rows[a], aug.cols[b]),
        (true, true) => 0.0,
        _ => half,
    };
    let max_cost = cost.max().max(half);
    match network_simplex::solve(&aug.supply, &aug.demand, &c, max_cost) {
        Ok(sol) => {
            let gap = (sol.cost - sol.dual).abs();
            Ok(assemble(cost, &aug, &sol.flow, lambda, sol.iterations, Some(gap)))
        }
        Err(_) if cost.len() <= LP_LIMIT => tv_unbalanced_emd_lp(cost, mu, nu, lambda),
        Err(e) => Err(e),
    }
}

/// The same problem through the dense LP, for cross-checking.
pub fn tv_unbalanced_emd_lp(cost: &CostMatrix, mu: &[f64], nu: &[f64], lambda: f64) -> Result<TransportResult> {
    let (sm, sn) = validate(cost, mu, nu, lambda, LP_LIMIT)?;
    if lambda == 0.0 || sm == 0.0 || sn == 0.0 {
        let mut r = trivial(cost, mu, nu);
        r.cost = 0.5 * lambda * (sm + sn);
        r.dual_gap = None;
        return Ok(r);
    }
    let aug = augment(mu, nu);
    let (p, q) = (aug.rows.len(), aug.cols.len());
    let half = 0.5 * lambda;
    let c = |a: usize, b: usize| match (a == p, b == q) {
        (false, false) => cost.get(aug.rows[a], aug.cols[b]),
        (true, true) => 0.0,
        _ => half,
    };
    let sol = lp::transport(&aug.supply, &aug.demand, &c)?;
    Ok(assemble(cost, &aug, &sol.x, lambda, sol.iterations, None))
}
