//! Exact and entropic optimal transport on small instances.
//!
//! These solvers are reference oracles for the embedding: exact transport
//! under a (possibly truncated) ground cost, transport with mass
//! creation/destruction priced by total variation, and log-domain Sinkhorn.

mod calibration;
mod lp;
mod network_simplex;
mod sinkhorn;
mod unbalanced;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geodesic::GeodesicTable;
use crate::{Error, Result};

pub use calibration::{lemma1_calibration, CalibrationConfig, CalibrationReport, LambdaRow, RatioProbe};
pub use sinkhorn::{sinkhorn, SinkhornOptions};
pub use unbalanced::{tv_unbalanced_emd, tv_unbalanced_emd_lp, UNBALANCED_LIMIT};

/// Largest instance accepted by [`exact_emd`].
pub const EXACT_LIMIT: usize = 2000;
/// Largest instance for the exhaustive triangle-inequality check.
pub const METRIC_CHECK_LIMIT: usize = 200;
/// Largest instance accepted by the dense LP route.
pub const LP_LIMIT: usize = 60;
/// Allowed difference between the total masses of a balanced problem.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Square ground-cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    values: Vec<f64>,
    is_metric: bool,
    truncation: Option<f64>,
}

impl CostMatrix {
    /// Validates a row-major `n x n` cost: finite, nonnegative, zero
    /// diagonal, symmetric.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        if n == 0 {
            return Err(Error::InvalidCost("empty cost matrix".into()));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidCost(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidCost(format!("entry ({i}, {j}) = {v}")));
                }
                let w = values[j * n + i];
                if (v - w).abs() > 1e-12 * v.max(w).max(1.0) {
                    return Err(Error::InvalidCost(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, values, is_metric: false, truncation: None })
    }

    /// Shortest-path cost from an all-pairs geodesic table; metric by construction.
    pub fn from_geodesic(table: GeodesicTable) -> Result<Self> {
        let n = table.node_count();
        let values = table.into_matrix().ok_or_else(|| Error::InvalidCost("geodesic table is not all-pairs".into()))?;
        let mut c = Self::new(n, values)?;
        c.is_metric = true;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_metric(&self) -> bool {
        self.is_metric
    }

    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    /// Checks the triangle inequality on every triple and records the result.
    pub fn verify_metric(&mut self) -> Result<bool> {
        if self.n > METRIC_CHECK_LIMIT {
            return Err(Error::InstanceTooLarge { n: self.n, limit: METRIC_CHECK_LIMIT });
        }
        let tol = 1e-12 * self.max().max(1.0);
        let n = self.n;
        let ok = (0..n).all(|i| {
            (0..n).all(|j| (0..n).all(|k| self.get(i, k) <= self.get(i, j) + self.get(j, k) + tol))
        });
        self.is_metric = ok;
        Ok(ok)
    }
}

/// Entrywise `min(lambda, d)`.
pub fn truncate_cost(cost: &CostMatrix, lambda: f64) -> Result<CostMatrix> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("truncation level must be positive, got {lambda}")));
    }
    Ok(CostMatrix {
        n: cost.n,
        values: cost.values.iter().map(|&v| v.min(lambda)).collect(),
        is_metric: cost.is_metric,
        truncation: Some(cost.truncation.map_or(lambda, |t| t.min(lambda))),
    })
}

/// Outcome of a transport solve. The plan is `n x n` row-major, rows indexed
/// by the source distribution.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransportResult {
    pub cost: f64,
    pub n: usize,
    pub plan: Vec<f64>,
    /// Mass destroyed at each source node (unbalanced problems).
    pub destroyed: Vec<f64>,
    /// Mass created at each target node (unbalanced problems).
    pub created: Vec<f64>,
    pub destroyed_mass: f64,
    pub created_mass: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|primal - dual|` where the solver has a dual certificate.
    pub dual_gap: Option<f64>,
}

impl TransportResult {
    pub(crate) fn balanced(n: usize, plan: Vec<f64>, cost: f64, iterations: usize, dual_gap: Option<f64>) -> Self {
        Self {
            cost,
            n,
            plan,
            destroyed: vec![0.0; n],
            created: vec![0.0; n],
            destroyed_mass: 0.0,
            created_mass: 0.0,
            iterations,
            converged: true,
            dual_gap,
        }
    }

    pub fn plan_entry(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for row in self.plan.chunks(self.n) {
            for (acc, v) in s.iter_mut().zip(row) {
                *acc += v;
            }
        }
        s
    }

    /// Largest violation of `rows + destroyed = mu` and `columns + created = nu`.
    pub fn marginal_violation(&self, mu: &[f64], nu: &[f64]) -> f64 {
        let r = self.row_sums();
        let c = self.column_sums();
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            worst = worst.max((r[i] + self.destroyed[i] - mu[i]).abs());
            worst = worst.max((c[i] + self.created[i] - nu[i]).abs());
        }
        worst
    }

    /// Total mass teleported instead of transported.
    pub fn teleported_mass(&self) -> f64 {
        self.destroyed_mass.max(self.created_mass)
    }
}

pub(crate) fn check_distribution(cost: &CostMatrix, x: &[f64], name: &'static str) -> Result<f64> {
    if x.len() != cost.n {
        return Err(Error::DimensionMismatch { expected: cost.n, found: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(name));
    }
    if let Some(i) = x.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeEntry { row: i, col: 0, value: x[i] });
    }
    Ok(x.iter().sum())
}

/// Nodes with positive mass.
pub(crate) fn support(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] > 0.0).collect()
}

fn balanced_inputs(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> Result<(f64, f64)> {
    let sm = check_distribution(cost, mu, "mu")?;
    let sn = check_distribution(cost, nu, "nu")?;
    if (sm - sn).abs() > MASS_TOLERANCE {
        return Err(Error::MassMismatch { mu: sm, nu: sn });
    }
    Ok((sm, sn))
}

type Reduced = (Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>);

/// Restricts to the supports and rescales `nu` to the exact mass of `mu`.
fn reduce(mu: &[f64], nu: &[f64], sm: f64, sn: f64) -> Reduced {
    let rows = support(mu);
    let cols = support(nu);
    let a: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let scale = sm / sn;
    let b: Vec<f64> = cols.iter().map(|&j| nu[j] * scale).collect();
    (rows, cols, a, b)
}

fn expand(n: usize, rows: &[usize], cols: &[usize], flow: &[f64]) -> Vec<f64> {
    let mut plan = vec![0.0; n * n];
    let q = cols.len();
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            plan[i * n + j] = flow[r * q + c];
        }
    }
    plan
}

/// Balanced optimal transport by network simplex; the dense LP takes over on
/// small instances if the simplex fails.
pub fn exact_emd(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> Result<TransportResult> {
    if cost.n > EXACT_LIMIT {
        return Err(Error::InstanceTooLarge { n: cost.n, limit: EXACT_LIMIT });
    }
    let (sm, sn) = balanced_inputs(cost, mu, nu)?;
    let n = cost.n;
    if sm == 0.0 {
        return Ok(TransportResult::balanced(n, vec![0.0; n * n], 0.0, 0, Some(0.0)));
    }
    let (rows, cols, a, b) = reduce(mu, nu, sm, sn);
    let c = |r: usize, k: usize| cost.get(rows[r], cols[k]);
    match network_simplex::solve(&a, &b, &c, cost.max()) {
        Ok(sol) => {
            let gap = (sol.cost - sol.dual).abs();
            Ok(TransportResult::balanced(n, expand(n, &rows, &cols, &sol.flow), sol.cost, sol.iterations, Some(gap)))
        }
        Err(_) if n <= LP_LIMIT => exact_emd_lp(cost, mu, nu),
        Err(e) => Err(e),
    }
}

/// Balanced optimal transport through the dense tableau simplex. Independent
/// of [`exact_emd`]'s main route and limited to small instances.
pub fn exact_emd_lp(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> Result<TransportResult> {
    if cost.n > LP_LIMIT {
        return Err(Error::InstanceTooLarge { n: cost.n, limit: LP_LIMIT });
    }
    let (sm, sn) = balanced_inputs(cost, mu, nu)?;
    let n = cost.n;
    if sm == 0.0 {
        return Ok(TransportResult::balanced(n, vec![0.0; n * n], 0.0, 0, None));
    }
    let (rows, cols, a, b) = reduce(mu, nu, sm, sn);
    let sol = lp::transport(&a, &b, &|r: usize, k: usize| cost.get(rows[r], cols[k]))?;
    Ok(TransportResult::balanced(n, expand(n, &rows, &cols, &sol.x), sol.objective, sol.iterations, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_cost() -> CostMatrix {
        CostMatrix::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn diracs_cost_is_distance() {
        let c = path_cost();
        let r = exact_emd(&c, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.cost, 2.0);
        assert_eq!(r.plan_entry(0, 2), 1.0);
        assert_eq!(r.plan.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn path_half_half() {
        let c = path_cost();
        let r = exact_emd(&c, &[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!((r.cost - 1.5).abs() < 1e-12);
        let l = exact_emd_lp(&c, &[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!((l.cost - 1.5).abs() < 1e-12);
    }

    #[test]
    fn identical_is_zero() {
        let c = path_cost();
        let mu = [0.2, 0.3, 0.5];
        assert!(exact_emd(&c, &mu, &mu).unwrap().cost.abs() < 1e-15);
    }

    #[test]
    fn mass_mismatch() {
        let c = path_cost();
        assert!(matches!(exact_emd(&c, &[1.0, 0.0, 0.0], &[0.0, 0.5, 0.0]), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn too_large() {
        let n = EXACT_LIMIT + 1;
        let c = CostMatrix { n, values: Vec::new(), is_metric: false, truncation: None };
        assert_eq!(
            exact_emd(&c, &[], &[]).unwrap_err(),
            Error::InstanceTooLarge { n, limit: EXACT_LIMIT }
        );
    }

    #[test]
    fn invalid_costs() {
        assert!(matches!(CostMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]), Err(Error::InvalidCost(_))));
        assert!(matches!(CostMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]), Err(Error::InvalidCost(_))));
        assert!(matches!(CostMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]), Err(Error::InvalidCost(_))));
    }

    #[test]
    fn truncation() {
        let c = path_cost();
        assert_eq!(truncate_cost(&c, 5.0).unwrap().values(), c.values());
        let unit = CostMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(truncate_cost(&unit, 0.5).unwrap().values(), &[0.0, 0.5, 0.5, 0.0]);
        assert!(truncate_cost(&c, 0.0).is_err());
    }

    #[test]
    fn metric_check() {
        let mut c = path_cost();
        assert!(c.verify_metric().unwrap());
        let mut bad = CostMatrix::new(3, vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]).unwrap();
        assert!(!bad.verify_metric().unwrap());
    }
}
