//! Transport oracle runs on a single instance read from JSON.
//!
//! An instance holds `mu`, `nu` and either a dense `cost` matrix or an
//! `edges` list (`[src, dst, weight]`) whose geodesic distances become the
//! cost.

use serde::{Deserialize, Serialize};
use udemd_core::geodesic::all_pairs;
use udemd_core::ot::{exact_emd, sinkhorn, tv_unbalanced_emd, CostMatrix, SinkhornOptions, TransportResult};
use udemd_core::{Edge, Graph};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Instance {
    pub fn cost_matrix(&self) -> Result<CostMatrix> {
        match (&self.cost, &self.edges) {
            (Some(rows), None) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Validation("cost matrix must be square".into()));
                }
                Ok(CostMatrix::new(n, rows.concat())?)
            }
            (None, Some(edges)) => {
                let n = self.nodes.or(Some(self.mu.len()));
                let (g, _) = Graph::from_edges(n, edges.iter().map(|&(s, d, w)| Edge::new(s, d, w)))?;
                Ok(CostMatrix::from_geodesic(all_pairs(&g))?)
            }
            _ => Err(Error::Validation("instance needs exactly one of `cost` and `edges`".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Exact,
    Unbalanced,
    Sinkhorn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kind: OracleKind,
    pub n: usize,
    pub cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub dual_gap: Option<f64>,
    pub destroyed_mass: f64,
    pub created_mass: f64,
    pub marginal_violation: f64,
    /// Nonzero plan entries as `[source, target, mass]`.
    pub plan: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

fn report(kind: OracleKind, r: &TransportResult, inst: &Instance) -> OracleReport {
    let n = r.n;
    let plan = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let v = r.plan_entry(i, j);
            (v > 0.0).then_some((i, j, v))
        })
        .collect();
    OracleReport {
        kind,
        n,
        cost: r.cost,
        lambda: None,
        epsilon: None,
        iterations: r.iterations,
        converged: r.converged,
        dual_gap: r.dual_gap,
        destroyed_mass: r.destroyed_mass,
        created_mass: r.created_mass,
        marginal_violation: r.marginal_violation(&inst.mu, &inst.nu),
        plan,
        manifest: None,
    }
}

pub fn run_exact(inst: &Instance) -> Result<OracleReport> {
    let r = exact_emd(&inst.cost_matrix()?, &inst.mu, &inst.nu)?;
    Ok(report(OracleKind::Exact, &r, inst))
}

pub fn run_unbalanced(inst: &Instance, lambda: f64) -> Result<OracleReport> {
    let r = tv_unbalanced_emd(&inst.cost_matrix()?, &inst.mu, &inst.nu, lambda)?;
    Ok(OracleReport { lambda: Some(lambda), ..report(OracleKind::Unbalanced, &r, inst) })
}

pub fn run_sinkhorn(inst: &Instance, opts: &SinkhornOptions) -> Result<OracleReport> {
    let r = sinkhorn(&inst.cost_matrix()?, &inst.mu, &inst.nu, opts)?;
    Ok(OracleReport { epsilon: Some(opts.epsilon), ..report(OracleKind::Sinkhorn, &r, inst) })
}
