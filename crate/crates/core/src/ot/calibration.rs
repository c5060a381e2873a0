//! Measures the constant linking a truncation level `lambda_t` of the ground
//! cost to the teleport penalty `lambda_u` under which truncated transport and
//! TV-unbalanced transport agree.

use alloc::format;
use alloc::vec::Vec;

use super::{exact_emd, truncate_cost, tv_unbalanced_emd, CostMatrix};
use crate::generators::{random_distribution, random_geometric_graph, rng};
use crate::geodesic::all_pairs;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationConfig {
    /// Nodes per random instance.
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Truncation levels `lambda_t`, in units of the ground cost.
    pub lambda_grid: Vec<f64>,
    /// Connection radius of the random geometric graphs.
    pub radius: f64,
    /// Coarse ratio search range `[lo, hi]`, sampled geometrically.
    pub ratio_range: (f64, f64),
    pub coarse_points: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            n: 15,
            trials: 50,
            seed: 0,
            lambda_grid: alloc::vec![1.0, 2.0, 3.0],
            radius: 0.4,
            ratio_range: (0.25, 4.0),
            coarse_points: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioProbe {
    pub ratio: f64,
    pub mean_abs: f64,
    pub mean_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaRow {
    pub lambda_t: f64,
    pub mean_truncated: f64,
    pub mean_unbalanced: f64,
    pub mean_teleported: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationReport {
    pub config: CalibrationConfig,
    /// Best-fit `lambda_t / lambda_u`.
    pub best_ratio: f64,
    /// Mean absolute cost discrepancy at the best ratio.
    pub residual_abs: f64,
    /// Mean relative cost discrepancy at the best ratio.
    pub residual_rel: f64,
    pub coarse: Vec<RatioProbe>,
    pub per_lambda: Vec<LambdaRow>,
}

struct Instance {
    cost: CostMatrix,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

fn instances(cfg: &CalibrationConfig) -> Result<Vec<Instance>> {
    let mut r = rng(cfg.seed);
    (0..cfg.trials)
        .map(|_| {
            let g = random_geometric_graph(cfg.n, cfg.radius, false, &mut r)?;
            let cost = CostMatrix::from_geodesic(all_pairs(&g))?;
            let support = 1 + (cfg.n / 3);
            let mu = random_distribution(cfg.n, support, &mut r);
            let nu = random_distribution(cfg.n, support, &mut r);
            Ok(Instance { cost, mu, nu })
        })
        .collect()
}

/// Exact truncated costs, one vector per grid level.
fn truncated_costs(cfg: &CalibrationConfig, inst: &[Instance]) -> Result<Vec<Vec<f64>>> {
    cfg.lambda_grid
        .iter()
        .map(|&lt| {
            inst.iter().map(|x| Ok(exact_emd(&truncate_cost(&x.cost, lt)?, &x.mu, &x.nu)?.cost)).collect()
        })
        .collect()
}

fn probe(cfg: &CalibrationConfig, inst: &[Instance], truncated: &[Vec<f64>], ratio: f64) -> Result<RatioProbe> {
    let mut abs = 0.0;
    let mut rel = 0.0;
    let mut count = 0.0;
    for (k, &lt) in cfg.lambda_grid.iter().enumerate() {
        let lu = lt / ratio;
        for (t, x) in inst.iter().enumerate() {
            let u = tv_unbalanced_emd(&x.cost, &x.mu, &x.nu, lu)?.cost;
            let w = truncated[k][t];
            let d = (u - w).abs();
            abs += d;
            rel += if w > 0.0 { d / w } else { d };
            count += 1.0;
        }
    }
    Ok(RatioProbe { ratio, mean_abs: abs / count, mean_rel: rel / count })
}

/// Sweeps `lambda_t / lambda_u` over a geometric grid, then refines the best
/// bracket by golden-section search on the mean absolute discrepancy.
pub fn lemma1_calibration(cfg: &CalibrationConfig) -> Result<CalibrationReport> {
    let (lo, hi) = cfg.ratio_range;
    if cfg.trials == 0 || cfg.lambda_grid.is_empty() || cfg.coarse_points < 3 || !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidParameter("calibration needs trials, a lambda grid and a ratio range".into()));
    }
    if let Some(l) = cfg.lambda_grid.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter(format!("truncation levels must be positive, got {l}")));
    }
    let inst = instances(cfg)?;
    let truncated = truncated_costs(cfg, &inst)?;

    let (llo, lhi) = (crate::math::ln(lo), crate::math::ln(hi));
    let step = (lhi - llo) / (cfg.coarse_points - 1) as f64;
    let coarse: Vec<RatioProbe> = (0..cfg.coarse_points)
        .map(|i| probe(cfg, &inst, &truncated, crate::math::exp(llo + step * i as f64)))
        .collect::<Result<_>>()?;
    let best = (0..coarse.len()).min_by(|&a, &b| coarse[a].mean_abs.total_cmp(&coarse[b].mean_abs)).unwrap();

    let mut a = llo + step * best.saturating_sub(1) as f64;
    let mut b = llo + step * (best + 1).min(coarse.len() - 1) as f64;
    let inv_phi = (crate::math::sqrt(5.0) - 1.0) / 2.0;
    let eval = |x: f64| probe(cfg, &inst, &truncated, crate::math::exp(x));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > 1e-12 {
        if fc.mean_abs <= fd.mean_abs {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let mut fit = if fc.mean_abs <= fd.mean_abs { fc } else { fd };
    if coarse[best].mean_abs < fit.mean_abs {
        fit = coarse[best].clone();
    }

    let per_lambda = cfg
        .lambda_grid
        .iter()
        .enumerate()
        .map(|(k, &lt)| {
            let lu = lt / fit.ratio;
            let mut unb = 0.0;
            let mut tele = 0.0;
            for x in &inst {
                let r = tv_unbalanced_emd(&x.cost, &x.mu, &x.nu, lu)?;
                unb += r.cost;
                tele += r.teleported_mass();
            }
            let t = inst.len() as f64;
            Ok(LambdaRow {
                lambda_t: lt,
                mean_truncated: truncated[k].iter().sum::<f64>() / t,
                mean_unbalanced: unb / t,
                mean_teleported: tele / t,
            })
        })
        .collect::<Result<_>>()?;

    Ok(CalibrationReport {
        config: cfg.clone(),
        best_ratio: fit.ratio,
        residual_abs: fit.mean_abs,
        residual_rel: fit.mean_rel,
        coarse,
        per_lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_unit_ratio_on_small_run() {
        let cfg = CalibrationConfig { trials: 5, n: 8, ..CalibrationConfig::default() };
        let r = lemma1_calibration(&cfg).unwrap();
        assert!((r.best_ratio - 1.0).abs() < 1e-6, "{}", r.best_ratio);
        assert!(r.residual_rel < 1e-9);
    }

    #[test]
    fn degenerate_levels_match_balanced() {
        // Levels beyond the diameter: both sides collapse to the balanced cost.
        let cfg = CalibrationConfig { trials: 3, n: 8, lambda_grid: alloc::vec![100.0], ..CalibrationConfig::default() };
        let inst = instances(&cfg).unwrap();
        for x in &inst {
            let e = exact_emd(&x.cost, &x.mu, &x.nu).unwrap().cost;
            let t = exact_emd(&truncate_cost(&x.cost, 100.0).unwrap(), &x.mu, &x.nu).unwrap().cost;
            let u = tv_unbalanced_emd(&x.cost, &x.mu, &x.nu, 100.0).unwrap().cost;
            assert!((e - t).abs() < 1e-12 && (e - u).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty_grid() {
        let cfg = CalibrationConfig { lambda_grid: Vec::new(), ..CalibrationConfig::default() };
        assert!(lemma1_calibration(&cfg).is_err());
    }
}
