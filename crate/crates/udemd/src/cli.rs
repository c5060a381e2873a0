//! Command-line interface. Every command writes its outputs, re-reads them to
//! validate, then writes a manifest sidecar; the exit code is 0 only when all
//! of that succeeded.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use udemd_core::eval::{ami, ari, cluster_from_distances, nmi, silhouette, LabelVector};
use udemd_core::generators::{gen_ring, gen_sphere_dataset, PlantedGroups, SphereConfig};
use udemd_core::metric::{euclidean_matrix, knn, knn_rows, pairwise_l1, tv_matrix};
use udemd_core::ot::{lemma1_calibration, CalibrationConfig, SinkhornOptions};
use udemd_core::{
    udemd_embed, DiffusionOperator, DistanceMatrix, MultiscaleEmbedding, NeighborList, SignalSet, Subsample,
    UdemdConfig, WalkOptions, WeightSign,
};

use crate::experiments::{bench, oracle, parse_list, ring, sphere};
use crate::io::{distances, embedding, graph, signals};
use crate::manifest::{manifest_path, RunManifest};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "udemd", version, about = "Unbalanced diffusion EMD between signals on a graph")]
pub struct Cli {
    /// Emit log lines and errors on stderr as JSON objects.
    #[arg(long, global = true)]
    pub json_logs: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed signals into the multiscale L1 space.
    Embed(EmbedArgs),
    /// Pairwise distance matrix (CSV with a label header row).
    Distmat(DistmatArgs),
    /// Exact k nearest neighbors from a distance matrix or an embedding.
    Knn(KnnArgs),
    /// Generate synthetic inputs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Exact, unbalanced and entropic transport on small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// UDEMD between diracs on a ring against the thresholded geodesic.
    RingExp(RingArgs),
    /// Nearest-neighbor retrieval on the sphere-cluster dataset.
    SphereExp(SphereArgs),
    /// Clustering scores for a distance matrix and reference labels.
    Eval(EvalArgs),
    /// Embedding wall times over a parameter grid.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Clone)]
pub struct EmbedOptions {
    /// Maximum scale K.
    #[arg(short = 'K', long = "scales", default_value_t = 4)]
    pub scales: u32,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Weight fine bands more than coarse ones.
    #[arg(long)]
    pub fine_heavy: bool,
    /// Keep this fraction of coordinates per band.
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip column normalization.
    #[arg(long)]
    pub keep_mass: bool,
    /// Holding probability of the random walk.
    #[arg(long, default_value_t = 0.0)]
    pub laziness: f64,
}

impl EmbedOptions {
    fn config(&self) -> UdemdConfig {
        UdemdConfig {
            max_scale: self.scales,
            alpha: self.alpha,
            weight_sign: if self.fine_heavy { WeightSign::FineHeavy } else { WeightSign::CoarseHeavy },
            subsample: match self.subsample {
                Some(rate) => Subsample::Uniform { rate, seed: self.seed },
                None => Subsample::None,
            },
            keep_mass: self.keep_mass,
        }
    }
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub signals: PathBuf,
    #[command(flatten)]
    pub opts: EmbedOptions,
    /// Output file; `.txt` selects the text form, anything else binary.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistmatArgs {
    /// Precomputed embedding (UDEMD distances).
    #[arg(long, conflicts_with_all = ["graph", "signals"])]
    pub embedding: Option<PathBuf>,
    #[arg(long, requires = "signals")]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub signals: Option<PathBuf>,
    /// udemd, tv or euclidean.
    #[arg(long, default_value = "udemd")]
    pub metric: String,
    #[command(flatten)]
    pub opts: EmbedOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KnnArgs {
    #[arg(long, conflicts_with = "embedding")]
    pub distances: Option<PathBuf>,
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    #[arg(short = 'k', long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Cycle graph with unit weights.
    Ring {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write one dirac signal per node.
        #[arg(long)]
        signals_out: Option<PathBuf>,
    },
    /// Gaussian clusters on the sphere with a kNN graph over all points.
    Sphere {
        #[arg(long, default_value_t = 200)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        points_per: usize,
        #[arg(long)]
        noise_spike: bool,
        #[arg(long, default_value_t = 10)]
        knn_k: usize,
        /// Plant this many groups of distributions (at most 3).
        #[arg(long)]
        planted_groups: Option<usize>,
        #[arg(long, default_value_t = 0.15)]
        planted_spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for graph.edges, signals.csv, truth.csv and labels.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// JSON instance with `mu`, `nu` and `cost` or `edges`.
    #[arg(long)]
    pub instance: PathBuf,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    Exact(InstanceArgs),
    Unbalanced {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Teleport penalty.
        #[arg(long)]
        lambda: f64,
    },
    Sinkhorn {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Fit the truncation / teleport-penalty ratio on random instances.
    Calibrate {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 15)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Truncation levels.
        #[arg(long, default_value = "1,2,3")]
        lambdas: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RingArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Scales as a list or range, e.g. `2,3,4,5` or `2..5`.
    #[arg(short = 'K', long = "scales", default_value = "2,3,4,5")]
    pub scales: String,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub laziness: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-K Spearman, plateau and onset as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SphereArgs {
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(short = 'K', long = "scales", default_value = "4")]
    pub scales: String,
    /// Comma-separated subset of udemd, tv, tv-diffused, euclidean, sinkhorn.
    #[arg(long, default_value = "udemd,tv,euclidean")]
    pub methods: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Neighbors compared per query. P@k needs `k` well below `m`; the
    /// default 10 suits a few hundred distributions.
    #[arg(short = 'k', long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub points_per: usize,
    #[arg(long, default_value_t = 10)]
    pub knn_k: usize,
    /// Leave out the uniformly placed noise spikes.
    #[arg(long)]
    pub no_spike: bool,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Sinkhorn regularization relative to each pair's largest cost.
    #[arg(long, default_value_t = 0.01)]
    pub sinkhorn_epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub distances: PathBuf,
    /// Reference labels, one per line in matrix order (optional `label` header).
    #[arg(long)]
    pub labels: PathBuf,
    /// Labels to score instead of clustering the matrix.
    #[arg(long)]
    pub predicted: Option<PathBuf>,
    /// Clusters for k-medoids; defaults to the number of reference classes.
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long = "m", default_value = "250,500,1000,2000")]
    pub ms: String,
    #[arg(long = "n", default_value = "2000")]
    pub ns: String,
    #[arg(short = 'K', long = "scales", default_value = "4")]
    pub scales: String,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub knn_k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Progress and error reporting on stderr.
#[derive(Debug, Clone, Copy)]
pub struct Log {
    json: bool,
}

impl Log {
    pub fn new(json: bool) -> Self {
        Self { json }
    }

    pub fn info(&self, event: &str, fields: serde_json::Value) {
        self.emit("info", event, fields);
    }

    pub fn error(&self, err: &Error) {
        self.emit("error", &err.to_string(), serde_json::Value::Null);
    }

    fn emit(&self, level: &str, msg: &str, fields: serde_json::Value) {
        let mut stderr = std::io::stderr().lock();
        let _ = if self.json {
            writeln!(stderr, "{}", json!({ "level": level, "message": msg, "fields": fields }))
        } else if fields.is_null() {
            writeln!(stderr, "{level}: {msg}")
        } else {
            writeln!(stderr, "{level}: {msg} {fields}")
        };
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let log = Log::new(cli.json_logs);
    match run(cli.command, log) {
        Ok(()) => 0,
        Err(e) => {
            log.error(&e);
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(command: Command, log: Log) -> Result<()> {
    match command {
        Command::Embed(a) => cmd_embed(a, log),
        Command::Distmat(a) => cmd_distmat(a, log),
        Command::Knn(a) => cmd_knn(a, log),
        Command::Gen(g) => cmd_gen(g, log),
        Command::Oracle(o) => cmd_oracle(o, log),
        Command::RingExp(a) => cmd_ring(a, log),
        Command::SphereExp(a) => cmd_sphere(a, log),
        Command::Eval(a) => cmd_eval(a, log),
        Command::Bench(a) => cmd_bench(a, log),
    }
}

fn finish(manifest: &mut RunManifest, outputs: &[&Path], log: Log) -> Result<()> {
    for out in outputs {
        manifest.add_output(out)?;
    }
    let sidecar = match outputs.first() {
        Some(p) => manifest.write_for(p)?,
        None => return Ok(()),
    };
    log.info("done", json!({ "command": manifest.command, "manifest": sidecar.display().to_string() }));
    Ok(())
}

fn load_inputs(
    graph_path: &Path,
    signals_path: &Path,
    keep_mass: bool,
    manifest: &mut RunManifest,
) -> Result<(udemd_core::Graph, SignalSet)> {
    let (g, report) = manifest.phase("load_graph", || graph::load_edge_list(graph_path))?;
    manifest.add_input(graph_path)?;
    if !report.self_loops.is_empty() {
        manifest.parameters["self_loops"] = json!(report.self_loops);
    }
    let s = manifest.phase("load_signals", || signals::load_signals(signals_path, Some(g.node_count())))?;
    manifest.add_input(signals_path)?;
    let s = if keep_mass { s } else { manifest.phase("normalize", || s.normalize_columns())? };
    Ok((g, s))
}

fn embed_from(g: &udemd_core::Graph, s: &SignalSet, opts: &EmbedOptions, manifest: &mut RunManifest) -> Result<MultiscaleEmbedding> {
    let cfg = opts.config();
    let op = manifest.phase("build_walk", || DiffusionOperator::build(g, WalkOptions::lazy(opts.laziness)))?;
    Ok(manifest.phase("embed", || udemd_embed(&op, s, &cfg))?)
}

fn embed_params(opts: &EmbedOptions) -> serde_json::Value {
    json!({
        "udemd": opts.config(),
        "laziness": opts.laziness,
    })
}

fn cmd_embed(a: EmbedArgs, log: Log) -> Result<()> {
    let mut manifest = RunManifest::new("embed", embed_params(&a.opts), Some(a.opts.seed));
    let (g, s) = load_inputs(&a.graph, &a.signals, a.opts.keep_mass, &mut manifest)?;
    let e = embed_from(&g, &s, &a.opts, &mut manifest)?;
    manifest.phase("write", || embedding::save_embedding(&e, &a.out))?;
    let back = embedding::load_embedding(&a.out)?;
    if back != e {
        return Err(Error::Validation(format!("{} does not read back identically", a.out.display())));
    }
    log.info("embedded", json!({ "signals": e.signals(), "dim": e.dim(), "bands": e.band_count() }));
    finish(&mut manifest, &[&a.out], log)
}

fn labelled(dm: DistanceMatrix, labels: Option<&[String]>) -> Result<DistanceMatrix> {
    Ok(dm.with_labels(labels.map(<[String]>::to_vec))?)
}

fn cmd_distmat(a: DistmatArgs, log: Log) -> Result<()> {
    let mut manifest = RunManifest::new(
        "distmat",
        json!({ "metric": a.metric, "embedding_options": embed_params(&a.opts) }),
        Some(a.opts.seed),
    );
    let dm = match (&a.embedding, &a.graph, &a.signals) {
        (Some(path), _, _) => {
            if a.metric != "udemd" {
                return Err(Error::Usage("an embedding only yields udemd distances".into()));
            }
            let e = embedding::load_embedding(path)?;
            manifest.add_input(path)?;
            manifest.phase("distances", || pairwise_l1(e.data(), e.signals(), e.dim()))?
        }
        (None, Some(gp), Some(sp)) => {
            let (g, s) = load_inputs(gp, sp, a.opts.keep_mass, &mut manifest)?;
            let dm = match a.metric.as_str() {
                "udemd" => {
                    let e = embed_from(&g, &s, &a.opts, &mut manifest)?;
                    manifest.phase("distances", || pairwise_l1(e.data(), e.signals(), e.dim()))?
                }
                "tv" => manifest.phase("distances", || tv_matrix(&s))?,
                "euclidean" => manifest.phase("distances", || euclidean_matrix(&s))?,
                other => return Err(Error::Usage(format!("unknown metric {other:?}"))),
            };
            labelled(dm, s.labels())?
        }
        (None, None, Some(sp)) => {
            let s = signals::load_signals(sp, None)?;
            manifest.add_input(sp)?;
            let s = if a.opts.keep_mass { s } else { s.normalize_columns()? };
            let dm = match a.metric.as_str() {
                "tv" => tv_matrix(&s)?,
                "euclidean" => euclidean_matrix(&s)?,
                "udemd" => return Err(Error::Usage("udemd distances need --graph".into())),
                other => return Err(Error::Usage(format!("unknown metric {other:?}"))),
            };
            labelled(dm, s.labels())?
        }
        _ => return Err(Error::Usage("give --embedding, or --signals (with --graph for udemd)".into())),
    };
    distances::save_distances(&dm, &a.out)?;
    let back = distances::load_distances(&a.out)?;
    if back.values() != dm.values() {
        return Err(Error::Validation(format!("{} does not read back identically", a.out.display())));
    }
    finish(&mut manifest, &[&a.out], log)
}

fn write_neighbors(nl: &NeighborList, path: &Path) -> Result<()> {
    crate::io::write_with(path, |w| {
        writeln!(w, "query,rank,neighbor,distance")?;
        for q in 0..nl.len() {
            for (r, (j, d)) in nl.neighbors(q).iter().enumerate() {
                writeln!(w, "{q},{},{j},{d}", r + 1)?;
            }
        }
        Ok(())
    })
}

fn cmd_knn(a: KnnArgs, log: Log) -> Result<()> {
    let mut manifest = RunManifest::new("knn", json!({ "k": a.k }), None);
    let nl = match (&a.distances, &a.embedding) {
        (Some(p), None) => {
            let dm = distances::load_distances(p)?;
            manifest.add_input(p)?;
            manifest.phase("knn", || knn(&dm, a.k))?
        }
        (None, Some(p)) => {
            let e = embedding::load_embedding(p)?;
            manifest.add_input(p)?;
            manifest.phase("knn", || knn_rows(e.data(), e.signals(), e.dim(), a.k))?
        }
        _ => return Err(Error::Usage("give exactly one of --distances and --embedding".into())),
    };
    write_neighbors(&nl, &a.out)?;
    let lines = std::fs::read_to_string(&a.out).map_err(|e| Error::io(&a.out, e))?.lines().count();
    if lines != 1 + nl.len() * a.k {
        return Err(Error::Validation(format!("{} has {lines} lines", a.out.display())));
    }
    finish(&mut manifest, &[&a.out], log)
}

fn cmd_gen(g: GenCommand, log: Log) -> Result<()> {
    match g {
        GenCommand::Ring { n, out, signals_out } => {
            let mut manifest = RunManifest::new("gen ring", json!({ "n": n }), None);
            let ring = gen_ring(n)?;
            graph::save_edge_list(&ring, &out)?;
            let (back, _) = graph::load_edge_list(&out)?;
            if back.node_count() != n || back.edge_count() != ring.edge_count() {
                return Err(Error::Validation(format!("{} does not read back", out.display())));
            }
            let mut outputs = vec![out.as_path()];
            if let Some(sp) = &signals_out {
                let nodes: Vec<usize> = (0..n).collect();
                let s = SignalSet::diracs(n, &nodes)?;
                signals::save_signals(&s, sp)?;
                signals::load_signals(sp, Some(n))?;
                outputs.push(sp.as_path());
            }
            finish(&mut manifest, &outputs, log)
        }
        GenCommand::Sphere { m, points_per, noise_spike, knn_k, planted_groups, planted_spread, seed, out } => {
            let cfg = SphereConfig {
                points_per,
                noise_spike,
                knn_k,
                planted: planted_groups.map(|count| PlantedGroups { count, spread: planted_spread }),
                ..SphereConfig::new(m, seed)
            };
            let mut manifest = RunManifest::new(
                "gen sphere",
                json!({ "m": m, "points_per": points_per, "noise_spike": noise_spike, "knn_k": knn_k,
                        "planted_groups": planted_groups, "planted_spread": planted_spread }),
                Some(seed),
            );
            let data = manifest.phase("generate", || gen_sphere_dataset(&cfg))?;
            let gp = out.join("graph.edges");
            let sp = out.join("signals.csv");
            let tp = out.join("truth.csv");
            graph::save_edge_list(&data.graph, &gp)?;
            signals::save_signals(&data.signals, &sp)?;
            write_neighbors(&data.ground_truth, &tp)?;
            let mut outputs = vec![gp.as_path(), sp.as_path(), tp.as_path()];
            let lp = out.join("labels.csv");
            if let Some(groups) = &data.groups {
                crate::io::write_with(&lp, |w| {
                    writeln!(w, "label")?;
                    groups.iter().try_for_each(|g| writeln!(w, "{g}"))
                })?;
                outputs.push(lp.as_path());
            }
            let (g, _) = graph::load_edge_list(&gp)?;
            signals::load_signals(&sp, Some(g.node_count()))?;
            finish(&mut manifest, &outputs, log)
        }
    }
}

fn read_instance(path: &Path, manifest: &mut RunManifest) -> Result<oracle::Instance> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    manifest.add_input(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Writes `value` as JSON to `out` (with a `manifest` field naming the
/// sidecar) or to stdout.
fn emit_json(mut value: serde_json::Value, out: Option<&Path>, manifest: &mut RunManifest, log: Log) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(obj) = value.as_object_mut() {
                let name = manifest_path(path).file_name().map(|s| s.to_string_lossy().into_owned());
                obj.insert("manifest".into(), json!(name));
            }
            let text = serde_json::to_string_pretty(&value)? + "\n";
            crate::io::write_with(path, |w| w.write_all(text.as_bytes()))?;
            let back: serde_json::Value = serde_json::from_slice(&crate::io::read_all(path)?)?;
            if back != value {
                return Err(Error::Validation(format!("{} does not read back identically", path.display())));
            }
            finish(manifest, &[path], log)
        }
        None => {
            let text = serde_json::to_string_pretty(&value)?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

fn cmd_oracle(o: OracleCommand, log: Log) -> Result<()> {
    match o {
        OracleCommand::Exact(a) => {
            let mut manifest = RunManifest::new("oracle exact", json!({}), None);
            let inst = read_instance(&a.instance, &mut manifest)?;
            let r = manifest.phase("solve", || oracle::run_exact(&inst))?;
            emit_json(serde_json::to_value(r)?, a.out.as_deref(), &mut manifest, log)
        }
        OracleCommand::Unbalanced { inst: a, lambda } => {
            let mut manifest = RunManifest::new("oracle unbalanced", json!({ "lambda": lambda }), None);
            let inst = read_instance(&a.instance, &mut manifest)?;
            let r = manifest.phase("solve", || oracle::run_unbalanced(&inst, lambda))?;
            emit_json(serde_json::to_value(r)?, a.out.as_deref(), &mut manifest, log)
        }
        OracleCommand::Sinkhorn { inst: a, epsilon, max_iter, tol } => {
            let opts = SinkhornOptions { max_iter, tol, ..SinkhornOptions::new(epsilon) };
            let mut manifest =
                RunManifest::new("oracle sinkhorn", json!({ "epsilon": epsilon, "max_iter": max_iter, "tol": tol }), None);
            let inst = read_instance(&a.instance, &mut manifest)?;
            let r = manifest.phase("solve", || oracle::run_sinkhorn(&inst, &opts))?;
            emit_json(serde_json::to_value(r)?, a.out.as_deref(), &mut manifest, log)
        }
        OracleCommand::Calibrate { trials, n, seed, lambdas, out } => {
            let lambda_grid = lambdas
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad lambda {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let cfg = CalibrationConfig { n, trials, seed, lambda_grid, ..CalibrationConfig::default() };
            let mut manifest = RunManifest::new("oracle calibrate", serde_json::to_value(&cfg)?, Some(seed));
            let r = manifest.phase("calibrate", || lemma1_calibration(&cfg))?;
            log.info("calibrated", json!({ "ratio": r.best_ratio, "residual_rel": r.residual_rel }));
            emit_json(serde_json::to_value(r)?, out.as_deref(), &mut manifest, log)
        }
    }
}

fn cmd_ring(a: RingArgs, log: Log) -> Result<()> {
    let cfg = ring::RingConfig { n: a.n, scales: parse_list(&a.scales)?, alpha: a.alpha, laziness: a.laziness };
    if cfg.scales.is_empty() {
        return Err(Error::Usage("no scales given".into()));
    }
    let mut manifest = RunManifest::new("ring-exp", serde_json::to_value(&cfg)?, None);
    let rows = manifest.phase("experiment", || ring::ring_experiment(&cfg))?;
    crate::io::write_with(&a.out, |w| ring::write_csv(&rows, w))?;
    let text = std::fs::read_to_string(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let back = ring::parse_csv(&text)?;
    if back.len() != cfg.scales.len() * (cfg.n / 2 + 1) {
        return Err(Error::Validation(format!("{} has {} rows", a.out.display(), back.len())));
    }
    let summary = ring::summarize(&rows);
    for s in &summary {
        log.info("ring", serde_json::to_value(s)?);
    }
    let mut outputs = vec![a.out.as_path()];
    if let Some(p) = &a.summary {
        let text = serde_json::to_string_pretty(&summary)? + "\n";
        crate::io::write_with(p, |w| w.write_all(text.as_bytes()))?;
        outputs.push(p.as_path());
    }
    finish(&mut manifest, &outputs, log)
}

fn cmd_sphere(a: SphereArgs, log: Log) -> Result<()> {
    let methods = a.methods.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
    let cfg = sphere::SphereExpConfig {
        m: a.m,
        points_per: a.points_per,
        noise_spike: !a.no_spike,
        knn_k: a.knn_k,
        seed: a.seed,
        scales: parse_list(&a.scales)?,
        alpha: a.alpha,
        methods,
        k: a.k,
        sinkhorn_epsilon: a.sinkhorn_epsilon,
    };
    let mut manifest = RunManifest::new("sphere-exp", serde_json::to_value(&cfg)?, Some(cfg.seed));
    let report = manifest.phase("experiment", || sphere::sphere_experiment(&cfg))?;
    for r in &report.results {
        log.info("method", serde_json::to_value(r)?);
    }
    emit_json(serde_json::to_value(report)?, Some(&a.out), &mut manifest, log)
}

fn read_labels(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<String> = text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
    if lines.first().is_some_and(|h| h == "label") {
        lines.remove(0);
    }
    Ok(lines)
}

fn label_vector(raw: &[String]) -> LabelVector {
    let mut names: Vec<&String> = Vec::new();
    let ids: Vec<usize> = raw
        .iter()
        .map(|l| match names.iter().position(|n| *n == l) {
            Some(i) => i,
            None => {
                names.push(l);
                names.len() - 1
            }
        })
        .collect();
    LabelVector::new(&ids)
}

fn cmd_eval(a: EvalArgs, log: Log) -> Result<()> {
    let mut manifest = RunManifest::new("eval", json!({ "clusters": a.clusters }), None);
    let dm = distances::load_distances(&a.distances)?;
    manifest.add_input(&a.distances)?;
    let truth_raw = read_labels(&a.labels)?;
    manifest.add_input(&a.labels)?;
    if truth_raw.len() != dm.len() {
        return Err(Error::RowCountMismatch { expected: dm.len(), found: truth_raw.len() });
    }
    let truth = label_vector(&truth_raw);
    let pred = match &a.predicted {
        Some(p) => {
            let raw = read_labels(p)?;
            manifest.add_input(p)?;
            if raw.len() != dm.len() {
                return Err(Error::RowCountMismatch { expected: dm.len(), found: raw.len() });
            }
            label_vector(&raw)
        }
        None => {
            let c = a.clusters.unwrap_or(truth.classes());
            manifest.phase("cluster", || cluster_from_distances(&dm, c))?
        }
    };
    let value = json!({
        "n": dm.len(),
        "truth_classes": truth.classes(),
        "predicted_classes": pred.classes(),
        "silhouette_truth": silhouette(&dm, &truth).ok(),
        "silhouette_predicted": silhouette(&dm, &pred).ok(),
        "ari": ari(&pred, &truth)?,
        "nmi": nmi(&pred, &truth)?,
        "ami": ami(&pred, &truth)?,
        "predicted": pred.as_slice(),
    });
    emit_json(value, a.out.as_deref(), &mut manifest, log)
}

fn cmd_bench(a: BenchArgs, log: Log) -> Result<()> {
    let cfg = bench::BenchConfig {
        ms: parse_list(&a.ms)?,
        ns: parse_list(&a.ns)?,
        scales: parse_list(&a.scales)?,
        repeats: a.repeats,
        seed: a.seed,
        knn_k: a.knn_k,
        ..bench::BenchConfig::default()
    };
    let mut manifest = RunManifest::new("bench", serde_json::to_value(&cfg)?, Some(cfg.seed));
    let rows = manifest.phase("bench", || bench::run_bench(&cfg))?;
    crate::io::write_with(&a.out, |w| bench::write_csv(&rows, w))?;
    let lines = std::fs::read_to_string(&a.out).map_err(|e| Error::io(&a.out, e))?.lines().count();
    if lines != rows.len() + 1 {
        return Err(Error::Validation(format!("{} has {lines} lines", a.out.display())));
    }
    finish(&mut manifest, &[&a.out], log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn labels_compact_by_first_appearance() {
        let raw: Vec<String> = ["b", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(label_vector(&raw).as_slice(), &[0, 1, 0, 2]);
    }
}
