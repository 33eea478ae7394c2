//! Experiment drivers: turn a validated config into CSV/JSON artifacts.
//!
//! Layout under `output_dir`:
//!
//! ```text
//! manifest.json                  progress + config echo (only file with a timestamp)
//! summary.json                   per-point, per-scheme seed aggregates
//! theory_check.json              (theory_check only)
//! access_check.json              (access_check only)
//! runs/<label>/seed<seed>_<scheme>_metrics.csv
//! runs/<label>/seed<seed>_<scheme>_exchange.csv
//! runs/<label>/seed<seed>_<scheme>_proxy_dense.csv   (single_run only)
//! runs/<label>/seed<seed>_<scheme>_proxy_long.csv    (single_run only)
//! ```
//!
//! Everything except the manifest timestamp is a pure function of the
//! config, so re-running reproduces artifacts byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use areasim::analysis::{
    expected_walltimes, f_irr_bruteforce, f_irr_conventional, f_irr_structure_aware,
    max_quantile_probability, montecarlo_expected_max, montecarlo_max_tail_fraction,
    montecarlo_walltimes, xi_max, AccessError, AccessModelParams, CycleTimeModel, SyncError,
};
use areasim::engine::{
    phase_breakdown, proxy_matrix, run, sync_proxy, CostParams, EngineError, ExchangeKind,
    RunOptions, RunOutput, RunSummary,
};
use areasim::model::{
    generate_benchmark, generate_heterogeneous, HeterogeneityParams, ModelError, NetworkSpec,
};
use areasim::partition::{
    plan_round_robin, plan_structure_aware, plan_structure_aware_with_period, PartitionError,
    PartitionPlan, Scheme,
};
use areasim::report::{
    write_exchange_csv, write_matrix_dense_csv, write_matrix_long_csv, write_metrics_csv,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExchangeCost, Experiment, ExperimentConfig};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("i/o failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize artifact: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sync(#[from] SyncError),
    #[error(transparent)]
    Access(#[from] AccessError),
}

fn io_err(path: &Path, source: std::io::Error) -> RunnerError {
    RunnerError::Io {
        path: path.to_owned(),
        source,
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), RunnerError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunnerError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Mean and sample standard deviation over seeds (`sd = 0` for one seed).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

fn stat(xs: &[f64]) -> Stat {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Stat { mean, sd }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Seed aggregates of one scheme at one sweep point.
#[derive(Debug, Serialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub n_ranks: u32,
    pub threads_per_rank: u32,
    pub exchange_period: u32,
    pub n_cycles: u64,
    /// Exchange counts are structural; identical for every seed.
    pub n_global_exchanges: u64,
    pub n_local_exchanges: u64,
    pub update: Stat,
    pub deliver: Stat,
    pub collocate: Stat,
    pub sync_proxy: Stat,
    /// `alpha_per_call + beta_per_byte * bytes`, summed over exchange
    /// events. Reported, never asserted.
    pub exchange_estimate: Stat,
    /// Total proxy time over modelled milliseconds.
    pub proxy_rtf: Stat,
    pub global_bytes: Stat,
    pub local_bytes: Stat,
    pub resize_rounds: Stat,
    pub f_irregular: Stat,
    pub f_irregular_short: Stat,
    pub f_irregular_long: Stat,
}

#[derive(Debug, Serialize)]
pub struct PointSummary {
    pub label: String,
    pub params: BTreeMap<String, f64>,
    pub schemes: Vec<SchemeSummary>,
}

#[derive(Debug, Serialize)]
pub struct SummaryDoc {
    pub experiment: Experiment,
    pub seeds: Vec<u64>,
    pub threads_per_rank: u32,
    pub cost_params: CostParams,
    pub exchange_cost: ExchangeCost,
    pub points: Vec<PointSummary>,
}

/// One analytic-vs-oracle comparison row.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub quantity: String,
    pub analytic: f64,
    pub oracle: f64,
    pub relative_error: f64,
}

fn check_entry(quantity: &str, analytic: f64, oracle: f64) -> CheckEntry {
    let relative_error = if analytic == 0.0 {
        oracle.abs()
    } else {
        ((oracle - analytic) / analytic).abs()
    };
    CheckEntry {
        quantity: quantity.to_owned(),
        analytic,
        oracle,
        relative_error,
    }
}

#[derive(Debug, Serialize)]
pub struct TheoryCheckDoc {
    pub model: CycleTimeModel,
    pub mc_replicates: u64,
    pub xi_replicates: u64,
    pub tail_cycles: u64,
    pub entries: Vec<CheckEntry>,
}

#[derive(Debug, Serialize)]
pub struct AccessSeedCheck {
    pub seed: u64,
    pub entries: Vec<CheckEntry>,
}

#[derive(Debug, Serialize)]
pub struct AccessCheckDoc {
    pub params: AccessModelParams,
    pub per_seed: Vec<AccessSeedCheck>,
    pub mean: Vec<CheckEntry>,
}

#[derive(Debug, Clone, Serialize)]
struct ManifestRun {
    label: String,
    seed: u64,
    scheme: String,
    artifacts: Vec<String>,
    done: bool,
}

#[derive(Debug, Serialize)]
struct Manifest {
    /// The only timestamp in any artifact.
    created_unix_ms: u64,
    experiment: Experiment,
    status: String,
    config: ExperimentConfig,
    runs: Vec<ManifestRun>,
}

impl Manifest {
    fn new(cfg: &ExperimentConfig, runs: Vec<ManifestRun>) -> Self {
        let created_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Self {
            created_unix_ms,
            experiment: cfg.experiment,
            status: "running".to_owned(),
            config: cfg.clone(),
            runs,
        }
    }
}

fn persist_manifest(path: &Path, manifest: &Manifest) -> Result<(), RunnerError> {
    // Write-then-rename so a crash mid-write never clobbers the previous
    // resumable state.
    let tmp = path.with_extension("json.tmp");
    write_json(&tmp, manifest)?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub manifest_path: PathBuf,
    /// `summary.json`, or the check document for the two analysis-only
    /// experiments.
    pub summary_path: PathBuf,
    pub n_runs: usize,
}

/// One sweep point: which network to build and which plans to run on it.
struct Point {
    label: String,
    params: BTreeMap<String, f64>,
    n_areas: u32,
    n_ranks: u32,
    cv_area: f64,
    cv_rate: f64,
    period: Option<u32>,
    heterogeneous: bool,
    schemes: Vec<Scheme>,
}

impl Point {
    fn network(&self, cfg: &ExperimentConfig, seed: u64) -> Result<NetworkSpec, ModelError> {
        let p = cfg.network.benchmark(self.n_areas, seed);
        if self.heterogeneous {
            generate_heterogeneous(
                &p,
                &HeterogeneityParams {
                    cv_area_size: self.cv_area,
                    cv_rate: self.cv_rate,
                },
            )
        } else {
            generate_benchmark(&p)
        }
    }
}

fn params_of<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect()
}

fn plan_points(cfg: &ExperimentConfig) -> Vec<Point> {
    let base_ranks = cfg.partition.n_ranks.unwrap_or(cfg.network.n_areas);
    let base = |label: String, params: BTreeMap<String, f64>| Point {
        label,
        params,
        n_areas: cfg.network.n_areas,
        n_ranks: base_ranks,
        cv_area: cfg.heterogeneity.cv_area_size,
        cv_rate: cfg.heterogeneity.cv_rate,
        period: None,
        heterogeneous: cfg.is_heterogeneous(),
        schemes: cfg.partition.schemes.clone(),
    };
    match cfg.experiment {
        Experiment::SingleRun => vec![base("run".to_owned(), BTreeMap::new())],
        Experiment::WeakScaling => cfg
            .m_grid()
            .into_iter()
            .map(|m| {
                let mut p = base(format!("m_{m}"), params_of([("m", f64::from(m))]));
                // m is simultaneously the area and the rank count; a fixed
                // partition.n_ranks would contradict the sweep.
                p.n_areas = m;
                p.n_ranks = m;
                p
            })
            .collect(),
        Experiment::CvAreaSweep => cfg
            .cv_area_grid()
            .into_iter()
            .map(|cv| {
                let mut p = base(format!("cv_area_{cv}"), params_of([("cv_area_size", cv)]));
                p.cv_area = cv;
                // The whole sweep uses the heterogeneous generator so the
                // cv = 0 point differs only in the parameter, not in the
                // sampling streams.
                p.heterogeneous = true;
                p
            })
            .collect(),
        Experiment::CvRateSweep => cfg
            .cv_rate_grid()
            .into_iter()
            .map(|cv| {
                let mut p = base(format!("cv_rate_{cv}"), params_of([("cv_rate", cv)]));
                p.cv_rate = cv;
                p.heterogeneous = true;
                p
            })
            .collect(),
        Experiment::DSweep => cfg
            .d_grid()
            .into_iter()
            .map(|d| {
                let mut p = base(format!("d_{d}"), params_of([("d", f64::from(d))]));
                p.period = Some(d);
                p.schemes = vec![Scheme::StructureAware];
                p
            })
            .collect(),
        Experiment::TheoryCheck | Experiment::AccessCheck => Vec::new(),
    }
}

fn build_plan(
    cfg: &ExperimentConfig,
    net: &NetworkSpec,
    point: &Point,
    scheme: Scheme,
) -> Result<PartitionPlan, PartitionError> {
    let threads = cfg.partition.threads_per_rank;
    match scheme {
        Scheme::Conventional => plan_round_robin(net, point.n_ranks, threads),
        Scheme::StructureAware => {
            match point.period.or(cfg.partition.exchange_period) {
                Some(p) => plan_structure_aware_with_period(net, point.n_ranks, threads, p),
                None => plan_structure_aware(net, point.n_ranks, threads),
            }
        }
    }
}

/// Per-scheme seed accumulator.
#[derive(Default)]
struct Acc {
    update: Vec<f64>,
    deliver: Vec<f64>,
    collocate: Vec<f64>,
    sync: Vec<f64>,
    estimate: Vec<f64>,
    rtf: Vec<f64>,
    global_bytes: Vec<f64>,
    local_bytes: Vec<f64>,
    resize: Vec<f64>,
    f_all: Vec<f64>,
    f_short: Vec<f64>,
    f_long: Vec<f64>,
    first: Option<RunSummary>,
}

impl Acc {
    fn push(
        &mut self,
        output: &RunOutput,
        costs: &CostParams,
        xc: &ExchangeCost,
        t_model_ms: f64,
    ) {
        let s = &output.summary;
        let b = phase_breakdown(output, costs);
        let matrix = proxy_matrix(output, costs);
        self.update.push(b.update);
        self.deliver.push(b.deliver);
        self.collocate.push(b.collocate);
        self.sync.push(sync_proxy(&matrix, s.exchange_period));
        self.estimate.push(
            xc.alpha_per_call * output.exchanges.len() as f64
                + xc.beta_per_byte * (s.global_bytes + s.local_bytes) as f64,
        );
        self.rtf.push((b.update + b.deliver + b.collocate) / t_model_ms);
        self.global_bytes.push(s.global_bytes as f64);
        self.local_bytes.push(s.local_bytes as f64);
        self.resize.push(s.n_resize_rounds as f64);
        let irr: u64 = s.total_irregular.iter().sum();
        let del: u64 = s.total_deliveries.iter().sum();
        self.f_all.push(ratio(irr, del));
        self.f_short
            .push(ratio(s.total_irregular[0], s.total_deliveries[0]));
        self.f_long
            .push(ratio(s.total_irregular[1], s.total_deliveries[1]));
        self.first.get_or_insert(*s);
    }

    fn summarize(&self, threads_per_rank: u32) -> SchemeSummary {
        let s = self.first.expect("at least one seed ran");
        SchemeSummary {
            scheme: s.scheme,
            n_ranks: s.n_ranks,
            threads_per_rank,
            exchange_period: s.exchange_period,
            n_cycles: s.n_cycles,
            n_global_exchanges: s.n_global_exchanges,
            n_local_exchanges: s.n_local_exchanges,
            update: stat(&self.update),
            deliver: stat(&self.deliver),
            collocate: stat(&self.collocate),
            sync_proxy: stat(&self.sync),
            exchange_estimate: stat(&self.estimate),
            proxy_rtf: stat(&self.rtf),
            global_bytes: stat(&self.global_bytes),
            local_bytes: stat(&self.local_bytes),
            resize_rounds: stat(&self.resize),
            f_irregular: stat(&self.f_all),
            f_irregular_short: stat(&self.f_short),
            f_irregular_long: stat(&self.f_long),
        }
    }
}

/// Dense + long proxy-time heatmaps of one completed run; the dense file
/// carries the global-exchange boundary cycles in its metadata row.
pub fn emit_heatmap_csv(
    dir: &Path,
    stem: &str,
    output: &RunOutput,
    costs: &CostParams,
) -> Result<(PathBuf, PathBuf), RunnerError> {
    let matrix = proxy_matrix(output, costs);
    let mut boundaries: Vec<u64> = output
        .exchanges
        .iter()
        .filter(|e| e.kind == ExchangeKind::Global)
        .map(|e| e.cycle)
        .collect();
    boundaries.sort_unstable();
    boundaries.dedup();

    let dense_path = dir.join(format!("{stem}_proxy_dense.csv"));
    let mut buf = Vec::new();
    write_matrix_dense_csv(&mut buf, &matrix, &boundaries).expect("vec write cannot fail");
    write_bytes(&dense_path, &buf)?;

    let long_path = dir.join(format!("{stem}_proxy_long.csv"));
    let mut buf = Vec::new();
    write_matrix_long_csv(&mut buf, &matrix).expect("vec write cannot fail");
    write_bytes(&long_path, &buf)?;

    Ok((dense_path, long_path))
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    quiet: bool,
) -> Result<ExperimentReport, RunnerError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| io_err(&cfg.output_dir, e))?;
    match cfg.experiment {
        Experiment::TheoryCheck => run_theory_check(cfg, quiet),
        Experiment::AccessCheck => run_access_check(cfg, quiet),
        _ => run_engine_experiment(cfg, quiet),
    }
}

fn run_engine_experiment(
    cfg: &ExperimentConfig,
    quiet: bool,
) -> Result<ExperimentReport, RunnerError> {
    let points = plan_points(cfg);
    let manifest_path = cfg.output_dir.join("manifest.json");
    let summary_path = cfg.output_dir.join("summary.json");

    let mut planned = Vec::new();
    for point in &points {
        for &seed in &cfg.seeds {
            for &scheme in &point.schemes {
                let stem = format!("seed{seed}_{}", scheme.as_str());
                let rel = format!("runs/{}/{stem}", point.label);
                let mut artifacts =
                    vec![format!("{rel}_metrics.csv"), format!("{rel}_exchange.csv")];
                if cfg.experiment == Experiment::SingleRun {
                    artifacts.push(format!("{rel}_proxy_dense.csv"));
                    artifacts.push(format!("{rel}_proxy_long.csv"));
                }
                planned.push(ManifestRun {
                    label: point.label.clone(),
                    seed,
                    scheme: scheme.as_str().to_owned(),
                    artifacts,
                    done: false,
                });
            }
        }
    }
    let n_runs = planned.len();
    let mut manifest = Manifest::new(cfg, planned);
    persist_manifest(&manifest_path, &manifest)?;

    let mut point_summaries = Vec::with_capacity(points.len());
    let mut run_idx = 0;
    for point in &points {
        let runs_dir = cfg.output_dir.join("runs").join(&point.label);
        fs::create_dir_all(&runs_dir).map_err(|e| io_err(&runs_dir, e))?;
        let mut accs: Vec<Acc> = point.schemes.iter().map(|_| Acc::default()).collect();
        for &seed in &cfg.seeds {
            let net = point.network(cfg, seed)?;
            for (si, &scheme) in point.schemes.iter().enumerate() {
                let started = Instant::now();
                let plan = build_plan(cfg, &net, point, scheme)?;
                let options = RunOptions {
                    record_deliveries: false,
                    rng_seed: seed,
                    initial_capacity: cfg.engine.initial_capacity,
                    entry_bytes_override: cfg.engine.entry_bytes_override,
                    parallel: cfg.engine.parallel,
                };
                let output = run(&net, &plan, &options)?;

                let stem = format!("seed{seed}_{}", scheme.as_str());
                let run_id = format!("{}-seed{seed}-{}", point.label, scheme.as_str());
                let mut buf = Vec::new();
                write_metrics_csv(&mut buf, &run_id, scheme, &output.metrics, &cfg.cost_params)
                    .expect("vec write cannot fail");
                write_bytes(&runs_dir.join(format!("{stem}_metrics.csv")), &buf)?;
                let mut buf = Vec::new();
                write_exchange_csv(&mut buf, &run_id, scheme, &output.exchanges)
                    .expect("vec write cannot fail");
                write_bytes(&runs_dir.join(format!("{stem}_exchange.csv")), &buf)?;
                if cfg.experiment == Experiment::SingleRun {
                    emit_heatmap_csv(&runs_dir, &stem, &output, &cfg.cost_params)?;
                }

                accs[si].push(
                    &output,
                    &cfg.cost_params,
                    &cfg.exchange_cost,
                    net.grid.t_model_ms(),
                );
                manifest.runs[run_idx].done = true;
                run_idx += 1;
                persist_manifest(&manifest_path, &manifest)?;
                if !quiet {
                    eprintln!(
                        "[areasim] {} {} seed {seed} {}: {} cycles in {:?}",
                        cfg.experiment.as_str(),
                        point.label,
                        scheme.as_str(),
                        output.summary.n_cycles,
                        started.elapsed(),
                    );
                }
            }
        }
        point_summaries.push(PointSummary {
            label: point.label.clone(),
            params: point.params.clone(),
            schemes: accs
                .iter()
                .map(|a| a.summarize(cfg.partition.threads_per_rank))
                .collect(),
        });
    }

    let doc = SummaryDoc {
        experiment: cfg.experiment,
        seeds: cfg.seeds.clone(),
        threads_per_rank: cfg.partition.threads_per_rank,
        cost_params: cfg.cost_params,
        exchange_cost: cfg.exchange_cost,
        points: point_summaries,
    };
    write_json(&summary_path, &doc)?;
    manifest.status = "complete".to_owned();
    persist_manifest(&manifest_path, &manifest)?;

    Ok(ExperimentReport {
        output_dir: cfg.output_dir.clone(),
        manifest_path,
        summary_path,
        n_runs,
    })
}

fn run_theory_check(cfg: &ExperimentConfig, quiet: bool) -> Result<ExperimentReport, RunnerError> {
    let sm = cfg.sync_model.as_ref().expect("validated by config");
    let model = sm.model();
    let manifest_path = cfg.output_dir.join("manifest.json");
    let doc_path = cfg.output_dir.join("theory_check.json");
    let mut manifest = Manifest::new(
        cfg,
        vec![ManifestRun {
            label: "theory_check".to_owned(),
            seed: cfg.seeds[0],
            scheme: "analysis".to_owned(),
            artifacts: vec!["theory_check.json".to_owned()],
            done: false,
        }],
    );
    persist_manifest(&manifest_path, &manifest)?;

    let seed_at = |i: usize| cfg.seeds[i % cfg.seeds.len()];
    let cf = expected_walltimes(&model)?;
    let mc = montecarlo_walltimes(&model, sm.mc_replicates, seed_at(0))?;
    let xi_mc = montecarlo_expected_max(model.m, sm.xi_replicates, seed_at(1));
    let tail_mc = montecarlo_max_tail_fraction(sm.tail_p, model.m, sm.tail_cycles, seed_at(2));
    let d = f64::from(model.d);

    let entries = vec![
        check_entry("t_conv", cf.e_conv, mc.t_conv.mean),
        check_entry("t_struc", cf.e_struc, mc.t_struc.mean),
        check_entry("sync_conv", cf.e_sync_conv, mc.sync_conv.mean),
        check_entry("sync_struc", cf.e_sync_struc, mc.sync_struc.mean),
        check_entry("sync_ratio", cf.sync_ratio, mc.sync_ratio),
        check_entry(
            "cv_ratio",
            1.0 / d.sqrt(),
            mc.cv_struc.mean / mc.cv_conv.mean,
        ),
        check_entry("xi_max", xi_max(model.m), xi_mc),
        check_entry(
            "max_quantile_probability",
            max_quantile_probability(sm.tail_p, model.m),
            tail_mc,
        ),
    ];
    if !quiet {
        for e in &entries {
            eprintln!(
                "[areasim] theory_check {}: analytic {:.6} oracle {:.6} (rel {:.4})",
                e.quantity, e.analytic, e.oracle, e.relative_error
            );
        }
    }
    let doc = TheoryCheckDoc {
        model,
        mc_replicates: sm.mc_replicates,
        xi_replicates: sm.xi_replicates,
        tail_cycles: sm.tail_cycles,
        entries,
    };
    write_json(&doc_path, &doc)?;
    manifest.runs[0].done = true;
    manifest.status = "complete".to_owned();
    persist_manifest(&manifest_path, &manifest)?;
    Ok(ExperimentReport {
        output_dir: cfg.output_dir.clone(),
        manifest_path,
        summary_path: doc_path,
        n_runs: 1,
    })
}

fn run_access_check(cfg: &ExperimentConfig, quiet: bool) -> Result<ExperimentReport, RunnerError> {
    let manifest_path = cfg.output_dir.join("manifest.json");
    let doc_path = cfg.output_dir.join("access_check.json");
    let mut manifest = Manifest::new(
        cfg,
        vec![ManifestRun {
            label: "access_check".to_owned(),
            seed: cfg.seeds[0],
            scheme: "analysis".to_owned(),
            artifacts: vec!["access_check.json".to_owned()],
            done: false,
        }],
    );
    persist_manifest(&manifest_path, &manifest)?;

    let n = &cfg.network;
    let params = AccessModelParams::from_per_rank(
        u64::from(n.n_areas),
        u64::from(cfg.partition.threads_per_rank),
        u64::from(n.neurons_per_area),
        u64::from(n.k_intra),
        u64::from(n.k_inter),
    );
    let analytic_conv = f_irr_conventional(&params)?;
    let analytic_struc = f_irr_structure_aware(&params)?;

    let mut per_seed = Vec::with_capacity(cfg.seeds.len());
    let mut oracle_conv = Vec::new();
    let mut oracle_struc = Vec::new();
    for &seed in &cfg.seeds {
        let net = generate_benchmark(&n.benchmark(n.n_areas, seed))?;
        let bf_conv = f_irr_bruteforce(
            &net,
            &plan_round_robin(&net, n.n_areas, cfg.partition.threads_per_rank)?,
        );
        let bf_struc = f_irr_bruteforce(
            &net,
            &plan_structure_aware(&net, n.n_areas, cfg.partition.threads_per_rank)?,
        );
        oracle_conv.push(bf_conv.f_combined());
        oracle_struc.push(bf_struc.f_combined());
        per_seed.push(AccessSeedCheck {
            seed,
            entries: vec![
                check_entry("f_irr_conventional", analytic_conv, bf_conv.f_combined()),
                check_entry("f_irr_structure_aware", analytic_struc, bf_struc.f_combined()),
            ],
        });
        if !quiet {
            eprintln!(
                "[areasim] access_check seed {seed}: conv {:.5} struc {:.5}",
                bf_conv.f_combined(),
                bf_struc.f_combined()
            );
        }
    }
    let mean = vec![
        check_entry("f_irr_conventional", analytic_conv, stat(&oracle_conv).mean),
        check_entry(
            "f_irr_structure_aware",
            analytic_struc,
            stat(&oracle_struc).mean,
        ),
    ];
    let doc = AccessCheckDoc {
        params,
        per_seed,
        mean,
    };
    write_json(&doc_path, &doc)?;
    manifest.runs[0].done = true;
    manifest.status = "complete".to_owned();
    persist_manifest(&manifest_path, &manifest)?;
    Ok(ExperimentReport {
        output_dir: cfg.output_dir.clone(),
        manifest_path,
        summary_path: doc_path,
        n_runs: 1,
    })
}
