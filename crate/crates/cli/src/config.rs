//! Config file schema and validation.
//!
//! One JSON document pins an experiment completely: network and partition
//! parameters, proxy cost weights, sweep grids, and seeds. Parse errors and
//! semantic errors both name the offending key so a typo in a 40-line config
//! is a one-line fix.

use std::fs;
use std::path::{Path, PathBuf};

use areasim::analysis::CycleTimeModel;
use areasim::engine::CostParams;
use areasim::model::{BenchmarkParams, DelayParams, HeterogeneityParams, TimeGrid};
use areasim::partition::Scheme;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SEEDS: [u64; 3] = [12, 654, 91856];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    WeakScaling,
    CvAreaSweep,
    CvRateSweep,
    DSweep,
    TheoryCheck,
    AccessCheck,
    SingleRun,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::WeakScaling => "weak_scaling",
            Experiment::CvAreaSweep => "cv_area_sweep",
            Experiment::CvRateSweep => "cv_rate_sweep",
            Experiment::DSweep => "d_sweep",
            Experiment::TheoryCheck => "theory_check",
            Experiment::AccessCheck => "access_check",
            Experiment::SingleRun => "single_run",
        }
    }
}

/// Network parameters; the per-run seed comes from the top-level `seeds`
/// list, not from here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkParams {
    pub n_areas: u32,
    pub neurons_per_area: u32,
    pub k_intra: u32,
    pub k_inter: u32,
    pub grid: TimeGrid,
    pub intra_delay: DelayParams,
    pub inter_delay: DelayParams,
    pub rate_hz: f64,
}

impl NetworkParams {
    pub fn benchmark(&self, n_areas: u32, rng_seed: u64) -> BenchmarkParams {
        BenchmarkParams {
            n_areas,
            neurons_per_area: self.neurons_per_area,
            k_intra: self.k_intra,
            k_inter: self.k_inter,
            grid: self.grid,
            intra_delay: self.intra_delay,
            inter_delay: self.inter_delay,
            rate_hz: self.rate_hz,
            rng_seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionParams {
    /// Schemes to run per sweep point. `d_sweep` always runs
    /// structure-aware only.
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    pub threads_per_rank: u32,
    /// Defaults to the number of areas of the point's network.
    #[serde(default)]
    pub n_ranks: Option<u32>,
    /// Structure-aware global-exchange period override; defaults to the
    /// grid's full delay ratio D. Ignored by `d_sweep` (the grid drives it).
    #[serde(default)]
    pub exchange_period: Option<u32>,
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Conventional, Scheme::StructureAware]
}

/// Affine per-exchange time model, reported in summaries but never
/// asserted against: `alpha_per_call + beta_per_byte * bytes` per event.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeCost {
    pub alpha_per_call: f64,
    pub beta_per_byte: f64,
}

impl Default for ExchangeCost {
    fn default() -> Self {
        Self {
            alpha_per_call: 1.0,
            beta_per_byte: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrids {
    #[serde(default)]
    pub cv_area_size: Option<Vec<f64>>,
    #[serde(default)]
    pub cv_rate: Option<Vec<f64>>,
    #[serde(default)]
    pub d: Option<Vec<u32>>,
    #[serde(default)]
    pub m: Option<Vec<u32>>,
}

/// Order-statistics model checked by `theory_check`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncModelConfig {
    pub mu: f64,
    pub sigma: f64,
    pub m: u32,
    pub s: u64,
    pub d: u32,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_mc_replicates")]
    pub mc_replicates: u64,
    #[serde(default = "default_xi_replicates")]
    pub xi_replicates: u64,
    #[serde(default = "default_tail_p")]
    pub tail_p: f64,
    #[serde(default = "default_tail_cycles")]
    pub tail_cycles: u64,
}

fn default_mc_replicates() -> u64 {
    200
}

fn default_xi_replicates() -> u64 {
    200_000
}

fn default_tail_p() -> f64 {
    0.035
}

fn default_tail_cycles() -> u64 {
    100_000
}

impl SyncModelConfig {
    pub fn model(&self) -> CycleTimeModel {
        CycleTimeModel {
            mu: self.mu,
            sigma: self.sigma,
            m: self.m,
            s: self.s,
            d: self.d,
            rho: self.rho,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineParams {
    #[serde(default = "default_capacity")]
    pub initial_capacity: u64,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub entry_bytes_override: Option<u32>,
}

fn default_capacity() -> u64 {
    64
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            initial_capacity: default_capacity(),
            parallel: false,
            entry_bytes_override: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub network: NetworkParams,
    #[serde(default = "zero_heterogeneity")]
    pub heterogeneity: HeterogeneityParams,
    pub partition: PartitionParams,
    #[serde(default)]
    pub cost_params: CostParams,
    #[serde(default)]
    pub exchange_cost: ExchangeCost,
    #[serde(default)]
    pub sweep: SweepGrids,
    #[serde(default)]
    pub sync_model: Option<SyncModelConfig>,
    #[serde(default)]
    pub engine: EngineParams,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn zero_heterogeneity() -> HeterogeneityParams {
    HeterogeneityParams {
        cv_area_size: 0.0,
        cv_rate: 0.0,
    }
}

fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config error at `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("config error at `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    /// The offending key, when the error is tied to one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Parse { key, .. } | ConfigError::Invalid { key, .. } => Some(key),
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        reason: reason.into(),
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

/// Parse and validate one JSON config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig =
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            key: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Effective CV grid of `cv_area_sweep`.
    pub fn cv_area_grid(&self) -> Vec<f64> {
        self.sweep
            .cv_area_size
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.1, 0.2, 0.3])
    }

    /// Effective CV grid of `cv_rate_sweep`.
    pub fn cv_rate_grid(&self) -> Vec<f64> {
        self.sweep
            .cv_rate
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.1, 0.2, 0.3])
    }

    /// Effective period grid of `d_sweep`: all divisors of the delay
    /// ratio, ascending, unless the config pins a list.
    pub fn d_grid(&self) -> Vec<u32> {
        self.sweep.d.clone().unwrap_or_else(|| {
            let ratio = self.network.grid.delay_ratio();
            (1..=ratio).filter(|d| ratio.is_multiple_of(*d)).collect()
        })
    }

    /// Effective rank-count grid of `weak_scaling`.
    pub fn m_grid(&self) -> Vec<u32> {
        self.sweep.m.clone().unwrap_or_else(|| vec![2, 4, 8, 16])
    }

    pub fn is_heterogeneous(&self) -> bool {
        self.heterogeneity.cv_area_size > 0.0 || self.heterogeneity.cv_rate > 0.0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(invalid("seeds", "duplicate seeds would collide in artifact names"));
        }

        if self.network.n_areas == 0 {
            return Err(invalid("network.n_areas", "must be positive"));
        }
        if self.network.neurons_per_area == 0 {
            return Err(invalid("network.neurons_per_area", "must be positive"));
        }
        if !(self.network.rate_hz.is_finite() && self.network.rate_hz >= 0.0) {
            return Err(invalid("network.rate_hz", "must be finite and nonnegative"));
        }
        self.network
            .grid
            .validate()
            .map_err(|e| invalid("network.grid", e.to_string()))?;

        for (key, cv) in [
            ("heterogeneity.cv_area_size", self.heterogeneity.cv_area_size),
            ("heterogeneity.cv_rate", self.heterogeneity.cv_rate),
        ] {
            if !(cv.is_finite() && cv >= 0.0) {
                return Err(invalid(key, "must be finite and nonnegative"));
            }
        }

        if self.partition.schemes.is_empty() {
            return Err(invalid("partition.schemes", "at least one scheme is required"));
        }
        if self.partition.schemes.len() > 2 {
            return Err(invalid("partition.schemes", "schemes may each appear once"));
        }
        if self.partition.schemes.len() == 2
            && self.partition.schemes[0] == self.partition.schemes[1]
        {
            return Err(invalid("partition.schemes", "schemes may each appear once"));
        }
        if self.partition.threads_per_rank == 0 {
            return Err(invalid("partition.threads_per_rank", "must be positive"));
        }
        if let Some(n_ranks) = self.partition.n_ranks {
            if n_ranks == 0 {
                return Err(invalid("partition.n_ranks", "must be positive"));
            }
            if self.partition.schemes.contains(&Scheme::StructureAware)
                && n_ranks != self.network.n_areas
            {
                return Err(invalid(
                    "partition.n_ranks",
                    format!(
                        "structure-aware placement needs one rank per area ({} areas)",
                        self.network.n_areas
                    ),
                ));
            }
        }
        if let Some(period) = self.partition.exchange_period {
            let ratio = self.network.grid.delay_ratio();
            if period == 0 || !ratio.is_multiple_of(period) {
                return Err(invalid(
                    "partition.exchange_period",
                    format!("must be a positive divisor of the delay ratio {ratio}"),
                ));
            }
        }

        for (key, c) in [
            ("cost_params.c_update", self.cost_params.c_update),
            ("cost_params.c_hit", self.cost_params.c_hit),
            ("cost_params.c_miss", self.cost_params.c_miss),
            ("cost_params.c_collocate", self.cost_params.c_collocate),
            ("exchange_cost.alpha_per_call", self.exchange_cost.alpha_per_call),
            ("exchange_cost.beta_per_byte", self.exchange_cost.beta_per_byte),
        ] {
            if !(c.is_finite() && c >= 0.0) {
                return Err(invalid(key, "must be finite and nonnegative"));
            }
        }

        for (key, grid) in [
            ("sweep.cv_area_size", &self.sweep.cv_area_size),
            ("sweep.cv_rate", &self.sweep.cv_rate),
        ] {
            if let Some(g) = grid {
                if g.is_empty() {
                    return Err(invalid(key, "grid must be nonempty"));
                }
                if g.iter().any(|cv| !(cv.is_finite() && *cv >= 0.0)) {
                    return Err(invalid(key, "grid entries must be finite and nonnegative"));
                }
            }
        }
        if let Some(g) = &self.sweep.d {
            if g.is_empty() {
                return Err(invalid("sweep.d", "grid must be nonempty"));
            }
        }
        if let Some(g) = &self.sweep.m {
            if g.is_empty() {
                return Err(invalid("sweep.m", "grid must be nonempty"));
            }
        }

        if self.engine.initial_capacity == 0 {
            return Err(invalid("engine.initial_capacity", "must be positive"));
        }

        match self.experiment {
            Experiment::DSweep => {
                let ratio = self.network.grid.delay_ratio();
                for d in self.d_grid() {
                    if d == 0 || !ratio.is_multiple_of(d) {
                        return Err(invalid(
                            "sweep.d",
                            format!("{d} is not a positive divisor of the delay ratio {ratio}"),
                        ));
                    }
                }
            }
            Experiment::WeakScaling => {
                for m in self.m_grid() {
                    if m == 0 {
                        return Err(invalid("sweep.m", "rank counts must be positive"));
                    }
                    if m == 1 && self.network.k_inter > 0 {
                        return Err(invalid(
                            "sweep.m",
                            "a single area cannot host inter-area synapses",
                        ));
                    }
                }
            }
            Experiment::TheoryCheck => {
                let Some(sm) = &self.sync_model else {
                    return Err(invalid("sync_model", "required by theory_check"));
                };
                if sm.rho != 0.0 {
                    return Err(invalid(
                        "sync_model.rho",
                        "closed forms hold only for rho = 0; Monte-Carlo CV ratios cover rho > 0",
                    ));
                }
                sm.model()
                    .validate()
                    .map_err(|e| invalid("sync_model", e.to_string()))?;
                if sm.mc_replicates < 2 {
                    return Err(invalid("sync_model.mc_replicates", "need at least 2"));
                }
                if sm.xi_replicates == 0 {
                    return Err(invalid("sync_model.xi_replicates", "must be positive"));
                }
                if !(sm.tail_p > 0.0 && sm.tail_p < 1.0) {
                    return Err(invalid("sync_model.tail_p", "must lie in (0, 1)"));
                }
                if sm.tail_cycles == 0 {
                    return Err(invalid("sync_model.tail_cycles", "must be positive"));
                }
            }
            Experiment::AccessCheck => {
                if self.network.n_areas < 2 {
                    return Err(invalid(
                        "network.n_areas",
                        "access_check compares against the multi-rank closed form; need >= 2 areas",
                    ));
                }
                if self.is_heterogeneous() {
                    return Err(invalid(
                        "heterogeneity",
                        "the access closed form assumes equal area sizes; set CVs to 0",
                    ));
                }
            }
            Experiment::CvAreaSweep | Experiment::CvRateSweep | Experiment::SingleRun => {}
        }

        Ok(())
    }
}

/// Fold command-line overrides into a parsed config and re-validate.
pub fn apply_overrides(
    cfg: &mut ExperimentConfig,
    experiment: Option<Experiment>,
    out: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
) -> Result<(), ConfigError> {
    if let Some(e) = experiment {
        cfg.experiment = e;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    cfg.validate()
}
