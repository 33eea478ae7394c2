//! Multi-area benchmark networks: time grid, areas, neurons, synapses and
//! the generators that produce them.
//!
//! Networks use a fixed-interval firing neuron whose update cost is
//! independent of input, so workload is fully determined by the generated
//! structure. All delays are stored as integer steps; rounding to the grid
//! happens exactly once, at generation time.

use std::num::NonZeroU64;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, StreamDomain};

/// Discrete time resolution and the two minimum-delay horizons of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Resolution steps per millisecond of model time.
    pub h_steps_per_ms: u32,
    /// Overall minimum synaptic delay, in steps. One simulation cycle long.
    pub d_min_steps: u32,
    /// Minimum delay of inter-area synapses, in steps. Must be a multiple
    /// of `d_min_steps`.
    pub d_min_inter_steps: u32,
    /// Total simulated steps. Must be a multiple of `d_min_inter_steps` so
    /// the run ends on a global-exchange boundary.
    pub t_model_steps: u64,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.h_steps_per_ms == 0
            || self.d_min_steps == 0
            || self.d_min_inter_steps == 0
            || self.t_model_steps == 0
        {
            return Err(ModelError::GridZeroField);
        }
        if !self.d_min_inter_steps.is_multiple_of(self.d_min_steps) {
            return Err(ModelError::GridRatioNotIntegral {
                d_min_steps: self.d_min_steps,
                d_min_inter_steps: self.d_min_inter_steps,
            });
        }
        if !self.t_model_steps.is_multiple_of(u64::from(self.d_min_inter_steps)) {
            return Err(ModelError::GridRunNotOnBoundary {
                t_model_steps: self.t_model_steps,
                d_min_inter_steps: self.d_min_inter_steps,
            });
        }
        Ok(())
    }

    /// Integer ratio of the two minimum delays.
    pub fn delay_ratio(&self) -> u32 {
        self.d_min_inter_steps / self.d_min_steps
    }

    /// Number of simulation cycles in one run.
    pub fn n_cycles(&self) -> u64 {
        self.t_model_steps / u64::from(self.d_min_steps)
    }

    pub fn t_model_ms(&self) -> f64 {
        self.t_model_steps as f64 / f64::from(self.h_steps_per_ms)
    }
}

/// One area of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaSpec {
    pub area_id: u32,
    pub n_neurons: u32,
    /// Target per-neuron spike rate, spikes per second.
    pub rate_hz: f64,
}

/// Fixed-interval firing neuron. Emits at every step `t` with
/// `(t + fire_phase_steps) % fire_interval_steps == 0`; input is ignored.
/// `fire_interval_steps == None` encodes a neuron that never fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronSpec {
    pub fire_interval_steps: Option<NonZeroU64>,
    pub fire_phase_steps: u64,
    pub frozen: bool,
}

impl NeuronSpec {
    pub fn fires_at(&self, step: u64) -> bool {
        if self.frozen {
            return false;
        }
        match self.fire_interval_steps {
            Some(interval) => (step + self.fire_phase_steps).is_multiple_of(interval.get()),
            None => false,
        }
    }
}

/// Whether a synapse stays within an area or crosses between areas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeClass {
    Intra,
    Inter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynapseSpec {
    pub source_id: u32,
    pub target_id: u32,
    pub delay_steps: u32,
    pub range_class: RangeClass,
}

/// Generator provenance and realized statistics, carried in the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetadata {
    pub generator: String,
    pub rng_seed: u64,
    pub k_intra: u32,
    pub k_inter: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_area_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized_mean_area_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized_mean_rate_hz: Option<f64>,
}

/// A fully instantiated network. Neuron ids are contiguous and ordered by
/// area: area `a` owns the id range `[offset(a), offset(a+1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub grid: TimeGrid,
    pub areas: Vec<AreaSpec>,
    pub neurons: Vec<NeuronSpec>,
    pub synapses: Vec<SynapseSpec>,
    pub metadata: NetworkMetadata,
}

/// Prefix offsets of the area id ranges, built once and shared.
#[derive(Debug, Clone)]
pub struct AreaIndex {
    offsets: Vec<u32>,
}

impl AreaIndex {
    /// Fails when the area sizes do not add up to the neuron count or
    /// overflow the id space.
    pub fn new(areas: &[AreaSpec], n_neurons: usize) -> Result<Self, ModelError> {
        let mut offsets = Vec::with_capacity(areas.len() + 1);
        let mut acc: u64 = 0;
        offsets.push(0);
        for area in areas {
            acc += u64::from(area.n_neurons);
            if acc > u64::from(u32::MAX) {
                return Err(ModelError::TooManyNeurons { total: acc });
            }
            offsets.push(acc as u32);
        }
        if acc != n_neurons as u64 {
            return Err(ModelError::AreaSizeSumMismatch {
                sum: acc,
                n_neurons: n_neurons as u64,
            });
        }
        Ok(Self { offsets })
    }

    pub fn n_areas(&self) -> u32 {
        (self.offsets.len() - 1) as u32
    }

    pub fn area_of(&self, gid: u32) -> u32 {
        debug_assert!(gid < *self.offsets.last().unwrap());
        (self.offsets.partition_point(|&o| o <= gid) - 1) as u32
    }

    pub fn range(&self, area: u32) -> std::ops::Range<u32> {
        self.offsets[area as usize]..self.offsets[area as usize + 1]
    }

    pub fn size(&self, area: u32) -> u32 {
        self.offsets[area as usize + 1] - self.offsets[area as usize]
    }
}

impl NetworkSpec {
    pub fn n_neurons(&self) -> u32 {
        self.neurons.len() as u32
    }

    pub fn n_areas(&self) -> u32 {
        self.areas.len() as u32
    }

    pub fn area_index(&self) -> Result<AreaIndex, ModelError> {
        AreaIndex::new(&self.areas, self.neurons.len())
    }

    /// Full invariant scan. Safe on arbitrary deserialized input: every
    /// failure is reported as an error, never a panic.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.grid.validate()?;
        if self.areas.is_empty() {
            return Err(ModelError::NoAreas);
        }
        for (i, area) in self.areas.iter().enumerate() {
            if area.area_id != i as u32 {
                return Err(ModelError::AreaIdOutOfOrder {
                    position: i as u32,
                    area_id: area.area_id,
                });
            }
            if area.n_neurons == 0 {
                return Err(ModelError::EmptyArea { area_id: area.area_id });
            }
            if !area.rate_hz.is_finite() || area.rate_hz < 0.0 {
                return Err(ModelError::BadRate { rate_hz: area.rate_hz });
            }
        }
        let index = self.area_index()?;
        let n = self.n_neurons();
        for (gid, neuron) in self.neurons.iter().enumerate() {
            if let Some(interval) = neuron.fire_interval_steps {
                if neuron.fire_phase_steps >= interval.get() {
                    return Err(ModelError::PhaseOutOfRange {
                        gid: gid as u32,
                        phase: neuron.fire_phase_steps,
                        interval: interval.get(),
                    });
                }
            }
        }
        for (i, syn) in self.synapses.iter().enumerate() {
            if syn.source_id >= n || syn.target_id >= n {
                return Err(ModelError::SynapseIdOutOfRange { index: i });
            }
            if syn.source_id == syn.target_id {
                return Err(ModelError::SelfConnection { gid: syn.source_id });
            }
            if self.neurons[syn.source_id as usize].frozen
                || self.neurons[syn.target_id as usize].frozen
            {
                return Err(ModelError::FrozenSynapse { index: i });
            }
            let same_area = index.area_of(syn.source_id) == index.area_of(syn.target_id);
            match syn.range_class {
                RangeClass::Intra if !same_area => {
                    return Err(ModelError::ClassMismatch { index: i })
                }
                RangeClass::Inter if same_area => {
                    return Err(ModelError::ClassMismatch { index: i })
                }
                _ => {}
            }
            let cutoff = match syn.range_class {
                RangeClass::Intra => self.grid.d_min_steps,
                RangeClass::Inter => self.grid.d_min_inter_steps,
            };
            if syn.delay_steps < cutoff {
                return Err(ModelError::DelayBelowCutoff {
                    index: i,
                    delay_steps: syn.delay_steps,
                    cutoff,
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Parse and validate a network document.
    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let net: NetworkSpec = serde_json::from_str(s)?;
        net.validate()?;
        Ok(net)
    }

    pub fn max_delay_steps(&self) -> u32 {
        self.synapses
            .iter()
            .map(|s| s.delay_steps)
            .max()
            .unwrap_or(self.grid.d_min_steps)
    }
}

/// Gaussian delay distribution in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayParams {
    pub mean_ms: f64,
    pub sd_ms: f64,
}

/// Parameters of the homogeneous benchmark generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkParams {
    pub n_areas: u32,
    pub neurons_per_area: u32,
    /// Outgoing intra-area synapses per neuron.
    pub k_intra: u32,
    /// Outgoing inter-area synapses per neuron.
    pub k_inter: u32,
    pub grid: TimeGrid,
    pub intra_delay: DelayParams,
    pub inter_delay: DelayParams,
    pub rate_hz: f64,
    pub rng_seed: u64,
}

/// Extra knobs of the heterogeneous generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityParams {
    pub cv_area_size: f64,
    pub cv_rate: f64,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("grid fields must all be positive")]
    GridZeroField,
    #[error("d_min_inter_steps {d_min_inter_steps} is not a multiple of d_min_steps {d_min_steps}")]
    GridRatioNotIntegral {
        d_min_steps: u32,
        d_min_inter_steps: u32,
    },
    #[error("t_model_steps {t_model_steps} is not a multiple of d_min_inter_steps {d_min_inter_steps}")]
    GridRunNotOnBoundary {
        t_model_steps: u64,
        d_min_inter_steps: u32,
    },
    #[error("network has no areas")]
    NoAreas,
    #[error("area at position {position} has id {area_id}; ids must equal their position")]
    AreaIdOutOfOrder { position: u32, area_id: u32 },
    #[error("area {area_id} has zero neurons")]
    EmptyArea { area_id: u32 },
    #[error("spike rate {rate_hz} must be finite and non-negative")]
    BadRate { rate_hz: f64 },
    #[error("rate {rate_hz} Hz rounds to a zero-step firing interval at {h_steps_per_ms} steps/ms")]
    RateTooHigh { rate_hz: f64, h_steps_per_ms: u32 },
    #[error("total neuron count {total} exceeds the id space")]
    TooManyNeurons { total: u64 },
    #[error("area sizes sum to {sum} but {n_neurons} neurons are present")]
    AreaSizeSumMismatch { sum: u64, n_neurons: u64 },
    #[error("neuron {gid}: fire phase {phase} not below interval {interval}")]
    PhaseOutOfRange { gid: u32, phase: u64, interval: u64 },
    #[error("synapse {index}: neuron id out of range")]
    SynapseIdOutOfRange { index: usize },
    #[error("neuron {gid} connects to itself")]
    SelfConnection { gid: u32 },
    #[error("synapse {index} references a frozen neuron")]
    FrozenSynapse { index: usize },
    #[error("synapse {index}: range class does not match the areas of its endpoints")]
    ClassMismatch { index: usize },
    #[error("synapse {index}: delay {delay_steps} below cutoff {cutoff}")]
    DelayBelowCutoff {
        index: usize,
        delay_steps: u32,
        cutoff: u32,
    },
    #[error("k_intra {k_intra} must be below the area size {area_size}")]
    KIntraTooLarge { k_intra: u32, area_size: u32 },
    #[error("inter-area synapses requested but the network has a single area")]
    SingleAreaInter,
    #[error("count field must be positive: {field}")]
    ZeroCount { field: &'static str },
    #[error("delay sd must be finite and non-negative, mean finite")]
    BadDelayParams,
    #[error("heterogeneity cv must be finite and non-negative")]
    BadCv,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Firing interval for a target rate: `round(1000 * h / rate)` steps.
fn interval_for_rate(rate_hz: f64, grid: &TimeGrid) -> Result<Option<NonZeroU64>, ModelError> {
    if !rate_hz.is_finite() || rate_hz < 0.0 {
        return Err(ModelError::BadRate { rate_hz });
    }
    if rate_hz == 0.0 {
        return Ok(None);
    }
    let steps = (1000.0 * f64::from(grid.h_steps_per_ms) / rate_hz).round();
    if steps < 1.0 {
        return Err(ModelError::RateTooHigh {
            rate_hz,
            h_steps_per_ms: grid.h_steps_per_ms,
        });
    }
    Ok(NonZeroU64::new(steps as u64))
}

fn check_base_params(p: &BenchmarkParams) -> Result<(), ModelError> {
    p.grid.validate()?;
    if p.n_areas == 0 {
        return Err(ModelError::ZeroCount { field: "n_areas" });
    }
    if p.neurons_per_area == 0 {
        return Err(ModelError::ZeroCount {
            field: "neurons_per_area",
        });
    }
    if p.k_intra >= p.neurons_per_area {
        return Err(ModelError::KIntraTooLarge {
            k_intra: p.k_intra,
            area_size: p.neurons_per_area,
        });
    }
    if p.k_inter > 0 && p.n_areas < 2 {
        return Err(ModelError::SingleAreaInter);
    }
    for d in [&p.intra_delay, &p.inter_delay] {
        if !d.mean_ms.is_finite() || !d.sd_ms.is_finite() || d.sd_ms < 0.0 {
            return Err(ModelError::BadDelayParams);
        }
    }
    Ok(())
}

/// Sample one Gaussian delay in ms, round to the grid, clamp at `cutoff`.
fn sample_delay_steps<R: Rng>(rng: &mut R, d: &DelayParams, grid: &TimeGrid, cutoff: u32) -> u32 {
    let normal = Normal::new(d.mean_ms, d.sd_ms).expect("sd checked non-negative");
    let ms: f64 = normal.sample(rng);
    let steps = (ms * f64::from(grid.h_steps_per_ms)).round();
    if steps <= f64::from(cutoff) {
        cutoff
    } else if steps >= f64::from(u32::MAX) {
        u32::MAX
    } else {
        steps as u32
    }
}

/// Core generator shared by the homogeneous and heterogeneous entry points.
fn generate_with_areas(
    p: &BenchmarkParams,
    sizes: Vec<u32>,
    rates: Vec<f64>,
    metadata: NetworkMetadata,
) -> Result<NetworkSpec, ModelError> {
    let n_areas = sizes.len() as u32;
    let areas: Vec<AreaSpec> = sizes
        .iter()
        .zip(&rates)
        .enumerate()
        .map(|(i, (&n_neurons, &rate_hz))| AreaSpec {
            area_id: i as u32,
            n_neurons,
            rate_hz,
        })
        .collect();
    let index = AreaIndex::new(&areas, sizes.iter().map(|&s| s as usize).sum())?;
    let n_total = index.range(n_areas - 1).end;

    let mut neurons = Vec::with_capacity(n_total as usize);
    for area in &areas {
        let interval = interval_for_rate(area.rate_hz, &p.grid)?;
        for gid in index.range(area.area_id) {
            let phase = match interval {
                Some(iv) if iv.get() > 1 => {
                    let mut rng = stream(p.rng_seed, StreamDomain::NeuronPhase, u64::from(gid));
                    rng.gen_range(0..iv.get())
                }
                _ => 0,
            };
            neurons.push(NeuronSpec {
                fire_interval_steps: interval,
                fire_phase_steps: phase,
                frozen: false,
            });
        }
    }

    let per_neuron = u64::from(p.k_intra) + u64::from(p.k_inter);
    let mut synapses = Vec::with_capacity((u64::from(n_total) * per_neuron) as usize);
    for area in &areas {
        let own = index.range(area.area_id);
        let n_own = own.end - own.start;
        let n_other = n_total - n_own;
        for source in own.clone() {
            let mut rng = stream(p.rng_seed, StreamDomain::SynapseDraw, u64::from(source));
            for _ in 0..p.k_intra {
                // Uniform over the own area excluding the source itself.
                let pick = Uniform::new(0, n_own - 1).sample(&mut rng);
                let local = source - own.start;
                let target = own.start + if pick >= local { pick + 1 } else { pick };
                let delay =
                    sample_delay_steps(&mut rng, &p.intra_delay, &p.grid, p.grid.d_min_steps);
                synapses.push(SynapseSpec {
                    source_id: source,
                    target_id: target,
                    delay_steps: delay,
                    range_class: RangeClass::Intra,
                });
            }
            for _ in 0..p.k_inter {
                // Uniform over all other areas.
                let pick = Uniform::new(0, n_other).sample(&mut rng);
                let target = if pick < own.start {
                    pick
                } else {
                    pick + n_own
                };
                let delay = sample_delay_steps(
                    &mut rng,
                    &p.inter_delay,
                    &p.grid,
                    p.grid.d_min_inter_steps,
                );
                synapses.push(SynapseSpec {
                    source_id: source,
                    target_id: target,
                    delay_steps: delay,
                    range_class: RangeClass::Inter,
                });
            }
        }
    }

    let net = NetworkSpec {
        grid: p.grid,
        areas,
        neurons,
        synapses,
        metadata,
    };
    debug_assert!(net.validate().is_ok());
    Ok(net)
}

/// Generate the homogeneous benchmark network.
pub fn generate_benchmark(p: &BenchmarkParams) -> Result<NetworkSpec, ModelError> {
    check_base_params(p)?;
    let sizes = vec![p.neurons_per_area; p.n_areas as usize];
    let rates = vec![p.rate_hz; p.n_areas as usize];
    let metadata = NetworkMetadata {
        generator: "benchmark".to_owned(),
        rng_seed: p.rng_seed,
        k_intra: p.k_intra,
        k_inter: p.k_inter,
        cv_area_size: None,
        cv_rate: None,
        realized_mean_area_size: None,
        realized_mean_rate_hz: None,
    };
    generate_with_areas(p, sizes, rates, metadata)
}

/// Generate a heterogeneous variant: per-area sizes and rates are drawn
/// from normal distributions with the given coefficients of variation.
pub fn generate_heterogeneous(
    p: &BenchmarkParams,
    h: &HeterogeneityParams,
) -> Result<NetworkSpec, ModelError> {
    check_base_params(p)?;
    if !h.cv_area_size.is_finite()
        || h.cv_area_size < 0.0
        || !h.cv_rate.is_finite()
        || h.cv_rate < 0.0
    {
        return Err(ModelError::BadCv);
    }
    let size_floor = (p.k_intra + 1).max(1);
    let mean_size = f64::from(p.neurons_per_area);
    let mean_rate = p.rate_hz;
    let size_dist = Normal::new(mean_size, h.cv_area_size * mean_size)
        .map_err(|_| ModelError::BadCv)?;
    let rate_dist =
        Normal::new(mean_rate, h.cv_rate * mean_rate).map_err(|_| ModelError::BadCv)?;

    let mut sizes = Vec::with_capacity(p.n_areas as usize);
    let mut rates = Vec::with_capacity(p.n_areas as usize);
    for a in 0..p.n_areas {
        let mut size_rng = stream(p.rng_seed, StreamDomain::AreaSize, u64::from(a));
        let raw = size_dist.sample(&mut size_rng).round();
        let size = if raw < f64::from(size_floor) {
            size_floor
        } else if raw >= f64::from(u32::MAX) {
            return Err(ModelError::TooManyNeurons { total: u64::MAX });
        } else {
            raw as u32
        };
        sizes.push(size);

        let mut rate_rng = stream(p.rng_seed, StreamDomain::AreaRate, u64::from(a));
        let rate = rate_dist.sample(&mut rate_rng).max(0.0);
        rates.push(rate);
    }

    let realized_mean_area_size =
        sizes.iter().map(|&s| f64::from(s)).sum::<f64>() / sizes.len() as f64;
    let realized_mean_rate_hz = rates.iter().sum::<f64>() / rates.len() as f64;
    let metadata = NetworkMetadata {
        generator: "heterogeneous".to_owned(),
        rng_seed: p.rng_seed,
        k_intra: p.k_intra,
        k_inter: p.k_inter,
        cv_area_size: Some(h.cv_area_size),
        cv_rate: Some(h.cv_rate),
        realized_mean_area_size: Some(realized_mean_area_size),
        realized_mean_rate_hz: Some(realized_mean_rate_hz),
    };
    generate_with_areas(p, sizes, rates, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_grid() -> TimeGrid {
        TimeGrid {
            h_steps_per_ms: 10,
            d_min_steps: 1,
            d_min_inter_steps: 10,
            t_model_steps: 100,
        }
    }

    pub(crate) fn toy_params() -> BenchmarkParams {
        BenchmarkParams {
            n_areas: 3,
            neurons_per_area: 4,
            k_intra: 1,
            k_inter: 1,
            grid: toy_grid(),
            intra_delay: DelayParams {
                mean_ms: 1.25,
                sd_ms: 0.625,
            },
            inter_delay: DelayParams {
                mean_ms: 5.0,
                sd_ms: 2.5,
            },
            rate_hz: 100.0,
            rng_seed: 12,
        }
    }

    #[test]
    fn toy_network_counts() {
        let net = generate_benchmark(&toy_params()).unwrap();
        assert_eq!(net.n_neurons(), 12);
        assert_eq!(net.synapses.len(), 24);
        for gid in 0..12u32 {
            let intra = net
                .synapses
                .iter()
                .filter(|s| s.source_id == gid && s.range_class == RangeClass::Intra)
                .count();
            let inter = net
                .synapses
                .iter()
                .filter(|s| s.source_id == gid && s.range_class == RangeClass::Inter)
                .count();
            assert_eq!((intra, inter), (1, 1));
        }
        net.validate().unwrap();
    }

    #[test]
    fn interval_matches_rate() {
        // 2.5 Hz at 10 steps/ms: 1000 * 10 / 2.5 = 4000 steps.
        let grid = toy_grid();
        let interval = interval_for_rate(2.5, &grid).unwrap().unwrap();
        assert_eq!(interval.get(), 4000);
        assert!(interval_for_rate(0.0, &grid).unwrap().is_none());
        assert!(matches!(
            interval_for_rate(1.0e9, &grid),
            Err(ModelError::RateTooHigh { .. })
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        let p = toy_params();
        let a = generate_benchmark(&p).unwrap();
        let b = generate_benchmark(&p).unwrap();
        assert_eq!(a, b);
        let mut p2 = p.clone();
        p2.rng_seed = 13;
        let c = generate_benchmark(&p2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn delay_cutoffs_hold() {
        let mut p = toy_params();
        p.n_areas = 4;
        p.neurons_per_area = 50;
        p.k_intra = 3;
        p.k_inter = 3;
        let net = generate_benchmark(&p).unwrap();
        for s in &net.synapses {
            match s.range_class {
                RangeClass::Intra => assert!(s.delay_steps >= net.grid.d_min_steps),
                RangeClass::Inter => assert!(s.delay_steps >= net.grid.d_min_inter_steps),
            }
        }
    }

    #[test]
    fn no_self_connections() {
        let mut p = toy_params();
        p.neurons_per_area = 2;
        let net = generate_benchmark(&p).unwrap();
        assert!(net.synapses.iter().all(|s| s.source_id != s.target_id));
    }

    #[test]
    fn heterogeneous_zero_cv_matches_homogeneous_layout() {
        let p = toy_params();
        let h = HeterogeneityParams {
            cv_area_size: 0.0,
            cv_rate: 0.0,
        };
        let net = generate_heterogeneous(&p, &h).unwrap();
        assert!(net.areas.iter().all(|a| a.n_neurons == 4));
        assert!(net.areas.iter().all(|a| (a.rate_hz - 100.0).abs() < 1e-12));
    }

    #[test]
    fn heterogeneous_sampler_cv_is_calibrated() {
        // Seed-averaged sample CV of area sizes should track the requested cv.
        let mut p = toy_params();
        p.n_areas = 64;
        p.neurons_per_area = 1000;
        p.k_intra = 2;
        let h = HeterogeneityParams {
            cv_area_size: 0.2,
            cv_rate: 0.0,
        };
        let mut cvs = Vec::new();
        for seed in [12, 654, 91856, 7, 999] {
            p.rng_seed = seed;
            let net = generate_heterogeneous(&p, &h).unwrap();
            let sizes: Vec<f64> = net.areas.iter().map(|a| f64::from(a.n_neurons)).collect();
            let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
            let var = sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                / (sizes.len() - 1) as f64;
            cvs.push(var.sqrt() / mean);
        }
        let mean_cv = cvs.iter().sum::<f64>() / cvs.len() as f64;
        assert!(
            (mean_cv - 0.2).abs() < 0.08,
            "seed-averaged sample cv {mean_cv} strays from 0.2"
        );
    }

    #[test]
    fn generated_delays_respect_inter_cutoff() {
        // Scaled defaults: intra 1.25 +- 0.625 ms, inter 5 +- 2.5 ms, 1 ms cutoff.
        let mut p = toy_params();
        p.n_areas = 4;
        p.neurons_per_area = 100;
        p.k_intra = 4;
        p.k_inter = 4;
        let net = generate_benchmark(&p).unwrap();
        let min_inter = net
            .synapses
            .iter()
            .filter(|s| s.range_class == RangeClass::Inter)
            .map(|s| s.delay_steps)
            .min()
            .unwrap();
        assert!(min_inter >= 10);
        net.validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let net = generate_benchmark(&toy_params()).unwrap();
        let json = net.to_json().unwrap();
        let back = NetworkSpec::from_json(&json).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn validate_rejects_broken_documents() {
        let mut net = generate_benchmark(&toy_params()).unwrap();
        net.synapses[0].delay_steps = 0;
        assert!(matches!(
            net.validate(),
            Err(ModelError::DelayBelowCutoff { .. })
        ));

        let mut net = generate_benchmark(&toy_params()).unwrap();
        net.synapses[0].range_class = match net.synapses[0].range_class {
            RangeClass::Intra => RangeClass::Inter,
            RangeClass::Inter => RangeClass::Intra,
        };
        assert!(matches!(net.validate(), Err(ModelError::ClassMismatch { .. })));

        let mut net = generate_benchmark(&toy_params()).unwrap();
        net.neurons[0].frozen = true;
        assert!(matches!(net.validate(), Err(ModelError::FrozenSynapse { .. })));
    }

    #[test]
    fn bad_grid_rejected() {
        let mut p = toy_params();
        p.grid.d_min_steps = 4; // 10 % 4 != 0
        assert!(matches!(
            generate_benchmark(&p),
            Err(ModelError::GridRatioNotIntegral { .. })
        ));
        let mut p = toy_params();
        p.grid.t_model_steps = 105;
        assert!(matches!(
            generate_benchmark(&p),
            Err(ModelError::GridRunNotOnBoundary { .. })
        ));
    }

    #[test]
    fn single_area_with_inter_rejected() {
        let mut p = toy_params();
        p.n_areas = 1;
        assert!(matches!(
            generate_benchmark(&p),
            Err(ModelError::SingleAreaInter)
        ));
        p.k_inter = 0;
        assert!(generate_benchmark(&p).is_ok());
    }
}
