//! Synchronization-time order statistics: expected walltimes under the
//! normal cycle-time model, Blom's expected-maximum factor, and the
//! Monte-Carlo oracle that validates both, including the AR(1) extension
//! for serially correlated cycle times.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::normal::inv_phi;
use crate::rng::{stream, StreamDomain};

/// Normal model of per-rank per-cycle compute times.
///
/// `rho` is the lag-one serial correlation of a rank's cycle-time path;
/// the closed forms hold only for `rho == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleTimeModel {
    pub mu: f64,
    pub sigma: f64,
    pub m: u32,
    pub s: u64,
    pub d: u32,
    pub rho: f64,
}

impl CycleTimeModel {
    pub fn validate(&self) -> Result<(), SyncError> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(SyncError::BadParam("mu must be finite and positive"));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(SyncError::BadParam("sigma must be finite and non-negative"));
        }
        if self.m == 0 || self.s == 0 || self.d == 0 {
            return Err(SyncError::BadParam("m, s and d must be positive"));
        }
        if !self.s.is_multiple_of(u64::from(self.d)) {
            return Err(SyncError::WindowMismatch { s: self.s, d: self.d });
        }
        if !(self.rho.is_finite() && (0.0..1.0).contains(&self.rho)) {
            return Err(SyncError::BadParam("rho must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SyncError {
    #[error("{0}")]
    BadParam(&'static str),
    #[error("s = {s} is not a multiple of d = {d}")]
    WindowMismatch { s: u64, d: u32 },
    #[error("closed form requires rho == 0 (got {rho}); use montecarlo_walltimes")]
    ClosedFormNeedsIid { rho: f64 },
}

/// Blom's approximation of the expected maximum of `m` i.i.d. standard
/// normals: `inv_phi((m - 3/8) / (m + 1/4))`. Exactly 0 for `m == 1`.
pub fn xi_max(m: u32) -> f64 {
    assert!(m >= 1, "xi_max needs m >= 1");
    const ALPHA: f64 = 0.375;
    inv_phi((f64::from(m) - ALPHA) / (f64::from(m) - 2.0 * ALPHA + 1.0))
}

/// Closed-form expected walltimes and synchronization times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedWalltimes {
    pub e_conv: f64,
    pub e_struc: f64,
    pub e_sync_conv: f64,
    pub e_sync_struc: f64,
    /// Exactly `1 / sqrt(d)` under the i.i.d. model.
    pub sync_ratio: f64,
}

/// Expected overall runtimes of the two schemes under the i.i.d. model:
/// `E_conv = S*mu + S*xi_M*sigma`, `E_struc = S*mu + S*xi_M*sigma/sqrt(D)`.
pub fn expected_walltimes(m: &CycleTimeModel) -> Result<ExpectedWalltimes, SyncError> {
    m.validate()?;
    if m.rho != 0.0 {
        return Err(SyncError::ClosedFormNeedsIid { rho: m.rho });
    }
    let s = m.s as f64;
    let xi = xi_max(m.m);
    let d = f64::from(m.d);
    let e_sync_conv = s * xi * m.sigma;
    let e_sync_struc = s * xi * m.sigma / d.sqrt();
    Ok(ExpectedWalltimes {
        e_conv: s * m.mu + e_sync_conv,
        e_struc: s * m.mu + e_sync_struc,
        e_sync_conv,
        e_sync_struc,
        sync_ratio: 1.0 / d.sqrt(),
    })
}

/// Probability that at least one of `m` ranks lands in the upper tail of
/// mass `p`: `1 - (1 - p)^m`.
pub fn max_quantile_probability(p: f64, m: u32) -> f64 {
    assert!((0.0..=1.0).contains(&p), "tail mass must lie in [0, 1]");
    -(f64::from(m) * (-p).ln_1p()).exp_m1()
}

/// One Monte-Carlo replicate of both schemes on a shared cycle-time draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReplicate {
    pub t_conv: f64,
    pub t_struc: f64,
    pub sync_conv: f64,
    pub sync_struc: f64,
    /// CV of the pooled per-cycle times (conventional window).
    pub cv_conv: f64,
    /// CV of the pooled D-lumped window sums (structure-aware window).
    pub cv_struc: f64,
}

/// Mean and standard error of one Monte-Carlo output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

fn estimate(values: impl Iterator<Item = f64> + Clone) -> Estimate {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return Estimate {
            mean,
            std_error: 0.0,
        };
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        mean,
        std_error: (var / n).sqrt(),
    }
}

/// Monte-Carlo walltime estimates with per-replicate detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McWalltimes {
    pub replicates: Vec<McReplicate>,
    pub t_conv: Estimate,
    pub t_struc: Estimate,
    pub sync_conv: Estimate,
    pub sync_struc: Estimate,
    pub cv_conv: Estimate,
    pub cv_struc: Estimate,
    /// Ratio of mean sync times, struc / conv.
    pub sync_ratio: f64,
}

/// Sample the cycle-time process and evaluate both schemes empirically.
///
/// Per rank, `t_{m,s} = mu + rho*(t_{m,s-1} - mu) + sqrt(1-rho^2)*sigma*eps`
/// with a stationary `N(mu, sigma^2)` start, so `rho = 0` degenerates to
/// i.i.d. draws. The conventional walltime sums per-cycle maxima; the
/// structure-aware walltime sums maxima of D-lumped window
/// sums. Synchronization time is the rank-averaged waiting at each window
/// barrier: sum over windows of (max - own), averaged over ranks.
pub fn montecarlo_walltimes(
    model: &CycleTimeModel,
    replicates: u64,
    rng_seed: u64,
) -> Result<McWalltimes, SyncError> {
    model.validate()?;
    if replicates == 0 {
        return Err(SyncError::BadParam("replicates must be >= 1"));
    }
    let reps: Vec<McReplicate> = (0..replicates)
        .into_par_iter()
        .map(|r| one_replicate(model, stream(rng_seed, StreamDomain::Replicate, r)))
        .collect();

    let sync_conv = estimate(reps.iter().map(|r| r.sync_conv));
    let sync_struc = estimate(reps.iter().map(|r| r.sync_struc));
    Ok(McWalltimes {
        t_conv: estimate(reps.iter().map(|r| r.t_conv)),
        t_struc: estimate(reps.iter().map(|r| r.t_struc)),
        sync_ratio: sync_struc.mean / sync_conv.mean,
        cv_conv: estimate(reps.iter().map(|r| r.cv_conv)),
        cv_struc: estimate(reps.iter().map(|r| r.cv_struc)),
        sync_conv,
        sync_struc,
        replicates: reps,
    })
}

fn one_replicate<R: Rng>(model: &CycleTimeModel, mut rng: R) -> McReplicate {
    let m = model.m as usize;
    let s = model.s as usize;
    let d = model.d as usize;
    let n_windows = s / d;
    let innovation = (1.0 - model.rho * model.rho).sqrt() * model.sigma;

    // One rank at a time to keep memory at O(S); per-cycle maxima and
    // window-sum maxima are folded across ranks.
    let mut cycle_max = vec![f64::NEG_INFINITY; s];
    let mut window_max = vec![f64::NEG_INFINITY; n_windows];
    let mut window_lump = vec![0.0f64; n_windows];
    let mut rank_totals = 0.0; // sum over ranks and cycles
    let mut pool_sq = 0.0; // sum of t^2, pooled cycles
    let mut lump_sq = 0.0; // sum of L^2, pooled windows
    for _ in 0..m {
        let mut t_prev = 0.0;
        for (cyc, slot) in cycle_max.iter_mut().enumerate() {
            let eps: f64 = rng.sample(StandardNormal);
            let t = if cyc == 0 {
                model.mu + model.sigma * eps
            } else {
                model.mu + model.rho * (t_prev - model.mu) + innovation * eps
            };
            t_prev = t;
            if t > *slot {
                *slot = t;
            }
            rank_totals += t;
            pool_sq += t * t;
            let w = cyc / d;
            // Window sums need the completed lump; accumulate in place.
            window_lump[w] += t;
        }
        for (w, lump) in window_lump.iter_mut().enumerate() {
            if *lump > window_max[w] {
                window_max[w] = *lump;
            }
            lump_sq += *lump * *lump;
            *lump = 0.0;
        }
    }

    let t_conv: f64 = cycle_max.iter().sum();
    let t_struc: f64 = window_max.iter().sum();
    let mean_rank_total = rank_totals / m as f64;
    // sum_w mean_m(max_w - own) = T_wall - mean over ranks of own total.
    let sync_conv = t_conv - mean_rank_total;
    let sync_struc = t_struc - mean_rank_total;

    let n_pool = (m * s) as f64;
    let mean_t = rank_totals / n_pool;
    let var_t = (pool_sq / n_pool - mean_t * mean_t).max(0.0);
    let n_lump = (m * n_windows) as f64;
    let mean_l = rank_totals / n_lump;
    let var_l = (lump_sq / n_lump - mean_l * mean_l).max(0.0);

    McReplicate {
        t_conv,
        t_struc,
        sync_conv,
        sync_struc,
        cv_conv: var_t.sqrt() / mean_t,
        cv_struc: var_l.sqrt() / mean_l,
    }
}

/// Monte-Carlo estimate of `E[max of m standard normals]` — the oracle for
/// [`xi_max`].
pub fn montecarlo_expected_max(m: u32, replicates: u64, rng_seed: u64) -> f64 {
    assert!(m >= 1 && replicates >= 1);
    const CHUNK: u64 = 4096;
    let n_chunks = replicates.div_ceil(CHUNK);
    let total: f64 = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(rng_seed, StreamDomain::Replicate, c);
            let n = CHUNK.min(replicates - c * CHUNK);
            let mut acc = 0.0;
            for _ in 0..n {
                let mut best = f64::NEG_INFINITY;
                for _ in 0..m {
                    let x: f64 = rng.sample(StandardNormal);
                    if x > best {
                        best = x;
                    }
                }
                acc += best;
            }
            acc
        })
        .sum();
    total / replicates as f64
}

/// Empirical counterpart of [`max_quantile_probability`]: fraction of
/// simulated cycles whose maximum over `m` i.i.d. standard normals exceeds
/// the single-draw upper-tail-mass-`p` quantile.
pub fn montecarlo_max_tail_fraction(p: f64, m: u32, n_cycles: u64, rng_seed: u64) -> f64 {
    assert!((0.0..=1.0).contains(&p) && m >= 1 && n_cycles >= 1);
    let threshold = inv_phi(1.0 - p);
    const CHUNK: u64 = 4096;
    let n_chunks = n_cycles.div_ceil(CHUNK);
    let hits: u64 = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(rng_seed, StreamDomain::Replicate, c);
            let n = CHUNK.min(n_cycles - c * CHUNK);
            let mut acc = 0u64;
            for _ in 0..n {
                let mut best = f64::NEG_INFINITY;
                for _ in 0..m {
                    let x: f64 = rng.sample(StandardNormal);
                    if x > best {
                        best = x;
                    }
                }
                acc += u64::from(best > threshold);
            }
            acc
        })
        .sum();
    hits as f64 / n_cycles as f64
}
