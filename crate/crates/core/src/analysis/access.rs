//! Irregular (first-synapse) memory-access fractions: the closed-form
//! model for both placement schemes and the brute-force oracle that counts
//! access groups on an instantiated network.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::NetworkSpec;
use crate::partition::PartitionPlan;
use crate::tables::{pathway_for, Pathway};

/// Parameters of the access model. All quantities are per the weak-scaling
/// convention: `n = m * n_m`, `t = m * t_m`, `k_n = k_intra + k_inter`.
/// The per-thread count `n_t = n / t` need not be integral (130000 neurons
/// over 48 threads is a reference point here); it enters the formulas as
/// the average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessModelParams {
    pub n: u64,
    pub n_m: u64,
    pub k_n: u64,
    pub k_intra: u64,
    pub k_inter: u64,
    pub m: u64,
    pub t_m: u64,
}

impl AccessModelParams {
    /// Build a consistent parameter set from the per-rank quantities.
    pub fn from_per_rank(m: u64, t_m: u64, n_m: u64, k_intra: u64, k_inter: u64) -> Self {
        Self {
            n: m * n_m,
            n_m,
            k_n: k_intra + k_inter,
            k_intra,
            k_inter,
            m,
            t_m,
        }
    }

    pub fn t(&self) -> u64 {
        self.m * self.t_m
    }

    /// Mean neurons per thread.
    pub fn n_t(&self) -> f64 {
        self.n as f64 / self.t() as f64
    }

    pub fn validate(&self) -> Result<(), AccessError> {
        if self.n == 0 || self.n_m == 0 || self.k_n == 0 || self.m == 0 || self.t_m == 0 {
            return Err(AccessError::BadParam("all counts must be positive"));
        }
        if self.n != self.m * self.n_m {
            return Err(AccessError::BadParam("n must equal m * n_m"));
        }
        if self.k_n != self.k_intra + self.k_inter {
            return Err(AccessError::BadParam("k_n must equal k_intra + k_inter"));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AccessError {
    #[error("{0}")]
    BadParam(&'static str),
    #[error("structure-aware formula needs m >= 2 (inter-area pool is empty)")]
    SingleRank,
}

/// `1 - (1 - 1/pool)^draws`, evaluated stably for huge exponents.
fn hit_probability(pool: u64, draws: f64) -> f64 {
    -(draws * (-1.0 / pool as f64).ln_1p()).exp_m1()
}

/// Fraction of irregular accesses under round-robin placement:
/// `p_target = 1 - (1 - 1/n)^(n_t * k_n)`, `f = p_target * t / k_n`.
///
/// The raw model value is returned unclamped; degenerate parameter sets can
/// push it above 1.
pub fn f_irr_conventional(p: &AccessModelParams) -> Result<f64, AccessError> {
    p.validate()?;
    let p_target = hit_probability(p.n, p.n_t() * p.k_n as f64);
    Ok(p_target * p.t() as f64 / p.k_n as f64)
}

/// Fraction of irregular accesses under area-to-rank placement:
/// `p_intra = 1 - (1 - 1/n_m)^(n_t * k_intra)`,
/// `p_inter = 1 - (1 - 1/(n - n_m))^(n_t * k_inter)`,
/// `f = (p_intra * t_m + p_inter * t_m * (m - 1)) / k_n`.
pub fn f_irr_structure_aware(p: &AccessModelParams) -> Result<f64, AccessError> {
    p.validate()?;
    if p.m < 2 {
        return Err(AccessError::SingleRank);
    }
    let p_intra = hit_probability(p.n_m, p.n_t() * p.k_intra as f64);
    let p_inter = hit_probability(p.n - p.n_m, p.n_t() * p.k_inter as f64);
    let t_m = p.t_m as f64;
    Ok((p_intra * t_m + p_inter * t_m * (p.m - 1) as f64) / p.k_n as f64)
}

/// Brute-force access-group counts for one scheme on a concrete network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceAccess {
    /// Distinct non-empty (rank, thread, pathway) groups, per pathway.
    pub groups: [u64; 2],
    /// Outgoing synapses per pathway.
    pub synapses: [u64; 2],
}

impl BruteForceAccess {
    /// Combined irregular fraction: groups / synapses over both pathways.
    pub fn f_combined(&self) -> f64 {
        let g: u64 = self.groups.iter().sum();
        let s: u64 = self.synapses.iter().sum();
        g as f64 / s as f64
    }

    pub fn f_pathway(&self, p: Pathway) -> f64 {
        self.groups[p as usize] as f64 / self.synapses[p as usize] as f64
    }
}

/// Count, for every neuron, the distinct (rank, thread, pathway) groups its
/// outgoing synapses fall into under `plan` — the irregular accesses a
/// single spike of that neuron costs. Independent of the table structures:
/// scans the synapse list directly.
pub fn f_irr_bruteforce(net: &NetworkSpec, plan: &PartitionPlan) -> BruteForceAccess {
    let mut groups = [0u64; 2];
    let mut synapses = [0u64; 2];
    // (rank, thread, pathway) key per source; sources' synapses are not
    // contiguous, so collect per-neuron sets.
    let mut per_source: Vec<Vec<(u32, u32, Pathway)>> =
        vec![Vec::new(); net.n_neurons() as usize];
    for syn in &net.synapses {
        let home = plan.home(syn.target_id);
        let pathway = pathway_for(plan.scheme, syn.range_class);
        synapses[pathway as usize] += 1;
        per_source[syn.source_id as usize].push((home.rank, home.thread, pathway));
    }
    for keys in &mut per_source {
        keys.sort_unstable();
        keys.dedup();
        for &(_, _, pathway) in keys.iter() {
            groups[pathway as usize] += 1;
        }
    }
    BruteForceAccess { groups, synapses }
}
