//! Placement of neurons onto ranks and threads.
//!
//! Both schemes serve the same network; they differ only in which rank and
//! thread own each neuron and in whether ghost slots pad the ranks to a
//! common size. Plans are value objects: building one never touches the
//! engine, and a plan can be serialized and inspected on its own.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AreaIndex, ModelError, NetworkSpec};

/// Execution strategy a plan was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Conventional,
    StructureAware,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Conventional => "conventional",
            Scheme::StructureAware => "structure_aware",
        }
    }
}

/// Home of one neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankThread {
    pub rank: u32,
    pub thread: u32,
}

/// A complete placement. `assignment[gid]` is the home of neuron `gid`;
/// ghost ids (>= `n_real`) pad smaller ranks in the structure-aware scheme
/// and are never updated or connected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub scheme: Scheme,
    pub n_ranks: u32,
    pub threads_per_rank: u32,
    /// Cycles between global exchanges for this plan. 1 for conventional.
    pub exchange_period: u32,
    /// Number of real network neurons; ids beyond this are ghosts.
    pub n_real: u32,
    pub assignment: Vec<RankThread>,
}

impl PartitionPlan {
    pub fn n_total(&self) -> u32 {
        self.assignment.len() as u32
    }

    pub fn n_ghost(&self) -> u32 {
        self.n_total() - self.n_real
    }

    pub fn home(&self, gid: u32) -> RankThread {
        self.assignment[gid as usize]
    }

    pub fn is_ghost(&self, gid: u32) -> bool {
        gid >= self.n_real
    }

    /// Fraction of all slots that are ghost padding.
    pub fn frozen_fraction(&self) -> f64 {
        f64::from(self.n_ghost()) / f64::from(self.n_total())
    }

    /// Real (non-ghost) neurons homed on `rank`, in gid order.
    pub fn real_neurons_on_rank(&self, rank: u32) -> Vec<u32> {
        (0..self.n_real)
            .filter(|&gid| self.assignment[gid as usize].rank == rank)
            .collect()
    }

    /// Structural invariant scan, safe on deserialized input.
    pub fn validate(&self, net: &NetworkSpec) -> Result<(), PartitionError> {
        if self.n_ranks == 0 || self.threads_per_rank == 0 || self.exchange_period == 0 {
            return Err(PartitionError::ZeroShape);
        }
        if self.n_real != net.n_neurons() {
            return Err(PartitionError::RealCountMismatch {
                plan: self.n_real,
                network: net.n_neurons(),
            });
        }
        if (self.assignment.len() as u64) < u64::from(self.n_real) {
            return Err(PartitionError::AssignmentTooShort {
                len: self.assignment.len(),
                n_real: self.n_real,
            });
        }
        if !net.grid.delay_ratio().is_multiple_of(self.exchange_period) {
            return Err(PartitionError::PeriodNotDivisor {
                period: self.exchange_period,
                delay_ratio: net.grid.delay_ratio(),
            });
        }
        for (gid, home) in self.assignment.iter().enumerate() {
            if home.rank >= self.n_ranks || home.thread >= self.threads_per_rank {
                return Err(PartitionError::HomeOutOfRange {
                    gid: gid as u32,
                    rank: home.rank,
                    thread: home.thread,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("n_ranks, threads_per_rank and exchange_period must be positive")]
    ZeroShape,
    #[error("plan covers {plan} real neurons but the network has {network}")]
    RealCountMismatch { plan: u32, network: u32 },
    #[error("assignment length {len} is below the real neuron count {n_real}")]
    AssignmentTooShort { len: usize, n_real: u32 },
    #[error("exchange period {period} does not divide the delay ratio {delay_ratio}")]
    PeriodNotDivisor { period: u32, delay_ratio: u32 },
    #[error("neuron {gid} homed at rank {rank} thread {thread}, outside the plan shape")]
    HomeOutOfRange { gid: u32, rank: u32, thread: u32 },
    #[error("structure-aware placement needs one rank per area: {n_areas} areas, {n_ranks} ranks")]
    RankCountMismatch { n_areas: u32, n_ranks: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl PartitionPlan {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str, net: &NetworkSpec) -> Result<Self, PartitionError> {
        let plan: PartitionPlan = serde_json::from_str(s)?;
        plan.validate(net)?;
        Ok(plan)
    }
}

/// Round-robin placement over `n_ranks * threads_per_rank` virtual
/// processes: neuron `gid` goes to vp `gid % (M*T)`, i.e. rank
/// `vp / T`, thread `vp % T`. No ghosts.
pub fn plan_round_robin(
    net: &NetworkSpec,
    n_ranks: u32,
    threads_per_rank: u32,
) -> Result<PartitionPlan, PartitionError> {
    if n_ranks == 0 || threads_per_rank == 0 {
        return Err(PartitionError::ZeroShape);
    }
    let n_vp = u64::from(n_ranks) * u64::from(threads_per_rank);
    let n = net.n_neurons();
    let assignment = (0..n)
        .map(|gid| {
            let vp = u64::from(gid) % n_vp;
            RankThread {
                rank: (vp / u64::from(threads_per_rank)) as u32,
                thread: (vp % u64::from(threads_per_rank)) as u32,
            }
        })
        .collect();
    Ok(PartitionPlan {
        scheme: Scheme::Conventional,
        n_ranks,
        threads_per_rank,
        exchange_period: 1,
        n_real: n,
        assignment,
    })
}

/// Area-to-rank placement with the network's full delay ratio as the
/// global-exchange period.
pub fn plan_structure_aware(
    net: &NetworkSpec,
    n_ranks: u32,
    threads_per_rank: u32,
) -> Result<PartitionPlan, PartitionError> {
    plan_structure_aware_with_period(net, n_ranks, threads_per_rank, net.grid.delay_ratio())
}

/// Area-to-rank placement with an explicit global-exchange period. The
/// period must divide the delay ratio; period 1 yields the intermediate
/// strategy that keeps the placement but exchanges globally every cycle.
pub fn plan_structure_aware_with_period(
    net: &NetworkSpec,
    n_ranks: u32,
    threads_per_rank: u32,
    exchange_period: u32,
) -> Result<PartitionPlan, PartitionError> {
    if n_ranks == 0 || threads_per_rank == 0 || exchange_period == 0 {
        return Err(PartitionError::ZeroShape);
    }
    if n_ranks != net.n_areas() {
        return Err(PartitionError::RankCountMismatch {
            n_areas: net.n_areas(),
            n_ranks,
        });
    }
    if !net.grid.delay_ratio().is_multiple_of(exchange_period) {
        return Err(PartitionError::PeriodNotDivisor {
            period: exchange_period,
            delay_ratio: net.grid.delay_ratio(),
        });
    }
    let index: AreaIndex = net.area_index()?;
    let n = net.n_neurons();
    let max_size = (0..net.n_areas()).map(|a| index.size(a)).max().unwrap_or(0);

    // Real neurons first: area a on rank a, threads round-robin within the
    // area in gid order.
    let mut assignment = Vec::with_capacity((u64::from(max_size) * u64::from(n_ranks)) as usize);
    for gid in 0..n {
        let area = index.area_of(gid);
        let local = gid - index.range(area).start;
        assignment.push(RankThread {
            rank: area,
            thread: local % threads_per_rank,
        });
    }
    // Ghost padding: bring every rank up to the largest area size. Ghost
    // ids are synthetic (>= n) and keep the same thread striping.
    for area in 0..net.n_areas() {
        let size = index.size(area);
        for local in size..max_size {
            assignment.push(RankThread {
                rank: area,
                thread: local % threads_per_rank,
            });
        }
    }
    Ok(PartitionPlan {
        scheme: Scheme::StructureAware,
        n_ranks,
        threads_per_rank,
        exchange_period,
        n_real: n,
        assignment,
    })
}
