//! Per-rank connectivity tables: postsynaptic connection and source tables
//! jointly sorted by source id, and the presynaptic target table produced
//! by a simulated connectivity exchange.
//!
//! The structure-aware scheme keeps two copies of everything, one per
//! pathway (short-range and long-range); the conventional scheme reuses the
//! same two-bucket layout with the long bucket empty so the engine has a
//! single code path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{NetworkSpec, RangeClass};
use crate::partition::{PartitionError, PartitionPlan, Scheme};

/// Communication pathway a synapse is served by. Distinct from
/// [`RangeClass`]: the class is a property of the synapse, the pathway is a
/// property of the scheme. Conventional execution folds both classes into
/// the short pathway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pathway {
    Short = 0,
    Long = 1,
}

impl Pathway {
    pub const ALL: [Pathway; 2] = [Pathway::Short, Pathway::Long];

    pub fn as_str(self) -> &'static str {
        match self {
            Pathway::Short => "short",
            Pathway::Long => "long",
        }
    }
}

/// Bucket a synapse of `class` lands in under `scheme`.
pub fn pathway_for(scheme: Scheme, class: RangeClass) -> Pathway {
    match (scheme, class) {
        (Scheme::Conventional, _) => Pathway::Short,
        (Scheme::StructureAware, RangeClass::Intra) => Pathway::Short,
        (Scheme::StructureAware, RangeClass::Inter) => Pathway::Long,
    }
}

/// One postsynaptic connection: local index of the target neuron on its
/// home rank plus the synaptic delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnEntry {
    pub target_local: u32,
    pub delay_steps: u32,
}

/// Paired connection and source table for one (thread, pathway). The two
/// vectors are parallel and jointly sorted ascending by source id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableSlice {
    pub sources: Vec<u32>,
    pub conns: Vec<ConnEntry>,
}

impl TableSlice {
    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Maximal contiguous run of entries for `source_id`, located by binary
    /// search. Empty slice when the source has no targets here.
    pub fn lookup(&self, source_id: u32) -> &[ConnEntry] {
        let lo = self.sources.partition_point(|&s| s < source_id);
        let hi = self.sources.partition_point(|&s| s <= source_id);
        &self.conns[lo..hi]
    }
}

/// All tables hosted by one rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTables {
    pub rank: u32,
    /// Global ids of the real neurons homed here, ascending. Connection
    /// entries refer to positions in this list.
    pub locals: Vec<u32>,
    /// Indexed `thread * 2 + pathway`.
    slices: Vec<TableSlice>,
    /// Target table: per local source neuron, per pathway, the destination
    /// ranks hosting at least one of its targets — each rank once (spike
    /// compression), ascending.
    targets: Vec<[Vec<u32>; 2]>,
    threads: u32,
}

impl RankTables {
    fn new(rank: u32, locals: Vec<u32>, threads: u32) -> Self {
        let n_local = locals.len();
        Self {
            rank,
            locals,
            slices: vec![TableSlice::default(); threads as usize * 2],
            targets: vec![[Vec::new(), Vec::new()]; n_local],
            threads,
        }
    }

    pub fn threads(&self) -> u32 {
        self.threads
    }

    pub fn slice(&self, thread: u32, pathway: Pathway) -> &TableSlice {
        &self.slices[(thread * 2) as usize + pathway as usize]
    }

    fn slice_mut(&mut self, thread: u32, pathway: Pathway) -> &mut TableSlice {
        &mut self.slices[(thread * 2) as usize + pathway as usize]
    }

    /// Position of `gid` in `locals`, if homed here.
    pub fn local_index(&self, gid: u32) -> Option<u32> {
        self.locals.binary_search(&gid).ok().map(|i| i as u32)
    }

    /// Destination ranks of local source `local` on `pathway`.
    pub fn target_ranks(&self, local: u32, pathway: Pathway) -> &[u32] {
        &self.targets[local as usize][pathway as usize]
    }

    /// Target synapses of `source_id` on `thread`/`pathway`; the count of
    /// non-empty lookups is the irregular-access count.
    pub fn lookup_targets(&self, source_id: u32, thread: u32, pathway: Pathway) -> &[ConnEntry] {
        self.slice(thread, pathway).lookup(source_id)
    }
}

/// Cost accounting of the simulated connectivity exchange that builds the
/// target tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionMetrics {
    /// All-to-all announcement rounds: one for the single conventional
    /// table set, two for the duplicated structure-aware sets.
    pub announcement_rounds: u32,
    /// (source id -> hosting rank) pairs announced across all rounds.
    pub announced_pairs: u64,
    /// Connection entries per pathway, summed over ranks and threads.
    pub entries_per_pathway: [u64; 2],
}

/// Finalized tables for every rank of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSet {
    pub scheme: Scheme,
    pub threads_per_rank: u32,
    pub ranks: Vec<RankTables>,
    pub metrics: ConstructionMetrics,
}

impl TableSet {
    pub fn n_ranks(&self) -> u32 {
        self.ranks.len() as u32
    }
}

#[derive(Debug, Error)]
pub enum TablesError {
    #[error("synapse {index} references frozen neuron {gid}")]
    FrozenSynapse { index: usize, gid: u32 },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Build connection, source and target tables for every rank.
///
/// Every synapse lands exactly once, on the rank and thread hosting its
/// target neuron, in the pathway bucket implied by (scheme, range class).
/// Target tables come from a simulated all-to-all in which each rank
/// announces the (source id -> this rank) pairs it hosts, deduplicated per
/// pathway.
pub fn build_tables(net: &NetworkSpec, plan: &PartitionPlan) -> Result<TableSet, TablesError> {
    plan.validate(net)?;

    let m = plan.n_ranks;
    let t_m = plan.threads_per_rank;
    let mut locals: Vec<Vec<u32>> = vec![Vec::new(); m as usize];
    for gid in 0..plan.n_real {
        locals[plan.home(gid).rank as usize].push(gid);
    }
    let mut ranks: Vec<RankTables> = locals
        .into_iter()
        .enumerate()
        .map(|(r, l)| RankTables::new(r as u32, l, t_m))
        .collect();

    for (i, syn) in net.synapses.iter().enumerate() {
        for &gid in &[syn.source_id, syn.target_id] {
            if net.neurons[gid as usize].frozen {
                return Err(TablesError::FrozenSynapse { index: i, gid });
            }
        }
        let home = plan.home(syn.target_id);
        let pathway = pathway_for(plan.scheme, syn.range_class);
        let rank = &mut ranks[home.rank as usize];
        let target_local = rank
            .local_index(syn.target_id)
            .expect("target is homed on its own rank");
        let slice = rank.slice_mut(home.thread, pathway);
        slice.sources.push(syn.source_id);
        slice.conns.push(ConnEntry {
            target_local,
            delay_steps: syn.delay_steps,
        });
    }

    // Joint finalization sort. Stable on source id; ties keep synapse
    // insertion order, so the layout is deterministic.
    let mut entries_per_pathway = [0u64; 2];
    for rank in &mut ranks {
        for slice in &mut rank.slices {
            let mut order: Vec<u32> = (0..slice.len() as u32).collect();
            order.sort_by_key(|&i| slice.sources[i as usize]);
            slice.sources = order.iter().map(|&i| slice.sources[i as usize]).collect();
            slice.conns = order.iter().map(|&i| slice.conns[i as usize]).collect();
        }
        for (p, &pathway) in Pathway::ALL.iter().enumerate() {
            for t in 0..t_m {
                entries_per_pathway[p] += rank.slice(t, pathway).len() as u64;
            }
        }
    }

    // Simulated connectivity exchange: each rank announces, per pathway,
    // the distinct source ids it hosts targets for.
    let mut announced_pairs = 0u64;
    let mut announcements: Vec<(u32, Pathway, u32)> = Vec::new(); // (source, pathway, hosting rank)
    for rank in &ranks {
        for &pathway in &Pathway::ALL {
            let mut seen: Vec<u32> = Vec::new();
            for t in 0..t_m {
                seen.extend_from_slice(&rank.slice(t, pathway).sources);
            }
            seen.sort_unstable();
            seen.dedup();
            announced_pairs += seen.len() as u64;
            for source in seen {
                announcements.push((source, pathway, rank.rank));
            }
        }
    }
    for (source, pathway, hosting_rank) in announcements {
        let home = plan.home(source);
        let rank = &mut ranks[home.rank as usize];
        let local = rank
            .local_index(source)
            .expect("announced source is a real neuron");
        rank.targets[local as usize][pathway as usize].push(hosting_rank);
    }
    for rank in &mut ranks {
        for lists in &mut rank.targets {
            for list in lists.iter_mut() {
                list.sort_unstable();
                debug_assert!(list.windows(2).all(|w| w[0] != w[1]));
            }
        }
    }

    let announcement_rounds = match plan.scheme {
        Scheme::Conventional => 1,
        Scheme::StructureAware => 2,
    };
    Ok(TableSet {
        scheme: plan.scheme,
        threads_per_rank: t_m,
        ranks,
        metrics: ConstructionMetrics {
            announcement_rounds,
            announced_pairs,
            entries_per_pathway,
        },
    })
}
