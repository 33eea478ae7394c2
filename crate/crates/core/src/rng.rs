//! Deterministic per-entity random streams.
//!
//! Every sampled quantity is drawn from a stream keyed by
//! `(run seed, domain, entity id)` so that generation can be parallelized
//! over entities without changing the result.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Namespaces for independent sub-streams of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamDomain {
    AreaSize = 1,
    AreaRate = 2,
    NeuronPhase = 3,
    SynapseDraw = 4,
    Replicate = 5,
    Schedule = 6,
}

/// Build the RNG for one `(seed, domain, entity)` triple.
pub fn stream(seed: u64, domain: StreamDomain, entity: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = domain as u8;
    key[9..17].copy_from_slice(&entity.to_le_bytes());
    // Remaining bytes stay zero; ChaCha treats the full array as the key.
    ChaCha12Rng::from_seed(key)
}
