//! Closed-form performance models and their independent oracles.
//!
//! [`sync`] covers the synchronization-time order statistics of the two
//! schemes; [`access`] covers the irregular-memory-access fractions;
//! [`normal`] supplies the standard normal quantile both rely on.

pub mod access;
pub mod normal;
pub mod sync;

pub use access::{
    f_irr_bruteforce, f_irr_conventional, f_irr_structure_aware, AccessError, AccessModelParams,
    BruteForceAccess,
};
pub use normal::inv_phi;
pub use sync::{
    expected_walltimes, max_quantile_probability, montecarlo_expected_max,
    montecarlo_max_tail_fraction, montecarlo_walltimes, xi_max, CycleTimeModel, Estimate,
    ExpectedWalltimes, McReplicate, McWalltimes, SyncError,
};
