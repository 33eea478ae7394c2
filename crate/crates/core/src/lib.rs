//! Deterministic simulator and analytical models for distributed execution
//! of multi-area spiking networks.
//!
//! The crate compares two execution strategies over the same network:
//!
//! * **conventional** — neurons placed round-robin across ranks, one global
//!   spike exchange per simulation cycle;
//! * **structure-aware** — whole areas pinned to ranks, cheap local buffer
//!   swaps every cycle and a global exchange only every D-th cycle, where D
//!   is the ratio of the inter-area to the overall minimum delay.
//!
//! [`model`] defines networks and their generators, [`partition`] the two
//! placement schemes, [`tables`] the connectivity lookup structures,
//! [`engine`] the cycle-accurate run loop, and [`analysis`] the closed-form
//! cost models with their Monte-Carlo counterparts.

pub mod analysis;
pub mod engine;
pub mod model;
pub mod partition;
pub mod report;
pub mod rng;
pub mod tables;
