//! Filtered Poisson process bandits on [0, 1].
//!
//! A decision-maker repeatedly sweeps a prefix [0, y] of the unit interval.
//! Events of a non-homogeneous Poisson process on the swept prefix are each
//! detected with probability γ(y), and the reward is the number of detected
//! events. The crate provides:
//!
//! - [`process`]: intensity and filter models, the objective γΛ and a sampler
//!   for detected events;
//! - [`environment`]: the continuum environment, the discrete filtered
//!   Poisson multi-armed bandit, and pseudo-regret;
//! - [`cif_ucb`]: the CIF-UCB algorithm with adaptive interval splitting;
//! - [`instances`]: lower-bound instance constructors and Poisson KL tools;
//! - [`harness`]: replicated experiments, regret curves, cell tables and a
//!   fixed-grid baseline;
//! - [`cli`] and [`config`]: the `fppb` command-line front end.

pub mod cif_ucb;
pub mod cli;
pub mod config;
pub mod environment;
pub mod error;
pub mod harness;
pub mod instances;
pub mod output;
pub mod process;
pub mod rng;

pub use error::{Error, Result};
