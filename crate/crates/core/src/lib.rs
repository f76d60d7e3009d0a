//! Steady-state throughput efficiency of relayed wireless links.
//!
//! The crate combines four analytical layers, each paired with a sampling
//! counterpart in [`montecarlo`] or in the module itself:
//!
//! - [`fading`]: composite Nakagami-m / lognormal channel and its single
//!   lognormal approximation.
//! - [`interference`] and [`link`]: cumulants of the aggregate interference
//!   from a Poisson field of transmitters (plus self-interference for
//!   full-duplex nodes), SIR and outage.
//! - [`contention`]: generating functions of the binary splitting tree used
//!   for reactive relay selection.
//! - [`semimarkov`]: the transmit / relay / retransmit semi-Markov chain and
//!   its renewal-reward throughput.
//!
//! [`scenario`] wires them together and runs the parameter sweeps;
//! [`config`] reads run files and renders the CSV / JSON outputs used by the
//! `fdrelay` binary.
//!
//! ```
//! use fdrelay::scenario::{evaluate_point, ScenarioConfig};
//!
//! let result = evaluate_point(&ScenarioConfig::default()).unwrap();
//! assert!(result.eta > 0.0 && result.eta <= 1.0);
//! ```

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod contention;
pub mod error;
pub mod fading;
pub mod interference;
pub mod link;
pub mod montecarlo;
pub mod scenario;
pub mod semimarkov;

pub use error::{Error, Result};

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Deterministic generator for one independent stream of a seeded run.
///
/// Replications, Monte Carlo partitions and grid points each take their own
/// `stream` index so results do not depend on thread scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
