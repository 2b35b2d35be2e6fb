//! chaoslink-core: a pseudo-chaotic stream-cipher testbed.
//!
//! The key sequence generator is a 3D Lorenz map discretized onto 17-bit
//! natural-number registers, so a software step is bit-exact against a
//! fixed-width hardware datapath. On top of the generator sit a byte XOR
//! stream cipher, a transmitter/receiver link simulator with mismatch
//! sweeps, a five-test randomness battery with three comparison generators,
//! and analysis instruments (autocovariance, DFT spectrum, cycle length,
//! trajectory exports).

pub mod analysis;
pub mod cipher;
pub mod error;
pub mod link;
pub mod map;
pub mod stats;

pub use cipher::{KeystreamConfig, KeystreamGenerator, DEFAULT_SEED};
pub use error::{Error, Result};
pub use link::{run_link, BitOrder, LinkConfig, LinkReport};
pub use map::{ChaoticState, ContinuousParams, MapCoefficients, PerturbationConfig, TransformParams};
