//! Simulation and learning core for a RIS-assisted multi-BS mmWave downlink.
//!
//! The crate is `no_std` with `alloc`. The `std` feature (on by default)
//! only enables runtime CPU detection in the matrix kernels.

#![no_std]
// NaN-rejecting `!(x > 0.0)` checks and index loops over matched arrays are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod baselines;
pub mod channel;
pub mod config;
pub mod env;
pub mod error;
pub mod linalg;
pub mod math;
pub mod network;
pub mod nn;
pub mod ris;
pub mod sac;

pub use config::{DirectLink, EnvConfig, Flavor, NetworkConfig, PathLossParams};
pub use error::{Error, Result};
