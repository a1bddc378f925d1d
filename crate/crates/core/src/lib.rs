//! Simulation and estimation toolkit for multifractional Brownian motion.
//!
//! The crate is organized around a pipeline: synthesize driving noise
//! ([`noise`]), pick a regularity function ([`hurst`]), evaluate the
//! moving-average field and sample paths ([`field`]), then estimate local
//! regularity ([`regularity`]), fractal dimensions ([`fractal`]) and Gaussian
//! diagnostics ([`gauss`]) from the samples.

pub mod error;
pub mod field;
pub mod fractal;
pub mod gauss;
pub mod grid;
pub mod hurst;
pub mod noise;
pub mod quad;
pub mod regularity;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
