//! Linear response of random dynamical systems `X_{n+1} = f_γ(X_n) + Y_{n+1}`.
//!
//! The no-propagate estimators in [`estimator`] differentiate only the noise
//! density, never the map, so they are unaffected by gradient explosion in
//! chaotic systems. [`baselines`] holds independent reference computations
//! used to validate them.

pub mod baselines;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod noise;
pub mod observable;
pub mod parallel;
pub mod rng;
pub mod stats;
pub mod systems;

pub use error::{Error, Result};
pub use estimator::{
    estimate_finite_time, estimate_stationary, FiniteTimeConfig, InitialDistribution, MeanEstimate, ResponseEstimate,
    StationaryConfig,
};
pub use noise::{GaussianNoise, NoiseField, NoiseModel};
pub use observable::Observable;
pub use rng::RngStream;
pub use systems::{Ar1Benchmark, BuiltinSystem, ChaoticNet, DynamicalSystem, SystemSpec, TentMap};

/// Crate version plus the `git describe` of the build, when available.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("NOPROP_GIT_DESCRIBE"));
