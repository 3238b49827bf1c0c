//! No-propagate estimators of parameter derivatives of averaged observables.

pub(crate) mod finite;
pub(crate) mod stationary;

pub use finite::{estimate_finite_time, finite_score_means, pushforward_average, FiniteTimeConfig, InitialDistribution};
pub use stationary::{
    density_histogram, estimate_stationary, lag_contributions, stationary_average, stationary_score_mean, StationaryConfig,
    DEFAULT_BATCHES, DEFAULT_SPIN_UP,
};

use serde::{Deserialize, Serialize};

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// Finite horizon `T` over independent sample paths.
    Finite { steps: usize },
    /// Single orbit with decorrelation window `W` after `M_pre` spin-up steps.
    Stationary { window: usize, spin_up: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseEstimate {
    pub gamma: f64,
    /// Estimated `δ Φ_avg`.
    pub value: f64,
    pub std_error: f64,
    pub phi_avg: f64,
    pub phi_avg_std_error: f64,
    /// Sample paths (finite) or orbit window length (stationary).
    pub n_samples: u64,
    pub seed: u64,
    pub window: Window,
    /// Per-lag contributions (stationary only); they sum to `value`.
    pub lags: Vec<f64>,
    pub lag_std_errors: Vec<f64>,
    /// Mean absolute value of the per-sample integrand.
    pub mean_abs_integrand: f64,
}
