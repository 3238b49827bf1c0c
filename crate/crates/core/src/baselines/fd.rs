//! Central finite differences of Monte-Carlo averages, `(Φ̂(γ+Δ) - Φ̂(γ-Δ)) / 2Δ`.
//!
//! With [`NoisePairing::Common`] both sides consume identical noise streams,
//! so most of the sampling noise cancels in the paired differences.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimator::finite::{simulate_path, PathBuffers};
use crate::estimator::stationary::Orbit;
use crate::estimator::{FiniteTimeConfig, StationaryConfig};
use crate::noise::NoiseModel;
use crate::parallel::run_chunked;
use crate::rng::derive_seed;
use crate::stats::{BatchMeans, MomentAccumulator};
use crate::systems::DynamicalSystem;

/// Default `Δγ` for Monte-Carlo differences.
pub const DEFAULT_MC_DELTA_GAMMA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePairing {
    /// Common random numbers.
    #[default]
    Common,
    Independent,
}

#[derive(Debug, Clone)]
pub enum FdMode {
    /// Independent paths of horizon `T`.
    Finite(FiniteTimeConfig),
    /// Two long orbits.
    Stationary { noise: NoiseModel, cfg: StationaryConfig },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Midpoint `(Φ̂(γ+Δ) + Φ̂(γ-Δ)) / 2`, an `O(Δ²)` proxy for `Φ_avg(γ)`.
    pub phi_avg: f64,
    pub phi_avg_std_error: f64,
}

pub fn finite_difference_response(
    sys: &dyn DynamicalSystem,
    mode: &FdMode,
    delta_gamma: f64,
    pairing: NoisePairing,
) -> Result<FdEstimate> {
    if !(delta_gamma > 0.0 && delta_gamma.is_finite()) {
        return Err(invalid("delta_gamma", format!("must be positive, got {delta_gamma}")));
    }
    match mode {
        FdMode::Finite(cfg) => finite_fd(sys, cfg, delta_gamma, pairing),
        FdMode::Stationary { noise, cfg } => stationary_fd(sys, noise, cfg, delta_gamma, pairing),
    }
}

fn minus_seed(seed: u64, pairing: NoisePairing) -> u64 {
    match pairing {
        NoisePairing::Common => seed,
        NoisePairing::Independent => derive_seed(seed, 0x5eed),
    }
}

fn finite_fd(sys: &dyn DynamicalSystem, cfg: &FiniteTimeConfig, delta: f64, pairing: NoisePairing) -> Result<FdEstimate> {
    cfg.validate(sys)?;
    let mut minus_cfg = cfg.clone();
    minus_cfg.seed = minus_seed(cfg.seed, pairing);
    let dim_t = sys.dim(cfg.steps);
    let chunks = run_chunked(cfg.paths, cfg.threads, |range| {
        let mut buf = PathBuffers::new(sys, cfg.steps);
        let mut out = Vec::with_capacity(range.len());
        for l in range {
            simulate_path(sys, cfg, cfg.gamma + delta, l, &mut buf, |_, _| {})?;
            let plus = cfg.observable.eval(buf.state(dim_t));
            simulate_path(sys, &minus_cfg, cfg.gamma - delta, l, &mut buf, |_, _| {})?;
            let minus = cfg.observable.eval(buf.state(dim_t));
            out.push((plus, minus));
        }
        Ok(out)
    })?;
    let mut diff = MomentAccumulator::new();
    let mut mid = MomentAccumulator::new();
    for (p, m) in chunks.into_iter().flatten() {
        diff.push_unchecked((p - m) / (2.0 * delta));
        mid.push_unchecked(0.5 * (p + m));
    }
    Ok(FdEstimate {
        value: diff.mean(),
        std_error: diff.std_error(),
        phi_avg: mid.mean(),
        phi_avg_std_error: mid.std_error(),
    })
}

fn stationary_fd(
    sys: &dyn DynamicalSystem,
    noise: &NoiseModel,
    cfg: &StationaryConfig,
    delta: f64,
    pairing: NoisePairing,
) -> Result<FdEstimate> {
    cfg.validate(sys, noise)?;
    let mut plus = Orbit::new(sys, noise, cfg.gamma + delta, cfg.seed);
    let mut minus = Orbit::new(sys, noise, cfg.gamma - delta, minus_seed(cfg.seed, pairing));
    plus.spin_up(cfg.spin_up)?;
    minus.spin_up(cfg.spin_up)?;
    let mut diff = MomentAccumulator::new();
    let mut mid = MomentAccumulator::new();
    let mut diff_b = BatchMeans::new(cfg.length, cfg.batches)?;
    let mut mid_b = BatchMeans::new(cfg.length, cfg.batches)?;
    for i in 0..cfg.length {
        plus.advance(false)?;
        minus.advance(false)?;
        let (p, m) = (cfg.observable.eval(plus.state()), cfg.observable.eval(minus.state()));
        let d = (p - m) / (2.0 * delta);
        diff.push_unchecked(d);
        diff_b.push(i, d);
        mid.push_unchecked(0.5 * (p + m));
        mid_b.push(i, 0.5 * (p + m));
    }
    Ok(FdEstimate {
        value: diff.mean(),
        std_error: diff_b.std_error(),
        phi_avg: mid.mean(),
        phi_avg_std_error: mid_b.std_error(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::InitialDistribution;
    use crate::noise::GaussianNoise;
    use crate::systems::{Ar1Benchmark, SystemSpec, TentMap};

    fn noise(sigma: f64) -> NoiseModel {
        GaussianNoise::isotropic(1, sigma).unwrap().into()
    }

    #[test]
    fn ar1_stationary_fd() {
        let sys = Ar1Benchmark::new(0.5).unwrap();
        for gamma in [-1.0, 0.0, 2.0] {
            let mode = FdMode::Stationary {
                noise: noise(0.1),
                cfg: StationaryConfig::new(gamma, 0, 100_000, 3),
            };
            let est = finite_difference_response(&sys, &mode, 0.05, NoisePairing::Common).unwrap();
            assert!((est.value - 2.0).abs() <= 4.0 * est.std_error + 1e-9, "{est:?}");
            assert!((est.phi_avg - 2.0 * gamma).abs() <= 4.0 * est.phi_avg_std_error);
        }
    }

    #[test]
    fn ar1_finite_fd() {
        let sys = Ar1Benchmark::new(0.5).unwrap();
        let cfg = FiniteTimeConfig::new(0.0, 30, 10_000, 4, InitialDistribution::Point(vec![0.0]), noise(0.1));
        let est = finite_difference_response(&sys, &FdMode::Finite(cfg), 0.05, NoisePairing::Common).unwrap();
        // Linear dynamics with common noise: every paired difference is the same number.
        let expect = (1.0 - 0.5f64.powi(30)) / 0.5;
        assert!((est.value - expect).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn gamma_free_system_cancels() {
        let sys = SystemSpec::new("frozen", 1, |_, _, x| vec![(2.0 * x[0]).sin()], |_, _, _| vec![0.0]);
        let mode = FdMode::Stationary {
            noise: noise(0.2),
            cfg: StationaryConfig::new(0.0, 0, 10_000, 5),
        };
        let est = finite_difference_response(&sys, &mode, 0.05, NoisePairing::Common).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let mode = FdMode::Stationary {
            noise: noise(0.1),
            cfg: StationaryConfig::new(3.0, 0, 1000, 5),
        };
        assert!(finite_difference_response(&TentMap, &mode, 0.0, NoisePairing::Common).is_err());
    }

    #[test]
    fn independent_pairing_differs() {
        let sys = Ar1Benchmark::new(0.5).unwrap();
        let mode = FdMode::Stationary {
            noise: noise(0.1),
            cfg: StationaryConfig::new(0.0, 0, 10_000, 6),
        };
        let c = finite_difference_response(&sys, &mode, 0.05, NoisePairing::Common).unwrap();
        let i = finite_difference_response(&sys, &mode, 0.05, NoisePairing::Independent).unwrap();
        assert!(c.std_error < i.std_error);
    }
}
