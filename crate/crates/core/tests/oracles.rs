//! Cross-checks between the no-propagate estimators and the reference oracles.

use noprop::baselines::{
    ensemble_response, finite_difference_response, grid_smoothed_response, grid_transfer_response_1d, kernel_smoothed_response,
    EnsembleConfig, FdMode, GridOracleConfig, KernelConfig, NoisePairing,
};
use noprop::estimator::{density_histogram, lag_contributions};
use noprop::*;

fn iso(dim: usize, sigma: f64) -> GaussianNoise {
    GaussianNoise::isotropic(dim, sigma).unwrap()
}

fn close(a: f64, b: f64, k: f64, se: f64) -> bool {
    (a - b).abs() <= k * se
}

fn combined(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

#[test]
fn grid_refinement_is_stable() {
    let coarse = grid_transfer_response_1d(&GridOracleConfig::new(3.0, 0.1).with_bins(1000), &TentMap, &Observable::identity()).unwrap();
    let fine = grid_transfer_response_1d(&GridOracleConfig::new(3.0, 0.1).with_bins(4000), &TentMap, &Observable::identity()).unwrap();
    let tol = 1e-3 * (1.0 + fine.dphi.abs());
    assert!((coarse.dphi - fine.dphi).abs() <= tol, "{} vs {}", coarse.dphi, fine.dphi);
    assert!((coarse.phi_avg - fine.phi_avg).abs() <= tol);
}

#[test]
fn ar1_four_way_concordance() {
    let sys = Ar1Benchmark::new(0.5).unwrap();
    let g = iso(1, 0.1);
    let noise: NoiseModel = g.clone().into();

    let np = estimate_stationary(&sys, &noise, &StationaryConfig::new(0.0, 30, 400_000, 11)).unwrap();
    let fd = finite_difference_response(
        &sys,
        &FdMode::Stationary {
            noise: noise.clone(),
            cfg: StationaryConfig::new(0.0, 0, 400_000, 12),
        },
        0.05,
        NoisePairing::Common,
    )
    .unwrap();
    let ens = ensemble_response(&sys, &EnsembleConfig::new(0.0, 30, 2_000, 13, InitialDistribution::Point(vec![0.0]), g)).unwrap();
    let ker = kernel_smoothed_response(&sys, &noise, &KernelConfig::new(0.05, StationaryConfig::new(0.0, 0, 20_000, 14))).unwrap();

    assert!(close(np.value, 2.0, 4.0, np.std_error), "noprop {} ± {}", np.value, np.std_error);
    assert!(close(fd.value, 2.0, 4.0, fd.std_error.max(1e-3)), "fd {} ± {}", fd.value, fd.std_error);
    assert!((ens.value - 2.0).abs() < 1e-6, "ensemble {}", ens.value);
    assert!(close(ker.value, 2.0, 4.0, ker.std_error), "kernel {} ± {}", ker.value, ker.std_error);
    assert!(close(np.value, ker.value, 4.0, combined(np.std_error, ker.std_error)));
}

#[test]
fn window_truncation_bias_is_bracketed() {
    let sys = Ar1Benchmark::new(0.5).unwrap();
    let noise: NoiseModel = iso(1, 0.1).into();
    let short = estimate_stationary(&sys, &noise, &StationaryConfig::new(0.0, 3, 1_000_000, 21)).unwrap();
    let long = estimate_stationary(&sys, &noise, &StationaryConfig::new(0.0, 10, 1_000_000, 22)).unwrap();
    let t3 = 2.0 * (1.0 - 0.5f64.powi(4));
    let t10 = 2.0 * (1.0 - 0.5f64.powi(11));
    assert!(close(short.value, t3, 4.0, short.std_error), "W=3: {} ± {}", short.value, short.std_error);
    assert!(close(long.value, t10, 4.0, long.std_error), "W=10: {} ± {}", long.value, long.std_error);
    assert!(short.value < long.value);
}

#[test]
fn spin_up_length_does_not_matter() {
    let noise: NoiseModel = iso(1, 0.1).into();
    let a = estimate_stationary(&TentMap, &noise, &StationaryConfig::new(3.0, 7, 100_000, 31).with_spin_up(1000)).unwrap();
    let b = estimate_stationary(&TentMap, &noise, &StationaryConfig::new(3.0, 7, 100_000, 31).with_spin_up(2000)).unwrap();
    assert!(close(a.value, b.value, 2.0, combined(a.std_error, b.std_error)), "{} vs {}", a.value, b.value);
}

#[test]
fn common_noise_beats_independent_noise() {
    let initial = InitialDistribution::Uniform { lo: vec![0.0], hi: vec![1.0] };
    let mut wins = 0;
    for r in 0..10 {
        let cfg = FiniteTimeConfig::new(3.0, 20, 100_000, 40 + r, initial.clone(), iso(1, 0.1));
        let mode = FdMode::Finite(cfg);
        let crn = finite_difference_response(&TentMap, &mode, 0.05, NoisePairing::Common).unwrap();
        let ind = finite_difference_response(&TentMap, &mode, 0.05, NoisePairing::Independent).unwrap();
        if crn.std_error <= ind.std_error {
            wins += 1;
        }
    }
    assert!(wins >= 9, "common noise won only {wins} of 10");
}

#[test]
fn tent_sweep_is_smooth_and_matches_grid() {
    let noise: NoiseModel = iso(1, 0.1).into();
    for (i, gamma) in [2.5, 3.0, 3.5].into_iter().enumerate() {
        let np = estimate_stationary(&TentMap, &noise, &StationaryConfig::new(gamma, 10, 400_000, 50 + i as u64)).unwrap();
        let grid = grid_transfer_response_1d(&GridOracleConfig::new(gamma, 0.1), &TentMap, &Observable::identity()).unwrap();
        assert!(close(np.value, grid.dphi, 4.0, np.std_error), "γ={gamma}: {} ± {} vs {}", np.value, np.std_error, grid.dphi);
        assert!(close(np.phi_avg, grid.phi_avg, 4.0, np.phi_avg_std_error), "γ={gamma}: Φ_avg {} vs {}", np.phi_avg, grid.phi_avg);
    }
}

#[test]
fn chaotic_net_agrees_with_finite_differences() {
    let sys = ChaoticNet::new(4.0);
    let initial = InitialDistribution::Gaussian(iso(9, 1.0));
    let cfg = FiniteTimeConfig::new(0.0, 50, 10_000, 61, initial, iso(9, 0.5)).with_observable(Observable::mean());
    let np = estimate_finite_time(&sys, &cfg).unwrap();
    let fd = finite_difference_response(&sys, &FdMode::Finite(cfg), 0.05, NoisePairing::Common).unwrap();
    assert!(np.value.is_finite() && np.std_error > 0.0);
    assert!(close(np.value, fd.value, 3.0, combined(np.std_error, fd.std_error)), "{} ± {} vs {} ± {}", np.value, np.std_error, fd.value, fd.std_error);
}

#[test]
fn kernel_matches_smoothed_grid_derivative() {
    let noise: NoiseModel = iso(1, 0.1).into();
    let width = 0.1;
    let ker = kernel_smoothed_response(&TentMap, &noise, &KernelConfig::new(width, StationaryConfig::new(3.0, 0, 100_000, 71)).with_samples(400)).unwrap();
    let smooth = grid_smoothed_response(&GridOracleConfig::new(3.0, 0.1).with_bins(1000), &TentMap, &Observable::identity(), width, 41).unwrap();
    assert!(close(ker.value, smooth, 4.0, ker.std_error), "{} ± {} vs {smooth}", ker.value, ker.std_error);
}

#[test]
fn lag_contributions_sum_to_value() {
    let noise: NoiseModel = iso(1, 0.1).into();
    let cfg = StationaryConfig::new(3.0, 7, 50_000, 81);
    let est = estimate_stationary(&TentMap, &noise, &cfg).unwrap();
    let lags = lag_contributions(&TentMap, &noise, &cfg).unwrap();
    assert_eq!(lags.len(), 8);
    let total: f64 = lags.iter().sum();
    assert!((total - est.value).abs() <= 1e-9 * (1.0 + est.value.abs()));
}

#[test]
fn histogram_is_a_probability_vector() {
    let noise: NoiseModel = iso(1, 0.1).into();
    let cfg = StationaryConfig::new(3.0, 0, 100_000, 91);
    assert_eq!(density_histogram(&TentMap, &noise, &cfg, 1).unwrap(), vec![1.0]);
    let hist = density_histogram(&TentMap, &noise, &cfg, 50).unwrap();
    let grid = grid_transfer_response_1d(&GridOracleConfig::new(3.0, 0.1).with_bins(1000), &TentMap, &Observable::identity()).unwrap();
    let coarse: Vec<f64> = grid.density.chunks(20).map(|c| c.iter().sum::<f64>()).collect();
    let tv: f64 = hist.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(tv < 0.03, "TV {tv}");
}
