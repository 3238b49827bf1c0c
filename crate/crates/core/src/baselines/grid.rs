//! Transfer-operator discretization for 1-D systems on the circle.
//!
//! Bin `i` of `N` has midpoint `(i + 1/2)/N`. The transition probability from
//! bin `i` to bin `j` is the wrapped noise density at `x_j - f_γ(x_i)` times
//! the bin width, renormalized so every row sums to one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::noise::std_normal_pdf;
use crate::observable::Observable;
use crate::systems::{DynamicalSystem, PhaseSpace};

/// Direct wrap summation below this `σ`, Fourier series above.
const FOURIER_SIGMA: f64 = 0.5;
const WRAP_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOracleConfig {
    pub bins: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub delta_gamma: f64,
    /// L¹ tolerance for power iteration.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl GridOracleConfig {
    pub fn new(gamma: f64, sigma: f64) -> Self {
        Self {
            bins: 2000,
            gamma,
            sigma,
            delta_gamma: 1e-3,
            tolerance: 1e-12,
            max_iterations: 100_000,
        }
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 100 {
            return Err(invalid("bins", format!("need at least 100, got {}", self.bins)));
        }
        if !(self.delta_gamma > 0.0 && self.delta_gamma.is_finite()) {
            return Err(invalid("delta_gamma", "must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", "must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Density of `Y mod 1` for `Y ~ N(0, σ²)`, evaluated at `u`.
pub fn wrapped_gaussian(u: f64, sigma: f64) -> f64 {
    let u = u - u.floor();
    if sigma < FOURIER_SIGMA {
        let reach = (WRAP_SIGMAS * sigma).ceil() as i64 + 1;
        let mut p = 0.0;
        for k in -reach..=reach {
            p += std_normal_pdf((u + k as f64) / sigma);
        }
        p / sigma
    } else {
        let mut p = 1.0;
        for k in 1.. {
            let k = k as f64;
            let a = (-2.0 * PI * PI * k * k * sigma * sigma).exp();
            if a < 1e-17 {
                break;
            }
            p += 2.0 * a * (2.0 * PI * k * u).cos();
        }
        p
    }
}

/// Dense row-stochastic matrix, row-major.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    bins: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.bins..(i + 1) * self.bins]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.bins + j]
    }

    /// `h ↦ hP` for a row vector of bin masses.
    fn push_forward(&self, h: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &hi) in h.iter().enumerate() {
            if hi == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.row(i)) {
                *o += hi * p;
            }
        }
    }
}

fn midpoint(i: usize, bins: usize) -> f64 {
    (i as f64 + 0.5) / bins as f64
}

fn check_circle_1d(sys: &dyn DynamicalSystem) -> Result<()> {
    if sys.dim(0) != 1 || sys.phase_space() != PhaseSpace::UnitCircle || !sys.is_time_homogeneous() {
        return Err(Error::Unsupported(format!(
            "grid oracle needs a 1-D time-homogeneous system on the circle, got {}",
            sys.name()
        )));
    }
    Ok(())
}

pub fn transition_matrix(sys: &dyn DynamicalSystem, gamma: f64, sigma: f64, bins: usize) -> Result<TransitionMatrix> {
    check_circle_1d(sys)?;
    if bins == 0 {
        return Err(invalid("bins", "must be positive"));
    }
    let width = 1.0 / bins as f64;
    let mut data = vec![0.0; bins * bins];
    let mut z = [0.0];
    for i in 0..bins {
        sys.step_into(gamma, 0, &[midpoint(i, bins)], &mut z);
        let fx = z[0];
        if !fx.is_finite() {
            return Err(Error::NonFinite { what: "grid map image", step: i });
        }
        let row = &mut data[i * bins..(i + 1) * bins];
        let mut total = 0.0;
        for (j, r) in row.iter_mut().enumerate() {
            *r = wrapped_gaussian(midpoint(j, bins) - fx, sigma) * width;
            total += *r;
        }
        for r in row.iter_mut() {
            *r /= total;
        }
    }
    Ok(TransitionMatrix { bins, data })
}

/// Bin masses of the stationary density, by power iteration from uniform.
pub fn stationary_density(p: &TransitionMatrix, tolerance: f64, max_iterations: usize) -> Result<Vec<f64>> {
    let n = p.bins;
    let mut h = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iterations {
        p.push_forward(&h, &mut next);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = h.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut h, &mut next);
        if residual < tolerance {
            return Ok(h);
        }
    }
    Err(Error::NotConverged { iterations: max_iterations, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResponse {
    pub phi_avg: f64,
    pub dphi: f64,
    /// Stationary bin masses at `γ`.
    pub density: Vec<f64>,
}

fn grid_average(cfg: &GridOracleConfig, sys: &dyn DynamicalSystem, phi: &[f64], gamma: f64) -> Result<(f64, Vec<f64>)> {
    let p = transition_matrix(sys, gamma, cfg.sigma, cfg.bins)?;
    let h = stationary_density(&p, cfg.tolerance, cfg.max_iterations)?;
    let avg = h.iter().zip(phi).map(|(a, b)| a * b).sum();
    Ok((avg, h))
}

fn observable_on_grid(bins: usize, observable: &Observable) -> Result<Vec<f64>> {
    observable.check_dim(1)?;
    Ok((0..bins).map(|i| observable.eval(&[midpoint(i, bins)])).collect())
}

pub fn grid_transfer_response_1d(cfg: &GridOracleConfig, sys: &dyn DynamicalSystem, observable: &Observable) -> Result<GridResponse> {
    cfg.validate()?;
    check_circle_1d(sys)?;
    let phi = observable_on_grid(cfg.bins, observable)?;
    let (phi_avg, density) = grid_average(cfg, sys, &phi, cfg.gamma)?;
    let (plus, _) = grid_average(cfg, sys, &phi, cfg.gamma + cfg.delta_gamma)?;
    let (minus, _) = grid_average(cfg, sys, &phi, cfg.gamma - cfg.delta_gamma)?;
    Ok(GridResponse {
        phi_avg,
        dphi: (plus - minus) / (2.0 * cfg.delta_gamma),
        density,
    })
}

/// `∫ Φ_avg(γ+ξ) (ξ/η²) η(ξ) dξ` for Gaussian `η` of width `width`, by the
/// trapezoid rule on `nodes` points over `±6η`.
pub fn grid_smoothed_response(
    cfg: &GridOracleConfig,
    sys: &dyn DynamicalSystem,
    observable: &Observable,
    width: f64,
    nodes: usize,
) -> Result<f64> {
    cfg.validate()?;
    check_circle_1d(sys)?;
    if !(width > 0.0) {
        return Err(invalid("width", "must be positive"));
    }
    if nodes < 3 {
        return Err(invalid("nodes", "need at least 3"));
    }
    let phi = observable_on_grid(cfg.bins, observable)?;
    let step = 12.0 / (nodes - 1) as f64;
    let mut acc = 0.0;
    for k in 0..nodes {
        let u = -6.0 + k as f64 * step;
        let (avg, _) = grid_average(cfg, sys, &phi, cfg.gamma + u * width)?;
        let edge = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
        acc += edge * avg * u / width * std_normal_pdf(u);
    }
    Ok(acc * step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Ar1Benchmark, TentMap};

    #[test]
    fn wrapped_kernel_integrates_to_one() {
        for sigma in [0.05, 0.1, 0.3, 0.49, 0.5, 1.0, 10.0] {
            let n = 4000;
            let total: f64 = (0..n).map(|i| wrapped_gaussian(midpoint(i, n), sigma)).sum::<f64>() / n as f64;
            assert!((total - 1.0).abs() < 1e-9, "sigma {sigma}: {total}");
        }
    }

    #[test]
    fn kernel_branches_agree() {
        for u in [0.0, 0.1, 0.37, 0.5, 0.93] {
            let direct = {
                let mut p = 0.0;
                for k in -20..=20 {
                    p += std_normal_pdf((u + k as f64) / 0.5);
                }
                p / 0.5
            };
            assert!((wrapped_gaussian(u, 0.5) - direct).abs() < 1e-12);
            assert!((wrapped_gaussian(u, 0.4999999) - direct).abs() < 1e-5);
        }
    }

    #[test]
    fn rows_are_stochastic() {
        let p = transition_matrix(&TentMap, 3.0, 0.1, 500).unwrap();
        for i in 0..p.bins() {
            let row = p.row(i);
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wide_noise_gives_uniform_density() {
        let p = transition_matrix(&TentMap, 3.0, 10.0, 200).unwrap();
        let h = stationary_density(&p, 1e-12, 1000).unwrap();
        let (lo, hi) = h.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi / lo <= 1.0 + 1e-3);
    }

    #[test]
    fn density_sums_to_one() {
        let cfg = GridOracleConfig::new(3.0, 0.1).with_bins(400);
        let r = grid_transfer_response_1d(&cfg, &TentMap, &Observable::identity()).unwrap();
        assert!((r.density.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.phi_avg > 0.0 && r.phi_avg < 1.0);
        assert!(r.dphi.is_finite());
    }

    #[test]
    fn rejects_non_circle_systems() {
        let cfg = GridOracleConfig::new(0.0, 0.1);
        let sys = Ar1Benchmark::default();
        assert!(matches!(grid_transfer_response_1d(&cfg, &sys, &Observable::identity()), Err(Error::Unsupported(_))));
        assert!(GridOracleConfig::new(3.0, 0.1).with_bins(50).validate().is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let p = transition_matrix(&TentMap, 2.5, 0.05, 200).unwrap();
        assert!(matches!(stationary_density(&p, 1e-300, 3), Err(Error::NotConverged { iterations: 3, .. })));
    }

    #[test]
    fn smoothing_a_linear_average() {
        // Φ_avg(γ) = const for Φ ≡ 1, so the smoothed derivative vanishes.
        let cfg = GridOracleConfig::new(3.0, 0.1).with_bins(200);
        let one = Observable::custom("one", |_| 1.0);
        let d = grid_smoothed_response(&cfg, &TentMap, &one, 0.05, 21).unwrap();
        assert!(d.abs() < 1e-12);
    }
}
