//! Single-orbit estimator of the response of the stationary average.
//!
//! After `M_pre` spin-up steps the orbit is run for `W + L` steps, recording
//! the weights `w_l = dp/(p dγ)(x_{l-1}, y_l)` and observables `Φ_l`. The
//! response is
//!
//! ```text
//! δΦ_avg ≈ (1/L) Σ_{n=0}^{W} Σ_{l=1}^{L} (Φ_{n+l} - Φ̂) w_l
//! ```
//!
//! with `Φ̂` the mean of `Φ_1..Φ_L`. The orbit is replayed from the same seed
//! rather than stored: the first pass yields `Φ̂`, the second accumulates the
//! lag sums while keeping only the last `W + 1` weights.

use std::collections::VecDeque;

use log::warn;

use crate::error::{check_dim, invalid, Error, Result};
use crate::noise::NoiseModel;
use crate::observable::Observable;
use crate::rng::RngStream;
use crate::stats::{BatchMeans, MomentAccumulator};
use crate::systems::DynamicalSystem;

use super::{MeanEstimate, ResponseEstimate, Window};

pub const DEFAULT_SPIN_UP: usize = 1000;
pub const DEFAULT_BATCHES: usize = 50;

#[derive(Debug, Clone)]
pub struct StationaryConfig {
    pub gamma: f64,
    /// Decorrelation window `W`.
    pub window: usize,
    /// Averaging length `L`.
    pub length: usize,
    /// Spin-up steps `M_pre`.
    pub spin_up: usize,
    pub seed: u64,
    pub observable: Observable,
    /// Batches for the batch-means standard errors.
    pub batches: usize,
}

impl StationaryConfig {
    pub fn new(gamma: f64, window: usize, length: usize, seed: u64) -> Self {
        Self {
            gamma,
            window,
            length,
            spin_up: DEFAULT_SPIN_UP,
            seed,
            observable: Observable::identity(),
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_observable(mut self, observable: Observable) -> Self {
        self.observable = observable;
        self
    }

    pub fn with_spin_up(mut self, spin_up: usize) -> Self {
        self.spin_up = spin_up;
        self
    }

    pub(crate) fn validate(&self, sys: &dyn DynamicalSystem, noise: &NoiseModel) -> Result<()> {
        if !sys.is_time_homogeneous() {
            return Err(invalid("system", "the stationary estimator needs a time-homogeneous system"));
        }
        if !self.gamma.is_finite() {
            return Err(invalid("gamma", "must be finite"));
        }
        check_dim("noise density", sys.dim(0), noise.dim())?;
        check_dim("initial state", sys.dim(0), sys.initial_state().len())?;
        self.observable.check_dim(sys.dim(0))?;
        if self.length < 2 * self.batches {
            return Err(Error::TooShort {
                needed: 2 * self.batches,
                found: self.length,
            });
        }
        Ok(())
    }

    fn validate_window(&self) -> Result<()> {
        if self.window >= self.length {
            return Err(invalid("W", format!("window {} must be smaller than L = {}", self.window, self.length)));
        }
        if self.window * 10 > self.length {
            warn!("decorrelation window W = {} exceeds L/10 (L = {})", self.window, self.length);
        }
        Ok(())
    }
}

/// One orbit of the noisy system with reusable buffers.
pub(crate) struct Orbit<'a> {
    sys: &'a dyn DynamicalSystem,
    noise: &'a NoiseModel,
    gamma: f64,
    rng: RngStream,
    x: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
    df: Vec<f64>,
    scratch: Vec<f64>,
    steps: usize,
}

impl<'a> Orbit<'a> {
    pub(crate) fn new(sys: &'a dyn DynamicalSystem, noise: &'a NoiseModel, gamma: f64, seed: u64) -> Self {
        let d = sys.dim(0);
        let mut x = sys.initial_state();
        sys.project_in_place(&mut x);
        Self {
            sys,
            noise,
            gamma,
            rng: RngStream::new(seed, 0),
            x,
            z: vec![0.0; d],
            y: vec![0.0; d],
            df: vec![0.0; d],
            scratch: vec![0.0; d],
            steps: 0,
        }
    }

    pub(crate) fn state(&self) -> &[f64] {
        &self.x
    }

    /// Advances one step and returns the weight for the step just taken.
    #[inline]
    pub(crate) fn advance(&mut self, with_weight: bool) -> Result<f64> {
        self.steps += 1;
        self.sys.step_into(self.gamma, 0, &self.x, &mut self.z);
        self.noise.sample_into(self.gamma, &self.z, &mut self.rng, &mut self.y)?;
        let w = if with_weight {
            self.sys.param_derivative_into(self.gamma, 0, &self.x, &mut self.df);
            let w = self.noise.weight(self.gamma, &self.z, &self.y, &self.df, &mut self.scratch)?;
            if !w.is_finite() {
                return Err(Error::NonFinite { what: "score weight", step: self.steps });
            }
            w
        } else {
            0.0
        };
        for ((x, z), y) in self.x.iter_mut().zip(&self.z).zip(&self.y) {
            *x = z + y;
        }
        self.sys.project_in_place(&mut self.x);
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "state", step: self.steps });
        }
        Ok(w)
    }

    pub(crate) fn spin_up(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.advance(false)?;
        }
        Ok(())
    }
}

/// Runs spin-up plus `L` steps, reporting `(l, x_l)` for `l = 1..=L`.
fn scan_window(
    sys: &dyn DynamicalSystem,
    noise: &NoiseModel,
    cfg: &StationaryConfig,
    mut visit: impl FnMut(usize, &[f64], f64),
    with_weight: bool,
) -> Result<()> {
    let mut orbit = Orbit::new(sys, noise, cfg.gamma, cfg.seed);
    orbit.spin_up(cfg.spin_up)?;
    for l in 1..=cfg.length {
        let w = orbit.advance(with_weight)?;
        visit(l, &orbit.x, w);
    }
    Ok(())
}

struct PhiMean {
    grand: MomentAccumulator,
    batches: BatchMeans,
}

fn observable_mean(sys: &dyn DynamicalSystem, noise: &NoiseModel, cfg: &StationaryConfig) -> Result<PhiMean> {
    let mut grand = MomentAccumulator::new();
    let mut batches = BatchMeans::new(cfg.length, cfg.batches)?;
    scan_window(
        sys,
        noise,
        cfg,
        |l, x, _| {
            let phi = cfg.observable.eval(x);
            grand.push_unchecked(phi);
            batches.push(l - 1, phi);
        },
        false,
    )?;
    Ok(PhiMean { grand, batches })
}

/// Orbit average of `Φ` over the `L` window with a batch-means standard error.
pub fn stationary_average(sys: &dyn DynamicalSystem, noise: &NoiseModel, cfg: &StationaryConfig) -> Result<MeanEstimate> {
    cfg.validate(sys, noise)?;
    let m = observable_mean(sys, noise, cfg)?;
    Ok(MeanEstimate {
        mean: m.grand.mean(),
        std_error: m.batches.std_error(),
    })
}

/// Batch sums over a partition of `1..=L`, for the standard error of a sum of per-index terms.
struct BatchSums {
    sums: Vec<f64>,
    sizes: Vec<usize>,
    len: usize,
}

impl BatchSums {
    fn new(len: usize, n: usize) -> Self {
        let mut sizes = vec![0; n];
        for i in 0..len {
            sizes[(i as u128 * n as u128 / len as u128) as usize] += 1;
        }
        Self {
            sums: vec![0.0; n],
            sizes,
            len,
        }
    }

    #[inline]
    fn add(&mut self, index: usize, v: f64) {
        let b = (index as u128 * self.sums.len() as u128 / self.len as u128) as usize;
        self.sums[b] += v;
    }

    fn std_error(&self) -> f64 {
        let m: MomentAccumulator = self.sums.iter().zip(&self.sizes).map(|(s, &n)| s / n as f64).collect();
        (m.variance() / self.sums.len() as f64).sqrt()
    }
}

/// No-propagate estimate of `δ ∫ Φ h` with per-lag breakdown.
pub fn estimate_stationary(sys: &dyn DynamicalSystem, noise: &NoiseModel, cfg: &StationaryConfig) -> Result<ResponseEstimate> {
    cfg.validate(sys, noise)?;
    cfg.validate_window()?;
    let phi = observable_mean(sys, noise, cfg)?;
    let phi_avg = phi.grand.mean();

    let (w_len, l_len) = (cfg.window, cfg.length);
    let mut lag_sums = vec![0.0; w_len + 1];
    let mut lag_batches: Vec<BatchSums> = (0..=w_len).map(|_| BatchSums::new(l_len, cfg.batches)).collect();
    let mut total = BatchSums::new(l_len, cfg.batches);
    let mut abs_acc = MomentAccumulator::new();
    // (w_l, c_l) for the newest W + 1 indices l <= min(t, L), newest at the back,
    // where c_l accumulates the per-sample integrand Σ_n (Φ_{n+l} - Φ̂) w_l.
    let mut open: VecDeque<(f64, f64)> = VecDeque::with_capacity(w_len + 2);

    let mut orbit = Orbit::new(sys, noise, cfg.gamma, cfg.seed);
    orbit.spin_up(cfg.spin_up)?;
    for t in 1..=w_len + l_len {
        let w = orbit.advance(t <= l_len)?;
        if t <= l_len {
            if open.len() == w_len + 1 {
                // Index t - W - 1 saw its last partner at t - 1.
                let (_, c) = open.pop_front().expect("non-empty");
                abs_acc.push_unchecked(c.abs());
            }
            open.push_back((w, 0.0));
        }
        let d = cfg.observable.eval(&orbit.x) - phi_avg;
        let newest_l = t.min(l_len);
        let oldest_l = newest_l + 1 - open.len();
        for (i, (wl, c)) in open.iter_mut().enumerate() {
            let l = oldest_l + i;
            if l + w_len < t {
                continue;
            }
            let term = d * *wl;
            lag_sums[t - l] += term;
            lag_batches[t - l].add(l - 1, term);
            total.add(l - 1, term);
            *c += term;
        }
    }
    for (_, c) in open.drain(..) {
        abs_acc.push_unchecked(c.abs());
    }

    let lf = l_len as f64;
    let lags: Vec<f64> = lag_sums.iter().map(|s| s / lf).collect();
    let value = lags.iter().sum();
    Ok(ResponseEstimate {
        gamma: cfg.gamma,
        value,
        std_error: total.std_error(),
        phi_avg,
        phi_avg_std_error: phi.batches.std_error(),
        n_samples: l_len as u64,
        seed: cfg.seed,
        window: Window::Stationary {
            window: w_len,
            spin_up: cfg.spin_up,
        },
        lag_std_errors: lag_batches.iter().map(BatchSums::std_error).collect(),
        lags,
        mean_abs_integrand: abs_acc.mean(),
    })
}

/// Per-lag terms of [`estimate_stationary`]; entry `n` is `(1/L) Σ_l (Φ_{n+l} - Φ̂) w_l`.
pub fn lag_contributions(sys: &dyn DynamicalSystem, noise: &NoiseModel, cfg: &StationaryConfig) -> Result<Vec<f64>> {
    Ok(estimate_stationary(sys, noise, cfg)?.lags)
}

/// Orbit mean of the weights `w_l`, which vanishes in expectation.
pub fn stationary_score_mean(sys: &dyn DynamicalSystem, noise: &NoiseModel, cfg: &StationaryConfig) -> Result<MeanEstimate> {
    cfg.validate(sys, noise)?;
    let mut grand = MomentAccumulator::new();
    let mut batches = BatchMeans::new(cfg.length, cfg.batches)?;
    scan_window(
        sys,
        noise,
        cfg,
        |l, _, w| {
            grand.push_unchecked(w);
            batches.push(l - 1, w);
        },
        true,
    )?;
    Ok(MeanEstimate {
        mean: grand.mean(),
        std_error: batches.std_error(),
    })
}

/// Normalized histogram of the post-spin-up orbit of a 1-D system over `[0, 1)`.
///
/// States are reduced mod 1 before binning.
pub fn density_histogram(sys: &dyn DynamicalSystem, noise: &NoiseModel, cfg: &StationaryConfig, bins: usize) -> Result<Vec<f64>> {
    if sys.dim(0) != 1 {
        return Err(invalid("system", format!("density histogram needs a 1-D system, got dimension {}", sys.dim(0))));
    }
    if bins == 0 {
        return Err(invalid("bins", "need at least one bin"));
    }
    cfg.validate(sys, noise)?;
    let mut counts = vec![0u64; bins];
    scan_window(
        sys,
        noise,
        cfg,
        |_, x, _| {
            let u = x[0] - x[0].floor();
            counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
        },
        false,
    )?;
    let total = cfg.length as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}
