//! Ensemble (backpropagation) response: propagate the covector `dΦ(x_T)`
//! backwards through Jacobian transposes and pair it with `δf` at each lag.
//!
//! Under chaos the propagated covector grows exponentially with the horizon;
//! overflow is reported through [`EnsembleEstimate::non_finite_paths`]
//! instead of failing.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimator::InitialDistribution;
use crate::noise::GaussianNoise;
use crate::observable::Observable;
use crate::parallel::run_chunked;
use crate::rng::RngStream;
use crate::stats::MomentAccumulator;
use crate::systems::DynamicalSystem;

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub gamma: f64,
    /// Number of backpropagation steps `n_max`.
    pub horizon: usize,
    /// Forward steps before the backpropagated segment.
    pub warmup: usize,
    pub paths: usize,
    pub seed: u64,
    pub initial: InitialDistribution,
    pub noise: GaussianNoise,
    pub observable: Observable,
    pub threads: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(gamma: f64, horizon: usize, paths: usize, seed: u64, initial: InitialDistribution, noise: GaussianNoise) -> Self {
        Self {
            gamma,
            horizon,
            warmup: 0,
            paths,
            seed,
            initial,
            noise,
            observable: Observable::identity(),
            threads: None,
        }
    }

    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_observable(mut self, observable: Observable) -> Self {
        self.observable = observable;
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    /// Non-finite when any path overflowed.
    pub value: f64,
    pub std_error: f64,
    /// Mean `|Σ_n δf·(Df*)ⁿ dΦ|` over paths that stayed finite.
    pub mean_abs_integrand: f64,
    /// Mean norm of the fully propagated covector over finite paths.
    pub mean_covector_norm: f64,
    pub non_finite_paths: usize,
    pub paths: usize,
    /// Mean of `Φ(x_T)` at the end of the backpropagated segment.
    pub phi_avg: f64,
    pub phi_avg_std_error: f64,
}

struct PathResult {
    phi: f64,
    integrand: f64,
    covector_norm: f64,
}

pub fn ensemble_response(sys: &dyn DynamicalSystem, cfg: &EnsembleConfig) -> Result<EnsembleEstimate> {
    if !sys.has_jacobian() {
        return Err(Error::Unsupported(format!("{} provides no Jacobian; ensemble needs one", sys.name())));
    }
    if !sys.is_time_homogeneous() {
        return Err(Error::Unsupported("ensemble baseline needs a time-homogeneous system".into()));
    }
    if !cfg.observable.has_gradient() {
        return Err(invalid("observable", format!("{} has no gradient", cfg.observable)));
    }
    if cfg.horizon == 0 || cfg.paths < 2 {
        return Err(invalid("ensemble", "need horizon ≥ 1 and at least 2 paths"));
    }
    let d = sys.dim(0);
    crate::error::check_dim("ensemble noise", d, cfg.noise.dim())?;
    crate::error::check_dim("ensemble initial distribution", d, cfg.initial.dim())?;
    cfg.observable.check_dim(d)?;

    let chunks = run_chunked(cfg.paths, cfg.threads, |range| {
        let mut out = Vec::with_capacity(range.len());
        // states[k] = x_{warmup + k}, k = 0..=horizon
        let mut states = vec![0.0; (cfg.horizon + 1) * d];
        let (mut z, mut y, mut df, mut w, mut next) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        for l in range {
            let mut rng = RngStream::new(cfg.seed, l as u64);
            let x = &mut states[..d];
            cfg.initial.sample_into(&mut rng, x);
            for _ in 0..cfg.warmup {
                forward(sys, cfg, &mut rng, x, &mut z, &mut y);
            }
            for k in 0..cfg.horizon {
                let (head, tail) = states.split_at_mut((k + 1) * d);
                let x = &mut tail[..d];
                x.copy_from_slice(&head[k * d..]);
                forward(sys, cfg, &mut rng, x, &mut z, &mut y);
            }
            let last = &states[cfg.horizon * d..];
            cfg.observable.gradient_into(last, &mut w)?;
            let mut integrand = 0.0;
            for n in 1..=cfg.horizon {
                let x = &states[(cfg.horizon - n) * d..(cfg.horizon - n + 1) * d];
                sys.param_derivative_into(cfg.gamma, 0, x, &mut df);
                integrand += df.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
                sys.jacobian_transpose_into(cfg.gamma, 0, x, &w, &mut next)?;
                std::mem::swap(&mut w, &mut next);
            }
            let covector_norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            out.push(PathResult {
                phi: cfg.observable.eval(last),
                integrand,
                covector_norm,
            });
        }
        Ok(out)
    })?;

    let mut all = MomentAccumulator::new();
    let mut abs = MomentAccumulator::new();
    let mut norm = MomentAccumulator::new();
    let mut phi = MomentAccumulator::new();
    let mut non_finite = 0;
    for r in chunks.into_iter().flatten() {
        phi.push_unchecked(r.phi);
        all.push_unchecked(r.integrand);
        if r.integrand.is_finite() && r.covector_norm.is_finite() {
            abs.push_unchecked(r.integrand.abs());
            norm.push_unchecked(r.covector_norm);
        } else {
            non_finite += 1;
        }
    }
    if non_finite > 0 {
        log::warn!("ensemble: {non_finite} of {} paths overflowed", cfg.paths);
    }
    Ok(EnsembleEstimate {
        value: if non_finite > 0 { f64::NAN } else { all.mean() },
        std_error: if non_finite > 0 { f64::NAN } else { all.std_error() },
        mean_abs_integrand: abs.mean(),
        mean_covector_norm: norm.mean(),
        non_finite_paths: non_finite,
        paths: cfg.paths,
        phi_avg: phi.mean(),
        phi_avg_std_error: phi.std_error(),
    })
}

#[inline]
fn forward(sys: &dyn DynamicalSystem, cfg: &EnsembleConfig, rng: &mut RngStream, x: &mut [f64], z: &mut [f64], y: &mut [f64]) {
    sys.step_into(cfg.gamma, 0, x, z);
    cfg.noise.sample_into(rng, y);
    for ((x, z), y) in x.iter_mut().zip(z.iter()).zip(y.iter()) {
        *x = z + y;
    }
    sys.project_in_place(x);
}
