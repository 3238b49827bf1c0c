//! Finite-horizon estimator over independent sample paths.
//!
//! For each path `l`: draw `x_0 ~ h_0`; for `m = 0..T` draw `y_{m+1}`,
//! accumulate the weight `dp/(p dγ)(x_m, y_{m+1})` (which is
//! `-δf_m(x_m) · score(y_{m+1})` for fixed noise) into `S_l`, and advance
//! `x_{m+1} = project(f_m(x_m) + y_{m+1})`. The response is the sample mean
//! of `S_l (Φ(x_{l,T}) - Φ̂)` with `Φ̂` the same-sample mean of `Φ(x_{l,T})`.

use crate::error::{check_dim, invalid, Error, Result};
use crate::noise::{GaussianNoise, NoiseModel};
use crate::observable::Observable;
use crate::parallel::run_chunked;
use crate::rng::RngStream;
use crate::stats::MomentAccumulator;
use crate::systems::DynamicalSystem;

use super::{MeanEstimate, ResponseEstimate, Window};

/// Law of `X_0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDistribution {
    Point(Vec<f64>),
    Gaussian(GaussianNoise),
    /// Independent uniform coordinates on `[lo_i, hi_i)`.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
}

impl InitialDistribution {
    pub fn dim(&self) -> usize {
        match self {
            InitialDistribution::Point(x) => x.len(),
            InitialDistribution::Gaussian(g) => g.dim(),
            InitialDistribution::Uniform { lo, .. } => lo.len(),
        }
    }

    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            InitialDistribution::Point(x) => out.copy_from_slice(x),
            InitialDistribution::Gaussian(g) => g.sample_into(rng, out),
            InitialDistribution::Uniform { lo, hi } => {
                for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *o = a + (b - a) * rng.uniform();
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteTimeConfig {
    pub gamma: f64,
    /// Horizon `T`.
    pub steps: usize,
    /// Number of sample paths `L`.
    pub paths: usize,
    pub seed: u64,
    pub initial: InitialDistribution,
    /// `p_1..p_T`; a single entry is reused at every step.
    pub noise: Vec<NoiseModel>,
    pub observable: Observable,
    /// Worker count; `None` uses the global pool. Results do not depend on it.
    pub threads: Option<usize>,
}

impl FiniteTimeConfig {
    pub fn new(gamma: f64, steps: usize, paths: usize, seed: u64, initial: InitialDistribution, noise: impl Into<NoiseModel>) -> Self {
        Self {
            gamma,
            steps,
            paths,
            seed,
            initial,
            noise: vec![noise.into()],
            observable: Observable::identity(),
            threads: None,
        }
    }

    pub fn with_observable(mut self, observable: Observable) -> Self {
        self.observable = observable;
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    /// Density of `Y_{m+1}`.
    pub fn noise_at(&self, m: usize) -> &NoiseModel {
        if self.noise.len() == 1 {
            &self.noise[0]
        } else {
            &self.noise[m]
        }
    }

    pub(crate) fn validate(&self, sys: &dyn DynamicalSystem) -> Result<()> {
        if self.paths < 2 {
            return Err(invalid("L", format!("need at least 2 sample paths, got {}", self.paths)));
        }
        if self.noise.is_empty() || (self.noise.len() != 1 && self.noise.len() != self.steps) {
            return Err(invalid(
                "noise",
                format!("expected 1 or T = {} noise densities, got {}", self.steps, self.noise.len()),
            ));
        }
        if !self.gamma.is_finite() {
            return Err(invalid("gamma", "must be finite"));
        }
        check_dim("initial distribution", sys.dim(0), self.initial.dim())?;
        for m in 0..self.steps {
            check_dim("noise density", sys.dim(m + 1), self.noise_at(m).dim())?;
        }
        self.observable.check_dim(sys.dim(self.steps))
    }
}

/// Scratch buffers for one worker.
pub(crate) struct PathBuffers {
    x: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
    df: Vec<f64>,
    scratch: Vec<f64>,
}

impl PathBuffers {
    pub(crate) fn new(sys: &dyn DynamicalSystem, steps: usize) -> Self {
        let max = (0..=steps).map(|n| sys.dim(n)).max().unwrap_or(0);
        Self {
            x: vec![0.0; max],
            z: vec![0.0; max],
            y: vec![0.0; max],
            df: vec![0.0; max],
            scratch: vec![0.0; max],
        }
    }

    pub(crate) fn state(&self, dim: usize) -> &[f64] {
        &self.x[..dim]
    }
}

/// Simulates path `index`, calling `on_weight(m, w)` with the step-`m` weight.
/// On return `buf.state(sys.dim(T))` is `x_T`.
pub(crate) fn simulate_path(
    sys: &dyn DynamicalSystem,
    cfg: &FiniteTimeConfig,
    gamma: f64,
    index: usize,
    buf: &mut PathBuffers,
    mut on_weight: impl FnMut(usize, f64),
) -> Result<()> {
    let mut rng = RngStream::new(cfg.seed, index as u64);
    let d0 = sys.dim(0);
    cfg.initial.sample_into(&mut rng, &mut buf.x[..d0]);
    for m in 0..cfg.steps {
        let (din, dout) = (sys.dim(m), sys.dim(m + 1));
        let x = &buf.x[..din];
        let z = &mut buf.z[..dout];
        sys.step_into(gamma, m, x, z);
        sys.param_derivative_into(gamma, m, x, &mut buf.df[..dout]);
        let noise = cfg.noise_at(m);
        noise.sample_into(gamma, z, &mut rng, &mut buf.y[..dout])?;
        let w = noise.weight(gamma, z, &buf.y[..dout], &buf.df[..dout], &mut buf.scratch[..dout])?;
        if !w.is_finite() {
            return Err(Error::NonFinite { what: "score weight", step: m + 1 });
        }
        on_weight(m, w);
        let x = &mut buf.x[..dout];
        for ((x, z), y) in x.iter_mut().zip(z.iter()).zip(&buf.y[..dout]) {
            *x = z + y;
        }
        sys.project_in_place(x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "state", step: m + 1 });
        }
    }
    Ok(())
}

/// `(S_l, Φ(x_{l,T}))` for every path, in path order.
fn path_terms(sys: &dyn DynamicalSystem, cfg: &FiniteTimeConfig) -> Result<Vec<(f64, f64)>> {
    let dim_t = sys.dim(cfg.steps);
    let chunks = run_chunked(cfg.paths, cfg.threads, |range| {
        let mut buf = PathBuffers::new(sys, cfg.steps);
        let mut out = Vec::with_capacity(range.len());
        for l in range {
            let mut s = 0.0;
            simulate_path(sys, cfg, cfg.gamma, l, &mut buf, |_, w| s += w)?;
            out.push((s, cfg.observable.eval(buf.state(dim_t))));
        }
        Ok(out)
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

/// No-propagate estimate of `d/dγ E[Φ_T(X_T)]`.
pub fn estimate_finite_time(sys: &dyn DynamicalSystem, cfg: &FiniteTimeConfig) -> Result<ResponseEstimate> {
    if cfg.steps < 1 {
        return Err(invalid("T", "need at least one step"));
    }
    cfg.validate(sys)?;
    let terms = path_terms(sys, cfg)?;

    let phi: MomentAccumulator = terms.iter().map(|t| t.1).collect();
    let phi_avg = phi.mean();
    let mut products = MomentAccumulator::new();
    let mut abs = MomentAccumulator::new();
    for &(s, p) in &terms {
        let v = s * (p - phi_avg);
        products.push_unchecked(v);
        abs.push_unchecked(v.abs());
    }
    Ok(ResponseEstimate {
        gamma: cfg.gamma,
        value: products.mean(),
        std_error: products.std_error(),
        phi_avg,
        phi_avg_std_error: phi.std_error(),
        n_samples: cfg.paths as u64,
        seed: cfg.seed,
        window: Window::Finite { steps: cfg.steps },
        lags: Vec::new(),
        lag_std_errors: Vec::new(),
        mean_abs_integrand: abs.mean(),
    })
}

/// Monte-Carlo `E[Φ_T(X_T)]` with its standard error. `T = 0` averages `Φ` over `h_0`.
pub fn pushforward_average(sys: &dyn DynamicalSystem, cfg: &FiniteTimeConfig) -> Result<MeanEstimate> {
    cfg.validate(sys)?;
    let terms = path_terms(sys, cfg)?;
    let phi: MomentAccumulator = terms.iter().map(|t| t.1).collect();
    Ok(MeanEstimate {
        mean: phi.mean(),
        std_error: phi.std_error(),
    })
}

/// Per-step means of the weights `(1/L) Σ_l w_{l,m}`, which vanish in expectation.
pub fn finite_score_means(sys: &dyn DynamicalSystem, cfg: &FiniteTimeConfig) -> Result<Vec<MeanEstimate>> {
    cfg.validate(sys)?;
    let chunks = run_chunked(cfg.paths, cfg.threads, |range| {
        let mut buf = PathBuffers::new(sys, cfg.steps);
        let mut accs = vec![MomentAccumulator::new(); cfg.steps];
        for l in range {
            simulate_path(sys, cfg, cfg.gamma, l, &mut buf, |m, w| accs[m].push_unchecked(w))?;
        }
        Ok(accs)
    })?;
    let mut total = vec![MomentAccumulator::new(); cfg.steps];
    for accs in &chunks {
        for (t, a) in total.iter_mut().zip(accs) {
            t.merge(a);
        }
    }
    Ok(total
        .iter()
        .map(|a| MeanEstimate {
            mean: a.mean(),
            std_error: a.std_error(),
        })
        .collect())
}
