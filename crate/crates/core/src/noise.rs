//! Additive noise densities and their score functions.
//!
//! [`GaussianNoise`] is the workhorse. [`NoiseField`] lets the density depend
//! on the parameter γ and on the pre-noise point `z = f_γ(x)`; its partials
//! are either supplied analytically or obtained by central differences of the
//! log-density. [`NoiseModel`] is what the estimators consume.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::rng::RngStream;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Step for the finite-difference fallback of [`NoiseField`] partials.
pub const FIELD_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
enum Covariance {
    Isotropic { sigma: f64, inv_var: f64 },
    Diagonal { sigmas: Vec<f64>, inv_vars: Vec<f64> },
    Full {
        /// Lower Cholesky factor, row-major.
        chol: Vec<f64>,
        /// Σ⁻¹, row-major.
        precision: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
}

/// Serializable description of a Gaussian, as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceSpec {
    Isotropic(f64),
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

/// Multivariate normal density `N(μ, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNoise {
    mean: Vec<f64>,
    cov: Covariance,
    /// `-(k/2) ln 2π - (1/2) ln det Σ`
    log_norm: f64,
}

impl GaussianNoise {
    /// Zero-mean `N(0, σ² I)` in `dim` dimensions.
    pub fn isotropic(dim: usize, sigma: f64) -> Result<Self> {
        Self::isotropic_with_mean(vec![0.0; dim], sigma)
    }

    pub fn isotropic_with_mean(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        if mean.is_empty() {
            return Err(invalid("mean", "dimension must be at least 1"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive and finite, got {sigma}")));
        }
        let k = mean.len() as f64;
        Ok(Self {
            log_norm: -0.5 * k * LN_2PI - k * sigma.ln(),
            mean,
            cov: Covariance::Isotropic {
                sigma,
                inv_var: 1.0 / (sigma * sigma),
            },
        })
    }

    /// `N(μ, diag(σᵢ²))`.
    pub fn diagonal(mean: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        check_dim("diagonal noise sigmas", mean.len(), sigmas.len())?;
        if mean.is_empty() {
            return Err(invalid("mean", "dimension must be at least 1"));
        }
        if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(invalid("sigma_diag", format!("every axis must be positive and finite, got {s}")));
        }
        let log_norm = -0.5 * mean.len() as f64 * LN_2PI - sigmas.iter().map(|s| s.ln()).sum::<f64>();
        let inv_vars = sigmas.iter().map(|s| 1.0 / (s * s)).collect();
        Ok(Self {
            mean,
            cov: Covariance::Diagonal { sigmas, inv_vars },
            log_norm,
        })
    }

    /// `N(μ, Σ)` with a full covariance; fails unless Σ is symmetric positive definite.
    pub fn full(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let k = mean.len();
        if k == 0 {
            return Err(invalid("mean", "dimension must be at least 1"));
        }
        check_dim("covariance rows", k, cov.len())?;
        for row in &cov {
            check_dim("covariance columns", k, row.len())?;
        }
        for i in 0..k {
            for j in 0..i {
                let (a, b) = (cov[i][j], cov[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(invalid("cov", format!("not symmetric at ({i},{j}): {a} vs {b}")));
                }
            }
        }
        let m = DMatrix::from_fn(k, k, |i, j| cov[i][j]);
        let chol = m
            .cholesky()
            .ok_or_else(|| invalid("cov", "not positive definite (Cholesky failed)"))?;
        let l = chol.l();
        let precision = chol.inverse();
        let log_det: f64 = 2.0 * (0..k).map(|i| l[(i, i)].ln()).sum::<f64>();
        Ok(Self {
            log_norm: -0.5 * k as f64 * LN_2PI - 0.5 * log_det,
            mean,
            cov: Covariance::Full {
                chol: (0..k * k).map(|n| l[(n / k, n % k)]).collect(),
                precision: (0..k * k).map(|n| precision[(n / k, n % k)]).collect(),
                cov,
            },
        })
    }

    pub fn from_spec(mean: Vec<f64>, spec: &CovarianceSpec) -> Result<Self> {
        match spec {
            CovarianceSpec::Isotropic(s) => Self::isotropic_with_mean(mean, *s),
            CovarianceSpec::Diagonal(s) => Self::diagonal(mean, s.clone()),
            CovarianceSpec::Full(c) => Self::full(mean, c.clone()),
        }
    }

    pub fn spec(&self) -> CovarianceSpec {
        match &self.cov {
            Covariance::Isotropic { sigma, .. } => CovarianceSpec::Isotropic(*sigma),
            Covariance::Diagonal { sigmas, .. } => CovarianceSpec::Diagonal(sigmas.clone()),
            Covariance::Full { cov, .. } => CovarianceSpec::Full(cov.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Writes one draw into `out`. Consumes exactly `dim` standard normals.
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match &self.cov {
            Covariance::Isotropic { sigma, .. } => {
                for (o, mu) in out.iter_mut().zip(&self.mean) {
                    *o = mu + sigma * rng.normal();
                }
            }
            Covariance::Diagonal { sigmas, .. } => {
                for ((o, mu), s) in out.iter_mut().zip(&self.mean).zip(sigmas) {
                    *o = mu + s * rng.normal();
                }
            }
            Covariance::Full { chol, .. } => {
                let k = self.dim();
                let mut z = vec![0.0; k];
                rng.fill_normal(&mut z);
                for i in 0..k {
                    let row = &chol[i * k..i * k + i + 1];
                    out[i] = self.mean[i] + row.iter().zip(&z).map(|(l, z)| l * z).sum::<f64>();
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    /// `dp/p (y) = -Σ⁻¹ (y - μ)` written into `out`.
    pub fn score_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim());
        match &self.cov {
            Covariance::Isotropic { inv_var, .. } => {
                for ((o, yi), mu) in out.iter_mut().zip(y).zip(&self.mean) {
                    *o = -(yi - mu) * inv_var;
                }
            }
            Covariance::Diagonal { inv_vars, .. } => {
                for (((o, yi), mu), iv) in out.iter_mut().zip(y).zip(&self.mean).zip(inv_vars) {
                    *o = -(yi - mu) * iv;
                }
            }
            Covariance::Full { precision, .. } => {
                let k = self.dim();
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &precision[i * k..(i + 1) * k];
                    *o = -row
                        .iter()
                        .zip(y.iter().zip(&self.mean))
                        .map(|(p, (yj, mu))| p * (yj - mu))
                        .sum::<f64>();
                }
            }
        }
    }

    pub fn score(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim("score", self.dim(), y.len())?;
        let mut out = vec![0.0; self.dim()];
        self.score_into(y, &mut out);
        Ok(out)
    }

    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        check_dim("log_density", self.dim(), y.len())?;
        let quad = match &self.cov {
            Covariance::Isotropic { inv_var, .. } => {
                y.iter().zip(&self.mean).map(|(y, m)| (y - m) * (y - m)).sum::<f64>() * inv_var
            }
            Covariance::Diagonal { inv_vars, .. } => y
                .iter()
                .zip(&self.mean)
                .zip(inv_vars)
                .map(|((y, m), iv)| (y - m) * (y - m) * iv)
                .sum(),
            Covariance::Full { .. } => {
                let mut s = vec![0.0; self.dim()];
                self.score_into(y, &mut s);
                -s.iter().zip(y.iter().zip(&self.mean)).map(|(s, (y, m))| s * (y - m)).sum::<f64>()
            }
        };
        Ok(self.log_norm - 0.5 * quad)
    }

    /// Per-axis standard deviations.
    pub fn axis_sigmas(&self) -> Vec<f64> {
        match &self.cov {
            Covariance::Isotropic { sigma, .. } => vec![*sigma; self.dim()],
            Covariance::Diagonal { sigmas, .. } => sigmas.clone(),
            Covariance::Full { cov, .. } => (0..self.dim()).map(|i| cov[i][i].sqrt()).collect(),
        }
    }
}

/// `γ`-independent combination shared by fixed noise and noise fields:
/// `d_gamma + δf · (d_z - score)`, with `d_z = 0` when absent.
#[inline]
fn combine_weight(d_gamma: f64, delta_f: &[f64], d_z: Option<&[f64]>, score: &[f64]) -> f64 {
    let mut acc = d_gamma;
    match d_z {
        Some(dz) => {
            for ((df, dz), s) in delta_f.iter().zip(dz).zip(score) {
                acc += df * (dz - s);
            }
        }
        None => {
            for (df, s) in delta_f.iter().zip(score) {
                acc += df * (0.0 - s);
            }
        }
    }
    acc
}

/// `-δf · dp/p (y)` for a fixed density: the per-step weight of the no-propagate sum.
pub fn score_weight(noise: &GaussianNoise, delta_f: &[f64], y: &[f64], scratch: &mut [f64]) -> f64 {
    noise.score_into(y, scratch);
    combine_weight(0.0, delta_f, None, scratch)
}

type FamilyFn = dyn Fn(f64, &[f64]) -> Result<GaussianNoise> + Send + Sync;
type GammaPartialFn = dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync;
type ZPartialFn = dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// A Gaussian whose parameters depend on `(γ, z)`.
#[derive(Clone)]
pub struct NoiseField {
    dim: usize,
    family: Arc<FamilyFn>,
    d_gamma: Option<Arc<GammaPartialFn>>,
    d_z: Option<Arc<ZPartialFn>>,
}

impl fmt::Debug for NoiseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NoiseField")
            .field("dim", &self.dim)
            .field("analytic_d_gamma", &self.d_gamma.is_some())
            .field("analytic_d_z", &self.d_z.is_some())
            .finish()
    }
}

impl NoiseField {
    /// `family(γ, z)` returns the density of `y` given `f_γ(x) = z`.
    pub fn new<F>(dim: usize, family: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Result<GaussianNoise> + Send + Sync + 'static,
    {
        Self {
            dim,
            family: Arc::new(family),
            d_gamma: None,
            d_z: None,
        }
    }

    /// A field that ignores `(γ, z)`, with exact zero partials.
    pub fn constant(noise: GaussianNoise) -> Self {
        let dim = noise.dim();
        let fixed = noise.clone();
        Self::new(dim, move |_, _| Ok(fixed.clone()))
            .with_gamma_partial(|_, _, _| 0.0)
            .with_z_partial(move |_, _, _| vec![0.0; dim])
    }

    /// Analytic `∂ log p / ∂γ (γ, z, y)`.
    pub fn with_gamma_partial<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.d_gamma = Some(Arc::new(f));
        self
    }

    /// Analytic `∂ log p / ∂z (γ, z, y)`.
    pub fn with_z_partial<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.d_z = Some(Arc::new(f));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slice(&self, gamma: f64, z: &[f64]) -> Result<GaussianNoise> {
        check_dim("noise field z", self.dim, z.len())?;
        let g = (self.family)(gamma, z)?;
        check_dim("noise field slice", self.dim, g.dim())?;
        Ok(g)
    }

    pub fn dlogp_dgamma(&self, gamma: f64, z: &[f64], y: &[f64]) -> Result<f64> {
        check_dim("noise field y", self.dim, y.len())?;
        if let Some(f) = &self.d_gamma {
            return Ok(f(gamma, z, y));
        }
        let h = FIELD_FD_STEP;
        let plus = self.slice(gamma + h, z)?.log_density(y)?;
        let minus = self.slice(gamma - h, z)?.log_density(y)?;
        Ok((plus - minus) / (2.0 * h))
    }

    pub fn dlogp_dz(&self, gamma: f64, z: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_dim("noise field y", self.dim, y.len())?;
        if let Some(f) = &self.d_z {
            let v = f(gamma, z, y);
            check_dim("noise field d/dz", self.dim, v.len())?;
            return Ok(v);
        }
        let h = FIELD_FD_STEP;
        let mut zz = z.to_vec();
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            zz[i] = z[i] + h;
            let plus = self.slice(gamma, &zz)?.log_density(y)?;
            zz[i] = z[i] - h;
            let minus = self.slice(gamma, &zz)?.log_density(y)?;
            zz[i] = z[i];
            out[i] = (plus - minus) / (2.0 * h);
        }
        Ok(out)
    }

    /// `∂ log p / ∂y`, the score of the slice at `(γ, z)`.
    pub fn dlogp_dy(&self, gamma: f64, z: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.slice(gamma, z)?.score(y)
    }
}

/// Total γ-derivative of `log p_{γ, f_γ(x)}(y)` along the dynamics:
/// `∂γ log p + δf · (∂z log p - ∂y log p)`.
///
/// For a field with no γ- or z-dependence this is `-δf · score(y)`.
pub fn generalized_weight(field: &NoiseField, gamma: f64, z: &[f64], y: &[f64], delta_f: &[f64]) -> Result<f64> {
    check_dim("generalized_weight delta_f", field.dim(), delta_f.len())?;
    let d_gamma = field.dlogp_dgamma(gamma, z, y)?;
    let d_z = field.dlogp_dz(gamma, z, y)?;
    let d_y = field.dlogp_dy(gamma, z, y)?;
    Ok(combine_weight(d_gamma, delta_f, Some(&d_z), &d_y))
}

/// Noise as consumed by the estimators.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    Fixed(GaussianNoise),
    Field(NoiseField),
}

impl From<GaussianNoise> for NoiseModel {
    fn from(g: GaussianNoise) -> Self {
        NoiseModel::Fixed(g)
    }
}

impl From<NoiseField> for NoiseModel {
    fn from(f: NoiseField) -> Self {
        NoiseModel::Field(f)
    }
}

impl NoiseModel {
    pub fn dim(&self) -> usize {
        match self {
            NoiseModel::Fixed(g) => g.dim(),
            NoiseModel::Field(f) => f.dim(),
        }
    }

    /// Draws `y` given the pre-noise point `z`.
    pub(crate) fn sample_into(&self, gamma: f64, z: &[f64], rng: &mut RngStream, out: &mut [f64]) -> Result<()> {
        match self {
            NoiseModel::Fixed(g) => g.sample_into(rng, out),
            NoiseModel::Field(f) => f.slice(gamma, z)?.sample_into(rng, out),
        }
        Ok(())
    }

    /// Per-step weight `dp/(p dγ)`; `scratch` must have length `dim`.
    pub(crate) fn weight(&self, gamma: f64, z: &[f64], y: &[f64], delta_f: &[f64], scratch: &mut [f64]) -> Result<f64> {
        match self {
            NoiseModel::Fixed(g) => Ok(score_weight(g, delta_f, y, scratch)),
            NoiseModel::Field(f) => generalized_weight(f, gamma, z, y, delta_f),
        }
    }
}

/// Density of the standard normal, used by the grid oracle.
#[inline]
pub(crate) fn std_normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}
