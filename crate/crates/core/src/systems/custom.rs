use std::fmt;
use std::sync::Arc;

use super::{DynamicalSystem, PhaseSpace};
use crate::error::{Error, Result};

type MapFn = dyn Fn(f64, usize, &[f64]) -> Vec<f64> + Send + Sync;
type JtFn = dyn Fn(f64, usize, &[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// A user-defined system assembled from closures.
///
/// `dims[n]` is the dimension of `X_n`; a single entry means every step has
/// that dimension (time-homogeneous).
#[derive(Clone)]
pub struct SystemSpec {
    name: String,
    dims: Vec<usize>,
    homogeneous: bool,
    step: Arc<MapFn>,
    param_derivative: Arc<MapFn>,
    jacobian_transpose: Option<Arc<JtFn>>,
    phase_space: PhaseSpace,
    initial: Option<Vec<f64>>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("dims", &self.dims)
            .field("has_jacobian", &self.jacobian_transpose.is_some())
            .field("phase_space", &self.phase_space)
            .finish()
    }
}

impl SystemSpec {
    pub fn new<S, D>(name: impl Into<String>, dim: usize, step: S, param_derivative: D) -> Self
    where
        S: Fn(f64, usize, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        D: Fn(f64, usize, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dims: vec![dim],
            homogeneous: true,
            step: Arc::new(step),
            param_derivative: Arc::new(param_derivative),
            jacobian_transpose: None,
            phase_space: PhaseSpace::Euclidean,
            initial: None,
        }
    }

    /// Per-step dimensions `M_0, …, M_T` for a time-inhomogeneous system.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter {
                name: "dims",
                reason: "need at least one dimension".into(),
            });
        }
        self.dims = dims;
        self.homogeneous = false;
        Ok(self)
    }

    pub fn with_jacobian_transpose<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, usize, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.jacobian_transpose = Some(Arc::new(f));
        self
    }

    pub fn with_phase_space(mut self, phase_space: PhaseSpace) -> Self {
        self.phase_space = phase_space;
        self
    }

    pub fn with_initial_state(mut self, x: Vec<f64>) -> Self {
        self.initial = Some(x);
        self
    }
}

impl DynamicalSystem for SystemSpec {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self, step: usize) -> usize {
        if self.homogeneous {
            self.dims[0]
        } else {
            self.dims[step.min(self.dims.len() - 1)]
        }
    }

    fn is_time_homogeneous(&self) -> bool {
        self.homogeneous
    }

    fn phase_space(&self) -> PhaseSpace {
        self.phase_space
    }

    fn step_into(&self, gamma: f64, step: usize, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&(self.step)(gamma, step, x));
    }

    fn param_derivative_into(&self, gamma: f64, step: usize, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&(self.param_derivative)(gamma, step, x));
    }

    fn has_jacobian(&self) -> bool {
        self.jacobian_transpose.is_some()
    }

    fn jacobian_transpose_into(&self, gamma: f64, step: usize, x: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.jacobian_transpose {
            Some(f) => {
                let v = f(gamma, step, x, w);
                crate::error::check_dim("custom jacobian transpose output", out.len(), v.len())?;
                out.copy_from_slice(&v);
                Ok(())
            }
            None => Err(Error::Unsupported(format!("{} provides no Jacobian", self.name))),
        }
    }

    fn initial_state(&self) -> Vec<f64> {
        self.initial.clone().unwrap_or_else(|| vec![0.0; self.dim(0)])
    }
}
