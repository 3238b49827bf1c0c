//! Deterministic parts `f_{γ,n}` of the random dynamics, with their
//! γ-derivatives and (where available) Jacobian-transpose actions.

mod ar1;
mod chaotic_net;
mod custom;
mod tent;

pub use ar1::Ar1Benchmark;
pub use chaotic_net::{ChaoticNet, J0, NET_DIM};
pub use custom::SystemSpec;
pub use tent::TentMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSpace {
    Euclidean,
    /// The circle `[0, 1)`; states are reduced mod 1 after the noise is added.
    UnitCircle,
}

/// `X_{n+1} = project(f_{γ,n}(X_n) + Y_{n+1})`.
///
/// The `*_into` methods are the hot-loop entry points and assume the caller
/// has already checked dimensions; the free functions in this module check.
pub trait DynamicalSystem: Send + Sync {
    fn name(&self) -> &str;

    /// Dimension of `X_n`.
    fn dim(&self, step: usize) -> usize;

    fn is_time_homogeneous(&self) -> bool {
        true
    }

    fn phase_space(&self) -> PhaseSpace {
        PhaseSpace::Euclidean
    }

    /// `out = f_{γ,n}(x)`, before noise and projection.
    fn step_into(&self, gamma: f64, step: usize, x: &[f64], out: &mut [f64]);

    /// `out = ∂f_{γ,n}(x)/∂γ`.
    fn param_derivative_into(&self, gamma: f64, step: usize, x: &[f64], out: &mut [f64]);

    fn has_jacobian(&self) -> bool {
        false
    }

    /// `out = (Df_{γ,n}(x))ᵀ w`.
    fn jacobian_transpose_into(&self, _gamma: f64, _step: usize, _x: &[f64], _w: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported(format!("{} provides no Jacobian", self.name())))
    }

    fn project_in_place(&self, x: &mut [f64]) {
        if self.phase_space() == PhaseSpace::UnitCircle {
            for v in x.iter_mut() {
                *v -= v.floor();
            }
        }
    }

    /// Starting point for spin-up in the stationary estimators.
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.dim(0)]
    }
}

pub fn step_map(sys: &dyn DynamicalSystem, gamma: f64, step: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_dim("step_map input", sys.dim(step), x.len())?;
    let mut out = vec![0.0; sys.dim(step + 1)];
    sys.step_into(gamma, step, x, &mut out);
    Ok(out)
}

pub fn param_derivative(sys: &dyn DynamicalSystem, gamma: f64, step: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_dim("param_derivative input", sys.dim(step), x.len())?;
    let mut out = vec![0.0; sys.dim(step + 1)];
    sys.param_derivative_into(gamma, step, x, &mut out);
    Ok(out)
}

pub fn project(sys: &dyn DynamicalSystem, x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    sys.project_in_place(&mut out);
    out
}

pub fn jacobian_transpose_apply(sys: &dyn DynamicalSystem, gamma: f64, step: usize, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    check_dim("jacobian_transpose_apply state", sys.dim(step), x.len())?;
    check_dim("jacobian_transpose_apply covector", sys.dim(step + 1), w.len())?;
    let mut out = vec![0.0; sys.dim(step)];
    sys.jacobian_transpose_into(gamma, step, x, w, &mut out)?;
    Ok(out)
}

/// The three shipped systems behind one concrete type.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinSystem {
    Tent(TentMap),
    ChaoticNet(ChaoticNet),
    Ar1(Ar1Benchmark),
}

impl BuiltinSystem {
    fn inner(&self) -> &dyn DynamicalSystem {
        match self {
            BuiltinSystem::Tent(s) => s,
            BuiltinSystem::ChaoticNet(s) => s,
            BuiltinSystem::Ar1(s) => s,
        }
    }
}

impl DynamicalSystem for BuiltinSystem {
    fn name(&self) -> &str {
        self.inner().name()
    }
    fn dim(&self, step: usize) -> usize {
        self.inner().dim(step)
    }
    fn phase_space(&self) -> PhaseSpace {
        self.inner().phase_space()
    }
    fn step_into(&self, gamma: f64, step: usize, x: &[f64], out: &mut [f64]) {
        self.inner().step_into(gamma, step, x, out)
    }
    fn param_derivative_into(&self, gamma: f64, step: usize, x: &[f64], out: &mut [f64]) {
        self.inner().param_derivative_into(gamma, step, x, out)
    }
    fn has_jacobian(&self) -> bool {
        self.inner().has_jacobian()
    }
    fn jacobian_transpose_into(&self, gamma: f64, step: usize, x: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner().jacobian_transpose_into(gamma, step, x, w, out)
    }
    fn project_in_place(&self, x: &mut [f64]) {
        self.inner().project_in_place(x)
    }
    fn initial_state(&self) -> Vec<f64> {
        self.inner().initial_state()
    }
}
