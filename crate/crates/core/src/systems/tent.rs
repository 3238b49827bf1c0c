use super::{DynamicalSystem, PhaseSpace};
use crate::error::Result;

/// Tent map with adjustable peak height `γ/2`, on the circle.
///
/// `f_γ(x) = γx` for `x ≤ 0.5`, `γ(1 - x)` otherwise.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TentMap;

impl DynamicalSystem for TentMap {
    fn name(&self) -> &str {
        "tent"
    }

    fn dim(&self, _step: usize) -> usize {
        1
    }

    fn phase_space(&self) -> PhaseSpace {
        PhaseSpace::UnitCircle
    }

    #[inline]
    fn step_into(&self, gamma: f64, _step: usize, x: &[f64], out: &mut [f64]) {
        let x = x[0];
        out[0] = if x <= 0.5 { gamma * x } else { gamma * (1.0 - x) };
    }

    #[inline]
    fn param_derivative_into(&self, _gamma: f64, _step: usize, x: &[f64], out: &mut [f64]) {
        let x = x[0];
        out[0] = if x <= 0.5 { x } else { 1.0 - x };
    }

    fn has_jacobian(&self) -> bool {
        true
    }

    /// Left derivative at the kink `x = 0.5`.
    fn jacobian_transpose_into(&self, gamma: f64, _step: usize, x: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = if x[0] <= 0.5 { gamma * w[0] } else { -gamma * w[0] };
        Ok(())
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![0.3]
    }
}
