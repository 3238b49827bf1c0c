use super::DynamicalSystem;
use crate::error::Result;

pub const NET_DIM: usize = 9;

/// Base weight matrix of the 9-neuron network; the map uses `J = C · J0`.
#[rustfmt::skip]
pub const J0: [[f64; NET_DIM]; NET_DIM] = [
    [-0.54, -1.19, -0.33,  1.66, -0.5,  -1.3,   1.52, -0.5,   1.95],
    [-1.6,  -1.55, -1.45,  0.61,  1.92,  0.59, -0.16, -1.14, -1.27],
    [-0.59, -0.65, -1.32, -1.46, -0.82, -0.95, -1.47, -0.08, -0.38],
    [-0.78, -0.26,  0.87,  1.99,  0.07,  0.87, -0.79, -0.44,  1.11],
    [ 0.8,  -1.28, -0.52, -1.01,  1.49,  1.49, -1.65, -0.45,  0.21],
    [-1.77,  0.03, -1.39, -0.28,  0.44,  1.27,  0.61,  0.01, -0.02],
    [-0.18, -0.29, -0.73,  0.53, -0.82, -1.58, -1.41,  0.07, -1.84],
    [ 0.64,  0.86,  0.73,  0.96, -0.06,  0.04,  1.1,   1.22, -0.28],
    [ 1.18, -1.95, -0.37,  0.01,  1.24, -0.32,  0.43,  0.06, -1.28],
];

/// Recurrent tanh network `f_γ(x) = J tanh(x + γ𝟙)` with `J = C · J0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticNet {
    c: f64,
    j: [[f64; NET_DIM]; NET_DIM],
}

impl ChaoticNet {
    pub fn new(c: f64) -> Self {
        let mut j = J0;
        for row in j.iter_mut() {
            for v in row.iter_mut() {
                *v *= c;
            }
        }
        Self { c, j }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn weights(&self) -> &[[f64; NET_DIM]; NET_DIM] {
        &self.j
    }
}

impl Default for ChaoticNet {
    fn default() -> Self {
        Self::new(4.0)
    }
}

impl DynamicalSystem for ChaoticNet {
    fn name(&self) -> &str {
        "chaotic_net"
    }

    fn dim(&self, _step: usize) -> usize {
        NET_DIM
    }

    fn step_into(&self, gamma: f64, _step: usize, x: &[f64], out: &mut [f64]) {
        let mut t = [0.0; NET_DIM];
        for (t, x) in t.iter_mut().zip(x) {
            *t = (x + gamma).tanh();
        }
        for (o, row) in out.iter_mut().zip(&self.j) {
            *o = row.iter().zip(&t).map(|(a, b)| a * b).sum();
        }
    }

    /// `J · sech²(x + γ𝟙)`.
    fn param_derivative_into(&self, gamma: f64, _step: usize, x: &[f64], out: &mut [f64]) {
        let mut d = [0.0; NET_DIM];
        for (d, x) in d.iter_mut().zip(x) {
            let t = (x + gamma).tanh();
            *d = 1.0 - t * t;
        }
        for (o, row) in out.iter_mut().zip(&self.j) {
            *o = row.iter().zip(&d).map(|(a, b)| a * b).sum();
        }
    }

    fn has_jacobian(&self) -> bool {
        true
    }

    /// `diag(sech²(x + γ𝟙)) Jᵀ w`.
    fn jacobian_transpose_into(&self, gamma: f64, _step: usize, x: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
        for (k, o) in out.iter_mut().enumerate() {
            let t = (x[k] + gamma).tanh();
            let col: f64 = (0..NET_DIM).map(|i| self.j[i][k] * w[i]).sum();
            *o = (1.0 - t * t) * col;
        }
        Ok(())
    }
}
