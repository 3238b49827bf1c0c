use super::DynamicalSystem;
use crate::error::{invalid, Result};

/// Linear contraction `f_γ(x) = a x + γ`.
///
/// Under zero-mean additive noise the stationary mean is `γ / (1 - a)`, so
/// the response of `Φ(x) = x` is exactly `1 / (1 - a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Benchmark {
    a: f64,
}

impl Ar1Benchmark {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(invalid("a", format!("contraction needs |a| < 1, got {a}")));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn stationary_mean(&self, gamma: f64) -> f64 {
        gamma / (1.0 - self.a)
    }

    pub fn response(&self) -> f64 {
        1.0 / (1.0 - self.a)
    }
}

impl Default for Ar1Benchmark {
    fn default() -> Self {
        Self { a: 0.5 }
    }
}

impl DynamicalSystem for Ar1Benchmark {
    fn name(&self) -> &str {
        "ar1"
    }

    fn dim(&self, _step: usize) -> usize {
        1
    }

    #[inline]
    fn step_into(&self, gamma: f64, _step: usize, x: &[f64], out: &mut [f64]) {
        out[0] = self.a * x[0] + gamma;
    }

    #[inline]
    fn param_derivative_into(&self, _gamma: f64, _step: usize, _x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn has_jacobian(&self) -> bool {
        true
    }

    fn jacobian_transpose_into(&self, _gamma: f64, _step: usize, _x: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = self.a * w[0];
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::GaussianNoise;
    use crate::rng::RngStream;
    use crate::stats::BatchMeans;
    use crate::systems::{jacobian_transpose_apply, test_support};

    #[test]
    fn rejects_non_contraction() {
        assert!(Ar1Benchmark::new(1.0).is_err());
        assert!(Ar1Benchmark::new(-1.5).is_err());
        assert!(Ar1Benchmark::new(f64::NAN).is_err());
    }

    #[test]
    fn jacobian_is_a() {
        let s = Ar1Benchmark::new(0.5).unwrap();
        assert_eq!(jacobian_transpose_apply(&s, 0.0, 0, &[3.0], &[1.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn derivatives_match_fd() {
        test_support::check_derivatives(&Ar1Benchmark::new(0.7).unwrap(), (-1.0, 1.0), (-2.0, 2.0), 3);
    }

    #[test]
    fn stationary_mean_by_simulation() {
        let s = Ar1Benchmark::new(0.5).unwrap();
        let noise = GaussianNoise::isotropic(1, 0.1).unwrap();
        let gamma = 0.3;
        let mut rng = RngStream::new(2024, 0);
        let mut x = [0.0];
        let mut z = [0.0];
        let mut y = [0.0];
        for _ in 0..1000 {
            s.step_into(gamma, 0, &x, &mut z);
            noise.sample_into(&mut rng, &mut y);
            x[0] = z[0] + y[0];
        }
        let n = 1_000_000;
        let mut bm = BatchMeans::new(n, 50).unwrap();
        for i in 0..n {
            s.step_into(gamma, 0, &x, &mut z);
            noise.sample_into(&mut rng, &mut y);
            x[0] = z[0] + y[0];
            bm.push(i, x[0]);
        }
        assert!((bm.mean() - 0.6).abs() <= 4.0 * bm.std_error(), "{} ± {}", bm.mean(), bm.std_error());
    }
}
