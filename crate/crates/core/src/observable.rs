//! Scalar observables `Φ` on the final state.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Kind {
    /// `x_i`; `"x"` is coordinate 0.
    Coordinate(usize),
    /// `(1/M) Σ x_i`.
    Mean,
    Custom {
        name: String,
        eval: Arc<EvalFn>,
        grad: Option<Arc<GradFn>>,
    },
}

/// `Φ(x) + shift`.
#[derive(Clone)]
pub struct Observable {
    kind: Kind,
    shift: f64,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({self})")
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Coordinate(0) => write!(f, "x")?,
            Kind::Coordinate(i) => write!(f, "x{i}")?,
            Kind::Mean => write!(f, "mean")?,
            Kind::Custom { name, .. } => write!(f, "{name}")?,
        }
        if self.shift != 0.0 {
            write!(f, "{:+}", self.shift)?;
        }
        Ok(())
    }
}

impl Observable {
    pub fn coordinate(i: usize) -> Self {
        Self {
            kind: Kind::Coordinate(i),
            shift: 0.0,
        }
    }

    pub fn identity() -> Self {
        Self::coordinate(0)
    }

    pub fn mean() -> Self {
        Self {
            kind: Kind::Mean,
            shift: 0.0,
        }
    }

    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: Kind::Custom {
                name: name.into(),
                eval: Arc::new(eval),
                grad: None,
            },
            shift: 0.0,
        }
    }

    /// Attaches an analytic gradient to a custom observable.
    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if let Kind::Custom { grad: g, .. } = &mut self.kind {
            *g = Some(Arc::new(grad));
        }
        self
    }

    /// `Φ + c`.
    pub fn shifted(mut self, c: f64) -> Self {
        self.shift += c;
        self
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.kind {
            Kind::Coordinate(i) if i >= dim => Err(invalid(
                "phi",
                format!("coordinate {i} out of range for dimension {dim}"),
            )),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = match &self.kind {
            Kind::Coordinate(i) => x[*i],
            Kind::Mean => x.iter().sum::<f64>() / x.len() as f64,
            Kind::Custom { eval, .. } => eval(x),
        };
        v + self.shift
    }

    pub fn has_gradient(&self) -> bool {
        !matches!(&self.kind, Kind::Custom { grad: None, .. })
    }

    /// `dΦ(x)` written into `out`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.kind {
            Kind::Coordinate(i) => {
                out.fill(0.0);
                out[*i] = 1.0;
            }
            Kind::Mean => out.fill(1.0 / x.len() as f64),
            Kind::Custom { grad: Some(g), .. } => {
                let v = g(x);
                crate::error::check_dim("observable gradient", out.len(), v.len())?;
                out.copy_from_slice(&v);
            }
            Kind::Custom { name, grad: None, .. } => {
                return Err(Error::Unsupported(format!("observable `{name}` has no gradient")))
            }
        }
        Ok(())
    }
}

impl FromStr for Observable {
    type Err = Error;

    /// Accepts `x`, `mean`, or `x<i>` for coordinate `i`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "x" => Ok(Self::identity()),
            "mean" => Ok(Self::mean()),
            _ => s
                .strip_prefix('x')
                .and_then(|i| i.parse::<usize>().ok())
                .map(Self::coordinate)
                .ok_or_else(|| invalid("phi", format!("unknown observable `{s}` (expected x, mean or x<i>)"))),
        }
    }
}
