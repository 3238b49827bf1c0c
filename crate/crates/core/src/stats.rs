//! Streaming moments, batch means and log-log regression.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Single-pass mean and variance accumulator (Welford update, Chan merge).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one value. Non-finite values are rejected and leave the state untouched.
    pub fn push(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(invalid("x", format!("non-finite sample {x}")));
        }
        self.push_unchecked(x);
        Ok(())
    }

    #[inline]
    pub(crate) fn push_unchecked(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Consuming form of [`push`](Self::push).
    pub fn accumulate(mut self, x: f64) -> Result<Self> {
        self.push(x)?;
        Ok(self)
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n_a = self.count as f64;
        let n_b = other.count as f64;
        let n = n_a + n_b;
        let delta = other.mean - self.mean;
        self.mean += delta * (n_b / n);
        self.m2 += other.m2 + delta * delta * (n_a * n_b / n);
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 when fewer than two values were seen.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Naive standard error of the mean, `s / sqrt(n)`.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    /// True when the variance is undefined (fewer than two samples).
    pub fn is_degenerate(&self) -> bool {
        self.count < 2
    }
}

impl Extend<f64> for MomentAccumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push_unchecked(x);
        }
    }
}

impl FromIterator<f64> for MomentAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        acc.extend(iter);
        acc
    }
}

/// Online batch-means estimator for a series of known length.
///
/// Element `i` of a series of length `len` goes to batch `i * n_batches / len`,
/// giving batches whose sizes differ by at most one.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    len: usize,
    batches: Vec<MomentAccumulator>,
}

impl BatchMeans {
    pub fn new(len: usize, n_batches: usize) -> Result<Self> {
        if n_batches < 2 {
            return Err(invalid("n_batches", "need at least 2 batches"));
        }
        if len < 2 * n_batches {
            return Err(Error::TooShort {
                needed: 2 * n_batches,
                found: len,
            });
        }
        Ok(Self {
            len,
            batches: vec![MomentAccumulator::new(); n_batches],
        })
    }

    #[inline]
    pub fn batch_of(&self, index: usize) -> usize {
        ((index as u128 * self.batches.len() as u128) / self.len as u128) as usize
    }

    #[inline]
    pub fn push(&mut self, index: usize, value: f64) {
        let b = self.batch_of(index);
        self.batches[b].push_unchecked(value);
    }

    fn batch_mean_moments(&self) -> MomentAccumulator {
        self.batches.iter().map(|b| b.mean()).collect()
    }

    /// Mean of the batch means.
    pub fn mean(&self) -> f64 {
        self.batch_mean_moments().mean()
    }

    pub fn std_error(&self) -> f64 {
        let m = self.batch_mean_moments();
        (m.variance() / self.batches.len() as f64).sqrt()
    }
}

/// Standard error of the grand mean of a serially correlated series.
pub fn batch_means_stderr(series: &[f64], n_batches: usize) -> Result<f64> {
    let mut bm = BatchMeans::new(series.len(), n_batches)?;
    for (i, &x) in series.iter().enumerate() {
        bm.push(i, x);
    }
    Ok(bm.std_error())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    /// Natural-log intercept: `ln y ≈ intercept + slope * ln x`.
    pub intercept: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            found: points.len(),
        });
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(invalid(
            "points",
            format!("log-log fit needs positive coordinates, got ({x}, {y})"),
        ));
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x.ln(), sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points {
        let dx = x.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    if sxx == 0.0 {
        return Err(invalid("points", "all x values are equal"));
    }
    let slope = sxy / sxx;
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
    })
}
