//! Truncated normals, stratified quantiles and sum-preserving rounding.

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::CalibrationError;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Normal(mu, sigma) restricted to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    pub mu: f64,
    pub sigma: f64,
    pub lo: f64,
    pub hi: f64,
}

impl TruncatedNormal {
    pub fn mean(&self) -> f64 {
        if self.sigma == 0.0 {
            return self.mu.clamp(self.lo, self.hi);
        }
        let n = std_normal();
        let a = (self.lo - self.mu) / self.sigma;
        let b = (self.hi - self.mu) / self.sigma;
        let z = n.cdf(b) - n.cdf(a);
        if z < 1e-300 {
            return if self.mu < self.lo { self.lo } else { self.hi };
        }
        self.mu + self.sigma * (n.pdf(a) - n.pdf(b)) / z
    }

    /// Value at quantile `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        if self.sigma == 0.0 {
            return self.mu.clamp(self.lo, self.hi);
        }
        let n = std_normal();
        let a = n.cdf((self.lo - self.mu) / self.sigma);
        let b = n.cdf((self.hi - self.mu) / self.sigma);
        let p = (a + u.clamp(0.0, 1.0) * (b - a)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        (self.mu + self.sigma * n.inverse_cdf(p)).clamp(self.lo, self.hi)
    }

    /// The truncated normal on `[lo, hi]` with spread `sigma` whose mean is `target`.
    pub fn with_mean(target: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self, CalibrationError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(CalibrationError::Infeasible(format!(
                "sd {sigma} must be finite and >= 0"
            )));
        }
        let inside = if sigma == 0.0 {
            (lo..=hi).contains(&target)
        } else {
            target > lo && target < hi
        };
        if !inside {
            return Err(CalibrationError::Infeasible(format!(
                "mean {target} is not attainable on [{lo}, {hi}] with sd {sigma}"
            )));
        }
        let make = |mu| Self { mu, sigma, lo, hi };
        if sigma == 0.0 {
            return Ok(make(target));
        }
        let (mut a, mut b) = (lo - 10.0 * sigma, hi + 10.0 * sigma);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if make(mid).mean() < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(make(0.5 * (a + b)))
    }
}

/// One quantile per member, one member per stratum `[k/n, (k+1)/n)`, with
/// strata assigned to members in random order.
pub fn stratified_quantiles(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut strata: Vec<usize> = (0..n).collect();
    strata.shuffle(rng);
    strata
        .into_iter()
        .map(|k| (k as f64 + rng.gen::<f64>()) / n as f64)
        .collect()
}

/// Rounds each value to a neighbouring integer so that running totals stay
/// within one of the exact running totals. Each value rounds up with
/// probability equal to its fractional part.
pub fn systematic_round(values: &[f64], offset: f64) -> Vec<i64> {
    let mut acc = 0.0;
    let mut prev = offset.floor() as i64;
    values
        .iter()
        .map(|v| {
            acc += v;
            let next = (acc + offset).floor() as i64;
            let r = next - prev;
            prev = next;
            r
        })
        .collect()
}
