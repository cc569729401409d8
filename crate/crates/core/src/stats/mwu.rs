//! Two-sided Mann-Whitney U test with midranks for ties.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

/// Exact enumeration is used when the smaller sample has at most this many values.
pub const EXACT_MAX_SMALLER: usize = 8;
/// ...and the pooled sample has at most this many.
pub const EXACT_MAX_TOTAL: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwuMethod {
    Exact,
    NormalApproximation,
}

impl MwuMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MwuMethod::Exact => "exact",
            MwuMethod::NormalApproximation => "normal_approximation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwuResult {
    /// U for the first sample: its rank sum minus `n1 (n1 + 1) / 2`.
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: MwuMethod,
    pub n1: usize,
    pub n2: usize,
}

fn check(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(StatsError::TooSmall {
                needed: 2,
                got: s.len(),
            });
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NotFinite);
        }
    }
    Ok(())
}

/// Midranks of the pooled sample, doubled so they are integers, plus tie group sizes.
fn doubled_midranks(a: &[f64], b: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut pooled: Vec<(f64, usize)> = a.iter().chain(b).copied().zip(0..).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0u64; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their average; doubled that is i + j + 2.
        for item in &pooled[i..=j] {
            ranks[item.1] = (i + j + 2) as u64;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

pub fn u_statistic(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    check(a, b)?;
    let (ranks, _) = doubled_midranks(a, b);
    let doubled_sum: u64 = ranks[..a.len()].iter().sum();
    let n1 = a.len() as f64;
    Ok(doubled_sum as f64 / 2.0 - n1 * (n1 + 1.0) / 2.0)
}

/// Exact two-sided p from the permutation distribution of the first sample's
/// rank sum, ties included.
pub fn exact_p(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    check(a, b)?;
    let (ranks, _) = doubled_midranks(a, b);
    let n1 = a.len();
    let observed: u64 = ranks[..n1].iter().sum();
    let max_sum: u64 = ranks.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s.
    let width = max_sum as usize + 1;
    let mut ways = vec![vec![0f64; width]; n1 + 1];
    ways[0][0] = 1.0;
    for &r in &ranks {
        let r = r as usize;
        for k in (1..=n1).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let (prev, cur) = (&lower[k - 1], &mut upper[0]);
            for s in (r..width).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let dist = &ways[n1];
    let total: f64 = dist.iter().sum();
    let observed = observed as usize;
    let lower: f64 = dist[..=observed].iter().sum();
    let upper: f64 = dist[observed..].iter().sum();
    Ok((2.0 * lower.min(upper) / total).min(1.0))
}

/// Two-sided p from the normal approximation with tie-corrected variance and
/// continuity correction.
pub fn normal_approx_p(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    check(a, b)?;
    let (_, ties) = doubled_midranks(a, b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return Ok(1.0);
    }
    let u = u_statistic(a, b)?;
    let z = ((u - n1 * n2 / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    let tail = Normal::new(0.0, 1.0).expect("standard normal").sf(z);
    Ok((2.0 * tail).clamp(f64::MIN_POSITIVE, 1.0))
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MwuResult, StatsError> {
    check(a, b)?;
    let exact = a.len().min(b.len()) <= EXACT_MAX_SMALLER && a.len() + b.len() <= EXACT_MAX_TOTAL;
    let (p_value, method) = if exact {
        (exact_p(a, b)?, MwuMethod::Exact)
    } else {
        (normal_approx_p(a, b)?, MwuMethod::NormalApproximation)
    };
    Ok(MwuResult {
        u_statistic: u_statistic(a, b)?,
        p_value,
        method,
        n1: a.len(),
        n2: b.len(),
    })
}
