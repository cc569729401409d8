use serde::{Deserialize, Serialize};

use super::StatsError;

/// Five-number summary with Tukey whiskers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::TooSmall { needed: 1, got: 0 });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NotFinite);
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Quantile of sorted data, interpolating linearly at position `(n - 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn boxplot_stats(samples: &[f64]) -> Result<BoxplotStats, StatsError> {
    let v = sorted(samples)?;
    let q1 = quantile_sorted(&v, 0.25);
    let q3 = quantile_sorted(&v, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || v.iter().copied().filter(|x| (lo_fence..=hi_fence).contains(x));
    Ok(BoxplotStats {
        min: v[0],
        q1,
        median: quantile_sorted(&v, 0.5),
        q3,
        max: v[v.len() - 1],
        lower_whisker: inside().next().unwrap_or(q1).min(q1),
        upper_whisker: inside().next_back().unwrap_or(q3).max(q3),
        outliers: v.iter().copied().filter(|x| *x < lo_fence || *x > hi_fence).collect(),
    })
}

pub fn mean(samples: &[f64]) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::TooSmall { needed: 1, got: 0 });
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_std(samples: &[f64]) -> Result<f64, StatsError> {
    let m = mean(samples)?;
    if samples.len() < 2 {
        return Ok(0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - m).powi(2)).sum();
    Ok((ss / (samples.len() - 1) as f64).sqrt())
}

/// Standardises each row to zero mean and unit population standard deviation.
/// Constant rows become all zeros.
pub fn zscore_radar(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, StatsError> {
    rows.iter()
        .map(|row| {
            if row.len() < 2 {
                return Err(StatsError::TooSmall {
                    needed: 2,
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(StatsError::NotFinite);
            }
            let m = mean(row)?;
            let sd = (row.iter().map(|x| (x - m).powi(2)).sum::<f64>() / row.len() as f64).sqrt();
            let spread = row.iter().map(|x| (x - m).abs()).fold(0.0, f64::max);
            if sd == 0.0 || spread <= 1e-12 * m.abs().max(1.0) {
                return Ok(vec![0.0; row.len()]);
            }
            Ok(row.iter().map(|x| (x - m) / sd).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_values() {
        let b = boxplot_stats(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert!(b.outliers.is_empty());
        assert_eq!((b.lower_whisker, b.upper_whisker), (1.0, 5.0));
    }

    #[test]
    fn single_value() {
        let b = boxplot_stats(&[0.7]).unwrap();
        for x in [b.min, b.q1, b.median, b.q3, b.max] {
            assert_eq!(x, 0.7);
        }
    }

    #[test]
    fn far_point_is_an_outlier() {
        let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.upper_whisker, 4.0);
        assert_eq!(b.max, 100.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(boxplot_stats(&[]).is_err());
    }

    #[test]
    fn radar_rows() {
        let z = zscore_radar(&[vec![0.4, 0.6, 0.75], vec![0.5, 0.5, 0.5]]).unwrap();
        let expected = [-1.278_724_026_182, 0.116_247_638_744, 1.162_476_387_438];
        for (a, b) in z[0].iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(z[1], vec![0.0; 3]);
        assert!(zscore_radar(&[vec![1.0]]).is_err());
    }
}
