//! Goodness-of-fit tests and small summary statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Pearson chi-square test of `counts` against the uniform distribution.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareTest> {
    if counts.len() < 2 {
        return Err(Error::InvalidInput("chi-square needs at least two cells".to_string()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("chi-square needs at least one sample".to_string()));
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum::<f64>();
    let dof = counts.len() as u64 - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // Q(0.2) = 1 - 6e-11
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100u32 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against `U(0, 1)`, with the
/// Stephens small-sample correction on the asymptotic p-value.
pub fn ks_uniform(samples: &[f64]) -> Result<KsTest> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("KS test needs samples".to_string()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let x = x.clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / n - x).max(x - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    Ok(KsTest {
        statistic: d,
        p_value: kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * d),
    })
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("KS test needs samples".to_string()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    Ok(KsTest {
        statistic: d,
        p_value: kolmogorov_sf((en + 0.12 + 0.11 / en) * d),
    })
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}

/// `sqrt(p (1 - p) / n)`.
pub fn binomial_std_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_perfect_fit() {
        let t = chi_square_uniform(&[10, 10, 10, 10]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 3);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_known_value() {
        // two degrees of freedom: sf(x) = exp(-x/2)
        let t = chi_square_uniform(&[10, 20, 30]).unwrap();
        assert!((t.statistic - 10.0).abs() < 1e-12);
        assert!((t.p_value - (-5.0f64).exp()).abs() < 1e-12);
        assert!(chi_square_uniform(&[3]).is_err());
        assert!(chi_square_uniform(&[0, 0]).is_err());
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) is the familiar 5% critical point, Q(1.63) the 1% one.
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.628) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(5.0) < 1e-20);
    }

    #[test]
    fn ks_uniform_grid_is_accepted() {
        let grid: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) / 200.0).collect();
        let t = ks_uniform(&grid).unwrap();
        assert!((t.statistic - 0.0025).abs() < 1e-12);
        assert!(t.p_value > 0.99);
        let skewed: Vec<f64> = grid.iter().map(|x| x * x).collect();
        assert!(ks_uniform(&skewed).unwrap().p_value < 1e-6);
    }

    #[test]
    fn ks_two_sample_detects_shift() {
        let a: Vec<f64> = (0..300).map(|i| i as f64).collect();
        let same = ks_two_sample(&a, &a).unwrap();
        assert_eq!(same.statistic, 0.0);
        let shifted: Vec<f64> = a.iter().map(|x| x + 150.0).collect();
        let t = ks_two_sample(&a, &shifted).unwrap();
        assert!((t.statistic - 0.5).abs() < 1e-9);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
