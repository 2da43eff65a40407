//! Occupancy of `M` boxes by `N` uniformly thrown balls.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::SeedSpec;

/// Largest `M` for which the exact value is computed alongside the estimate.
pub const EXACT_BOX_LIMIT: u64 = 12;

/// `P[every box is occupied]` by inclusion-exclusion:
/// `sum_k (-1)^k C(M, k) (M - k)^N / M^N`.
pub fn occupancy_exact(balls: u64, boxes: u64) -> BigRational {
    let (favourable, total) = occupancy_counts(balls, boxes);
    BigRational::new(favourable, total)
}

/// The number of surjective placements and `M^N`, unreduced.
pub fn occupancy_counts(balls: u64, boxes: u64) -> (BigInt, BigInt) {
    let n = balls as u32;
    if boxes == 0 {
        return (BigInt::from(1), BigInt::from(1));
    }
    let mut numerator = BigInt::zero();
    let mut binom = BigInt::from(1);
    for k in 0..=boxes {
        let term = &binom * BigInt::from(boxes - k).pow(n);
        if k % 2 == 0 {
            numerator += term;
        } else {
            numerator -= term;
        }
        binom = binom * BigInt::from(boxes - k) / BigInt::from(k + 1);
    }
    (numerator, BigInt::from(boxes).pow(n))
}

/// `exp(-(M/2) exp(-4N/M))`.
pub fn occupancy_bound(balls: u64, boxes: u64) -> f64 {
    let m = boxes as f64;
    (-(m / 2.0) * (-4.0 * balls as f64 / m).exp()).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxesResult {
    pub balls: u64,
    pub boxes: u64,
    pub trials: u64,
    pub covered: u64,
    pub empirical: f64,
    pub std_error: f64,
    /// 95% Wald half-width.
    pub half_width: f64,
    pub bound: f64,
    /// Exact probability as the unreduced `"surjections/M^N"`, present when
    /// `M <= EXACT_BOX_LIMIT`.
    pub exact: Option<String>,
    pub exact_value: Option<f64>,
}

/// Estimates `P[every box is occupied]`; trial `i` uses substream `i` of `seed`.
pub fn balls_in_boxes(balls: u64, boxes: u64, trials: u64, seed: u64) -> Result<BoxesResult> {
    if boxes < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 boxes, got {boxes}")));
    }
    if trials < 1000 {
        return Err(Error::InvalidInput(format!("need at least 1000 trials, got {trials}")));
    }
    if boxes > u32::MAX as u64 || balls > u32::MAX as u64 {
        return Err(Error::InvalidInput("ball and box counts must fit in 32 bits".to_string()));
    }
    let base = SeedSpec::new(seed, 0);
    let covered: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = base.child(i).rng();
            let mut hit = vec![false; boxes as usize];
            let mut empty = boxes;
            for _ in 0..balls {
                let b = rng.gen_range(0..boxes as usize);
                if !hit[b] {
                    hit[b] = true;
                    empty -= 1;
                    if empty == 0 {
                        break;
                    }
                }
            }
            (empty == 0) as u64
        })
        .sum();
    let p = covered as f64 / trials as f64;
    let std_error = (p * (1.0 - p) / trials as f64).sqrt();
    let exact = (boxes <= EXACT_BOX_LIMIT).then(|| occupancy_counts(balls, boxes));
    Ok(BoxesResult {
        balls,
        boxes,
        trials,
        covered,
        empirical: p,
        std_error,
        half_width: 1.959_963_984_540_054 * std_error,
        bound: occupancy_bound(balls, boxes),
        exact_value: exact
            .as_ref()
            .and_then(|(a, b)| BigRational::new(a.clone(), b.clone()).to_f64()),
        exact: exact.map(|(a, b)| format!("{a}/{b}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn exact_examples() {
        assert_eq!(occupancy_exact(3, 3), ratio(6, 27));
        assert_eq!(occupancy_exact(5, 3), ratio(150, 243));
        assert_eq!(occupancy_exact(0, 3), ratio(0, 1));
        assert_eq!(occupancy_exact(2, 3), ratio(0, 1));
        assert!((occupancy_bound(5, 3) - 0.9981).abs() < 1e-4);
    }

    #[test]
    fn exact_matches_brute_force() {
        for m in 3..=5u64 {
            for n in 0..=7u64 {
                let total = m.pow(n as u32);
                let mut covered = 0u64;
                for code in 0..total {
                    let mut seen = vec![false; m as usize];
                    let mut c = code;
                    for _ in 0..n {
                        seen[(c % m) as usize] = true;
                        c /= m;
                    }
                    covered += seen.iter().all(|&s| s) as u64;
                }
                assert_eq!(occupancy_exact(n, m), ratio(covered as i64, total as i64), "M={m} N={n}");
            }
        }
    }

    #[test]
    fn bound_is_never_exceeded() {
        for m in 3..=12u64 {
            for n in 0..=40u64 {
                let exact = occupancy_exact(n, m).to_f64().unwrap();
                assert!(exact <= occupancy_bound(n, m), "M={m} N={n}");
            }
        }
    }

    #[test]
    fn estimate_is_close_and_reproducible() {
        let r = balls_in_boxes(5, 3, 20_000, 7).unwrap();
        let exact = 150.0 / 243.0;
        assert!((r.empirical - exact).abs() <= 4.0 * r.std_error.max(1e-3));
        assert_eq!(r.exact.as_deref(), Some("150/243"));
        assert_eq!(balls_in_boxes(5, 3, 20_000, 7).unwrap(), r);
        assert_eq!(balls_in_boxes(0, 3, 1000, 1).unwrap().covered, 0);
        assert!(balls_in_boxes(5, 2, 1000, 1).is_err());
        assert!(balls_in_boxes(5, 3, 999, 1).is_err());
        assert_eq!(balls_in_boxes(5, 13, 1000, 1).unwrap().exact, None);
    }
}
