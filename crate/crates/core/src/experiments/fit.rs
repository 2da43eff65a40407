//! Least-squares scaling fits of fluctuation curves.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitForm {
    /// `c ln n`
    Log,
    /// `c sqrt(n)`
    Sqrt,
    /// `c n^alpha`, fitted on `ln y = ln c + alpha ln n`.
    Power,
}

impl FitForm {
    pub fn label(&self) -> &'static str {
        match self {
            FitForm::Log => "c*ln(n)",
            FitForm::Sqrt => "c*sqrt(n)",
            FitForm::Power => "c*n^alpha",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub form: FitForm,
    /// `[c]` for the log and sqrt forms, `[c, alpha]` for the power form.
    pub coefficients: Vec<T>,
    pub r_squared: T,
    pub samples: usize,
}

impl<T: Scalar> FitResult<T> {
    pub fn c(&self) -> T {
        self.coefficients[0]
    }

    /// The power-law exponent; `None` unless the form is [`FitForm::Power`].
    pub fn alpha(&self) -> Option<T> {
        (self.form == FitForm::Power).then(|| self.coefficients[1])
    }
}

/// `1 - SS_res / SS_tot`, clamped to `[0, 1]`. A constant response that is
/// fitted exactly counts as `R² = 1`.
fn r_squared<T: Scalar>(ys: &[T], predicted: impl Iterator<Item = T>) -> T {
    let n = T::of_count(ys.len() as u64);
    let mean = ys.iter().copied().sum::<T>() / n;
    let ss_tot = ys.iter().map(|&y| (y - mean) * (y - mean)).sum::<T>();
    let ss_res = ys
        .iter()
        .zip(predicted)
        .map(|(&y, p)| (y - p) * (y - p))
        .sum::<T>();
    let scale = ys.iter().map(|y| y.abs()).fold(T::one(), T::max);
    let tiny = T::epsilon() * T::of(64.0) * scale * scale * n;
    if ss_tot <= tiny {
        return if ss_res <= tiny { T::one() } else { T::zero() };
    }
    (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one())
}

/// Fits `points = (n, y)` to `form`. Needs at least four distinct `n >= 1`.
///
/// The log and sqrt forms are fitted through the origin; the power form
/// needs `y > 0` everywhere.
pub fn fit<T: Scalar>(points: &[(u64, T)], form: FitForm) -> Result<FitResult<T>> {
    let distinct: BTreeSet<u64> = points.iter().map(|p| p.0).collect();
    if distinct.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 distinct n values, got {}",
            distinct.len()
        )));
    }
    if points.iter().any(|p| p.0 == 0) {
        return Err(Error::Fit("n must be at least 1".to_string()));
    }
    let ys: Vec<T> = points.iter().map(|p| p.1).collect();
    match form {
        FitForm::Log | FitForm::Sqrt => {
            let g = |n: u64| -> T {
                let n = T::of_count(n);
                if form == FitForm::Log {
                    n.ln()
                } else {
                    n.sqrt()
                }
            };
            let sxx = points.iter().map(|p| g(p.0) * g(p.0)).sum::<T>();
            if sxx <= T::zero() {
                return Err(Error::Fit("regressor is identically zero".to_string()));
            }
            let sxy = points.iter().map(|p| g(p.0) * p.1).sum::<T>();
            let c = sxy / sxx;
            Ok(FitResult {
                form,
                coefficients: vec![c],
                r_squared: r_squared(&ys, points.iter().map(|p| c * g(p.0))),
                samples: points.len(),
            })
        }
        FitForm::Power => {
            if let Some(bad) = points.iter().find(|p| p.1.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater)) {
                return Err(Error::Fit(format!(
                    "power fit needs positive values, got {} at n = {}",
                    bad.1, bad.0
                )));
            }
            let xs: Vec<T> = points.iter().map(|p| T::of_count(p.0).ln()).collect();
            let ls: Vec<T> = ys.iter().map(|y| y.ln()).collect();
            let m = T::of_count(xs.len() as u64);
            let mx = xs.iter().copied().sum::<T>() / m;
            let my = ls.iter().copied().sum::<T>() / m;
            let sxx = xs.iter().map(|&x| (x - mx) * (x - mx)).sum::<T>();
            if sxx <= T::epsilon() {
                return Err(Error::Fit("degenerate regressor variance".to_string()));
            }
            let sxy = xs.iter().zip(&ls).map(|(&x, &y)| (x - mx) * (y - my)).sum::<T>();
            let alpha = sxy / sxx;
            let intercept = my - alpha * mx;
            Ok(FitResult {
                form,
                coefficients: vec![intercept.exp(), alpha],
                r_squared: r_squared(&ls, xs.iter().map(|&x| intercept + alpha * x)),
                samples: points.len(),
            })
        }
    }
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, R²)`.
pub fn linear_regression<T: Scalar>(xs: &[T], ys: &[T]) -> Result<(T, T, T)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit("need at least two paired samples".to_string()));
    }
    let m = T::of_count(xs.len() as u64);
    let mx = xs.iter().copied().sum::<T>() / m;
    let my = ys.iter().copied().sum::<T>() / m;
    let sxx = xs.iter().map(|&x| (x - mx) * (x - mx)).sum::<T>();
    if sxx <= T::zero() {
        return Err(Error::Fit("degenerate regressor variance".to_string()));
    }
    let sxy = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum::<T>();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = r_squared(ys, xs.iter().map(|&x| intercept + slope * x));
    Ok((intercept, slope, r2))
}
