//! Hitting probability `F`, Green function `G`, hitting distance `d = -ln F`
//! and the radius unit `K`.
//!
//! On `T_q` everything is closed form: `F(z) = (q-1)^-|z|`, `K = ln(q-1)`,
//! `G(e) = (q-1)/(q-2)`. Elsewhere `F` is estimated by truncated hitting
//! walks and every derived quantity carries a 95% half-width.
//!
//! Values are kept in the log domain where they can underflow: `F` on a
//! tree is below `f64::MIN_POSITIVE` once `|z|` passes about a thousand.

use std::cmp::Ordering;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::scalar::Scalar;
use crate::walk::{hit_walk, HitOutcome, SeedSpec, DEFAULT_ESCAPE_MARGIN};

/// Stop doubling once fewer than this fraction of trials is censored.
pub const CENSORED_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    MonteCarlo,
}

/// Trial budget and truncation policy for Monte Carlo hitting estimates.
///
/// The cutoff starts at `initial_cutoff` and doubles until the censored
/// fraction drops below [`CENSORED_TOLERANCE`] or `max_cutoff` is reached.
/// A stable hit count alone does not stop the doubling: censored trials
/// are the unresolved part of the estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub initial_cutoff: u64,
    pub max_cutoff: u64,
    pub escape_margin: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: 10_000,
            initial_cutoff: 64,
            max_cutoff: 1 << 22,
            escape_margin: DEFAULT_ESCAPE_MARGIN,
        }
    }
}

impl McConfig {
    pub fn with_trials(trials: u64) -> Self {
        McConfig {
            trials,
            ..McConfig::default()
        }
    }

    /// A single pass at a fixed cutoff.
    pub fn fixed_cutoff(trials: u64, cutoff: u64) -> Self {
        McConfig {
            trials,
            initial_cutoff: cutoff,
            max_cutoff: cutoff,
            escape_margin: DEFAULT_ESCAPE_MARGIN,
        }
    }
}

/// A hitting probability with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingEstimate<T> {
    pub value: T,
    /// 95% half-width, clamped so that `value - half_width >= 0`; zero when exact.
    pub half_width: T,
    /// Binomial standard error `sqrt(p(1-p)/n)`.
    pub std_error: T,
    /// Fraction of trials neither hit nor escaped at the final cutoff.
    pub censored_fraction: T,
    pub provenance: Provenance,
    pub trials: u64,
    pub hits: u64,
    /// Final cutoff, zero for exact values.
    pub cutoff: u64,
}

impl<T: Scalar> HittingEstimate<T> {
    pub fn exact(value: T) -> Self {
        HittingEstimate {
            value,
            half_width: T::zero(),
            std_error: T::zero(),
            censored_fraction: T::zero(),
            provenance: Provenance::Exact,
            trials: 0,
            hits: 0,
            cutoff: 0,
        }
    }

    fn from_counts(trials: u64, hits: u64, censored: u64, cutoff: u64) -> Self {
        let n = T::of_count(trials);
        let p = T::of_count(hits) / n;
        let std_error = (p * (T::one() - p) / n).sqrt();
        HittingEstimate {
            value: p,
            half_width: (T::z95() * std_error).min(p),
            std_error,
            censored_fraction: T::of_count(censored) / n,
            provenance: Provenance::MonteCarlo,
            trials,
            hits,
            cutoff,
        }
    }
}

/// `ln F(z) = -|z| ln(q-1)` on `T_q`.
pub fn tree_log_f<T: Scalar>(model: &GroupModel, z: &GroupElement) -> Result<T> {
    let q = model.tree_degree("tree_F")?;
    model.validate(z)?;
    Ok(-T::of_count(model.word_length(z)) * T::of_count(q as u64 - 1).ln())
}

/// `F(z) = (q-1)^-|z|` as an exact rational.
pub fn tree_f_exact(model: &GroupModel, z: &GroupElement) -> Result<BigRational> {
    let q = model.tree_degree("tree_F")?;
    model.validate(z)?;
    let denominator: BigInt = Pow::pow(BigInt::from(q - 1), model.word_length(z));
    Ok(BigRational::new(BigInt::one(), denominator))
}

/// Runs the hitting trials for `target` from `e` under the doubling policy.
/// Returns `(hits, censored, final cutoff)`.
fn hitting_trials(model: &GroupModel, target: &GroupElement, cfg: &McConfig, seed: SeedSpec) -> (u64, u64, u64) {
    let mut pending: Vec<u64> = (0..cfg.trials).collect();
    let mut hits = 0u64;
    let mut cutoff = cfg.initial_cutoff.max(1);
    loop {
        // A trial rerun with a longer cutoff replays the same prefix, so
        // earlier hits and escapes stay valid and only censored trials rerun.
        let outcomes: Vec<(u64, HitOutcome)> = pending
            .par_iter()
            .map(|&i| {
                let mut rng = seed.child(i).rng();
                (i, hit_walk(model, target, cutoff, cfg.escape_margin, &mut rng))
            })
            .collect();
        hits += outcomes.iter().filter(|(_, o)| o.is_hit()).count() as u64;
        pending = outcomes
            .iter()
            .filter(|(_, o)| matches!(o, HitOutcome::Censored { .. }))
            .map(|&(i, _)| i)
            .collect();

        let n = cfg.trials as f64;
        if (pending.len() as f64) < CENSORED_TOLERANCE * n || cutoff >= cfg.max_cutoff {
            break;
        }
        cutoff = cutoff.saturating_mul(2).min(cfg.max_cutoff);
    }
    (hits, pending.len() as u64, cutoff)
}

/// Monte Carlo estimate of `F(x, y)`, run as `F(x^-1 y)` from `e`.
pub fn mc_f<T: Scalar>(
    model: &GroupModel,
    x: &GroupElement,
    y: &GroupElement,
    cfg: &McConfig,
    seed: SeedSpec,
) -> Result<HittingEstimate<T>> {
    model.validate(x)?;
    model.validate(y)?;
    if x == y {
        return Ok(HittingEstimate::exact(T::one()));
    }
    if cfg.trials < 100 {
        return Err(Error::InvalidInput(format!(
            "at least 100 trials are required, got {}",
            cfg.trials
        )));
    }
    let target = model.multiply(&model.inverse(x), y)?;
    let (hits, censored, cutoff) = hitting_trials(model, &target, cfg, seed);
    Ok(HittingEstimate::from_counts(cfg.trials, hits, censored, cutoff))
}

/// `F(x, y)`: exact on trees, Monte Carlo otherwise.
pub fn hitting_probability<T: Scalar>(
    model: &GroupModel,
    x: &GroupElement,
    y: &GroupElement,
    cfg: &McConfig,
    seed: SeedSpec,
) -> Result<HittingEstimate<T>> {
    if model.exact_formulas() {
        let z = model.multiply(&model.inverse(x), y)?;
        Ok(HittingEstimate::exact(tree_log_f::<T>(model, &z)?.exp()))
    } else {
        mc_f(model, x, y, cfg, seed)
    }
}

/// Exact hitting distance on `T_q`: `units * ln(base)` with `base = q - 1`.
///
/// Sums and comparisons are done on the integer `units`, so metric
/// inequalities hold without rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeDistance {
    pub units: u64,
    pub base: u32,
}

impl TreeDistance {
    pub fn value<T: Scalar>(&self) -> T {
        T::of_count(self.units) * T::of_count(self.base as u64).ln()
    }
}

impl Add for TreeDistance {
    type Output = TreeDistance;

    fn add(self, other: TreeDistance) -> TreeDistance {
        assert_eq!(self.base, other.base, "distances on different trees");
        TreeDistance {
            units: self.units + other.units,
            base: self.base,
        }
    }
}

impl PartialOrd for TreeDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.base == other.base).then(|| self.units.cmp(&other.units))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provenance", rename_all = "kebab-case")]
pub enum HittingDistance<T> {
    Exact(TreeDistance),
    MonteCarlo {
        value: T,
        /// Delta-method 95% half-width, `half_width(F) / F`.
        half_width: T,
        std_error: T,
        censored_fraction: T,
    },
    /// No trial hit the target: the distance exceeds what the budget resolves.
    Unresolved { trials: u64, censored_fraction: T },
}

impl<T: Scalar> HittingDistance<T> {
    /// Point value; `+inf` when unresolved.
    pub fn value(&self) -> T {
        match self {
            HittingDistance::Exact(d) => d.value(),
            HittingDistance::MonteCarlo { value, .. } => *value,
            HittingDistance::Unresolved { .. } => T::infinity(),
        }
    }

    pub fn half_width(&self) -> T {
        match self {
            HittingDistance::Exact(_) => T::zero(),
            HittingDistance::MonteCarlo { half_width, .. } => *half_width,
            HittingDistance::Unresolved { .. } => T::infinity(),
        }
    }

    pub fn std_error(&self) -> T {
        match self {
            HittingDistance::Exact(_) => T::zero(),
            HittingDistance::MonteCarlo { std_error, .. } => *std_error,
            HittingDistance::Unresolved { .. } => T::infinity(),
        }
    }

    pub fn is_resolved(&self) -> bool {
        !matches!(self, HittingDistance::Unresolved { .. })
    }

    fn from_estimate(est: &HittingEstimate<T>) -> Self {
        if est.hits == 0 && est.provenance == Provenance::MonteCarlo {
            return HittingDistance::Unresolved {
                trials: est.trials,
                censored_fraction: est.censored_fraction,
            };
        }
        HittingDistance::MonteCarlo {
            value: -est.value.ln(),
            half_width: est.half_width / est.value,
            std_error: est.std_error / est.value,
            censored_fraction: est.censored_fraction,
        }
    }
}

/// `d(x, y) = -ln F(x, y)`.
pub fn hitting_distance<T: Scalar>(
    model: &GroupModel,
    x: &GroupElement,
    y: &GroupElement,
    cfg: &McConfig,
    seed: SeedSpec,
) -> Result<HittingDistance<T>> {
    if model.exact_formulas() {
        let q = model.tree_degree("hitting_distance")?;
        return Ok(HittingDistance::Exact(TreeDistance {
            units: model.word_distance(x, y)?,
            base: q - 1,
        }));
    }
    if x == y {
        model.validate(x)?;
        return Ok(HittingDistance::MonteCarlo {
            value: T::zero(),
            half_width: T::zero(),
            std_error: T::zero(),
            censored_fraction: T::zero(),
        });
    }
    let est = mc_f::<T>(model, x, y, cfg, seed)?;
    Ok(HittingDistance::from_estimate(&est))
}

/// `K = max_{s in S} d(e, s)` and the Green function at the identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConstants<T> {
    pub k: T,
    pub k_half_width: T,
    pub green_identity: T,
    pub green_identity_half_width: T,
    pub provenance: Provenance,
}

pub fn constant_k<T: Scalar>(model: &GroupModel, cfg: &McConfig, seed: SeedSpec) -> Result<MetricConstants<T>> {
    if model.exact_formulas() {
        let q = T::of_count(model.degree() as u64);
        let two = T::of_count(2);
        return Ok(MetricConstants {
            k: (q - T::one()).ln(),
            k_half_width: T::zero(),
            green_identity: (q - T::one()) / (q - two),
            green_identity_half_width: T::zero(),
            provenance: Provenance::Exact,
        });
    }
    let e = model.identity();
    let estimates = model
        .generators()
        .iter()
        .map(|s| mc_f::<T>(model, &e, &model.generator_element(s.id), cfg, seed.child(s.id as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut k = T::neg_infinity();
    let mut k_half_width = T::zero();
    for est in &estimates {
        let d = HittingDistance::from_estimate(est);
        if d.value() > k {
            k = d.value();
            k_half_width = d.half_width();
        }
    }
    // First step to s, then hit e from s: return probability is the mean of F(s^-1).
    let m = T::of_count(estimates.len() as u64);
    let return_probability = estimates.iter().map(|e| e.value).sum::<T>() / m;
    let return_se = estimates.iter().map(|e| e.std_error * e.std_error).sum::<T>().sqrt() / m;
    let green_identity = T::one() / (T::one() - return_probability);
    Ok(MetricConstants {
        k,
        k_half_width,
        green_identity,
        green_identity_half_width: T::z95() * green_identity * green_identity * return_se,
        provenance: Provenance::MonteCarlo,
    })
}

/// Green function value stored as `ln G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenValue<T> {
    pub ln_value: T,
    /// 95% half-width of `G` itself; zero when exact.
    pub half_width: T,
    pub provenance: Provenance,
}

impl<T: Scalar> GreenValue<T> {
    pub fn value(&self) -> T {
        self.ln_value.exp()
    }
}

/// `ln G(z) = ln G(e) + ln F(z)` on `T_q`.
pub fn tree_log_green<T: Scalar>(model: &GroupModel, z: &GroupElement) -> Result<T> {
    let log_f = tree_log_f::<T>(model, z)?;
    let q = T::of_count(model.degree() as u64);
    Ok(((q - T::one()) / (q - T::of_count(2))).ln() + log_f)
}

/// `G(x, y) = G(e) F(x, y)`.
pub fn green<T: Scalar>(
    model: &GroupModel,
    x: &GroupElement,
    y: &GroupElement,
    cfg: &McConfig,
    seed: SeedSpec,
) -> Result<GreenValue<T>> {
    if model.exact_formulas() {
        let z = model.multiply(&model.inverse(x), y)?;
        return Ok(GreenValue {
            ln_value: tree_log_green(model, &z)?,
            half_width: T::zero(),
            provenance: Provenance::Exact,
        });
    }
    let constants = constant_k::<T>(model, cfg, seed.child(0))?;
    let f = mc_f::<T>(model, x, y, cfg, seed.child(1))?;
    let g = constants.green_identity * f.value;
    let relative = ((constants.green_identity_half_width / constants.green_identity).powi(2)
        + if f.value > T::zero() {
            (f.half_width / f.value).powi(2)
        } else {
            T::zero()
        })
    .sqrt();
    Ok(GreenValue {
        ln_value: g.ln(),
        half_width: g * relative,
        provenance: Provenance::MonteCarlo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn t(q: u8) -> GroupModel {
        GroupModel::tree(q).unwrap()
    }

    fn elem(model: &GroupModel, s: &str) -> GroupElement {
        model.parse(s).unwrap()
    }

    #[test]
    fn tree_f_examples() {
        let t3 = t(3);
        assert_eq!(tree_log_f::<f64>(&t3, &t3.identity()).unwrap(), 0.0);
        assert!((tree_log_f::<f64>(&t3, &elem(&t3, "ab")).unwrap().exp() - 0.25).abs() < 1e-15);
        let t4 = t(4);
        let z = elem(&t4, "abA");
        assert!((tree_log_f::<f64>(&t4, &z).unwrap().exp() - 1.0 / 27.0).abs() < 1e-15);
        assert_eq!(
            tree_f_exact(&t4, &z).unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(27))
        );
        // f32 path agrees with f64
        let lf32 = tree_log_f::<f32>(&t4, &z).unwrap() as f64;
        assert!((lf32 - (1.0f64 / 27.0).ln()).abs() < 1e-5);
    }

    #[test]
    fn tree_f_log_domain_does_not_underflow() {
        let t3 = t(3);
        let far = t3.reduce(&[0, 1].repeat(1000)).unwrap();
        let lf = tree_log_f::<f64>(&t3, &far).unwrap();
        assert!((lf + 2000.0 * 2f64.ln()).abs() < 1e-9);
        assert!(lf.is_finite());
    }

    #[test]
    fn tree_f_rejects_lamplighter() {
        let g = GroupModel::lamplighter();
        assert!(matches!(
            tree_log_f::<f64>(&g, &g.identity()),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn mc_f_identity_is_exact() {
        let t3 = t(3);
        let x = elem(&t3, "abc");
        let est = mc_f::<f64>(&t3, &x, &x, &McConfig::with_trials(1000), SeedSpec::new(0, 0)).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.trials, 0);
        assert_eq!(est.provenance, Provenance::Exact);
    }

    #[test]
    fn mc_f_requires_trials() {
        let t3 = t(3);
        let r = mc_f::<f64>(&t3, &t3.identity(), &elem(&t3, "a"), &McConfig::with_trials(50), SeedSpec::new(0, 0));
        assert!(r.is_err());
    }

    #[test]
    fn mc_f_neighbour_on_t3_is_one_half() {
        let t3 = t(3);
        let est = mc_f::<f64>(
            &t3,
            &elem(&t3, "ab"),
            &elem(&t3, "abc"),
            &McConfig::with_trials(100_000),
            SeedSpec::new(31, 0),
        )
        .unwrap();
        let sigma = (0.25f64 / 1e5).sqrt();
        assert!((est.value - 0.5).abs() < 3.0 * sigma, "{est:?}");
        assert!(est.censored_fraction < 1e-3);
        assert!(est.value - est.half_width >= 0.0);
    }

    #[test]
    fn lamplighter_toggle_is_symmetric() {
        let g = GroupModel::lamplighter();
        let e = g.identity();
        let a = elem(&g, "a");
        let cfg = McConfig::with_trials(4000);
        let fwd = mc_f::<f64>(&g, &e, &a, &cfg, SeedSpec::new(8, 1)).unwrap();
        let back = mc_f::<f64>(&g, &a, &e, &cfg, SeedSpec::new(8, 2)).unwrap();
        assert!(fwd.value > 0.0 && fwd.value < 1.0);
        let joint = (fwd.std_error.powi(2) + back.std_error.powi(2)).sqrt();
        assert!((fwd.value - back.value).abs() <= 3.0 * joint, "{fwd:?} {back:?}");
    }

    #[test]
    fn doubling_the_cutoff_nests_the_bracket() {
        let g = GroupModel::lamplighter();
        let e = g.identity();
        let y = elem(&g, "tat");
        let seed = SeedSpec::new(12, 0);
        let mut last: Option<HittingEstimate<f64>> = None;
        for cutoff in [16u64, 32, 64, 128, 256] {
            let est = mc_f::<f64>(&g, &e, &y, &McConfig::fixed_cutoff(2000, cutoff), seed).unwrap();
            if let Some(prev) = last {
                assert!(est.value >= prev.value);
                assert!(est.value + est.censored_fraction <= prev.value + prev.censored_fraction + 1e-12);
            }
            last = Some(est);
        }
    }

    #[test]
    fn tree_distance_examples() {
        let t3 = t(3);
        let x = elem(&t3, "abc");
        let cfg = McConfig::default();
        let s = SeedSpec::new(0, 0);
        assert_eq!(hitting_distance::<f64>(&t3, &x, &x, &cfg, s).unwrap().value(), 0.0);
        let z = elem(&t3, "abcab");
        let d = hitting_distance::<f64>(&t3, &t3.identity(), &z, &cfg, s).unwrap();
        assert!((d.value() - 5.0 * 2f64.ln()).abs() < 1e-12);
        assert!((d.value() - 3.4657).abs() < 1e-4);
    }

    #[test]
    fn tree_constants() {
        for q in [3u8, 4, 5, 6] {
            let c = constant_k::<f64>(&t(q), &McConfig::default(), SeedSpec::new(0, 0)).unwrap();
            assert!((c.k - ((q - 1) as f64).ln()).abs() < 1e-15);
            assert!((c.green_identity - (q as f64 - 1.0) / (q as f64 - 2.0)).abs() < 1e-15);
        }
        let c3 = constant_k::<f64>(&t(3), &McConfig::default(), SeedSpec::new(0, 0)).unwrap();
        assert_eq!(c3.green_identity, 2.0);
    }

    #[test]
    fn green_identity_matches_first_return_oracle() {
        // Return probability from a neighbour is 1/(q-1); G(e) = 1/(1 - 1/(q-1)).
        for q in 3u8..8 {
            let oracle = 1.0 / (1.0 - 1.0 / (q as f64 - 1.0));
            let c = constant_k::<f64>(&t(q), &McConfig::default(), SeedSpec::new(0, 0)).unwrap();
            assert!((c.green_identity - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn lamplighter_constants_are_reproducible() {
        let g = GroupModel::lamplighter();
        let cfg = McConfig::with_trials(1000);
        let a = constant_k::<f64>(&g, &cfg, SeedSpec::new(4, 0)).unwrap();
        let b = constant_k::<f64>(&g, &cfg, SeedSpec::new(4, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.k > 0.0 && a.k.is_finite());
        assert!(a.k_half_width.is_finite());
        assert!(a.green_identity > 1.0);
    }

    #[test]
    fn green_examples() {
        let t3 = t(3);
        let cfg = McConfig::default();
        let s = SeedSpec::new(0, 0);
        let e = t3.identity();
        let g_ee = green::<f64>(&t3, &e, &e, &cfg, s).unwrap();
        assert!((g_ee.value() - 2.0).abs() < 1e-12);
        let g_a = green::<f64>(&t3, &e, &elem(&t3, "a"), &cfg, s).unwrap();
        assert!((g_a.value() - 1.0).abs() < 1e-12);
        let x = elem(&t3, "ab");
        let y = elem(&t3, "cab");
        assert_eq!(
            green::<f64>(&t3, &x, &y, &cfg, s).unwrap(),
            green::<f64>(&t3, &y, &x, &cfg, s).unwrap()
        );
    }

    #[test]
    fn tree_distance_ordering_is_exact() {
        let a = TreeDistance { units: 2, base: 2 };
        let b = TreeDistance { units: 3, base: 2 };
        assert!(a + b <= TreeDistance { units: 5, base: 2 });
        assert!(a.partial_cmp(&TreeDistance { units: 2, base: 3 }).is_none());
        assert_eq!((a + b).value::<f64>().to_f64().unwrap(), 5.0 * 2f64.ln());
    }
}
