use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used for probabilities, distances and fits.
///
/// Implemented for `f32` and `f64`. Exact quantities (tree hitting
/// probabilities, occupancy probabilities) use `num_rational::BigRational`
/// instead.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 converts to every Scalar")
    }

    fn of_count(count: u64) -> Self {
        Self::from_u64(count).expect("u64 converts to every Scalar")
    }

    /// z-score of the two-sided 95% normal interval.
    fn z95() -> Self {
        Self::of(1.959_963_984_540_054)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
