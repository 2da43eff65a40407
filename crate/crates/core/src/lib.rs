//! Internal DLA on Cayley graphs of groups of exponential growth.
//!
//! The exact paths cover the homogeneous trees `T_q`; the lamplighter group
//! `Z wr Z2` is available for Monte Carlo hitting estimates.

pub mod acceptance;
pub mod balls;
pub mod error;
pub mod experiments;
pub mod green;
pub mod group;
pub mod idla;
pub mod scalar;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use group::{GroupElement, GroupKind, GroupModel, Word};
pub use scalar::Scalar;
pub use walk::SeedSpec;

pub type HittingEstimate64 = green::HittingEstimate<f64>;
pub type HittingEstimate32 = green::HittingEstimate<f32>;
pub type HittingDistance64 = green::HittingDistance<f64>;
pub type HittingDistance32 = green::HittingDistance<f32>;
pub type MetricConstants64 = green::MetricConstants<f64>;
pub type MetricConstants32 = green::MetricConstants<f32>;
pub type FitResult64 = experiments::FitResult<f64>;
pub type FitResult32 = experiments::FitResult<f32>;
/// Exact probabilities on trees and in the occupancy problem.
pub type ExactProbability = num_rational::BigRational;
