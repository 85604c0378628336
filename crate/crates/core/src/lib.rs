//! Spectral toolkit for regular Sturm-Liouville problems
//! `y'' + (λ w + q) y = 0` whose weight `w` changes sign.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`);
//! the scans, certificates and command line work in `f64`. The aliases
//! below name the `f64` instances.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod classify;
pub mod cli;
pub mod coefficients;
pub mod contour;
pub mod error;
pub mod io;
pub mod norms;
pub mod ode;
pub mod oscillation;
pub mod propagator;
pub mod richardson;
pub mod scalar;
pub mod spectrum;

pub use error::{Result, SlError};

pub type Problem = coefficients::ProblemSpec<f64>;
pub type Coefficient = coefficients::PiecewiseCoefficient<f64>;
pub type Piece = coefficients::Piece<f64>;
pub type Potential = coefficients::QProfile<f64>;
pub type Canonical = coefficients::CanonicalProblem<f64>;
pub type State = propagator::StateVector<f64>;
pub type Transfer = propagator::TransferMatrix<f64>;

pub type ProblemF32 = coefficients::ProblemSpec<f32>;
pub type CoefficientF32 = coefficients::PiecewiseCoefficient<f32>;
pub type StateF32 = propagator::StateVector<f32>;
pub type TransferF32 = propagator::TransferMatrix<f32>;
