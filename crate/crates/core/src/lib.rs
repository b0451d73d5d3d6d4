//! A desk-scale laboratory for the circle problem.
//!
//! The crate counts lattice points in the disc `x^2 + y^2 <= t` exactly,
//! builds the saw-tooth and exponential sums that describe the error term
//! `P(t) - pi t`, reformulates those sums around stationary points and
//! rational anchors, checks derivative envelopes on interval decompositions,
//! and tracks the exponents of the resulting bounds with exact rationals.
//!
//! Layers:
//!
//! * [`numeric`]: exact integer roots, phases mod 1, saw-tooth, compensated sums.
//! * [`lattice`]: `P(t)`, brute-force oracle, the saw-tooth sum and its identities.
//! * [`fourier`]: truncated saw-tooth Fourier series and the annulus histogram.
//! * [`chain`]: the exponential sum and its successive reformulations.
//! * [`range`]: closed-form derivatives, interval cuts, envelope checks.
//! * [`exponent`]: exact exponent calculus and scripted derivations.
//! * [`harness`]: sweeps, fits, CSV/JSON/SVG emission.

pub mod chain;
pub mod error;
pub mod exponent;
pub mod fourier;
pub mod harness;
pub mod lattice;
pub mod numeric;
pub mod range;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Complex values returned by the exponential-sum layer.
pub type ComplexValue<S = f64> = num_complex::Complex<S>;
pub type Complex64 = ComplexValue<f64>;
pub type Complex32 = ComplexValue<f32>;

/// Exact exponents.
pub type Rational = num_rational::Ratio<i64>;

pub type ExactSqrt64 = numeric::ExactSqrt<f64>;
pub type ExactSqrt32 = numeric::ExactSqrt<f32>;
pub type Phase64 = numeric::Phase<f64>;
pub type Taylor64 = series::Taylor<f64>;
pub type RangeCut64 = range::RangeCut<f64>;
