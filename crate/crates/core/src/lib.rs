//! Phase functions on the circle and certified `A_p` norms of e^{iλφ}.
//!
//! The crate builds a catalogue of phases — linear maps, the cosine benchmark,
//! piecewise-linear tents, primitives of Cantor-type staircases, and nested
//! nowhere-linear sums — computes Fourier coefficients of e^{iλφ} with
//! per-coefficient error bounds and certified tail estimates, and evaluates
//! A_p norms as rigorous [lo, hi] intervals. A companion module provides the
//! stationary-window witness machinery and the theoretical growth envelopes
//! that the norms are compared against.

// negated comparisons like `!(x > 0.0)` are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cantor;
pub mod error;
pub mod modulus;
pub mod phases;
pub mod quad;
pub mod spectrum;
pub mod util;

pub use bounds::{lip_estimate, WitnessReport};
pub use cantor::CantorLevels;
pub use error::{CoreError, Result};
pub use modulus::Modulus;
pub use num_complex::Complex64;
pub use phases::{NestedSchedule, PhaseFn};
pub use spectrum::{ap_norm, Engine, NormEstimate, Spectrum};
