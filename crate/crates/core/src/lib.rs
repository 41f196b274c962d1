//! Function theory of scalar L-systems built on symmetric operators with
//! deficiency indices (1,1).
//!
//! The crate evaluates the chain of functions attached to a dissipative
//! triple and its conservative realization:
//!
//! * the Weyl-Titchmarsh function `M` of a Borel measure ([`measures`]),
//! * the Livsic function `s`, the characteristic function `S`, the transfer
//!   function `W` and the impedance function `V`, related by Möbius maps
//!   ([`calculus`]),
//! * membership tests for the Donoghue classes and the realization of
//!   normalized impedances ([`donoghue`]),
//! * the 2×2 parametrization of (*)-extensions ([`biextension`]),
//! * a finite functional model with its rank-one resolvent ([`model`]),
//! * closed forms for the operator `i d/dt` on an interval ([`examples`]).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biextension;
pub mod calculus;
pub mod donoghue;
mod error;
pub mod examples;
pub mod grid;
pub mod measures;
pub mod model;
pub mod quadrature;
pub mod suites;

pub use calculus::{AnalyticFn, Role, UnimodularFactor, VonNeumannKappa};
pub use error::{Error, EvalError, Result};
pub use grid::GridSpec;
pub use measures::{MeasureSpec, QuadratureConfig};
pub use model::DiscreteModel;

pub use num_complex::Complex64;

/// The imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);
