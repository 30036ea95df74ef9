//! Near-threshold bound states of two field-oriented dipoles.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); angular-momentum coupling coefficients are exact
//! rationals. The aliases below fix the scalar to `f64`.

// `!(x > 0.0)` style checks are deliberate: NaN must fail them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod basis;
pub mod bound;
pub mod error;
pub mod linalg;
pub mod num;
pub mod potential;
pub mod propagate;
pub mod scan;
pub mod units;
pub mod wkb;

pub use error::{Error, Result};
pub use num::Real;

pub type Model = potential::InteractionModel<f64>;
pub type Grid = propagate::PropagationGrid<f64>;
pub type LogDerivative = propagate::LogDerivativeState<f64>;
pub type BoundState = bound::BoundStateRecord<f64>;
pub type BoundStates = bound::BoundStateSearch<f64>;
pub type Coupling = basis::CouplingMatrix<f64>;
pub type Adiabats = potential::AdiabatCurves<f64>;
