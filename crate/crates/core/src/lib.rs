//! Simulator core for 2D shallow-water / isentropic compressible flow with
//! density-proportional viscosities, written in the variables
//! `phi = rho^((gamma-1)/2)`, `psi = grad rho / rho` and `u`.

// `!(x > 0.0)` is used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod error;
pub mod fields;
pub mod inequality;
pub mod lame;
pub mod model;
pub mod monitors;
pub mod picard;
pub mod transport;

pub use error::{Error, Result};
pub use fields::{Grid2D, NormSpec, ScalarField, TensorField, VectorField};
pub use model::{ModelSpec, RegularizationParams, State, Variant};
