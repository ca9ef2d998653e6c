//! Numerical laboratory for a beam-string-beam transmission problem.
//!
//! Two Euler-Bernoulli beams, each clamped at its outer end and optionally
//! Kelvin-Voigt damped, are joined through a frictionally damped string.
//! The crate discretizes the coupled system with conforming finite
//! elements, integrates it with an energy-exact scheme and analyses the
//! spectrum and resolvent of the discrete generator.

// Input checks are written as `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod fem;
pub mod model;
pub mod spectral;

pub use nalgebra::Complex;

pub use fem::{Discretization, FemError, StateVector, SystemPencil};
pub use model::{DampingCase, InitialData, ModelError, Profile, StructureConfig};
