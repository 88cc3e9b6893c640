//! Stability and Hopf bifurcation analysis of the delayed p53–Mdm2 feedback loop.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: parameters, the interaction functions `f` and `g`, the delayed
//!   vector field and closed-form partial derivatives up to third order.
//! - [`equilibrium`]: the unique positive stationary state.
//! - [`spectral`]: linearization, the characteristic quasi-polynomial,
//!   critical frequency/delay and the transversality derivative.
//! - [`normal_form`]: center-manifold reduction at the Hopf point and the
//!   direction/stability/period classification.
//! - [`sim`]: a fixed-step method-of-steps integrator with dense output,
//!   normal-form waveform reconstruction and oscillation measurement.
//!
//! [`analysis::analyze`] chains the stages for a single parameter set.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod model;
pub mod normal_form;
pub mod sim;
pub mod spectral;

pub use analysis::{analyze, Analysis};
pub use equilibrium::{solve_equilibrium, Equilibrium};
pub use error::{Error, Result};
pub use model::{DerivativeTensors, ModelParams, Partials, StatePoint};
pub use normal_form::{Classification, NormalForm};
pub use spectral::{CharCoeffs, HopfPoint, LinearizationPair};

pub use num_complex::Complex64;
