//! Exact-diagonalization toolkit for criticality-based quantum metrology
//! on the ferromagnetic XXZ spin chain in a transverse field.
//!
//! The crate computes ground-state fidelity susceptibility and quantum
//! Fisher information, estimator precision via the error-propagation
//! formula, ramp and sudden-quench dynamics, finite-temperature
//! crossovers, and the closed-form critical exponents the model predicts,
//! together with power-law fitting and data-collapse transforms for
//! finite-size scaling studies.

pub mod error;
pub mod linalg;
pub mod model;

pub mod eig;
pub mod dynamics;
pub mod metrology;
pub mod scaling;

pub use error::{Error, Result};
