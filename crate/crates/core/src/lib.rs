//! Quantum and classical dynamics of a scalar particle in arbitrary inertial
//! and gravitational fields.
//!
//! The pipeline runs from analytic metric components ([`expr`], [`metric`])
//! through curvature ([`curvature`]) to grid operators for the two-component
//! Hamiltonian and its Foldy-Wouthuysen form ([`operator`]), with the
//! classical limit in [`classical`].

pub mod error;
pub mod expr;
pub mod metric;
pub mod curvature;
pub mod operator;
pub mod classical;
pub mod config;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
