//! Numerical laboratory for alternative Hamiltonian descriptions.
//!
//! The classical half builds one-degree-of-freedom Hamiltonian systems,
//! computes their period functions and canonical partition functions by
//! several independent estimators, and measures whether deformed descriptions
//! `(H_φ, Ω_φ)` of the same dynamics reproduce the same thermodynamics. The
//! quantum half does the analogous experiment with Hermitian structures on
//! finite-dimensional state spaces and with nonlinear ladder operators on a
//! truncated Fock space.

pub mod deformations;
pub mod error;
pub mod ode;
pub mod period_lab;
pub mod phase_flow;
pub mod quad;
pub mod roots;

pub use error::{Error, Result};
