//! Steady-state squeezing of a single bosonic mode coupled to white-noise
//! input-output channels.
//!
//! The crate works at the level of second moments only. It provides:
//!
//! * [`symplectic`]: symplectic forms, passive (orthogonal symplectic)
//!   interferometers, Haar sampling and block decompositions.
//! * [`dynamics`]: drift/diffusion matrices, Hurwitz checks, Lyapunov steady
//!   states and direct integration of the covariance equation.
//! * [`feedback`]: effective open systems produced by an arbitrary passive
//!   coherent-feedback loop, together with the loop scalars and the `N̄/2`
//!   squeezing certificate.
//! * [`monitoring`]: conditional steady states under general-dyne and
//!   homodyne monitoring of the output field.
//! * [`search`]: randomized certification campaigns and regime sweeps.
//!
//! Phase-space vectors are ordered `(x₁, p₁, x₂, p₂, …)` throughout and
//! covariance matrices are in vacuum units (vacuum = identity).

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod feedback;
pub mod monitoring;
pub mod search;
pub mod symplectic;

pub use error::{Error, Result};

/// Dense real matrix used across the crate.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Largest absolute entry of a matrix (zero for empty matrices).
pub fn max_norm(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}
