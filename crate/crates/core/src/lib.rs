//! Continuous-variable quantum-information toolkit.
//!
//! The crate implements the Gaussian phase-space calculus (states,
//! symplectic operations, measurements, entanglement criteria and measures)
//! plus four protocol studies built on top of it:
//!
//! * [`qkd`] — key distribution from digitalized Gaussian quadratures,
//!   with security analysis against individual and finite-coherent attacks;
//! * [`broadcast`] — a three-party detectable-broadcast protocol driven by
//!   a symmetric tripartite Gaussian resource;
//! * [`nongauss`] — the bit-quadrature-correlation measure Q for Gaussian
//!   and non-Gaussian two-mode states, via a polynomial×Gaussian Wigner
//!   representation;
//! * [`atomlight`] — measurement-induced multipartite entanglement between
//!   atomic ensembles through a QND atom-light interface.
//!
//! Conventions (used by every module): quadrature ordering
//! (x₁, p₁, x₂, p₂, …); vacuum covariance γ = I; statistical covariance of
//! quadrature outcomes γ/2; variance of a linear form ℓᵀR equals ℓᵀ(γ/2)ℓ.

// `!(x >= 0.0)`-style guards are deliberate: unlike `x < 0.0` they also
// reject NaN. Index loops over moment orders and bit patterns stay as
// ranges because the index itself is the quantity of interest.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atomlight;
pub mod broadcast;
pub mod entanglement;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod nongauss;
pub mod ops;
pub mod phase_space;
pub mod qkd;
pub mod rng;

pub use error::{Error, Result};
pub use ops::{GaussianChannel, HomodyneOutcome, SymplecticTransform};
pub use phase_space::{GaussianState, ModePartition, StandardFormParams, SymplecticForm};
