//! Numerical core for the nonlinear, norm-preserving Schrödinger flow that
//! drives deterministic disentanglement between a chosen pair of subsystems
//! of a finite-dimensional multipartite pure state.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; IO, configuration and parallel sweeps live in the
//! `disentangle` crate.
//!
//! # Conventions
//!
//! * Subsystems are numbered from 1, as in the ket notation `|σ3σ2σ1⟩`.
//! * Basis index ordering is little-endian: subsystem 1 varies fastest, so
//!   the digits `(σN, …, σ2, σ1)` sit at `σ1 + d1·(σ2 + d2·(σ3 + …))`. A ket
//!   literal read left to right is the reversed digit list.
//! * Time is dimensionless, `s = γt`, and Hamiltonians are given in units of
//!   `ħγ`.

#![no_std]

extern crate alloc;

pub mod basin;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod gellmann;
pub mod hilbert;
pub mod matrix;
pub mod sampling;
pub mod statelib;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Tolerance for Hermiticity and normalization checks.
pub const TOL: f64 = 1e-12;
