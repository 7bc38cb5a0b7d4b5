//! Numerical toolkit for controlled spin systems.
//!
//! The crate covers the full path from model construction to control
//! synthesis and verification:
//!
//! - [`linalg`]: dense complex matrix algebra, Hermitian/unitary wrapper
//!   types, spectral matrix exponentials.
//! - [`spin`]: single-excitation chain Hamiltonians, the binary switch
//!   actuator, and the electron-nuclear hyperfine system.
//! - [`controllability`]: dynamical Lie-algebra closure and the su(n)
//!   rank test.
//! - [`bangbang`]: switching-sequence (bang-bang) gate synthesis with
//!   fidelity and Hamiltonian-angle diagnostics.
//! - [`pulse`]: piecewise-constant pulse optimization (GRAPE) with exact
//!   eigenbasis gradients and Bloch-vector extraction.
//! - [`ft`]: Pauli-group weight spectra, penalized gate objectives, and a
//!   seven-qubit CSS code with single-error correction.
//! - [`opensys`]: Lindblad and stochastic master equation integrators
//!   with measurement-current feedback.
//!
//! All Hamiltonians are stored in angular-frequency units; propagators
//! are `exp(-i t H)` with `t` in the inverse units of `H`.

pub mod bangbang;
pub mod controllability;
pub mod error;
pub mod ft;
pub mod linalg;
pub mod opensys;
pub mod pulse;
pub mod spin;
mod stream;

pub use error::{Error, Result};
