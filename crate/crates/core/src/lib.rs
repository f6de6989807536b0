//! Discretized continuous-variable Deutsch-Jozsa simulator.
//!
//! The position axis of a single qunat register is sampled on a centered
//! grid whose spacing is fixed to `sqrt(pi / n)`. With that choice the
//! continuum Fourier kernel `exp(2ixy)` becomes the centered DFT and is
//! exactly unitary, so the constant/balanced dichotomy of the algorithm
//! survives discretization without approximation.
//!
//! Layout:
//!
//! - [`grid`]: query and ancilla discretizations.
//! - [`qstate`]: state vectors, joint states and the binary state dump.
//! - [`gates`]: Fourier transform, modular adder, oracles, dense reference path.
//! - [`promise`]: promise functions, the interval mini-language, balance checks.
//! - [`djcv`]: the end-to-end pipeline and measurement windows.
//! - [`baseline`]: classical query strategies and the separation table.
//! - [`cli`]: configuration and dispatch behind the `cvdj` binary.

pub mod baseline;
pub mod cli;
pub mod djcv;
pub mod error;
pub mod gates;
pub mod grid;
pub mod promise;
pub mod qstate;

pub use error::{Error, Result};
pub use grid::{AncillaGrid, Grid};
pub use qstate::{JointState, StateVector};
