//! Dirichlet spectra of the killed symmetric α-stable process.
//!
//! The crate discretizes `(-Δ)^{α/2}` with the exterior Dirichlet condition on
//! bounded domains in one and two dimensions, computes full dense spectra, and
//! checks the classical spectral inequalities across the stability index. A
//! Monte Carlo module simulates the process itself through Brownian
//! subordination so that exit-time statistics can be compared against the
//! deterministic solves.
//!
//! Module map:
//!
//! * [`domain`]: domain shapes, rasterization onto cell-centered lattices.
//! * [`assembly`]: singular-kernel quadrature weights and the dense operator.
//! * [`eigen`]: Householder tridiagonalization, implicit QL, Richardson.
//! * [`laws`]: α-sweeps and the inequality checks that consume them.
//! * [`paths`]: counter-based RNG streams, stable sampling, exit times.
//! * [`io`]: the binary operator format and CSV tables.

pub mod assembly;
pub mod domain;
pub mod eigen;
mod error;
pub mod io;
pub mod laws;
pub mod par;
pub mod paths;
pub mod special;

pub use assembly::{assemble, kernel_constant, solve_linear, symbol_error, GridOperator, KernelConstant};
pub use domain::{Domain, Grid, Shape};
pub use eigen::{eigendecompose, eigenvalues, rayleigh_quotient, richardson, ExtrapolatedValue, Spectrum};
pub use error::{Error, Result};
pub use laws::{AlphaSweep, LawInstance, LawReport};
pub use paths::{ExitSample, RngStream, SurvivalEstimate};
