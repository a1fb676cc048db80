//! Inversion of the finite Markov moment problem.
//!
//! Given `K = 2n` scaled moments `m_k = sum_j u_{2j}^k - u_{2j-1}^k` of a
//! `{0, 1}`-valued step density, recover the switch points `u_1 <= ... <= u_K`
//! through two lower-triangular Toeplitz solves and two Hankel generalized
//! eigenvalue problems.
//!
//! - [`toeplitz`]: lower-triangular Toeplitz algebra and the scaling matrix.
//! - [`newton`]: monic polynomials, power sums and root finding.
//! - [`pencil`]: Hankel pencils and their generalized eigenvalues.
//! - [`markov`]: the forward map, the inversion pipeline and diagnostics.
//! - [`cli`], [`io`], [`selftest`]: the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod markov;
pub mod newton;
pub mod pencil;
pub mod scalar;
pub mod selftest;
pub mod toeplitz;

pub use error::{Error, Result};
pub use markov::{
    density_from_switches, forward_moments, invert_moments, moments_from_density,
    perturbation_probe, residual, solve_ab, InversionOptions, InversionReport, MomentVector,
    Precision, StepDensity, SwitchConfiguration,
};
pub use scalar::Real;
