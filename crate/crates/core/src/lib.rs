//! tnlab — a numerical laboratory for spectra of non-normal Toeplitz
//! matrices under small random perturbations.
//!
//! The crate builds banded-plus-decaying Toeplitz matrices from their symbol,
//! embeds them into circulants, perturbs them with small complex Gaussian
//! noise, and measures how the perturbed spectra distribute along the symbol
//! curve: eigenvalue counts in smooth domains against the curve's arclength
//! prediction, log-determinant ladders through bordered (Grushin) systems,
//! and convergence of empirical log-potentials to the limiting curve
//! potential.
//!
//! Everything is generic over the real scalar type through [`scalar::Real`];
//! the aliases below fix the common `f64` instantiation.

pub mod analysis;
pub mod error;
pub mod grushin;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod symbol;

pub use error::{Error, Result};
pub use scalar::{cplx, Cplx, Real};

/// Complex double — the default working scalar of the command-line tools.
pub type C64 = num_complex::Complex<f64>;
/// Complex single, for quick low-precision experiments.
pub type C32 = num_complex::Complex<f32>;
/// Symbol over `f64`.
pub type Symbol64 = symbol::Symbol<f64>;
/// Dense complex matrix over `f64`.
pub type Matrix64 = linalg::DenseMatrix<f64>;
/// Spectrum of a dense `f64` matrix.
pub type Spectrum64 = linalg::SpectrumResult<f64>;
