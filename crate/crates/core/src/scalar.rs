//! Scalar abstraction: everything in this crate is generic over the real
//! field used for coefficients and matrix entries.
//!
//! `Real` is a convenience super-trait bundling the `num-traits` capabilities
//! the numerical kernels actually use (elementary functions, constants,
//! conversions from literals).  `f32` and `f64` satisfy it out of the box;
//! concrete aliases for the common `f64` instantiation live at the crate
//! root.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type usable by every algorithm in the crate.
///
/// The bound set is deliberately small: floating-point arithmetic with
/// assignment operators, mathematical constants, and conversion from
/// primitive literals.  Anything implementing these (notably `f32` and
/// `f64`) works everywhere, including the eigensolver and the Monte Carlo
/// driver.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Send + Sync + std::fmt::Debug + 'static
{
    /// Shorthand for `T::from_f64(x).unwrap()`, the only fallible conversion
    /// the crate relies on.  All call sites pass representable literals.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal must be representable in the scalar type")
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate's scalar abstraction.
pub type Cplx<T> = Complex<T>;

/// Builds a complex number from two `f64` literals, converting into the
/// target scalar type.  Used pervasively by constructors and tests.
pub fn cplx<T: Real>(re: f64, im: f64) -> Cplx<T> {
    Complex::new(T::of(re), T::of(im))
}
