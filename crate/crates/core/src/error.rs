//! Crate-wide error type.
//!
//! Numerical routines that can fail for structural reasons (singular pivots,
//! iteration caps, degenerate thresholds) return `Result<_, Error>`; plain
//! arithmetic helpers stay infallible.

use thiserror::Error;

/// Everything that can go wrong inside the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration file or parameter set is structurally invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A symbol tail was requested whose coefficient series does not
    /// converge absolutely (power-law exponent must exceed 2).
    #[error("tail term with exponent {exponent} does not define a summable symbol")]
    NonSummableTail { exponent: f64 },

    /// The query point lies on (or numerically indistinguishable from) the
    /// symbol curve, so a winding number is undefined.
    #[error("point ({re}, {im}) lies on the symbol curve; winding number undefined")]
    PointOnCurve { re: f64, im: f64 },

    /// Matrix dimensions do not line up for the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Gaussian elimination hit a pivot too small to trust.
    #[error("matrix is singular to working precision (pivot {pivot:e} at step {step})")]
    SingularMatrix { step: usize, pivot: f64 },

    /// The iterative eigenvalue or singular value solver exhausted its
    /// iteration budget before deflating every value.
    #[error("{solver} failed to converge within {iterations} iterations")]
    ConvergenceFailure { solver: &'static str, iterations: usize },

    /// The bordered operator matrix could not be inverted at this point.
    #[error("Grushin problem singular at z = ({re}, {im})")]
    SingularGrushin { re: f64, im: f64 },

    /// A singular value sits numerically on the splitting threshold, so the
    /// small/large partition is ill-defined.
    #[error("singular value {value:e} straddles threshold {threshold:e}")]
    ThresholdDegenerate { value: f64, threshold: f64 },

    /// The Neumann series for the perturbed Schur complement does not
    /// converge because the perturbation is too large.
    #[error("Neumann condition violated: delta * |G| * |Q| = {product} >= 1")]
    NeumannViolation { product: f64 },

    /// A log-potential was requested exactly at (or too close to) an atom of
    /// the empirical measure.
    #[error("evaluation point collides with spectrum atom (distance {distance:e})")]
    AtomCollision { distance: f64 },

    /// A quadrature point sits too close to the symbol curve for the
    /// logarithmic integrand to be evaluated reliably.
    #[error("point is too close to the symbol curve (distance {distance:e})")]
    TooCloseToCurve { distance: f64 },

    /// A closed parametric boundary intersects itself and cannot bound a
    /// Jordan domain.
    #[error("domain boundary is self-intersecting near parameter {near}")]
    SelfIntersectingBoundary { near: f64 },

    /// Underlying I/O failure while dumping or reading artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
