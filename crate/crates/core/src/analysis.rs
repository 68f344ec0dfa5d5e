//! Observables: smooth domains, Weyl eigenvalue counts, empirical measures,
//! logarithmic potentials, and Monte Carlo aggregation over random trials.
//!
//! The central quantity is the Weyl prediction
//! N/(2π) · L{θ : p(e^{iθ}) ∈ Ω} for the number of eigenvalues of the
//! perturbed matrix inside a smooth domain Ω, together with the normalized
//! counting error |count − prediction|/N.  Log-potentials give the
//! complementary weak-convergence diagnostic: the empirical potential
//! −(1/N)Σ ln|z−λ| against the curve average −(1/2π)∫ ln|z−p(e^{iθ})| dθ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, SpectrumResult};
use crate::matrix::{build_toeplitz, circulant_spectrum, perturb, sample_gaussian, trial_seed};
use crate::scalar::{cplx, Cplx, Real};
use crate::symbol::{CurveSamples, Symbol, SymbolConfig, Truncation};

// ---------------------------------------------------------------------------
// domains
// ---------------------------------------------------------------------------

/// A bounded open region with smooth, simple boundary: either a disc or a
/// closed periodic spline through control points.
#[derive(Clone, Debug)]
pub enum Domain<T> {
    Disc {
        center: Cplx<T>,
        radius: T,
    },
    /// Closed Catmull–Rom spline through the control points; `samples` holds
    /// the densely sampled boundary polygon used for membership tests.
    Parametric {
        control: Vec<Cplx<T>>,
        samples: Vec<Cplx<T>>,
    },
}

/// Points this close to the boundary are treated as outside: membership on a
/// measure-zero set is resolved deterministically.
const BOUNDARY_TIE: f64 = 1e-12;

/// Periodic Catmull–Rom point on segment `i` at local parameter `u ∈ [0,1)`.
fn spline_point<T: Real>(control: &[Cplx<T>], i: usize, u: T) -> Cplx<T> {
    let m = control.len();
    let p = |k: isize| control[(k.rem_euclid(m as isize)) as usize];
    let (p0, p1, p2, p3) = (p(i as isize - 1), p(i as isize), p(i as isize + 1), p(i as isize + 2));
    let half = T::of(0.5);
    let u2 = u * u;
    let u3 = u2 * u;
    let c0 = p1.scale(T::of(2.0));
    let c1 = (p2 - p0).scale(u);
    let c2 = (p0.scale(T::of(2.0)) - p1.scale(T::of(5.0)) + p2.scale(T::of(4.0)) - p3).scale(u2);
    let c3 = (p1.scale(T::of(3.0)) - p0 - p2.scale(T::of(3.0)) + p3).scale(u3);
    (c0 + c1 + c2 + c3).scale(half)
}

/// Intersection test for segments ab and cd: proper crossings and exact
/// touching (an endpoint landing on the other segment) both count, since a
/// boundary that revisits a point is just as degenerate as one that crosses
/// itself.
fn segments_cross<T: Real>(a: Cplx<T>, b: Cplx<T>, c: Cplx<T>, d: Cplx<T>) -> bool {
    let orient = |p: Cplx<T>, q: Cplx<T>, r: Cplx<T>| {
        let v = (q - p).conj() * (r - p);
        v.im
    };
    let in_box = |p: Cplx<T>, q: Cplx<T>, r: Cplx<T>| {
        r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < T::zero() && o3 * o4 < T::zero() {
        return true;
    }
    (o1.is_zero() && in_box(a, b, c))
        || (o2.is_zero() && in_box(a, b, d))
        || (o3.is_zero() && in_box(c, d, a))
        || (o4.is_zero() && in_box(c, d, b))
}

impl<T: Real> Domain<T> {
    pub fn disc(center: Cplx<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::Config("disc domain needs a finite center and radius > 0".into()));
        }
        Ok(Domain::Disc { center, radius })
    }

    /// Builds the spline domain and rejects self-intersecting boundaries by a
    /// pairwise segment sweep at sample resolution.
    pub fn parametric(control: Vec<Cplx<T>>) -> Result<Self> {
        if control.len() < 3 {
            return Err(Error::Config("parametric domain needs at least 3 control points".into()));
        }
        for p in &control {
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::Config("parametric control points must be finite".into()));
            }
        }
        let per_seg = 64usize;
        let m = control.len();
        let total = m * per_seg;
        let mut samples = Vec::with_capacity(total);
        for i in 0..m {
            for s in 0..per_seg {
                samples.push(spline_point(&control, i, T::of(s as f64 / per_seg as f64)));
            }
        }
        // pairwise proper-intersection sweep, skipping adjacent segments
        for i in 0..total {
            let (a, b) = (samples[i], samples[(i + 1) % total]);
            for j in (i + 2)..total {
                if i == 0 && j == total - 1 {
                    continue;
                }
                let (c, d) = (samples[j], samples[(j + 1) % total]);
                if segments_cross(a, b, c, d) {
                    return Err(Error::SelfIntersectingBoundary {
                        near: i as f64 / per_seg as f64,
                    });
                }
            }
        }
        Ok(Domain::Parametric { control, samples })
    }

    /// Strict interior membership; points within 10⁻¹² of the boundary are
    /// outside by convention.
    pub fn contains(&self, z: Cplx<T>) -> bool {
        match self {
            Domain::Disc { center, radius } => {
                let d = (z - *center).norm();
                d < *radius && (*radius - d) > T::of(BOUNDARY_TIE)
            }
            Domain::Parametric { samples, .. } => {
                if self.boundary_distance(z) <= T::of(BOUNDARY_TIE) {
                    return false;
                }
                // winding of the sampled boundary polygon
                let n = samples.len();
                let mut total = T::zero();
                let mut prev = samples[n - 1] - z;
                for &p in samples {
                    let cur = p - z;
                    total = total + (cur / prev).arg();
                    prev = cur;
                }
                let winding = (total / T::TAU()).round();
                winding.abs() > T::of(0.5)
            }
        }
    }

    /// Distance from z to the boundary (exact for discs, polygonal for
    /// splines).
    pub fn boundary_distance(&self, z: Cplx<T>) -> T {
        match self {
            Domain::Disc { center, radius } => ((z - *center).norm() - *radius).abs(),
            Domain::Parametric { samples, .. } => {
                let n = samples.len();
                let mut best = T::infinity();
                for i in 0..n {
                    let (a, b) = (samples[i], samples[(i + 1) % n]);
                    let ab = b - a;
                    let len2 = ab.norm_sqr();
                    let t = if len2 > T::zero() {
                        (((z - a).conj() * ab).re / len2).max(T::zero()).min(T::one())
                    } else {
                        T::zero()
                    };
                    let d = (z - a - ab.scale(t)).norm();
                    best = best.min(d);
                }
                best
            }
        }
    }

    /// `n` points tracing the boundary once, counterclockwise for discs.
    pub fn boundary_points(&self, n: usize) -> Vec<Cplx<T>> {
        match self {
            Domain::Disc { center, radius } => (0..n)
                .map(|i| {
                    let phi = T::TAU() * T::of(i as f64) / T::of(n as f64);
                    *center + Cplx::from_polar(*radius, phi)
                })
                .collect(),
            Domain::Parametric { samples, .. } => {
                let stride = (samples.len() as f64 / n as f64).max(1.0);
                (0..n)
                    .map(|i| samples[((i as f64 * stride) as usize).min(samples.len() - 1)])
                    .collect()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// preimage arc measure and domain conditions
// ---------------------------------------------------------------------------

/// Lebesgue measure of {θ ∈ [0,2π) : p(e^{iθ}) ∈ Ω}, by uniform sampling
/// with bisection refinement of every membership flip to 10⁻⁶ in θ.
pub fn preimage_arc_measure<T: Real>(symbol: &Symbol<T>, domain: &Domain<T>, grid_size: usize) -> T {
    assert!(grid_size >= 1 << 10, "arc-measure grid must have at least 2^10 points");
    let g = grid_size;
    let step = T::TAU() / T::of(g as f64);
    let inside: Vec<bool> = (0..g)
        .map(|i| domain.contains(symbol.eval(T::of(i as f64) * step, Truncation::Full)))
        .collect();
    if inside.iter().all(|&b| b) {
        return T::TAU();
    }
    if inside.iter().all(|&b| !b) {
        return T::zero();
    }
    // refine the crossing inside (θ_i, θ_{i+1}] to 1e−6 absolute
    let refine = |mut lo: T, mut hi: T, lo_in: bool| -> T {
        let tol = T::of(1e-6);
        while hi - lo > tol {
            let mid = (lo + hi) * T::of(0.5);
            if domain.contains(symbol.eval(mid, Truncation::Full)) == lo_in {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::of(0.5)
    };
    let mut measure = T::zero();
    // walk the grid, crediting inside stretches between refined crossings
    let mut open_at: Option<T> = None;
    let mut first_crossing: Option<T> = None;
    for i in 0..g {
        let j = (i + 1) % g;
        if inside[i] == inside[j] {
            continue;
        }
        let lo = T::of(i as f64) * step;
        let cross = refine(lo, lo + step, inside[i]);
        if first_crossing.is_none() {
            first_crossing = Some(cross);
        }
        if inside[i] {
            // leaving the domain
            match open_at.take() {
                Some(start) => measure = measure + (cross - start),
                None => {} // handled by the wrap-around credit below
            }
        } else {
            open_at = Some(cross);
        }
    }
    // wrap-around: if an interval is still open it closes at the first
    // crossing plus 2π
    if let Some(start) = open_at {
        measure = measure + (first_crossing.unwrap() + T::TAU() - start);
    }
    measure
}

/// One transversal intersection of the symbol curve with ∂Ω.
#[derive(Clone, Debug, Serialize)]
pub struct Intersection<T> {
    pub theta: T,
    pub point_re: T,
    pub point_im: T,
    /// |p′(θ)| at the crossing.
    pub derivative_abs: T,
    /// Angle between the curve tangent and the boundary tangent, degrees.
    pub angle_deg: T,
}

/// Pass/fail data for the four smooth-domain conditions.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport<T> {
    pub intersections: Vec<Intersection<T>>,
    /// (1) finitely many intersections at sample resolution.
    pub finitely_many: bool,
    /// (2) the curve does not revisit any intersection point.
    pub simple_at_intersections: bool,
    /// (3) |p′| ≥ 10⁻⁶ at every preimage.
    pub derivative_nonzero: bool,
    /// (4) crossing angle ≥ 5° at every intersection.
    pub transversal: bool,
}

impl<T> ConditionsReport<T> {
    pub fn all_pass(&self) -> bool {
        self.finitely_many && self.simple_at_intersections && self.derivative_nonzero && self.transversal
    }
}

/// Serializable summary of a conditions report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionsSummary {
    pub intersection_count: usize,
    pub finitely_many: bool,
    pub simple_at_intersections: bool,
    pub derivative_nonzero: bool,
    pub transversal: bool,
}

impl<T> From<&ConditionsReport<T>> for ConditionsSummary {
    fn from(r: &ConditionsReport<T>) -> Self {
        ConditionsSummary {
            intersection_count: r.intersections.len(),
            finitely_many: r.finitely_many,
            simple_at_intersections: r.simple_at_intersections,
            derivative_nonzero: r.derivative_nonzero,
            transversal: r.transversal,
        }
    }
}

/// p′(θ) by central difference; the tail decay makes the curve C² so the
/// h² error is far below the 10⁻⁶ derivative threshold.
fn curve_derivative<T: Real>(symbol: &Symbol<T>, theta: T) -> Cplx<T> {
    let h = T::of(1e-5);
    let hi = symbol.eval(theta + h, Truncation::Full);
    let lo = symbol.eval(theta - h, Truncation::Full);
    (hi - lo).scale((T::of(2.0) * h).recip())
}

/// Locates every intersection of p(S¹) with ∂Ω by membership flips along θ
/// and checks the four conditions with data.
pub fn check_domain_conditions<T: Real>(symbol: &Symbol<T>, domain: &Domain<T>) -> ConditionsReport<T> {
    let g = 4096usize;
    let step = T::TAU() / T::of(g as f64);
    let inside: Vec<bool> = (0..g)
        .map(|i| domain.contains(symbol.eval(T::of(i as f64) * step, Truncation::Full)))
        .collect();
    let mut intersections = Vec::new();
    for i in 0..g {
        let j = (i + 1) % g;
        if inside[i] == inside[j] {
            continue;
        }
        let mut lo = T::of(i as f64) * step;
        let mut hi = lo + step;
        for _ in 0..60 {
            let mid = (lo + hi) * T::of(0.5);
            if domain.contains(symbol.eval(mid, Truncation::Full)) == inside[i] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = (lo + hi) * T::of(0.5);
        let point = symbol.eval(theta, Truncation::Full);
        let deriv = curve_derivative(symbol, theta);
        // boundary tangent at the crossing
        let boundary_tangent = match domain {
            Domain::Disc { center, .. } => {
                let radial = point - *center;
                Cplx::new(-radial.im, radial.re)
            }
            Domain::Parametric { samples, .. } => {
                let n = samples.len();
                let (idx, _) = samples
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (k, (*p - point).norm()))
                    .fold((0usize, T::infinity()), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
                samples[(idx + 1) % n] - samples[(idx + n - 1) % n]
            }
        };
        let angle = {
            let a = deriv.arg();
            let b = boundary_tangent.arg();
            let mut d = (a - b).abs() % T::PI();
            if d > T::PI() * T::of(0.5) {
                d = T::PI() - d;
            }
            d * T::of(180.0) / T::PI()
        };
        intersections.push(Intersection {
            theta,
            point_re: point.re,
            point_im: point.im,
            derivative_abs: deriv.norm(),
            angle_deg: angle,
        });
    }
    // (2): no other arc of the curve passes through an intersection point
    let samples = symbol.curve_samples(8192);
    let scale = symbol.curve_scale();
    let tol = T::of(1e-6) * (T::one() + scale);
    let theta_sep = T::of(1e-3);
    let simple_at_intersections = intersections.iter().all(|inter| {
        let pt = Cplx::new(inter.point_re, inter.point_im);
        (0..samples.len()).all(|k| {
            let dtheta = {
                let mut d = (samples.theta_at(k) - inter.theta).abs();
                if d > T::PI() {
                    d = T::TAU() - d;
                }
                d
            };
            dtheta <= theta_sep || (samples.point_at(k) - pt).norm() > tol
        })
    });
    let finitely_many = intersections.len() < g / 8;
    let derivative_nonzero = intersections.iter().all(|i| i.derivative_abs >= T::of(1e-6));
    let transversal = intersections.iter().all(|i| i.angle_deg >= T::of(5.0));
    ConditionsReport {
        intersections,
        finitely_many,
        simple_at_intersections,
        derivative_nonzero,
        transversal,
    }
}

// ---------------------------------------------------------------------------
// counting and Weyl reports
// ---------------------------------------------------------------------------

/// Eigenvalues of the circulant comparison operator inside Ω.
pub fn circulant_count<T: Real>(symbol: &Symbol<T>, n: usize, m: usize, domain: &Domain<T>) -> usize {
    circulant_spectrum(symbol, n, m)
        .into_iter()
        .filter(|l| domain.contains(*l))
        .count()
}

/// Number of computed eigenvalues inside Ω, with multiplicity.
pub fn count_in_domain<T: Real>(eigs: &SpectrumResult<T>, domain: &Domain<T>) -> usize {
    eigs.eigenvalues.iter().filter(|l| domain.contains(**l)).count()
}

/// The empirical spectral measure: N atoms of mass 1/N each.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure<T> {
    pub atoms: Vec<Cplx<T>>,
}

impl<T: Real> EmpiricalMeasure<T> {
    pub fn from_spectrum(eigs: &SpectrumResult<T>) -> Self {
        EmpiricalMeasure { atoms: eigs.eigenvalues.clone() }
    }

    pub fn weight(&self) -> T {
        T::of(self.atoms.len() as f64).recip()
    }

    pub fn mass_in(&self, domain: &Domain<T>) -> T {
        let hits = self.atoms.iter().filter(|a| domain.contains(**a)).count();
        T::of(hits as f64) * self.weight()
    }
}

/// Per-trial Weyl counting record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub delta: f64,
    pub seed: u64,
    pub count_in_domain: usize,
    pub weyl_prediction: f64,
    pub normalized_error: f64,
    pub conditions: ConditionsSummary,
}

/// A full trial: the report plus the raw spectrum and curve distances.
#[derive(Clone, Debug)]
pub struct TrialRun<T> {
    pub report: WeylReport,
    pub eigenvalues: Vec<Cplx<T>>,
    /// Distance of each eigenvalue to the symbol curve.
    pub distances: Vec<T>,
}

/// Assembles P_N + δQ(seed), solves for the spectrum, and compares the count
/// in Ω against the Weyl prediction N/(2π)·arc-measure.
pub fn run_trial<T: Real>(
    symbol: &Symbol<T>,
    n: usize,
    m: usize,
    delta: T,
    seed: u64,
    domain: &Domain<T>,
    curve: &CurveSamples<T>,
    arc_measure: T,
    conditions: &ConditionsSummary,
) -> Result<TrialRun<T>> {
    let p = build_toeplitz(symbol, n);
    let q = sample_gaussian::<T>(n, seed);
    let p_delta = perturb(&p, &q.q, delta)?;
    let eigs = eigenvalues(&p_delta)?;
    let count = count_in_domain(&eigs, domain);
    let prediction = T::of(n as f64) * arc_measure / T::TAU();
    let normalized_error = ((T::of(count as f64) - prediction) / T::of(n as f64)).abs();
    let distances: Vec<T> = eigs
        .eigenvalues
        .iter()
        .map(|&l| symbol.refined_distance(curve, l))
        .collect();
    Ok(TrialRun {
        report: WeylReport {
            n,
            m,
            delta: delta.to_f64().unwrap_or(f64::NAN),
            seed,
            count_in_domain: count,
            weyl_prediction: prediction.to_f64().unwrap_or(f64::NAN),
            normalized_error: normalized_error.to_f64().unwrap_or(f64::NAN),
            conditions: conditions.clone(),
        },
        eigenvalues: eigs.eigenvalues,
        distances,
    })
}

/// One-shot Weyl report (conditions and arc measure computed internally).
pub fn weyl_report<T: Real>(
    symbol: &Symbol<T>,
    n: usize,
    m: usize,
    delta: T,
    seed: u64,
    domain: &Domain<T>,
) -> Result<WeylReport> {
    let conditions = ConditionsSummary::from(&check_domain_conditions(symbol, domain));
    let arc = preimage_arc_measure(symbol, domain, 1 << 12);
    let curve = symbol.curve_samples(2048);
    run_trial(symbol, n, m, delta, seed, domain, &curve, arc, &conditions).map(|t| t.report)
}

// ---------------------------------------------------------------------------
// logarithmic potentials
// ---------------------------------------------------------------------------

/// Empirical log-potential −(1/N) Σ ln|z − λ_j|.
pub fn log_potential_empirical<T: Real>(eigs: &SpectrumResult<T>, z: Cplx<T>) -> Result<T> {
    let n = eigs.eigenvalues.len();
    assert!(n > 0, "empirical potential needs at least one atom");
    let mut acc = T::zero();
    for &l in &eigs.eigenvalues {
        let d = (z - l).norm();
        if d <= T::of(1e-300) {
            return Err(Error::AtomCollision { distance: d.to_f64().unwrap_or(0.0) });
        }
        acc = acc + d.ln();
    }
    Ok(-acc / T::of(n as f64))
}

/// Limit potential −(1/2π)∫ ln|z − p(e^{iθ})| dθ by the periodic trapezoid
/// rule with node doubling until two consecutive levels agree to 10⁻⁹ (or
/// the 2²² node cap is hit); the integrand is analytic off the curve, so for
/// margin ≥ 0.1 the doubling converges long before the cap.
pub fn log_potential_limit<T: Real>(symbol: &Symbol<T>, z: Cplx<T>, quadrature_size: usize) -> Result<T> {
    let dist = symbol.curve_distance(z, 2048);
    if dist <= T::of(1e-9) * (T::one() + symbol.curve_scale()) {
        return Err(Error::TooCloseToCurve { distance: dist.to_f64().unwrap_or(0.0) });
    }
    let mut n = quadrature_size.clamp(256, 1 << 22);
    // each doubling reuses the previous sum and only adds the odd nodes
    let eval_sum = |count: usize| -> T {
        let step = T::TAU() / T::of(count as f64);
        let mut acc = T::zero();
        for i in 0..count {
            acc = acc + (z - symbol.eval(step * T::of(i as f64), Truncation::Full)).norm().ln();
        }
        acc
    };
    let mut sum = eval_sum(n);
    let mut value = sum / T::of(n as f64);
    loop {
        if 2 * n > 1 << 22 {
            break;
        }
        // add the odd nodes of the doubled grid
        let step2 = T::TAU() / T::of((2 * n) as f64);
        let mut odd = T::zero();
        for i in 0..n {
            let theta = step2 * T::of((2 * i + 1) as f64);
            odd = odd + (z - symbol.eval(theta, Truncation::Full)).norm().ln();
        }
        sum = sum + odd;
        n *= 2;
        let next = sum / T::of(n as f64);
        let done = (next - value).abs() <= T::of(1e-9);
        value = next;
        if done {
            break;
        }
    }
    Ok(-value)
}

// ---------------------------------------------------------------------------
// histograms and quantiles
// ---------------------------------------------------------------------------

/// Logarithmic bin edges from 10⁻⁶ up to `top` (inclusive), `bins`+1 edges.
pub fn log_bin_edges<T: Real>(top: T, bins: usize) -> Vec<T> {
    assert!(bins >= 1);
    let lo = T::of(1e-6);
    let hi = top.max(lo * T::of(2.0));
    let ratio = (hi / lo).ln() / T::of(bins as f64);
    (0..=bins).map(|i| lo * (ratio * T::of(i as f64)).exp()).collect()
}

/// Histogram counts for `values` against `edges`; out-of-range values clamp
/// into the end bins.
pub fn histogram_counts<T: Real>(values: &[T], edges: &[T]) -> Vec<usize> {
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let mut idx = bins; // sentinel
        for b in 0..bins {
            if v <= edges[b + 1] {
                idx = b;
                break;
            }
        }
        counts[idx.min(bins - 1)] += 1;
    }
    counts
}

/// Distance quantiles reported by the aggregator.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p95: f64,
    pub p99: f64,
}

fn quantile<T: Real>(sorted: &[T], q: f64) -> T {
    if sorted.is_empty() {
        return T::nan();
    }
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

// ---------------------------------------------------------------------------
// experiment configuration
// ---------------------------------------------------------------------------

/// The `symbol` field of an experiment config: preset name or inline config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolSpec {
    Preset(String),
    Config(SymbolConfig),
}

impl SymbolSpec {
    pub fn build<T: Real>(&self) -> Result<Symbol<T>> {
        match self {
            SymbolSpec::Preset(name) => Symbol::preset(name),
            SymbolSpec::Config(cfg) => cfg.build(),
        }
    }
}

/// One point of a parametric domain config.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PointConfig {
    pub re: f64,
    pub im: f64,
}

/// Externally tagged domain config: `{"disc": {...}}` or
/// `{"parametric": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum DomainConfig {
    #[serde(rename = "disc")]
    Disc { cx: f64, cy: f64, r: f64 },
    #[serde(rename = "parametric")]
    Parametric { points: Vec<PointConfig> },
}

impl DomainConfig {
    pub fn build<T: Real>(&self) -> Result<Domain<T>> {
        match self {
            DomainConfig::Disc { cx, cy, r } => Domain::disc(cplx::<T>(*cx, *cy), T::of(*r)),
            DomainConfig::Parametric { points } => {
                Domain::parametric(points.iter().map(|p| cplx::<T>(p.re, p.im)).collect())
            }
        }
    }
}

/// Full experiment description as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub symbol: SymbolSpec,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "M")]
    pub m: usize,
    /// Absent means the per-N default min(10⁻⁸, N⁻²).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub trials: usize,
    pub seed0: u64,
    pub domain: DomainConfig,
    /// Normalized-error threshold for the success fraction (default 0.1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_threshold: Option<f64>,
    /// Swap the symbol's tail sides before running.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reflect_tail: bool,
}

impl ExperimentConfig {
    /// δ for a given N: the configured value, or min(10⁻⁸, N⁻²).
    pub fn delta_for(&self, n: usize) -> f64 {
        self.delta.unwrap_or_else(|| {
            let nn = n as f64;
            (1e-8f64).min(nn.powi(-2))
        })
    }

    pub fn error_threshold(&self) -> f64 {
        self.error_threshold.unwrap_or(0.1)
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo aggregation
// ---------------------------------------------------------------------------

/// Aggregate over all trials at one matrix size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerNAggregate {
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub mean_normalized_error: f64,
    pub max_normalized_error: f64,
    /// Fraction of trials with normalized error ≤ the configured threshold.
    pub success_fraction: f64,
    pub mean_count: f64,
    pub weyl_prediction: f64,
    pub distance_quantiles: Quantiles,
}

/// Whole-experiment aggregate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub error_threshold: f64,
    pub arc_measure: f64,
    pub conditions: ConditionsSummary,
    pub per_n: Vec<PerNAggregate>,
    /// Error strings of failed trials, prefixed by "N=…, trial=…".
    pub failures: Vec<String>,
}

/// Everything a Monte Carlo run produces: the aggregate plus raw per-trial
/// data for dumping.
#[derive(Clone, Debug)]
pub struct MonteCarloOutput<T> {
    pub report: MonteCarloReport,
    /// (N, trial index, run) for every successful trial, grid order.
    pub trials: Vec<(usize, usize, TrialRun<T>)>,
}

/// Runs `trials` independent perturbations per N, in parallel, with
/// deterministic per-trial seeds derived from seed0, and merges the reports.
pub fn monte_carlo<T: Real>(config: &ExperimentConfig) -> Result<MonteCarloOutput<T>> {
    if config.trials < 1 {
        return Err(Error::Config("trials must be ≥ 1".into()));
    }
    if config.n.is_empty() {
        return Err(Error::Config("at least one N is required".into()));
    }
    let mut symbol: Symbol<T> = config.symbol.build()?;
    if config.reflect_tail {
        symbol = symbol.with_reflected_tail();
    }
    let domain: Domain<T> = config.domain.build()?;
    let conditions = ConditionsSummary::from(&check_domain_conditions(&symbol, &domain));
    let arc = preimage_arc_measure(&symbol, &domain, 1 << 12);
    let curve = symbol.curve_samples(2048);
    let threshold = config.error_threshold();

    let mut per_n = Vec::new();
    let mut failures = Vec::new();
    let mut all_trials = Vec::new();
    for &n in &config.n {
        let delta = T::of(config.delta_for(n));
        let results: Vec<(usize, Result<TrialRun<T>>)> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = trial_seed(config.seed0, trial as u64);
                let run = run_trial(&symbol, n, config.m, delta, seed, &domain, &curve, arc, &conditions);
                (trial, run)
            })
            .collect();
        let mut errs = Vec::new();
        let mut counts = Vec::new();
        let mut dists: Vec<T> = Vec::new();
        let mut ok = 0usize;
        let mut prediction = f64::NAN;
        for (trial, res) in results {
            match res {
                Ok(run) => {
                    ok += 1;
                    errs.push(run.report.normalized_error);
                    counts.push(run.report.count_in_domain as f64);
                    prediction = run.report.weyl_prediction;
                    dists.extend_from_slice(&run.distances);
                    all_trials.push((n, trial, run));
                }
                Err(e) => failures.push(format!("N={n}, trial={trial}: {e}")),
            }
        }
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
        let qf = |q: f64| quantile(&dists, q).to_f64().unwrap_or(f64::NAN);
        per_n.push(PerNAggregate {
            n,
            delta: config.delta_for(n),
            trials_ok: ok,
            trials_failed: config.trials - ok,
            mean_normalized_error: mean(&errs),
            max_normalized_error: errs.iter().copied().fold(f64::NAN, f64::max),
            success_fraction: if ok == 0 {
                0.0
            } else {
                errs.iter().filter(|&&e| e <= threshold).count() as f64 / ok as f64
            },
            mean_count: mean(&counts),
            weyl_prediction: prediction,
            distance_quantiles: Quantiles { p50: qf(0.5), p90: qf(0.9), p95: qf(0.95), p99: qf(0.99) },
        });
    }
    Ok(MonteCarloOutput {
        report: MonteCarloReport {
            error_threshold: threshold,
            arc_measure: arc.to_f64().unwrap_or(f64::NAN),
            conditions,
            per_n,
            failures,
        },
        trials: all_trials,
    })
}
