//! Wiener-algebra symbols: a finite band of Laurent coefficients plus an
//! optional analytic power-decay tail, together with the geometry of the
//! symbol curve p(S¹) — evaluation, truncation, winding numbers, distances,
//! and the decay envelope used by the circulant comparison bound.
//!
//! Index convention (used consistently across the crate): the coefficient
//! `a_ν` is what lands on matrix diagonal `j − k = ν`, and evaluation is
//! `p_N(e^{−iθ}) = Σ_{|ν|≤N} a_ν e^{−iνθ}`.  The traversed curve used for
//! winding numbers is `θ ↦ p(e^{−iθ})` for θ: 0 → 2π, so a pure `a_{−1}`
//! symbol traces the unit circle with winding +1 around the origin.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Cplx, Real};

/// How far out in ν an evaluation or norm should sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Sum over |ν| ≤ n only (the truncated symbol p_n).
    UpTo(i64),
    /// Sum the whole series; infinite tails are accumulated until the
    /// integral-comparison remainder bound drops below 10⁻¹⁴ relative.
    Full,
}

/// One power-decay term `c·|ν|^{−s}` contributing to a side of the tail.
#[derive(Clone, Copy, Debug)]
pub struct TailTerm<T> {
    pub coeff: Cplx<T>,
    pub exponent: T,
}

/// Tail rule: absent, or a list of power-decay terms per side.  The negative
/// side feeds indices ν < 0, the positive side ν > 0; ν = 0 never receives a
/// tail contribution.
#[derive(Clone, Debug, Default)]
pub struct TailRule<T> {
    pub neg: Vec<TailTerm<T>>,
    pub pos: Vec<TailTerm<T>>,
}

impl<T: Real> TailRule<T> {
    pub fn none() -> Self {
        TailRule { neg: Vec::new(), pos: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.neg.is_empty() && self.pos.is_empty()
    }

    /// Tail contribution at index ν (0 for ν = 0).
    fn value(&self, nu: i64) -> Cplx<T> {
        if nu == 0 {
            return Cplx::new(T::zero(), T::zero());
        }
        let side = if nu < 0 { &self.neg } else { &self.pos };
        let a = T::of(nu.unsigned_abs() as f64);
        let mut acc = Cplx::new(T::zero(), T::zero());
        for term in side {
            acc = acc + term.coeff * a.powf(-term.exponent);
        }
        acc
    }

    /// Smallest exponent over both sides, i.e. the slowest decay present.
    fn min_exponent(&self) -> Option<T> {
        self.neg
            .iter()
            .chain(self.pos.iter())
            .map(|t| t.exponent)
            .fold(None, |m, s| Some(m.map_or(s, |m: T| m.min(s))))
    }

    /// ℓ¹ mass of the term coefficients on one side; used for the envelope
    /// constant, since |Σ c_t |ν|^{−s_t}| ≤ (Σ|c_t|)·|ν|^{−s_min}.
    fn side_coeff_mass(side: &[TailTerm<T>]) -> T {
        side.iter().fold(T::zero(), |a, t| a + t.coeff.norm())
    }
}

/// Coefficient pairs (a_ν, a_{−ν}) for ν = 1..=cutoff, precomputed once per
/// symbol so that full-series evaluation is a pure recurrence: the tail
/// values are θ-independent and their `powf` cost would otherwise dominate
/// every curve sample.
#[derive(Debug)]
struct FullCache<T> {
    pairs: Vec<(Cplx<T>, Cplx<T>)>,
}

/// A Wiener-algebra symbol: band coefficients, tail rule, and the derived
/// decay envelope data (band limit B, slowest tail exponent, constant C with
/// |a_ν| ≤ C·m(ν) for every ν).
#[derive(Clone, Debug)]
pub struct Symbol<T> {
    band: BTreeMap<i64, Cplx<T>>,
    tail: TailRule<T>,
    band_limit: i64,
    envelope_constant: T,
    full_cache: Arc<OnceLock<FullCache<T>>>,
}

impl<T: Real> Symbol<T> {
    /// Builds a symbol and derives its envelope.  Rejects non-finite values
    /// and tail exponents ≤ 2 (the series Σ(1+|ν|)|a_ν| must converge).
    pub fn new(band: BTreeMap<i64, Cplx<T>>, tail: TailRule<T>) -> Result<Self> {
        for (&nu, a) in &band {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::Config(format!("band coefficient at nu={nu} is not finite")));
            }
        }
        for term in tail.neg.iter().chain(tail.pos.iter()) {
            let s = term.exponent.to_f64().unwrap_or(f64::NAN);
            if !(s > 2.0) {
                return Err(Error::NonSummableTail { exponent: s });
            }
            if !term.coeff.re.is_finite() || !term.coeff.im.is_finite() {
                return Err(Error::Config("tail coefficient is not finite".into()));
            }
        }
        let band_limit = band.keys().map(|nu| nu.abs()).max().unwrap_or(0);
        let mut sym = Symbol {
            band,
            tail,
            band_limit,
            envelope_constant: T::zero(),
            full_cache: Arc::new(OnceLock::new()),
        };
        sym.envelope_constant = sym.derive_envelope_constant();
        Ok(sym)
    }

    /// Convenience constructor from (ν, a_ν) pairs, no tail.
    pub fn from_band(entries: &[(i64, Cplx<T>)]) -> Result<Self> {
        let mut band = BTreeMap::new();
        for &(nu, a) in entries {
            if band.insert(nu, a).is_some() {
                return Err(Error::Config(format!("band index {nu} stored twice")));
            }
        }
        Symbol::new(band, TailRule::none())
    }

    fn derive_envelope_constant(&self) -> T {
        // C must satisfy |coefficient(ν)| ≤ C·m(ν) for *all* ν, not just the
        // stored ones: take the worst stored ratio (m = 1 inside the band
        // limit) together with each side's tail coefficient mass, which
        // dominates the purely-analytic indices.
        let mut c = T::zero();
        for &nu in self.band.keys() {
            let ratio = self.coefficient(nu).norm() / self.envelope(nu);
            c = c.max(ratio);
        }
        c = c.max(TailRule::side_coeff_mass(&self.tail.neg));
        c = c.max(TailRule::side_coeff_mass(&self.tail.pos));
        c
    }

    /// Decay envelope m(ν): 1 inside the band limit (and at 0), the slowest
    /// tail power beyond it, 0 where nothing can live.  Even in ν by
    /// construction.
    pub fn envelope(&self, nu: i64) -> T {
        if nu == 0 {
            return T::one();
        }
        let a = nu.unsigned_abs() as f64;
        let banded = if nu.abs() <= self.band_limit { T::one() } else { T::zero() };
        let tail = match self.tail.min_exponent() {
            Some(s) => T::of(a).powf(-s),
            None => T::zero(),
        };
        banded.max(tail)
    }

    /// The derived constant C of the envelope bound |a_ν| ≤ C·m(ν).
    pub fn envelope_constant(&self) -> T {
        self.envelope_constant
    }

    /// Largest |ν| carrying a stored band coefficient (0 for an empty band).
    pub fn band_limit(&self) -> i64 {
        self.band_limit
    }

    /// Slowest tail exponent, if a tail is present.
    pub fn min_tail_exponent(&self) -> Option<T> {
        self.tail.min_exponent()
    }

    pub fn has_tail(&self) -> bool {
        !self.tail.is_empty()
    }

    /// Immutable view of the stored band.
    pub fn band(&self) -> &BTreeMap<i64, Cplx<T>> {
        &self.band
    }

    /// a_ν — band entry plus tail contribution (overlapping supports add).
    pub fn coefficient(&self, nu: i64) -> Cplx<T> {
        let band = self.band.get(&nu).copied().unwrap_or_else(|| Cplx::new(T::zero(), T::zero()));
        band + self.tail.value(nu)
    }

    /// The reflected symbol ν ↦ −ν (band indices negated, tail sides
    /// swapped).  Its curve is traversed with opposite orientation.
    pub fn reflected(&self) -> Self {
        let band = self.band.iter().map(|(&nu, &a)| (-nu, a)).collect();
        let tail = TailRule { neg: self.tail.pos.clone(), pos: self.tail.neg.clone() };
        Symbol::new(band, tail).expect("reflection preserves validity")
    }

    /// Same band, tail sides swapped — the alternative reading of a tail
    /// printed with the opposite Laurent convention.
    pub fn with_reflected_tail(&self) -> Self {
        let tail = TailRule { neg: self.tail.pos.clone(), pos: self.tail.neg.clone() };
        Symbol::new(self.band.clone(), tail).expect("tail swap preserves validity")
    }

    /// p_N(e^{−iθ}) = Σ_{|ν|≤N} a_ν e^{−iνθ}, or the full series for
    /// `Truncation::Full` (tail summed until the integral-comparison
    /// remainder is below 10⁻¹⁴ relative).
    pub fn eval(&self, theta: T, truncation: Truncation) -> Cplx<T> {
        let mut acc = self.band.get(&0).copied().unwrap_or_else(|| Cplx::new(T::zero(), T::zero()));
        // e^{-iθ}; powers w^ν accumulate the phase for the positive indices,
        // conjugates serve the negative ones.
        let w = Cplx::from_polar(T::one(), -theta);
        let mut wn = Cplx::new(T::one(), T::zero());
        match truncation {
            Truncation::UpTo(n) => {
                let n = n.max(0);
                for nu in 1..=n {
                    wn = wn * w;
                    let ap = self.coefficient(nu);
                    let am = self.coefficient(-nu);
                    acc = acc + ap * wn + am * wn.conj();
                }
            }
            Truncation::Full => {
                for &(ap, am) in &self.full_cache().pairs {
                    wn = wn * w;
                    acc = acc + ap * wn + am * wn.conj();
                }
            }
        }
        acc
    }

    /// Index beyond which the dropped tail mass is ≤ 10⁻¹⁴ absolute (which
    /// implies the 10⁻¹⁴-relative stopping contract), from the per-term
    /// closed form of the integral-comparison remainder.  Capped at 2²¹
    /// coefficients: tails decaying barely faster than summability would
    /// otherwise demand astronomically long sums, and past the cap the
    /// accuracy degrades gracefully.
    fn full_cutoff(&self) -> i64 {
        let terms: Vec<&TailTerm<T>> = self.tail.neg.iter().chain(self.tail.pos.iter()).collect();
        let mut cut = self.band_limit.max(1);
        let budget = 1e-14 / terms.len().max(1) as f64;
        for term in terms {
            let c = term.coeff.norm().to_f64().unwrap_or(0.0);
            let s = term.exponent.to_f64().unwrap_or(3.0);
            if c <= 0.0 {
                continue;
            }
            // c·v^{1−s}/(s−1) ≤ budget  ⟺  v ≥ (c/((s−1)·budget))^{1/(s−1)}
            let v = (c / ((s - 1.0) * budget)).powf(1.0 / (s - 1.0)).ceil();
            if v.is_finite() && v > cut as f64 {
                cut = (v as i64).min(1 << 21);
            }
        }
        cut.min(1 << 21)
    }

    fn full_cache(&self) -> &FullCache<T> {
        self.full_cache.get_or_init(|| {
            let cut = self.full_cutoff();
            let mut pairs = Vec::with_capacity(cut as usize);
            for nu in 1..=cut {
                pairs.push((self.coefficient(nu), self.coefficient(-nu)));
            }
            FullCache { pairs }
        })
    }

    /// Upper bound on Σ_{|ν|>V} |a_ν| from the tail rule, by integral
    /// comparison: Σ_{ν>V} ν^{−s} ≤ V^{1−s}/(s−1).
    fn tail_remainder_l1(&self, v: i64) -> T {
        debug_assert!(v >= self.band_limit);
        let vv = T::of(v as f64);
        let mut rem = T::zero();
        for term in self.tail.neg.iter().chain(self.tail.pos.iter()) {
            let s = term.exponent;
            rem = rem + term.coeff.norm() * vv.powf(T::one() - s) / (s - T::one());
        }
        rem
    }

    /// Wiener norm Σ_{|ν|≤truncation} |a_ν| (an operator-norm upper bound
    /// for the truncated symbol).  `Full` adds the tail remainder bound so
    /// the result still dominates the full series.
    pub fn wiener_norm(&self, truncation: Truncation) -> T {
        let mut acc = self.coefficient(0).norm();
        match truncation {
            Truncation::UpTo(n) => {
                for nu in 1..=n.max(0) {
                    acc = acc + self.coefficient(nu).norm() + self.coefficient(-nu).norm();
                }
            }
            Truncation::Full => {
                let cache = self.full_cache();
                for &(ap, am) in &cache.pairs {
                    acc = acc + ap.norm() + am.norm();
                }
                acc = acc + self.tail_remainder_l1(cache.pairs.len().max(1) as i64);
            }
        }
        acc
    }

    /// Coarse magnitude scale of the curve, used for on-curve tolerances.
    pub fn curve_scale(&self) -> T {
        T::one() + self.wiener_norm(Truncation::UpTo(self.band_limit.max(8))) + self.tail_remainder_l1(self.band_limit.max(8))
    }

    /// Uniformly sampled curve θ ↦ p(e^{−iθ}), for bulk distance queries.
    pub fn curve_samples(&self, n: usize) -> CurveSamples<T> {
        let n = n.max(64);
        let step = T::TAU() / T::of(n as f64);
        let mut thetas = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        for i in 0..n {
            let th = step * T::of(i as f64);
            thetas.push(th);
            points.push(self.eval(th, Truncation::Full));
        }
        CurveSamples { thetas, points }
    }

    /// min_θ |z − p(e^{−iθ})| over a grid of `grid_size` samples (floor 64),
    /// tightened by one golden-section refinement pass around the grid
    /// minimizer.
    pub fn curve_distance(&self, z: Cplx<T>, grid_size: usize) -> T {
        let samples = self.curve_samples(grid_size);
        self.refined_distance(&samples, z)
    }

    /// Distance against precomputed samples, with local refinement.
    pub fn refined_distance(&self, samples: &CurveSamples<T>, z: Cplx<T>) -> T {
        let (idx, coarse) = samples.nearest(z);
        let n = samples.len();
        // Bracket one sample on each side of the grid minimizer and run a
        // golden-section pass; the curve is smooth so this converges far
        // below any tolerance the callers use.
        let lo = samples.theta_at((idx + n - 1) % n);
        let mut a = lo;
        let mut b = lo + T::of(2.0) * T::TAU() / T::of(n as f64);
        let phi = T::of(0.618_033_988_749_894_9);
        let f = |th: T| (self.eval(th, Truncation::Full) - z).norm();
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        for _ in 0..64 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = f(x2);
            }
            if (b - a) <= T::of(4.0) * T::eps() * (T::one() + a.abs()) {
                break;
            }
        }
        coarse.min(f1).min(f2)
    }

    /// Winding number of the curve θ ↦ p(e^{−iθ}), θ: 0 → 2π, around z, by
    /// summed argument increments.  Any interval whose increment exceeds π/2
    /// is bisected; refinement is capped at 2²⁴ samples.
    pub fn winding_number(&self, z: Cplx<T>, grid_size: usize) -> Result<i64> {
        let on_curve_tol = T::of(1e-10) * self.curve_scale();
        let reject = |p: Cplx<T>| (p - z).norm() < on_curve_tol;
        let n = grid_size.max(16);
        let step = T::TAU() / T::of(n as f64);
        let quarter_turn = T::FRAC_PI_2();
        let mut budget: i64 = 1 << 24;
        let mut total = T::zero();
        // Segment stack: (θ0, p(θ0), θ1, p(θ1)). Work is depth-first so the
        // stack stays shallow even under heavy refinement.
        let first = self.eval(T::zero(), Truncation::Full);
        if reject(first) {
            return Err(Error::PointOnCurve {
                re: z.re.to_f64().unwrap_or(f64::NAN),
                im: z.im.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut prev = first;
        let mut prev_theta = T::zero();
        let mut stack: Vec<(T, Cplx<T>, T, Cplx<T>)> = Vec::new();
        for i in 1..=n {
            let th = if i == n { T::TAU() } else { step * T::of(i as f64) };
            let p = if i == n { first } else { self.eval(th, Truncation::Full) };
            if i < n && reject(p) {
                return Err(Error::PointOnCurve {
                    re: z.re.to_f64().unwrap_or(f64::NAN),
                    im: z.im.to_f64().unwrap_or(f64::NAN),
                });
            }
            stack.push((prev_theta, prev, th, p));
            while let Some((t0, p0, t1, p1)) = stack.pop() {
                let inc = ((p1 - z) / (p0 - z)).arg();
                if inc.abs() <= quarter_turn {
                    total += inc;
                    continue;
                }
                budget -= 1;
                if budget <= 0 {
                    return Err(Error::ConvergenceFailure {
                        solver: "winding refinement",
                        iterations: 1 << 24,
                    });
                }
                let tm = (t0 + t1) / T::of(2.0);
                let pm = self.eval(tm, Truncation::Full);
                if reject(pm) {
                    return Err(Error::PointOnCurve {
                        re: z.re.to_f64().unwrap_or(f64::NAN),
                        im: z.im.to_f64().unwrap_or(f64::NAN),
                    });
                }
                stack.push((tm, pm, t1, p1));
                stack.push((t0, p0, tm, pm));
            }
            prev = p;
            prev_theta = th;
        }
        let turns = total / T::TAU();
        let rounded = turns.round();
        debug_assert!(
            (turns - rounded).abs() < T::of(1e-3),
            "winding sum should be near-integer"
        );
        Ok(rounded.to_f64().map(|t| t as i64).unwrap_or(0))
    }
}

/// Precomputed samples of the symbol curve on a uniform θ-grid.
#[derive(Clone, Debug)]
pub struct CurveSamples<T> {
    thetas: Vec<T>,
    points: Vec<Cplx<T>>,
}

impl<T: Real> CurveSamples<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn theta_at(&self, i: usize) -> T {
        self.thetas[i]
    }

    pub fn point_at(&self, i: usize) -> Cplx<T> {
        self.points[i]
    }

    pub fn points(&self) -> &[Cplx<T>] {
        &self.points
    }

    /// Index and value of the sample closest to z.
    pub fn nearest(&self, z: Cplx<T>) -> (usize, T) {
        let mut best = (0usize, T::infinity());
        for (i, p) in self.points.iter().enumerate() {
            let d = (*p - z).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Sample-resolution distance (no refinement) — adequate for bulk
    /// filtering by a margin much larger than the sample spacing.
    pub fn coarse_distance(&self, z: Cplx<T>) -> T {
        self.nearest(z).1
    }

    /// Curve diameter estimated over a subsample (≤ 1024 points); exact
    /// enough for use as a scale.
    pub fn diameter(&self) -> T {
        let stride = (self.len() / 1024).max(1);
        let pts: Vec<Cplx<T>> = self.points.iter().step_by(stride).copied().collect();
        let mut best = T::zero();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = (pts[i] - pts[j]).norm();
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// Axis-aligned bounding box (min_re, max_re, min_im, max_im).
    pub fn bounding_box(&self) -> (T, T, T, T) {
        let mut min_re = T::infinity();
        let mut max_re = T::neg_infinity();
        let mut min_im = T::infinity();
        let mut max_im = T::neg_infinity();
        for p in &self.points {
            min_re = min_re.min(p.re);
            max_re = max_re.max(p.re);
            min_im = min_im.min(p.im);
            max_im = max_im.max(p.im);
        }
        (min_re, max_re, min_im, max_im)
    }
}

// ---------------------------------------------------------------------------
// Configuration (JSON) and presets
// ---------------------------------------------------------------------------

/// One band entry of the JSON symbol config.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BandEntryConfig {
    pub nu: i64,
    pub re: f64,
    pub im: f64,
}

/// One tail term of the JSON symbol config: c = re + i·im, decay |ν|^{−s}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailTermConfig {
    pub re: f64,
    pub im: f64,
    pub s: f64,
}

/// Tail section of the JSON symbol config.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailConfig {
    pub kind: String,
    #[serde(default)]
    pub neg: Vec<TailTermConfig>,
    #[serde(default)]
    pub pos: Vec<TailTermConfig>,
}

/// JSON symbol config: `{"band": [{"nu": -1, "re": 10.0, "im": 0.0}, ...],
/// "tail": {"kind": "power_decay", "neg": [...], "pos": [...]}}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SymbolConfig {
    #[serde(default)]
    pub band: Vec<BandEntryConfig>,
    #[serde(default)]
    pub tail: Option<TailConfig>,
}

impl SymbolConfig {
    pub fn build<T: Real>(&self) -> Result<Symbol<T>> {
        let mut band = BTreeMap::new();
        for e in &self.band {
            let prev = band.insert(e.nu, cplx::<T>(e.re, e.im));
            if prev.is_some() {
                return Err(Error::Config(format!("band index {} stored twice", e.nu)));
            }
        }
        let tail = match &self.tail {
            None => TailRule::none(),
            Some(t) => match t.kind.as_str() {
                "none" => TailRule::none(),
                "power_decay" => TailRule {
                    neg: t.neg.iter().map(|c| TailTerm { coeff: cplx::<T>(c.re, c.im), exponent: T::of(c.s) }).collect(),
                    pos: t.pos.iter().map(|c| TailTerm { coeff: cplx::<T>(c.re, c.im), exponent: T::of(c.s) }).collect(),
                },
                other => return Err(Error::Config(format!("unknown tail kind {other:?}"))),
            },
        };
        Symbol::new(band, tail)
    }
}

impl<T: Real> Symbol<T> {
    /// Round-trips the symbol back into its JSON configuration form.
    pub fn to_config(&self) -> SymbolConfig {
        let band = self
            .band
            .iter()
            .map(|(&nu, a)| BandEntryConfig {
                nu,
                re: a.re.to_f64().unwrap_or(f64::NAN),
                im: a.im.to_f64().unwrap_or(f64::NAN),
            })
            .collect();
        let tail = if self.tail.is_empty() {
            None
        } else {
            let conv = |side: &[TailTerm<T>]| {
                side.iter()
                    .map(|t| TailTermConfig {
                        re: t.coeff.re.to_f64().unwrap_or(f64::NAN),
                        im: t.coeff.im.to_f64().unwrap_or(f64::NAN),
                        s: t.exponent.to_f64().unwrap_or(f64::NAN),
                    })
                    .collect()
            };
            Some(TailConfig { kind: "power_decay".into(), neg: conv(&self.tail.neg), pos: conv(&self.tail.pos) })
        };
        SymbolConfig { band, tail }
    }

    /// Jordan shift: a_1 = 1 (ones on the first subdiagonal, nilpotent).
    pub fn jordan() -> Self {
        Symbol::from_band(&[(1, cplx(1.0, 0.0))]).unwrap()
    }

    /// Free tridiagonal hopping: a_1 = a_{−1} = 1.
    pub fn bidiag() -> Self {
        Symbol::from_band(&[(1, cplx(1.0, 0.0)), (-1, cplx(1.0, 0.0))]).unwrap()
    }

    fn figure_tail() -> TailRule<T> {
        TailRule {
            neg: vec![
                TailTerm { coeff: cplx(0.7, 0.0), exponent: T::of(5.0) },
                TailTerm { coeff: cplx(0.0, 1.0), exponent: T::of(9.0) },
            ],
            pos: vec![
                TailTerm { coeff: cplx(0.0, -2.0), exponent: T::of(5.0) },
                TailTerm { coeff: cplx(0.5, 0.0), exponent: T::of(9.0) },
            ],
        }
    }

    fn exp1_band() -> BTreeMap<i64, Cplx<T>> {
        [
            (4, cplx(-1.0, 0.0)),
            (3, cplx(-3.0, -2.0)),
            (2, cplx(0.0, 1.0)),
            (1, cplx(1.0, 0.0)),
            (-1, cplx(10.0, 0.0)),
            (-2, cplx(3.0, 1.0)),
            (-3, cplx(4.0, 0.0)),
            (-4, cplx(0.0, 1.0)),
        ]
        .into_iter()
        .collect()
    }

    /// Band of the first figure symbol only (no tail).
    pub fn exp1_band_only() -> Self {
        Symbol::new(Self::exp1_band(), TailRule::none()).unwrap()
    }

    /// First figure symbol: eight-coefficient band plus power-decay tail.
    pub fn exp1() -> Self {
        Symbol::new(Self::exp1_band(), Self::figure_tail()).unwrap()
    }

    /// Tail of the figure symbols only (empty band).
    pub fn figure_tail_only() -> Self {
        Symbol::new(BTreeMap::new(), Self::figure_tail()).unwrap()
    }

    /// Second figure symbol: five-coefficient band plus the same tail.
    pub fn exp1_2() -> Self {
        let band = [
            (-1, cplx(-4.0, 0.0)),
            (-2, cplx(0.0, -2.0)),
            (1, cplx(0.0, 2.0)),
            (2, cplx(-1.0, 0.0)),
            (3, cplx(2.0, 0.0)),
        ]
        .into_iter()
        .collect();
        Symbol::new(band, Self::figure_tail()).unwrap()
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "jordan" => Ok(Self::jordan()),
            "bidiag" => Ok(Self::bidiag()),
            "exp1" => Ok(Self::exp1()),
            "exp1_2" => Ok(Self::exp1_2()),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (available: jordan, bidiag, exp1, exp1_2)"
            ))),
        }
    }
}
