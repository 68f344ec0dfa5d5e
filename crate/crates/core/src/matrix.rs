//! Matrix constructions: the Toeplitz truncation P_N of a symbol, its
//! circulant comparison on Z/(N+M)Z, complex Gaussian perturbations, the
//! trace-norm distance between the two (with its analytic envelope bound),
//! and the dump formats used by the command-line tools.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
pub use crate::linalg::DenseMatrix;
use crate::linalg::{singular_values, svd};
use crate::scalar::{Cplx, Real};
use crate::symbol::{Symbol, Truncation};

/// N×N Toeplitz truncation: entry (j,k) = a_{j−k}.
pub fn build_toeplitz<T: Real>(symbol: &Symbol<T>, n: usize) -> DenseMatrix<T> {
    assert!(n >= 1, "need N >= 1");
    // precompute the needed coefficient range once; entry fill is then O(N²)
    let coeffs = coefficient_range(symbol, n as i64 - 1);
    DenseMatrix::from_fn(n, n, |j, k| coeffs[(j as i64 - k as i64 + n as i64 - 1) as usize])
}

/// Coefficients a_ν for ν ∈ [−extent, extent], as a contiguous vector with
/// offset `extent`.
fn coefficient_range<T: Real>(symbol: &Symbol<T>, extent: i64) -> Vec<Cplx<T>> {
    (-extent..=extent).map(|nu| symbol.coefficient(nu)).collect()
}

/// The circulant of the truncated symbol p_N on Z/(N+M)Z together with its
/// upper-left N×N block.
#[derive(Clone, Debug)]
pub struct CirculantEmbedding<T> {
    pub n: usize,
    pub m: usize,
    /// (N+M)×(N+M) circulant of p_N.
    pub full: DenseMatrix<T>,
    /// Restriction to the first N indices; differs from P_N only by
    /// wrap-around terms in the corners.
    pub toeplitz_block: DenseMatrix<T>,
}

impl<T: Real> CirculantEmbedding<T> {
    pub fn dim(&self) -> usize {
        self.n + self.m
    }
}

/// Builds the circulant embedding: entry (j,k) of the full matrix is
/// Σ_{ν ≡ j−k mod Ñ, |ν| ≤ N} a_ν with Ñ = N+M.
pub fn build_circulant<T: Real>(symbol: &Symbol<T>, n: usize, m: usize) -> CirculantEmbedding<T> {
    assert!(n >= 1 && m >= 1, "need N, M >= 1");
    let nt = n + m; // Ñ
    let coeffs = coefficient_range(symbol, n as i64);
    let at = |nu: i64| -> Cplx<T> {
        if nu.unsigned_abs() as usize <= n {
            coeffs[(nu + n as i64) as usize]
        } else {
            Cplx::new(T::zero(), T::zero())
        }
    };
    // wrapped coefficient per residue r ∈ [0, Ñ): candidates r and r − Ñ
    let wrapped: Vec<Cplx<T>> = (0..nt as i64).map(|r| at(r) + at(r - nt as i64)).collect();
    let full = DenseMatrix::from_fn(nt, nt, |j, k| {
        let r = (j as i64 - k as i64).rem_euclid(nt as i64) as usize;
        wrapped[r]
    });
    let toeplitz_block = full.block(0, n, 0, n);
    CirculantEmbedding { n, m, full, toeplitz_block }
}

/// Spectrum of the circulant: λ_j = p_N(e^{−2πij/Ñ}), j = 0..Ñ−1 — the
/// e^{−iθ} evaluation convention makes these exactly the eigenvalues of
/// `build_circulant(..).full`.
pub fn circulant_spectrum<T: Real>(symbol: &Symbol<T>, n: usize, m: usize) -> Vec<Cplx<T>> {
    assert!(n >= 1 && m >= 1, "need N, M >= 1");
    let nt = n + m;
    let step = T::TAU() / T::of(nt as f64);
    (0..nt)
        .map(|j| symbol.eval(step * T::of(j as f64), Truncation::UpTo(n as i64)))
        .collect()
}

/// Analytic envelope bound ε(M) = 2C Σ_{k≥M} (k+1−M)·m(k).  The banded part
/// of the envelope sums in closed form; a power-decay tail is accumulated
/// until the integral-comparison remainder is negligible, and the remainder
/// bound is *added*, so the result always dominates the true series.
pub fn epsilon_bound<T: Real>(symbol: &Symbol<T>, m_cut: usize) -> T {
    assert!(m_cut >= 1, "need M >= 1");
    let big_m = m_cut as i64;
    let b = symbol.band_limit();
    let two = T::of(2.0);
    let c = symbol.envelope_constant();
    let mut sum = T::zero();
    // banded plateau m(k) = 1 for k ≤ B: Σ_{k=M}^{B} (k+1−M) = L(L+1)/2
    if b >= big_m {
        let l = T::of((b - big_m + 1) as f64);
        sum = sum + l * (l + T::one()) / two;
    }
    if let Some(s) = symbol.min_tail_exponent() {
        let start = big_m.max(b + 1);
        let tol = T::of(1e-14);
        let mm = T::of(big_m as f64);
        let mut k = start;
        loop {
            let kk = T::of(k as f64);
            sum = sum + (kk + T::one() - mm) * kk.powf(-s);
            // remainder: ∫_k^∞ (x+1−M) x^{−s} dx, a true upper bound on the
            // rest of the series since the summand is decreasing there
            let rem = kk.powf(two - s) / (s - two) + (T::one() - mm) * kk.powf(T::one() - s) / (s - T::one());
            let rem = rem.max(T::zero());
            if rem <= tol * (T::one() + sum) || k - start > 1_000_000 {
                sum = sum + rem;
                break;
            }
            k += 1;
        }
    }
    two * c * sum
}

/// Trace norm of P_N − (circulant block) together with the analytic bound
/// ε(M).  The computed value is a full SVD of the difference; the
/// postcondition `computed ≤ bound` is the content of the circulant
/// comparison estimate.
pub fn trace_norm_difference<T: Real>(symbol: &Symbol<T>, n: usize, m: usize) -> (T, T) {
    let p = build_toeplitz(symbol, n);
    let emb = build_circulant(symbol, n, m);
    let diff = p.sub(&emb.toeplitz_block);
    let computed = if diff.max_abs().is_zero() {
        T::zero()
    } else {
        singular_values(&diff)
            .expect("SVD of the difference matrix converges")
            .into_iter()
            .fold(T::zero(), |a, s| a + s)
    };
    (computed, epsilon_bound(symbol, m))
}

// ---------------------------------------------------------------------------
// Gaussian perturbations
// ---------------------------------------------------------------------------

/// A deterministic draw of an N×N matrix with i.i.d. N_C(0,1) entries.
#[derive(Clone, Debug)]
pub struct GaussianSample<T> {
    pub n: usize,
    pub seed: u64,
    pub q: DenseMatrix<T>,
    pub hs_norm: T,
}

/// SplitMix64 — the documented mixing function for seed material.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Per-trial stream seed: mix(master ^ trial).  Distinct trials give
/// unrelated streams; the composition is stable across platforms.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ trial)
}

/// Draws Q with entries q = √(−ln u₁)·e^{2πi u₂} (Box–Muller): real and
/// imaginary parts are independent N(0, 1/2), so E|q|² = 1.  Bitwise
/// deterministic per (n, seed).
pub fn sample_gaussian<T: Real>(n: usize, seed: u64) -> GaussianSample<T> {
    assert!(n >= 1, "need N >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let mut hs_sq = T::zero();
    let q = DenseMatrix::from_fn(n, n, |_, _| {
        // u₁ ∈ (0,1] keeps the logarithm finite
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = T::of((-u1.ln()).sqrt());
        let angle = T::TAU() * T::of(u2);
        let z = Cplx::from_polar(r, angle);
        hs_sq = hs_sq + z.norm_sqr();
        z
    });
    GaussianSample { n, seed, q, hs_norm: hs_sq.sqrt() }
}

/// P + δQ.
pub fn perturb<T: Real>(p: &DenseMatrix<T>, q: &DenseMatrix<T>, delta: T) -> Result<DenseMatrix<T>> {
    if (p.rows(), p.cols()) != (q.rows(), q.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "perturb: {}x{} vs {}x{}",
            p.rows(),
            p.cols(),
            q.rows(),
            q.cols()
        )));
    }
    if delta < T::zero() {
        return Err(Error::Config("perturbation size must be >= 0".into()));
    }
    Ok(p.add(&q.scaled(Cplx::new(delta, T::zero()))))
}

// ---------------------------------------------------------------------------
// Dump formats
// ---------------------------------------------------------------------------

/// CSV dump: header `row,col,re,im`, floats with 17 significant digits.
pub fn write_matrix_csv<T: Real>(w: &mut impl Write, a: &DenseMatrix<T>) -> Result<()> {
    writeln!(w, "row,col,re,im")?;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a.get(i, j);
            writeln!(
                w,
                "{},{},{:.16e},{:.16e}",
                i,
                j,
                v.re.to_f64().unwrap_or(f64::NAN),
                v.im.to_f64().unwrap_or(f64::NAN)
            )?;
        }
    }
    Ok(())
}

const BINARY_MAGIC: &[u8; 4] = b"TNLB";

/// Binary dump: 16-byte header (magic "TNLB", u32 LE rows, u32 LE cols,
/// 4 reserved zero bytes) followed by row-major little-endian f64 (re, im)
/// pairs.
pub fn write_matrix_binary<T: Real>(w: &mut impl Write, a: &DenseMatrix<T>) -> Result<()> {
    let mut header = [0u8; 16];
    header[0..4].copy_from_slice(BINARY_MAGIC);
    header[4..8].copy_from_slice(&(a.rows() as u32).to_le_bytes());
    header[8..12].copy_from_slice(&(a.cols() as u32).to_le_bytes());
    w.write_all(&header)?;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a.get(i, j);
            w.write_all(&v.re.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
            w.write_all(&v.im.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads back a binary dump written by [`write_matrix_binary`].
pub fn read_matrix_binary<T: Real>(r: &mut impl Read) -> Result<DenseMatrix<T>> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != BINARY_MAGIC {
        return Err(Error::Config("bad magic in binary matrix dump".into()));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut buf = vec![0u8; rows * cols * 16];
    r.read_exact(&mut buf)?;
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in buf.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        data.push(Cplx::new(T::of(re), T::of(im)));
    }
    Ok(DenseMatrix::from_fn(rows, cols, |i, j| data[i * cols + j]))
}

/// Direct-summation oracle for the circulant entries: Σ over all |ν| ≤ N
/// with ν ≡ j−k (mod Ñ).  Quadratic and independent of the wrapped-residue
/// construction; used by tests.
pub fn circulant_entry_oracle<T: Real>(symbol: &Symbol<T>, n: usize, m: usize, j: usize, k: usize) -> Cplx<T> {
    let nt = (n + m) as i64;
    let d = j as i64 - k as i64;
    let mut acc = Cplx::new(T::zero(), T::zero());
    for nu in -(n as i64)..=(n as i64) {
        if (nu - d).rem_euclid(nt) == 0 {
            acc = acc + symbol.coefficient(nu);
        }
    }
    acc
}

/// Trace (nuclear) norm of a matrix: Σ of its singular values.
pub fn trace_norm<T: Real>(d: &DenseMatrix<T>) -> T {
    svd(d).map(|f| f.s.iter().fold(T::zero(), |a, &s| a + s)).unwrap_or_else(|_| T::nan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, multiset_match_distance};
    use crate::C64;

    #[test]
    fn toeplitz_diagonal_and_entries() {
        let c = C64::new(1.5, -0.5);
        let s = Symbol::<f64>::from_band(&[(0, c)]).unwrap();
        let p = build_toeplitz(&s, 3);
        assert!(p.sub(&DenseMatrix::identity(3).scaled(c)).hs_norm() == 0.0);

        let shift = Symbol::<f64>::jordan();
        let p = build_toeplitz(&shift, 3);
        for j in 0..3 {
            for k in 0..3 {
                let want = if j == k + 1 { 1.0 } else { 0.0 };
                assert_eq!(p.get(j, k), C64::new(want, 0.0));
            }
        }

        let e = Symbol::<f64>::exp1_band_only();
        let p = build_toeplitz(&e, 10);
        assert_eq!(p.get(0, 4), C64::new(0.0, 1.0)); // a_{−4} = i
        // diagonal constancy
        for j in 0..9 {
            for k in 0..9 {
                assert_eq!(p.get(j, k), p.get(j + 1, k + 1));
            }
        }
    }

    #[test]
    fn circulant_shift_no_wrap() {
        let s = Symbol::<f64>::jordan();
        let emb = build_circulant(&s, 3, 2);
        assert_eq!(emb.dim(), 5);
        // full is the 5×5 cyclic shift: entry (j,k) = 1 iff j−k ≡ 1 (mod 5)
        for j in 0..5 {
            for k in 0..5 {
                let want = if (j as i64 - k as i64).rem_euclid(5) == 1 { 1.0 } else { 0.0 };
                assert_eq!(emb.full.get(j, k), C64::new(want, 0.0), "({j},{k})");
            }
        }
        let p = build_toeplitz(&s, 3);
        assert!(emb.toeplitz_block.sub(&p).hs_norm() == 0.0);
    }

    #[test]
    fn circulant_entries_match_direct_mod_sum() {
        for (sym, n, m) in [
            (Symbol::<f64>::bidiag(), 4usize, 1usize),
            (Symbol::<f64>::exp1(), 6, 3),
            (Symbol::<f64>::exp1_2(), 9, 2),
        ] {
            let emb = build_circulant(&sym, n, m);
            let nt = n + m;
            for j in 0..nt {
                for k in 0..nt {
                    let want = circulant_entry_oracle(&sym, n, m, j, k);
                    assert!(
                        (emb.full.get(j, k) - want).norm() < 1e-14,
                        "entry ({j},{k}) of {n}+{m}"
                    );
                }
            }
        }
    }

    #[test]
    fn circulant_row_sums_equal_truncated_symbol_sum() {
        let s = Symbol::<f64>::exp1();
        let n = 7;
        let m = 3;
        let emb = build_circulant(&s, n, m);
        let want: C64 = (-(n as i64)..=n as i64).map(|nu| s.coefficient(nu)).sum();
        for j in 0..emb.dim() {
            let got: C64 = (0..emb.dim()).map(|k| emb.full.get(j, k)).sum();
            assert!((got - want).norm() < 1e-13);
        }
    }

    #[test]
    fn circulant_spectrum_shift_roots_of_unity() {
        let s = Symbol::<f64>::jordan();
        let got = circulant_spectrum(&s, 3, 1);
        let want: Vec<C64> = (0..4).map(|j| C64::from_polar(1.0, -2.0 * std::f64::consts::PI * j as f64 / 4.0)).collect();
        assert!(multiset_match_distance(&got, &want) < 1e-14);

        let c = C64::new(0.25, 3.0);
        let cs = Symbol::<f64>::from_band(&[(0, c)]).unwrap();
        for l in circulant_spectrum(&cs, 5, 2) {
            assert!((l - c).norm() < 1e-15);
        }
    }

    #[test]
    fn circulant_spectrum_matches_eigensolver() {
        let s = Symbol::<f64>::exp1();
        let spec = circulant_spectrum(&s, 64, 8);
        let emb = build_circulant(&s, 64, 8);
        let eig = eigenvalues(&emb.full).unwrap().eigenvalues;
        assert!(multiset_match_distance(&eig, &spec) < 1e-10);
    }

    #[test]
    fn trace_norm_banded_vanishes_past_double_bandwidth() {
        for sym in [Symbol::<f64>::jordan(), Symbol::<f64>::bidiag(), Symbol::<f64>::exp1_band_only()] {
            let b = sym.band_limit() as usize;
            let m = 2 * b + 1;
            let (computed, bound) = trace_norm_difference(&sym, 16, m);
            assert_eq!(computed, 0.0);
            assert!(bound >= 0.0);
            assert_eq!(bound, 0.0); // envelope vanishes beyond the band too
        }
    }

    #[test]
    fn trace_norm_tail_dominated() {
        let s = Symbol::<f64>::figure_tail_only();
        let (computed, bound) = trace_norm_difference(&s, 128, 8);
        assert!(computed > 0.0);
        assert!(bound > 0.0);
        assert!(computed <= bound, "{computed} > {bound}");
    }

    #[test]
    fn epsilon_bound_decreases_to_zero() {
        let s = Symbol::<f64>::exp1();
        let mut prev = f64::INFINITY;
        for m in [1usize, 2, 4, 8, 16, 32, 64] {
            let b = epsilon_bound(&s, m);
            assert!(b <= prev + 1e-12, "bound must be non-increasing in M");
            prev = b;
        }
        assert!(prev < 1e-3, "ε(64) should be tiny for a ν^{{−5}} tail, got {prev}");
    }

    #[test]
    fn gaussian_determinism_and_moments() {
        let a = sample_gaussian::<f64>(64, 42);
        let b = sample_gaussian::<f64>(64, 42);
        assert!(a.q.sub(&b.q).max_abs() == 0.0, "same seed must be bitwise identical");
        let c = sample_gaussian::<f64>(64, 43);
        assert!(a.q.sub(&c.q).max_abs() > 0.0);
        assert!((a.hs_norm.powi(2) - a.q.hs_norm().powi(2)).abs() < 1e-9);

        // moments over 64·64·4 > 10⁴ entries
        let mut mean = C64::new(0.0, 0.0);
        let mut mean_sq = 0.0;
        let mut count = 0usize;
        for seed in 100..104 {
            let g = sample_gaussian::<f64>(64, seed);
            for v in g.q.as_slice() {
                mean += v;
                mean_sq += v.norm_sqr();
                count += 1;
            }
        }
        let inv = 1.0 / count as f64;
        let tol = 4.0 / (count as f64).sqrt();
        assert!((mean * inv).norm() <= tol, "mean {} vs tol {tol}", (mean * inv).norm());
        assert!((mean_sq * inv - 1.0).abs() <= tol);
    }

    #[test]
    fn gaussian_hs_norm_statistics() {
        // E ‖Q‖²_HS = N²; the mean over 100 seeds should sit within 5%.
        let n = 64;
        let mut acc = 0.0;
        for seed in 0..100u64 {
            let g = sample_gaussian::<f64>(n, seed);
            acc += g.hs_norm.powi(2) / (n * n) as f64;
        }
        let mean = acc / 100.0;
        assert!((0.95..=1.05).contains(&mean), "mean normalized HS² = {mean}");
    }

    #[test]
    fn gaussian_markov_threshold() {
        // ‖Q‖_HS ≤ √2·N holds essentially always (the √(C₁N) bound with the
        // default calibration C₁ = 2N).
        let n = 256;
        let mut ok = 0;
        let total = 200;
        for seed in 0..total {
            let g = sample_gaussian::<f64>(n, seed);
            if g.hs_norm <= 2f64.sqrt() * n as f64 {
                ok += 1;
            }
        }
        assert!(ok as f64 / total as f64 >= 0.99, "{ok}/{total}");
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let master = 42u64;
        let seeds: Vec<u64> = (0..32).map(|i| trial_seed(master, i)).collect();
        let mut uniq = seeds.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), seeds.len());
    }

    #[test]
    fn perturb_examples() {
        let s = Symbol::<f64>::exp1_band_only();
        let p = build_toeplitz(&s, 8);
        let g = sample_gaussian::<f64>(8, 7);
        assert!(perturb(&p, &g.q, 0.0).unwrap().sub(&p).max_abs() == 0.0);
        let zero = DenseMatrix::<f64>::zeros(8, 8);
        assert!(perturb(&zero, &g.q, 1.0).unwrap().sub(&g.q).max_abs() == 0.0);
        let tiny = perturb(&p, &g.q, 1e-14).unwrap();
        // re-subtracting P rounds at eps·|p| on top of the δ·|q| bound
        assert!(tiny.sub(&p).max_abs() <= 1e-14 * g.q.max_abs() + f64::EPSILON * p.max_abs());
        let small = DenseMatrix::<f64>::zeros(4, 4);
        assert!(matches!(perturb(&p, &small, 0.5), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn dump_round_trip_and_csv_shape() {
        let g = sample_gaussian::<f64>(5, 11);
        let mut bin = Vec::new();
        write_matrix_binary(&mut bin, &g.q).unwrap();
        assert_eq!(bin.len(), 16 + 5 * 5 * 16);
        let back: DenseMatrix<f64> = read_matrix_binary(&mut bin.as_slice()).unwrap();
        assert!(back.sub(&g.q).max_abs() == 0.0);

        let mut csv = Vec::new();
        write_matrix_csv(&mut csv, &g.q).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("row,col,re,im"));
        assert_eq!(lines.count(), 25);
    }
}
