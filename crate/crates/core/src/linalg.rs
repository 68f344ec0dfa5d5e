//! Dense complex linear algebra kernel: storage, LU with partial pivoting
//! (solves and log-determinants), a Hessenberg + shifted-QR eigensolver, and
//! a one-sided Jacobi SVD.  Everything is generic over the real scalar and
//! written for desk-scale dense problems (dimensions up to a few thousand).
//!
//! The eigensolver intentionally reports no condition estimates: perturbed
//! spectra are accepted as computed, since the experiments drive
//! perturbations far above machine epsilon.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        let show = self.rows.min(8);
        for i in 0..show {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let v = &self.data[i * self.cols + j];
                write!(f, "({:?},{:?}) ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        if show < self.rows {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![Cplx::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cplx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Test convenience: build from nested row vectors.
    pub fn from_rows(rows: Vec<Vec<Cplx<T>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        DenseMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        i * self.cols + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cplx<T>) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    fn row(&self, i: usize) -> &[Cplx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn row_mut(&mut self, i: usize) -> &mut [Cplx<T>] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dims {}x{} * {}x{}", self.rows, self.cols, rhs.rows, rhs.cols);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.re.is_zero() && a.im.is_zero() {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// y = A x for a slice-shaped vector.
    pub fn matvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Cplx::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scaled(&self, c: Cplx<T>) -> Self {
        let data = self.data.iter().map(|&a| a * c).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self.get(i, j).conj();
            }
        }
        out
    }

    /// Copy of the half-open block [r0, r1) × [c0, c1).
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j))
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b.get(i, j);
            }
        }
    }

    /// Assemble [[a, b], [c, d]]; degenerate (zero-sized) borders are fine.
    pub fn from_blocks_2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let mut out = Self::zeros(a.rows + c.rows, a.cols + b.cols);
        out.set_block(0, 0, a);
        out.set_block(0, a.cols, b);
        out.set_block(a.rows, 0, c);
        out.set_block(a.rows, a.cols, d);
        out
    }

    /// Hilbert–Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// ‖A − I‖_HS, the usual residual of inverse checks.
    pub fn identity_residual(&self) -> T {
        assert!(self.is_square());
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let want = if i == j { T::one() } else { T::zero() };
                let d = self.get(i, j) - Cplx::new(want, T::zero());
                acc = acc + d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn is_upper_triangular(&self) -> bool {
        for i in 1..self.rows {
            for j in 0..i.min(self.cols) {
                let v = self.get(i, j);
                if !(v.re.is_zero() && v.im.is_zero()) {
                    return false;
                }
            }
        }
        true
    }

    fn is_lower_triangular(&self) -> bool {
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = self.get(i, j);
                if !(v.re.is_zero() && v.im.is_zero()) {
                    return false;
                }
            }
        }
        true
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = Cplx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------------
// LU factorization: solves and log-determinants
// ---------------------------------------------------------------------------

/// Pivot magnitudes below this count as a singular matrix / vanishing
/// determinant.
const PIVOT_UNDERFLOW: f64 = 1e-300;

/// Packed LU factorization with partial pivoting (PA = LU).
pub struct LuFactors<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

/// Factors a square matrix; fails on pivots below the underflow threshold.
pub fn lu_factor<T: Real>(a: &DenseMatrix<T>) -> Result<LuFactors<T>> {
    let n = a.rows();
    assert!(a.is_square(), "LU needs a square matrix");
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let underflow = T::of(PIVOT_UNDERFLOW);
    for k in 0..n {
        // partial pivoting: largest magnitude in column k at/below the diagonal
        let mut p = k;
        let mut best = lu.get(k, k).norm();
        for i in (k + 1)..n {
            let v = lu.get(i, k).norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < underflow {
            return Err(Error::SingularMatrix { step: k, pivot: best.to_f64().unwrap_or(0.0) });
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                let t = lu.get(k, j);
                lu[(k, j)] = lu.get(p, j);
                lu[(p, j)] = t;
            }
        }
        let pivot = lu.get(k, k);
        for i in (k + 1)..n {
            let m = lu.get(i, k) / pivot;
            lu[(i, k)] = m;
            if m.re.is_zero() && m.im.is_zero() {
                continue;
            }
            // row update stays contiguous
            let (top, bottom) = lu.data.split_at_mut((k + 1) * n);
            let krow = &top[k * n..(k + 1) * n];
            let irow = &mut bottom[(i - k - 1) * n..(i - k) * n];
            for j in (k + 1)..n {
                irow[j] = irow[j] - m * krow[j];
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl<T: Real> LuFactors<T> {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves A X = B for as many right-hand sides as B has columns.
    pub fn solve_matrix(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        let n = self.dim();
        assert_eq!(b.rows(), n, "rhs rows must match system dimension");
        let mut x = DenseMatrix::from_fn(n, b.cols(), |i, j| b.get(self.perm[i], j));
        // forward substitution (unit lower triangle)
        for i in 1..n {
            for k in 0..i {
                let m = self.lu.get(i, k);
                if m.re.is_zero() && m.im.is_zero() {
                    continue;
                }
                for j in 0..x.cols() {
                    let v = x.get(i, j) - m * x.get(k, j);
                    x.set(i, j, v);
                }
            }
        }
        // back substitution
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.lu.get(i, k);
                if u.re.is_zero() && u.im.is_zero() {
                    continue;
                }
                for j in 0..x.cols() {
                    let v = x.get(i, j) - u * x.get(k, j);
                    x.set(i, j, v);
                }
            }
            let d = self.lu.get(i, i);
            for j in 0..x.cols() {
                let v = x.get(i, j) / d;
                x.set(i, j, v);
            }
        }
        x
    }

    /// Σ ln|pivot| — the log-magnitude of the determinant.
    pub fn log_abs_det(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim() {
            acc = acc + self.lu.get(i, i).norm().ln();
        }
        acc
    }
}

/// Solves A X = B.
pub fn solve<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(lu_factor(a)?.solve_matrix(b))
}

/// Inverse via LU (used for the small bordered systems).
pub fn invert<T: Real>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = a.rows();
    Ok(lu_factor(a)?.solve_matrix(&DenseMatrix::identity(n)))
}

/// ln|det A| by pivoted elimination; −∞ once a pivot magnitude drops below
/// 10⁻³⁰⁰.  A 0×0 determinant is 1, so the result is 0.
pub fn log_abs_det<T: Real>(a: &DenseMatrix<T>) -> T {
    assert!(a.is_square(), "determinant needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return T::zero();
    }
    let underflow = T::of(PIVOT_UNDERFLOW);
    let mut m = a.clone();
    let mut acc = T::zero();
    for k in 0..n {
        let mut p = k;
        let mut best = m.get(k, k).norm();
        for i in (k + 1)..n {
            let v = m.get(i, k).norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < underflow {
            return T::neg_infinity();
        }
        if p != k {
            for j in k..n {
                let t = m.get(k, j);
                m[(k, j)] = m.get(p, j);
                m[(p, j)] = t;
            }
        }
        let pivot = m.get(k, k);
        acc = acc + pivot.norm().ln();
        for i in (k + 1)..n {
            let mult = m.get(i, k) / pivot;
            if mult.re.is_zero() && mult.im.is_zero() {
                continue;
            }
            for j in (k + 1)..n {
                let v = m.get(i, j) - mult * m.get(k, j);
                m[(i, j)] = v;
            }
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Eigenvalues: Hessenberg reduction + shifted QR with complex Givens
// ---------------------------------------------------------------------------

/// Spectrum of a dense matrix, eigenvalues with algebraic multiplicity.
#[derive(Clone, Debug)]
pub struct SpectrumResult<T> {
    pub eigenvalues: Vec<Cplx<T>>,
    pub backend_info: String,
}

/// Householder reduction to upper Hessenberg form (in place).
fn hessenberg<T: Real>(a: &mut DenseMatrix<T>) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let zero = Cplx::new(T::zero(), T::zero());
    let two = T::of(2.0);
    let mut w = vec![zero; n];
    let mut y = vec![zero; n];
    for k in 0..(n - 2) {
        // Householder vector annihilating column k below the subdiagonal
        let mut norm_sq = T::zero();
        for i in (k + 1)..n {
            norm_sq = norm_sq + a.get(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm < T::of(1e-300) {
            continue;
        }
        let x0 = a.get(k + 1, k);
        // alpha = -(x0/|x0|)·‖x‖ maximizes |x0 - alpha| (numerical safety)
        let phase = if x0.norm() > T::zero() { x0 / Cplx::new(x0.norm(), T::zero()) } else { Cplx::new(T::one(), T::zero()) };
        let alpha = -phase * norm;
        let mut v_norm_sq = T::zero();
        for i in (k + 1)..n {
            let vi = if i == k + 1 { x0 - alpha } else { a.get(i, k) };
            w[i] = vi;
            v_norm_sq = v_norm_sq + vi.norm_sqr();
        }
        if v_norm_sq < T::of(1e-300) {
            continue;
        }
        let inv = T::one() / v_norm_sq.sqrt();
        for wi in w.iter_mut().take(n).skip(k + 1) {
            *wi = *wi * inv;
        }
        // left update: A[k+1.., k..] -= 2 w (wᴴ A); y = wᴴ A built row-wise
        for yj in y.iter_mut().take(n).skip(k) {
            *yj = zero;
        }
        for i in (k + 1)..n {
            let wc = w[i].conj();
            let row = a.row(i);
            for j in k..n {
                y[j] = y[j] + wc * row[j];
            }
        }
        for i in (k + 1)..n {
            let wi2 = w[i] * two;
            let row = a.row_mut(i);
            for j in k..n {
                row[j] = row[j] - wi2 * y[j];
            }
        }
        // right update: A[.., k+1..] -= 2 (A w) wᴴ
        for i in 0..n {
            let row = a.row(i);
            let mut t = zero;
            for j in (k + 1)..n {
                t = t + row[j] * w[j];
            }
            let t2 = t * two;
            let row = a.row_mut(i);
            for j in (k + 1)..n {
                row[j] = row[j] - t2 * w[j].conj();
            }
        }
        // store the exact zeros the similarity produced
        a.set(k + 1, k, alpha);
        for i in (k + 2)..n {
            a.set(i, k, zero);
        }
    }
}

/// Complex Givens rotation G = [[c, s], [−s̄, c]] (c real) with
/// G·(a, b)ᵀ = (r, 0)ᵀ.
fn givens<T: Real>(a: Cplx<T>, b: Cplx<T>) -> (T, Cplx<T>) {
    let an = a.norm();
    let bn = b.norm();
    if bn.is_zero() {
        return (T::one(), Cplx::new(T::zero(), T::zero()));
    }
    if an.is_zero() {
        return (T::zero(), b.conj() / Cplx::new(bn, T::zero()));
    }
    let h = an.hypot(bn);
    let c = an / h;
    let s = (a / Cplx::new(an, T::zero())) * b.conj() / Cplx::new(h, T::zero());
    (c, s)
}

/// Eigenvalue of the trailing 2×2 [[a, b], [c, d]] closest to d
/// (Wilkinson's shift).
fn wilkinson_shift<T: Real>(a: Cplx<T>, b: Cplx<T>, c: Cplx<T>, d: Cplx<T>) -> Cplx<T> {
    let half = T::of(0.5);
    let mid = (a + d) * half;
    let det = a * d - b * c;
    let disc = (mid * mid - det).sqrt();
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues of A.  Triangular inputs short-circuit to their diagonal;
/// everything else goes through Hessenberg reduction and explicit
/// single-shift QR with complex Givens rotations.
pub fn eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<SpectrumResult<T>> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(SpectrumResult { eigenvalues: vec![], backend_info: "empty".into() });
    }
    if a.is_upper_triangular() || a.is_lower_triangular() {
        let eig = (0..n).map(|i| a.get(i, i)).collect();
        return Ok(SpectrumResult { eigenvalues: eig, backend_info: "triangular-diagonal".into() });
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    let eig = qr_eigenvalues(&mut h)?;
    Ok(SpectrumResult { eigenvalues: eig, backend_info: "hessenberg-qr(complex,single-shift)".into() })
}

fn qr_eigenvalues<T: Real>(h: &mut DenseMatrix<T>) -> Result<Vec<Cplx<T>>> {
    let n = h.rows();
    let mut eig = vec![Cplx::new(T::zero(), T::zero()); n];
    if n == 1 {
        eig[0] = h.get(0, 0);
        return Ok(eig);
    }
    let eps = T::eps();
    let tiny = T::of(1e-291);
    // overall scale for the zero-diagonal corner cases of the deflation test
    let scale = {
        let mut s = T::zero();
        for i in 0..n {
            s = s + h.get(i, i).norm();
            if i > 0 {
                s = s + h.get(i, i - 1).norm();
            }
        }
        if s.is_zero() {
            T::one()
        } else {
            s / T::of(n as f64)
        }
    };
    let max_iters_per_eig = 40usize;
    let mut hi = n - 1;
    let mut stalled = 0usize;
    let mut total_budget = 40 * n + 100;
    loop {
        // deflate all negligible subdiagonals at the bottom
        while hi > 0 {
            let d = h.get(hi - 1, hi - 1).norm() + h.get(hi, hi).norm();
            let tst = if d.is_zero() { scale } else { d };
            if h.get(hi, hi - 1).norm() <= (eps * tst).max(tiny) {
                eig[hi] = h.get(hi, hi);
                hi -= 1;
                stalled = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            eig[0] = h.get(0, 0);
            return Ok(eig);
        }
        // active window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let d = h.get(lo - 1, lo - 1).norm() + h.get(lo, lo).norm();
            let tst = if d.is_zero() { scale } else { d };
            if h.get(lo, lo - 1).norm() <= (eps * tst).max(tiny) {
                break;
            }
            lo -= 1;
        }
        stalled += 1;
        total_budget = total_budget.saturating_sub(1);
        if stalled > max_iters_per_eig * (hi - lo + 1) || total_budget == 0 {
            return Err(Error::ConvergenceFailure { solver: "hessenberg-qr", iterations: 40 * n });
        }
        // shift: Wilkinson from the trailing 2×2, with an occasional
        // exceptional kick to break symmetry stalls
        let sigma = if stalled % 12 == 0 {
            h.get(hi, hi) + Cplx::new(T::of(0.75) * h.get(hi, hi - 1).norm(), T::zero())
        } else {
            wilkinson_shift(h.get(hi - 1, hi - 1), h.get(hi - 1, hi), h.get(hi, hi - 1), h.get(hi, hi))
        };
        // explicit shifted QR sweep on the window: H ← G…(H−σI)…Gᴴ + σI
        for i in lo..=hi {
            let v = h.get(i, i) - sigma;
            h.set(i, i, v);
        }
        let mut rots: Vec<(T, Cplx<T>)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s) = givens(h.get(i, i), h.get(i + 1, i));
            rots.push((c, s));
            // rows i, i+1, columns i..=hi
            for j in i..=hi {
                let x = h.get(i, j);
                let y = h.get(i + 1, j);
                h.set(i, j, Cplx::new(c, T::zero()) * x + s * y);
                h.set(i + 1, j, -s.conj() * x + Cplx::new(c, T::zero()) * y);
            }
        }
        for (i, &(c, s)) in rots.iter().enumerate() {
            let i = lo + i;
            // columns i, i+1, rows lo..=min(i+1, hi)
            let rmax = (i + 1).min(hi);
            for r in lo..=rmax {
                let x = h.get(r, i);
                let y = h.get(r, i + 1);
                h.set(r, i, Cplx::new(c, T::zero()) * x + s.conj() * y);
                h.set(r, i + 1, -s * x + Cplx::new(c, T::zero()) * y);
            }
        }
        for i in lo..=hi {
            let v = h.get(i, i) + sigma;
            h.set(i, i, v);
        }
    }
}

// ---------------------------------------------------------------------------
// Singular value decomposition: one-sided Jacobi
// ---------------------------------------------------------------------------

/// Thin SVD A = U Σ Vᴴ with Σ descending; U is rows×min(dims) with
/// orthonormal columns, V is cols×min(dims).
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: DenseMatrix<T>,
    pub s: Vec<T>,
    pub v: DenseMatrix<T>,
}

/// Singular values only, descending.
pub fn singular_values<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    Ok(svd(a)?.s)
}

/// One-sided Jacobi SVD.  Columns of the working matrix are rotated until
/// pairwise orthogonal; their norms are the singular values.
pub fn svd<T: Real>(a: &DenseMatrix<T>) -> Result<Svd<T>> {
    if a.rows() < a.cols() {
        // work on the adjoint and swap factors back
        let t = svd(&a.adjoint())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    let m = a.rows();
    let n = a.cols();
    let mut b = a.clone();
    let mut v = DenseMatrix::<T>::identity(n);
    if n == 0 {
        return Ok(Svd { u: DenseMatrix::zeros(m, 0), s: vec![], v });
    }
    let eps = T::eps();
    let max_sweeps = 60;
    let mut converged = false;
    for _sweep in 0..max_sweeps {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                // Gram data of the column pair
                let mut g = Cplx::new(T::zero(), T::zero());
                let mut aa = T::zero();
                let mut bb = T::zero();
                for r in 0..m {
                    let x = b.get(r, i);
                    let y = b.get(r, j);
                    g = g + x.conj() * y;
                    aa = aa + x.norm_sqr();
                    bb = bb + y.norm_sqr();
                }
                let gn = g.norm();
                if gn <= eps * (aa * bb).sqrt() || gn.is_zero() {
                    continue;
                }
                rotated = true;
                let zeta = (bb - aa) / (T::of(2.0) * gn);
                let t = {
                    let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                    sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s_mag = c * t;
                let phase = g / Cplx::new(gn, T::zero());
                let s = phase * s_mag;
                // [B_i, B_j] ← [B_i, B_j]·[[c, s], [−s̄, c]]
                for r in 0..m {
                    let x = b.get(r, i);
                    let y = b.get(r, j);
                    b.set(r, i, x * c - y * s.conj());
                    b.set(r, j, x * s + y * c);
                }
                for r in 0..n {
                    let x = v.get(r, i);
                    let y = v.get(r, j);
                    v.set(r, i, x * c - y * s.conj());
                    v.set(r, j, x * s + y * c);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { solver: "jacobi-svd", iterations: max_sweeps });
    }
    // singular values = column norms; sort descending with their vectors
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = (0..n)
        .map(|j| (0..m).fold(T::zero(), |acc, r| acc + b.get(r, j).norm_sqr()).sqrt())
        .collect();
    order.sort_by(|&p, &q| norms[q].partial_cmp(&norms[p]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let mut u = DenseMatrix::<T>::zeros(m, n);
    let mut vv = DenseMatrix::<T>::zeros(n, n);
    // columns with negligible norm get an orthonormal completion below
    let rank_tol = s.first().copied().unwrap_or(T::zero()) * T::of(1e-280).max(eps * eps);
    for (out_j, &j) in order.iter().enumerate() {
        if norms[j] > rank_tol && norms[j] > T::of(1e-300) {
            let inv = T::one() / norms[j];
            for r in 0..m {
                u.set(r, out_j, b.get(r, j) * inv);
            }
        }
        for r in 0..n {
            vv.set(r, out_j, v.get(r, j));
        }
    }
    complete_orthonormal(&mut u, &s, rank_tol);
    Ok(Svd { u, s, v: vv })
}

/// Replaces the columns whose singular value collapsed with vectors
/// orthonormal to everything already present (Gram–Schmidt against the
/// standard basis).
fn complete_orthonormal<T: Real>(u: &mut DenseMatrix<T>, s: &[T], rank_tol: T) {
    let m = u.rows();
    let n = u.cols();
    let mut next_basis = 0usize;
    for j in 0..n {
        if s[j] > rank_tol && s[j] > T::of(1e-300) {
            continue;
        }
        // find a basis vector with a healthy residual against current columns
        'candidates: while next_basis < m {
            let mut col = vec![Cplx::new(T::zero(), T::zero()); m];
            col[next_basis] = Cplx::new(T::one(), T::zero());
            next_basis += 1;
            // two passes of modified Gram–Schmidt for stability
            for _ in 0..2 {
                for k in 0..n {
                    if k == j && s[k] <= rank_tol {
                        continue;
                    }
                    let mut proj = Cplx::new(T::zero(), T::zero());
                    for r in 0..m {
                        proj = proj + u.get(r, k).conj() * col[r];
                    }
                    for (r, c) in col.iter_mut().enumerate() {
                        *c = *c - u.get(r, k) * proj;
                    }
                }
            }
            let norm = col.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
            if norm > T::of(0.1) {
                let inv = T::one() / norm;
                for (r, c) in col.iter().enumerate() {
                    u.set(r, j, *c * inv);
                }
                break 'candidates;
            }
        }
    }
}

/// Operator (spectral) norm.  Small matrices use the exact Jacobi SVD;
/// larger ones a deterministic power iteration on AᴴA, which is plenty for
/// the norm *reports* this crate emits.
pub fn op_norm<T: Real>(a: &DenseMatrix<T>) -> T {
    if a.rows() == 0 || a.cols() == 0 {
        return T::zero();
    }
    if a.rows().max(a.cols()) <= 64 {
        return svd(a).map(|d| d.s.first().copied().unwrap_or(T::zero())).unwrap_or_else(|_| a.hs_norm());
    }
    let n = a.cols();
    // deterministic, mildly tilted start vector so symmetry cannot trap it
    let mut v: Vec<Cplx<T>> = (0..n)
        .map(|j| Cplx::new(T::one() + T::of(0.5) * T::of(j as f64) / T::of(n as f64), T::of(0.25) * T::of(((j * 7919) % 13) as f64) / T::of(13.0)))
        .collect();
    let mut norm = T::zero();
    let mut prev = T::zero();
    let adj = a.adjoint();
    for _ in 0..200 {
        let w = a.matvec(&v);
        let x = adj.matvec(&w);
        let xn = x.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if xn.is_zero() {
            return T::zero();
        }
        let inv = T::one() / xn;
        v = x.into_iter().map(|z| z * inv).collect();
        norm = xn.sqrt();
        if (norm - prev).abs() <= T::of(1e-12) * norm.max(T::one()) {
            break;
        }
        prev = norm;
    }
    norm
}

/// Greedy nearest-neighbor multiset match; returns the largest pair
/// distance, or ∞ on length mismatch.  The accepted tolerance is the
/// caller's business.
pub fn multiset_match_distance<T: Real>(xs: &[Cplx<T>], ys: &[Cplx<T>]) -> T {
    if xs.len() != ys.len() {
        return T::infinity();
    }
    let mut used = vec![false; ys.len()];
    let mut worst = T::zero();
    for &x in xs {
        let mut best = T::infinity();
        let mut best_j = usize::MAX;
        for (j, &y) in ys.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if d < best {
                best = d;
                best_j = j;
            }
        }
        if best_j == usize::MAX {
            return T::infinity();
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx;
    use crate::C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_identity_and_blocks() {
        let a = DenseMatrix::from_rows(vec![
            vec![c(1.0, 1.0), c(2.0, 0.0)],
            vec![c(0.0, -1.0), c(3.0, 2.0)],
        ]);
        let i = DenseMatrix::<f64>::identity(2);
        assert!(a.mul(&i).sub(&a).hs_norm() < 1e-15);
        let blk = a.block(0, 2, 1, 2);
        assert_eq!(blk.rows(), 2);
        assert_eq!(blk.cols(), 1);
        assert_eq!(blk.get(1, 0), c(3.0, 2.0));
        let re = DenseMatrix::from_blocks_2x2(
            &a.block(0, 1, 0, 1),
            &a.block(0, 1, 1, 2),
            &a.block(1, 2, 0, 1),
            &a.block(1, 2, 1, 2),
        );
        assert!(re.sub(&a).hs_norm() == 0.0);
    }

    #[test]
    fn zero_dimensional_blocks_are_fine() {
        let a = DenseMatrix::<f64>::identity(3);
        let empty_cols = a.block(0, 3, 0, 0);
        assert_eq!((empty_cols.rows(), empty_cols.cols()), (3, 0));
        let prod = empty_cols.adjoint().mul(&empty_cols);
        assert_eq!((prod.rows(), prod.cols()), (0, 0));
        assert_eq!(log_abs_det(&prod), 0.0); // det of 0×0 is 1
        let back = DenseMatrix::from_blocks_2x2(&a, &empty_cols, &a.block(3, 3, 0, 3), &a.block(3, 3, 0, 0));
        assert!(back.sub(&a).hs_norm() == 0.0);
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = DenseMatrix::from_rows(vec![vec![c(1.0, 2.0)], vec![c(-3.0, 0.5)]]);
        let x = solve(&DenseMatrix::identity(2), &b).unwrap();
        assert!(x.sub(&b).hs_norm() < 1e-15);

        let d = DenseMatrix::from_rows(vec![vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(4.0, 0.0)]]);
        let inv = invert(&d).unwrap();
        assert!((inv.get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((inv.get(1, 1) - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_well_conditioned_residual() {
        // fixed "random" 16×16 via a simple LCG to stay deterministic
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let n = 16;
        let mut a = DenseMatrix::<f64>::from_fn(n, n, |_, _| c(next(), next()));
        for i in 0..n {
            a[(i, i)] = a[(i, i)] + c(4.0, 0.0); // diagonally dominant => well-conditioned
        }
        let x = invert(&a).unwrap();
        assert!(a.mul(&x).identity_residual() < 1e-12);
    }

    #[test]
    fn singular_matrix_detected() {
        let a = DenseMatrix::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(matches!(solve(&a, &DenseMatrix::identity(2)), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn log_abs_det_examples() {
        assert_eq!(log_abs_det(&DenseMatrix::<f64>::identity(5)), 0.0);
        let d = DenseMatrix::from_rows(vec![vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 3.0)]]);
        assert!((log_abs_det(&d) - 6f64.ln()).abs() < 1e-14);
        // triangular: P_16 − 0.5 for the Jordan-shift symbol
        let n = 16;
        let tri = DenseMatrix::<f64>::from_fn(n, n, |i, j| {
            if i == j {
                c(-0.5, 0.0)
            } else if i == j + 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!((log_abs_det(&tri) - 16.0 * 0.5f64.ln()).abs() < 1e-13);
        // singular matrix underflows to −∞
        let z = DenseMatrix::<f64>::zeros(3, 3);
        assert_eq!(log_abs_det(&z), f64::NEG_INFINITY);
    }

    #[test]
    fn eigenvalues_scalar_matrix() {
        let v = c(1.5, -2.0);
        let a = DenseMatrix::<f64>::identity(3).scaled(v);
        let s = eigenvalues(&a).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for e in s.eigenvalues {
            assert!((e - v).norm() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues_jordan_shift_exactly_zero() {
        // lower-triangular fast path keeps the nilpotent spectrum exact
        for n in [4usize, 16, 64] {
            let a = DenseMatrix::<f64>::from_fn(n, n, |i, j| if i == j + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
            let s = eigenvalues(&a).unwrap();
            assert!(s.eigenvalues.iter().all(|e| e.norm() == 0.0));
        }
    }

    #[test]
    fn eigenvalues_tridiagonal_closed_form() {
        // free hopping on 4 sites: eigenvalues 2cos(kπ/5)
        let n = 4;
        let a = DenseMatrix::<f64>::from_fn(n, n, |i, j| {
            if i.abs_diff(j) == 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let got = eigenvalues(&a).unwrap().eigenvalues;
        let want: Vec<C64> = (1..=4)
            .map(|k| c(2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos(), 0.0))
            .collect();
        assert!(multiset_match_distance(&got, &want) < 1e-10);
    }

    #[test]
    fn eigenvalues_match_det_product() {
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [2usize, 5, 16, 33] {
            let a = DenseMatrix::<f64>::from_fn(n, n, |_, _| c(next(), next()));
            let s = eigenvalues(&a).unwrap();
            let log_prod: f64 = s.eigenvalues.iter().map(|e| e.norm().ln()).sum();
            let lad = log_abs_det(&a);
            assert!(
                (log_prod - lad).abs() < 1e-8 * lad.abs().max(1.0),
                "n={n}: {log_prod} vs {lad}"
            );
        }
    }

    #[test]
    fn svd_scalar_and_rank_one() {
        let a = DenseMatrix::<f64>::identity(3).scaled(c(0.0, -2.5));
        let s = singular_values(&a).unwrap();
        for v in s {
            assert!((v - 2.5).abs() < 1e-14);
        }
        // rank-1: u vᴴ has singular values {‖u‖‖v‖, 0, 0}
        let u = [c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0)];
        let v = [c(2.0, 1.0), c(0.5, 0.0), c(0.0, 1.0)];
        let a = DenseMatrix::<f64>::from_fn(3, 3, |i, j| u[i] * v[j].conj());
        let s = singular_values(&a).unwrap();
        let un: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((s[0] - un * vn).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs_and_is_orthonormal() {
        let mut state = 0xDEADBEEFCAFEF00Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for (m, n) in [(5usize, 5usize), (8, 3), (3, 8), (6, 6)] {
            let a = DenseMatrix::<f64>::from_fn(m, n, |_, _| c(next(), next()));
            let d = svd(&a).unwrap();
            let k = m.min(n);
            assert_eq!(d.s.len(), k);
            assert!(d.u.adjoint().mul(&d.u).identity_residual() < 1e-12);
            assert!(d.v.adjoint().mul(&d.v).identity_residual() < 1e-12);
            let mut sig = DenseMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                sig[(i, i)] = c(d.s[i], 0.0);
            }
            let back = d.u.mul(&sig).mul(&d.v.adjoint());
            assert!(back.sub(&a).hs_norm() < 1e-12 * a.hs_norm().max(1.0));
            // descending
            for w in d.s.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_rank_deficient_completion() {
        // 4×4 of rank 2: U must still come back orthonormal
        let b = DenseMatrix::<f64>::from_fn(4, 2, |i, j| c((i + j) as f64, (i * j) as f64));
        let a = b.mul(&b.adjoint());
        let d = svd(&a).unwrap();
        assert!(d.u.adjoint().mul(&d.u).identity_residual() < 1e-10);
        assert!(d.s[2] < 1e-10 && d.s[3] < 1e-10);
    }

    #[test]
    fn op_norm_small_vs_power_iteration() {
        let mut state = 0x12345678ABCDEF99u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = DenseMatrix::<f64>::from_fn(80, 80, |_, _| c(next(), next()));
        let power = op_norm(&a);
        let exact = svd(&a).unwrap().s[0];
        assert!((power - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn eigen_convergence_on_unitary_like() {
        // companion-style matrix of z^n = 1: eigenvalues are the n-th roots
        let n = 24;
        let a = DenseMatrix::<f64>::from_fn(n, n, |i, j| {
            if i == j + 1 || (i == 0 && j == n - 1) {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let got = eigenvalues(&a).unwrap().eigenvalues;
        let want: Vec<C64> = (0..n)
            .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        assert!(multiset_match_distance(&got, &want) < 1e-9);
    }

    #[test]
    fn generic_over_f32() {
        let mut state = 0x0123456789ABCDEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = DenseMatrix::<f32>::from_fn(6, 6, |_, _| cplx::<f32>(next(), next()));
        for i in 0..6 {
            a[(i, i)] = a[(i, i)] + cplx::<f32>(2.0, 0.0);
        }
        let s = eigenvalues(&a).unwrap();
        assert_eq!(s.eigenvalues.len(), 6);
        let log_prod: f32 = s.eigenvalues.iter().map(|e| e.norm().ln()).sum();
        let lad = log_abs_det(&a);
        assert!((log_prod - lad).abs() < 1e-3 * lad.abs().max(1.0));
    }
}
