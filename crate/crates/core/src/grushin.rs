//! Bordered (Grushin) systems for the Toeplitz operator and the determinant
//! identities that flow from them.
//!
//! The first problem borders P_N − z with the circulant cross-blocks coming
//! from the index partition I_N = [0,N), J = [N, N+M) of Z/(N+M)Z; its
//! inverse blocks (E, E_±, E_{−+}) satisfy norm bounds in terms of
//! d_N(z) = dist(z, circulant spectrum) and the trace-norm tail ε(M).  The
//! second problem splits the singular values of E_{−+} at a threshold τ and
//! produces the composed system (𝒯, 𝒢), whose corner G_{−+} is diagonal in
//! the singular bases.  Log-determinants telescope along the chain
//! P_N−z → (𝒫, E_{−+}) → (𝒯, G_{−+}) → perturbed variants, which is what
//! `determinant_ladder` measures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{log_abs_det, lu_factor, op_norm, svd, DenseMatrix};
use crate::matrix::{build_circulant, build_toeplitz, circulant_spectrum, epsilon_bound, perturb};
use crate::scalar::{Cplx, Real};
use crate::symbol::Symbol;

/// The I_N / J partition of Z/(N+M)Z; J represents [−M, 0) mod Ñ.
#[derive(Clone, Copy, Debug)]
pub struct IndexPartition {
    pub n: usize,
    pub m: usize,
}

impl IndexPartition {
    pub fn new(n: usize, m: usize) -> Self {
        assert!(n >= 1 && m >= 1);
        IndexPartition { n, m }
    }

    pub fn full_dim(&self) -> usize {
        self.n + self.m
    }

    pub fn i_n(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn j(&self) -> std::ops::Range<usize> {
        self.n..self.n + self.m
    }
}

/// First Grushin problem 𝒫(z) = [[P_N − z, R_−], [R_+, R_{+−}]].
#[derive(Clone, Debug)]
pub struct FirstGrushin<T> {
    pub z: Cplx<T>,
    pub n: usize,
    pub m: usize,
    /// P_N − z (true Toeplitz block, not the circulant restriction).
    pub p_block: DenseMatrix<T>,
    pub r_minus: DenseMatrix<T>,
    pub r_plus: DenseMatrix<T>,
    pub r_plusminus: DenseMatrix<T>,
    /// dist(z, circulant spectrum).
    pub d_n: T,
    /// Trace-norm tail bound ε(M).
    pub epsilon_m: T,
}

impl<T: Real> FirstGrushin<T> {
    /// The assembled (N+M)² block operator.
    pub fn assemble(&self) -> DenseMatrix<T> {
        DenseMatrix::from_blocks_2x2(&self.p_block, &self.r_minus, &self.r_plus, &self.r_plusminus)
    }
}

/// Builds 𝒫(z): the cross-blocks come from the circulant of p_N minus z,
/// restricted to the partition; the (1,1) block swaps in the Toeplitz
/// P_N − z.
pub fn assemble_first_grushin<T: Real>(symbol: &Symbol<T>, n: usize, m: usize, z: Cplx<T>) -> FirstGrushin<T> {
    let part = IndexPartition::new(n, m);
    let nt = part.full_dim();
    let emb = build_circulant(symbol, n, m);
    let mut shifted = emb.full;
    for i in 0..nt {
        let v = shifted.get(i, i) - z;
        shifted.set(i, i, v);
    }
    let mut p_block = build_toeplitz(symbol, n);
    for i in 0..n {
        let v = p_block.get(i, i) - z;
        p_block.set(i, i, v);
    }
    let d_n = circulant_spectrum(symbol, n, m)
        .into_iter()
        .fold(T::infinity(), |acc, l| acc.min((l - z).norm()));
    FirstGrushin {
        z,
        n,
        m,
        p_block,
        r_minus: shifted.block(0, n, n, nt),
        r_plus: shifted.block(n, nt, 0, n),
        r_plusminus: shifted.block(n, nt, n, nt),
        d_n,
        epsilon_m: epsilon_bound(symbol, m),
    }
}

/// Norm report for the inverse blocks against (d_N − ε(M))⁻¹.
#[derive(Clone, Debug, Serialize)]
pub struct GrushinNormReport<T> {
    pub d_n: T,
    pub epsilon_m: T,
    /// Whether the hypothesis ε(M) < d_N held, i.e. the bound applies.
    pub bound_applicable: bool,
    /// (d_N − ε(M))⁻¹ when applicable.
    pub bound: T,
    /// Operator norms of E, E_+, E_−, E_{−+}.
    pub block_norms: [T; 4],
    /// True when an applicable bound was exceeded (reported, not hidden).
    pub bound_violated: bool,
}

/// Inverse blocks ℰ = 𝒫⁻¹ = [[E, E_+], [E_−, E_{−+}]].
#[derive(Clone, Debug)]
pub struct FirstGrushinInverse<T> {
    pub e: DenseMatrix<T>,
    pub e_plus: DenseMatrix<T>,
    pub e_minus: DenseMatrix<T>,
    pub e_minusplus: DenseMatrix<T>,
    pub norm_report: GrushinNormReport<T>,
}

impl<T: Real> FirstGrushinInverse<T> {
    pub fn assemble(&self) -> DenseMatrix<T> {
        DenseMatrix::from_blocks_2x2(&self.e, &self.e_plus, &self.e_minus, &self.e_minusplus)
    }
}

/// Inverts the assembled bordered operator and records the block norms
/// against the (d_N − ε(M))⁻¹ bound.  Violations of an applicable bound are
/// recorded in the report, never silently accepted.
pub fn invert_first_grushin<T: Real>(g: &FirstGrushin<T>) -> Result<FirstGrushinInverse<T>> {
    let nt = g.n + g.m;
    let assembled = g.assemble();
    let lu = lu_factor(&assembled).map_err(|_| Error::SingularGrushin {
        re: g.z.re.to_f64().unwrap_or(f64::NAN),
        im: g.z.im.to_f64().unwrap_or(f64::NAN),
    })?;
    let inv = lu.solve_matrix(&DenseMatrix::identity(nt));
    let e = inv.block(0, g.n, 0, g.n);
    let e_plus = inv.block(0, g.n, g.n, nt);
    let e_minus = inv.block(g.n, nt, 0, g.n);
    let e_minusplus = inv.block(g.n, nt, g.n, nt);
    let block_norms = [op_norm(&e), op_norm(&e_plus), op_norm(&e_minus), op_norm(&e_minusplus)];
    let bound_applicable = g.epsilon_m < g.d_n;
    let bound = if bound_applicable { (g.d_n - g.epsilon_m).recip() } else { T::infinity() };
    let tol = T::of(1e-8);
    let bound_violated = bound_applicable && block_norms.iter().any(|&nrm| nrm > bound + tol);
    Ok(FirstGrushinInverse {
        e,
        e_plus,
        e_minus,
        e_minusplus,
        norm_report: GrushinNormReport {
            d_n: g.d_n,
            epsilon_m: g.epsilon_m,
            bound_applicable,
            bound,
            block_norms,
            bound_violated,
        },
    })
}

/// Default splitting threshold: τ = min(0.1, 1/(4‖R_{+−}‖)), which keeps
/// ‖T_{+−}‖·‖G_{−+}‖ ≤ ‖R_{+−}‖·τ below 1/2 with room to spare.
pub fn default_tau<T: Real>(first: &FirstGrushin<T>) -> T {
    let r = op_norm(&first.r_plusminus);
    let quarter = (T::of(4.0) * r).recip();
    T::of(0.1).min(quarter)
}

/// Second (composed) Grushin problem: the singular split of E_{−+} at τ and
/// the resulting (𝒯, 𝒢) blocks.
#[derive(Clone, Debug)]
pub struct SecondGrushin<T> {
    pub tau: T,
    /// Number of singular values ≤ τ.
    pub k: usize,
    /// All singular values of E_{−+}, ascending: t_1 ≤ … ≤ t_M.
    pub t: Vec<T>,
    /// Right singular vectors e_j as columns, ascending order.
    pub e_vecs: DenseMatrix<T>,
    /// Left singular vectors f_j as columns, ascending order.
    pub f_vecs: DenseMatrix<T>,
    /// F = Σ_{j>k} t_j⁻¹ e_j f_jᴴ (M×M).
    pub f: DenseMatrix<T>,
    /// F_+ = [e_1 … e_k] (M×k).
    pub f_plus: DenseMatrix<T>,
    /// F_− = [f_1 … f_k]ᴴ (k×M).
    pub f_minus: DenseMatrix<T>,
    /// F_{−+} = −diag(t_1 … t_k) in the (e, f) bases (k×k).
    pub f_minusplus: DenseMatrix<T>,
    /// Assembled 𝒯 = [[P_N−z, R_−S_−], [S_+R_+, S_+R_{+−}S_−]], (N+k)².
    pub t_matrix: DenseMatrix<T>,
    /// G = E − E_+ F E_− (N×N).
    pub g: DenseMatrix<T>,
    /// G_+ = E_+ E_k (N×k).
    pub g_plus: DenseMatrix<T>,
    /// G_− = F_kᴴ E_− (k×N).
    pub g_minus: DenseMatrix<T>,
    /// G_{−+} = diag(t_1 … t_k) (k×k).
    pub g_minusplus: DenseMatrix<T>,
}

impl<T: Real> SecondGrushin<T> {
    /// The assembled inverse 𝒢 = [[G, G_+], [G_−, G_{−+}]], (N+k)².
    pub fn g_matrix(&self) -> DenseMatrix<T> {
        DenseMatrix::from_blocks_2x2(&self.g, &self.g_plus, &self.g_minus, &self.g_minusplus)
    }
}

/// Splits the singular values of E_{−+} at τ and composes the two problems.
/// Rejects thresholds within relative 10⁻⁸ of a singular value: both
/// constructions need a strict spectral gap at τ.
pub fn build_second_grushin<T: Real>(
    first: &FirstGrushin<T>,
    inv: &FirstGrushinInverse<T>,
    tau: T,
) -> Result<SecondGrushin<T>> {
    assert!(tau > T::zero(), "threshold must be positive");
    let m = first.m;
    let n = first.n;
    let dec = svd(&inv.e_minusplus)?;
    // ascending order: t_j = σ_{M−j}, e_j right (V), f_j left (U)
    let t: Vec<T> = dec.s.iter().rev().copied().collect();
    let e_vecs = DenseMatrix::from_fn(m, m, |i, j| dec.v.get(i, m - 1 - j));
    let f_vecs = DenseMatrix::from_fn(m, m, |i, j| dec.u.get(i, m - 1 - j));
    let rel = T::of(1e-8);
    for &tj in &t {
        if (tj - tau).abs() < tau * rel {
            return Err(Error::ThresholdDegenerate {
                value: tj.to_f64().unwrap_or(f64::NAN),
                threshold: tau.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let k = t.iter().filter(|&&tj| tj <= tau).count();
    // F = Σ_{j>k} t_j⁻¹ e_j f_jᴴ
    let mut f = DenseMatrix::zeros(m, m);
    for j in k..m {
        let inv_t = Cplx::new(t[j].recip(), T::zero());
        for r in 0..m {
            let er = e_vecs.get(r, j) * inv_t;
            for c in 0..m {
                let v = f.get(r, c) + er * f_vecs.get(c, j).conj();
                f.set(r, c, v);
            }
        }
    }
    let e_k = e_vecs.block(0, m, 0, k);
    let f_k = f_vecs.block(0, m, 0, k);
    let f_plus = e_k.clone();
    let f_minus = f_k.adjoint();
    let mut f_minusplus = DenseMatrix::zeros(k, k);
    let mut g_minusplus = DenseMatrix::zeros(k, k);
    for j in 0..k {
        f_minusplus.set(j, j, Cplx::new(-t[j], T::zero()));
        g_minusplus.set(j, j, Cplx::new(t[j], T::zero()));
    }
    // 𝒯 blocks: S_− = F_k (inclusion of 𝒮_−), S_+ = E_kᴴ (projection on 𝒮_+)
    let t_minus = first.r_minus.mul(&f_k);
    let t_plus = e_k.adjoint().mul(&first.r_plus);
    let t_pm = e_k.adjoint().mul(&first.r_plusminus).mul(&f_k);
    let t_matrix = DenseMatrix::from_blocks_2x2(&first.p_block, &t_minus, &t_plus, &t_pm);
    // 𝒢 blocks
    let g = inv.e.sub(&inv.e_plus.mul(&f).mul(&inv.e_minus));
    let g_plus = inv.e_plus.mul(&e_k);
    let g_minus = f_k.adjoint().mul(&inv.e_minus);
    debug_assert_eq!(t_matrix.rows(), n + k);
    Ok(SecondGrushin {
        tau,
        k,
        t,
        e_vecs,
        f_vecs,
        f,
        f_plus,
        f_minus,
        f_minusplus,
        t_matrix,
        g,
        g_plus,
        g_minus,
        g_minusplus,
    })
}

/// Residuals of the composed problem: ‖𝒯𝒢 − I‖, ‖𝒢𝒯 − I‖, agreement of the
/// stored 𝒢 blocks with a direct LU inverse of 𝒯, and the recomputed block
/// formulas.
#[derive(Clone, Debug, Serialize)]
pub struct CompositionReport<T> {
    pub tg_residual: T,
    pub gt_residual: T,
    /// ‖𝒢 − 𝒯⁻¹‖_HS / ‖𝒢‖_HS via an independent LU inversion.
    pub direct_inverse_residual: T,
    /// Max entrywise distance of G, G_± from their defining formulas.
    pub block_formula_residual: T,
    pub t_norm_hs: T,
    pub g_norm_hs: T,
}

/// Multiplies the composed problem out both ways and cross-checks the block
/// formulas.
pub fn verify_composition<T: Real>(
    inv: &FirstGrushinInverse<T>,
    second: &SecondGrushin<T>,
) -> CompositionReport<T> {
    let t = &second.t_matrix;
    let g = second.g_matrix();
    let tg_residual = t.mul(&g).identity_residual();
    let gt_residual = g.mul(t).identity_residual();
    let direct_inverse_residual = match lu_factor(t) {
        Ok(lu) => {
            let direct = lu.solve_matrix(&DenseMatrix::identity(t.rows()));
            direct.sub(&g).hs_norm() / g.hs_norm().max(T::of(1e-300))
        }
        Err(_) => T::infinity(),
    };
    let g_formula = inv.e.sub(&inv.e_plus.mul(&second.f).mul(&inv.e_minus));
    let gp_formula = inv.e_plus.mul(&second.f_plus);
    let gm_formula = second.f_minus.mul(&inv.e_minus);
    let block_formula_residual = g_formula
        .sub(&second.g)
        .max_abs()
        .max(gp_formula.sub(&second.g_plus).max_abs())
        .max(gm_formula.sub(&second.g_minus).max_abs())
        .max(second.f_minusplus.add(&second.g_minusplus).max_abs());
    CompositionReport {
        tg_residual,
        gt_residual,
        direct_inverse_residual,
        block_formula_residual,
        t_norm_hs: t.hs_norm(),
        g_norm_hs: g.hs_norm(),
    }
}

/// Perturbed corner block G_{−+}^δ and its validation data.
#[derive(Clone, Debug)]
pub struct PerturbedBlocks<T> {
    /// G_{−+}^δ = G_{−+} − δ G_− Q (1 + δ G Q)⁻¹ G_+.
    pub g_minusplus_delta: DenseMatrix<T>,
    /// ‖formula − Schur corner of (𝒯^δ)⁻¹‖_HS relative to ‖G_{−+}^δ‖_HS.
    pub validation_residual: T,
    /// δ·‖G‖·‖Q‖, the Neumann series margin.
    pub neumann_product: T,
}

/// Computes G_{−+}^δ by the Neumann-resolvent formula and validates it
/// against the corner of a direct LU inversion of 𝒯^δ.
pub fn perturbed_blocks<T: Real>(
    second: &SecondGrushin<T>,
    q: &DenseMatrix<T>,
    delta: T,
) -> Result<PerturbedBlocks<T>> {
    let n = second.g.rows();
    let k = second.k;
    if (q.rows(), q.cols()) != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "perturbation is {}x{}, system is {n}x{n}",
            q.rows(),
            q.cols()
        )));
    }
    let neumann_product = delta * op_norm(&second.g) * op_norm(q);
    if !(neumann_product < T::of(0.5)) {
        return Err(Error::NeumannViolation { product: neumann_product.to_f64().unwrap_or(f64::NAN) });
    }
    let g_minusplus_delta = if delta.is_zero() || k == 0 {
        second.g_minusplus.clone()
    } else {
        // (1 + δ G Q) X = G_+, then G_{−+} − δ G_− Q X
        let mut inner = DenseMatrix::identity(n);
        let gq = second.g.mul(q);
        inner = inner.add(&gq.scaled(Cplx::new(delta, T::zero())));
        let x = lu_factor(&inner)
            .map_err(|_| Error::NeumannViolation { product: neumann_product.to_f64().unwrap_or(f64::NAN) })?
            .solve_matrix(&second.g_plus);
        let correction = second.g_minus.mul(&q.scaled(Cplx::new(delta, T::zero()))).mul(&x);
        second.g_minusplus.sub(&correction)
    };
    // independent check: corner block of the direct inverse of 𝒯^δ
    let mut t_delta = second.t_matrix.clone();
    if !delta.is_zero() {
        let dq = q.scaled(Cplx::new(delta, T::zero()));
        for i in 0..n {
            for j in 0..n {
                let v = t_delta.get(i, j) + dq.get(i, j);
                t_delta.set(i, j, v);
            }
        }
    }
    let validation_residual = if k == 0 {
        T::zero()
    } else {
        match lu_factor(&t_delta) {
            Ok(lu) => {
                let inv = lu.solve_matrix(&DenseMatrix::identity(n + k));
                let corner = inv.block(n, n + k, n, n + k);
                corner.sub(&g_minusplus_delta).hs_norm() / g_minusplus_delta.hs_norm().max(T::of(1e-300))
            }
            Err(_) => T::infinity(),
        }
    };
    Ok(PerturbedBlocks { g_minusplus_delta, validation_residual, neumann_product })
}

/// Everything the determinant ladder measures at one (z, N, M, δ) cell.
#[derive(Clone, Debug, Serialize)]
pub struct LadderReport<T> {
    pub z_re: T,
    pub z_im: T,
    pub n: usize,
    pub m: usize,
    pub delta: T,
    pub tau: T,
    pub k: usize,
    pub d_n: T,
    pub epsilon_m: T,
    /// ln|det(P_N − z)|.
    pub logdet_p: T,
    /// ln|det 𝒫(z)| of the assembled first problem.
    pub logdet_first: T,
    /// ln|det E_{−+}|.
    pub logdet_e_minusplus: T,
    /// ln|det 𝒯|.
    pub logdet_t: T,
    /// ln|det G_{−+}| = Σ_{j≤k} ln t_j.
    pub logdet_g_minusplus: T,
    /// ln|det(P_N^δ − z)|.
    pub logdet_p_delta: T,
    /// ln|det 𝒯^δ|.
    pub logdet_t_delta: T,
    /// ln|det G_{−+}^δ|.
    pub logdet_g_minusplus_delta: T,
    /// ln|det(p_N(τ) − z)| over the circulant spectrum.
    pub logdet_circulant: T,
    /// |ln|det(P−z)| − ln|det 𝒫| − ln|det E_{−+}||.
    pub residual_a: T,
    /// |ln|det(P−z)| − ln|det 𝒯| − ln|det G_{−+}||.
    pub residual_b: T,
    /// |ln|det(P^δ−z)| − ln|det 𝒯^δ| − ln|det G_{−+}^δ||.
    pub residual_c: T,
    /// r(z) = ln|det(P^δ−z)| − ln|det(p_N−z)| − ln|det G_{−+}^δ|.
    pub r_of_z: T,
    /// Neumann margin δ‖G‖‖Q‖ from the perturbation step.
    pub neumann_product: T,
}

/// Runs the whole determinant chain at one point.  `tau` of `None` picks the
/// per-z default; a threshold that straddles a singular value is nudged
/// upward (relative 3.7·10⁻⁷ per step, at most four times) so grid sweeps
/// do not die on measure-zero coincidences.
pub fn determinant_ladder<T: Real>(
    symbol: &Symbol<T>,
    n: usize,
    m: usize,
    z: Cplx<T>,
    delta: T,
    q: &DenseMatrix<T>,
    tau: Option<T>,
) -> Result<LadderReport<T>> {
    let first = assemble_first_grushin(symbol, n, m, z);
    let inv = invert_first_grushin(&first)?;
    let mut tau_used = tau.unwrap_or_else(|| default_tau(&first));
    let mut second = None;
    for _ in 0..4 {
        match build_second_grushin(&first, &inv, tau_used) {
            Ok(s) => {
                second = Some(s);
                break;
            }
            Err(Error::ThresholdDegenerate { .. }) => {
                tau_used = tau_used * (T::one() + T::of(3.7e-7));
            }
            Err(e) => return Err(e),
        }
    }
    let second = match second {
        Some(s) => s,
        None => {
            return Err(Error::ThresholdDegenerate {
                value: f64::NAN,
                threshold: tau_used.to_f64().unwrap_or(f64::NAN),
            })
        }
    };
    let pert = perturbed_blocks(&second, q, delta)?;

    let logdet_p = log_abs_det(&first.p_block);
    let logdet_first = log_abs_det(&first.assemble());
    let logdet_e_minusplus = log_abs_det(&inv.e_minusplus);
    let logdet_t = log_abs_det(&second.t_matrix);
    let logdet_g_minusplus = second.t[..second.k]
        .iter()
        .fold(T::zero(), |acc, &tj| acc + tj.ln());

    let p_delta = perturb(&first.p_block, q, delta)?;
    let logdet_p_delta = log_abs_det(&p_delta);
    let mut t_delta = second.t_matrix.clone();
    if !delta.is_zero() {
        for i in 0..n {
            for j in 0..n {
                let v = t_delta.get(i, j) + q.get(i, j) * delta;
                t_delta.set(i, j, v);
            }
        }
    }
    let logdet_t_delta = log_abs_det(&t_delta);
    let logdet_g_minusplus_delta = log_abs_det(&pert.g_minusplus_delta);
    let logdet_circulant = circulant_spectrum(symbol, n, m)
        .into_iter()
        .fold(T::zero(), |acc, l| acc + (l - z).norm().ln());

    let residual_a = (logdet_p - logdet_first - logdet_e_minusplus).abs();
    let residual_b = (logdet_p - logdet_t - logdet_g_minusplus).abs();
    let residual_c = (logdet_p_delta - logdet_t_delta - logdet_g_minusplus_delta).abs();
    let r_of_z = logdet_p_delta - logdet_circulant - logdet_g_minusplus_delta;

    Ok(LadderReport {
        z_re: z.re,
        z_im: z.im,
        n,
        m,
        delta,
        tau: tau_used,
        k: second.k,
        d_n: first.d_n,
        epsilon_m: first.epsilon_m,
        logdet_p,
        logdet_first,
        logdet_e_minusplus,
        logdet_t,
        logdet_g_minusplus,
        logdet_p_delta,
        logdet_t_delta,
        logdet_g_minusplus_delta,
        logdet_circulant,
        residual_a,
        residual_b,
        residual_c,
        r_of_z,
        neumann_product: pert.neumann_product,
    })
}

/// The streamed JSON record of a ladder cell, field names fixed by the
/// report format.
#[derive(Clone, Debug, Serialize)]
pub struct LadderRecord {
    pub z_re: f64,
    pub z_im: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub tau: f64,
    pub k: usize,
    pub residual_a: f64,
    pub residual_b: f64,
    pub residual_c: f64,
    pub r_of_z: f64,
    #[serde(rename = "dN")]
    pub d_n: f64,
    #[serde(rename = "epsM")]
    pub eps_m: f64,
}

impl<T: Real> From<&LadderReport<T>> for LadderRecord {
    fn from(r: &LadderReport<T>) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        LadderRecord {
            z_re: f(r.z_re),
            z_im: f(r.z_im),
            n: r.n,
            m: r.m,
            tau: f(r.tau),
            k: r.k,
            residual_a: f(r.residual_a),
            residual_b: f(r.residual_b),
            residual_c: f(r.residual_c),
            r_of_z: f(r.r_of_z),
            d_n: f(r.d_n),
            eps_m: f(r.epsilon_m),
        }
    }
}

/// Nonzero singular values of the border maps G_+ and G_−ᴴ.
#[derive(Clone, Debug, Serialize)]
pub struct SingularWindow<T> {
    pub k: usize,
    pub s_plus: Vec<T>,
    pub s_minus: Vec<T>,
    pub min_s: T,
    pub max_s: T,
}

/// Observed singular-value window of the border blocks; the lower end is a
/// calibration observation, the upper end is what the margin bound 2/α
/// caps.
pub fn singular_value_window<T: Real>(second: &SecondGrushin<T>) -> SingularWindow<T> {
    if second.k == 0 {
        return SingularWindow { k: 0, s_plus: vec![], s_minus: vec![], min_s: T::infinity(), max_s: T::zero() };
    }
    let sp = svd(&second.g_plus).map(|d| d.s).unwrap_or_default();
    let sm = svd(&second.g_minus.adjoint()).map(|d| d.s).unwrap_or_default();
    let mut min_s = T::infinity();
    let mut max_s = T::zero();
    for &s in sp.iter().chain(sm.iter()) {
        min_s = min_s.min(s);
        max_s = max_s.max(s);
    }
    SingularWindow { k: second.k, s_plus: sp, s_minus: sm, min_s, max_s }
}

/// Deterministic z-grid with curve margin: scans an offset rectangular grid
/// over the padded curve bounding box, keeps points with
/// `distance ≥ margin`, optionally restricted to winding number 0 (where
/// determinants stay floating-point representable), and returns the first
/// `count` of them in scan order.
pub fn margin_grid<T: Real>(
    symbol: &Symbol<T>,
    margin: T,
    count: usize,
    exterior_only: bool,
) -> Vec<Cplx<T>> {
    let samples = symbol.curve_samples(2048);
    let (min_re, max_re, min_im, max_im) = samples.bounding_box();
    let pad = margin * T::of(1.5) + T::of(0.25);
    let (lo_re, hi_re) = (min_re - pad, max_re + pad);
    let (lo_im, hi_im) = (min_im - pad, max_im + pad);
    let steps = 40usize;
    let mut out = Vec::with_capacity(count);
    'scan: for gi in 0..steps {
        for gj in 0..steps {
            // irrational-ish offsets keep the grid off symmetry axes
            let fx = (T::of(gi as f64) + T::of(0.3183)) / T::of(steps as f64);
            let fy = (T::of(gj as f64) + T::of(0.5772)) / T::of(steps as f64);
            let z = Cplx::new(lo_re + fx * (hi_re - lo_re), lo_im + fy * (hi_im - lo_im));
            if symbol.refined_distance(&samples, z) < margin {
                continue;
            }
            if exterior_only {
                match symbol.winding_number(z, 1024) {
                    Ok(0) => {}
                    _ => continue,
                }
            }
            out.push(z);
            if out.len() >= count {
                break 'scan;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;
    use crate::matrix::sample_gaussian;
    use crate::{cplx, C64};

    #[test]
    fn partition_covers_everything() {
        let p = IndexPartition::new(5, 3);
        assert_eq!(p.full_dim(), 8);
        let all: Vec<usize> = p.i_n().chain(p.j()).collect();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn diagonal_symbol_has_no_cross_blocks() {
        let c = C64::new(2.0, 1.0);
        let z = C64::new(0.5, -0.25);
        let s = Symbol::<f64>::from_band(&[(0, c)]).unwrap();
        let g = assemble_first_grushin(&s, 4, 2, z);
        assert_eq!(g.r_minus.max_abs(), 0.0);
        assert_eq!(g.r_plus.max_abs(), 0.0);
        let want = DenseMatrix::identity(2).scaled(c - z);
        assert!(g.r_plusminus.sub(&want).max_abs() == 0.0);
        // full inverse is diagonal
        let inv = invert_first_grushin(&g).unwrap();
        let want_e = DenseMatrix::identity(4).scaled((c - z).inv());
        assert!(inv.e.sub(&want_e).max_abs() < 1e-14);
        let want_em = DenseMatrix::identity(2).scaled((c - z).inv());
        assert!(inv.e_minusplus.sub(&want_em).max_abs() < 1e-14);
        assert_eq!(inv.e_plus.max_abs(), 0.0);
    }

    #[test]
    fn jordan_wrap_position() {
        // 6×6 cyclic shift: the only entry of R_− sits where the wrap
        // diagonal j−k ≡ 1 (mod 6) crosses the I_N×J corner: (0, 5).
        let s = Symbol::<f64>::jordan();
        let g = assemble_first_grushin(&s, 4, 2, C64::new(0.0, 0.0));
        for i in 0..4 {
            for j in 0..2 {
                let want = if (i, j) == (0, 1) { 1.0 } else { 0.0 };
                assert_eq!(g.r_minus.get(i, j), C64::new(want, 0.0), "({i},{j})");
            }
        }
    }

    #[test]
    fn d_n_matches_direct_minimum() {
        let s = Symbol::<f64>::exp1();
        let z = C64::new(20.0, 0.0);
        let g = assemble_first_grushin(&s, 32, 8, z);
        let want = circulant_spectrum(&s, 32, 8)
            .into_iter()
            .map(|l| (l - z).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(g.d_n > 0.0);
        assert_eq!(g.d_n, want);
    }

    #[test]
    fn jordan_inverse_norm_bound() {
        // d_N = dist(2, 10th roots of unity) = 1 and ε(2) = 0 for the banded
        // shift, so every inverse block norm is ≤ 1.
        let s = Symbol::<f64>::jordan();
        let g = assemble_first_grushin(&s, 8, 2, C64::new(2.0, 0.0));
        assert!((g.d_n - 1.0).abs() < 1e-12);
        assert_eq!(g.epsilon_m, 0.0);
        let inv = invert_first_grushin(&g).unwrap();
        assert!(inv.norm_report.bound_applicable);
        assert!(!inv.norm_report.bound_violated);
        for nrm in inv.norm_report.block_norms {
            assert!(nrm <= 1.0 + 1e-8, "{nrm}");
        }
    }

    #[test]
    fn first_grushin_inverse_residual() {
        let s = Symbol::<f64>::exp1();
        // z at comfortable distance from the curve
        let z = C64::new(25.0, 3.0);
        assert!(s.curve_distance(z, 1024) >= 1.0);
        let g = assemble_first_grushin(&s, 32, 8, z);
        let inv = invert_first_grushin(&g).unwrap();
        let res = g.assemble().mul(&inv.assemble()).identity_residual();
        assert!(res <= 1e-9, "residual {res}");
    }

    #[test]
    fn second_grushin_edge_thresholds() {
        let s = Symbol::<f64>::jordan();
        let g = assemble_first_grushin(&s, 8, 2, C64::new(2.0, 0.0));
        let inv = invert_first_grushin(&g).unwrap();
        let ts = {
            let mut v = singular_values(&inv.e_minusplus).unwrap();
            v.reverse();
            v
        };
        // τ above every singular value: full border, F = 0
        let hi = build_second_grushin(&g, &inv, ts[1] * 2.0).unwrap();
        assert_eq!(hi.k, 2);
        assert_eq!(hi.f.max_abs(), 0.0);
        assert_eq!(hi.t_matrix.rows(), 10);
        // G_{−+} = −F_{−+} is the diagonal of all singular values
        for j in 0..2 {
            assert!((hi.g_minusplus.get(j, j).re - ts[j]).abs() < 1e-12);
        }
        // τ below every singular value: empty border, 𝒯 = P−z
        let lo = build_second_grushin(&g, &inv, ts[0] * 0.5).unwrap();
        assert_eq!(lo.k, 0);
        assert_eq!(lo.t_matrix.rows(), 8);
        assert!(lo.t_matrix.sub(&g.p_block).max_abs() == 0.0);
        assert_eq!(lo.g_minusplus.rows(), 0);
    }

    #[test]
    fn second_grushin_svd_oracle() {
        let s = Symbol::<f64>::jordan();
        let g = assemble_first_grushin(&s, 8, 2, C64::new(0.5, 0.0));
        let inv = invert_first_grushin(&g).unwrap();
        let second = build_second_grushin(&g, &inv, 0.1).unwrap();
        let mut oracle = singular_values(&inv.e_minusplus).unwrap();
        oracle.reverse();
        assert_eq!(second.t.len(), 2);
        for (a, b) in second.t.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        let want_k = oracle.iter().filter(|&&t| t <= 0.1).count();
        assert_eq!(second.k, want_k);
        assert!(second.k >= 1, "z inside the loop should produce a small singular value");
        // intertwining on all columns
        for j in 0..2 {
            let e_j = second.e_vecs.block(0, 2, j, j + 1);
            let f_j = second.f_vecs.block(0, 2, j, j + 1);
            let lhs = inv.e_minusplus.mul(&e_j);
            let rhs = f_j.scaled(C64::new(second.t[j], 0.0));
            assert!(lhs.sub(&rhs).hs_norm() <= 1e-10);
            let lhs2 = inv.e_minusplus.adjoint().mul(&f_j);
            let rhs2 = e_j.scaled(C64::new(second.t[j], 0.0));
            assert!(lhs2.sub(&rhs2).hs_norm() <= 1e-10);
        }
    }

    #[test]
    fn threshold_straddle_rejected() {
        let s = Symbol::<f64>::jordan();
        let g = assemble_first_grushin(&s, 8, 2, C64::new(0.5, 0.0));
        let inv = invert_first_grushin(&g).unwrap();
        let ts = singular_values(&inv.e_minusplus).unwrap();
        let err = build_second_grushin(&g, &inv, ts[0] * (1.0 + 1e-10)).unwrap_err();
        assert!(matches!(err, Error::ThresholdDegenerate { .. }));
    }

    #[test]
    fn composition_residuals() {
        // k = 0 case: reduces to the plain inverse of P−z
        let s = Symbol::<f64>::jordan();
        let g = assemble_first_grushin(&s, 8, 2, C64::new(2.0, 0.0));
        let inv = invert_first_grushin(&g).unwrap();
        let lo = build_second_grushin(&g, &inv, 1e-6).unwrap();
        assert_eq!(lo.k, 0);
        let rep = verify_composition(&inv, &lo);
        assert!(rep.tg_residual <= 1e-10 && rep.gt_residual <= 1e-10);

        // interior point with a genuine border
        let g = assemble_first_grushin(&s, 8, 2, C64::new(0.5, 0.0));
        let inv = invert_first_grushin(&g).unwrap();
        let second = build_second_grushin(&g, &inv, 0.1).unwrap();
        let rep = verify_composition(&inv, &second);
        let cap = 1e-8 * (1.0 + rep.t_norm_hs * rep.g_norm_hs);
        assert!(rep.tg_residual <= cap, "{} > {cap}", rep.tg_residual);
        assert!(rep.gt_residual <= cap);
        assert!(rep.block_formula_residual <= 1e-12);
        assert!(rep.direct_inverse_residual <= 1e-8);

        // heavier symbol off-curve with the default threshold
        let s = Symbol::<f64>::exp1();
        let z = C64::new(25.0, 3.0);
        let g = assemble_first_grushin(&s, 32, 4, z);
        let inv = invert_first_grushin(&g).unwrap();
        let second = build_second_grushin(&g, &inv, default_tau(&g)).unwrap();
        let rep = verify_composition(&inv, &second);
        let cap = 1e-7 * (1.0 + rep.t_norm_hs * rep.g_norm_hs);
        assert!(rep.tg_residual <= cap && rep.gt_residual <= cap);
    }

    #[test]
    fn perturbed_blocks_examples() {
        let s = Symbol::<f64>::jordan();
        let g = assemble_first_grushin(&s, 8, 2, C64::new(0.5, 0.0));
        let inv = invert_first_grushin(&g).unwrap();
        let second = build_second_grushin(&g, &inv, 0.1).unwrap();
        assert!(second.k >= 1);
        let q = sample_gaussian::<f64>(8, 31).q;
        // δ = 0 leaves the corner unchanged
        let p0 = perturbed_blocks(&second, &q, 0.0).unwrap();
        assert!(p0.g_minusplus_delta.sub(&second.g_minusplus).max_abs() == 0.0);
        // δ = 1e−4 must match the direct Schur corner
        let p = perturbed_blocks(&second, &q, 1e-4).unwrap();
        assert!(p.validation_residual <= 1e-8, "{}", p.validation_residual);
        // k = 0 gives an empty corner
        let far = assemble_first_grushin(&s, 8, 2, C64::new(2.0, 0.0));
        let far_inv = invert_first_grushin(&far).unwrap();
        let far_second = build_second_grushin(&far, &far_inv, 1e-6).unwrap();
        let pe = perturbed_blocks(&far_second, &q, 1e-4).unwrap();
        assert_eq!(pe.g_minusplus_delta.rows(), 0);
        // huge δ violates the Neumann condition
        let err = perturbed_blocks(&second, &q, 10.0).unwrap_err();
        assert!(matches!(err, Error::NeumannViolation { .. }));
    }

    #[test]
    fn ladder_diagonal_symbol() {
        let c = C64::new(2.0, 1.0);
        let z = C64::new(0.5, 0.0);
        let s = Symbol::<f64>::from_band(&[(0, c)]).unwrap();
        let q = sample_gaussian::<f64>(4, 5).q;
        let rep = determinant_ladder(&s, 4, 2, z, 0.0, &q, None).unwrap();
        assert!(rep.residual_a <= 1e-10);
        assert!(rep.residual_b <= 1e-10);
        assert!(rep.residual_c <= 1e-10);
        // diagonal determinants in closed form: |det(P−z)| = |c−z|^N,
        // circulant = |c−z|^Ñ, and G_{−+} = diag over k singular values
        // all equal to 1/|c−z|
        let r_expected = 4.0 * (c - z).norm().ln() - 6.0 * (c - z).norm().ln()
            - rep.k as f64 * (c - z).norm().recip().ln();
        assert!((rep.r_of_z - r_expected).abs() < 1e-10);
    }

    #[test]
    fn ladder_jordan_outside_scaling() {
        let s = Symbol::<f64>::jordan();
        let q = sample_gaussian::<f64>(32, 3).q;
        for n in [8usize, 16, 32] {
            let qn = q.block(0, n, 0, n);
            let rep = determinant_ladder(&s, n, 2, C64::new(1.5, 0.0), 0.0, &qn, None).unwrap();
            assert!(rep.residual_a <= 1e-8 * n as f64, "N={n}: {}", rep.residual_a);
            // triangular matrix: ln|det(P−z)| = N ln|z|
            assert!((rep.logdet_p - n as f64 * 1.5f64.ln()).abs() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn ladder_r_of_z_bounded_in_n() {
        let s = Symbol::<f64>::exp1_2();
        let z = C64::new(9.0, 3.0);
        assert!(s.curve_distance(z, 1024) >= 0.5);
        let mut rs = Vec::new();
        for n in [16usize, 32, 64] {
            let q = sample_gaussian::<f64>(n, 1000 + n as u64).q;
            let rep = determinant_ladder(&s, n, 4, z, 1e-8, &q, None).unwrap();
            assert!(rep.residual_c <= 1e-8 * n as f64, "N={n}: {}", rep.residual_c);
            rs.push(rep.r_of_z.abs());
        }
        let cap = 2.0 * rs[0] + 5.0;
        assert!(rs.iter().all(|&r| r <= cap), "{rs:?} exceeds {cap}");
    }

    #[test]
    fn singular_window_examples() {
        let s = Symbol::<f64>::jordan();
        // empty border
        let far = assemble_first_grushin(&s, 8, 2, C64::new(2.0, 0.0));
        let far_inv = invert_first_grushin(&far).unwrap();
        let empty = singular_value_window(&build_second_grushin(&far, &far_inv, 1e-6).unwrap());
        assert_eq!(empty.k, 0);
        assert!(empty.s_plus.is_empty() && empty.s_minus.is_empty());
        // genuine border: counts match and both windows stay below 2/α
        let g = assemble_first_grushin(&s, 8, 2, C64::new(0.5, 0.0));
        let inv = invert_first_grushin(&g).unwrap();
        let second = build_second_grushin(&g, &inv, 0.1).unwrap();
        let win = singular_value_window(&second);
        assert_eq!(win.k, second.k);
        assert_eq!(win.s_plus.len(), second.k);
        assert_eq!(win.s_minus.len(), second.k);
        let alpha = 0.5; // z = 0.5 has margin 0.5 from the unit circle
        assert!(win.max_s <= 2.0 / alpha + 1e-9, "{}", win.max_s);
    }

    #[test]
    fn margin_grid_respects_filters() {
        let s = Symbol::<f64>::bidiag();
        let zs = margin_grid(&s, 0.5, 12, true);
        assert!(zs.len() >= 8, "found only {}", zs.len());
        for z in &zs {
            assert!(s.curve_distance(*z, 512) >= 0.5);
            assert_eq!(s.winding_number(*z, 512).unwrap(), 0);
        }
        // determinism
        let again = margin_grid(&s, 0.5, 12, true);
        assert_eq!(zs.len(), again.len());
        for (a, b) in zs.iter().zip(&again) {
            assert!((a - b).norm() == 0.0);
        }
    }

    #[test]
    fn generic_scalar_ladder_runs_in_f32() {
        let s = Symbol::<f32>::jordan();
        let q = sample_gaussian::<f32>(8, 9).q;
        let rep = determinant_ladder(&s, 8, 2, cplx::<f32>(1.5, 0.0), 0.0, &q, None).unwrap();
        assert!(rep.residual_a <= 1e-3 * 8.0);
    }
}
