//! Property tests for the first and second Grushin constructions: inverse
//! identities, norm bounds, SVD intertwining, determinant bookkeeping, and
//! perturbation consistency — exercised over preset symbols and grids of
//! exterior evaluation points.

use proptest::prelude::*;
use tnlab::grushin::{
    assemble_first_grushin, build_second_grushin, default_tau, invert_first_grushin, margin_grid,
    perturbed_blocks,
};
use tnlab::linalg::{self, DenseMatrix};
use tnlab::matrix::sample_gaussian;
use tnlab::symbol::Symbol;
use tnlab::{Symbol64, C64};

fn preset_strategy() -> impl Strategy<Value = Symbol64> {
    prop_oneof![
        Just("jordan"),
        Just("bidiag"),
        Just("exp1"),
        Just("exp1_2"),
    ]
    .prop_map(|name| Symbol::preset(name).expect("preset"))
}

/// Picks an exterior evaluation point at margin ≥ 0.5 from the symbol's
/// deterministic grid.
fn pick_z(sym: &Symbol64, idx: usize) -> C64 {
    let grid = margin_grid(sym, 0.5, 64, true);
    assert!(!grid.is_empty(), "margin grid must not be empty");
    grid[idx % grid.len()]
}

fn column(a: &DenseMatrix<f64>, j: usize) -> Vec<C64> {
    (0..a.rows()).map(|i| a.get(i, j)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Block-inverse identity: ‖𝒫ℰ − I‖_HS ≤ 1e-9·(1 + ‖ℰ‖_HS), and when
    /// the envelope bound applies, every inverse block obeys
    /// ‖·‖ ≤ (d_N − ε(M))⁻¹ + 1e-8.
    #[test]
    fn first_grushin_inverse_and_norm_bounds(
        sym in preset_strategy(), n in 4usize..=48, m in 1usize..=8, zi in 0usize..64,
    ) {
        let z = pick_z(&sym, zi);
        let first = assemble_first_grushin(&sym, n, m, z);
        let inv = invert_first_grushin(&first).expect("invert");
        let residual = first.assemble().mul(&inv.assemble()).identity_residual();
        let cap = 1e-9 * (1.0 + inv.assemble().hs_norm());
        prop_assert!(residual <= cap, "inverse residual {} > {}", residual, cap);

        let rep = &inv.norm_report;
        prop_assert_eq!(rep.bound_applicable, rep.epsilon_m < rep.d_n);
        if rep.bound_applicable {
            let bound = 1.0 / (rep.d_n - rep.epsilon_m);
            for nrm in rep.block_norms {
                prop_assert!(
                    nrm <= bound + 1e-8,
                    "block norm {} exceeds bound {} (d_N = {}, ε(M) = {})",
                    nrm, bound, rep.d_n, rep.epsilon_m
                );
            }
            prop_assert!(!rep.bound_violated);
        }
    }

    /// Second Grushin: the SVD intertwining ‖E₋₊e_j − t_j f_j‖ ≤ 1e-10, the
    /// F-norm bounds at tolerance 1e-10, and the determinant ratio
    /// |ln|det E₋₊| − ln|det G₋₊| − Σ_{j>k} ln t_j| ≤ 1e-8.
    #[test]
    fn second_grushin_intertwining_norms_and_determinant(
        sym in preset_strategy(), n in 4usize..=40, m in 1usize..=8, zi in 0usize..64,
        tau_scale in 0.25f64..4.0,
    ) {
        let z = pick_z(&sym, zi);
        let first = assemble_first_grushin(&sym, n, m, z);
        let inv = invert_first_grushin(&first).expect("invert");
        let tau = tau_scale * default_tau(&first);
        let second = match build_second_grushin(&first, &inv, tau) {
            Ok(s) => s,
            // a threshold landing on a singular value is rejected by design
            Err(tnlab::Error::ThresholdDegenerate { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };

        for j in 0..m {
            let e_j = column(&second.e_vecs, j);
            let f_j = column(&second.f_vecs, j);
            let lhs = inv.e_minusplus.matvec(&e_j);
            let err: f64 = lhs
                .iter()
                .zip(&f_j)
                .map(|(a, b)| (a - b * second.t[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(err <= 1e-10, "intertwining residual {} at j = {}", err, j);
        }

        prop_assert!(linalg::op_norm(&second.f) <= 1.0 / tau + 1e-10);
        prop_assert!(linalg::op_norm(&second.f_plus) <= 1.0 + 1e-10);
        prop_assert!(linalg::op_norm(&second.f_minus) <= 1.0 + 1e-10);
        prop_assert!(linalg::op_norm(&second.f_minusplus) <= tau + 1e-10);

        let lad_e = linalg::log_abs_det(&inv.e_minusplus);
        let lad_g = if second.k == 0 {
            0.0
        } else {
            linalg::log_abs_det(&second.g_minusplus)
        };
        let above: f64 = second.t[second.k..].iter().map(|t| t.ln()).sum();
        prop_assert!(
            (lad_e - lad_g - above).abs() <= 1e-8,
            "determinant ratio off: {} vs {} + {}", lad_e, lad_g, above
        );
    }

    /// Perturbation consistency: the Neumann-series corner matches the
    /// directly inverted perturbed system to 1e-8 relative HS error.
    #[test]
    fn perturbed_corner_matches_direct_inverse(
        sym in preset_strategy(), n in 4usize..=32, m in 1usize..=6, zi in 0usize..64,
        seed in any::<u64>(), delta_exp in -10.0f64..-3.0,
    ) {
        let z = pick_z(&sym, zi);
        let first = assemble_first_grushin(&sym, n, m, z);
        let inv = invert_first_grushin(&first).expect("invert");
        let second = match build_second_grushin(&first, &inv, default_tau(&first)) {
            Ok(s) => s,
            Err(tnlab::Error::ThresholdDegenerate { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        let q = sample_gaussian::<f64>(n, seed).q;
        let delta = 10f64.powf(delta_exp);
        match perturbed_blocks(&second, &q, delta) {
            Ok(pb) => {
                prop_assert!(pb.neumann_product < 0.5);
                prop_assert!(
                    pb.validation_residual <= 1e-8,
                    "perturbed corner residual {}", pb.validation_residual
                );
            }
            // large δ‖G‖‖Q‖ is legitimately rejected rather than extrapolated
            Err(tnlab::Error::NeumannViolation { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        }
    }
}
