use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qdisk::balanced::{apply_q_balanced, cauchy_schwarz_split, residual_inverse_balanced};
use qdisk::classical::{classical_norm_estimate, LogGrid};
use qdisk::modes::{
    apply_a, apply_q, kernel_r, residual_inverse, ModeOperatorSpec, ModeVector, Variant,
};
use qdisk::numerics::{
    assemble_matrix, bound_report, check_sum_integral, operator_norm, parametrix_operator,
    TailExponent, TruncationWindow, NORM_TOLERANCE,
};
use qdisk::weights::{FamilyKind, WeightSequence};

fn family() -> impl Strategy<Value = WeightSequence> {
    family_with_tau(0.5..3.0)
}

/// Applying `A` to a rounded vector amplifies rounding by about
/// `sqrt(max a / min a)` over the window, which grows like `e^(12/tau)` on
/// `[-12, 12]`; below `tau = 1` the inverse residuals leave the `1e-12` band.
fn moderate_family() -> impl Strategy<Value = WeightSequence> {
    family_with_tau(1.0..3.0)
}

fn family_with_tau(tau: std::ops::Range<f64>) -> impl Strategy<Value = WeightSequence> {
    (
        prop_oneof![
            Just(FamilyKind::Logistic),
            Just(FamilyKind::Arctan),
            Just(FamilyKind::PiecewiseExponential)
        ],
        0.5..3.0_f64,
        tau,
    )
        .prop_map(|(kind, w_plus, tau)| WeightSequence::closed_form(kind, w_plus, tau).unwrap())
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0_f64, -1.0..1.0_f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn mode_vector() -> impl Strategy<Value = ModeVector> {
    prop::collection::vec((-8_i64..=8, complex()), 1..8).prop_map(ModeVector::from_entries)
}

fn nonzero_mode() -> impl Strategy<Value = i64> {
    prop_oneof![-12_i64..=-1, 1_i64..=12]
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Unbalanced), Just(Variant::Balanced)]
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-12 * scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_increasing_with_positive_coefficients(ws in family(), k in -200_i64..200) {
        prop_assert!(ws.w(k).unwrap() <= ws.w(k + 1).unwrap());
        prop_assert!(ws.ln_c(1, k).unwrap() > 0.0);
        // S(k) may underflow far left for steep families; its logarithm may not.
        prop_assert!(ws.ln_s(k).unwrap().is_finite());
        prop_assert!(ws.s(k).unwrap() >= 0.0);
        prop_assert!(ws.a(k).unwrap() > 0.0);
    }

    #[test]
    fn ratio_reciprocity(ws in family(), n in -12_i64..=12, k in -200_i64..=200) {
        let prod = ws.c(n, k).unwrap() * ws.c(-n, k + n).unwrap();
        prop_assert!((prod - 1.0).abs() < 1e-13, "product {prod}");
    }

    #[test]
    fn s_telescopes(ws in family(), j in -60_i64..60, len in 1_i64..80) {
        let m = j + len;
        let sum: f64 = (j + 1..=m).map(|k| ws.s(k).unwrap()).sum();
        // Right of zero both squares round towards w+^2, so compare deficits.
        let exact = if j >= 0 {
            ws.deficit_sq(j).unwrap() - ws.deficit_sq(m).unwrap()
        } else {
            let (wm, wj) = (ws.w(m).unwrap(), ws.w(j).unwrap());
            wm * wm - wj * wj
        };
        prop_assert!((sum - exact).abs() <= 1e-12 * exact, "{sum} vs {exact}");
    }

    #[test]
    fn trace_tail_bound_decreases(ws in family(), k in 1_u32..150) {
        let a = ws.trace_s_partial(k).unwrap();
        let b = ws.trace_s_partial(k + 1).unwrap();
        prop_assert!(b.tail_bound <= a.tail_bound);
        prop_assert!(a.brackets(ws.w_plus(), 8.0));
    }

    #[test]
    fn log_products_match_direct_products(ws in family(), n in 1_i64..=12, k in -40_i64..40, len in 1_i64..30) {
        let direct: f64 = (k..k + len).map(|j| ws.c(n, j).unwrap()).product();
        let logged: f64 = (k..k + len).map(|j| ws.ln_c(n, j).unwrap()).sum::<f64>().exp();
        prop_assert!((direct - logged).abs() <= 1e-10 * direct);
    }

    #[test]
    fn operators_are_linear(
        ws in family(),
        n in -12_i64..=12,
        f in mode_vector(),
        g in mode_vector(),
        alpha in complex(),
        beta in complex(),
    ) {
        let combo = f.scaled(alpha).add(&g.scaled(beta));
        let af = apply_a(&ws, n, &f).unwrap();
        let ag = apply_a(&ws, n, &g).unwrap();
        let lhs = apply_a(&ws, n, &combo).unwrap();
        let scale = lhs.iter().map(|(_, z)| z.norm()).fold(1.0, f64::max);
        for (k, z) in lhs.iter() {
            prop_assert!(close(z, alpha * af.get(k) + beta * ag.get(k), scale));
        }

        let window = TruncationWindow::symmetric(12).unwrap();
        let qf = apply_q(&ws, n, &f, window).unwrap();
        let qg = apply_q(&ws, n, &g, window).unwrap();
        let lhs = apply_q(&ws, n, &combo, window).unwrap();
        let scale = lhs.values().iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (k, z) in lhs.iter() {
            prop_assert!(close(z, alpha * qf.get(k).unwrap() + beta * qg.get(k).unwrap(), scale));
        }
    }

    #[test]
    fn index_shift_shifts_outputs(ws in family(), n in -12_i64..=12, g in mode_vector()) {
        let moved = ws.shifted(1);
        let g_moved = ModeVector::from_entries(g.iter().map(|(k, z)| (k - 1, z)));
        let a = apply_a(&ws, n, &g).unwrap();
        let a_moved = apply_a(&moved, n, &g_moved).unwrap();
        for (k, z) in a.iter() {
            prop_assert_eq!(a_moved.get(k - 1), z);
        }
        let window = TruncationWindow::symmetric(12).unwrap();
        let window_moved = TruncationWindow::new(-13, 11).unwrap();
        let q = apply_q_balanced(&ws, n, &g, window).unwrap();
        let q_moved = apply_q_balanced(&moved, n, &g_moved, window_moved).unwrap();
        for (k, z) in q.iter() {
            prop_assert_eq!(q_moved.get(k - 1).unwrap(), z);
        }
        for k in -5..=5 {
            prop_assert_eq!(kernel_r(&moved, n, k - 1).unwrap(), kernel_r(&ws, n, k).unwrap());
        }
    }

    #[test]
    fn inverse_identities(ws in moderate_family(), n in -12_i64..=12, g in mode_vector()) {
        let window = TruncationWindow::symmetric(12).unwrap();
        let r = residual_inverse(&ws, n, &g, window).unwrap();
        prop_assert!(r.worst_relative() < 1e-12, "{r:?}");
        let r = residual_inverse_balanced(&ws, n, &g, window).unwrap();
        prop_assert!(r.worst_relative() < 1e-12, "{r:?}");
    }

    #[test]
    fn cauchy_schwarz_dominates_sigma1(ws in family(), n in nonzero_mode(), k in -50_i64..=50) {
        let split = cauchy_schwarz_split(&ws, n, k, TruncationWindow::symmetric(60).unwrap()).unwrap();
        prop_assert!(split.holds(), "{split:?}");
    }

    #[test]
    fn sum_integral_inequalities(ws in family(), lo in -300_i64..0, hi in 1_i64..300) {
        let window = TruncationWindow::new(lo, hi).unwrap();
        for exponent in [TailExponent::MinusHalf, TailExponent::MinusThreeHalves] {
            let check = check_sum_integral(&ws, exponent, window).unwrap();
            prop_assert!(check.passed(), "{check:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_grow_with_the_window(ws in family(), n in nonzero_mode(), v in variant(), half in 8_i64..60, extra in 1_i64..40) {
        let inner = TruncationWindow::symmetric(half).unwrap();
        let outer = TruncationWindow::new(-half - extra, half + extra / 2).unwrap();
        let a = operator_norm(&parametrix_operator(&ws, n, v, inner).unwrap(), NORM_TOLERANCE).unwrap();
        let b = operator_norm(&parametrix_operator(&ws, n, v, outer).unwrap(), NORM_TOLERANCE).unwrap();
        prop_assert!(a.converged && b.converged);
        prop_assert!(a.value <= b.value * (1.0 + 1e-12), "{} > {}", a.value, b.value);
    }

    #[test]
    fn dominance_chain(ws in family(), n in nonzero_mode(), v in variant(), lo in -200_i64..-10, hi in 10_i64..200) {
        let r = bound_report(&ws, n, v, TruncationWindow::new(lo, hi).unwrap()).unwrap();
        prop_assert!(r.norm_estimate <= r.schur_young_bound + 1e-9, "{r:?}");
        if let Some(p) = r.paper_bound {
            prop_assert!(r.norm_estimate <= p + 1e-9, "{r:?}");
        }
        prop_assert!(r.pass);
    }

    #[test]
    fn iterative_norm_matches_svd(ws in family(), n in nonzero_mode(), v in variant(), lo in -100_i64..-2, width in 8_usize..=200) {
        let window = TruncationWindow::new(lo, lo + width as i64 - 1).unwrap();
        let est = operator_norm(&parametrix_operator(&ws, n, v, window).unwrap(), NORM_TOLERANCE).unwrap();
        let dense = assemble_matrix(&ws, ModeOperatorSpec::parametrix(n, v), window).unwrap();
        let svd = DMatrix::from_row_slice(width, width, dense.data()).singular_values().max();
        prop_assert!(est.value <= svd * (1.0 + 1e-12));
        prop_assert!((est.value - svd).abs() <= 1e-9 * svd, "{} vs {svd}", est.value);
    }

    #[test]
    fn classical_norms_grow_with_horizon(n in prop_oneof![-6_i64..=-1, 1_i64..=6], m in 100_usize..400, t in 4.0..12.0_f64) {
        let base = classical_norm_estimate(n, &LogGrid::new(t, m).unwrap()).unwrap().value;
        // Same spacing on a longer horizon.
        let longer = classical_norm_estimate(n, &LogGrid::new(2.0 * t, 2 * m - 1).unwrap()).unwrap().value;
        prop_assert!(base <= longer * (1.0 + 1e-10), "{base} > {longer}");
    }

    /// The trapezoid rule overestimates the norm, so refinement lowers it at
    /// second order.
    #[test]
    fn classical_norms_settle_under_refinement(n in prop_oneof![-6_i64..=-1, 1_i64..=6], m in 100_usize..400, t in 4.0..12.0_f64) {
        let grid = LogGrid::new(t, m).unwrap();
        let norms: Vec<f64> = [grid.clone(), grid.refined(), grid.refined().refined()]
            .iter()
            .map(|g| classical_norm_estimate(n, g).unwrap().value)
            .collect();
        let (d1, d2) = (norms[0] - norms[1], norms[1] - norms[2]);
        prop_assert!(d1 > 0.0 && d2 > 0.0, "{norms:?}");
        prop_assert!((3.5..=4.5).contains(&(d1 / d2)), "{norms:?}");
    }
}
