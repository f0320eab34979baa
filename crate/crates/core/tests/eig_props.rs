mod common;

use arrowhead::dd::exact::rational_from_f64;
use arrowhead::dd::DoubleDouble;
use arrowhead::decomp::{decompose, SolverConfig};
use arrowhead::fixtures;
use arrowhead::gen::{generate, Family};
use arrowhead::matrix::{ArrowheadData, ArrowheadMatrix, OrderedArrowhead, Shift, Side};
use arrowhead::oracle::{
    oracle_eig, oracle_root_vector, oracle_roots, relative_error, residual_report, tolerance_bounds,
    ToleranceModel,
};
use arrowhead::preprocess::reduce;
use arrowhead::refine::{aheig, b_doubled, k_b, PolicyUsed, PrecisionPolicy, RefineConfig};
use arrowhead::solver::{bisect_extreme, pick_eval, unnormalized_vector};
use common::*;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

fn standard() -> RefineConfig {
    RefineConfig { policy: PrecisionPolicy::ForceStandard, ..Default::default() }
}

fn interlaces(a: &OrderedArrowhead, lambdas: &[DoubleDouble]) -> bool {
    lambdas.iter().enumerate().all(|(k, &l)| {
        let above = k == a.poles() || l > a.pole_dd(k);
        let below = k == 0 || l < a.pole_dd(k - 1);
        above && below
    })
}

/// Entries drawn from a small pool so duplicates and zero couplings occur often.
fn degenerate() -> impl Strategy<Value = ArrowheadMatrix> {
    (1usize..8)
        .prop_flat_map(|m| {
            (
                prop::collection::vec(prop::sample::select(vec![-3.0, -1.0, 0.5, 2.0, 7.0]), m),
                prop::collection::vec(prop::sample::select(vec![0.0, 0.0, 1.0, -2.0, 0.3]), m),
                -5.0..5.0f64,
            )
        })
        .prop_map(|(d, z, a)| ArrowheadMatrix::new(d, z, a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn degenerate_inputs_decompose_accurately(m in degenerate()) {
        let n = m.dim();
        let d = decompose(&m, &SolverConfig::default()).unwrap();
        let vs = d.vectors.unwrap();
        let norm_a = max_column_norm(&m.to_dense());
        for (l, v) in d.values.iter().zip(&vs) {
            prop_assert!(residual(|x| m.apply(x), *l, v) <= 50.0 * n as f64 * EPS * norm_a);
        }
        prop_assert!(orthogonality(&vs) <= 50.0 * n as f64 * EPS);
        for w in d.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn reduce_is_idempotent(m in degenerate()) {
        let r = reduce(&m, 0.0, 0.0).unwrap();
        if let Some(a) = r.reduced {
            let again = reduce(&a.to_matrix(), 0.0, 0.0).unwrap();
            prop_assert!(again.record.is_identity());
            prop_assert!(again.record.deflations.is_empty());
            prop_assert_eq!(again.reduced.unwrap(), a);
        }
    }

    #[test]
    fn eigenvalues_interlace_poles(a in ordered(7, 10.0)) {
        let cfg = RefineConfig::default();
        let l: Vec<DoubleDouble> = (0..a.dim()).map(|k| aheig(&a, k, &cfg).unwrap().0.lambda_dd()).collect();
        prop_assert!(interlaces(&a, &l));
    }

    #[test]
    fn pick_function_decreases_between_poles(a in ordered(6, 3.0), fr in prop::collection::vec(0.01f64..0.99, 2..6)) {
        let mut fr = fr;
        fr.sort_by(f64::total_cmp);
        for k in 1..a.poles() {
            let (lo, hi) = (a.pole(k), a.pole(k - 1));
            let xs: Vec<f64> = fr.iter().map(|t| lo + t * (hi - lo)).collect();
            for w in xs.windows(2) {
                if w[0] < w[1] {
                    prop_assert!(pick_eval(&a, w[0]).unwrap() > pick_eval(&a, w[1]).unwrap());
                }
            }
        }
    }

    #[test]
    fn bisection_starts_from_a_bracket(a in ordered(7, 10.0)) {
        let (d, z, alpha) = (a.d(), a.z(), a.alpha());
        let z1: f64 = z.iter().map(|x| x.abs()).sum();
        let left = d.iter().zip(z).map(|(x, y)| x - y.abs()).fold(alpha - z1, f64::min);
        let right = d.iter().zip(z).map(|(x, y)| x + y.abs()).fold(alpha + z1, f64::max);
        // the endpoints are rounded, so the sign is taken one ulp further out
        let out = |x: f64, dir: f64| x + dir * (x.abs() * EPS + f64::MIN_POSITIVE);
        prop_assert!(pick_eval(&a, out(left, -1.0)).unwrap() > 0.0);
        prop_assert!(pick_eval(&a, out(right, 1.0)).unwrap() < 0.0);
        let l = bisect_extreme(d, z, alpha, Side::Left).unwrap();
        let r = bisect_extreme(d, z, alpha, Side::Right).unwrap();
        prop_assert!(left <= l && l <= d[d.len() - 1]);
        prop_assert!(d[0] <= r && r <= right);
    }

    #[test]
    fn gate_consistency(a in ordered(7, 10.0)) {
        for k in 0..a.dim() {
            let (p, diag) = aheig(&a, k, &RefineConfig::default()).unwrap();
            if diag.policy_used == PolicyUsed::Standard {
                let (q, _) = aheig(&a, k, &standard()).unwrap();
                prop_assert_eq!(p.lambda.to_bits(), q.lambda.to_bits());
                prop_assert_eq!(p.vector, q.vector);
            }
        }
    }

    #[test]
    fn diagnostics_are_sane(a in ordered(7, 10.0)) {
        for k in 0..a.dim() {
            let (p, d) = aheig(&a, k, &RefineConfig::default()).unwrap();
            for x in [d.k_b, d.k_b_effective, d.k_nu, d.k_nu_initial, d.zeta_ratio, d.quotient_near_zero] {
                prop_assert!(x >= 0.0 || x.is_nan());
            }
            prop_assert!(d.k_nu >= 1.0 - 8.0 * EPS);
            // a shift of the other sign means the eigenvalue nearest zero, which may cancel
            let mismatch = p.shift != 0.0 && p.mu != 0.0 && (p.shift < 0.0) != (p.mu < 0.0);
            if d.warning.is_none() && k > 0 && k + 1 < a.dim() && !mismatch {
                prop_assert!(d.quotient_near_zero <= 3.0, "quotient {}", d.quotient_near_zero);
            }
        }
    }

    #[test]
    fn oracle_agreement(a in ordered(7, 10.0)) {
        let n = a.dim();
        let roots = oracle_roots(&a).unwrap();
        for (k, root) in roots.iter().enumerate() {
            let (p, diag) = aheig(&a, k, &RefineConfig::default()).unwrap();
            let tm = ToleranceModel::for_diagnostics(n, &diag);
            prop_assert!(relative_error(DoubleDouble::from_f64(p.lambda), root.lambda) <= tm.kappa_lambda_bound * EPS);
            let shift = match p.shift_index { Some(i) => Shift::Pole(i), None => Shift::Value(p.shift) };
            let x = unnormalized_vector(&a, shift, p.mu);
            for (xi, oi) in x.iter().zip(oracle_root_vector(&a, root)) {
                prop_assert!(relative_error(DoubleDouble::from_f64(*xi), oi) <= tm.eigvec_component_bound);
            }
            if diag.policy_used != PolicyUsed::Standard && diag.policy_used != PolicyUsed::DoubledB {
                prop_assert!(relative_error(DoubleDouble::from_f64(p.lambda), root.lambda) <= 50.0 * n as f64 * EPS);
            }
        }
    }
}

/// `b` at pole `i` from exact rational arithmetic on the working entries.
fn exact_b(a: &OrderedArrowhead, i: usize) -> BigRational {
    let r = rational_from_f64;
    let di = r(a.pole(i));
    let mut s = -(r(a.tip()) - &di);
    for j in (0..a.poles()).filter(|&j| j != i) {
        let zj = r(a.coupling(j));
        s += &zj * &zj / (r(a.pole(j)) - &di);
    }
    let zi = r(a.coupling(i));
    s / (&zi * &zi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn doubled_b_is_accurate(n in 3usize..9, seed in any::<u64>()) {
        let m = generate(Family::Cancellation, n, seed).unwrap();
        let a = reduce(&m, 0.0, 0.0).unwrap().reduced.unwrap();
        for i in 0..a.poles() {
            let Ok(b) = b_doubled(&a, i) else { continue };
            let exact = exact_b(&a, i);
            let rel = ((arrowhead::dd::exact::rational_from_dd(b) - &exact) / &exact).abs().to_f64().unwrap();
            let bound = (n as f64 + 4.0) * EPS * (k_b(&a, i) * EPS).min(1.0);
            prop_assert!(rel <= bound, "pole {i}: {rel:e} > {bound:e}");
        }
    }

    #[test]
    fn well_conditioned_residuals(n in 2usize..12, seed in any::<u64>()) {
        let m = generate(Family::WellConditioned, n, seed).unwrap();
        let a = reduce(&m, 0.0, 0.0).unwrap().reduced.unwrap();
        let norm_a = max_column_norm(&a.to_matrix().to_dense());
        let dense = a.to_matrix();
        for k in 0..n {
            let (p, _) = aheig(&a, k, &RefineConfig::default()).unwrap();
            let r = residual(|x| dense.apply(x), p.lambda, &p.vector);
            prop_assert!(r <= 50.0 * n as f64 * EPS * (p.lambda.abs() + norm_a));
        }
    }
}

#[test]
fn fixtures_interlace_and_are_orthogonal() {
    for a in [fixtures::example1(), fixtures::example2(), fixtures::example3(), fixtures::exchange()] {
        let n = a.dim();
        let d = decompose(&a.to_matrix(), &SolverConfig::default()).unwrap();
        let l: Vec<DoubleDouble> = d.pairs.iter().map(|p| p.lambda_dd()).collect();
        let r = residual_report(&a, &l, d.vectors.as_ref().unwrap()).unwrap();
        assert!(r.interlacing_ok);
        assert!(r.max_orthogonality_defect <= 50.0 * n as f64 * EPS);
        assert!(interlaces(&a, &l));
        let o = oracle_eig(&a).unwrap();
        assert!(interlaces(&a, &o));
    }
}

#[test]
fn example1_orthogonal_to_machine_precision() {
    let a = fixtures::example1();
    let d = decompose(&a.to_matrix(), &SolverConfig::default()).unwrap();
    assert!(orthogonality(d.vectors.as_ref().unwrap()) <= 10.0 * EPS);
}

#[test]
fn tolerance_bounds_are_monotone() {
    let mut prev = tolerance_bounds(2, 1.0, 0.0);
    for n in 3..40 {
        for kb in [1.0, 10.0, 1e3, 1e8] {
            let t = tolerance_bounds(n, kb, 5.0);
            let lower = tolerance_bounds(n, kb / 2.0, 5.0);
            for (x, y) in [
                (t.kappa_bis_bound, lower.kappa_bis_bound),
                (t.kappa_b_bound, lower.kappa_b_bound),
                (t.kappa_nu_bound, lower.kappa_nu_bound),
                (t.kappa_lambda_bound, lower.kappa_lambda_bound),
            ] {
                assert!(x > 0.0 && x >= y);
            }
        }
        let t = tolerance_bounds(n, 1.0, 0.0);
        assert!(t.kappa_bis_bound > prev.kappa_bis_bound && t.kappa_lambda_bound > prev.kappa_lambda_bound);
        assert!(t.eigvec_component_bound > prev.eigvec_component_bound);
        prev = t;
    }
}
