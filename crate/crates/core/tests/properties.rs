mod common;

use std::sync::Arc;

use memlag::selfadjoint::{check_self_adjoint, CheckOptions, Condition, Region};
use memlag::{build_system, legendre_residual, parse, validate, ABDecomposition, Circuit, ElementKind, ScalarCurve};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cubic_strategy() -> impl Strategy<Value = ScalarCurve> {
    (0.2f64..3.0, 0.05f64..1.5, -0.95f64..0.95).prop_map(|(c1, c3, t)| {
        let c2 = t * (3.0 * c1 * c3).sqrt();
        ScalarCurve::polynomial(vec![0.0, c1, c2, c3]).unwrap()
    })
}

fn pwl_strategy() -> impl Strategy<Value = ScalarCurve> {
    any::<u64>().prop_map(|seed| common::random_pwl(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn curve_strategy() -> impl Strategy<Value = ScalarCurve> {
    prop_oneof![cubic_strategy(), pwl_strategy()]
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (any::<u64>(), 0usize..1000).prop_map(|(seed, k)| common::random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curves_are_increasing(curve in curve_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(curve.eval(lo).unwrap() < curve.eval(hi).unwrap());
    }

    #[test]
    fn derivative_matches_difference(curve in cubic_strategy(), x in -3.0f64..3.0) {
        let h = 1e-5;
        let fd = (curve.eval(x + h).unwrap() - curve.eval(x - h).unwrap()) / (2.0 * h);
        let d = curve.deriv(x).unwrap();
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0));
        let fa = (curve.antideriv(x + h).unwrap() - curve.antideriv(x - h).unwrap()) / (2.0 * h);
        prop_assert!((fa - curve.eval(x).unwrap()).abs() <= 1e-6 * fa.abs().max(1.0));
    }

    #[test]
    fn inverse_round_trip(curve in curve_strategy(), x in -3.0f64..3.0) {
        let y = curve.eval(x).unwrap();
        let back = curve.inverse(y).unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn legendre_identity(curve in curve_strategy(), x in -3.0f64..3.0) {
        let y = curve.eval(x).unwrap();
        prop_assert!(legendre_residual(&curve, x).unwrap().abs() <= 1e-9 * (1.0 + (x * y).abs()));
    }

    #[test]
    fn linear_curves_degenerate(k in 0.01f64..100.0, x in -10.0f64..10.0) {
        let curve = ScalarCurve::linear(k).unwrap();
        prop_assert!((curve.antideriv(x).unwrap() - 0.5 * k * x * x).abs() <= 1e-12 * (1.0 + k * x * x));
        prop_assert!((curve.co_antideriv(k * x).unwrap() - 0.5 * k * x * x).abs() <= 1e-9 * (1.0 + k * x * x));
    }

    #[test]
    fn curve_literal_round_trip(curve in curve_strategy()) {
        let text = curve.literal();
        let back = memlag::netlist::parse_curve(&text, None).unwrap();
        prop_assert_eq!(back, curve);
    }

    #[test]
    fn netlist_round_trip(circuit in circuit_strategy()) {
        let text = circuit.serialize();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &circuit);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn validation_ignores_element_order(circuit in circuit_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = circuit.clone();
        shuffled.elements.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = validate(&circuit);
        let b = validate(&shuffled);
        prop_assert_eq!(a.errors().count(), b.errors().count());
        prop_assert_eq!(a.has_errors(), b.has_errors());
        let codes = |d: &memlag::Diagnostics| {
            let mut c: Vec<String> = d.entries.iter().map(|e| format!("{}:{}", e.code, e.message)).collect();
            c.sort();
            c
        };
        prop_assert_eq!(codes(&a), codes(&b));
    }

    #[test]
    fn inertia_is_symmetric(circuit in circuit_strategy(), seed in any::<u64>()) {
        let sys = build_system(&circuit).unwrap();
        let (x, v, _) = common::random_point(&mut ChaCha8Rng::seed_from_u64(seed), sys.n());
        let a = sys.inertia(&x, &v, 0.0).unwrap();
        prop_assert_eq!(a.transpose(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Scaling the equations scales every violation by the same factor.
    #[test]
    fn self_adjointness_is_scale_robust(circuit in circuit_strategy(), factor in 0.1f64..10.0) {
        let sys = Arc::new(build_system(&circuit).unwrap());
        let region = Region::default_for(&sys);
        let opts = CheckOptions { samples: 64, ..CheckOptions::default() };
        let ab = sys.extract_ab();
        let base = check_self_adjoint(&ab, &region, &opts).unwrap();
        let scaled = check_self_adjoint(&ab.scaled(factor), &region, &opts).unwrap();
        for (b, s) in base.conditions.iter().zip(&scaled.conditions) {
            let expect = factor * b.max_violation;
            prop_assert!((s.max_violation - expect).abs() <= 1e-6 * expect + 1e-8 * factor);
        }
        let rescaled = check_self_adjoint(&ab.scaled(factor), &region, &CheckOptions { tol: opts.tol * factor, ..opts.clone() }).unwrap();
        prop_assert_eq!(rescaled.verdict, base.verdict);
    }

    /// Without resistive elements every assembled system has a Lagrangian.
    #[test]
    fn conservative_circuits_are_self_adjoint(circuit in circuit_strategy()) {
        let mut circuit = circuit;
        circuit.elements.retain(|e| !matches!(e.kind, ElementKind::Resistor | ElementKind::Memristor));
        circuit.element_lines.truncate(circuit.elements.len());
        let sys = Arc::new(build_system(&circuit).unwrap());
        let opts = CheckOptions { samples: 128, ..CheckOptions::default() };
        let report = check_self_adjoint(&sys.extract_ab(), &Region::default_for(&sys), &opts).unwrap();
        prop_assert!(report.is_self_adjoint(), "{}", report.to_json());
    }
}

/// The finite-difference violation of a non-self-adjoint system converges
/// at second order in the step scale.
#[test]
fn violation_estimate_converges_quadratically() {
    // A = 1 + x⁴ depends on x, so condition (iv) involves ∂A/∂x and the
    // exact violation at (x, v) is |0 − 2·4x³·v| = 8|x³ v|.
    let ab = ABDecomposition::new(
        1,
        |x, _, _| Ok(DMatrix::from_element(1, 1, 1.0 + x[0].powi(4))),
        |x, _, _| Ok(DVector::from_element(1, x[0])),
    );
    let region = Region::cube(1, 0.5, 1.0);
    let error = |s: f64| {
        let opts = CheckOptions { samples: 16, step_scale: s, ..CheckOptions::default() };
        let report = check_self_adjoint(&ab, &region, &opts).unwrap();
        let c = report.condition(Condition::BVSymmetry);
        let (x, v) = (c.worst_point.x[0], c.worst_point.v[0]);
        (c.max_violation - 8.0 * (x.powi(3) * v).abs()).abs()
    };
    let ratio = error(1e-2) / error(5e-3);
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}
