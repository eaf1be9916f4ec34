//! Acceptance criteria, one pass/fail line each.

mod common;

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use memlag::selfadjoint::{check_self_adjoint, CheckOptions, Condition, Region};
use memlag::sim::{self, Drive, Method};
use memlag::{
    build_system, legendre_residual, naive_path_lagrangian, parse, to_first_order, ABDecomposition, Element,
    ElementKind, ElementValue, FnSystem, Incidence, Modulation, Result as MlResult, ScalarCurve, SourceWaveform,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MEMINDUCTOR_LC: &str = include_str!("../../../netlists/meminductor_lc.net");
const TWO_LOOP: &str = include_str!("../../../netlists/two_loop.net");
const LC: &str = include_str!("../../../netlists/lc.net");
const RLC: &str = include_str!("../../../netlists/rlc.net");

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ab_of(text: &str) -> ABDecomposition {
    Arc::new(build_system(&parse(text).unwrap()).unwrap()).extract_ab()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn self_adjointness_verdicts() -> Outcome {
    let opts = CheckOptions::default();
    let unit = Region::cube(1, -1.0, 1.0);
    // L_M(q) = 1 + q², C = 1, written directly in loop charge.
    let q_form = ABDecomposition::new(
        1,
        |x, _, _| Ok(DMatrix::from_element(1, 1, 1.0 + x[0] * x[0])),
        |x, v, _| Ok(DVector::from_element(1, 2.0 * x[0] * v[0] * v[0] + x[0])),
    );
    let cases: [(&str, ABDecomposition, bool, Option<Condition>); 4] = [
        ("series LC", ab_of(LC), true, None),
        ("series RLC", ab_of(RLC), false, Some(Condition::BVSymmetry)),
        ("meminductor in q", q_form, false, Some(Condition::BVSymmetry)),
        ("meminductor in sigma", ab_of(MEMINDUCTOR_LC), true, None),
    ];
    let mut notes = Vec::new();
    for (name, ab, expect, worst) in cases {
        let (report, elapsed) = timed(|| check_self_adjoint(&ab, &unit, &opts));
        let report = report.map_err(|e| format!("{name}: {e}"))?;
        ensure(report.samples == 512 && report.tol == 1e-6, || format!("{name}: wrong sampling"))?;
        ensure(report.is_self_adjoint() == expect, || format!("{name}: verdict {:?}", report.verdict))?;
        if let Some(c) = worst {
            ensure(report.worst_condition() == c, || {
                format!("{name}: worst condition {} instead of {c}", report.worst_condition())
            })?;
        }
        ensure(elapsed < Duration::from_secs(1), || format!("{name}: took {elapsed:?}"))?;
        notes.push(format!("{name} max violation {:.1e} in {:.0?}", report.max_violation(), elapsed));
    }
    Ok(notes.join("; "))
}

fn erroneous_factor() -> Outcome {
    let naive = naive_path_lagrangian(&parse(MEMINDUCTOR_LC).unwrap()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (q, i, di) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lm = 1.0 + q * q;
        let dlm = 2.0 * q;
        let naive_r = naive.el_residual(&[q], &[i], &[di], 0.0).map_err(|e| e.to_string())?[0];
        let correct = lm * di + dlm * i * i + q;
        worst = worst.max((naive_r - correct - (-0.5 * dlm * i * i)).abs());
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e} over 1000 points"))
}

fn sigma_form_equivalence() -> Outcome {
    let (result, elapsed) = timed(|| -> std::result::Result<f64, String> {
        let sys = Arc::new(build_system(&parse(MEMINDUCTOR_LC).unwrap()).map_err(|e| e.to_string())?);
        let fo = to_first_order(sys).map_err(|e| e.to_string())?;
        let (sigma0, q0) = (1.0, 0.3);
        let method = Method::Rk4 { h: 1e-3 };
        let traj = sim::simulate(&fo, &[sigma0], &[q0], (0.0, 10.0), method).map_err(|e| e.to_string())?;

        // L_M(q) İ + L_M'(q) I² + q/C = 0 with q(0) = σ̇(0), I(0) = σ̈(0).
        let direct = FnSystem::new(2, |_, y: &[f64], dy: &mut [f64]| -> MlResult<()> {
            let (q, i) = (y[0], y[1]);
            dy[0] = i;
            dy[1] = -(2.0 * q * i * i + q) / (1.0 + q * q);
            Ok(())
        });
        let i0 = traj.a[0][0];
        let sol = sim::integrate(&direct, &[q0, i0], (0.0, 10.0), method).map_err(|e| e.to_string())?;
        if sol.t != traj.t {
            return Err("grids differ".into());
        }
        let scale = traj.v.iter().fold(0.0f64, |m, v| m.max(v[0].abs()));
        let diff = traj
            .v
            .iter()
            .zip(&sol.y)
            .fold(0.0f64, |m, (v, y)| m.max((v[0] - y[0]).abs()));
        Ok(diff / scale)
    });
    let rel = result?;
    ensure(rel <= 1e-6, || format!("relative deviation {rel:e}"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("relative deviation {rel:.1e} over [0, 10] in {elapsed:.0?}"))
}

fn lc_closed_form() -> Outcome {
    let fo = to_first_order(Arc::new(build_system(&parse(LC).unwrap()).unwrap())).unwrap();
    let run = |h: f64| -> std::result::Result<(f64, f64), String> {
        let traj = sim::simulate(&fo, &[1.0], &[0.0], (0.0, TAU), Method::Rk4 { h }).map_err(|e| e.to_string())?;
        let end = (traj.x.last().unwrap()[0] - 1.0).abs();
        let global = traj
            .t
            .iter()
            .zip(&traj.x)
            .fold(0.0f64, |m, (t, x)| m.max((x[0] - t.cos()).abs()));
        Ok((end, global))
    };
    let (end, _) = run(1e-3)?;
    ensure(end <= 1e-6, || format!("|sigma(2 pi) - 1| = {end:e}"))?;
    let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|h| run(*h).map(|r| r.1))
        .collect::<std::result::Result<_, _>>()?;
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    for r in ratios {
        ensure((8.0..=32.0).contains(&r), || format!("step ratio {r:.2} is not 16 within a factor of 2"))?;
    }
    Ok(format!(
        "|sigma(2 pi) - 1| = {end:.1e}; error ratios {:.2}, {:.2}",
        ratios[0], ratios[1]
    ))
}

fn two_loop_golden() -> Outcome {
    let sys = Arc::new(build_system(&parse(TWO_LOOP).unwrap()).unwrap());
    let ab = sys.extract_ab();
    let phi_rm = |q: f64| q + 0.3333333333 * q.powi(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x, v, _) = common::random_point(&mut rng, 2);
        let x: Vec<f64> = x.iter().map(|c| 2.0 * c).collect();
        let v: Vec<f64> = v.iter().map(|c| 2.0 * c).collect();
        // Loop 1: L σ̈₁ + φ̂_RM(σ̇₁) + φ̂_CM(σ₁ − σ₂) = 0
        // Loop 2: R σ̇₂ − φ̂_CM(σ₁ − σ₂) = 0
        let s = x[0] - x[1];
        let a_hand = [1.0, 0.0, 0.0, 0.0];
        let b_hand = [phi_rm(v[0]) + 2.0 * s, 0.5 * v[1] - 2.0 * s];
        let a = ab.a(&x, &v, 0.0).map_err(|e| e.to_string())?;
        let b = ab.b(&x, &v, 0.0).map_err(|e| e.to_string())?;
        for k in 0..4 {
            worst = worst.max((a[(k / 2, k % 2)] - a_hand[k]).abs());
        }
        for k in 0..2 {
            worst = worst.max((b[k] - b_hand[k]).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("(A, B) deviation {worst:e}"))?;
    let fo = to_first_order(Arc::clone(&sys)).map_err(|e| e.to_string())?;
    let traj = sim::simulate(&fo, &[0.5, 0.0], &[0.0, 0.0], (0.0, 20.0), Method::default()).map_err(|e| e.to_string())?;
    let residual = sim::ikvl_residual(&sys, &traj).map_err(|e| e.to_string())?;
    ensure(residual <= 1e-6, || format!("ikvl residual {residual:e}"))?;
    Ok(format!("(A, B) deviation {worst:.1e}; ikvl residual {residual:.1e} over [0, 20]"))
}

fn legendre_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let curve = if k % 2 == 0 {
            common::random_cubic(&mut rng)
        } else {
            common::random_pwl(&mut rng)
        };
        let (lo, hi) = curve.domain();
        let (lo, hi) = (lo.max(-3.0), hi.min(3.0));
        for _ in 0..100 {
            let x = rng.gen_range(lo..hi);
            let y = curve.eval(x).map_err(|e| e.to_string())?;
            let r = legendre_residual(&curve, x).map_err(|e| e.to_string())?;
            worst = worst.max(r.abs() / (1.0 + (x * y).abs()));
        }
    }
    ensure(worst <= 1e-9, || format!("scaled residual {worst:e}"))?;
    Ok(format!("max scaled residual {worst:.1e} over 50 curves x 100 points"))
}

fn pinched_hysteresis() -> Outcome {
    let sine = SourceWaveform::sine(1.0, 1.0, 0.0).unwrap();
    let cubic = || ScalarCurve::polynomial(vec![0.0, 1.0, 0.0, 1.0 / 3.0]).unwrap();
    let memory = |kind| {
        Element::new(
            "X1",
            kind,
            ElementValue::Curve {
                curve: cubic(),
                modulation: Modulation::Charge,
            },
            vec![Incidence::new(1, 1)],
        )
        .unwrap()
    };
    let cases = [
        (memory(ElementKind::Memristor), Drive::current(sine), true),
        (memory(ElementKind::Meminductor), Drive::current(sine), true),
        (
            Element::new("C1", ElementKind::Capacitor, ElementValue::Linear(1.0), vec![Incidence::new(1, 1)]).unwrap(),
            Drive::voltage(sine),
            false,
        ),
    ];
    let mut notes = Vec::new();
    for (element, drive, expect) in cases {
        let w = sim::drive_element(&element, &drive, (0.0, 4.0 * PI), Method::default()).map_err(|e| e.to_string())?;
        let report = sim::pinch_report(&element, drive.variable, &w, 1e-3).map_err(|e| e.to_string())?;
        let label = element.kind.keyword();
        ensure(report.pinched == expect, || format!("{label}: pinched = {}", report.pinched))?;
        if expect {
            ensure(report.area_positive > 0.0 && report.area_negative > 0.0, || {
                format!("{label}: loop areas {} / {}", report.area_positive, report.area_negative)
            })?;
        }
        notes.push(format!(
            "{label} pinched={} areas {:.3}/{:.3}",
            report.pinched, report.area_positive, report.area_negative
        ));
    }
    Ok(notes.join("; "))
}

fn random_circuit_properties() -> Outcome {
    let (result, elapsed) = timed(|| -> std::result::Result<usize, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut checks = 0;
        for index in 0..200 {
            let circuit = common::random_circuit(&mut rng, index);
            let ctx = |what: &str| format!("circuit {index} ({}): {what}", circuit.formulation.keyword());

            let reparsed = parse(&circuit.serialize()).map_err(|e| ctx(&e.to_string()))?;
            ensure(reparsed == circuit, || ctx("round trip changed the circuit"))?;

            let sys = build_system(&circuit).map_err(|e| ctx(&e.to_string()))?;
            let n = sys.n();
            for _ in 0..5 {
                let (x, v, a) = common::random_point(&mut rng, n);
                let t = rng.gen_range(0.0..3.0);
                let am = sys.inertia(&x, &v, t).map_err(|e| ctx(&e.to_string()))?;
                ensure(am == am.transpose(), || ctx("inertia is not symmetric"))?;

                let r0 = sys.el_residual(&x, &v, &vec![0.0; n], t).map_err(|e| e.to_string())?;
                let r = sys.el_residual(&x, &v, &a, t).map_err(|e| e.to_string())?;
                let ar = &am * DVector::from_column_slice(&a);
                for i in 0..n {
                    let expect = r0[i] + ar[i];
                    ensure((r[i] - expect).abs() <= 1e-10 * (1.0 + expect.abs()), || ctx("residual is not affine"))?;
                }

                let gx = sys.lagrangian_grad_x(&x, &v, t).map_err(|e| e.to_string())?;
                let gv = sys.lagrangian_grad_v(&x, &v, t).map_err(|e| e.to_string())?;
                let gd = sys.action_grad(&v).map_err(|e| e.to_string())?;
                for i in 0..n {
                    let fx = common::central_diff(|p| sys.lagrangian(p, &v, t).unwrap(), &x, i);
                    let fv = common::central_diff(|p| sys.lagrangian(&x, p, t).unwrap(), &v, i);
                    let fd = common::central_diff(|p| sys.action(p).unwrap(), &v, i);
                    for (label, g, f) in [("dL/dx", gx[i], fx), ("dL/dv", gv[i], fv), ("dD/dv", gd[i], fd)] {
                        ensure((g - f).abs() <= 1e-6 * g.abs().max(1.0), || {
                            ctx(&format!("{label}[{i}] analytic {g} vs difference {f}"))
                        })?;
                    }
                    checks += 3;
                }
            }
        }
        Ok(checks)
    });
    let checks = result?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("200 circuits, {checks} gradient checks, {elapsed:.1?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("self-adjointness verdicts", self_adjointness_verdicts),
        ("erroneous factor of the path Lagrangian", erroneous_factor),
        ("sigma form matches the direct equation of motion", sigma_form_equivalence),
        ("LC closed form and rk4 order", lc_closed_form),
        ("two-loop golden (A, B) and ikvl residual", two_loop_golden),
        ("Legendre identity", legendre_identity),
        ("pinched hysteresis", pinched_hysteresis),
        ("random circuit properties", random_circuit_properties),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
