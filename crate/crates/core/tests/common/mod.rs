//! Random circuits and curves shared by the integration tests.
#![allow(dead_code)]

use memlag::{
    Circuit, Element, ElementKind, ElementValue, Formulation, Incidence, Modulation, ScalarCurve, SourceWaveform,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Strictly increasing cubic through the origin: `c1 > 0`, `c3 > 0` and
/// `c2² < 3 c1 c3`.
pub fn random_cubic(rng: &mut impl Rng) -> ScalarCurve {
    let c1 = rng.gen_range(0.2..3.0);
    let c3 = rng.gen_range(0.05..1.5);
    let bound = (3.0f64 * c1 * c3).sqrt();
    let c2 = rng.gen_range(-0.95..0.95) * bound;
    ScalarCurve::polynomial(vec![0.0, c1, c2, c3]).unwrap()
}

/// Strictly increasing piecewise-linear curve through the origin on
/// roughly `[-5, 5]`.
pub fn random_pwl(rng: &mut impl Rng) -> ScalarCurve {
    let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for dir in [1.0, -1.0] {
        let (mut x, mut y) = (0.0f64, 0.0f64);
        for _ in 0..rng.gen_range(1..5) {
            x += dir * rng.gen_range(0.3..2.0);
            y += dir * rng.gen_range(0.1..3.0);
            points.push((x, y));
        }
        x += dir * 5.0;
        y += dir * rng.gen_range(0.5..5.0);
        points.push((x, y));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    ScalarCurve::piecewise_linear(points).unwrap()
}

fn random_membership(rng: &mut impl Rng, n: usize, must: Option<usize>) -> Vec<Incidence> {
    let mut coords: Vec<usize> = (1..=n).collect();
    coords.shuffle(rng);
    let take = if n > 1 && rng.gen_bool(0.4) { 2 } else { 1 };
    let mut chosen: Vec<usize> = coords.into_iter().take(take).collect();
    if let Some(c) = must {
        if !chosen.contains(&c) {
            chosen[0] = c;
        }
    }
    chosen.sort_unstable();
    chosen.dedup();
    chosen
        .into_iter()
        .map(|c| Incidence::new(c, if rng.gen_bool(0.5) { 1 } else { -1 }))
        .collect()
}

fn memory_modulation(kind: ElementKind, form: Formulation) -> Modulation {
    use ElementKind::*;
    match (kind, form) {
        (Memristor, Formulation::Loop) | (Meminductor, Formulation::Loop) => Modulation::Charge,
        (Memcapacitor, Formulation::Loop) => Modulation::IntegratedCharge,
        (Memristor, Formulation::Node) | (Memcapacitor, Formulation::Node) => Modulation::Flux,
        (Meminductor, Formulation::Node) => Modulation::IntegratedFlux,
        _ => unreachable!(),
    }
}

fn random_element(rng: &mut impl Rng, name: String, kind: ElementKind, form: Formulation, membership: Vec<Incidence>) -> Element {
    let value = if kind.is_memory() {
        ElementValue::Curve {
            curve: random_cubic(rng),
            modulation: memory_modulation(kind, form),
        }
    } else if kind.is_source() {
        let amp = rng.gen_range(-2.0..2.0);
        if rng.gen_bool(0.5) {
            ElementValue::Source(SourceWaveform::dc(amp))
        } else {
            ElementValue::Source(SourceWaveform::sine(amp, rng.gen_range(0.2..5.0), rng.gen_range(-3.0..3.0)).unwrap())
        }
    } else {
        ElementValue::Linear(rng.gen_range(0.1..5.0))
    };
    Element::new(name, kind, value, membership).unwrap()
}

/// A valid circuit with one to three coordinates, each carrying an
/// inertial element, plus random extra elements of every admitted kind.
pub fn random_circuit(rng: &mut impl Rng, index: usize) -> Circuit {
    use ElementKind::*;
    let form = if rng.gen_bool(0.5) { Formulation::Loop } else { Formulation::Node };
    let n = rng.gen_range(1..=3);
    let (inertial, source): ([ElementKind; 2], ElementKind) = match form {
        Formulation::Loop => ([Inductor, Meminductor], VoltageSource),
        Formulation::Node => ([Capacitor, Memcapacitor], CurrentSource),
    };
    let extras = [Resistor, Inductor, Capacitor, Memristor, Meminductor, Memcapacitor, source];
    let mut elements = Vec::new();
    for c in 1..=n {
        let kind = *inertial.choose(rng).unwrap();
        let m = random_membership(rng, n, Some(c));
        elements.push(random_element(rng, format!("{}{}", kind.keyword(), elements.len() + 1), kind, form, m));
    }
    for _ in 0..rng.gen_range(1..=5) {
        let kind = *extras.choose(rng).unwrap();
        let m = random_membership(rng, n, None);
        elements.push(random_element(rng, format!("{}{}", kind.keyword(), elements.len() + 1), kind, form, m));
    }
    Circuit::new(format!("random{index}"), form, n, elements).unwrap()
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut draw = || (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    (draw(), draw(), draw())
}

/// Central difference of a scalar function along coordinate `i`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, at: &[f64], i: usize) -> f64 {
    let h = 1e-5 * (1.0 + at[i].abs());
    let mut p = at.to_vec();
    p[i] = at[i] + h;
    let plus = f(&p);
    p[i] = at[i] - h;
    let minus = f(&p);
    (plus - minus) / (2.0 * h)
}
