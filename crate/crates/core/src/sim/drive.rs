//! Single-element hysteresis experiments.

use serde::Serialize;

use crate::constitutive::{Element, ElementKind, ElementValue, Modulation, SourceWaveform};
use crate::error::{Error, Result};
use crate::lagrangian::FnSystem;

use super::integrate::{integrate_on, uniform_grid, Method};
use super::waveforms::{ElementSeries, ElementWaveforms, Quantity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveVariable {
    Current,
    Voltage,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    pub variable: DriveVariable,
    pub waveform: SourceWaveform,
}

impl Drive {
    pub fn current(waveform: SourceWaveform) -> Self {
        Self {
            variable: DriveVariable::Current,
            waveform,
        }
    }

    pub fn voltage(waveform: SourceWaveform) -> Self {
        Self {
            variable: DriveVariable::Voltage,
            waveform,
        }
    }

    /// The drive variable a memory element's modulation calls for; current
    /// for conventional elements.
    pub fn natural_for(element: &Element) -> DriveVariable {
        match element.curve() {
            Some((_, Modulation::Flux | Modulation::IntegratedFlux)) => DriveVariable::Voltage,
            _ => DriveVariable::Current,
        }
    }
}

/// Number of output samples of [`drive_element`].
pub const DRIVE_SAMPLES: usize = 4001;

/// Applies `drive` to a lone element, starting from rest.
///
/// The drive is integrated twice from zero to obtain the charge and
/// integrated charge (current drive) or flux and integrated flux (voltage
/// drive); the element's constitutive relation then gives the remaining
/// quantities. Output is reported at [`DRIVE_SAMPLES`] equally spaced
/// points.
pub fn drive_element(element: &Element, drive: &Drive, t_span: (f64, f64), method: Method) -> Result<ElementWaveforms> {
    check_drive(element, drive)?;
    let w = drive.waveform;
    let sys = FnSystem::new(2, move |t, y: &[f64], dy: &mut [f64]| {
        dy[0] = w.value(t);
        dy[1] = y[0];
        Ok(())
    });
    let t = uniform_grid(t_span.0, t_span.1, DRIVE_SAMPLES);
    let states = integrate_on(&sys, &[0.0, 0.0], &t, method)?;
    let u: Vec<f64> = t.iter().map(|&s| w.value(s)).collect();
    let du: Vec<f64> = t.iter().map(|&s| w.derivative(s)).collect();
    let first: Vec<f64> = states.iter().map(|y| y[0]).collect();
    let second: Vec<f64> = states.iter().map(|y| y[1]).collect();

    let series = match drive.variable {
        DriveVariable::Current => current_driven(element, u, du, first, second)?,
        DriveVariable::Voltage => voltage_driven(element, u, du, first, second)?,
    };
    Ok(ElementWaveforms {
        t,
        elements: vec![series],
    })
}

fn check_drive(element: &Element, drive: &Drive) -> Result<()> {
    if element.kind.is_source() {
        return Err(Error::Unsupported {
            element: element.name.clone(),
            reason: "sources cannot be driven".into(),
        });
    }
    if element.kind.is_memory() && Drive::natural_for(element) != drive.variable {
        let (_, m) = element.curve().expect("memory elements carry a curve");
        return Err(Error::InvalidArgument(format!(
            "element {} is modulated by {m}; drive it with {}",
            element.name,
            match Drive::natural_for(element) {
                DriveVariable::Current => "a current",
                DriveVariable::Voltage => "a voltage",
            }
        )));
    }
    Ok(())
}

fn tag(element: &Element, e: Error, value: f64) -> Error {
    match e {
        Error::OutOfDomain { .. } => Error::ElementDomain {
            element: element.name.clone(),
            value,
        },
        other => other,
    }
}

/// `(f(s), f'(s), f''(s))` along a state series.
fn curve_series(element: &Element, states: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (curve, _) = element.curve().expect("memory elements carry a curve");
    let mut f = Vec::with_capacity(states.len());
    let mut d1 = Vec::with_capacity(states.len());
    let mut d2 = Vec::with_capacity(states.len());
    for &s in states {
        let wrap = |e| tag(element, e, s);
        f.push(curve.eval(s).map_err(wrap)?);
        d1.push(curve.deriv(s).map_err(wrap)?);
        d2.push(curve.deriv2(s).map_err(wrap)?);
    }
    Ok((f, d1, d2))
}

fn series(element: &Element, q: Vec<f64>, i: Vec<f64>, phi: Vec<f64>, v: Vec<f64>) -> ElementSeries {
    ElementSeries {
        name: element.name.clone(),
        kind: element.kind,
        q,
        i,
        phi,
        v,
        sigma: None,
        rho: None,
    }
}

fn current_driven(element: &Element, i: Vec<f64>, di: Vec<f64>, q: Vec<f64>, sigma: Vec<f64>) -> Result<ElementSeries> {
    use ElementKind::*;
    let scale = |xs: &[f64], k: f64| xs.iter().map(|x| k * x).collect::<Vec<f64>>();
    let mut out = match (&element.value, element.kind) {
        (ElementValue::Linear(r), Resistor) => {
            let mut s = series(element, q.clone(), i.clone(), scale(&q, *r), scale(&i, *r));
            s.rho = Some(scale(&sigma, *r));
            s
        }
        (ElementValue::Linear(l), Inductor) => {
            let mut s = series(element, q.clone(), i.clone(), scale(&i, *l), scale(&di, *l));
            s.rho = Some(scale(&q, *l));
            s
        }
        (ElementValue::Linear(c), Capacitor) => series(element, q.clone(), i.clone(), scale(&sigma, 1.0 / c), scale(&q, 1.0 / c)),
        (_, Memristor) => {
            let (phi, rm, _) = curve_series(element, &q)?;
            let v = rm.iter().zip(&i).map(|(a, b)| a * b).collect();
            series(element, q.clone(), i.clone(), phi, v)
        }
        (_, Meminductor) => {
            let (rho, lm, dlm) = curve_series(element, &q)?;
            let phi = lm.iter().zip(&i).map(|(a, b)| a * b).collect();
            let v = (0..i.len()).map(|k| dlm[k] * i[k] * i[k] + lm[k] * di[k]).collect();
            let mut s = series(element, q.clone(), i.clone(), phi, v);
            s.rho = Some(rho);
            s
        }
        (_, Memcapacitor) => {
            let (phi, ei, _) = curve_series(element, &sigma)?;
            let v = ei.iter().zip(&q).map(|(a, b)| a * b).collect();
            series(element, q.clone(), i.clone(), phi, v)
        }
        _ => unreachable!("sources are rejected by check_drive"),
    };
    out.sigma = Some(sigma);
    Ok(out)
}

fn voltage_driven(element: &Element, v: Vec<f64>, dv: Vec<f64>, phi: Vec<f64>, rho: Vec<f64>) -> Result<ElementSeries> {
    use ElementKind::*;
    let scale = |xs: &[f64], k: f64| xs.iter().map(|x| k * x).collect::<Vec<f64>>();
    let mut out = match (&element.value, element.kind) {
        (ElementValue::Linear(r), Resistor) => {
            let mut s = series(element, scale(&phi, 1.0 / r), scale(&v, 1.0 / r), phi.clone(), v.clone());
            s.sigma = Some(scale(&rho, 1.0 / r));
            s
        }
        (ElementValue::Linear(c), Capacitor) => {
            let mut s = series(element, scale(&v, *c), scale(&dv, *c), phi.clone(), v.clone());
            s.sigma = Some(scale(&phi, *c));
            s
        }
        (ElementValue::Linear(l), Inductor) => series(element, scale(&rho, 1.0 / l), scale(&phi, 1.0 / l), phi.clone(), v.clone()),
        (_, Memristor) => {
            let (q, gm, _) = curve_series(element, &phi)?;
            let i = gm.iter().zip(&v).map(|(a, b)| a * b).collect();
            series(element, q, i, phi.clone(), v.clone())
        }
        (_, Memcapacitor) => {
            let (sigma, cm, dcm) = curve_series(element, &phi)?;
            let q = cm.iter().zip(&v).map(|(a, b)| a * b).collect();
            let i = (0..v.len()).map(|k| dcm[k] * v[k] * v[k] + cm[k] * dv[k]).collect();
            let mut s = series(element, q, i, phi.clone(), v.clone());
            s.sigma = Some(sigma);
            s
        }
        (_, Meminductor) => {
            let (q, gm, _) = curve_series(element, &rho)?;
            let i = gm.iter().zip(&phi).map(|(a, b)| a * b).collect();
            series(element, q, i, phi.clone(), v.clone())
        }
        _ => unreachable!("sources are rejected by check_drive"),
    };
    out.rho = Some(rho);
    Ok(out)
}

/// Input/output pair whose Lissajous figure is pinched for a memory element:
/// `(I, V)` for resistive, `(I, φ)` for inductive and `(V, q)` for
/// capacitive elements, swapped under the dual drive.
pub fn pinch_pair(element: &Element, drive: DriveVariable) -> (Quantity, Quantity) {
    use ElementKind::*;
    use Quantity::*;
    match (element.kind, drive) {
        (Resistor | Memristor, DriveVariable::Current) => (Current, Voltage),
        (Resistor | Memristor, DriveVariable::Voltage) => (Voltage, Current),
        (Meminductor, DriveVariable::Current) => (Current, Flux),
        (Meminductor, DriveVariable::Voltage) => (Flux, Current),
        (Memcapacitor, DriveVariable::Current) => (Charge, Voltage),
        (Memcapacitor, DriveVariable::Voltage) => (Voltage, Charge),
        (Capacitor, _) => (Current, Charge),
        (Inductor, _) => (Voltage, Flux),
        (VoltageSource | CurrentSource, _) => (Current, Voltage),
    }
}

/// Largest incremental value `|f'|` of the element's curve over the
/// traversed states; the linear parameter (or its inverse when it relates
/// the pair the other way round) for conventional elements.
pub fn incremental_bound(element: &Element, series: &ElementSeries, drive: DriveVariable) -> Result<f64> {
    match &element.value {
        ElementValue::Linear(p) => Ok(match (element.kind, drive) {
            (ElementKind::Resistor, DriveVariable::Voltage) => 1.0 / p,
            _ => *p,
        }),
        ElementValue::Curve { curve, modulation } => {
            let quantity = match modulation {
                Modulation::Charge => Quantity::Charge,
                Modulation::Flux => Quantity::Flux,
                Modulation::IntegratedCharge => Quantity::IntegratedCharge,
                Modulation::IntegratedFlux => Quantity::IntegratedFlux,
            };
            let states = series.get(quantity).ok_or_else(|| {
                Error::Mismatch(format!("waveforms of {} lack the {quantity} series", element.name))
            })?;
            let mut k: f64 = 0.0;
            for &s in states {
                k = k.max(curve.deriv(s).map_err(|e| tag(element, e, s))?.abs());
            }
            Ok(k)
        }
        ElementValue::Source(_) => Err(Error::Unsupported {
            element: element.name.clone(),
            reason: "sources have no incremental value".into(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinchReport {
    pub pinched: bool,
    pub eps: f64,
    pub bound: f64,
    /// Grid points and interpolated zero crossings of `u` that were tested.
    pub tested: usize,
    /// Largest `|y|` at a tested point.
    pub max_output_at_zero: f64,
    /// Enclosed `u–y` area for `u ≥ 0` and `u ≤ 0`.
    pub area_positive: f64,
    pub area_negative: f64,
}

fn shoelace(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..points.len() {
        let (x0, y0) = points[k];
        let (x1, y1) = points[(k + 1) % points.len()];
        s += x0 * y1 - x1 * y0;
    }
    0.5 * s.abs()
}

/// Tests whether the `u–y` figure passes through the origin: every grid
/// point with `|u| ≤ eps`, and every linearly interpolated zero crossing of
/// `u`, must have `|y| ≤ bound·eps`.
pub fn pinch_check(u: &[f64], y: &[f64], eps: f64, bound: f64) -> Result<PinchReport> {
    if u.len() != y.len() {
        return Err(Error::Mismatch(format!(
            "input series has {} points, output series {}",
            u.len(),
            y.len()
        )));
    }
    if !(eps > 0.0) || !(bound >= 0.0) {
        return Err(Error::InvalidArgument("eps must be positive and the bound non-negative".into()));
    }
    let limit = bound * eps;
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for k in 0..u.len() {
        if u[k].abs() <= eps {
            tested += 1;
            worst = worst.max(y[k].abs());
        }
        if u[k] >= 0.0 {
            pos.push((u[k], y[k]));
        }
        if u[k] <= 0.0 {
            neg.push((u[k], y[k]));
        }
        if k + 1 < u.len() && u[k] * u[k + 1] < 0.0 {
            let s = u[k] / (u[k] - u[k + 1]);
            let yc = y[k] + s * (y[k + 1] - y[k]);
            tested += 1;
            worst = worst.max(yc.abs());
            pos.push((0.0, yc));
            neg.push((0.0, yc));
        }
    }
    Ok(PinchReport {
        pinched: worst <= limit,
        eps,
        bound,
        tested,
        max_output_at_zero: worst,
        area_positive: shoelace(&pos),
        area_negative: shoelace(&neg),
    })
}

/// [`pinch_check`] on the element's natural pair with its incremental bound.
pub fn pinch_report(element: &Element, drive: DriveVariable, waveforms: &ElementWaveforms, eps: f64) -> Result<PinchReport> {
    let series = waveforms
        .element(&element.name)
        .ok_or_else(|| Error::Mismatch(format!("no waveforms for element {}", element.name)))?;
    let (uq, yq) = pinch_pair(element, drive);
    let missing = |q: Quantity| Error::Mismatch(format!("waveforms of {} lack {q}", element.name));
    let u = series.get(uq).ok_or_else(|| missing(uq))?;
    let y = series.get(yq).ok_or_else(|| missing(yq))?;
    let bound = incremental_bound(element, series, drive)?;
    pinch_check(u, y, eps, bound)
}
