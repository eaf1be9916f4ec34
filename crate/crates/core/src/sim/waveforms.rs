use std::fmt;

use crate::constitutive::{Element, ElementKind, ElementValue};
use crate::error::{Error, Result};
use crate::netlist::{Circuit, Formulation};

use super::trajectory::Trajectory;

/// Electrical quantity of a branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    Charge,
    Current,
    Flux,
    Voltage,
    IntegratedCharge,
    IntegratedFlux,
}

impl Quantity {
    pub fn symbol(self) -> &'static str {
        match self {
            Quantity::Charge => "q",
            Quantity::Current => "I",
            Quantity::Flux => "phi",
            Quantity::Voltage => "V",
            Quantity::IntegratedCharge => "sigma",
            Quantity::IntegratedFlux => "rho",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Quantity::Charge => "C",
            Quantity::Current => "A",
            Quantity::Flux => "Wb",
            Quantity::Voltage => "V",
            Quantity::IntegratedCharge => "C*s",
            Quantity::IntegratedFlux => "Wb*s",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Time series of one element on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementSeries {
    pub name: String,
    pub kind: ElementKind,
    pub q: Vec<f64>,
    pub i: Vec<f64>,
    pub phi: Vec<f64>,
    pub v: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
}

impl ElementSeries {
    pub fn get(&self, quantity: Quantity) -> Option<&[f64]> {
        match quantity {
            Quantity::Charge => Some(&self.q),
            Quantity::Current => Some(&self.i),
            Quantity::Flux => Some(&self.phi),
            Quantity::Voltage => Some(&self.v),
            Quantity::IntegratedCharge => self.sigma.as_deref(),
            Quantity::IntegratedFlux => self.rho.as_deref(),
        }
    }

    /// Present quantities in column order.
    pub fn columns(&self) -> Vec<(Quantity, &[f64])> {
        let mut out: Vec<(Quantity, &[f64])> = vec![
            (Quantity::Charge, &self.q),
            (Quantity::Current, &self.i),
            (Quantity::Flux, &self.phi),
            (Quantity::Voltage, &self.v),
        ];
        if let Some(s) = &self.sigma {
            out.push((Quantity::IntegratedCharge, s));
        }
        if let Some(r) = &self.rho {
            out.push((Quantity::IntegratedFlux, r));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementWaveforms {
    pub t: Vec<f64>,
    pub elements: Vec<ElementSeries>,
}

impl ElementWaveforms {
    pub fn element(&self, name: &str) -> Option<&ElementSeries> {
        self.elements.iter().find(|e| e.name == name)
    }
}

/// Fornberg weights for the first derivative at `z` from `nodes`.
fn fornberg_first(z: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let m = 1usize;
    // c[j][k]: weight of node j for derivative order k
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Derivative of `y` on the (possibly non-uniform) grid `t` with five-point
/// stencils, shifted to one side near the ends.
pub fn differentiate(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let width = n.min(5);
    (0..n)
        .map(|k| {
            let start = k.saturating_sub(width / 2).min(n - width);
            let w = fornberg_first(t[k], &t[start..start + width]);
            w.iter().zip(&y[start..start + width]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

fn tag(e: &Element, err: Error, value: f64) -> Error {
    match err {
        Error::OutOfDomain { .. } => Error::ElementDomain {
            element: e.name.clone(),
            value,
        },
        other => other,
    }
}

fn map_curve(e: &Element, xs: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    xs.iter().map(|&x| f(x).map_err(|err| tag(e, err, x))).collect()
}

fn scale(xs: &[f64], k: f64) -> Vec<f64> {
    xs.iter().map(|x| k * x).collect()
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Per-element charges, currents, fluxes and voltages along a trajectory.
///
/// In loop form the branch integrated charge is `σ_b = Σ sign·σⁱ`, with
/// `q = σ̇_b` and `I = σ̈_b` taken from the state. Fluxes follow from the
/// constitutive relations; voltages of elements whose flux is a function of
/// current (inductors, meminductors) are finite differences of `φ` on the
/// grid. Node form is the dual.
pub fn branch_waveforms(circuit: &Circuit, traj: &Trajectory) -> Result<ElementWaveforms> {
    if circuit.formulation != traj.formulation || (!traj.is_empty() && traj.n() != circuit.n_coords) {
        return Err(Error::Mismatch(format!(
            "trajectory ({} form, {} coordinates) does not belong to circuit {:?} ({} form, {} coordinates)",
            traj.formulation.keyword(),
            traj.n(),
            circuit.name,
            circuit.formulation.keyword(),
            circuit.n_coords
        )));
    }
    let t = &traj.t;
    let mut elements = Vec::with_capacity(circuit.elements.len());
    for e in &circuit.elements {
        let s: Vec<f64> = traj.x.iter().map(|x| e.branch(x)).collect();
        let ds: Vec<f64> = traj.v.iter().map(|v| e.branch(v)).collect();
        let dds: Vec<f64> = traj.a.iter().map(|a| e.branch(a)).collect();
        let series = match circuit.formulation {
            Formulation::Loop => loop_series(e, t, s, ds, dds)?,
            Formulation::Node => node_series(e, t, s, ds, dds)?,
        };
        elements.push(series);
    }
    Ok(ElementWaveforms { t: t.clone(), elements })
}

fn loop_series(e: &Element, t: &[f64], sigma: Vec<f64>, q: Vec<f64>, i: Vec<f64>) -> Result<ElementSeries> {
    use ElementKind::*;
    let (phi, v, rho) = match (&e.value, e.kind) {
        (ElementValue::Linear(r), Resistor) => (scale(&q, *r), scale(&i, *r), Some(scale(&sigma, *r))),
        (ElementValue::Linear(l), Inductor) => {
            let phi = scale(&i, *l);
            let v = differentiate(t, &phi);
            (phi, v, Some(scale(&q, *l)))
        }
        (ElementValue::Linear(c), Capacitor) => (scale(&sigma, 1.0 / c), scale(&q, 1.0 / c), None),
        (ElementValue::Curve { curve, .. }, Memristor) => {
            let phi = map_curve(e, &q, |x| curve.eval(x))?;
            let slope = map_curve(e, &q, |x| curve.deriv(x))?;
            (phi, product(&slope, &i), None)
        }
        (ElementValue::Curve { curve, .. }, Meminductor) => {
            let rho = map_curve(e, &q, |x| curve.eval(x))?;
            let slope = map_curve(e, &q, |x| curve.deriv(x))?;
            let phi = product(&slope, &i);
            let v = differentiate(t, &phi);
            (phi, v, Some(rho))
        }
        (ElementValue::Curve { curve, .. }, Memcapacitor) => {
            let phi = map_curve(e, &sigma, |x| curve.eval(x))?;
            let slope = map_curve(e, &sigma, |x| curve.deriv(x))?;
            (phi, product(&slope, &q), None)
        }
        (ElementValue::Source(w), VoltageSource) => (
            t.iter().map(|&s| w.integral(s)).collect(),
            t.iter().map(|&s| w.value(s)).collect(),
            Some(t.iter().map(|&s| w.double_integral(s)).collect()),
        ),
        _ => {
            return Err(Error::Unsupported {
                element: e.name.clone(),
                reason: format!("{} has no loop-form waveforms", e.kind),
            })
        }
    };
    Ok(ElementSeries {
        name: e.name.clone(),
        kind: e.kind,
        q,
        i,
        phi,
        v,
        sigma: Some(sigma),
        rho,
    })
}

fn node_series(e: &Element, t: &[f64], rho: Vec<f64>, phi: Vec<f64>, v: Vec<f64>) -> Result<ElementSeries> {
    use ElementKind::*;
    let (q, i, sigma) = match (&e.value, e.kind) {
        (ElementValue::Linear(r), Resistor) => (scale(&phi, 1.0 / r), scale(&v, 1.0 / r), Some(scale(&rho, 1.0 / r))),
        (ElementValue::Linear(c), Capacitor) => {
            let q = scale(&v, *c);
            let i = differentiate(t, &q);
            (q, i, Some(scale(&phi, *c)))
        }
        (ElementValue::Linear(l), Inductor) => (scale(&rho, 1.0 / l), scale(&phi, 1.0 / l), None),
        (ElementValue::Curve { curve, .. }, Memristor) => {
            let q = map_curve(e, &phi, |x| curve.eval(x))?;
            let slope = map_curve(e, &phi, |x| curve.deriv(x))?;
            (q, product(&slope, &v), None)
        }
        (ElementValue::Curve { curve, .. }, Memcapacitor) => {
            let sigma = map_curve(e, &phi, |x| curve.eval(x))?;
            let slope = map_curve(e, &phi, |x| curve.deriv(x))?;
            let q = product(&slope, &v);
            let i = differentiate(t, &q);
            (q, i, Some(sigma))
        }
        (ElementValue::Curve { curve, .. }, Meminductor) => {
            let q = map_curve(e, &rho, |x| curve.eval(x))?;
            let slope = map_curve(e, &rho, |x| curve.deriv(x))?;
            (q, product(&slope, &phi), None)
        }
        (ElementValue::Source(w), CurrentSource) => (
            t.iter().map(|&s| w.integral(s)).collect(),
            t.iter().map(|&s| w.value(s)).collect(),
            Some(t.iter().map(|&s| w.double_integral(s)).collect()),
        ),
        _ => {
            return Err(Error::Unsupported {
                element: e.name.clone(),
                reason: format!("{} has no node-form waveforms", e.kind),
            })
        }
    };
    Ok(ElementSeries {
        name: e.name.clone(),
        kind: e.kind,
        q,
        i,
        phi,
        v,
        sigma,
        rho: Some(rho),
    })
}
