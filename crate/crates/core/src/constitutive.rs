//! Circuit elements and their constitutive relations.
//!
//! Memory elements relate one of the integrated variables `q`, `φ`, `σ`
//! (integrated charge) or `ρ` (integrated flux) to another through a
//! [`ScalarCurve`]. The modulation variant selects which variable is the
//! curve's input:
//!
//! | kind         | input | curve    | incremental value       |
//! |--------------|-------|----------|-------------------------|
//! | memristor    | `q`   | `φ̂(q)`   | memristance `R_M(q)`    |
//! | memristor    | `φ`   | `q̂(φ)`   | memductance `G_M(φ)`    |
//! | meminductor  | `q`   | `ρ̂(q)`   | meminductance `L_M(q)`  |
//! | meminductor  | `ρ`   | `q̂(ρ)`   | inverse meminductance   |
//! | memcapacitor | `φ`   | `σ̂(φ)`   | memcapacitance `C_M(φ)` |
//! | memcapacitor | `σ`   | `φ̂(σ)`   | inverse memcapacitance  |
//!
//! The areas under and above a curve are the memory state functions; they
//! are related by a Legendre transform, checked by [`legendre_residual`].

use std::fmt;
use std::str::FromStr;

use crate::curve::ScalarCurve;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Resistor,
    Inductor,
    Capacitor,
    Memristor,
    Meminductor,
    Memcapacitor,
    VoltageSource,
    CurrentSource,
}

impl ElementKind {
    /// Netlist keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            ElementKind::Resistor => "R",
            ElementKind::Inductor => "L",
            ElementKind::Capacitor => "C",
            ElementKind::Memristor => "MR",
            ElementKind::Meminductor => "ML",
            ElementKind::Memcapacitor => "MC",
            ElementKind::VoltageSource => "VSRC",
            ElementKind::CurrentSource => "ISRC",
        }
    }

    pub fn is_memory(self) -> bool {
        matches!(
            self,
            ElementKind::Memristor | ElementKind::Meminductor | ElementKind::Memcapacitor
        )
    }

    pub fn is_conventional(self) -> bool {
        matches!(
            self,
            ElementKind::Resistor | ElementKind::Inductor | ElementKind::Capacitor
        )
    }

    pub fn is_source(self) -> bool {
        matches!(self, ElementKind::VoltageSource | ElementKind::CurrentSource)
    }

    /// The modulation variants a memory kind admits.
    pub fn modulations(self) -> &'static [Modulation] {
        match self {
            ElementKind::Memristor => &[Modulation::Charge, Modulation::Flux],
            ElementKind::Meminductor => &[Modulation::Charge, Modulation::IntegratedFlux],
            ElementKind::Memcapacitor => &[Modulation::Flux, Modulation::IntegratedCharge],
            _ => &[],
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for ElementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "R" => ElementKind::Resistor,
            "L" => ElementKind::Inductor,
            "C" => ElementKind::Capacitor,
            "MR" => ElementKind::Memristor,
            "ML" => ElementKind::Meminductor,
            "MC" => ElementKind::Memcapacitor,
            "VSRC" => ElementKind::VoltageSource,
            "ISRC" => ElementKind::CurrentSource,
            other => return Err(format!("unknown element kind `{other}`")),
        })
    }
}

/// The variable a memory element's constitutive curve takes as input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modulation {
    /// charge `q`
    Charge,
    /// flux `φ`
    Flux,
    /// integrated flux `ρ`
    IntegratedFlux,
    /// integrated charge `σ`
    IntegratedCharge,
}

impl Modulation {
    pub fn keyword(self) -> &'static str {
        match self {
            Modulation::Charge => "q",
            Modulation::Flux => "phi",
            Modulation::IntegratedFlux => "rho",
            Modulation::IntegratedCharge => "sigma",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "q" => Modulation::Charge,
            "phi" => Modulation::Flux,
            "rho" => Modulation::IntegratedFlux,
            "sigma" => Modulation::IntegratedCharge,
            other => return Err(format!("unknown modulation `{other}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WaveShape {
    Dc,
    Sine { omega: f64, phase: f64 },
}

/// Independent source waveform `e(t)` (volts or amperes).
///
/// Time integrals are taken from `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceWaveform {
    pub amplitude: f64,
    pub shape: WaveShape,
}

impl SourceWaveform {
    pub fn dc(amplitude: f64) -> Self {
        Self {
            amplitude,
            shape: WaveShape::Dc,
        }
    }

    pub fn sine(amplitude: f64, omega: f64, phase: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sine angular frequency must be positive, got {omega}"
            )));
        }
        if !amplitude.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidArgument("non-finite sine parameter".into()));
        }
        Ok(Self {
            amplitude,
            shape: WaveShape::Sine { omega, phase },
        })
    }

    /// `e(t)`
    pub fn value(&self, t: f64) -> f64 {
        match self.shape {
            WaveShape::Dc => self.amplitude,
            WaveShape::Sine { omega, phase } => self.amplitude * (omega * t + phase).sin(),
        }
    }

    /// `de/dt`
    pub fn derivative(&self, t: f64) -> f64 {
        match self.shape {
            WaveShape::Dc => 0.0,
            WaveShape::Sine { omega, phase } => self.amplitude * omega * (omega * t + phase).cos(),
        }
    }

    /// `∫₀ᵗ e(τ) dτ`
    pub fn integral(&self, t: f64) -> f64 {
        match self.shape {
            WaveShape::Dc => self.amplitude * t,
            WaveShape::Sine { omega, phase } => {
                self.amplitude * (phase.cos() - (omega * t + phase).cos()) / omega
            }
        }
    }

    /// `∫₀ᵗ ∫₀^τ e(s) ds dτ`
    pub fn double_integral(&self, t: f64) -> f64 {
        match self.shape {
            WaveShape::Dc => 0.5 * self.amplitude * t * t,
            WaveShape::Sine { omega, phase } => {
                self.amplitude
                    * (t * phase.cos() / omega - ((omega * t + phase).sin() - phase.sin()) / (omega * omega))
            }
        }
    }
}

/// Electrical parameter attached to an element.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementValue {
    /// R [Ω], L [H] or C [F].
    Linear(f64),
    Curve {
        curve: ScalarCurve,
        modulation: Modulation,
    },
    Source(SourceWaveform),
}

/// One signed coordinate reference. `coord` is 1-based as in the netlist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Incidence {
    pub coord: usize,
    pub sign: i8,
}

impl Incidence {
    pub fn new(coord: usize, sign: i8) -> Self {
        Self { coord, sign }
    }

    pub fn index(&self) -> usize {
        self.coord - 1
    }

    pub fn factor(&self) -> f64 {
        f64::from(self.sign)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    pub value: ElementValue,
    pub membership: Vec<Incidence>,
}

impl Element {
    /// Builds an element, checking that the value matches the kind.
    pub fn new(
        name: impl Into<String>,
        kind: ElementKind,
        value: ElementValue,
        membership: Vec<Incidence>,
    ) -> Result<Self> {
        let name = name.into();
        let bad = |reason: String| Error::InvalidElement {
            name: name.clone(),
            reason,
        };
        match (&value, kind) {
            (ElementValue::Linear(v), k) if k.is_conventional() => {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(bad(format!("{k} value must be positive and finite, got {v}")));
                }
            }
            (ElementValue::Curve { modulation, .. }, k) if k.is_memory() => {
                if !k.modulations().contains(modulation) {
                    return Err(bad(format!("{k} does not support mod={modulation}")));
                }
            }
            (ElementValue::Source(_), k) if k.is_source() => {}
            (_, k) => return Err(bad(format!("value does not match element kind {k}"))),
        }
        if membership.is_empty() {
            return Err(bad("element references no coordinate".into()));
        }
        for inc in &membership {
            if inc.coord == 0 || (inc.sign != 1 && inc.sign != -1) {
                return Err(bad(format!(
                    "invalid coordinate reference {}{}",
                    if inc.sign < 0 { "-" } else { "+" },
                    inc.coord
                )));
            }
        }
        Ok(Self {
            name,
            kind,
            value,
            membership,
        })
    }

    pub fn curve(&self) -> Option<(&ScalarCurve, Modulation)> {
        match &self.value {
            ElementValue::Curve { curve, modulation } => Some((curve, *modulation)),
            _ => None,
        }
    }

    pub fn linear_value(&self) -> Option<f64> {
        match self.value {
            ElementValue::Linear(v) => Some(v),
            _ => None,
        }
    }

    pub fn waveform(&self) -> Option<&SourceWaveform> {
        match &self.value {
            ElementValue::Source(w) => Some(w),
            _ => None,
        }
    }

    /// Branch quantity `Σ sign·coordinate` for this element.
    pub fn branch(&self, coords: &[f64]) -> f64 {
        self.membership
            .iter()
            .map(|inc| inc.factor() * coords[inc.index()])
            .sum()
    }
}

/// Incremental memristance, meminductance, memcapacitance (or their inverse
/// variants) at `state`; the linear parameter for conventional elements.
pub fn incremental_value(element: &Element, state: f64) -> Result<f64> {
    match &element.value {
        ElementValue::Linear(v) => Ok(*v),
        ElementValue::Curve { curve, .. } => curve.deriv(state),
        ElementValue::Source(_) => Err(Error::Unsupported {
            element: element.name.clone(),
            reason: "sources have no incremental value".into(),
        }),
    }
}

/// `F(x) + F*(f(x)) − x f(x)` where `F` is the area under the curve and `F*`
/// the area under its inverse. Vanishes for every invertible curve.
pub fn legendre_residual(curve: &ScalarCurve, x: f64) -> Result<f64> {
    let y = curve.eval(x)?;
    let primal = curve.antideriv(x)?;
    let dual = curve.co_antideriv(y)?;
    Ok(primal + dual - x * y)
}
