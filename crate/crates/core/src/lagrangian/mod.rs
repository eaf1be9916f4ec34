//! Assembly of the integrated-coordinate Lagrangian and memristive action.
//!
//! In loop form the generalized coordinates are integrated loop charges
//! `σⁱ`, so `σ̇ⁱ` is a loop charge and `σ̈ⁱ` a loop current:
//!
//! ```text
//! L̄(σ, σ̇, t) = Σ T̄*ₖ(q_b) + Σ ½L q_b² − Σ Ūₖ(σ_b) − Σ σ_b²/2C + Σ σ_b φₑ(t)
//! D̄(σ̇)       = Σ ∫₀^{q_b} φ̂ₖ + Σ ½R q_b²
//! ```
//!
//! with branch states `σ_b = Σ sign·σⁱ`, `q_b = Σ sign·σ̇ⁱ`. The equations of
//! motion are
//!
//! ```text
//! d/dt ∂L̄/∂σ̇ⁱ − ∂L̄/∂σⁱ + ∂D̄/∂σ̇ⁱ = 0,
//! ```
//!
//! i.e. the integrated Kirchhoff voltage law for every loop. Node form is the
//! exact dual with `ρ`, `Ū*`, `T̄`, `D̄*` and integrated current sources.
//!
//! Every element contributes one [`Term`]; all partial derivatives are
//! assembled analytically from the terms, so the residual is exactly
//! `A(x, v) a + B(x, v, t)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::constitutive::{ElementKind, ElementValue, SourceWaveform};
use crate::curve::ScalarCurve;
use crate::error::{Error, Result};
use crate::netlist::{validate, Circuit, Formulation};

mod first_order;

pub use first_order::{to_first_order, FirstOrderSystem, FnSystem, OdeSystem};

/// Energy-like function of a single branch state.
#[derive(Clone, Debug)]
pub(crate) enum Profile {
    /// `∫₀ˢ f`, the area under a constitutive curve.
    Area(ScalarCurve),
    /// `½ k s²`
    Quadratic(f64),
}

impl Profile {
    fn energy(&self, s: f64) -> Result<f64> {
        match self {
            Profile::Area(c) => c.antideriv(s),
            Profile::Quadratic(k) => Ok(0.5 * k * s * s),
        }
    }

    fn slope(&self, s: f64) -> Result<f64> {
        match self {
            Profile::Area(c) => c.eval(s),
            Profile::Quadratic(k) => Ok(k * s),
        }
    }

    fn curvature(&self, s: f64) -> Result<f64> {
        match self {
            Profile::Area(c) => c.deriv(s),
            Profile::Quadratic(k) => Ok(*k),
        }
    }

    fn domain(&self) -> (f64, f64) {
        match self {
            Profile::Area(c) => c.domain(),
            Profile::Quadratic(_) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Role {
    /// `+E(v_b)` in the Lagrangian.
    Kinetic(Profile),
    /// `−E(x_b)` in the Lagrangian.
    Potential(Profile),
    /// `+E(v_b)` in the action function.
    Dissipation(Profile),
    /// `+x_b · ∫e dt` in the Lagrangian.
    Source(SourceWaveform),
    /// `+½ g(x_b) v_b²` with `g = ρ̂'`: the path-dependent co-energy of a
    /// meminductor written in loop charges. Only used by
    /// [`naive_path_lagrangian`].
    PathKinetic(ScalarCurve),
}

#[derive(Clone, Debug)]
pub(crate) struct Term {
    element: String,
    role: Role,
    /// `(0-based coordinate, ±1)`
    membership: Vec<(usize, f64)>,
}

impl Term {
    fn branch(&self, s: &[f64]) -> f64 {
        self.membership.iter().map(|(i, m)| m * s[*i]).sum()
    }

    fn tag<T>(&self, r: Result<T>, value: f64) -> Result<T> {
        r.map_err(|e| match e {
            Error::OutOfDomain { .. } => Error::ElementDomain {
                element: self.element.clone(),
                value,
            },
            other => other,
        })
    }

    /// Adds `w · m mᵀ` to `mat`.
    fn add_outer(&self, mat: &mut DMatrix<f64>, w: f64) {
        for (i, mi) in &self.membership {
            for (j, mj) in &self.membership {
                mat[(*i, *j)] += mi * mj * w;
            }
        }
    }

    fn add_vec(&self, vec: &mut DVector<f64>, w: f64) {
        for (i, mi) in &self.membership {
            vec[*i] += mi * w;
        }
    }
}

/// Which construction produced a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    /// Integrated-coordinate Lagrangian (`σ` or `ρ`).
    Integrated,
    /// The path-dependent loop-charge Lagrangian `½L_M(q)q̇² − q²/2C`.
    NaivePath,
}

/// A Lagrangian, an action function and source forcing over `n` coordinates.
#[derive(Clone, Debug)]
pub struct LagrangianSystem {
    n: usize,
    formulation: Formulation,
    kind: SystemKind,
    terms: Vec<Term>,
    second_order_mask: Vec<bool>,
}

type Jacobians = (DMatrix<f64>, DMatrix<f64>, DVector<f64>);

impl LagrangianSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    /// `true` where the coordinate carries an inertial element.
    pub fn second_order_mask(&self) -> &[bool] {
        &self.second_order_mask
    }

    /// Coordinate symbol: `sigma`, `rho`, or `q` for the naive system.
    pub fn coordinate_symbol(&self) -> &'static str {
        match self.kind {
            SystemKind::NaivePath => "q",
            SystemKind::Integrated => self.formulation.coordinate_symbol(),
        }
    }

    fn check_dims(&self, x: &[f64], v: &[f64]) -> Result<()> {
        if x.len() != self.n || v.len() != self.n {
            return Err(Error::Mismatch(format!(
                "expected {} coordinates, got x: {}, v: {}",
                self.n,
                x.len(),
                v.len()
            )));
        }
        Ok(())
    }

    /// `L̄(x, v, t)` including source terms.
    pub fn lagrangian(&self, x: &[f64], v: &[f64], t: f64) -> Result<f64> {
        self.check_dims(x, v)?;
        let mut total = 0.0;
        for term in &self.terms {
            total += match &term.role {
                Role::Kinetic(p) => {
                    let vb = term.branch(v);
                    term.tag(p.energy(vb), vb)?
                }
                Role::Potential(p) => {
                    let xb = term.branch(x);
                    -term.tag(p.energy(xb), xb)?
                }
                Role::Source(w) => term.branch(x) * w.integral(t),
                Role::PathKinetic(c) => {
                    let (xb, vb) = (term.branch(x), term.branch(v));
                    0.5 * term.tag(c.deriv(xb), xb)? * vb * vb
                }
                Role::Dissipation(_) => 0.0,
            };
        }
        Ok(total)
    }

    /// Memristive and resistive action `D̄(v)`.
    pub fn action(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.n {
            return Err(Error::Mismatch(format!("expected {} velocities, got {}", self.n, v.len())));
        }
        let mut total = 0.0;
        for term in &self.terms {
            if let Role::Dissipation(p) = &term.role {
                let vb = term.branch(v);
                total += term.tag(p.energy(vb), vb)?;
            }
        }
        Ok(total)
    }

    /// Stored state functions `T̄*(v) + Ū(x)` (or `Ū*(v) + T̄(x)`), sources excluded.
    pub fn stored(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        self.check_dims(x, v)?;
        let mut total = 0.0;
        for term in &self.terms {
            total += match &term.role {
                Role::Kinetic(p) => {
                    let vb = term.branch(v);
                    term.tag(p.energy(vb), vb)?
                }
                Role::Potential(p) => {
                    let xb = term.branch(x);
                    term.tag(p.energy(xb), xb)?
                }
                Role::PathKinetic(c) => {
                    let (xb, vb) = (term.branch(x), term.branch(v));
                    0.5 * term.tag(c.deriv(xb), xb)? * vb * vb
                }
                _ => 0.0,
            };
        }
        Ok(total)
    }

    /// Integrated source contribution per coordinate, `Σ sign·φₑ(t)`.
    pub fn forcing(&self, t: f64) -> Vec<f64> {
        let mut out = DVector::zeros(self.n);
        for term in &self.terms {
            if let Role::Source(w) = &term.role {
                term.add_vec(&mut out, w.integral(t));
            }
        }
        out.iter().copied().collect()
    }

    /// `∂L̄/∂x`
    pub fn lagrangian_grad_x(&self, x: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_dims(x, v)?;
        let mut g = DVector::zeros(self.n);
        for term in &self.terms {
            match &term.role {
                Role::Potential(p) => {
                    let xb = term.branch(x);
                    term.add_vec(&mut g, -term.tag(p.slope(xb), xb)?);
                }
                Role::Source(w) => term.add_vec(&mut g, w.integral(t)),
                Role::PathKinetic(c) => {
                    let (xb, vb) = (term.branch(x), term.branch(v));
                    term.add_vec(&mut g, 0.5 * term.tag(c.deriv2(xb), xb)? * vb * vb);
                }
                _ => {}
            }
        }
        Ok(g.iter().copied().collect())
    }

    /// `∂L̄/∂v`
    pub fn lagrangian_grad_v(&self, x: &[f64], v: &[f64], _t: f64) -> Result<Vec<f64>> {
        self.check_dims(x, v)?;
        let mut g = DVector::zeros(self.n);
        for term in &self.terms {
            match &term.role {
                Role::Kinetic(p) => {
                    let vb = term.branch(v);
                    term.add_vec(&mut g, term.tag(p.slope(vb), vb)?);
                }
                Role::PathKinetic(c) => {
                    let (xb, vb) = (term.branch(x), term.branch(v));
                    term.add_vec(&mut g, term.tag(c.deriv(xb), xb)? * vb);
                }
                _ => {}
            }
        }
        Ok(g.iter().copied().collect())
    }

    /// `∂D̄/∂v`
    pub fn action_grad(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::Mismatch(format!("expected {} velocities, got {}", self.n, v.len())));
        }
        let mut g = DVector::zeros(self.n);
        for term in &self.terms {
            if let Role::Dissipation(p) = &term.role {
                let vb = term.branch(v);
                term.add_vec(&mut g, term.tag(p.slope(vb), vb)?);
            }
        }
        Ok(g.iter().copied().collect())
    }

    /// `A = ∂²L̄/∂v∂v`, the coefficient of the accelerations.
    pub fn inertia(&self, x: &[f64], v: &[f64], _t: f64) -> Result<DMatrix<f64>> {
        self.check_dims(x, v)?;
        let mut a = DMatrix::zeros(self.n, self.n);
        for term in &self.terms {
            match &term.role {
                Role::Kinetic(p) => {
                    let vb = term.branch(v);
                    term.add_outer(&mut a, term.tag(p.curvature(vb), vb)?);
                }
                Role::PathKinetic(c) => {
                    let xb = term.branch(x);
                    term.add_outer(&mut a, term.tag(c.deriv(xb), xb)?);
                }
                _ => {}
            }
        }
        Ok(a)
    }

    /// `B = (∂²L̄/∂v∂x) v + ∂²L̄/∂v∂t − ∂L̄/∂x + ∂D̄/∂v`, the residual at zero
    /// acceleration.
    pub fn bias(&self, x: &[f64], v: &[f64], t: f64) -> Result<DVector<f64>> {
        self.check_dims(x, v)?;
        let mut b = DVector::zeros(self.n);
        for term in &self.terms {
            match &term.role {
                Role::Kinetic(_) => {}
                Role::Potential(p) => {
                    let xb = term.branch(x);
                    term.add_vec(&mut b, term.tag(p.slope(xb), xb)?);
                }
                Role::Dissipation(p) => {
                    let vb = term.branch(v);
                    term.add_vec(&mut b, term.tag(p.slope(vb), vb)?);
                }
                Role::Source(w) => term.add_vec(&mut b, -w.integral(t)),
                Role::PathKinetic(c) => {
                    // g'(x_b) v_b² from d/dt ∂L/∂v, minus ½ g'(x_b) v_b² from ∂L/∂x
                    let (xb, vb) = (term.branch(x), term.branch(v));
                    term.add_vec(&mut b, 0.5 * term.tag(c.deriv2(xb), xb)? * vb * vb);
                }
            }
        }
        Ok(b)
    }

    /// Euler–Lagrange residual `A a + B`.
    pub fn el_residual(&self, x: &[f64], v: &[f64], a: &[f64], t: f64) -> Result<Vec<f64>> {
        if a.len() != self.n {
            return Err(Error::Mismatch(format!("expected {} accelerations, got {}", self.n, a.len())));
        }
        let inertia = self.inertia(x, v, t)?;
        let bias = self.bias(x, v, t)?;
        let r = inertia * DVector::from_column_slice(a) + bias;
        Ok(r.iter().copied().collect())
    }

    /// `(∂B/∂x, ∂B/∂v, ∂B/∂t)`
    pub fn bias_jacobians(&self, x: &[f64], v: &[f64], t: f64) -> Result<Jacobians> {
        self.check_dims(x, v)?;
        let mut bx = DMatrix::zeros(self.n, self.n);
        let mut bv = DMatrix::zeros(self.n, self.n);
        let mut bt = DVector::zeros(self.n);
        for term in &self.terms {
            match &term.role {
                Role::Kinetic(_) => {}
                Role::Potential(p) => {
                    let xb = term.branch(x);
                    term.add_outer(&mut bx, term.tag(p.curvature(xb), xb)?);
                }
                Role::Dissipation(p) => {
                    let vb = term.branch(v);
                    term.add_outer(&mut bv, term.tag(p.curvature(vb), vb)?);
                }
                Role::Source(w) => term.add_vec(&mut bt, -w.value(t)),
                Role::PathKinetic(c) => {
                    let (xb, vb) = (term.branch(x), term.branch(v));
                    term.add_outer(&mut bx, 0.5 * term.tag(c.deriv3(xb), xb)? * vb * vb);
                    term.add_outer(&mut bv, term.tag(c.deriv2(xb), xb)? * vb);
                }
            }
        }
        Ok((bx, bv, bt))
    }

    /// Symmetric per-coordinate bounds `(x_max, v_max)` such that every branch
    /// state stays inside its curve domain whenever `|xᵢ| ≤ x_max[i]` and
    /// `|vᵢ| ≤ v_max[i]`.
    pub fn safe_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut xb = vec![f64::INFINITY; self.n];
        let mut vb = vec![f64::INFINITY; self.n];
        for term in &self.terms {
            let (domain, target) = match &term.role {
                Role::Kinetic(p) | Role::Dissipation(p) => (p.domain(), &mut vb),
                Role::Potential(p) => (p.domain(), &mut xb),
                Role::PathKinetic(c) => (c.domain(), &mut xb),
                Role::Source(_) => continue,
            };
            let half = domain.0.abs().min(domain.1.abs()) / term.membership.len() as f64;
            for (i, _) in &term.membership {
                target[*i] = target[*i].min(half);
            }
        }
        (xb, vb)
    }

    /// The `(A, B)` pair of this system.
    pub fn extract_ab(self: &Arc<Self>) -> ABDecomposition {
        let a_sys = Arc::clone(self);
        let b_sys = Arc::clone(self);
        ABDecomposition::new(
            self.n,
            move |x, v, t| a_sys.inertia(x, v, t),
            move |x, v, t| b_sys.bias(x, v, t),
        )
    }

    /// Element names in assembly order.
    pub fn element_names(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.element.as_str())
    }
}

type MatrixFn = dyn Fn(&[f64], &[f64], f64) -> Result<DMatrix<f64>> + Send + Sync;
type VectorFn = dyn Fn(&[f64], &[f64], f64) -> Result<DVector<f64>> + Send + Sync;

/// Equations of motion written as `A(x, v, t) a + B(x, v, t) = 0`.
#[derive(Clone)]
pub struct ABDecomposition {
    n: usize,
    a: Arc<MatrixFn>,
    b: Arc<VectorFn>,
}

impl fmt::Debug for ABDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ABDecomposition").field("n", &self.n).finish_non_exhaustive()
    }
}

impl ABDecomposition {
    pub fn new<FA, FB>(n: usize, a: FA, b: FB) -> Self
    where
        FA: Fn(&[f64], &[f64], f64) -> Result<DMatrix<f64>> + Send + Sync + 'static,
        FB: Fn(&[f64], &[f64], f64) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        Self {
            n,
            a: Arc::new(a),
            b: Arc::new(b),
        }
    }

    /// Builds `(A, B)` from an arbitrary residual `r(x, v, a, t)` that is
    /// affine in `a`: `B = r(x, v, 0, t)` and column `j` of `A` is
    /// `r(x, v, eⱼ, t) − B`.
    pub fn from_residual<F>(n: usize, residual: F) -> Self
    where
        F: Fn(&[f64], &[f64], &[f64], f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        let residual = Arc::new(residual);
        let r_a = Arc::clone(&residual);
        let a = move |x: &[f64], v: &[f64], t: f64| {
            let zero = vec![0.0; n];
            let base = r_a(x, v, &zero, t)?;
            let mut m = DMatrix::zeros(n, n);
            let mut unit = vec![0.0; n];
            for j in 0..n {
                unit[j] = 1.0;
                let r = r_a(x, v, &unit, t)?;
                for i in 0..n {
                    m[(i, j)] = r[i] - base[i];
                }
                unit[j] = 0.0;
            }
            Ok(m)
        };
        let b = move |x: &[f64], v: &[f64], t: f64| {
            Ok(DVector::from_vec(residual(x, v, &vec![0.0; n], t)?))
        };
        Self::new(n, a, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, x: &[f64], v: &[f64], t: f64) -> Result<DMatrix<f64>> {
        (self.a)(x, v, t)
    }

    pub fn b(&self, x: &[f64], v: &[f64], t: f64) -> Result<DVector<f64>> {
        (self.b)(x, v, t)
    }

    /// Returns a copy with `A` and `B` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let (a, b) = (Arc::clone(&self.a), Arc::clone(&self.b));
        Self::new(
            self.n,
            move |x, v, t| Ok(a(x, v, t)? * factor),
            move |x, v, t| Ok(b(x, v, t)? * factor),
        )
    }
}

fn membership(element: &crate::constitutive::Element) -> Vec<(usize, f64)> {
    element
        .membership
        .iter()
        .map(|inc| (inc.index(), inc.factor()))
        .collect()
}

fn finish(n: usize, formulation: Formulation, kind: SystemKind, terms: Vec<Term>) -> LagrangianSystem {
    let mut mask = vec![false; n];
    for term in &terms {
        if matches!(term.role, Role::Kinetic(_) | Role::PathKinetic(_)) {
            for (i, _) in &term.membership {
                mask[*i] = true;
            }
        }
    }
    LagrangianSystem {
        n,
        formulation,
        kind,
        terms,
        second_order_mask: mask,
    }
}

fn ensure_valid(circuit: &Circuit, expected: Formulation) -> Result<()> {
    if circuit.formulation != expected {
        return Err(Error::Formulation(format!(
            "circuit `{}` uses {} analysis, expected {expected}",
            circuit.name, circuit.formulation
        )));
    }
    validate(circuit).into_result().map(|_| ())
}

/// Assembles `L̄(σ, σ̇, t)` and `D̄(σ̇)` for a loop-formulation circuit.
pub fn build_loop_system(circuit: &Circuit) -> Result<LagrangianSystem> {
    ensure_valid(circuit, Formulation::Loop)?;
    build(circuit)
}

/// Assembles `L̄*(ρ, ρ̇, t)` and `D̄*(ρ̇)` for a node-formulation circuit.
pub fn build_node_system(circuit: &Circuit) -> Result<LagrangianSystem> {
    ensure_valid(circuit, Formulation::Node)?;
    build(circuit)
}

/// Dispatches on the circuit's declared formulation.
pub fn build_system(circuit: &Circuit) -> Result<LagrangianSystem> {
    match circuit.formulation {
        Formulation::Loop => build_loop_system(circuit),
        Formulation::Node => build_node_system(circuit),
    }
}

fn build(circuit: &Circuit) -> Result<LagrangianSystem> {
    use ElementKind::*;
    let form = circuit.formulation;
    let mut terms = Vec::with_capacity(circuit.elements.len());
    for e in &circuit.elements {
        // Loop form: L, ML store in σ̇; C, MC store in σ. Node form swaps the
        // roles of inductive and capacitive elements.
        let role = match (&e.value, e.kind) {
            (ElementValue::Linear(v), Resistor) => match form {
                Formulation::Loop => Role::Dissipation(Profile::Quadratic(*v)),
                Formulation::Node => Role::Dissipation(Profile::Quadratic(1.0 / v)),
            },
            (ElementValue::Linear(v), Inductor) => match form {
                Formulation::Loop => Role::Kinetic(Profile::Quadratic(*v)),
                Formulation::Node => Role::Potential(Profile::Quadratic(1.0 / v)),
            },
            (ElementValue::Linear(v), Capacitor) => match form {
                Formulation::Loop => Role::Potential(Profile::Quadratic(1.0 / v)),
                Formulation::Node => Role::Kinetic(Profile::Quadratic(*v)),
            },
            (ElementValue::Curve { curve, .. }, Memristor) => Role::Dissipation(Profile::Area(curve.clone())),
            (ElementValue::Curve { curve, .. }, Meminductor) => match form {
                Formulation::Loop => Role::Kinetic(Profile::Area(curve.clone())),
                Formulation::Node => Role::Potential(Profile::Area(curve.clone())),
            },
            (ElementValue::Curve { curve, .. }, Memcapacitor) => match form {
                Formulation::Loop => Role::Potential(Profile::Area(curve.clone())),
                Formulation::Node => Role::Kinetic(Profile::Area(curve.clone())),
            },
            (ElementValue::Source(w), VoltageSource | CurrentSource) => Role::Source(*w),
            _ => {
                return Err(Error::Unsupported {
                    element: e.name.clone(),
                    reason: format!("value does not match kind {}", e.kind),
                })
            }
        };
        terms.push(Term {
            element: e.name.clone(),
            role,
            membership: membership(e),
        });
    }
    Ok(finish(circuit.n_coords, form, SystemKind::Integrated, terms))
}

/// Builds the path-dependent loop-charge Lagrangian
/// `L(q, q̇) = Σ ½ L_M(q_b) q̇_b² − Σ q_b²/2C` whose Euler–Lagrange equation
/// carries `½ L_M'(q) q̇²` instead of the `L_M'(q) q̇²` that KVL demands.
///
/// Kept for comparison against the integrated formulation; only meminductors,
/// linear inductors, capacitors and resistors are accepted.
pub fn naive_path_lagrangian(circuit: &Circuit) -> Result<LagrangianSystem> {
    use ElementKind::*;
    if circuit.formulation != Formulation::Loop {
        return Err(Error::Formulation("the path Lagrangian is defined on loop charges".into()));
    }
    let mut terms = Vec::new();
    for e in &circuit.elements {
        let role = match (&e.value, e.kind) {
            (ElementValue::Curve { curve, .. }, Meminductor) => Role::PathKinetic(curve.clone()),
            (ElementValue::Linear(v), Inductor) => Role::Kinetic(Profile::Quadratic(*v)),
            (ElementValue::Linear(v), Capacitor) => Role::Potential(Profile::Quadratic(1.0 / v)),
            (ElementValue::Linear(v), Resistor) => Role::Dissipation(Profile::Quadratic(*v)),
            _ => {
                return Err(Error::Unsupported {
                    element: e.name.clone(),
                    reason: format!("{} has no loop-charge path Lagrangian", e.kind),
                })
            }
        };
        terms.push(Term {
            element: e.name.clone(),
            role,
            membership: membership(e),
        });
    }
    Ok(finish(circuit.n_coords, Formulation::Loop, SystemKind::NaivePath, terms))
}
