//! Sampled verification of the Helmholtz self-adjointness conditions.
//!
//! For equations `A(x, ẋ) ẍ + B(x, ẋ) = 0` a Lagrangian exists iff
//!
//! ```text
//! (i)   A_ij = A_ji
//! (ii)  ∂A_ik/∂ẋʲ = ∂A_jk/∂ẋⁱ
//! (iii) ∂B_i/∂xʲ − ∂B_j/∂xⁱ = ½ ∂/∂xᵏ (∂B_i/∂ẋʲ − ∂B_j/∂ẋⁱ) ẋᵏ
//! (iv)  ∂B_i/∂ẋʲ + ∂B_j/∂ẋⁱ = 2 (∂A_ij/∂xᵏ) ẋᵏ
//! ```
//!
//! When `A` does not depend on `x` the right side of (iv) vanishes and the
//! conditions reduce to the classical velocity-only form.
//!
//! The conditions are checked numerically at Halton points of a box in
//! `(x, ẋ)` space, with all partial derivatives taken by central differences
//! of step `h = s·(1 + |coordinate|)` (`10 s` for the nested differences of
//! the curl condition). A positive verdict only covers the sampled region.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrangian::{ABDecomposition, LagrangianSystem};

pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_STEP_SCALE: f64 = 1e-5;
/// Step multiplier for the second-order differences in the curl condition.
const NESTED_STEP_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    #[serde(rename = "symmetry")]
    Symmetry,
    #[serde(rename = "A_v_compatibility")]
    AVCompatibility,
    #[serde(rename = "B_curl")]
    BCurl,
    #[serde(rename = "B_v_symmetry")]
    BVSymmetry,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Symmetry,
        Condition::AVCompatibility,
        Condition::BCurl,
        Condition::BVSymmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Symmetry => "symmetry",
            Condition::AVCompatibility => "A_v_compatibility",
            Condition::BCurl => "B_curl",
            Condition::BVSymmetry => "B_v_symmetry",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SelfAdjoint,
    NotSelfAdjoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplePoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub name: Condition,
    pub max_violation: f64,
    pub worst_point: SamplePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SAReport {
    pub verdict: Verdict,
    pub conditions: Vec<ConditionResult>,
    pub samples: usize,
    pub tol: f64,
}

impl SAReport {
    pub fn is_self_adjoint(&self) -> bool {
        self.verdict == Verdict::SelfAdjoint
    }

    pub fn condition(&self, c: Condition) -> &ConditionResult {
        self.conditions
            .iter()
            .find(|r| r.name == c)
            .expect("every condition is reported")
    }

    /// The condition with the largest violation.
    pub fn worst_condition(&self) -> Condition {
        self.conditions
            .iter()
            .fold(&self.conditions[0], |best, r| {
                if r.max_violation > best.max_violation {
                    r
                } else {
                    best
                }
            })
            .name
    }

    pub fn max_violation(&self) -> f64 {
        self.conditions.iter().map(|r| r.max_violation).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

/// Axis-aligned box in `(x, v)` space.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub x: Vec<(f64, f64)>,
    pub v: Vec<(f64, f64)>,
}

impl Region {
    /// `[lo, hi]ⁿ × [lo, hi]ⁿ`
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Self {
            x: vec![(lo, hi); n],
            v: vec![(lo, hi); n],
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Shrinks the box so that every branch state of `sys`, including the
    /// finite-difference stencil around it, stays inside its curve domain.
    pub fn clipped_to(&self, sys: &LagrangianSystem) -> Self {
        let (xb, vb) = sys.safe_bounds();
        let clip = |(lo, hi): (f64, f64), bound: f64| {
            if bound.is_infinite() {
                return (lo, hi);
            }
            let b = 0.999 * bound - 1e-3 * (1.0 + bound).min(1.0);
            (lo.max(-b), hi.min(b))
        };
        Self {
            x: self.x.iter().zip(&xb).map(|(r, b)| clip(*r, *b)).collect(),
            v: self.v.iter().zip(&vb).map(|(r, b)| clip(*r, *b)).collect(),
        }
    }

    /// The default box `[−1, 1]²ⁿ` intersected with the system's domains.
    pub fn default_for(sys: &LagrangianSystem) -> Self {
        Self::cube(sys.n(), -1.0, 1.0).clipped_to(sys)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    pub samples: usize,
    pub tol: f64,
    /// Relative finite-difference step `s`.
    pub step_scale: f64,
    /// Random shift of the Halton sequence; `None` uses the plain sequence.
    pub seed: Option<u64>,
    /// Time at which `A` and `B` are evaluated.
    pub time: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            step_scale: DEFAULT_STEP_SCALE,
            seed: None,
            time: 0.0,
        }
    }
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = 2u64;
    while out.len() < count {
        if (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            out.push(p);
        }
        p += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `count` points of the `dim`-dimensional Halton sequence in `[0, 1)`,
/// optionally with a Cranley–Patterson random shift.
pub fn halton_points(dim: usize, count: usize, seed: Option<u64>) -> Vec<Vec<f64>> {
    let bases = primes(dim);
    let shift: Vec<f64> = match seed {
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..dim).map(|_| rng.gen::<f64>()).collect()
        }
        None => vec![0.0; dim],
    };
    (1..=count as u64)
        .map(|i| {
            bases
                .iter()
                .zip(&shift)
                .map(|(b, s)| (radical_inverse(i, *b) + s).fract())
                .collect()
        })
        .collect()
}

struct Tracker {
    max: f64,
    point: SamplePoint,
}

impl Tracker {
    fn new(n: usize) -> Self {
        Self {
            max: 0.0,
            point: SamplePoint {
                x: vec![0.0; n],
                v: vec![0.0; n],
            },
        }
    }

    fn record(&mut self, violation: f64, x: &[f64], v: &[f64]) {
        if violation > self.max || (self.max == 0.0 && violation.is_nan()) {
            self.max = violation;
            self.point = SamplePoint {
                x: x.to_vec(),
                v: v.to_vec(),
            };
        }
    }
}

/// Evaluates the four conditions at `samples` points of `region`.
pub fn check_self_adjoint(ab: &ABDecomposition, region: &Region, opts: &CheckOptions) -> Result<SAReport> {
    let n = ab.n();
    if region.x.len() != n || region.v.len() != n {
        return Err(Error::Mismatch(format!(
            "region has {}+{} axes, system has {n} coordinates",
            region.x.len(),
            region.v.len()
        )));
    }
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("at least one sample point is required".into()));
    }
    if !(opts.tol > 0.0) || !(opts.step_scale > 0.0) {
        return Err(Error::InvalidArgument("tolerance and step scale must be positive".into()));
    }
    for (lo, hi) in region.x.iter().chain(&region.v) {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("empty or unbounded region axis [{lo}, {hi}]")));
        }
    }

    let mut trackers: Vec<Tracker> = (0..4).map(|_| Tracker::new(n)).collect();
    for unit in halton_points(2 * n, opts.samples, opts.seed) {
        let x: Vec<f64> = (0..n)
            .map(|i| region.x[i].0 + unit[i] * (region.x[i].1 - region.x[i].0))
            .collect();
        let v: Vec<f64> = (0..n)
            .map(|i| region.v[i].0 + unit[n + i] * (region.v[i].1 - region.v[i].0))
            .collect();
        let violations = point_violations(ab, &x, &v, opts).map_err(|e| match e {
            Error::NonFinite(_) => e,
            other => Error::SamplePoint {
                x: x.clone(),
                v: v.clone(),
                source: Box::new(other),
            },
        })?;
        for (tracker, value) in trackers.iter_mut().zip(violations) {
            tracker.record(value, &x, &v);
        }
    }

    let conditions: Vec<ConditionResult> = Condition::ALL
        .iter()
        .zip(trackers)
        .map(|(c, t)| ConditionResult {
            name: *c,
            max_violation: t.max,
            worst_point: t.point,
        })
        .collect();
    let ok = conditions.iter().all(|c| c.max_violation <= opts.tol);
    Ok(SAReport {
        verdict: if ok {
            Verdict::SelfAdjoint
        } else {
            Verdict::NotSelfAdjoint
        },
        conditions,
        samples: opts.samples,
        tol: opts.tol,
    })
}

fn finite_matrix(m: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(m)
    } else {
        Err(Error::NonFinite(format!("{what} contains non-finite entries")))
    }
}

fn finite_vector(m: DVector<f64>, what: &str) -> Result<DVector<f64>> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(m)
    } else {
        Err(Error::NonFinite(format!("{what} contains non-finite entries")))
    }
}

/// `∂B/∂v` as a matrix `J[i][j] = ∂B_i/∂vʲ` at `(x, v)`.
fn b_velocity_jacobian(ab: &ABDecomposition, x: &[f64], v: &[f64], t: f64, s: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut vp = v.to_vec();
    for j in 0..n {
        let h = s * (1.0 + v[j].abs());
        vp[j] = v[j] + h;
        let plus = finite_vector(ab.b(x, &vp, t)?, "B")?;
        vp[j] = v[j] - h;
        let minus = finite_vector(ab.b(x, &vp, t)?, "B")?;
        vp[j] = v[j];
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn point_violations(ab: &ABDecomposition, x: &[f64], v: &[f64], opts: &CheckOptions) -> Result<[f64; 4]> {
    let n = x.len();
    let t = opts.time;
    let s = opts.step_scale;
    let a0 = finite_matrix(ab.a(x, v, t)?, "A")?;

    // ∂A/∂vʲ and ∂A/∂xᵏ
    let mut da_dv = Vec::with_capacity(n);
    let mut da_dx = Vec::with_capacity(n);
    let mut db_dx = Vec::with_capacity(n);
    let (mut xp, mut vp) = (x.to_vec(), v.to_vec());
    for j in 0..n {
        let h = s * (1.0 + v[j].abs());
        vp[j] = v[j] + h;
        let plus = finite_matrix(ab.a(x, &vp, t)?, "A")?;
        vp[j] = v[j] - h;
        let minus = finite_matrix(ab.a(x, &vp, t)?, "A")?;
        vp[j] = v[j];
        da_dv.push((plus - minus) / (2.0 * h));

        let h = s * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let a_plus = finite_matrix(ab.a(&xp, v, t)?, "A")?;
        let b_plus = finite_vector(ab.b(&xp, v, t)?, "B")?;
        xp[j] = x[j] - h;
        let a_minus = finite_matrix(ab.a(&xp, v, t)?, "A")?;
        let b_minus = finite_vector(ab.b(&xp, v, t)?, "B")?;
        xp[j] = x[j];
        da_dx.push((a_plus - a_minus) / (2.0 * h));
        db_dx.push((b_plus - b_minus) / (2.0 * h));
    }
    let db_dv = b_velocity_jacobian(ab, x, v, t, s)?;

    let mut sym: f64 = 0.0;
    let mut compat: f64 = 0.0;
    let mut curl: f64 = 0.0;
    let mut bv_sym: f64 = 0.0;

    for i in 0..n {
        for j in 0..n {
            if j > i {
                sym = sym.max((a0[(i, j)] - a0[(j, i)]).abs());
                for k in 0..n {
                    compat = compat.max((da_dv[j][(i, k)] - da_dv[i][(j, k)]).abs());
                }
            }
            if j >= i {
                let rhs: f64 = (0..n).map(|k| da_dx[k][(i, j)] * v[k]).sum::<f64>() * 2.0;
                let lhs = db_dv[(i, j)] + db_dv[(j, i)];
                bv_sym = bv_sym.max((lhs - rhs).abs());
            }
        }
    }

    if n > 1 {
        // Directional derivative of S_ij = ∂B_i/∂vʲ − ∂B_j/∂vⁱ along v.
        let speed = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let directional = if speed > 0.0 {
            // Nested differences amplify round-off by 1/h²; a wider step
            // keeps it well below the tolerance.
            let s2 = NESTED_STEP_FACTOR * s;
            let h = s2 * (1.0 + x.iter().fold(0.0f64, |m, c| m.max(c.abs())));
            let shifted = |sign: f64| -> Vec<f64> { x.iter().zip(v).map(|(xi, vi)| xi + sign * h * vi).collect() };
            let plus = b_velocity_jacobian(ab, &shifted(1.0), v, t, s2)?;
            let minus = b_velocity_jacobian(ab, &shifted(-1.0), v, t, s2)?;
            Some((plus, minus, h))
        } else {
            None
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let lhs = db_dx[j][i] - db_dx[i][j];
                let rhs = match &directional {
                    Some((plus, minus, h)) => {
                        let s_plus = plus[(i, j)] - plus[(j, i)];
                        let s_minus = minus[(i, j)] - minus[(j, i)];
                        0.5 * (s_plus - s_minus) / (2.0 * h)
                    }
                    None => 0.0,
                };
                curl = curl.max((lhs - rhs).abs());
            }
        }
    }

    Ok([sym, compat, curl, bv_sym])
}
