//! One-dimensional constitutive relations.
//!
//! A [`ScalarCurve`] is a strictly increasing map `y = f(x)` on a closed,
//! finite interval. Two representations are supported, both of which admit
//! exact derivatives, antiderivatives and inverses:
//!
//! * polynomials in ascending coefficient order, and
//! * piecewise-linear interpolants through sorted breakpoints.
//!
//! All antiderivatives are taken from the origin, so a curve whose domain
//! contains 0 must pass through it.

use std::fmt;

use crate::error::{Error, Result};

/// Default half-width of a polynomial curve's domain.
pub const DEFAULT_POLY_BOUND: f64 = 1e6;

/// Number of interior points used to verify monotonicity of a polynomial.
const MONOTONE_SAMPLES: usize = 4096;

/// Internal representation of a curve.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveRepr {
    /// `y = c0 + c1 x + c2 x^2 + ...`
    Polynomial(Vec<f64>),
    /// Linear interpolation between `(x_k, y_k)` breakpoints.
    PiecewiseLinear(Vec<(f64, f64)>),
}

/// A strictly increasing scalar curve on a closed interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarCurve {
    repr: CurveRepr,
    domain: (f64, f64),
    /// Whether the domain was given explicitly (kept for the canonical literal).
    explicit_domain: bool,
}

impl ScalarCurve {
    /// Polynomial curve on the default domain `[-1e6, 1e6]`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Self::build(
            CurveRepr::Polynomial(coeffs),
            (-DEFAULT_POLY_BOUND, DEFAULT_POLY_BOUND),
            false,
        )
    }

    /// Polynomial curve on an explicit domain.
    pub fn polynomial_on(coeffs: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        Self::build(CurveRepr::Polynomial(coeffs), domain, true)
    }

    /// Piecewise-linear curve whose domain is the breakpoint hull.
    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        let domain = match (points.first(), points.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => return Err(Error::InvalidCurve("pwl curve needs at least two breakpoints".into())),
        };
        Self::build(CurveRepr::PiecewiseLinear(points), domain, false)
    }

    /// Piecewise-linear curve restricted to a sub-interval of its hull.
    pub fn piecewise_linear_on(points: Vec<(f64, f64)>, domain: (f64, f64)) -> Result<Self> {
        Self::build(CurveRepr::PiecewiseLinear(points), domain, true)
    }

    /// Linear curve `y = slope * x` on the default polynomial domain.
    pub fn linear(slope: f64) -> Result<Self> {
        Self::polynomial(vec![0.0, slope])
    }

    fn build(repr: CurveRepr, domain: (f64, f64), explicit_domain: bool) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidCurve(format!(
                "domain [{lo}, {hi}] must be a finite, non-empty interval"
            )));
        }
        match &repr {
            CurveRepr::Polynomial(c) => {
                if c.is_empty() {
                    return Err(Error::InvalidCurve("polynomial has no coefficients".into()));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidCurve("non-finite polynomial coefficient".into()));
                }
            }
            CurveRepr::PiecewiseLinear(p) => {
                if p.len() < 2 {
                    return Err(Error::InvalidCurve(
                        "pwl curve needs at least two breakpoints".into(),
                    ));
                }
                if p.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return Err(Error::InvalidCurve("non-finite pwl breakpoint".into()));
                }
                for w in p.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::InvalidCurve(format!(
                            "pwl breakpoints must be strictly increasing in x ({} then {})",
                            w[0].0, w[1].0
                        )));
                    }
                    if w[1].1 <= w[0].1 {
                        return Err(Error::InvalidCurve(format!(
                            "pwl segment [{}, {}] is not strictly increasing",
                            w[0].0, w[1].0
                        )));
                    }
                }
                let (first, last) = (p[0].0, p[p.len() - 1].0);
                if lo < first || hi > last {
                    return Err(Error::InvalidCurve(format!(
                        "domain [{lo}, {hi}] exceeds the breakpoint hull [{first}, {last}]"
                    )));
                }
            }
        }
        let curve = Self {
            repr,
            domain,
            explicit_domain,
        };
        if let CurveRepr::Polynomial(_) = curve.repr {
            curve.check_poly_monotone()?;
        }
        if curve.contains(0.0) {
            let y0 = curve.value_unchecked(0.0);
            if y0.abs() > 1e-12 * (1.0 + curve.output_scale()) {
                return Err(Error::InvalidCurve(format!(
                    "curve {curve} does not pass through the origin (f(0) = {y0})"
                )));
            }
        }
        Ok(curve)
    }

    fn check_poly_monotone(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        let step = (hi - lo) / MONOTONE_SAMPLES as f64;
        // Also probe around the origin, where the domain grid is coarse.
        let near_origin = (-64..=64).map(|k| k as f64 / 64.0).filter(|x| self.contains(*x));
        let grid = (0..=MONOTONE_SAMPLES).map(|k| lo + k as f64 * step);
        for x in grid.chain(near_origin) {
            let x = x.clamp(lo, hi);
            let d = self.deriv_unchecked(x);
            if !(d > 0.0) {
                return Err(Error::InvalidCurve(format!(
                    "curve {self} is not strictly increasing: derivative {d} at x = {x}"
                )));
            }
        }
        Ok(())
    }

    fn output_scale(&self) -> f64 {
        let (lo, hi) = self.domain;
        self.value_unchecked(lo)
            .abs()
            .max(self.value_unchecked(hi).abs())
            .min(1.0)
    }

    pub fn repr(&self) -> &CurveRepr {
        &self.repr
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Range of the curve over its domain.
    pub fn range(&self) -> (f64, f64) {
        (
            self.value_unchecked(self.domain.0),
            self.value_unchecked(self.domain.1),
        )
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    /// True when the curve is `y = k x` for some constant `k`.
    pub fn is_linear(&self) -> bool {
        match &self.repr {
            CurveRepr::Polynomial(c) => c.iter().skip(2).all(|v| *v == 0.0),
            CurveRepr::PiecewiseLinear(_) => false,
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                curve: self.to_string(),
                x,
                lo: self.domain.0,
                hi: self.domain.1,
            })
        }
    }

    /// Evaluates `f(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.value_unchecked(x))
    }

    /// First derivative. Piecewise-linear curves use the right-hand slope at
    /// breakpoints (the last segment's slope at the upper end).
    pub fn deriv(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.deriv_unchecked(x))
    }

    /// Second derivative (identically zero for piecewise-linear curves).
    pub fn deriv2(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.repr {
            CurveRepr::Polynomial(c) => horner_derivative(c, x, 2),
            CurveRepr::PiecewiseLinear(_) => 0.0,
        })
    }

    /// Third derivative (identically zero for piecewise-linear curves).
    pub fn deriv3(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.repr {
            CurveRepr::Polynomial(c) => horner_derivative(c, x, 3),
            CurveRepr::PiecewiseLinear(_) => 0.0,
        })
    }

    /// `∫₀ˣ f(s) ds`, the area between the curve and the input axis.
    pub fn antideriv(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        self.check_origin()?;
        Ok(match &self.repr {
            CurveRepr::Polynomial(c) => {
                // Σ c_k x^{k+1}/(k+1), evaluated by Horner.
                let mut acc = 0.0;
                for (k, ck) in c.iter().enumerate().rev() {
                    acc = acc * x + ck / (k + 1) as f64;
                }
                acc * x
            }
            CurveRepr::PiecewiseLinear(p) => pwl_area(p, 0.0, x),
        })
    }

    /// `∫₀ʸ f⁻¹(s) ds`, the complementary area between the curve and the
    /// output axis. Computed without reference to [`ScalarCurve::antideriv`]:
    /// polynomials use the substitution `s = f(u)`, which turns the integral
    /// into the closed form `∫₀^{f⁻¹(y)} u f'(u) du`; piecewise-linear
    /// curves integrate the swapped breakpoint list.
    pub fn co_antideriv(&self, y: f64) -> Result<f64> {
        self.check_origin()?;
        match &self.repr {
            CurveRepr::Polynomial(c) => {
                let u = self.inverse(y)?;
                // ∫ u f'(u) du = Σ_{k≥1} k c_k u^{k+1}/(k+1)
                let mut acc = 0.0;
                for (k, ck) in c.iter().enumerate().skip(1).rev() {
                    acc = acc * u + (k as f64) * ck / (k + 1) as f64;
                }
                Ok(acc * u * u)
            }
            CurveRepr::PiecewiseLinear(p) => {
                let (lo, hi) = self.range();
                if !(y >= lo && y <= hi) {
                    return Err(Error::OutOfRange { y, lo, hi });
                }
                let swapped: Vec<(f64, f64)> = p.iter().map(|(x, y)| (*y, *x)).collect();
                Ok(pwl_area(&swapped, 0.0, y))
            }
        }
    }

    /// Solves `f(x) = y` for `x`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        let (ylo, yhi) = self.range();
        if !(y >= ylo && y <= yhi) {
            return Err(Error::OutOfRange { y, lo: ylo, hi: yhi });
        }
        match &self.repr {
            CurveRepr::PiecewiseLinear(p) => {
                let k = p.partition_point(|(_, yk)| *yk <= y).clamp(1, p.len() - 1);
                let (x0, y0) = p[k - 1];
                let (x1, y1) = p[k];
                Ok((x0 + (y - y0) * (x1 - x0) / (y1 - y0)).clamp(lo, hi))
            }
            CurveRepr::Polynomial(_) => Ok(self.newton_bisect(y)),
        }
    }

    /// Safeguarded Newton iteration on a bracket that always contains the root.
    fn newton_bisect(&self, y: f64) -> f64 {
        let tol = 1e-12 * (1.0 + y.abs());
        let (mut a, mut b) = self.domain;
        let mut x = if self.contains(0.0) { 0.0 } else { 0.5 * (a + b) };
        let mut best = (f64::INFINITY, x);
        for _ in 0..400 {
            let r = self.value_unchecked(x) - y;
            if r.abs() < best.0 {
                best = (r.abs(), x);
            }
            if r.abs() <= tol {
                // One extra Newton step polishes to the last few ulps.
                let d = self.deriv_unchecked(x);
                let polished = x - r / d;
                if polished >= a
                    && polished <= b
                    && (self.value_unchecked(polished) - y).abs() <= r.abs()
                {
                    return polished;
                }
                return x;
            }
            if r < 0.0 {
                a = x;
            } else {
                b = x;
            }
            let d = self.deriv_unchecked(x);
            let newton = x - r / d;
            x = if d > 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if b - a <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
                break;
            }
        }
        best.1
    }

    fn check_origin(&self) -> Result<()> {
        if self.contains(0.0) {
            Ok(())
        } else {
            Err(Error::InvalidCurve(format!(
                "curve {self}: integration base point 0 lies outside the domain"
            )))
        }
    }

    pub(crate) fn value_unchecked(&self, x: f64) -> f64 {
        match &self.repr {
            CurveRepr::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ck| acc * x + ck),
            CurveRepr::PiecewiseLinear(p) => {
                let k = segment_index(p, x);
                let (x0, y0) = p[k];
                let (x1, y1) = p[k + 1];
                y0 + (x - x0) * (y1 - y0) / (x1 - x0)
            }
        }
    }

    pub(crate) fn deriv_unchecked(&self, x: f64) -> f64 {
        match &self.repr {
            CurveRepr::Polynomial(c) => horner_derivative(c, x, 1),
            CurveRepr::PiecewiseLinear(p) => {
                let k = segment_index(p, x);
                (p[k + 1].1 - p[k].1) / (p[k + 1].0 - p[k].0)
            }
        }
    }
}

/// Index of the segment `[x_k, x_{k+1})` containing `x`; the right-hand
/// segment is chosen at interior breakpoints.
fn segment_index(p: &[(f64, f64)], x: f64) -> usize {
    p.partition_point(|(xk, _)| *xk <= x).clamp(1, p.len() - 1) - 1
}

/// `n`-th derivative of the polynomial with ascending coefficients `c` at `x`.
fn horner_derivative(c: &[f64], x: f64, n: usize) -> f64 {
    let mut acc = 0.0;
    for k in (n..c.len()).rev() {
        let falling: f64 = (0..n).map(|j| (k - j) as f64).product();
        acc = acc * x + falling * c[k];
    }
    acc
}

/// Signed area under the interpolant from `a` to `b`, both inside the hull.
fn pwl_area(p: &[(f64, f64)], a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let interp = |k: usize, x: f64| {
        let (x0, y0) = p[k];
        let (x1, y1) = p[k + 1];
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    };
    let mut area = 0.0;
    for k in 0..p.len() - 1 {
        let s0 = p[k].0.max(lo);
        let s1 = p[k + 1].0.min(hi);
        if s1 > s0 {
            area += 0.5 * (interp(k, s0) + interp(k, s1)) * (s1 - s0);
        }
    }
    sign * area
}

impl fmt::Display for ScalarCurve {
    /// Canonical curve literal, e.g. `poly(0,1,0,0.5)` or `pwl((-1,-2),(1,2))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            CurveRepr::Polynomial(c) => {
                write!(f, "poly(")?;
                for (k, ck) in c.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{ck:?}")?;
                }
                write!(f, ")")
            }
            CurveRepr::PiecewiseLinear(p) => {
                write!(f, "pwl(")?;
                for (k, (x, y)) in p.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({x:?},{y:?})")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl ScalarCurve {
    /// Canonical literal including an explicit `domain=[a,b]` suffix when the
    /// domain differs from the representation's default.
    pub fn literal(&self) -> String {
        if self.explicit_domain {
            format!("{self} domain=[{:?},{:?}]", self.domain.0, self.domain.1)
        } else {
            self.to_string()
        }
    }
}
