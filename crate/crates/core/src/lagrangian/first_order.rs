//! Reduction of `A a + B = 0` to an explicit first-order system.
//!
//! Coordinates with an inertial element keep `(x, v)` in the state and
//! are advanced with `a = −A⁻¹B` on the inertial block. The remaining
//! coordinates only appear through dissipative elements: their rows are
//! algebraic, `B_f(x, v) = 0`, and are solved for `v_f` at every evaluation
//! (a semi-explicit index-1 system).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::LagrangianSystem;
use crate::error::{Error, Result};

const DEGENERATE_CONDITION: f64 = 1e12;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_ITERS: usize = 60;
const SWEEPS: usize = 200;

/// Explicit first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Adapts a closure into an [`OdeSystem`].
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        (self.f)(t, y, dy)
    }
}

/// State layout: `[x₁ … xₙ, v_s₁ … v_sₖ]` where `s` runs over the
/// second-order coordinates in increasing order.
#[derive(Clone, Debug)]
pub struct FirstOrderSystem {
    sys: Arc<LagrangianSystem>,
    second: Vec<usize>,
    first: Vec<usize>,
}

/// Builds the explicit form of a Lagrangian system.
pub fn to_first_order(sys: Arc<LagrangianSystem>) -> Result<FirstOrderSystem> {
    let (second, first): (Vec<usize>, Vec<usize>) =
        (0..sys.n()).partition(|i| sys.second_order_mask()[*i]);
    Ok(FirstOrderSystem { sys, second, first })
}

impl FirstOrderSystem {
    pub fn system(&self) -> &LagrangianSystem {
        &self.sys
    }

    pub fn shared_system(&self) -> Arc<LagrangianSystem> {
        Arc::clone(&self.sys)
    }

    pub fn second_order_coords(&self) -> &[usize] {
        &self.second
    }

    pub fn first_order_coords(&self) -> &[usize] {
        &self.first
    }

    /// Packs coordinates and the velocities of second-order coordinates into
    /// a state vector. `v0` has one entry per coordinate; entries for
    /// first-order coordinates are ignored since they are determined by the
    /// algebraic rows.
    pub fn initial_state(&self, x0: &[f64], v0: &[f64]) -> Result<Vec<f64>> {
        let n = self.sys.n();
        if x0.len() != n || v0.len() != n {
            return Err(Error::Mismatch(format!(
                "initial state needs {n} coordinates and {n} velocities, got {} and {}",
                x0.len(),
                v0.len()
            )));
        }
        let mut y = x0.to_vec();
        y.extend(self.second.iter().map(|&i| v0[i]));
        Ok(y)
    }

    /// Full velocity vector at state `y`, solving the algebraic rows.
    pub fn velocities(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.sys.n();
        if y.len() != self.dim() {
            return Err(Error::Mismatch(format!("state has {} entries, expected {}", y.len(), self.dim())));
        }
        let x = &y[..n];
        let mut v = vec![0.0; n];
        for (k, &i) in self.second.iter().enumerate() {
            v[i] = y[n + k];
        }
        if !self.first.is_empty() {
            self.solve_algebraic(x, &mut v, t)?;
        }
        Ok(v)
    }

    /// `(v, a)` at state `y`. Accelerations of first-order coordinates come
    /// from differentiating their algebraic rows along the solution.
    pub fn kinematics(&self, t: f64, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.sys.n();
        let x = &y[..n];
        let v = self.velocities(t, y)?;
        let mut a = vec![0.0; n];
        let a_s = self.second_order_accel(x, &v, t)?;
        for (k, &i) in self.second.iter().enumerate() {
            a[i] = a_s[k];
        }
        if !self.first.is_empty() {
            let (bx, bv, bt) = self.sys.bias_jacobians(x, &v, t)?;
            let nf = self.first.len();
            let jac = DMatrix::from_fn(nf, nf, |r, c| bv[(self.first[r], self.first[c])]);
            let rhs = DVector::from_fn(nf, |r, _| {
                let i = self.first[r];
                let mut s = bt[i];
                for j in 0..n {
                    s += bx[(i, j)] * v[j];
                }
                for &j in &self.second {
                    s += bv[(i, j)] * a[j];
                }
                -s
            });
            let sol = jac
                .lu()
                .solve(&rhs)
                .ok_or(Error::AlgebraicRowUnsolvable { coord: self.first[0] + 1, t })?;
            for (k, &i) in self.first.iter().enumerate() {
                a[i] = sol[k];
            }
        }
        Ok((v, a))
    }

    fn second_order_accel(&self, x: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>> {
        if self.second.is_empty() {
            return Ok(Vec::new());
        }
        let inertia = self.sys.inertia(x, v, t)?;
        let bias = self.sys.bias(x, v, t)?;
        let ns = self.second.len();
        let block = DMatrix::from_fn(ns, ns, |r, c| inertia[(self.second[r], self.second[c])]);
        let rhs = DVector::from_fn(ns, |r, _| -bias[self.second[r]]);
        let condition = condition_number(&block);
        if !(condition <= DEGENERATE_CONDITION) {
            return Err(Error::DegenerateInertia { condition });
        }
        let sol = block
            .lu()
            .solve(&rhs)
            .ok_or(Error::DegenerateInertia { condition: f64::INFINITY })?;
        Ok(sol.iter().copied().collect())
    }

    fn row_residual(&self, x: &[f64], v: &[f64], t: f64, i: usize) -> Result<f64> {
        Ok(self.sys.bias(x, v, t)?[i])
    }

    /// Solves `B_f(x, v, t) = 0` for the first-order velocities in place.
    fn solve_algebraic(&self, x: &[f64], v: &mut [f64], t: f64) -> Result<()> {
        if self.newton_block(x, v, t).is_ok() {
            return Ok(());
        }
        for &i in &self.first {
            v[i] = 0.0;
        }
        // Coordinate-wise sweeps; each row is monotone in its own velocity.
        for _ in 0..SWEEPS {
            let mut max_step: f64 = 0.0;
            for &i in &self.first {
                let old = v[i];
                v[i] = self.scalar_root(x, v, t, i)?;
                max_step = max_step.max((v[i] - old).abs() / (1.0 + v[i].abs()));
            }
            if max_step <= NEWTON_TOL {
                return Ok(());
            }
        }
        Err(Error::AlgebraicRowUnsolvable {
            coord: self.first[0] + 1,
            t,
        })
    }

    fn newton_block(&self, x: &[f64], v: &mut [f64], t: f64) -> Result<()> {
        let nf = self.first.len();
        let fail = || Error::AlgebraicRowUnsolvable {
            coord: self.first[0] + 1,
            t,
        };
        let start: Vec<f64> = self.first.iter().map(|&i| v[i]).collect();
        for _ in 0..NEWTON_ITERS {
            let bias = self.sys.bias(x, v, t)?;
            let (_, bv, _) = self.sys.bias_jacobians(x, v, t)?;
            let jac = DMatrix::from_fn(nf, nf, |r, c| bv[(self.first[r], self.first[c])]);
            let f = DVector::from_fn(nf, |r, _| bias[self.first[r]]);
            let step = jac.lu().solve(&f).ok_or_else(fail)?;
            let mut converged = true;
            for (k, &i) in self.first.iter().enumerate() {
                v[i] -= step[k];
                if !v[i].is_finite() {
                    converged = false;
                    break;
                }
                if step[k].abs() > NEWTON_TOL * (1.0 + v[i].abs()) {
                    converged = false;
                }
            }
            if converged {
                return Ok(());
            }
        }
        for (k, &i) in self.first.iter().enumerate() {
            v[i] = start[k];
        }
        Err(fail())
    }

    /// Newton iteration safeguarded by bisection on row `i` alone.
    fn scalar_root(&self, x: &[f64], v: &mut [f64], t: f64, i: usize) -> Result<f64> {
        let fail = || Error::AlgebraicRowUnsolvable { coord: i + 1, t };
        let eval = |s: f64, v: &mut [f64]| -> Result<f64> {
            v[i] = s;
            self.row_residual(x, v, t, i).map_err(|_| fail())
        };
        let s0 = v[i];
        let f0 = eval(s0, v)?;
        if f0 == 0.0 {
            return Ok(s0);
        }
        // Expand a bracket away from s0 in the downhill direction.
        let dir = if f0 > 0.0 { -1.0 } else { 1.0 };
        let mut width = 1.0;
        let (mut lo, mut hi);
        let mut found = false;
        let mut other = s0;
        for _ in 0..200 {
            other = s0 + dir * width;
            let f = eval(other, v)?;
            if f.signum() != f0.signum() || f == 0.0 {
                found = true;
                break;
            }
            width *= 2.0;
        }
        if !found {
            return Err(fail());
        }
        if dir > 0.0 {
            lo = s0;
            hi = other;
        } else {
            lo = other;
            hi = s0;
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..400 {
            let f = eval(s, v)?;
            if f == 0.0 {
                return Ok(s);
            }
            if f < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let (_, bv, _) = self.sys.bias_jacobians(x, v, t)?;
            let d = bv[(i, i)];
            let newton = s - f / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - s).abs() <= NEWTON_TOL * (1.0 + s.abs()) || hi - lo <= 4.0 * f64::EPSILON * (1.0 + s.abs()) {
                return Ok(next);
            }
            s = next;
        }
        Err(fail())
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        let a = m[(0, 0)];
        return if a.is_finite() && a != 0.0 { 1.0 } else { f64::INFINITY };
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

impl OdeSystem for FirstOrderSystem {
    fn dim(&self) -> usize {
        self.sys.n() + self.second.len()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.sys.n();
        let v = self.velocities(t, y)?;
        let a_s = self.second_order_accel(&y[..n], &v, t)?;
        dy[..n].copy_from_slice(&v);
        dy[n..].copy_from_slice(&a_s);
        Ok(())
    }
}
