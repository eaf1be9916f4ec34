use serde::Serialize;

use super::integrate::{integrate, Method, Stats};
use crate::error::{Error, Result};
use crate::lagrangian::{FirstOrderSystem, LagrangianSystem};
use crate::netlist::Formulation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorInfo {
    #[serde(flatten)]
    pub method: Method,
    #[serde(flatten)]
    pub stats: Stats,
}

/// Coordinates, velocities and accelerations on the accepted time grid.
/// Each of `x`, `v`, `a` holds one row per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub formulation: Formulation,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    pub info: IntegratorInfo,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn series(rows: &[Vec<f64>], i: usize) -> Vec<f64> {
        rows.iter().map(|r| r[i]).collect()
    }

    /// Time series of coordinate `i` (0-based).
    pub fn coord(&self, i: usize) -> Vec<f64> {
        Self::series(&self.x, i)
    }

    pub fn velocity(&self, i: usize) -> Vec<f64> {
        Self::series(&self.v, i)
    }

    pub fn acceleration(&self, i: usize) -> Vec<f64> {
        Self::series(&self.a, i)
    }
}

/// Integrates the explicit form of a circuit from `(x0, v0)`.
///
/// Velocities of first-order coordinates in `v0` are ignored; they follow
/// from the algebraic rows. Accelerations are reconstructed from the
/// right-hand side at every grid point.
pub fn simulate(fo: &FirstOrderSystem, x0: &[f64], v0: &[f64], t_span: (f64, f64), method: Method) -> Result<Trajectory> {
    let y0 = fo.initial_state(x0, v0)?;
    let sol = integrate(fo, &y0, t_span, method)?;
    let n = fo.system().n();
    let mut traj = Trajectory {
        formulation: fo.system().formulation(),
        t: sol.t.clone(),
        x: Vec::with_capacity(sol.t.len()),
        v: Vec::with_capacity(sol.t.len()),
        a: Vec::with_capacity(sol.t.len()),
        info: IntegratorInfo {
            method: sol.method,
            stats: sol.stats,
        },
    };
    for (t, y) in sol.t.iter().zip(&sol.y) {
        let (v, a) = fo.kinematics(*t, y).map_err(|e| Error::DomainExit {
            t: *t,
            source: Box::new(e),
        })?;
        traj.x.push(y[..n].to_vec());
        traj.v.push(v);
        traj.a.push(a);
    }
    Ok(traj)
}

/// Largest violation of the integrated Kirchhoff laws, `max |A a + B|`, over
/// all grid points and coordinates.
pub fn ikvl_residual(sys: &LagrangianSystem, traj: &Trajectory) -> Result<f64> {
    if traj.n() != sys.n() && !traj.is_empty() {
        return Err(Error::Mismatch(format!(
            "trajectory has {} coordinates, system has {}",
            traj.n(),
            sys.n()
        )));
    }
    let mut worst: f64 = 0.0;
    for k in 0..traj.len() {
        let r = sys.el_residual(&traj.x[k], &traj.v[k], &traj.a[k], traj.t[k])?;
        worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lagrangian::{build_system, to_first_order};
    use crate::netlist::parse;

    const LC: &str = "circuit \"lc\" formulation loop coords 1
element L1 L value=1 coords +1
element C1 C value=1 coords +1
";

    fn lc() -> FirstOrderSystem {
        to_first_order(Arc::new(build_system(&parse(LC).unwrap()).unwrap())).unwrap()
    }

    #[test]
    fn lc_cosine() {
        let fo = lc();
        let traj = simulate(&fo, &[1.0], &[0.0], (0.0, std::f64::consts::TAU), Method::Rk4 { h: 1e-3 }).unwrap();
        assert!((traj.x.last().unwrap()[0] - 1.0).abs() < 1e-6);
        assert!(ikvl_residual(fo.system(), &traj).unwrap() <= 1e-8);
        assert_eq!(traj.info.method.name(), "rk4");
        for k in (0..traj.len()).step_by(500) {
            assert!((traj.x[k][0] - traj.t[k].cos()).abs() < 1e-9);
            assert!((traj.a[k][0] + traj.x[k][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_has_zero_residual() {
        let fo = lc();
        let traj = simulate(&fo, &[0.0], &[0.0], (0.0, 3.0), Method::default()).unwrap();
        assert!(traj.x.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(ikvl_residual(fo.system(), &traj).unwrap(), 0.0);
    }

    #[test]
    fn corrupted_trajectory_is_detected() {
        let fo = lc();
        let mut traj = simulate(&fo, &[1.0], &[0.0], (0.0, std::f64::consts::TAU), Method::Rk4 { h: 1e-3 }).unwrap();
        for row in &mut traj.x {
            row[0] *= 2.0;
        }
        let r = ikvl_residual(fo.system(), &traj).unwrap();
        assert!((r - 1.0).abs() < 1e-6, "{r}");
    }
}
