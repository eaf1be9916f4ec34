//! Explicit Runge–Kutta integrators.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrangian::OdeSystem;

/// Steps allowed per run before giving up.
pub const MAX_STEPS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with fixed step `h`.
    Rk4 { h: f64 },
    /// Dormand–Prince 5(4) with PI step control.
    Rk45 { rtol: f64, atol: f64 },
}

impl Method {
    pub const DEFAULT_RTOL: f64 = 1e-8;
    pub const DEFAULT_ATOL: f64 = 1e-10;

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Rk45 { .. } => "rk45",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Method::Rk4 { h } => h > 0.0 && h.is_finite(),
            Method::Rk45 { rtol, atol } => rtol >= 0.0 && atol >= 0.0 && rtol + atol > 0.0 && (rtol + atol).is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid integrator controls {self:?}")))
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Rk45 {
            rtol: Self::DEFAULT_RTOL,
            atol: Self::DEFAULT_ATOL,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Rk4 { h } => write!(f, "rk4 h={h:e}"),
            Method::Rk45 { rtol, atol } => write!(f, "rk45 rtol={rtol:e} atol={atol:e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Accepted grid of an integration run with derivatives for dense output.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub dy: Vec<Vec<f64>>,
    pub method: Method,
    pub stats: Stats,
}

impl Solution {
    pub fn last(&self) -> &[f64] {
        self.y.last().expect("solution has at least one point")
    }

    /// Cubic Hermite interpolation between grid points.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = (self.t[0], *self.t.last().unwrap());
        if !(t >= t0 && t <= t1) {
            return Err(Error::InvalidArgument(format!("t = {t} outside the solution span [{t0}, {t1}]")));
        }
        if self.t.len() == 1 {
            return Ok(self.y[0].clone());
        }
        let k = match self.t.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(k) => return Ok(self.y[k].clone()),
            Err(k) => k.clamp(1, self.t.len() - 1) - 1,
        };
        let h = self.t[k + 1] - self.t[k];
        let s = (t - self.t[k]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Ok((0..self.y[k].len())
            .map(|i| {
                h00 * self.y[k][i] + h10 * h * self.dy[k][i] + h01 * self.y[k + 1][i] + h11 * h * self.dy[k + 1][i]
            })
            .collect())
    }

    /// Resamples onto `grid`, which must lie within the solution span.
    pub fn resample(&self, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
        grid.iter().map(|&t| self.interpolate(t)).collect()
    }
}

/// `count` equally spaced points spanning `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![t0],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    t1
                } else {
                    t0 + (t1 - t0) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn eval(sys: &dyn OdeSystem, t: f64, y: &[f64], dy: &mut [f64], stats: &mut Stats) -> Result<()> {
    stats.rhs_evals += 1;
    sys.rhs(t, y, dy)?;
    if dy.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("right-hand side at t = {t}")))
    }
}

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Integrates `y' = f(t, y)` from `y0` over `t_span`.
pub fn integrate(sys: &dyn OdeSystem, y0: &[f64], t_span: (f64, f64), method: Method) -> Result<Solution> {
    let (t0, t1) = t_span;
    check_inputs(sys, y0, t_span, method)?;
    match method {
        Method::Rk4 { h } => rk4(sys, y0, t0, t1, h),
        Method::Rk45 { rtol, atol } => dopri5(sys, y0, t0, t1, rtol, atol, &[]),
    }
}

fn check_inputs(sys: &dyn OdeSystem, y0: &[f64], (t0, t1): (f64, f64), method: Method) -> Result<()> {
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument(format!("time span [{t0}, {t1}] must satisfy t1 > t0")));
    }
    if y0.len() != sys.dim() {
        return Err(Error::Mismatch(format!(
            "initial state has {} entries, system dimension is {}",
            y0.len(),
            sys.dim()
        )));
    }
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    method.validate()
}

/// Integrates and reports the state at each time of `grid`, which must be
/// increasing and start at the initial time. The adaptive method steps onto
/// every grid time exactly; the fixed-step method interpolates.
pub fn integrate_on(sys: &dyn OdeSystem, y0: &[f64], grid: &[f64], method: Method) -> Result<Vec<Vec<f64>>> {
    if grid.len() < 2 || !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("output grid must be increasing with at least two points".into()));
    }
    let (t0, t1) = (grid[0], grid[grid.len() - 1]);
    let sol = match method {
        Method::Rk45 { rtol, atol } => {
            check_inputs(sys, y0, (t0, t1), method)?;
            dopri5(sys, y0, t0, t1, rtol, atol, &grid[1..])?
        }
        Method::Rk4 { .. } => integrate(sys, y0, (t0, t1), method)?,
    };
    sol.resample(grid)
}

fn domain_exit(t: f64, e: Error) -> Error {
    match e {
        Error::NonFinite(_) | Error::DomainExit { .. } => e,
        other => Error::DomainExit {
            t,
            source: Box::new(other),
        },
    }
}

fn rk4(sys: &dyn OdeSystem, y0: &[f64], t0: f64, t1: f64, h: f64) -> Result<Solution> {
    let n = y0.len();
    let span = t1 - t0;
    let steps = (span / h - 1e-9).ceil().max(1.0);
    if steps > MAX_STEPS as f64 {
        return Err(Error::StepBudget { t: t0, steps: MAX_STEPS });
    }
    let steps = steps as usize;
    let mut stats = Stats::default();
    let mut t_grid = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    let mut dys = Vec::with_capacity(steps + 1);

    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    eval(sys, t0, &y, &mut k1, &mut stats).map_err(|e| domain_exit(t0, e))?;
    let (mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    t_grid.push(t0);
    ys.push(y.clone());
    dys.push(k1.clone());

    for step in 0..steps {
        let t = t0 + step as f64 * h;
        let t_next = if step + 1 == steps { t1 } else { t0 + (step + 1) as f64 * h };
        let hk = t_next - t;
        let fail = |e| domain_exit(t, e);
        axpy(&mut tmp, &y, 0.5 * hk, &[(1.0, &k1)]);
        eval(sys, t + 0.5 * hk, &tmp, &mut k2, &mut stats).map_err(fail)?;
        axpy(&mut tmp, &y, 0.5 * hk, &[(1.0, &k2)]);
        eval(sys, t + 0.5 * hk, &tmp, &mut k3, &mut stats).map_err(fail)?;
        axpy(&mut tmp, &y, hk, &[(1.0, &k3)]);
        eval(sys, t_next, &tmp, &mut k4, &mut stats).map_err(fail)?;
        for i in 0..n {
            y[i] += hk / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("state at t = {t_next}")));
        }
        eval(sys, t_next, &y, &mut k1, &mut stats).map_err(|e| domain_exit(t_next, e))?;
        stats.steps += 1;
        t_grid.push(t_next);
        ys.push(y.clone());
        dys.push(k1.clone());
    }
    Ok(Solution {
        t: t_grid,
        y: ys,
        dy: dys,
        method: Method::Rk4 { h },
        stats,
    })
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn rms(v: &[f64], y: &[f64], rtol: f64, atol: f64) -> f64 {
    let s: f64 = v
        .iter()
        .zip(y)
        .map(|(e, yi)| {
            let w = atol + rtol * yi.abs();
            (e / w).powi(2)
        })
        .sum();
    (s / v.len().max(1) as f64).sqrt()
}

fn initial_step(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    rtol: f64,
    atol: f64,
    span: f64,
    stats: &mut Stats,
) -> f64 {
    let d0 = rms(y0, y0, rtol, atol);
    let d1 = rms(f0, y0, rtol, atol);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    if eval(sys, t0 + h0, &y1, &mut f1, stats).is_err() {
        return h0 * 1e-3;
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff, y0, rtol, atol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

fn dopri5(
    sys: &dyn OdeSystem,
    y0: &[f64],
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    stops: &[f64],
) -> Result<Solution> {
    const SAFETY: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - BETA * 0.75;

    let n = y0.len();
    let span = t1 - t0;
    let h_min = 1e-14 * span;
    let mut stats = Stats::default();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    eval(sys, t0, &y, &mut k[0], &mut stats).map_err(|e| domain_exit(t0, e))?;

    let mut t = t0;
    let mut h = initial_step(sys, t0, &y, &k[0].clone(), rtol, atol, span, &mut stats);
    let mut err_old: f64 = 1e-4;
    let mut last_failure: Option<Error> = None;

    let mut t_grid = vec![t0];
    let mut ys = vec![y.clone()];
    let mut dys = vec![k[0].clone()];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err_vec = vec![0.0; n];
    let mut next_stop = 0;

    while t < t1 {
        while next_stop < stops.len() && stops[next_stop] <= t {
            next_stop += 1;
        }
        let target = stops.get(next_stop).copied().unwrap_or(t1).min(t1);
        if stats.steps + stats.rejected >= MAX_STEPS {
            return Err(Error::StepBudget { t, steps: MAX_STEPS });
        }
        if h < h_min {
            return Err(match last_failure.take() {
                Some(e) => domain_exit(t, e),
                None => Error::StepUnderflow { t, h },
            });
        }
        let last = t + h >= target || target - (t + h) < h_min;
        let h_step = if last { target - t } else { h };

        let staged: Result<()> = (|| {
            let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
            for (s, row) in rows.iter().enumerate() {
                let terms: Vec<(f64, &[f64])> = row.iter().zip(&k).map(|(a, ki)| (*a, ki.as_slice())).collect();
                axpy(&mut stage, &y, h_step, &terms);
                let (_, rest) = k.split_at_mut(s + 1);
                eval(sys, t + C[s + 1] * h_step, &stage, &mut rest[0], &mut stats)?;
            }
            let terms: Vec<(f64, &[f64])> = B.iter().zip(&k).map(|(b, ki)| (*b, ki.as_slice())).collect();
            axpy(&mut y_new, &y, h_step, &terms);
            if !y_new.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("state at t = {}", t + h_step)));
            }
            let (_, rest) = k.split_at_mut(6);
            eval(sys, t + h_step, &y_new, &mut rest[0], &mut stats)
        })();

        if let Err(e) = staged {
            // A trial stage outside the domain: retry with a smaller step.
            stats.rejected += 1;
            last_failure = Some(e);
            h = 0.25 * h_step;
            continue;
        }

        for i in 0..n {
            err_vec[i] = h_step * E.iter().zip(&k).map(|(e, ki)| e * ki[i]).sum::<f64>();
        }
        let scale: Vec<f64> = y.iter().zip(&y_new).map(|(a, b)| a.abs().max(b.abs())).collect();
        let err = rms(&err_vec, &scale, rtol, atol);

        if err <= 1.0 {
            let fac = (err.powf(EXPO) / err_old.powf(BETA) / SAFETY).clamp(0.2, 10.0);
            err_old = err.max(1e-4);
            t = if last { target } else { t + h_step };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            stats.steps += 1;
            t_grid.push(t);
            ys.push(y.clone());
            dys.push(k[0].clone());
            last_failure = None;
            h = if last && h_step < h { h.max(h_step / fac) } else { h_step / fac };
        } else {
            stats.rejected += 1;
            h = h_step / (err.powf(EXPO) / SAFETY).min(5.0);
        }
    }

    Ok(Solution {
        t: t_grid,
        y: ys,
        dy: dys,
        method: Method::Rk45 { rtol, atol },
        stats,
    })
}
