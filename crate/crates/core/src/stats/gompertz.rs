//! Gompertz growth curve `L(t) = A exp(-B exp(-C t))`.
//!
//! Fitting minimizes the plain sum of squared residuals with a damped
//! Gauss-Newton (Levenberg-Marquardt) iteration and an analytic Jacobian.
//! Observations are divided by `max(s)` internally so that `A` of any
//! magnitude is handled on a unit scale; the constraint `A >= max(s)` is
//! enforced by projection after every step.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::linreg::simple_ols;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GompertzFit {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub r2: f64,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GompertzFit {
    pub fn eval(&self, t: f64) -> f64 {
        gompertz(self.a, self.b, self.c, t)
    }
}

pub fn gompertz(a: f64, b: f64, c: f64, t: f64) -> f64 {
    a * (-b * (-c * t).exp()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GompertzOptions {
    pub max_iter: usize,
    /// Stop when the largest relative parameter change falls below this.
    pub rel_tol: f64,
}

impl Default for GompertzOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: 1e-10,
        }
    }
}

pub fn fit_gompertz(t: &[f64], s: &[f64]) -> Result<GompertzFit> {
    fit_gompertz_with(t, s, GompertzOptions::default())
}

pub fn fit_gompertz_with(t: &[f64], s: &[f64], opts: GompertzOptions) -> Result<GompertzFit> {
    if t.len() != s.len() {
        return Err(Error::Invariant("t and s differ in length".into()));
    }
    if t.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: t.len(),
        });
    }
    if let Some((index, &value)) = s
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::NonPositiveValue { index, value });
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite time value".into()));
    }
    let scale = s.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateInput("all observations are zero".into()));
    }
    let (tmin, tmax) = t
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if tmax == tmin {
        return Err(Error::DegenerateInput("all timestamps are equal".into()));
    }

    let y: Vec<f64> = s.iter().map(|v| v / scale).collect();
    let problem = Problem { t, y: &y };

    let mut starts = vec![problem.linearized_start()];
    starts.push(problem.profile_start(tmax - tmin));

    let mut best: Option<Solution> = None;
    for p0 in starts.into_iter().flatten() {
        let sol = problem.levenberg_marquardt(p0, opts);
        if best.as_ref().is_none_or(|b| sol.sse < b.sse) {
            best = Some(sol);
        }
    }
    let best = best.ok_or_else(|| {
        Error::DegenerateInput("no usable starting point (need positive observations)".into())
    })?;

    let mean_s = s.iter().sum::<f64>() / s.len() as f64;
    let sst: f64 = s.iter().map(|v| (v - mean_s).powi(2)).sum();
    let sse = best.sse * scale * scale;
    Ok(GompertzFit {
        a: best.p[0] * scale,
        b: best.p[1],
        c: best.p[2],
        r2: if sst > 0.0 { 1.0 - sse / sst } else { 1.0 },
        sse,
        iterations: best.iterations,
        converged: best.converged,
    })
}

struct Problem<'a> {
    t: &'a [f64],
    /// Observations divided by their maximum.
    y: &'a [f64],
}

struct Solution {
    p: Vector3<f64>,
    sse: f64,
    iterations: usize,
    converged: bool,
}

/// Largest magnitude allowed for `C * t` inside the inner exponential.
const MAX_EXPONENT: f64 = 700.0;

impl Problem<'_> {
    fn sse(&self, p: &Vector3<f64>) -> f64 {
        let mut acc = 0.0;
        for (&t, &y) in self.t.iter().zip(self.y) {
            let e = y - gompertz(p[0], p[1], p[2], t);
            acc += e * e;
        }
        if acc.is_finite() {
            acc
        } else {
            f64::INFINITY
        }
    }

    fn project(&self, mut p: Vector3<f64>) -> Vector3<f64> {
        // A >= max(s), which is 1 on the internal scale.
        if !(p[0] >= 1.0) {
            p[0] = 1.0;
        }
        p
    }

    fn in_range(&self, p: &Vector3<f64>) -> bool {
        p.iter().all(|v| v.is_finite())
            && self.t.iter().all(|&t| (p[2] * t).abs() < MAX_EXPONENT)
    }

    /// Start from `A = 1.05 max(s)`, `C` from the slope of the linearized
    /// data, and `B` solved from the first positive observation.
    fn linearized_start(&self) -> Option<Vector3<f64>> {
        let a0 = 1.05;
        let (lt, lz): (Vec<f64>, Vec<f64>) = self
            .t
            .iter()
            .zip(self.y)
            .filter(|(_, &y)| y > 0.0 && y < a0)
            .map(|(&t, &y)| (t, -(-(y / a0).ln()).ln()))
            .unzip();
        let c0 = match simple_ols(&lt, &lz) {
            Ok(fit) if fit.slope > 0.0 => fit.slope,
            _ => 1.0,
        };
        let (t0, y0) = self
            .t
            .iter()
            .zip(self.y)
            .find(|(_, &y)| y > 0.0)
            .map(|(&t, &y)| (t, y))?;
        let b0 = -(y0 / a0).ln() * (c0 * t0).exp();
        let p = Vector3::new(a0, b0, c0);
        self.in_range(&p).then_some(p)
    }

    /// For each `C` on a log grid, `ln L = ln A - B exp(-C t)` is linear in
    /// `(ln A, B)`; keep the grid point whose closed-form fit has the
    /// smallest residual sum of squares on the original scale.
    fn profile_start(&self, t_range: f64) -> Option<Vector3<f64>> {
        let pos: Vec<(f64, f64)> = self
            .t
            .iter()
            .zip(self.y)
            .filter(|(_, &y)| y > 0.0)
            .map(|(&t, &y)| (t, y.ln()))
            .collect();
        if pos.len() < 3 {
            return None;
        }
        let steps = 160;
        let (lo, hi) = ((1e-3f64).ln(), (60.0f64).ln());
        let mut best: Option<(f64, Vector3<f64>)> = None;
        for k in 0..steps {
            let c = (lo + (hi - lo) * k as f64 / (steps - 1) as f64).exp() / t_range;
            let u: Vec<f64> = pos.iter().map(|(t, _)| (-c * t).exp()).collect();
            let z: Vec<f64> = pos.iter().map(|(_, lz)| *lz).collect();
            let Ok(fit) = simple_ols(&u, &z) else { continue };
            let p = self.project(Vector3::new(fit.intercept.exp(), -fit.slope, c));
            if !self.in_range(&p) {
                continue;
            }
            let sse = self.sse(&p);
            if best.as_ref().is_none_or(|(b, _)| sse < *b) {
                best = Some((sse, p));
            }
        }
        best.map(|(_, p)| p)
    }

    fn levenberg_marquardt(&self, p0: Vector3<f64>, opts: GompertzOptions) -> Solution {
        let mut p = self.project(p0);
        let mut sse = self.sse(&p);
        let mut lambda = 1e-3;
        let mut converged = false;
        let mut iterations = 0;
        let n = self.t.len() as f64;

        while iterations < opts.max_iter {
            iterations += 1;
            if sse <= 1e-30 * n {
                converged = true;
                break;
            }
            let mut jtj = Matrix3::zeros();
            let mut jtr = Vector3::zeros();
            for (&t, &y) in self.t.iter().zip(self.y) {
                let u = (-p[2] * t).exp();
                let e = (-p[1] * u).exp();
                let model = p[0] * e;
                let row = Vector3::new(e, -p[0] * e * u, p[0] * e * p[1] * t * u);
                jtj += row * row.transpose();
                jtr += row * (y - model);
            }
            let diag_floor = 1e-12 * jtj.diagonal().max().max(1e-300);

            let mut accepted = None;
            while lambda < 1e20 {
                let mut damped = jtj;
                for i in 0..3 {
                    damped[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
                }
                let step = damped.lu().solve(&jtr);
                if let Some(step) = step {
                    let trial = self.project(p + step);
                    if self.in_range(&trial) {
                        let trial_sse = self.sse(&trial);
                        if trial_sse < sse {
                            accepted = Some((trial, trial_sse));
                            lambda = (lambda / 10.0).max(1e-15);
                            break;
                        }
                    }
                }
                lambda *= 10.0;
            }

            match accepted {
                Some((trial, trial_sse)) => {
                    let rel = (0..3)
                        .map(|i| (trial[i] - p[i]).abs() / p[i].abs().max(1e-12))
                        .fold(0.0, f64::max);
                    p = trial;
                    sse = trial_sse;
                    if rel < opts.rel_tol {
                        converged = true;
                        break;
                    }
                }
                None => {
                    // No damping level yields descent: stationary to working precision.
                    converged = true;
                    break;
                }
            }
        }
        Solution {
            p,
            sse,
            iterations,
            converged,
        }
    }
}

/// Output of [`linearize_gompertz`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedGompertz {
    /// `(t, -ln(-ln(s / A)))` for every point with `0 < s < A`.
    pub points: Vec<(f64, f64)>,
    pub excluded: usize,
}

impl LinearizedGompertz {
    /// Least-squares line `(slope, intercept)` through the points; on exact
    /// Gompertz data slope = C and intercept = -ln B.
    pub fn line(&self) -> Result<(f64, f64)> {
        let (t, z): (Vec<f64>, Vec<f64>) = self.points.iter().cloned().unzip();
        let fit = simple_ols(&t, &z)?;
        Ok((fit.slope, fit.intercept))
    }
}

pub fn linearize_gompertz(fit: &GompertzFit, t: &[f64], s: &[f64]) -> LinearizedGompertz {
    let mut points = Vec::new();
    let mut excluded = 0;
    for (&ti, &si) in t.iter().zip(s) {
        if si > 0.0 && si < fit.a {
            points.push((ti, -(-(si / fit.a).ln()).ln()));
        } else {
            excluded += 1;
        }
    }
    LinearizedGompertz { points, excluded }
}
