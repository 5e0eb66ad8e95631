//! Comparison ODE `F'' + (μ/t) F' = A₁ (t+R)^{-q} |F|^p` for the spatial mean
//! `F(t) = ∫u dx`, integrated from `t = 1` until `F` crosses a blow-up threshold.
//!
//! The integrator is an adaptive Dormand–Prince 5(4) pair. When an accepted step
//! crosses the threshold, the crossing is located by bisecting the step length
//! of a single Runge–Kutta step from the last accepted state.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ModelParams;
use crate::fit::{fit_power_law, FitResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub p: f64,
    pub mu: f64,
    pub q: f64,
    pub a1: f64,
    pub r: f64,
    /// `F(1) = eps · f_init_scale`.
    pub f_init_scale: f64,
    /// `F'(1) = eps · df_init_scale`.
    pub df_init_scale: f64,
    pub eps: f64,
    pub blowup_threshold: f64,
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            mu: 0.0,
            q: 0.0,
            a1: 1.0,
            r: 1.0,
            f_init_scale: 1.0,
            df_init_scale: 1.0,
            eps: 1.0,
            blowup_threshold: 1e12,
            t_max: 1e9,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
        }
    }
}

impl OdeConfig {
    /// Heatlike wiring `q = n(1-α)(p-1)` of problem `(n, α, μ)`.
    pub fn heatlike(params: &ModelParams, p: f64, eps: f64) -> Self {
        Self { p, mu: params.mu, q: params.effective_dim() * (p - 1.0), eps, ..Self::default() }
    }

    /// `n = 2, α = 0.5, μ = 2, p = 1.8`: predicted slope `-2/3`.
    pub fn preset_heatlike_n2() -> Self {
        Self::heatlike(&ModelParams { n: 2, alpha: 0.5, mu: 2.0 }, 1.8, 0.01)
    }

    /// `q = 2, μ = 2, p = 2` (`p = p_F(2)` with `α = 0`): exp-type lifespan.
    pub fn preset_critical_n2() -> Self {
        Self { p: 2.0, mu: 2.0, q: 2.0, eps: 0.1, t_max: 1e15, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::Domain(format!("p = {} but p > 1 is required", self.p)));
        }
        if !(self.mu >= 0.0 && self.q >= 0.0 && self.a1 > 0.0 && self.r >= 0.0) {
            return Err(Error::Domain("need mu >= 0, q >= 0, A1 > 0, R >= 0".into()));
        }
        if !(self.eps >= 0.0 && self.f_init_scale >= 0.0 && self.df_init_scale >= 0.0) {
            return Err(Error::Domain("initial data must be nonnegative".into()));
        }
        if !(self.t_max > 1.0) {
            return Err(Error::Domain("t_max must exceed 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if !(self.blowup_threshold > self.eps * self.f_init_scale) {
            return Err(Error::Domain("blow-up threshold must exceed the initial data".into()));
        }
        Ok(())
    }

    fn rhs(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let source = self.a1 * (t + self.r).powf(-self.q) * y[0].abs().powf(self.p);
        [y[1], source - self.mu / t * y[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Threshold,
    Horizon,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub f: f64,
    pub df: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeResult {
    pub blew_up: bool,
    /// Threshold crossing time, underflow time, or the horizon.
    pub t_num: f64,
    pub termination: Termination,
    pub steps: usize,
    pub rejected: usize,
    pub trace: Vec<TracePoint>,
}

impl OdeResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,F,dF\n");
        for pt in &self.trace {
            let _ = writeln!(out, "{},{},{}", pt.t, pt.f, pt.df);
        }
        out
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step; returns the 5th-order solution and the error estimate.
fn dp_step(cfg: &OdeConfig, t: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += h * A[s][j] * kj[0];
            ys[1] += h * A[s][j] * kj[1];
        }
        k[s] = cfg.rhs(t + C[s] * h, ys);
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for s in 0..7 {
        for i in 0..2 {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    (y5, err)
}

/// Integrates from `t = 1` until blow-up, the horizon, or step underflow.
pub fn integrate(cfg: &OdeConfig) -> Result<OdeResult> {
    cfg.validate()?;
    let mut t = 1.0;
    let mut y = [cfg.eps * cfg.f_init_scale, cfg.eps * cfg.df_init_scale];
    let mut h: f64 = 1e-4;
    let mut trace = vec![TracePoint { t, f: y[0], df: y[1] }];
    let (mut steps, mut rejected) = (0usize, 0usize);

    let finish = |blew_up, t_num, termination, steps, rejected, trace| {
        Ok(OdeResult { blew_up, t_num, termination, steps, rejected, trace })
    };

    loop {
        if t >= cfg.t_max {
            return finish(false, cfg.t_max, Termination::Horizon, steps, rejected, trace);
        }
        h = h.min(cfg.t_max - t);
        if h < 1e-14 * t {
            return finish(true, t, Termination::StepUnderflow, steps, rejected, trace);
        }
        let (y_new, e) = dp_step(cfg, t, y, h);
        let err = if y_new.iter().all(|v| v.is_finite()) {
            let norm: f64 = (0..2)
                .map(|i| {
                    let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                    (e[i] / sc).powi(2)
                })
                .sum::<f64>()
                / 2.0;
            norm.sqrt()
        } else {
            f64::INFINITY
        };
        if err > 1.0 {
            rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= factor;
            continue;
        }
        steps += 1;
        if y_new[0] >= cfg.blowup_threshold {
            let (mut lo, mut hi) = (0.0, h);
            let mut at_hi = y_new;
            for _ in 0..200 {
                if hi - lo <= 4.0 * f64::EPSILON * (t + hi) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let (ym, _) = dp_step(cfg, t, y, mid);
                if ym[0] >= cfg.blowup_threshold {
                    hi = mid;
                    at_hi = ym;
                } else {
                    lo = mid;
                }
            }
            trace.push(TracePoint { t: t + hi, f: at_hi[0], df: at_hi[1] });
            return finish(true, t + hi, Termination::Threshold, steps, rejected, trace);
        }
        t += h;
        y = y_new;
        trace.push(TracePoint { t, f: y[0], df: y[1] });
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
}

/// `t^μ F'(t)` must be nondecreasing along the trace (relative slack `1e-8` per step).
pub fn monotone_invariant_check(res: &OdeResult, mu: f64) -> bool {
    res.trace
        .windows(2)
        .all(|w| {
            let g0 = w[0].t.powf(mu) * w[0].df;
            let g1 = w[1].t.powf(mu) * w[1].df;
            g1 >= g0 - 1e-8 * g0.abs()
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub fit: FitResult,
    pub runs: Vec<OdeResult>,
}

impl SweepResult {
    pub fn csv(&self) -> String {
        sweep_csv(&self.fit.eps_values, &self.fit.t_values)
    }
}

pub fn sweep_csv(eps: &[f64], t: &[f64]) -> String {
    let mut out = String::from("eps,T_num\n");
    for (e, t) in eps.iter().zip(t) {
        let _ = writeln!(out, "{e},{t}");
    }
    out
}

/// Runs the template at every `ε` (in parallel) and fits `ln T` against `ln ε`.
pub fn sweep(template: &OdeConfig, eps_grid: &[f64]) -> Result<SweepResult> {
    let runs: Vec<OdeResult> = eps_grid
        .par_iter()
        .map(|&eps| integrate(&OdeConfig { eps, ..*template }))
        .collect::<Result<_>>()?;
    let failed: Vec<f64> = eps_grid
        .iter()
        .zip(&runs)
        .filter(|(_, r)| !r.blew_up)
        .map(|(&e, _)| e)
        .collect();
    if !failed.is_empty() {
        return Err(Error::Horizon { eps: failed });
    }
    let t: Vec<f64> = runs.iter().map(|r| r.t_num).collect();
    let fit = fit_power_law(eps_grid, &t)?;
    Ok(SweepResult { fit, runs })
}

/// Upper-envelope test `T(ε) ≤ K ε^{eps_exponent}` with `K` fitted from the
/// largest-ε run; `eps_exponent` is the (negative) power from the Kato threshold.
pub fn kato_consistent(eps: &[f64], t: &[f64], eps_exponent: f64) -> bool {
    let Some((i_max, &e_max)) = eps.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return false;
    };
    let k = t[i_max] * e_max.powf(-eps_exponent);
    eps.iter().zip(t).all(|(&e, &tv)| tv <= k * e.powf(eps_exponent) * (1.0 + 1e-12))
}

/// Divided second differences of `y(x)` after sorting by `x`.
pub fn second_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(3)
        .map(|w| {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            2.0 * (s2 - s1) / (w[2].0 - w[0].0)
        })
        .collect()
}
