//! Radially symmetric finite-difference solver for
//!
//! ```text
//! u_tt - t^{-2α} Δu + (μ/t) u_t = |u|^p,   u(1) = ε u₀,  u_t(1) = ε u₁
//! ```
//!
//! with compactly supported nonnegative data. The scheme is an explicit
//! three-level update in time with second-order central differences in `r`.
//! Time steps may vary (the CFL limit grows like `t^α` and the reaction term
//! forces small steps near blow-up), so the time differences use the
//! variable-step second-order formulas, which reduce to the usual leapfrog
//! stencil for equal steps.
//!
//! Along the run the solver records `sup|u|`, `F(t) = ∫u dx`, `∫|u|^p dx` and the
//! numerical support radius, and checks finite propagation speed, Hölder's
//! inequality on the light-cone ball, and monotonicity of `F`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::exponents::{light_cone, ModelParams};
use crate::fit::{fit_power_law, FitResult};

/// Relative tolerance of the Hölder check.
pub const HOLDER_TOL: f64 = 1e-6;
/// Values below this fraction of `sup|u|` count as outside the support.
pub const SUPPORT_REL_CUTOFF: f64 = 1e-12;
/// Per-step slack for the discrete monotonicity of `F`, relative to `F(1)`.
pub const F_MONOTONE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `(1 - (r/R)²)³` for `r < R`, zero outside; `C²` across `r = R`.
    Bump3,
}

impl Profile {
    pub fn eval(self, r: f64, radius: f64) -> f64 {
        match self {
            Profile::Bump3 => {
                let s = r / radius;
                if s < 1.0 {
                    (1.0 - s * s).powi(3)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct PdeConfig {
    pub params: ModelParams,
    pub p: f64,
    pub eps: f64,
    /// Support radius `R` of the data.
    pub radius: f64,
    pub profile: Profile,
    /// `u₁ = u1_scale · profile`.
    pub u1_scale: f64,
    pub dr: f64,
    pub cfl: f64,
    pub dt_max: f64,
    /// Steps are limited to `reaction_courant / sqrt(p sup|u|^{p-1})`.
    pub reaction_courant: f64,
    pub blowup_threshold: f64,
    pub t_max: f64,
    /// Zero cells kept beyond the predicted support `A(t) + R`.
    pub domain_margin_cells: usize,
    /// Diagnostics are sampled every this many steps.
    pub sample_every: usize,
    pub snapshot_times: Vec<f64>,
    /// Drop `|u|^p` to run the linear damped wave equation.
    pub nonlinear: bool,
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self {
            params: ModelParams { n: 2, alpha: 0.5, mu: 2.0 },
            p: 2.0,
            eps: 0.5,
            radius: 1.0,
            profile: Profile::Bump3,
            u1_scale: 1.0,
            dr: 1.0 / 200.0,
            cfl: 0.5,
            dt_max: 0.1,
            reaction_courant: 0.05,
            blowup_threshold: 1e8,
            t_max: 1e4,
            domain_margin_cells: 5,
            sample_every: 20,
            snapshot_times: Vec::new(),
            nonlinear: true,
        }
    }
}

impl PdeConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.p > 1.0) {
            return Err(Error::Domain(format!("p = {} but p > 1 is required", self.p)));
        }
        if !(self.eps >= 0.0 && self.u1_scale >= 0.0) {
            return Err(Error::Domain("data must be nonnegative".into()));
        }
        if !(self.radius > 0.0 && self.dr > 0.0 && self.dr < self.radius) {
            return Err(Error::Domain("need 0 < dr < R".into()));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Domain(format!("cfl = {} outside (0, 1)", self.cfl)));
        }
        if !(self.dt_max > 0.0 && self.reaction_courant > 0.0) {
            return Err(Error::Domain("dt_max and reaction_courant must be positive".into()));
        }
        if !(self.t_max > 1.0 && self.blowup_threshold > 0.0) {
            return Err(Error::Domain("need t_max > 1 and a positive threshold".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::Domain("sample_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Predicted support radius `A(t) + R`.
    pub fn support_bound(&self, t: f64) -> f64 {
        light_cone(self.params.alpha, t) + self.radius
    }
}

/// Area of the unit sphere `S^{n-1}`: `2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: u32) -> f64 {
    sphere_area(n) / n as f64
}

fn check_grid(u: &[f64]) -> Result<()> {
    if u.len() < 3 {
        return Err(Error::Grid(format!("radial grid needs at least 3 points, got {}", u.len())));
    }
    Ok(())
}

/// `u_rr + (n-1)/r u_r` by central differences; `n u_rr` at the origin with the
/// ghost value `u(-dr) = u(dr)`, and a zero ghost beyond the last point.
pub fn radial_laplacian(u: &[f64], dr: f64, n: u32) -> Result<Vec<f64>> {
    check_grid(u)?;
    let mut out = vec![0.0; u.len()];
    laplacian_into(u, dr, n, &mut out);
    Ok(out)
}

fn laplacian_into(u: &[f64], dr: f64, n: u32, out: &mut [f64]) {
    let len = u.len();
    let inv = 1.0 / (dr * dr);
    let half_nm1 = 0.5 * (n as f64 - 1.0);
    out[0] = n as f64 * 2.0 * (u[1] - u[0]) * inv;
    for i in 1..len {
        let right = if i + 1 < len { u[i + 1] } else { 0.0 };
        let k = half_nm1 / i as f64;
        out[i] = ((1.0 + k) * right - 2.0 * u[i] + (1.0 - k) * u[i - 1]) * inv;
    }
}

/// Trapezoid quadrature of `∫ g(u) dx` over the radial grid.
fn radial_integral(u: &[f64], dr: f64, n: u32, g: impl Fn(f64) -> f64) -> f64 {
    let last = u.len() - 1;
    let sum: f64 = u
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = if i == last { 0.5 } else { 1.0 };
            w * g(v) * (i as f64 * dr).powi(n as i32 - 1)
        })
        .sum();
    sphere_area(n) * sum * dr
}

/// `F = ∫u dx`.
pub fn functional_f(u: &[f64], dr: f64, n: u32) -> f64 {
    radial_integral(u, dr, n, |v| v)
}

/// `∫|u|^p dx`.
pub fn lp_mass(u: &[f64], dr: f64, n: u32, p: f64) -> f64 {
    radial_integral(u, dr, n, |v| v.abs().powf(p))
}

pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest `r` with `|u(r)| > 1e-12 · sup|u|` (zero for the zero function).
pub fn support_radius(u: &[f64], dr: f64) -> f64 {
    let cutoff = SUPPORT_REL_CUTOFF * sup_norm(u);
    u.iter()
        .rposition(|v| v.abs() > cutoff)
        .map_or(0.0, |i| i as f64 * dr)
}

/// `(∫|u|^p)·V^{p-1} / F^p`; Hölder's inequality makes this at least 1 whenever
/// `u` vanishes outside a set of volume `V`.
pub fn holder_ratio(u: &[f64], dr: f64, n: u32, p: f64, volume: f64) -> f64 {
    let f = functional_f(u, dr, n).abs();
    lp_mass(u, dr, n, p) * volume.powf(p - 1.0) / f.powf(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeState {
    pub t: f64,
    pub t_prev: f64,
    pub u: Vec<f64>,
    pub u_prev: Vec<f64>,
    /// Length of the last step.
    pub dt: f64,
    pub steps: usize,
    scratch: Vec<f64>,
}

impl PdeState {
    pub fn radius_of(&self, i: usize, dr: f64) -> f64 {
        i as f64 * dr
    }
}

/// Hölder check at the current time, with `V = ω_n (A(t)+R)^n`.
pub fn holder_check(state: &PdeState, cfg: &PdeConfig) -> bool {
    holder_check_with_radius(state, cfg, cfg.support_bound(state.t))
}

pub fn holder_check_with_radius(state: &PdeState, cfg: &PdeConfig, radius: f64) -> bool {
    let n = cfg.params.n;
    if functional_f(&state.u, cfg.dr, n) == 0.0 {
        return true;
    }
    let volume = ball_volume(n) * radius.powi(n as i32);
    holder_ratio(&state.u, cfg.dr, n, cfg.p, volume) >= 1.0 - HOLDER_TOL
}

/// Numerical support stays inside `A(t) + R + 2dr`.
pub fn support_check(state: &PdeState, cfg: &PdeConfig) -> bool {
    support_radius(&state.u, cfg.dr) <= cfg.support_bound(state.t) + 2.0 * cfg.dr
}

fn required_len(cfg: &PdeConfig, t: f64) -> usize {
    (cfg.support_bound(t) / cfg.dr).ceil() as usize + cfg.domain_margin_cells + 2
}

fn ensure_len(state: &mut PdeState, len: usize) {
    if state.u.len() < len {
        state.u.resize(len, 0.0);
        state.u_prev.resize(len, 0.0);
        state.scratch.resize(len, 0.0);
    }
}

fn source(cfg: &PdeConfig, v: f64) -> f64 {
    if cfg.nonlinear {
        v.abs().powf(cfg.p)
    } else {
        0.0
    }
}

fn next_dt(state: &PdeState, cfg: &PdeConfig) -> f64 {
    let mut dt = (cfg.cfl * cfg.dr * state.t.powf(cfg.params.alpha)).min(cfg.dt_max);
    if cfg.nonlinear {
        let s = sup_norm(&state.u);
        let rate = (cfg.p * s.powf(cfg.p - 1.0)).sqrt();
        if rate > 0.0 {
            dt = dt.min(cfg.reaction_courant / rate);
        }
    }
    if state.steps > 0 {
        dt = dt.min(1.1 * state.dt);
    }
    dt
}

/// Data at `t = 1` and the second-order Taylor start to the first time level.
pub fn initial_state(cfg: &PdeConfig) -> Result<PdeState> {
    cfg.validate()?;
    let n = cfg.params.n;
    let len = required_len(cfg, 1.0);
    let u0: Vec<f64> =
        (0..len).map(|i| cfg.eps * cfg.profile.eval(i as f64 * cfg.dr, cfg.radius)).collect();
    let u1: Vec<f64> = u0.iter().map(|v| cfg.u1_scale * v).collect();
    let mut state = PdeState {
        t: 1.0,
        t_prev: 1.0,
        u: u0,
        u_prev: Vec::new(),
        dt: 0.0,
        steps: 0,
        scratch: vec![0.0; len],
    };
    let dt = next_dt(&state, cfg);
    let lap = radial_laplacian(&state.u, cfg.dr, n)?;
    let mu = cfg.params.mu;
    let first: Vec<f64> = (0..len)
        .map(|i| {
            let u = state.u[i];
            let accel = lap[i] - mu * u1[i] + source(cfg, u);
            u + dt * u1[i] + 0.5 * dt * dt * accel
        })
        .collect();
    state.u_prev = std::mem::replace(&mut state.u, first);
    state.t = 1.0 + dt;
    state.dt = dt;
    state.steps = 1;
    let len = required_len(cfg, state.t);
    ensure_len(&mut state, len);
    Ok(state)
}

/// One explicit three-level step.
pub fn step(state: &mut PdeState, cfg: &PdeConfig) {
    let h1 = next_dt(state, cfg);
    let h0 = state.t - state.t_prev;
    let t = state.t;
    ensure_len(state, required_len(cfg, t + h1));

    let n = cfg.params.n;
    laplacian_into(&state.u, cfg.dr, n, &mut state.scratch);
    let speed2 = t.powf(-2.0 * cfg.params.alpha);
    let m = cfg.params.mu / t;
    let s = h0 + h1;
    let denom = (2.0 + m * h0) / (h1 * s);
    let cu = (2.0 - m * (h1 - h0)) / (h0 * h1);
    let cm = (2.0 - m * h1) / (h0 * s);

    for i in 0..state.u.len() {
        let u = state.u[i];
        let l = speed2 * state.scratch[i] + source(cfg, u);
        // overwrite u_prev in place with the new level
        state.u_prev[i] = (l + cu * u - cm * state.u_prev[i]) / denom;
    }
    std::mem::swap(&mut state.u, &mut state.u_prev);
    state.t_prev = t;
    state.t = t + h1;
    state.dt = h1;
    state.steps += 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdeTermination {
    Threshold,
    Horizon,
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub sup: f64,
    pub f: f64,
    pub lp: f64,
    pub support_radius: f64,
    pub support_ok: bool,
    pub holder_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub dr: f64,
    pub u: Vec<f64>,
}

impl Snapshot {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u\n");
        for (i, v) in self.u.iter().enumerate() {
            let _ = writeln!(out, "{},{v}", i as f64 * self.dr);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeResult {
    pub blew_up: bool,
    pub t_num: f64,
    pub termination: PdeTermination,
    pub steps: usize,
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    pub f_initial: f64,
    /// Steps where `F` dropped by more than the allowed slack.
    pub f_monotone_violations: usize,
    pub f_min: f64,
    pub support_violations: usize,
    pub holder_violations: usize,
}

impl PdeResult {
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("t,sup_u,F,Lp,support_radius\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},{},{}", s.t, s.sup, s.f, s.lp, s.support_radius);
        }
        out
    }

    pub fn f_series(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, s.f)).collect()
    }
}

fn sample(state: &PdeState, cfg: &PdeConfig) -> Sample {
    let n = cfg.params.n;
    Sample {
        t: state.t,
        sup: sup_norm(&state.u),
        f: functional_f(&state.u, cfg.dr, n),
        lp: lp_mass(&state.u, cfg.dr, n, cfg.p),
        support_radius: support_radius(&state.u, cfg.dr),
        support_ok: support_check(state, cfg),
        holder_ok: holder_check(state, cfg),
    }
}

/// Steps until the blow-up threshold, the horizon, or overflow.
pub fn run(cfg: &PdeConfig) -> Result<PdeResult> {
    cfg.validate()?;
    let n = cfg.params.n;

    // diagnostics at t = 1 come from the data itself
    let init = initial_state(cfg)?;
    let data_state = PdeState {
        t: 1.0,
        t_prev: 1.0,
        u: init.u_prev.clone(),
        u_prev: Vec::new(),
        dt: 0.0,
        steps: 0,
        scratch: Vec::new(),
    };
    let first = sample(&data_state, cfg);
    let f_initial = first.f;
    let mut samples = vec![first];
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = cfg.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let mut take_snapshots = |state: &PdeState, pending: &mut Vec<f64>| {
        while pending.last().is_some_and(|&ts| ts <= state.t) {
            pending.pop();
            snapshots.push(Snapshot { t: state.t, dr: cfg.dr, u: state.u.clone() });
        }
    };

    let mut state = init;
    let mut f_prev = f_initial;
    let mut f_min = f_initial;
    let mut f_monotone_violations = 0;
    let slack = F_MONOTONE_SLACK * f_initial.abs();
    let mut sup_prev = first.sup;
    let mut t_prev = 1.0;
    let termination;
    let t_num;

    loop {
        let sup = sup_norm(&state.u);
        let f = functional_f(&state.u, cfg.dr, n);
        if !sup.is_finite() || !f.is_finite() {
            termination = PdeTermination::Overflow;
            t_num = t_prev;
            break;
        }
        if f < f_prev - slack {
            f_monotone_violations += 1;
        }
        f_min = f_min.min(f);
        f_prev = f;
        take_snapshots(&state, &mut pending);
        if sup >= cfg.blowup_threshold {
            termination = PdeTermination::Threshold;
            let frac = if sup_prev > 0.0 && sup > sup_prev {
                ((cfg.blowup_threshold.ln() - sup_prev.ln()) / (sup.ln() - sup_prev.ln())).clamp(0.0, 1.0)
            } else {
                1.0
            };
            t_num = t_prev + frac * (state.t - t_prev);
            samples.push(sample(&state, cfg));
            break;
        }
        if state.t >= cfg.t_max {
            termination = PdeTermination::Horizon;
            t_num = state.t;
            samples.push(sample(&state, cfg));
            break;
        }
        if state.steps % cfg.sample_every == 0 {
            samples.push(sample(&state, cfg));
        }
        sup_prev = sup;
        t_prev = state.t;
        step(&mut state, cfg);
    }

    let support_violations = samples.iter().filter(|s| !s.support_ok).count();
    let holder_violations = samples.iter().filter(|s| !s.holder_ok).count();
    Ok(PdeResult {
        blew_up: termination != PdeTermination::Horizon,
        t_num,
        termination,
        steps: state.steps,
        samples,
        snapshots,
        f_initial,
        f_monotone_violations,
        f_min,
        support_violations,
        holder_violations,
    })
}

/// `t^{-μ-n(1-α)(p-1)} (t-1)^{μ+2}`, the time profile of the lower bound on `F`.
pub fn envelope_profile(params: &ModelParams, p: f64, t: f64) -> f64 {
    let q = params.effective_dim() * (p - 1.0);
    t.powf(-params.mu - q) * (t - 1.0).powf(params.mu + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub eps: f64,
    /// `F / (ε^p g)` at the first sample past `t = 2`.
    pub calibrated_c: f64,
    /// Smallest `F / (ε^p g)` over samples past `t = 2`.
    pub min_ratio: f64,
    pub holds: bool,
}

/// Checks `F(t) ≥ c ε^p g(t)` along one run, `c` calibrated at the first sample past `t = 2`.
pub fn envelope_check(res: &PdeResult, params: &ModelParams, p: f64, eps: f64) -> EnvelopeCheck {
    let ratios: Vec<f64> = res
        .samples
        .iter()
        .filter(|s| s.t >= 2.0)
        .map(|s| s.f / (eps.powf(p) * envelope_profile(params, p, s.t)))
        .collect();
    let calibrated_c = ratios.first().copied().unwrap_or(f64::NAN);
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    EnvelopeCheck {
        eps,
        calibrated_c,
        min_ratio,
        holds: calibrated_c.is_finite() && min_ratio >= calibrated_c * (1.0 - 1e-9),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSweep {
    pub fit: FitResult,
    pub runs: Vec<PdeResult>,
    pub envelope: Vec<EnvelopeCheck>,
}

/// Runs the template for every `ε` (in parallel), fits the lifespan scaling and
/// reports the envelope check per run.
pub fn lifespan_sweep(template: &PdeConfig, eps_grid: &[f64]) -> Result<PdeSweep> {
    let runs: Vec<PdeResult> = eps_grid
        .par_iter()
        .map(|&eps| run(&PdeConfig { eps, ..template.clone() }))
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
    let envelope = eps_grid
        .iter()
        .zip(&runs)
        .map(|(&eps, r)| envelope_check(r, &template.params, template.p, eps))
        .collect();
    Ok(PdeSweep { fit, runs, envelope })
}
