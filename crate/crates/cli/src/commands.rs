use std::path::Path;

use flrw_core::blowup_ode::{self, OdeConfig, OdeResult};
use flrw_core::bounds::{self, LifespanBound, RegionLabel};
use flrw_core::exponents::{self, FlrwParams, ModelParams, RootReport};
use flrw_core::fit::log_space;
use flrw_core::kato::{self, KatoCriticalParams, KatoSubcriticalParams};
use flrw_core::pde::{self, EnvelopeCheck, PdeConfig, PdeResult, PdeTermination};
use flrw_core::region_map::{region_map, MapConfig, MapPlane};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{opt, resolve, sorted_json, to_value, Override};
use crate::output::OutputDir;
use crate::*;

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn done<T: Serialize, S: Serialize>(
    out: OutputDir,
    command: &str,
    config: &T,
    summary: &S,
    exit_code: i32,
) -> Result<Execution, CliError> {
    let manifest = out.finish(command, config)?;
    Ok(Execution { manifest, summary: sorted_json(summary)?, exit_code })
}

// exponents

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub n: u32,
    pub alpha: f64,
    pub mu: f64,
    pub flrw: bool,
    pub w: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FlrwReport {
    w: f64,
    gamma0_coefficients: [f64; 3],
    p_c_flrw: RootReport,
    w_star: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ExponentsReport {
    n: u32,
    alpha: f64,
    mu: f64,
    effective_dim: f64,
    p_fujita: f64,
    p_strauss: f64,
    p_c: RootReport,
    gamma_coefficients: [f64; 3],
    threshold_a: Option<f64>,
    threshold_c: Option<f64>,
    mu_star: f64,
    flrw: Option<FlrwReport>,
}

pub fn exponents(a: &ExponentsArgs, out: &Path) -> Result<Execution, CliError> {
    let base = json!({"n": 3, "alpha": 0.0, "mu": 0.0, "flrw": false, "w": null});
    let flags: Vec<Override> = vec![
        opt("n", a.n),
        opt("alpha", a.alpha),
        opt("mu", a.mu),
        opt("flrw", a.flrw.then_some(true)),
        opt("w", a.w),
    ];
    let cfg: ExponentsConfig = resolve(base, a.config.as_deref(), &flags)?;
    let (params, flrw) = if cfg.flrw {
        let w = cfg.w.ok_or_else(|| CliError::Config("--flrw needs --w".into()))?;
        let f = FlrwParams::new(cfg.n, w)?;
        let q = exponents::gamma0_quadratic(cfg.n, w)?;
        let report = FlrwReport {
            w,
            gamma0_coefficients: [q.c2, q.c1, q.c0],
            p_c_flrw: exponents::p_c_flrw(&f)?,
            w_star: exponents::w_star(cfg.n)?,
        };
        (exponents::flrw_to_model(&f)?, Some(report))
    } else {
        (ModelParams::new(cfg.n, cfg.alpha, cfg.mu)?, None)
    };
    let g = exponents::gamma_quadratic(&params)?;
    let report = ExponentsReport {
        n: params.n,
        alpha: params.alpha,
        mu: params.mu,
        effective_dim: params.effective_dim(),
        p_fujita: params.fujita(),
        p_strauss: exponents::strauss(params.n)?,
        p_c: exponents::p_c(&params)?,
        gamma_coefficients: [g.c2, g.c1, g.c0],
        threshold_a: finite(bounds::threshold_a(&params)),
        threshold_c: finite(bounds::threshold_c(&params)),
        mu_star: exponents::mu_star(params.n, params.alpha)?,
        flrw,
    };
    let mut dir = OutputDir::create(out)?;
    dir.write_json("exponents.json", &report)?;
    done(dir, "exponents", &cfg, &report, EXIT_OK)
}

// classify

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub n: u32,
    pub alpha: f64,
    pub mu: f64,
    pub p: f64,
}

#[derive(Debug, Serialize)]
struct ClassifyReport {
    label: RegionLabel,
    bound: LifespanBound,
    all_bounds: Vec<LifespanBound>,
    p_fujita: f64,
    p_c: Option<f64>,
}

pub fn classify(a: &ClassifyArgs, out: &Path) -> Result<Execution, CliError> {
    let flags = vec![opt("n", a.n), opt("alpha", a.alpha), opt("mu", a.mu), opt("p", a.p)];
    let cfg: ClassifyConfig = resolve(json!({}), a.config.as_deref(), &flags)?;
    let params = ModelParams::new(cfg.n, cfg.alpha, cfg.mu)?;
    let label = bounds::classify(&params, cfg.p)?;
    let report = ClassifyReport {
        label,
        bound: bounds::labeled_bound(&params, cfg.p, label)?,
        all_bounds: bounds::all_bounds(&params, cfg.p)?,
        p_fujita: params.fujita(),
        p_c: exponents::p_c(&params)?.root,
    };
    let mut dir = OutputDir::create(out)?;
    dir.write_json("classify.json", &report)?;
    done(dir, "classify", &cfg, &report, EXIT_OK)
}

// map

#[derive(Debug, Serialize)]
struct MapSummary {
    plane: MapPlane,
    axis1_len: usize,
    axis2_len: usize,
    counts: std::collections::BTreeMap<String, usize>,
    /// `(μ*, p_F)` and the labels within one cell of it, on the `(μ, p)` plane.
    corner: Option<Value>,
}

pub fn map(a: &MapArgs, out: &Path) -> Result<Execution, CliError> {
    let base = match a.preset {
        Some(MapPreset::Fig1) => to_value(&MapConfig::fig1())?,
        Some(MapPreset::Fig2) => to_value(&MapConfig::fig2())?,
        None if a.config.is_some() => json!({}),
        None => return Err(CliError::Config("map needs --preset or --config".into())),
    };
    let cfg: MapConfig = resolve(base, a.config.as_deref(), &[])?;
    let map = region_map(&cfg)?;
    let counts = map.counts();
    if a.preset == Some(MapPreset::Fig2) && counts[&RegionLabel::A] != 0 {
        return Err(CliError::Runtime(format!(
            "region A should be empty on the FLRW plane, found {} cells",
            counts[&RegionLabel::A]
        )));
    }
    let corner = match cfg.plane {
        MapPlane::MuP { n, alpha } => {
            let mu = exponents::mu_star(n, alpha)?;
            let p = ModelParams::new(n, alpha, mu)?.fujita();
            let (i1, i2) = map.nearest(mu, p);
            let labels: Vec<&str> = map.labels_near(i1, i2, 1).iter().map(|l| l.as_str()).collect();
            Some(json!({"mu_star": mu, "p_fujita": p, "labels_within_one_cell": labels}))
        }
        MapPlane::WP { .. } => None,
    };
    let summary = MapSummary {
        plane: cfg.plane,
        axis1_len: map.axis1.len(),
        axis2_len: map.axis2.len(),
        counts: counts.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        corner,
    };
    let mut dir = OutputDir::create(out)?;
    dir.write("map.csv", &map.to_csv())?;
    dir.write("map.svg", &map.to_svg())?;
    dir.write_json("map_summary.json", &summary)?;
    done(dir, "map", &cfg, &summary, EXIT_OK)
}

// kato

fn critical_flags(a: &KatoCriticalArgs) -> Vec<Override> {
    vec![
        opt("kato/p", a.p),
        opt("kato/b", a.b),
        opt("kato/mu", a.mu),
        opt("kato/a0", a.a0),
        opt("kato/a1", a.a1),
        opt("kato/r", a.r),
        opt("kato/t0", a.t0),
        opt("kato/t1", a.t1),
        opt("kato/c_r", a.c_r),
    ]
}

fn critical_base() -> Value {
    json!({"b": 1.0, "mu": 0.0, "a0": 1.0, "a1": 1.0, "r": 1.0, "t0": 1.0, "t1": 2.0, "c_r": 1.0})
}

pub fn kato_threshold(a: &KatoThresholdArgs, out: &Path) -> Result<Execution, CliError> {
    let base = json!({"mu": 0.0, "a1": 1.0, "r": 1.0, "t0": 1.0, "t1": 2.0});
    let flags = vec![
        opt("p", a.p),
        opt("a", a.a),
        opt("b", a.b),
        opt("q", a.q),
        opt("mu", a.mu),
        opt("a0", a.a0),
        opt("a1", a.a1),
        opt("r", a.r),
        opt("t0", a.t0),
        opt("t1", a.t1),
    ];
    let cfg: KatoSubcriticalParams = resolve(base, a.config.as_deref(), &flags)?;
    let report = kato::subcritical_threshold(&cfg)?;
    let mut dir = OutputDir::create(out)?;
    dir.write_json("kato_threshold.json", &report)?;
    done(dir, "kato threshold", &cfg, &report, EXIT_OK)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequencesConfig {
    pub kato: KatoCriticalParams,
    pub j_max: u32,
}

pub fn kato_sequences(a: &KatoSequencesArgs, out: &Path) -> Result<Execution, CliError> {
    let mut flags = critical_flags(&a.kato);
    flags.push(opt("j_max", a.jmax));
    let cfg: SequencesConfig =
        resolve(json!({"kato": critical_base(), "j_max": 20}), a.kato.config.as_deref(), &flags)?;
    let table = kato::iterate_sequences(&cfg.kato, cfg.j_max)?;
    let growth = kato::compute_e(&cfg.kato)?;
    let max_closed_form_gap = table
        .states
        .iter()
        .map(|s| ((s.b_j - kato::closed_form_b(&cfg.kato, s.j)) / s.b_j).abs())
        .fold(0.0, f64::max);
    let summary = json!({
        "mu_case": table.mu_case,
        "rows": table.states.len(),
        "truncated": table.truncated,
        "b_const": growth.b_const,
        "e": growth.e,
        "growth_onset": kato::growth_onset(&table, growth.e, cfg.kato.p, 1e-9),
        "max_relative_closed_form_gap": max_closed_form_gap,
    });
    let mut dir = OutputDir::create(out)?;
    dir.write("kato_sequences.csv", &table.to_csv())?;
    dir.write_json("kato_sequences.json", &summary)?;
    done(dir, "kato sequences", &cfg, &summary, EXIT_OK)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub kato: KatoCriticalParams,
    pub delta: f64,
    pub horizon_decades: f64,
}

pub fn kato_envelope(a: &KatoEnvelopeArgs, out: &Path) -> Result<Execution, CliError> {
    let mut flags = critical_flags(&a.kato);
    flags.push(opt("delta", a.delta));
    flags.push(opt("horizon_decades", a.horizon_decades));
    let base = json!({
        "kato": critical_base(),
        "delta": kato::DEFAULT_DELTA,
        "horizon_decades": kato::DEFAULT_HORIZON_DECADES,
    });
    let cfg: EnvelopeConfig = resolve(base, a.kato.config.as_deref(), &flags)?;
    let report = kato::envelope_divergence(&cfg.kato, cfg.delta, cfg.horizon_decades)?;
    let mut dir = OutputDir::create(out)?;
    dir.write_json("kato_envelope.json", &report)?;
    done(dir, "kato envelope", &cfg, &report, EXIT_OK)
}

// eps grids

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EpsGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.min > 0.0 && self.max >= self.min && self.points >= 1) {
            return Err(CliError::Config("eps grid needs 0 < min <= max and points >= 1".into()));
        }
        Ok(log_space(self.min, self.max, self.points))
    }
}

fn grid_flags(g: &EpsGridArgs) -> Vec<Override> {
    vec![opt("eps/min", g.eps_min), opt("eps/max", g.eps_max), opt("eps/points", g.eps_points)]
}

fn strictly_decreasing(t: &[f64]) -> bool {
    t.windows(2).all(|w| w[1] < w[0])
}

// ode

fn ode_base(preset: Option<RunPreset>) -> OdeConfig {
    match preset {
        Some(RunPreset::HeatlikeN2) => OdeConfig::preset_heatlike_n2(),
        Some(RunPreset::CriticalN2) => OdeConfig::preset_critical_n2(),
        None => OdeConfig::default(),
    }
}

macro_rules! prefixed {
    ($sweep:expr, $k:literal) => {
        if $sweep {
            concat!("template/", $k)
        } else {
            $k
        }
    };
}

fn ode_flags(sweep: bool, a: &OdeArgs) -> Vec<Override> {
    vec![
        opt(prefixed!(sweep, "p"), a.p),
        opt(prefixed!(sweep, "mu"), a.mu),
        opt(prefixed!(sweep, "q"), a.q),
        opt(prefixed!(sweep, "a1"), a.a1),
        opt(prefixed!(sweep, "r"), a.r),
        opt(prefixed!(sweep, "eps"), a.eps),
        opt(prefixed!(sweep, "f_init_scale"), a.f_init_scale),
        opt(prefixed!(sweep, "df_init_scale"), a.df_init_scale),
        opt(prefixed!(sweep, "blowup_threshold"), a.threshold),
        opt(prefixed!(sweep, "t_max"), a.t_max),
        opt(prefixed!(sweep, "rel_tol"), a.rel_tol),
        opt(prefixed!(sweep, "abs_tol"), a.abs_tol),
    ]
}

#[derive(Debug, Serialize)]
struct OdeRunSummary {
    blew_up: bool,
    t_num: f64,
    termination: blowup_ode::Termination,
    steps: usize,
    rejected: usize,
    monotone_invariant: bool,
}

fn ode_summary(res: &OdeResult, mu: f64) -> OdeRunSummary {
    OdeRunSummary {
        blew_up: res.blew_up,
        t_num: res.t_num,
        termination: res.termination,
        steps: res.steps,
        rejected: res.rejected,
        monotone_invariant: blowup_ode::monotone_invariant_check(res, mu),
    }
}

pub fn ode_run(a: &OdeArgs, out: &Path) -> Result<Execution, CliError> {
    let base = to_value(&ode_base(a.preset))?;
    let cfg: OdeConfig = resolve(base, a.config.as_deref(), &ode_flags(false, a))?;
    cfg.validate()?;
    let res = blowup_ode::integrate(&cfg)?;
    let summary = ode_summary(&res, cfg.mu);
    let mut dir = OutputDir::create(out)?;
    dir.write("ode_trace.csv", &res.trace_csv())?;
    dir.write_json("ode_result.json", &summary)?;
    let code = if res.blew_up { EXIT_OK } else { EXIT_RUNTIME };
    done(dir, "ode run", &cfg, &summary, code)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSweepConfig {
    pub template: OdeConfig,
    pub eps: EpsGrid,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub eps: Vec<f64>,
    pub t_num: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slope predicted by the Kato threshold; absent for exp-type lifespans.
    pub predicted_slope: Option<f64>,
    pub relative_deviation: Option<f64>,
    pub t_strictly_decreasing: bool,
    pub checks: Value,
}

fn ode_grid(preset: Option<RunPreset>) -> EpsGrid {
    match preset {
        Some(RunPreset::CriticalN2) => EpsGrid { min: 0.05, max: 0.5, points: 8 },
        _ => EpsGrid { min: 1e-3, max: 1e-1, points: 8 },
    }
}

/// Kato exponent `-p(p-1)/M` of the ODE template with `a = μ + q`, `b = μ + 2`.
pub fn ode_predicted_slope(t: &OdeConfig) -> Option<f64> {
    let kp = KatoSubcriticalParams {
        p: t.p,
        a: t.mu + t.q,
        b: t.mu + 2.0,
        q: t.q,
        mu: t.mu,
        a0: 1.0,
        a1: t.a1,
        r: t.r.max(f64::MIN_POSITIVE),
        t0: 1.0,
        t1: 2.0,
    };
    kato::subcritical_eps_exponent(&kp).ok()
}

pub fn ode_sweep(a: &OdeSweepArgs, out: &Path) -> Result<Execution, CliError> {
    let base = json!({
        "template": to_value(&ode_base(a.ode.preset))?,
        "eps": to_value(&ode_grid(a.ode.preset))?,
    });
    let mut flags = ode_flags(true, &a.ode);
    flags.extend(grid_flags(&a.grid));
    let cfg: OdeSweepConfig = resolve(base, a.ode.config.as_deref(), &flags)?;
    cfg.template.validate()?;
    let eps = cfg.eps.values()?;
    let sweep = blowup_ode::sweep(&cfg.template, &eps)?;
    let t = &sweep.fit.t_values;
    let predicted = ode_predicted_slope(&cfg.template);
    let monotone = sweep.runs.iter().all(|r| blowup_ode::monotone_invariant_check(r, cfg.template.mu));
    let checks = match predicted {
        Some(e) => json!({
            "monotone_invariant": monotone,
            "kato_consistent": blowup_ode::kato_consistent(&eps, t, e),
        }),
        None => {
            let x: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
            let y: Vec<f64> = t.iter().map(|v| v.ln()).collect();
            let d = blowup_ode::second_differences(&x, &y);
            let min_d = d.iter().copied().fold(f64::INFINITY, f64::min);
            json!({
                "monotone_invariant": monotone,
                "log_convex": d.iter().all(|&v| v >= -1e-6),
                "min_second_difference": finite(min_d),
            })
        }
    };
    let summary = SweepSummary {
        eps: eps.clone(),
        t_num: t.clone(),
        slope: sweep.fit.slope,
        intercept: sweep.fit.intercept,
        r_squared: sweep.fit.r_squared,
        predicted_slope: predicted,
        relative_deviation: predicted.map(|p| ((sweep.fit.slope - p) / p).abs()),
        t_strictly_decreasing: strictly_decreasing(t),
        checks,
    };
    let mut dir = OutputDir::create(out)?;
    dir.write("ode_sweep.csv", &sweep.csv())?;
    dir.write_json("ode_sweep.json", &summary)?;
    done(dir, "ode sweep", &cfg, &summary, EXIT_OK)
}

// pde

fn pde_base(preset: Option<RunPreset>) -> Result<PdeConfig, CliError> {
    match preset {
        Some(RunPreset::HeatlikeN2) | None => Ok(PdeConfig::default()),
        Some(RunPreset::CriticalN2) => {
            Err(CliError::Config("preset critical-n2 is defined for the ODE only".into()))
        }
    }
}

fn pde_flags(sweep: bool, a: &PdeArgs) -> Vec<Override> {
    vec![
        opt(prefixed!(sweep, "params/n"), a.n),
        opt(prefixed!(sweep, "params/alpha"), a.alpha),
        opt(prefixed!(sweep, "params/mu"), a.mu),
        opt(prefixed!(sweep, "p"), a.p),
        opt(prefixed!(sweep, "eps"), a.eps),
        opt(prefixed!(sweep, "radius"), a.radius),
        opt(prefixed!(sweep, "dr"), a.dr),
        opt(prefixed!(sweep, "cfl"), a.cfl),
        opt(prefixed!(sweep, "blowup_threshold"), a.threshold),
        opt(prefixed!(sweep, "t_max"), a.t_max),
        opt(prefixed!(sweep, "sample_every"), a.sample_every),
    ]
}

#[derive(Debug, Serialize)]
struct PdeRunSummary {
    blew_up: bool,
    t_num: f64,
    termination: PdeTermination,
    steps: usize,
    samples: usize,
    f_initial: f64,
    f_min: f64,
    f_monotone_violations: usize,
    support_violations: usize,
    holder_violations: usize,
}

fn pde_summary(r: &PdeResult) -> PdeRunSummary {
    PdeRunSummary {
        blew_up: r.blew_up,
        t_num: r.t_num,
        termination: r.termination,
        steps: r.steps,
        samples: r.samples.len(),
        f_initial: r.f_initial,
        f_min: r.f_min,
        f_monotone_violations: r.f_monotone_violations,
        support_violations: r.support_violations,
        holder_violations: r.holder_violations,
    }
}

pub fn pde_run(a: &PdeArgs, out: &Path) -> Result<Execution, CliError> {
    let base = to_value(&pde_base(a.preset)?)?;
    let cfg: PdeConfig = resolve(base, a.config.as_deref(), &pde_flags(false, a))?;
    cfg.validate()?;
    let res = pde::run(&cfg)?;
    let summary = pde_summary(&res);
    let mut dir = OutputDir::create(out)?;
    dir.write("pde_diagnostics.csv", &res.diagnostics_csv())?;
    for (k, snap) in res.snapshots.iter().enumerate() {
        dir.write(&format!("pde_snapshot_{k:03}.csv"), &snap.to_csv())?;
    }
    dir.write_json("pde_result.json", &summary)?;
    let code = if res.blew_up { EXIT_OK } else { EXIT_RUNTIME };
    done(dir, "pde run", &cfg, &summary, code)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSweepConfig {
    pub template: PdeConfig,
    pub eps: EpsGrid,
}

pub fn pde_sweep(a: &PdeSweepArgs, out: &Path) -> Result<Execution, CliError> {
    let base = json!({
        "template": to_value(&pde_base(a.pde.preset)?)?,
        "eps": {"min": 0.05, "max": 0.8, "points": 6},
    });
    let mut flags = pde_flags(true, &a.pde);
    flags.extend(grid_flags(&a.grid));
    let cfg: PdeSweepConfig = resolve(base, a.pde.config.as_deref(), &flags)?;
    cfg.template.validate()?;
    let eps = cfg.eps.values()?;
    let sweep = pde::lifespan_sweep(&cfg.template, &eps)?;
    let t = &sweep.fit.t_values;
    let predicted = bounds::heatlike_exponent(&cfg.template.params, cfg.template.p).map(|e| -e);
    let envelope: &[EnvelopeCheck] = &sweep.envelope;
    let runs: Vec<PdeRunSummary> = sweep.runs.iter().map(pde_summary).collect();
    let checks = json!({ "envelope": envelope, "runs": runs });
    let summary = SweepSummary {
        eps: eps.clone(),
        t_num: t.clone(),
        slope: sweep.fit.slope,
        intercept: sweep.fit.intercept,
        r_squared: sweep.fit.r_squared,
        predicted_slope: predicted,
        relative_deviation: predicted.map(|p| ((sweep.fit.slope - p) / p).abs()),
        t_strictly_decreasing: strictly_decreasing(t),
        checks,
    };
    let mut dir = OutputDir::create(out)?;
    dir.write("pde_sweep.csv", &blowup_ode::sweep_csv(&eps, t))?;
    dir.write_json("pde_sweep.json", &summary)?;
    done(dir, "pde sweep", &cfg, &summary, EXIT_OK)
}
