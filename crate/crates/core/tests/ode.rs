use approx::assert_relative_eq;
use flrw_core::blowup_ode::*;
use flrw_core::fit::log_space;

// T - 1 = ∫_1^M dF / sqrt(2(F³-1)/3) for F'' = F², F(1) = 1, F'(1) = 0.
// With F = 1 + x² the integrand is 2 / sqrt(2(3 + 3x² + x⁴)/3), and x = s/(1-s)
// maps the range to s ∈ [0, s_max]; composite Simpson is ample.
fn autonomous_lifespan(threshold: f64) -> f64 {
    let x_max = (threshold - 1.0).sqrt();
    let s_max = x_max / (1.0 + x_max);
    let g = |s: f64| {
        let x = s / (1.0 - s);
        let jac = 1.0 / ((1.0 - s) * (1.0 - s));
        2.0 / (2.0 * (3.0 + 3.0 * x * x + x.powi(4)) / 3.0).sqrt() * jac
    };
    let n = 200_000;
    let h = s_max / n as f64;
    let mut sum = g(0.0) + g(s_max);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    1.0 + sum * h / 3.0
}

#[test]
fn autonomous_blowup_matches_quadrature() {
    let cfg = OdeConfig {
        p: 2.0,
        mu: 0.0,
        q: 0.0,
        a1: 1.0,
        r: 0.0,
        eps: 1.0,
        f_init_scale: 1.0,
        df_init_scale: 0.0,
        ..OdeConfig::default()
    };
    let res = integrate(&cfg).unwrap();
    assert_eq!(res.termination, Termination::Threshold);
    let oracle = autonomous_lifespan(cfg.blowup_threshold);
    assert_relative_eq!(res.t_num, oracle, max_relative = 1e-3);
    // tighter run as a second reference
    let tight = integrate(&OdeConfig { rel_tol: cfg.rel_tol / 10.0, abs_tol: cfg.abs_tol / 10.0, ..cfg }).unwrap();
    assert_relative_eq!(res.t_num, tight.t_num, max_relative = 1e-3);
}

#[test]
fn heatlike_sweep_is_deterministic_and_ordered() {
    let eps = log_space(1e-3, 1e-1, 8);
    let a = sweep(&OdeConfig::preset_heatlike_n2(), &eps).unwrap();
    let b = sweep(&OdeConfig::preset_heatlike_n2(), &eps).unwrap();
    assert_eq!(a.csv(), b.csv());
    assert!(a.fit.t_values.windows(2).all(|w| w[1] < w[0]));
    assert!(a.runs.iter().all(|r| monotone_invariant_check(r, 2.0)));
}

#[test]
fn halving_tolerances_barely_moves_lifespan() {
    let cfg = OdeConfig::preset_heatlike_n2();
    let a = integrate(&cfg).unwrap();
    let b = integrate(&OdeConfig { rel_tol: cfg.rel_tol / 2.0, abs_tol: cfg.abs_tol / 2.0, ..cfg }).unwrap();
    assert!((a.t_num / b.t_num - 1.0).abs() < 5e-3);
}

#[test]
fn critical_lifespan_is_log_convex() {
    let eps = log_space(0.05, 0.5, 8);
    let res = sweep(&OdeConfig::preset_critical_n2(), &eps).unwrap();
    let x: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let y: Vec<f64> = res.fit.t_values.iter().map(|t| t.ln()).collect();
    assert!(second_differences(&x, &y).iter().all(|&d| d >= -1e-6));
}

#[test]
fn horizon_is_reported_with_offending_eps() {
    let cfg = OdeConfig { t_max: 50.0, ..OdeConfig::preset_heatlike_n2() };
    match sweep(&cfg, &[1e-3, 2e-3, 0.05, 0.1]) {
        Err(flrw_core::Error::Horizon { eps }) => assert_eq!(eps, vec![1e-3, 2e-3]),
        other => panic!("unexpected {other:?}"),
    }
}
