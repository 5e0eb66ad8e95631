//! Python bindings. Parameter sets are classes; configs go in as JSON strings
//! (the same documents the CLI reads) and structured results come back as dicts.

use flrw_core::blowup_ode::{self, OdeConfig};
use flrw_core::pde::{self, PdeConfig};
use flrw_core::region_map::MapConfig;
use flrw_core::{bounds, exponents, fit, kato, region_map, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::Horizon { .. } | Error::Serialization(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_json<T: DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid config: {e}")))
}

#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams(exponents::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    fn new(n: u32, alpha: f64, mu: f64) -> PyResult<Self> {
        exponents::ModelParams::new(n, alpha, mu).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    /// `n(1-α)`
    fn effective_dim(&self) -> f64 {
        self.0.effective_dim()
    }

    fn fujita(&self) -> f64 {
        self.0.fujita()
    }

    fn light_cone(&self, t: f64) -> f64 {
        self.0.light_cone(t)
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(n={}, alpha={}, mu={})", self.0.n, self.0.alpha, self.0.mu)
    }
}

#[pyclass(name = "FlrwParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyFlrwParams(exponents::FlrwParams);

#[pymethods]
impl PyFlrwParams {
    #[new]
    fn new(n: u32, w: f64) -> PyResult<Self> {
        exponents::FlrwParams::new(n, w).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n
    }

    #[getter]
    fn w(&self) -> f64 {
        self.0.w
    }

    #[allow(clippy::wrong_self_convention)]
    fn to_model(&self) -> PyResult<PyModelParams> {
        exponents::flrw_to_model(&self.0).map(PyModelParams).map_err(err)
    }

    /// Positive root of `γ₀(n, ·, w)`, or infinity when there is none.
    fn p_c(&self) -> PyResult<f64> {
        exponents::p_c_flrw(&self.0).map(|r| r.or_infinity()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("FlrwParams(n={}, w={})", self.0.n, self.0.w)
    }
}

#[pyfunction]
fn fujita(d: f64) -> PyResult<f64> {
    exponents::fujita(d).map_err(err)
}

#[pyfunction]
fn strauss(n: u32) -> PyResult<f64> {
    exponents::strauss(n).map_err(err)
}

#[pyfunction]
fn gamma(params: PyModelParams, p: f64) -> PyResult<f64> {
    exponents::gamma(&params.0, p).map_err(err)
}

/// Coefficients `(c2, c1, c0)` of `γ(n, ·, α, μ)`.
#[pyfunction]
fn gamma_coefficients(params: PyModelParams) -> PyResult<(f64, f64, f64)> {
    let q = exponents::gamma_quadratic(&params.0).map_err(err)?;
    Ok((q.c2, q.c1, q.c0))
}

#[pyfunction]
fn p_c(params: PyModelParams) -> PyResult<f64> {
    exponents::p_c(&params.0).map(|r| r.or_infinity()).map_err(err)
}

#[pyfunction]
fn gamma0(n: u32, p: f64, w: f64) -> PyResult<f64> {
    exponents::gamma0(n, p, w).map_err(err)
}

#[pyfunction]
fn mu_star(n: u32, alpha: f64) -> PyResult<f64> {
    exponents::mu_star(n, alpha).map_err(err)
}

#[pyfunction]
fn w_star(n: u32) -> PyResult<Option<f64>> {
    exponents::w_star(n).map_err(err)
}

#[pyfunction]
fn threshold_a(params: PyModelParams) -> f64 {
    bounds::threshold_a(&params.0)
}

#[pyfunction]
fn threshold_c(params: PyModelParams) -> f64 {
    bounds::threshold_c(&params.0)
}

/// Region label (`"A"`, `"B"`, `"C"`, `"CriticalFujita"`, ...).
#[pyfunction]
fn classify(params: PyModelParams, p: f64) -> PyResult<&'static str> {
    bounds::classify(&params.0, p).map(|l| l.as_str()).map_err(err)
}

#[pyfunction]
fn all_bounds(py: Python<'_>, params: PyModelParams, p: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &bounds::all_bounds(&params.0, p).map_err(err)?)
}

#[pyclass(name = "RegionMap", frozen)]
struct PyRegionMap(region_map::RegionMap);

#[pymethods]
impl PyRegionMap {
    /// `"fig1"`, `"fig2"`, or a JSON map config.
    #[new]
    fn new(config: &str) -> PyResult<Self> {
        let cfg = match config {
            "fig1" => MapConfig::fig1(),
            "fig2" => MapConfig::fig2(),
            text => from_json(text)?,
        };
        region_map::region_map(&cfg).map(Self).map_err(err)
    }

    fn counts(&self) -> Vec<(&'static str, usize)> {
        self.0.counts().into_iter().map(|(l, c)| (l.as_str(), c)).collect()
    }

    fn label_at(&self, axis1: f64, axis2: f64) -> &'static str {
        let (i1, i2) = self.0.nearest(axis1, axis2);
        self.0.cell(i1, i2).label.as_str()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn to_svg(&self) -> String {
        self.0.to_svg()
    }
}

#[pyfunction]
#[pyo3(signature = (p, a, b, q, mu, a0, a1=1.0, r=1.0, t0=1.0, t1=2.0))]
#[allow(clippy::too_many_arguments)]
fn kato_threshold(
    py: Python<'_>,
    p: f64,
    a: f64,
    b: f64,
    q: f64,
    mu: f64,
    a0: f64,
    a1: f64,
    r: f64,
    t0: f64,
    t1: f64,
) -> PyResult<Py<PyAny>> {
    let kp = kato::KatoSubcriticalParams { p, a, b, q, mu, a0, a1, r, t0, t1 };
    to_py(py, &kato::subcritical_threshold(&kp).map_err(err)?)
}

/// Rows `(j, b_j, log C_j)` of the critical iteration.
#[pyfunction]
#[pyo3(signature = (p, b, mu, a0=1.0, j_max=20))]
fn kato_sequences(p: f64, b: f64, mu: f64, a0: f64, j_max: u32) -> PyResult<Vec<(u32, f64, f64)>> {
    let table = kato::iterate_sequences(&kato::KatoCriticalParams::new(p, b, mu, a0), j_max).map_err(err)?;
    Ok(table.states.iter().map(|s| (s.j, s.b_j, s.log_c_j)).collect())
}

#[pyfunction]
#[pyo3(signature = (p, b, mu, a0, delta=kato::DEFAULT_DELTA, horizon_decades=kato::DEFAULT_HORIZON_DECADES))]
fn kato_envelope(py: Python<'_>, p: f64, b: f64, mu: f64, a0: f64, delta: f64, horizon_decades: f64) -> PyResult<Py<PyAny>> {
    let kc = kato::KatoCriticalParams::new(p, b, mu, a0);
    to_py(py, &kato::envelope_divergence(&kc, delta, horizon_decades).map_err(err)?)
}

fn ode_config(config: &str) -> PyResult<OdeConfig> {
    match config {
        "heatlike-n2" => Ok(OdeConfig::preset_heatlike_n2()),
        "critical-n2" => Ok(OdeConfig::preset_critical_n2()),
        text => from_json(text),
    }
}

fn pde_config(config: &str) -> PyResult<PdeConfig> {
    match config {
        "heatlike-n2" | "default" => Ok(PdeConfig::default()),
        text => from_json(text),
    }
}

/// Integrates the comparison ODE. `config` is a preset name or a JSON config.
#[pyfunction]
#[pyo3(signature = (config, eps=None))]
fn ode_run(py: Python<'_>, config: &str, eps: Option<f64>) -> PyResult<Py<PyAny>> {
    let mut cfg = ode_config(config)?;
    if let Some(e) = eps {
        cfg.eps = e;
    }
    let res = py.detach(|| blowup_ode::integrate(&cfg)).map_err(err)?;
    to_py(py, &res)
}

/// Fit of `ln T` against `ln ε` over a log-spaced grid; runs are dropped from the result.
#[pyfunction]
fn ode_sweep(py: Python<'_>, config: &str, eps_min: f64, eps_max: f64, points: usize) -> PyResult<Py<PyAny>> {
    let cfg = ode_config(config)?;
    let eps = fit::log_space(eps_min, eps_max, points);
    let sweep = py.detach(|| blowup_ode::sweep(&cfg, &eps)).map_err(err)?;
    to_py(py, &sweep.fit)
}

/// Runs the radial solver; `samples` and `snapshots` are included in the dict.
#[pyfunction]
#[pyo3(signature = (config="default", eps=None))]
fn pde_run(py: Python<'_>, config: &str, eps: Option<f64>) -> PyResult<Py<PyAny>> {
    let mut cfg = pde_config(config)?;
    if let Some(e) = eps {
        cfg.eps = e;
    }
    let res = py.detach(|| pde::run(&cfg)).map_err(err)?;
    to_py(py, &res)
}

#[pyfunction]
fn pde_sweep(py: Python<'_>, config: &str, eps_min: f64, eps_max: f64, points: usize) -> PyResult<Py<PyAny>> {
    let cfg = pde_config(config)?;
    let eps = fit::log_space(eps_min, eps_max, points);
    let sweep = py.detach(|| pde::lifespan_sweep(&cfg, &eps)).map_err(err)?;
    to_py(py, &(&sweep.fit, &sweep.envelope))
}

#[pymodule]
fn flrw_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyFlrwParams>()?;
    m.add_class::<PyRegionMap>()?;
    m.add_function(wrap_pyfunction!(fujita, m)?)?;
    m.add_function(wrap_pyfunction!(strauss, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(p_c, m)?)?;
    m.add_function(wrap_pyfunction!(gamma0, m)?)?;
    m.add_function(wrap_pyfunction!(mu_star, m)?)?;
    m.add_function(wrap_pyfunction!(w_star, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_a, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_c, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(all_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(kato_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(kato_sequences, m)?)?;
    m.add_function(wrap_pyfunction!(kato_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(ode_run, m)?)?;
    m.add_function(wrap_pyfunction!(ode_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(pde_run, m)?)?;
    m.add_function(wrap_pyfunction!(pde_sweep, m)?)?;
    Ok(())
}
