//! Python module `iml`: thin wrappers over the driver.
//!
//! Points and vectors are sequences of Python numbers (complex allowed).
//! Reports come back as the dictionaries of the JSON report format.

#![allow(clippy::useless_conversion)]

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use iml_core::driver::{execute, exit_code, ExperimentConfig, Format, Operation};
use iml_core::Error;

create_exception!(iml, IMLError, PyValueError, "Raised with (message, exit status).");

fn to_py(e: Error) -> PyErr {
    IMLError::new_err((e.to_string(), exit_code(&e)))
}

fn coords(v: &[Complex64]) -> String {
    let one = |c: &Complex64| {
        let sign = if c.im.is_sign_negative() { "-" } else { "+" };
        format!("{}{sign}{}i", c.re, c.im.abs())
    };
    v.iter().map(one).collect::<Vec<_>>().join(",")
}

fn operation(name: &str) -> PyResult<Operation> {
    let quoted = serde_json::Value::String(name.replace(' ', "-"));
    serde_json::from_value(quoted).map_err(|_| IMLError::new_err((format!("unknown operation `{name}`"), 2)))
}

#[allow(clippy::too_many_arguments)]
fn config(
    toml: Option<&str>,
    domain: Option<&str>,
    z: Option<Vec<Complex64>>,
    x: Option<Vec<Complex64>>,
    w: Option<Vec<Complex64>>,
    m: Option<usize>,
    seed: Option<u64>,
    method: Option<&str>,
) -> PyResult<ExperimentConfig> {
    let mut cfg = match toml {
        Some(t) => ExperimentConfig::from_toml(t).map_err(to_py)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = domain {
        cfg.domain = d.parse().map_err(to_py)?;
        cfg.verify.prop2_domains = vec![d.to_string()];
        cfg.verify.theorem1_domains = vec![d.to_string()];
    }
    cfg.z = z.as_deref().map(coords).or(cfg.z);
    cfg.x = x.as_deref().map(coords).or(cfg.x);
    cfg.w = w.as_deref().map(coords).or(cfg.w);
    if let Some(m) = m {
        cfg.m = m;
        cfg.verify.m = vec![m];
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(meth) = method {
        let quoted = serde_json::Value::String(meth.to_string());
        cfg.method = serde_json::from_value(quoted)
            .map_err(|_| IMLError::new_err((format!("unknown method `{meth}`"), 2)))?;
    }
    Ok(cfg)
}

fn report_dict(py: Python<'_>, op: Operation, cfg: &ExperimentConfig) -> PyResult<PyObject> {
    let report = py.allow_threads(|| execute(op, cfg)).map_err(to_py)?;
    let json = PyModule::import_bound(py, "json")?;
    Ok(json.call_method1("loads", (report.render(Format::Json),))?.unbind())
}

/// Runs one operation (`metric`, `lempert`, `higher`, `hull`, `derivative`,
/// `verify-prop2`, `verify-theorem1`, `verify-all`, `example3`,
/// `example3-dump`, `curve-length`) and returns the report.
#[pyfunction]
#[pyo3(signature = (operation, config=None, domain=None, z=None, x=None, w=None, m=None, seed=None, method=None))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    operation: &str,
    config: Option<&str>,
    domain: Option<&str>,
    z: Option<Vec<Complex64>>,
    x: Option<Vec<Complex64>>,
    w: Option<Vec<Complex64>>,
    m: Option<usize>,
    seed: Option<u64>,
    method: Option<&str>,
) -> PyResult<PyObject> {
    let op = self::operation(operation)?;
    let cfg = self::config(config, domain, z, x, w, m, seed, method)?;
    report_dict(py, op, &cfg)
}

fn first_value(py: Python<'_>, op: Operation, cfg: &ExperimentConfig) -> PyResult<f64> {
    let report = py.allow_threads(|| execute(op, cfg)).map_err(to_py)?;
    let col = report.column("value").expect("value column");
    match &report.rows[0][col] {
        iml_core::driver::Cell::Num(v) => Ok(*v),
        other => Err(IMLError::new_err((format!("unexpected cell {other:?}"), 1))),
    }
}

/// Kobayashi-Royden metric, or a certified upper bound for it.
#[pyfunction]
#[pyo3(signature = (domain, z, x, method="auto", seed=0))]
fn kappa(py: Python<'_>, domain: &str, z: Vec<Complex64>, x: Vec<Complex64>, method: &str, seed: u64) -> PyResult<f64> {
    let cfg = config(None, Some(domain), Some(z), Some(x), None, None, Some(seed), Some(method))?;
    first_value(py, Operation::Metric, &cfg)
}

/// Lempert function `k̃*(z, w)`, or a certified upper bound for it.
#[pyfunction]
#[pyo3(signature = (domain, z, w, method="auto", seed=0))]
fn lempert_star(
    py: Python<'_>,
    domain: &str,
    z: Vec<Complex64>,
    w: Vec<Complex64>,
    method: &str,
    seed: u64,
) -> PyResult<f64> {
    let cfg = config(None, Some(domain), Some(z), None, Some(w), None, Some(seed), Some(method))?;
    first_value(py, Operation::Lempert, &cfg)
}

/// The default configuration as TOML.
#[pyfunction]
fn default_config() -> String {
    ExperimentConfig::default().to_toml()
}

#[pymodule]
fn iml(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IMLError", m.py().get_type_bound::<IMLError>())?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(lempert_star, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    Ok(())
}
