//! Python bindings. Reports come back as plain dicts.

use gapprob::ensemble_mc::{brownian_to_source, mc_gap_probability, McConfig};
use gapprob::pde_source::{residual_source_pde, PdeFdConfig};
use gapprob::pearcey::fredholm::{fredholm_log_det, fredholm_log_det_mp};
use gapprob::pearcey::functions::{pearcey_p, pearcey_q};
use gapprob::pearcey::kernel::kernel;
use gapprob::pearcey::pde::{residual_pearcey_pde, residual_pearcey_pde_mp, ChartKind, PearceyFdConfig, PearceyForm};
use gapprob::pearcey::scaling::scaling_limit_report;
use gapprob::tau::gap_probability as gap_probability_rs;
use gapprob::tau::identities::{check_identity as check_identity_rs, FdConfig, IdentityId};
use gapprob::{Error, IntervalUnion, PrecisionConfig, SourceSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn set(s: &str) -> PyResult<IntervalUnion> {
    IntervalUnion::parse(s).map_err(err)
}

fn spec(a: f64, k1: usize, k2: usize) -> PyResult<SourceSpec> {
    SourceSpec::new(a, k1, k2).map_err(err)
}

fn to_dict<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// P(all eigenvalues of A + H lie in E); E is "lo,hi;lo,hi".
#[pyfunction]
#[pyo3(signature = (a, k1, k2, e, digits = 40))]
fn gap_probability(py: Python<'_>, a: f64, k1: usize, k2: usize, e: &str, digits: u32) -> PyResult<f64> {
    let (s, e) = (spec(a, k1, k2)?, set(e)?);
    py.detach(|| gap_probability_rs(&s, &e, &PrecisionConfig::with_digits(digits))).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, k1, k2, e, samples = 100_000, seed = 0))]
fn mc_gap_probability_py(
    py: Python<'_>,
    a: f64,
    k1: usize,
    k2: usize,
    e: &str,
    samples: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let (s, e) = (spec(a, k1, k2)?, set(e)?);
    let r = py.detach(|| mc_gap_probability(&s, &e, &McConfig { samples, seed })).map_err(err)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (identity, a, k1, k2, e, digits = 40, step = None, levels = 2))]
#[allow(clippy::too_many_arguments)]
fn check_identity(
    py: Python<'_>,
    identity: &str,
    a: f64,
    k1: usize,
    k2: usize,
    e: &str,
    digits: u32,
    step: Option<f64>,
    levels: usize,
) -> PyResult<Py<PyAny>> {
    let id: IdentityId = identity.parse().map_err(err)?;
    let (s, e) = (spec(a, k1, k2)?, set(e)?);
    let fd = FdConfig { step, levels };
    let r = py.detach(|| check_identity_rs(id, &s, &e, &fd, &PrecisionConfig::with_digits(digits))).map_err(err)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (a, k1, k2, e, digits = 40, step = None, levels = 4))]
#[allow(clippy::too_many_arguments)]
fn source_pde_residual(
    py: Python<'_>,
    a: f64,
    k1: usize,
    k2: usize,
    e: &str,
    digits: u32,
    step: Option<f64>,
    levels: usize,
) -> PyResult<Py<PyAny>> {
    let (s, e) = (spec(a, k1, k2)?, set(e)?);
    let fd = PdeFdConfig { step, levels };
    let r = py.detach(|| residual_source_pde(&s, &e, &fd, &PrecisionConfig::with_digits(digits))).map_err(err)?;
    to_dict(py, &r)
}

/// d-th derivative of the Pearcey integral p at x.
#[pyfunction]
#[pyo3(signature = (x, t, d = 0))]
fn pearcey_p_py(x: f64, t: f64, d: usize) -> f64 {
    pearcey_p(x, t, d)
}

#[pyfunction]
#[pyo3(signature = (y, t, d = 0))]
fn pearcey_q_py(y: f64, t: f64, d: usize) -> f64 {
    pearcey_q(y, t, d)
}

#[pyfunction]
fn pearcey_kernel(x: f64, y: f64, t: f64) -> f64 {
    kernel(x, y, t)
}

/// log det(I - K_t χ_E); double precision unless `digits` is given.
#[pyfunction]
#[pyo3(signature = (t, e, order = 40, digits = None))]
fn pearcey_log_det(py: Python<'_>, t: f64, e: &str, order: usize, digits: Option<u32>) -> PyResult<f64> {
    let e = set(e)?;
    py.detach(|| match digits {
        None => fredholm_log_det(t, &e, order),
        Some(d) => fredholm_log_det_mp(t, &e, order, d),
    })
    .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (t, e, digits = None, order = 40, chart = "endpoints", form = "printed", h_t = None, h_x = None, levels = 4))]
#[allow(clippy::too_many_arguments)]
fn pearcey_pde_residual(
    py: Python<'_>,
    t: f64,
    e: &str,
    digits: Option<u32>,
    order: usize,
    chart: &str,
    form: &str,
    h_t: Option<f64>,
    h_x: Option<f64>,
    levels: usize,
) -> PyResult<Py<PyAny>> {
    let e = set(e)?;
    let chart = match chart {
        "endpoints" => ChartKind::Endpoints,
        "orbit" => ChartKind::Orbit,
        other => return Err(PyValueError::new_err(format!("unknown chart '{other}'"))),
    };
    let form = match form {
        "printed" => PearceyForm::Printed,
        "corrected" => PearceyForm::Corrected,
        other => return Err(PyValueError::new_err(format!("unknown form '{other}'"))),
    };
    let fd = PearceyFdConfig { h_t, h_x, levels, order, chart, form };
    let r = py
        .detach(|| match digits {
            None => residual_pearcey_pde(t, &e, &fd),
            Some(d) => residual_pearcey_pde_mp(t, &e, &fd, d),
        })
        .map_err(err)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (s, g, n_list, digits = 30))]
fn scaling_report(py: Python<'_>, s: f64, g: &str, n_list: Vec<usize>, digits: u32) -> PyResult<Py<PyAny>> {
    let g = set(g)?;
    let r = py.detach(|| scaling_limit_report(s, &g, &n_list, &PrecisionConfig::with_digits(digits))).map_err(err)?;
    to_dict(py, &r)
}

/// (u, V) for non-intersecting bridges at time t with endpoints ±a.
#[pyfunction]
fn brownian_map(t: f64, a: f64, e: &str) -> PyResult<(f64, String)> {
    let (u, v) = brownian_to_source(t, a, &set(e)?).map_err(err)?;
    Ok((u, v.to_string()))
}

#[pymodule]
fn pygapprob(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gap_probability, m)?)?;
    m.add("mc_gap_probability", wrap_pyfunction!(mc_gap_probability_py, m)?)?;
    m.add_function(wrap_pyfunction!(check_identity, m)?)?;
    m.add_function(wrap_pyfunction!(source_pde_residual, m)?)?;
    m.add("pearcey_p", wrap_pyfunction!(pearcey_p_py, m)?)?;
    m.add("pearcey_q", wrap_pyfunction!(pearcey_q_py, m)?)?;
    m.add_function(wrap_pyfunction!(pearcey_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(pearcey_log_det, m)?)?;
    m.add_function(wrap_pyfunction!(pearcey_pde_residual, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_report, m)?)?;
    m.add_function(wrap_pyfunction!(brownian_map, m)?)?;
    m.add("IDENTITIES", IdentityId::ALL.iter().map(|i| i.name()).collect::<Vec<_>>())?;
    Ok(())
}
