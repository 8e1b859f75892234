//! Python module `hip`: sampling, intersection points, reconstruction and
//! variance scaling. Structured results come back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hip_core::geometry::{BodySpec, ConvexBody, Hyperplane};
use hip_core::intersection::intersection_points as enumerate_points;
use hip_core::process::{DirectionalModel, WorldOracle};
use hip_core::reconstruct::ReconstructionParams;
use hip_core::stats::{reconstruct_seed, variance_scaling as scaling, ScalingConfig};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn rows_to_hyperplanes(rows: Vec<Vec<f64>>) -> PyResult<Vec<Hyperplane>> {
    rows.into_iter()
        .map(|mut r| {
            let s = r.pop().ok_or_else(|| value_error("empty hyperplane row"))?;
            Hyperplane::new(r, s).map_err(value_error)
        })
        .collect()
}

/// Hyperplanes hitting `B(0, radius)` as rows `[u_1, ..., u_d, s]`.
#[pyfunction]
#[pyo3(signature = (radius, seed, d = 2, gamma = 1.0))]
fn sample_hyperplanes(radius: f64, seed: u64, d: usize, gamma: f64) -> PyResult<Vec<Vec<f64>>> {
    let model = DirectionalModel::isotropic(d, gamma).map_err(value_error)?;
    let oracle = WorldOracle::sample_hitting(&model, radius, seed).map_err(value_error)?;
    Ok(oracle.hyperplanes().iter().map(|h| h.hyperplane.to_row()).collect())
}

/// Intersection points of the given hyperplane rows inside the centred
/// ball of radius `window_radius`.
#[pyfunction]
fn intersection_points(hyperplanes: Vec<Vec<f64>>, window_radius: f64) -> PyResult<Vec<Vec<f64>>> {
    let hs = rows_to_hyperplanes(hyperplanes)?;
    let Some(d) = hs.first().map(|h| h.dim()) else {
        return Ok(Vec::new());
    };
    let window = ConvexBody::ball(vec![0.0; d], window_radius).map_err(value_error)?;
    Ok(enumerate_points(&hs, &window).points.into_iter().map(|p| p.x).collect())
}

/// Reconstructs the hyperplanes hitting the centred ball of radius
/// `body_radius` from intersection points outside it.
#[pyfunction]
#[pyo3(signature = (seed, d = 2, gamma = 1.0, body_radius = 1.0, max_radius = None))]
fn reconstruct<'py>(
    py: Python<'py>,
    seed: u64,
    d: usize,
    gamma: f64,
    body_radius: f64,
    max_radius: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let model = DirectionalModel::isotropic(d, gamma).map_err(value_error)?;
    let body = ConvexBody::ball(vec![0.0; d], body_radius).map_err(value_error)?;
    let params = ReconstructionParams {
        max_radius,
        ..Default::default()
    };
    let (res, _) = reconstruct_seed(&model, &body, &params, seed).map_err(value_error)?;
    to_py(py, &res.to_json())
}

/// Variance of the `m`-th intersection measure in dilated unit balls, with
/// the log-log slope.
#[pyfunction]
#[pyo3(signature = (radii, reps, seed, d = 2, m = None, gamma = 1.0))]
fn variance_scaling<'py>(
    py: Python<'py>,
    radii: Vec<f64>,
    reps: usize,
    seed: u64,
    d: usize,
    m: Option<usize>,
    gamma: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let model = DirectionalModel::isotropic(d, gamma).map_err(value_error)?;
    let window = BodySpec::Ball {
        center: vec![0.0; d],
        radius: 1.0,
    };
    let mut cfg = ScalingConfig::new(model, m.unwrap_or(d), window, radii, reps, seed);
    cfg.bootstrap = 200;
    let rep = scaling(&cfg).map_err(value_error)?;
    let rows: Vec<_> = rep
        .rows
        .iter()
        .map(|r| serde_json::json!({ "r": r.r, "mean": r.summary.mean, "variance": r.summary.variance }))
        .collect();
    to_py(
        py,
        &serde_json::json!({ "slope": rep.fit.slope, "slope_ci": rep.slope_ci, "rows": rows }),
    )
}

#[pymodule]
pub fn hip(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", hip_core::report::TOOL_VERSION)?;
    m.add_function(wrap_pyfunction!(sample_hyperplanes, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_points, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(variance_scaling, m)?)?;
    Ok(())
}
