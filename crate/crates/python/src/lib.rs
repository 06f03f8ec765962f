//! Thin Python bindings. Results come back as plain dicts of floats, lists
//! and strings; library errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use warpgeom::algebra::{check_jacobi as jacobi, check_symmetry, make_diagonal, DiagonalAlgebraSpec, Extended2DAlgebraSpec};
use warpgeom::centrality::{centrality_residual as residual, solve_omega as solve, DEFAULT_ORDER};
use warpgeom::cosmology::{friedmann_residuals, integrate, CosmologyParams};
use warpgeom::deformation::{warp_line_element as warp, DeformationMatrix};
use warpgeom::qoperators::{
    build_dx, build_qp, build_x, ccr_residual, verify_adjoint_action, verify_commutator, RepresentationConfig,
    EDGE_BUFFER,
};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn diagonal(a: Vec<f64>) -> PyResult<DiagonalAlgebraSpec<f64>> {
    DiagonalAlgebraSpec::new(a).map_err(value_error)
}

fn deformation(theta: Vec<Vec<f64>>) -> PyResult<DeformationMatrix> {
    DeformationMatrix::new(theta).map_err(value_error)
}

/// Jacobi check for the diagonal algebra `[x^μ, dx^ν] = i a_μ δ^{μν} dx^ν`.
#[pyfunction]
fn check_jacobi<'py>(py: Python<'py>, a: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let c = make_diagonal(&diagonal(a)?);
    let rep = jacobi(&c);
    let out = PyDict::new(py);
    out.set_item("max_residual", rep.max_residual)?;
    out.set_item("worst", rep.worst.map(|w| w.to_vec()))?;
    out.set_item("symmetric", check_symmetry(&c))?;
    out.set_item("consistent", rep.consistent)?;
    Ok(out)
}

/// The three constraints of the two-dimensional extended algebra; all zero
/// when it is consistent.
#[pyfunction]
fn extended_constraints(a: f64, e: f64, f: f64, h: f64, r: f64, s: f64) -> (f64, f64, f64) {
    Extended2DAlgebraSpec::new(a, e, f, h, r, s).constraints()
}

/// Deformed flat metric as a signature plus one exponent row per component:
/// `g_μμ = signature[μ] * exp(exponents[μ] · x)`.
#[pyfunction]
fn warp_line_element<'py>(py: Python<'py>, a: Vec<f64>, theta: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let metric = warp(&diagonal(a)?, &deformation(theta)?).map_err(value_error)?;
    let out = PyDict::new(py);
    out.set_item("signature", metric.signature.clone())?;
    out.set_item("exponents", metric.exponents.iter().map(|l| l.coefficients().to_vec()).collect::<Vec<_>>())?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (theta, c=1.0, a0=0.0, t_end=10.0, samples=201, t_start=0.0, rtol=None, atol=None))]
#[allow(clippy::too_many_arguments)]
fn integrate_cosmology<'py>(
    py: Python<'py>,
    theta: f64,
    c: f64,
    a0: f64,
    t_end: f64,
    samples: usize,
    t_start: f64,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut p = CosmologyParams::new(theta, c, a0, t_end);
    p.samples = samples;
    p.t_start = t_start;
    p.rtol = rtol.unwrap_or(p.rtol);
    p.atol = atol.unwrap_or(p.atol);
    let traj = integrate(&p).map_err(value_error)?;
    let r = friedmann_residuals(&traj, theta, c);
    let residuals = PyDict::new(py);
    residuals.set_item("energy", r.energy)?;
    residuals.set_item("acceleration", r.acceleration)?;
    residuals.set_item("continuity", r.continuity)?;
    residuals.set_item("constraint", r.constraint)?;
    let out = PyDict::new(py);
    out.set_item("t", traj.t.clone())?;
    out.set_item("a", traj.a.clone())?;
    out.set_item("adot", traj.adot.clone())?;
    out.set_item("rho", traj.rho.clone())?;
    out.set_item("max_constraint_drift", traj.max_constraint_drift)?;
    out.set_item("residuals", residuals)?;
    Ok(out)
}

/// Scalar Moyal parameter making the warped metric central, plus the
/// equations it leaves unsatisfied.
#[pyfunction]
fn solve_omega<'py>(py: Python<'py>, a: Vec<f64>, theta: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let sol = solve(&diagonal(a)?, &deformation(theta)?).map_err(value_error)?;
    let out = PyDict::new(py);
    out.set_item("omega", sol.omega)?;
    out.set_item("omega_exact", sol.omega_exact.as_ref().map(ToString::to_string))?;
    out.set_item("consistent", sol.consistent)?;
    out.set_item("violated", sol.violated().iter().map(ToString::to_string).collect::<Vec<_>>())?;
    Ok(out)
}

/// Centrality residual for `n` spatial directions sharing one time-space
/// entry, with Ω taken from `solve_omega`.
#[pyfunction]
#[pyo3(signature = (n, theta, order=DEFAULT_ORDER))]
fn centrality_residual<'py>(py: Python<'py>, n: usize, theta: f64, order: u32) -> PyResult<Bound<'py, PyDict>> {
    let spec = DiagonalAlgebraSpec::ones(n + 1);
    let theta = DeformationMatrix::time_space(&vec![theta; n]).map_err(value_error)?;
    let sol = solve(&spec, &theta).map_err(value_error)?;
    let moyal = sol.moyal(n).ok_or_else(|| PyValueError::new_err("no scalar Ω solves the system"))?;
    let rep = residual(&spec, &theta, &moyal, order).map_err(value_error)?;
    let failing: Vec<(usize, usize, usize, f64, Option<f64>)> =
        rep.failing().map(|c| (c.mu, c.nu, c.rho, c.max, c.required_scale)).collect();
    let out = PyDict::new(py);
    out.set_item("omega", sol.omega)?;
    out.set_item("order", rep.order)?;
    out.set_item("exact_zero", rep.exact_zero)?;
    out.set_item("max_residual", rep.max_residual)?;
    out.set_item("failing", failing)?;
    Ok(out)
}

/// Truncated-matrix residuals of the operator surrogate.
#[pyfunction]
#[pyo3(signature = (dim=64, scale=1.0, weight=1.0, p=0.3))]
fn operator_residuals<'py>(py: Python<'py>, dim: usize, scale: f64, weight: f64, p: f64) -> PyResult<Bound<'py, PyDict>> {
    let repr = RepresentationConfig::new(dim, scale, weight).map_err(value_error)?;
    let x = build_x(&repr).map_err(value_error)?;
    let dx = build_dx(&repr, &x).map_err(value_error)?;
    let (q, pm) = build_qp(dim);
    let block = dim - EDGE_BUFFER;
    let out = PyDict::new(py);
    out.set_item("ccr", ccr_residual(dim, block))?;
    out.set_item("commutator", verify_commutator(&x, &dx, scale, block).map_err(value_error)?)?;
    out.set_item("adjoint", verify_adjoint_action(&x, &dx, scale, p).map_err(value_error)?)?;
    out.set_item("hermiticity", [&q, &pm, &x, &dx].iter().map(|o| o.hermiticity_defect()).fold(0.0, f64::max))?;
    Ok(out)
}

#[pymodule]
fn pywarpgeom(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check_jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(extended_constraints, m)?)?;
    m.add_function(wrap_pyfunction!(warp_line_element, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_cosmology, m)?)?;
    m.add_function(wrap_pyfunction!(solve_omega, m)?)?;
    m.add_function(wrap_pyfunction!(centrality_residual, m)?)?;
    m.add_function(wrap_pyfunction!(operator_residuals, m)?)?;
    Ok(())
}
