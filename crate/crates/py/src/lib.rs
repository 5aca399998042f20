//! Python bindings. Scalar special functions come back as complex numbers,
//! suite runners as JSON report strings, and spectra as a `Spectrum` class
//! wrapping the grid representation.

use std::collections::HashMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use shapiro::geometry::{self, ConeVector, HyperPoint};
use shapiro::quad::QuadratureSpec;
use shapiro::quantum::{plane_wave, PlaneWaveLabel};
use shapiro::special;
use shapiro::suites::{classical_suite, plancherel_suite, quantum_suite, ToleranceMap};
use shapiro::transform::{
    forward_transform, inverse_transform, plancherel_check, roundtrip_l2_error, test_function,
    HyperFunction, SpectralFunction,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn run_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn quad_from(overrides: Option<HashMap<String, f64>>) -> PyResult<QuadratureSpec> {
    let mut quad = QuadratureSpec::default();
    let Some(overrides) = overrides else {
        return Ok(quad);
    };
    for (key, value) in overrides {
        if !value.is_finite() || value <= 0.0 {
            return Err(value_err(format!(
                "quadrature key {key:?} must be positive and finite, got {value}"
            )));
        }
        let count = value.round() as usize;
        match key.as_str() {
            "spherical_degree" => quad.spherical_degree = count,
            "radial_order" => quad.radial_order = count,
            "radial_cutoff" => quad.radial_cutoff = value,
            "rho_max" => quad.rho_max = value,
            "rho_count" => quad.rho_count = count.max(2),
            other => {
                return Err(value_err(format!(
                    "unknown quadrature key {other:?} (expected spherical_degree, \
                     radial_order, radial_cutoff, rho_max or rho_count)"
                )))
            }
        }
    }
    Ok(quad)
}

fn tolerances_from(overrides: Option<HashMap<String, f64>>) -> ToleranceMap {
    overrides.map(|m| m.into_iter().collect()).unwrap_or_default()
}

fn named(name: &str, params: Vec<f64>) -> PyResult<HyperFunction> {
    test_function(name, &params).ok_or_else(|| {
        value_err(format!(
            "unknown test function {name:?} (expected gaussian, offcenter, bump, \
             modwave or narrow)"
        ))
    })
}

/// log Gamma with the standard principal branch.
#[pyfunction]
fn log_gamma(z: Complex64) -> PyResult<Complex64> {
    special::log_gamma(z).map_err(value_err)
}

/// Coefficient function satisfying g(z) g(z + i) = 2z + i.
#[pyfunction]
fn g_of_h(z: Complex64) -> PyResult<Complex64> {
    special::g_of_h(z).map_err(value_err)
}

/// Finite-shift ladder coefficient; g(0, rho) = 1 exactly.
#[pyfunction]
fn ladder_coefficient(u: f64, rho: f64) -> PyResult<Complex64> {
    special::ladder_coefficient(u, rho)
        .map(|c| c.value)
        .map_err(value_err)
}

/// Ladder coefficient continued to complex shift u.
#[pyfunction]
fn ladder_coefficient_continued(u: Complex64, rho: f64) -> PyResult<Complex64> {
    special::ladder_coefficient_continued(u, rho).map_err(value_err)
}

/// Residual of the contour-integral power identity at (u, mu).
#[pyfunction]
fn mellin_barnes_residual(u: f64, mu: f64) -> PyResult<f64> {
    special::verify_mellin_barnes_power(u, mu).map_err(value_err)
}

/// Plane wave with label (omega, n, rho) evaluated at the point lifted
/// from spatial coordinates x.
#[pyfunction]
fn plane_wave_value(omega: f64, n: [f64; 3], rho: f64, x: [f64; 3]) -> PyResult<Complex64> {
    let k = ConeVector::new(omega, n, -1).map_err(value_err)?;
    let label = PlaneWaveLabel { k, rho };
    Ok(plane_wave(&label).evaluate(&HyperPoint::lift(x)))
}

/// Minkowski pairing x . k between a lifted point and a cone vector.
#[pyfunction]
fn pairing(x: [f64; 3], omega: f64, n: [f64; 3]) -> PyResult<f64> {
    let k = ConeVector::new(omega, n, -1).map_err(value_err)?;
    Ok(geometry::pairing(&HyperPoint::lift(x), &k))
}

#[pyfunction]
#[pyo3(signature = (seed = 42, tolerances = None, command = "python"))]
fn classical_report(
    seed: u64,
    tolerances: Option<HashMap<String, f64>>,
    command: &str,
) -> String {
    classical_suite(seed, &tolerances_from(tolerances), command).to_json()
}

#[pyfunction]
#[pyo3(signature = (seed = 42, tolerances = None, rho_grid = None, quad = None, command = "python"))]
fn quantum_report(
    seed: u64,
    tolerances: Option<HashMap<String, f64>>,
    rho_grid: Option<Vec<f64>>,
    quad: Option<HashMap<String, f64>>,
    command: &str,
) -> PyResult<String> {
    let quad = quad_from(quad)?;
    Ok(quantum_suite(
        seed,
        &tolerances_from(tolerances),
        rho_grid.as_deref(),
        &quad,
        command,
    )
    .to_json())
}

#[pyfunction]
#[pyo3(signature = (seed = 42, tolerances = None, quad = None, command = "python"))]
fn plancherel_report(
    seed: u64,
    tolerances: Option<HashMap<String, f64>>,
    quad: Option<HashMap<String, f64>>,
    command: &str,
) -> PyResult<String> {
    let quad = quad_from(quad)?;
    Ok(plancherel_suite(seed, &tolerances_from(tolerances), &quad, command).to_json())
}

/// Spectral data on the (directions) x (uniform rho grid) product.
#[pyclass]
struct Spectrum {
    inner: SpectralFunction,
}

#[pymethods]
impl Spectrum {
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Spectrum> {
        SpectralFunction::from_csv(text)
            .map(|inner| Spectrum { inner })
            .map_err(value_err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn rho(&self) -> Vec<f64> {
        self.inner.rho.clone()
    }

    fn node_count(&self) -> usize {
        self.inner.nodes.len()
    }

    fn node_direction(&self, j: usize) -> PyResult<[f64; 3]> {
        self.inner
            .nodes
            .get(j)
            .map(|n| n.dir)
            .ok_or_else(|| PyIndexError::new_err(format!("node index {j} out of range")))
    }

    fn value(&self, j: usize, m: usize) -> PyResult<Complex64> {
        self.inner
            .values
            .get(j)
            .and_then(|row| row.get(m))
            .copied()
            .ok_or_else(|| PyIndexError::new_err(format!("index ({j}, {m}) out of range")))
    }

    fn tail_mass_fraction(&self) -> f64 {
        self.inner.tail_mass_fraction()
    }

    /// Inverse expansion at the point lifted from spatial coordinates x;
    /// returns (value, warnings).
    fn inverse_at(&self, x: [f64; 3]) -> (Complex64, Vec<String>) {
        let out = inverse_transform(&self.inner, &HyperPoint::lift(x));
        (out.value, out.warnings)
    }
}

/// Forward transform of a named test function; returns (Spectrum, warnings).
#[pyfunction]
#[pyo3(signature = (name, params = vec![], quad = None))]
fn forward(
    name: &str,
    params: Vec<f64>,
    quad: Option<HashMap<String, f64>>,
) -> PyResult<(Spectrum, Vec<String>)> {
    let quad = quad_from(quad)?;
    let f = named(name, params)?;
    let out = forward_transform(&f, &quad).map_err(run_err)?;
    Ok((Spectrum { inner: out.value }, out.warnings))
}

/// Relative L2 reconstruction error over the support ball; returns
/// (error, warnings).
#[pyfunction]
#[pyo3(signature = (name, params = vec![], quad = None))]
fn roundtrip_error(
    name: &str,
    params: Vec<f64>,
    quad: Option<HashMap<String, f64>>,
) -> PyResult<(f64, Vec<String>)> {
    let quad = quad_from(quad)?;
    let f = named(name, params)?;
    let out = roundtrip_l2_error(&f, &quad, 15, 32).map_err(run_err)?;
    Ok((out.value, out.warnings))
}

/// Norm identity check; returns ((lhs, rhs, ratio), warnings).
#[pyfunction]
#[pyo3(signature = (name, params = vec![], quad = None))]
fn plancherel(
    name: &str,
    params: Vec<f64>,
    quad: Option<HashMap<String, f64>>,
) -> PyResult<((f64, f64, f64), Vec<String>)> {
    let quad = quad_from(quad)?;
    let f = named(name, params)?;
    let out = plancherel_check(&f, &quad).map_err(run_err)?;
    Ok((
        (out.value.lhs, out.value.rhs, out.value.ratio),
        out.warnings,
    ))
}

#[pymodule]
fn shapiro_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(g_of_h, m)?)?;
    m.add_function(wrap_pyfunction!(ladder_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(ladder_coefficient_continued, m)?)?;
    m.add_function(wrap_pyfunction!(mellin_barnes_residual, m)?)?;
    m.add_function(wrap_pyfunction!(plane_wave_value, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(classical_report, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_report, m)?)?;
    m.add_function(wrap_pyfunction!(plancherel_report, m)?)?;
    m.add_function(wrap_pyfunction!(forward, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip_error, m)?)?;
    m.add_function(wrap_pyfunction!(plancherel, m)?)?;
    m.add_class::<Spectrum>()?;
    Ok(())
}
