//! Python bindings: germs, 2-jet orbits, tangent cones and the full analysis as JSON.

use germkit::germ::{classify_2jet, corank, prenormalize};
use germkit::verdict::{analyze, AnalysisConfig};
use germkit::{cone, MapGerm};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: germkit::Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// A polynomial map germ (R^2, 0) -> (R^4, 0).
#[pyclass(name = "Germ", frozen)]
struct PyGerm {
    inner: MapGerm,
}

#[pymethods]
impl PyGerm {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: germkit::parse_map(text).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Germ('{}')", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn components(&self) -> Vec<String> {
        self.inner.components().iter().map(|p| p.to_string()).collect()
    }

    fn eval(&self, x: f64, y: f64) -> [f64; 4] {
        self.inner.numeric().eval(x, y)
    }

    fn corank(&self) -> u32 {
        corank(&self.inner)
    }

    fn classify_2jet(&self) -> String {
        classify_2jet(&self.inner).to_string()
    }

    /// Prenormal slots and orders as JSON.
    #[pyo3(signature = (degree = 12))]
    fn prenormalize(&self, degree: u32) -> PyResult<String> {
        let f = prenormalize(&self.inner, degree).map_err(err)?;
        let slots: Vec<String> = f.series.iter().map(|p| p.to_string()).collect();
        json(&serde_json::json!({ "slots": slots, "orders": f.orders, "exact": f.exact }))
    }

    /// Tangent cone as JSON: kind, orthonormal basis, boundary direction.
    #[pyo3(signature = (degree = 12))]
    fn tangent_cone(&self, degree: u32) -> PyResult<String> {
        json(&cone::tangent_cone_of(&self.inner, degree).map_err(err)?)
    }

    /// Full report as JSON.
    #[pyo3(signature = (degree = 12, resolution = 64, seed = 0, epsilon = 0.1, radii = None))]
    fn analyze(&self, degree: u32, resolution: usize, seed: u64, epsilon: f64, radii: Option<Vec<f64>>) -> PyResult<String> {
        let mut cfg = AnalysisConfig {
            degree,
            resolution,
            seed,
            epsilon,
            ..AnalysisConfig::default()
        };
        if let Some(r) = radii {
            if r.len() < 4 {
                return Err(PyValueError::new_err("need at least 4 radii"));
            }
            cfg.radii = r;
        }
        json(&analyze(&self.inner, &cfg))
    }
}

/// Parses `"F1, F2, F3, F4"` and returns the canonical text.
#[pyfunction]
fn parse_map(text: &str) -> PyResult<String> {
    Ok(germkit::parse_map(text).map_err(err)?.to_string())
}

#[pymodule]
fn germkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGerm>()?;
    m.add_function(wrap_pyfunction!(parse_map, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
