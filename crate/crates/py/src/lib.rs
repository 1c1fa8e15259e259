//! Python bindings: polytope construction and generators, volume estimation,
//! exact oracles and the zonotope reduction fitness.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use polyvol::bodies::ConvexBody;
use polyvol::linalg::Matrix;
use polyvol::sampling::RngStream;
use polyvol::{gen, io, oracle, zonored, BodyChoice, Error, VolumeConfig, WalkMode};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::ScheduleFailed(_) | Error::StepCap(_) | Error::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(py_err)
}

fn representation(rep: &str) -> PyResult<polyvol::Representation> {
    match rep.to_ascii_lowercase().as_str() {
        "h" => Ok(polyvol::Representation::H),
        "v" => Ok(polyvol::Representation::V),
        "z" => Ok(polyvol::Representation::Z),
        _ => Err(PyValueError::new_err(format!("unknown representation '{rep}', expected h, v or z"))),
    }
}

/// A convex polytope in H-, V- or Z-representation.
#[pyclass(frozen, module = "polyvol")]
struct Polytope {
    inner: polyvol::Polytope,
}

#[pymethods]
impl Polytope {
    /// `{x : A x <= b}`.
    #[staticmethod]
    fn from_h(a: Vec<Vec<f64>>, b: Vec<f64>) -> PyResult<Self> {
        let p = polyvol::HPolytope::new(matrix(a)?, b).map_err(py_err)?;
        Ok(Self { inner: polyvol::Polytope::H(p) })
    }

    /// Convex hull of the given vertices (one per row).
    #[staticmethod]
    fn from_v(vertices: Vec<Vec<f64>>) -> PyResult<Self> {
        let p = polyvol::VPolytope::new(matrix(vertices)?).map_err(py_err)?;
        Ok(Self { inner: polyvol::Polytope::V(p) })
    }

    /// Zonotope `G [-1, 1]^k` from its generators (one per row).
    #[staticmethod]
    fn from_generators(generators: Vec<Vec<f64>>) -> PyResult<Self> {
        let g = Matrix::from_cols(&generators).map_err(py_err)?;
        let z = polyvol::Zonotope::new(g).map_err(py_err)?;
        Ok(Self { inner: polyvol::Polytope::Z(z) })
    }

    /// Parse `.ine` (h), `.ext` (v) or zonotope (z) text.
    #[staticmethod]
    fn parse(text: &str, rep: &str) -> PyResult<Self> {
        let inner = io::parse_polytope(text, representation(rep)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: PathBuf, rep: &str) -> PyResult<Self> {
        let inner = io::read_polytope(&path, representation(rep)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[pyo3(signature = (name="polytope"))]
    fn to_text(&self, name: &str) -> String {
        io::write_polytope(&self.inner, name)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Facets, vertices or generators.
    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn representation(&self) -> String {
        self.inner.representation().to_string()
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        self.inner.contains(&x).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Polytope(rep='{}', dim={}, size={})",
            self.inner.representation(),
            self.inner.dim(),
            self.inner.size()
        )
    }
}

/// Result of one volume estimation.
#[pyclass(frozen, module = "polyvol")]
struct VolumeReport {
    inner: polyvol::VolumeReport,
}

#[pymethods]
impl VolumeReport {
    #[getter]
    fn log_volume(&self) -> f64 {
        self.inner.log_volume
    }

    /// `None` when the volume under- or overflows a float.
    #[getter]
    fn volume(&self) -> Option<f64> {
        self.inner.volume
    }

    /// Number of annealing phases.
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn ratios(&self) -> Vec<f64> {
        self.inner.ratios.clone()
    }

    #[getter]
    fn steps_total(&self) -> u64 {
        self.inner.steps_total
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn body(&self) -> String {
        self.inner.body.to_string()
    }

    #[getter]
    fn walk(&self) -> String {
        self.inner.walk.to_string()
    }

    #[getter]
    fn time_seconds(&self) -> f64 {
        self.inner.time_seconds
    }

    /// The full report, diagnostics included.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "VolumeReport(volume={}, log_volume={:.6}, m={}, steps_total={})",
            self.inner.volume.map_or_else(|| "None".to_string(), |v| v.to_string()),
            self.inner.log_volume, self.inner.m, self.inner.steps_total
        )
    }
}

fn config(error: f64, seed: u64, walk: Option<&str>, body: &str, round: bool) -> PyResult<VolumeConfig> {
    let walk = match walk.map(str::to_ascii_lowercase).as_deref() {
        None | Some("auto") => None,
        Some("cdhr") => Some(WalkMode::Cdhr),
        Some("rdhr") => Some(WalkMode::Rdhr),
        Some(w) => return Err(PyValueError::new_err(format!("unknown walk '{w}'"))),
    };
    let body = match body.to_ascii_lowercase().as_str() {
        "auto" => BodyChoice::Auto,
        "ball" => BodyChoice::Ball,
        "hpoly" => BodyChoice::Hpoly,
        b => return Err(PyValueError::new_err(format!("unknown body '{b}'"))),
    };
    Ok(VolumeConfig {
        epsilon: error,
        body,
        walk,
        seed,
        round,
        ..VolumeConfig::default()
    })
}

/// Estimate the volume of `p` to relative error about `error`.
#[pyfunction]
#[pyo3(signature = (p, error=0.1, seed=0, walk=None, body="auto", round=false))]
fn volume(py: Python<'_>, p: &Polytope, error: f64, seed: u64, walk: Option<&str>, body: &str, round: bool) -> PyResult<VolumeReport> {
    let cfg = config(error, seed, walk, body, round)?;
    let poly = p.inner.clone();
    let inner = py.detach(move || polyvol::volume(&poly, &cfg)).map_err(py_err)?;
    Ok(VolumeReport { inner })
}

/// PCA order reduction fitness `R = (vol(P_red) / vol(P))^(1/d)`.
#[pyfunction]
#[pyo3(signature = (z, error=0.1, seed=0))]
fn fitness(py: Python<'_>, z: &Polytope, error: f64, seed: u64) -> PyResult<(f64, f64, f64)> {
    let polyvol::Polytope::Z(zono) = &z.inner else {
        return Err(PyValueError::new_err("fitness needs a zonotope"));
    };
    let zono = zono.clone();
    let cfg = config(error, seed, None, "auto", false)?;
    let f = py.detach(move || zonored::fitness(&zono, &cfg)).map_err(py_err)?;
    Ok((f.r, f.vol_p_log, f.vol_red_log))
}

#[pyfunction]
fn cube(d: usize) -> Polytope {
    Polytope { inner: polyvol::Polytope::H(gen::cube(d)) }
}

#[pyfunction]
fn cross(d: usize) -> Polytope {
    Polytope { inner: polyvol::Polytope::V(gen::cross(d)) }
}

#[pyfunction]
fn simplex(d: usize) -> Polytope {
    Polytope { inner: polyvol::Polytope::V(gen::simplex(d)) }
}

#[pyfunction]
#[pyo3(signature = (d, m, seed=0))]
fn rh(d: usize, m: usize, seed: u64) -> PyResult<Polytope> {
    let p = gen::rh(d, m, &mut RngStream::new(seed)).map_err(py_err)?;
    Ok(Polytope { inner: polyvol::Polytope::H(p) })
}

#[pyfunction]
#[pyo3(signature = (d, n, seed=0))]
fn rv(d: usize, n: usize, seed: u64) -> PyResult<Polytope> {
    let p = gen::rv(d, n, &mut RngStream::new(seed)).map_err(py_err)?;
    Ok(Polytope { inner: polyvol::Polytope::V(p) })
}

#[pyfunction]
#[pyo3(signature = (d, k, seed=0))]
fn zonotope(d: usize, k: usize, seed: u64) -> PyResult<Polytope> {
    let z = gen::zono(d, k, &mut RngStream::new(seed)).map_err(py_err)?;
    Ok(Polytope { inner: polyvol::Polytope::Z(z) })
}

/// Exact log volume of a zonotope (at most 10^6 generator subsets).
#[pyfunction]
fn exact_zonotope_log(z: &Polytope) -> PyResult<f64> {
    match &z.inner {
        polyvol::Polytope::Z(z) => oracle::exact_zonotope(z).map_err(py_err),
        _ => Err(PyValueError::new_err("exact_zonotope_log needs a zonotope")),
    }
}

#[pymodule]
#[pyo3(name = "polyvol")]
fn polyvol_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Polytope>()?;
    m.add_class::<VolumeReport>()?;
    m.add_function(wrap_pyfunction!(volume, m)?)?;
    m.add_function(wrap_pyfunction!(fitness, m)?)?;
    m.add_function(wrap_pyfunction!(cube, m)?)?;
    m.add_function(wrap_pyfunction!(cross, m)?)?;
    m.add_function(wrap_pyfunction!(simplex, m)?)?;
    m.add_function(wrap_pyfunction!(rh, m)?)?;
    m.add_function(wrap_pyfunction!(rv, m)?)?;
    m.add_function(wrap_pyfunction!(zonotope, m)?)?;
    m.add_function(wrap_pyfunction!(exact_zonotope_log, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
