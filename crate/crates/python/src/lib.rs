//! Python bindings for the `parrondo` crate.
//!
//! Coin probabilities accept `int`, `str` ("3/7", "0.25"), `fractions.Fraction`
//! or `float`; floats are taken at their exact binary value. Exact results
//! come back as `fractions.Fraction`.

use ::parrondo as core;
use core::region::{RegionEstimate, RegionScanner};
use core::simulate::{absorption_analysis, simulate_absorption, GameSpec};
use core::{BigRational, ParamVector, ReducedChain, RingState, Symmetry};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyFloat};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    if obj.is_instance_of::<PyFloat>() {
        let x: f64 = obj.extract()?;
        return BigRational::from_float(x).ok_or_else(|| err(format!("not a finite number: {x}")));
    }
    let s = obj.str()?.to_string();
    core::parse_rational(&s).ok_or_else(|| err(format!("not a rational number: {s}")))
}

fn fraction<'py>(py: Python<'py>, x: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((x.to_string(),))
}

fn symmetry(s: &str) -> PyResult<Symmetry> {
    s.parse().map_err(err)
}

/// The eight coins of a game plus the mixing probabilities.
#[pyclass(frozen, skip_from_py_object, name = "Params")]
#[derive(Clone)]
struct PyParams {
    inner: ParamVector<BigRational>,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (p0, p1, p2, p3, p = None, gamma = None))]
    fn new(
        p0: &Bound<'_, PyAny>,
        p1: &Bound<'_, PyAny>,
        p2: &Bound<'_, PyAny>,
        p3: &Bound<'_, PyAny>,
        p: Option<&Bound<'_, PyAny>>,
        gamma: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let half = core::rat(1, 2);
        let p = p.map(rational).transpose()?.unwrap_or_else(|| half.clone());
        let gamma = gamma.map(rational).transpose()?.unwrap_or(half);
        let inner =
            ParamVector::with_mixture(rational(p0)?, rational(p1)?, rational(p2)?, rational(p3)?, p, gamma)
                .map_err(err)?;
        Ok(PyParams { inner })
    }

    #[getter]
    fn coins<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.inner.coins.iter().map(|c| fraction(py, c)).collect()
    }

    fn complemented(&self) -> Self {
        PyParams { inner: self.inner.complemented() }
    }

    fn boundary_case(&self) -> String {
        format!("{:?}", self.inner.boundary_case())
    }

    fn __repr__(&self) -> String {
        let c: Vec<String> = self.inner.coins.iter().map(|x| x.to_string()).collect();
        format!("Params({}, p={}, gamma={})", c.join(", "), self.inner.p, self.inner.gamma)
    }
}

/// Lumped chain on necklace classes.
#[pyclass(frozen, name = "Chain")]
struct PyChain {
    inner: ReducedChain,
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (n, symmetry = "dihedral"))]
    fn new(n: u32, symmetry: &str) -> PyResult<Self> {
        Ok(PyChain { inner: ReducedChain::build(n, self::symmetry(symmetry)?).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(representative, orbit size)` per class, in chain order.
    fn classes(&self) -> Vec<(String, usize)> {
        self.inner.classes.iter().map(|c| (c.canonical.to_string(), c.orbit_size)).collect()
    }

    fn matrix(&self, params: &PyParams) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.evaluate(&params.inner.to_f64()).map_err(err)?.to_dense())
    }

    #[pyo3(signature = (params, exact = false))]
    fn stationary<'py>(&self, py: Python<'py>, params: &PyParams, exact: bool) -> PyResult<Vec<Bound<'py, PyAny>>> {
        if exact {
            let d = self.inner.stationary(&params.inner).map_err(err)?;
            d.weights.iter().map(|w| fraction(py, w)).collect()
        } else {
            let d = self.inner.stationary(&params.inner.to_f64()).map_err(err)?;
            d.weights.iter().map(|w| Ok(PyFloat::new(py, *w).into_any())).collect()
        }
    }

    /// Long-run profit per turn of game B.
    #[pyo3(signature = (params, exact = false))]
    fn mean_rate<'py>(&self, py: Python<'py>, params: &PyParams, exact: bool) -> PyResult<Bound<'py, PyAny>> {
        if exact {
            fraction(py, &self.inner.mean_rate(&params.inner).map_err(err)?)
        } else {
            Ok(PyFloat::new(py, self.inner.mean_rate(&params.inner.to_f64()).map_err(err)?).into_any())
        }
    }

    /// Long-run profit per turn of the random mixture of A and B.
    #[pyo3(signature = (params, exact = false))]
    fn mean_mixed<'py>(&self, py: Python<'py>, params: &PyParams, exact: bool) -> PyResult<Bound<'py, PyAny>> {
        if exact {
            fraction(py, &self.inner.mean_mixed(&params.inner).map_err(err)?)
        } else {
            Ok(PyFloat::new(py, self.inner.mean_mixed(&params.inner.to_f64()).map_err(err)?).into_any())
        }
    }
}

#[pyfunction]
#[pyo3(signature = (n, symmetry = "dihedral"))]
fn count_classes(n: u32, symmetry: &str) -> PyResult<u128> {
    core::count_classes(n, self::symmetry(symmetry)?).map_err(err)
}

#[pyfunction]
fn canonical_form(state: &str, symmetry: &str) -> PyResult<String> {
    let x = RingState::parse(state).map_err(err)?;
    Ok(core::canonical_form(x, self::symmetry(symmetry)?).to_string())
}

/// `"parrondo"`, `"anti"` or `"neither"` for the point `(p0, p1, p3)`.
#[pyfunction]
fn classify(n: u32, p0: f64, p1: f64, p3: f64) -> PyResult<&'static str> {
    use core::Classification::*;
    let c = core::region::classify_point(n, core::CubePoint::new(p0, p1, p3)).map_err(err)?;
    Ok(match c {
        Parrondo => "parrondo",
        AntiParrondo => "anti",
        Neither => "neither",
    })
}

/// The set of `p1` making the point Parrondo, or `None` if empty.
#[pyfunction]
#[pyo3(signature = (n, p0, p3, tol = 1e-9))]
fn parrondo_interval(n: u32, p0: f64, p3: f64, tol: f64) -> PyResult<Option<(f64, f64)>> {
    let iv = core::region::parrondo_interval(n, p0, p3, tol).map_err(err)?;
    Ok((!iv.empty).then_some((iv.lower, iv.upper)))
}

fn estimate_dict<'py>(py: Python<'py>, e: &RegionEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("volume", e.volume)?;
    d.set_item("hits", e.hits)?;
    d.set_item("grid_or_samples", e.grid_or_samples)?;
    d.set_item("stderr", e.stderr)?;
    d.set_item("seed", e.seed)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (n, grid = 100))]
fn volume_riemann<'py>(py: Python<'py>, n: u32, grid: u32) -> PyResult<Bound<'py, PyDict>> {
    let e = py.detach(|| RegionScanner::new(n)?.volume_riemann(grid)).map_err(err)?;
    estimate_dict(py, &e)
}

#[pyfunction]
#[pyo3(signature = (n, samples = 1_000_000, seed = 0))]
fn volume_monte_carlo<'py>(py: Python<'py>, n: u32, samples: u64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let e = py.detach(|| RegionScanner::new(n)?.volume_monte_carlo(samples, seed)).map_err(err)?;
    estimate_dict(py, &e)
}

/// Cumulative profit after each turn.
#[pyfunction]
#[pyo3(signature = (n, params, game = "b", turns = 10_000, seed = 0, initial = None))]
fn simulate(
    n: u32,
    params: &PyParams,
    game: &str,
    turns: u64,
    seed: u64,
    initial: Option<&str>,
) -> PyResult<Vec<i64>> {
    let v = params.inner.to_f64();
    let game = match game {
        "a" | "A" => GameSpec::A,
        "b" | "B" => GameSpec::B,
        "c" | "C" => GameSpec::MixedC(v.gamma),
        other => return Err(err(format!("unknown game {other:?}"))),
    };
    let initial = initial.map(RingState::parse).transpose().map_err(err)?;
    let trace = core::simulate(n, &v, game, turns, seed, initial).map_err(err)?;
    Ok(trace.sums)
}

/// Probability that a `p0 = 0, p3 = 1` game started at `initial` ends at all ones:
/// `(exact, monte_carlo_estimate, stderr)`.
#[pyfunction]
#[pyo3(signature = (p1, p2, initial, replications = 10_000, seed = 0))]
fn absorption<'py>(
    py: Python<'py>,
    p1: &Bound<'_, PyAny>,
    p2: &Bound<'_, PyAny>,
    initial: &str,
    replications: u64,
    seed: u64,
) -> PyResult<(Bound<'py, PyAny>, f64, f64)> {
    let x = RingState::parse(initial).map_err(err)?;
    let v = ParamVector::new(core::rat(0, 1), rational(p1)?, rational(p2)?, core::rat(1, 1)).map_err(err)?;
    let exact = absorption_analysis(x.n(), &v, x).map_err(err)?;
    let mc = simulate_absorption(x.n(), &v.to_f64(), x, replications, seed).map_err(err)?;
    Ok((fraction(py, &exact.prob_absorb_at_ones)?, mc.prob, mc.stderr))
}

/// Exact `mu_n` for three players with `p1 = p2`.
#[pyfunction]
fn mu_n3_closed<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &core::mu_n3_closed(&params.inner).map_err(err)?)
}

/// Six significant digits, as the published tables print rates.
#[pyfunction]
fn sig6(x: &Bound<'_, PyAny>) -> PyResult<String> {
    if x.is_instance_of::<PyFloat>() {
        return Ok(core::format::sig6(x.extract()?));
    }
    Ok(core::format::sig6_exact(&rational(x)?))
}

#[pymodule(name = "parrondo")]
fn parrondo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(count_classes, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_form, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(parrondo_interval, m)?)?;
    m.add_function(wrap_pyfunction!(volume_riemann, m)?)?;
    m.add_function(wrap_pyfunction!(volume_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(absorption, m)?)?;
    m.add_function(wrap_pyfunction!(mu_n3_closed, m)?)?;
    m.add_function(wrap_pyfunction!(sig6, m)?)?;
    Ok(())
}

