use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spinchan::channel::replacement_channel;
use spinchan::invariant::{self, IsotypicDistribution};
use spinchan::linalg;
use spinchan::spin::spin_operators as spin_ops;
use spinchan::{
    ComplexMatrix, DensityMatrix, KrausChannel, LogBase, PureState, SearchConfig, SpinLabel,
};

type Rows = Vec<Vec<Complex64>>;

fn err(e: spinchan::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spin(text: &str) -> PyResult<SpinLabel> {
    text.parse().map_err(err)
}

fn base(text: &str) -> PyResult<LogBase> {
    text.parse().map_err(PyValueError::new_err)
}

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(err)
}

fn density(rows: Rows) -> PyResult<DensityMatrix> {
    DensityMatrix::new(matrix(rows)?).map_err(err)
}

fn pure(amplitudes: Vec<Complex64>) -> PyResult<PureState> {
    PureState::new(amplitudes).map_err(err)
}

fn search_config(
    restarts: usize,
    seed: u64,
    tolerance: f64,
    log_base: &str,
) -> PyResult<SearchConfig> {
    let cfg = SearchConfig {
        restarts,
        seed,
        simplex_tolerance: tolerance,
        log_base: base(log_base)?,
        ..Default::default()
    };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// Kraus-form quantum channel.
#[pyclass(name = "Channel", module = "spinchan", frozen, skip_from_py_object)]
struct Channel {
    inner: KrausChannel,
}

#[pymethods]
impl Channel {
    #[new]
    fn new(kraus: Vec<Rows>) -> PyResult<Self> {
        let ops = kraus
            .into_iter()
            .map(matrix)
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: KrausChannel::new(ops).map_err(err)?,
        })
    }

    /// Isotropic channel of the given spin, e.g. "1/2".
    #[staticmethod]
    fn isotropic(spin_label: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spinchan::isotropic_channel(spin(spin_label)?).map_err(err)?,
        })
    }

    #[staticmethod]
    fn random(dim: usize, n_kraus: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: spinchan::random_channel(dim, n_kraus, seed).map_err(err)?,
        })
    }

    /// Channel that outputs `|target><target|` for every input.
    #[staticmethod]
    fn replacement(target: Vec<Complex64>, dim_in: usize) -> PyResult<Self> {
        Ok(Self {
            inner: replacement_channel(&pure(target)?, dim_in),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: KrausChannel::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }

    #[getter]
    fn dim_out(&self) -> usize {
        self.inner.dim_out()
    }

    #[getter]
    fn n_kraus(&self) -> usize {
        self.inner.n_kraus()
    }

    fn kraus(&self) -> Vec<Rows> {
        self.inner.kraus().iter().map(|k| k.to_rows()).collect()
    }

    fn is_bistochastic(&self) -> bool {
        self.inner.is_bistochastic(1e-10)
    }

    fn apply(&self, rho: Rows) -> PyResult<Rows> {
        Ok(self
            .inner
            .apply(&density(rho)?)
            .map_err(err)?
            .matrix()
            .to_rows())
    }

    /// Gram matrix of the Kraus images of a pure state.
    fn output_gram(&self, phi: Vec<Complex64>) -> PyResult<Rows> {
        Ok(self.inner.output_gram(&pure(phi)?).map_err(err)?.to_rows())
    }

    #[pyo3(signature = (rho, log_base = "e"))]
    fn entropy_gain(&self, rho: Rows, log_base: &str) -> PyResult<f64> {
        self.inner
            .entropy_gain(&density(rho)?, base(log_base)?)
            .map_err(err)
    }

    fn tensor(&self, other: &Channel) -> Self {
        Self {
            inner: self.inner.tensor(&other.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(dim_in={}, dim_out={}, n_kraus={})",
            self.inner.dim_in(),
            self.inner.dim_out(),
            self.inner.n_kraus()
        )
    }
}

/// Spin matrices `[S_x, S_y, S_z]` in the basis `m = s, ..., -s`.
#[pyfunction]
fn spin_operators(spin_label: &str) -> PyResult<Vec<Rows>> {
    Ok(spin_ops(spin(spin_label)?)
        .ops
        .iter()
        .map(|m| m.to_rows())
        .collect())
}

#[pyfunction]
#[pyo3(signature = (rho, log_base = "e"))]
fn von_neumann_entropy(rho: Rows, log_base: &str) -> PyResult<f64> {
    linalg::von_neumann_entropy(&density(rho)?, base(log_base)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (channel, restarts = 64, seed = 0, tolerance = 1e-9, log_base = "e"))]
fn min_output_entropy<'py>(
    py: Python<'py>,
    channel: &Channel,
    restarts: usize,
    seed: u64,
    tolerance: f64,
    log_base: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = search_config(restarts, seed, tolerance, log_base)?;
    let ch = channel.inner.clone();
    let report = py
        .detach(move || spinchan::min_output_entropy(&ch, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", report.value)?;
    d.set_item("argmin", report.argmin.amplitudes().to_vec())?;
    d.set_item("restart_values", report.restart_values)?;
    d.set_item("converged_fraction", report.converged_fraction)?;
    d.set_item("evaluations", report.evaluations)?;
    d.set_item("log_base", report.log_base.as_str())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (channel, restarts = 64, seed = 0, tolerance = 1e-9, log_base = "e"))]
fn min_entropy_gain<'py>(
    py: Python<'py>,
    channel: &Channel,
    restarts: usize,
    seed: u64,
    tolerance: f64,
    log_base: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = search_config(restarts, seed, tolerance, log_base)?;
    let ch = channel.inner.clone();
    let report = py
        .detach(move || spinchan::min_entropy_gain(&ch, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", report.value)?;
    d.set_item("argmin", report.argmin.matrix().to_rows())?;
    d.set_item("restart_values", report.restart_values)?;
    d.set_item("converged_fraction", report.converged_fraction)?;
    d.set_item("evaluations", report.evaluations)?;
    d.set_item("log_base", report.log_base.as_str())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (first, second, restarts = 64, seed = 0, tolerance = 1e-9, log_base = "e"))]
fn additivity_probe<'py>(
    py: Python<'py>,
    first: &Channel,
    second: &Channel,
    restarts: usize,
    seed: u64,
    tolerance: f64,
    log_base: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = search_config(restarts, seed, tolerance, log_base)?;
    let (a, b) = (first.inner.clone(), second.inner.clone());
    let report = py
        .detach(move || spinchan::additivity_probe(&a, &b, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("joint_min", report.joint_min)?;
    d.set_item("sum_of_singles", report.sum_of_singles)?;
    d.set_item("gap", report.gap)?;
    d.set_item("argmin", report.argmin.amplitudes().to_vec())?;
    d.set_item("schmidt_coefficients", report.schmidt_coefficients)?;
    d.set_item("additivity_violation", report.additivity_violation)?;
    d.set_item("log_base", report.log_base.as_str())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (spin_label, log_base = "e"))]
fn singlet_decoherence<'py>(
    py: Python<'py>,
    spin_label: &str,
    log_base: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let r = spinchan::singlet_decoherence(spin(spin_label)?, base(log_base)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("spin", r.spin.to_string())?;
    d.set_item("probs", r.probs)?;
    d.set_item("entropy", r.entropy)?;
    d.set_item("entropy_closed_form", r.entropy_closed_form)?;
    d.set_item("single_channel_min", r.single_channel_min)?;
    d.set_item("two_channel_reference", r.two_channel_reference)?;
    d.set_item("excess", r.excess)?;
    d.set_item("log_base", r.log_base.as_str())?;
    Ok(d)
}

/// Block weights `p_j` of a rotation-invariant two-spin state.
#[pyfunction]
fn isotypic_probabilities(rho: Rows, spin_label: &str) -> PyResult<Vec<f64>> {
    Ok(
        invariant::isotypic_probabilities(&density(rho)?, spin(spin_label)?)
            .map_err(err)?
            .probs,
    )
}

/// Entropy of the invariant state with block weights `probs`.
#[pyfunction]
#[pyo3(signature = (spin_label, probs, log_base = "e"))]
fn invariant_state_entropy(spin_label: &str, probs: Vec<f64>, log_base: &str) -> PyResult<f64> {
    let dist = IsotypicDistribution::new(spin(spin_label)?, probs).map_err(err)?;
    Ok(invariant::invariant_state_entropy(&dist, base(log_base)?))
}

#[pyfunction]
fn decohered_singlet(spin_label: &str) -> PyResult<Rows> {
    Ok(invariant::decohered_singlet(spin(spin_label)?)
        .map_err(err)?
        .matrix()
        .to_rows())
}

#[pymodule]
#[pyo3(name = "spinchan")]
pub fn spinchan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Channel>()?;
    m.add_function(wrap_pyfunction!(spin_operators, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(min_output_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(min_entropy_gain, m)?)?;
    m.add_function(wrap_pyfunction!(additivity_probe, m)?)?;
    m.add_function(wrap_pyfunction!(singlet_decoherence, m)?)?;
    m.add_function(wrap_pyfunction!(isotypic_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_state_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(decohered_singlet, m)?)?;
    Ok(())
}
