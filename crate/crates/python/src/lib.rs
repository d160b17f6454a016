//! Python module `gcecap`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};

use gce_capacity::bcs::{bcs_sweep_full, capacity_bcs, solve_gap_and_mu, BcsParams};
use gce_capacity::capacity;
use gce_capacity::config::{validate_config, BcsSettings, RawConfig};
use gce_capacity::expansion;
use gce_capacity::spectrum::{build_spectrum, CutoffPolicy, Level, TrapSpec, TrapSpectrum};
use gce_capacity::statistics::{self, Statistics};
use gce_capacity::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Invalid(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_stats(s: &str) -> PyResult<Statistics> {
    match s {
        "bose" => Ok(Statistics::Bose),
        "fermi" => Ok(Statistics::Fermi),
        _ => Err(PyValueError::new_err(format!("statistics must be \"bose\" or \"fermi\", got {s:?}"))),
    }
}

fn parse_trap(s: &str) -> PyResult<TrapSpec> {
    let trap: TrapSpec = s.parse().map_err(PyValueError::new_err)?;
    trap.validate().map_err(PyValueError::new_err)?;
    Ok(trap)
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Truncated single-particle spectrum: distinct energies with degeneracies.
#[pyclass(frozen, module = "gcecap")]
struct Spectrum {
    inner: TrapSpectrum,
}

#[pymethods]
impl Spectrum {
    /// Levels of `trap` up to and including `cutoff`.
    #[new]
    #[pyo3(signature = (trap = "box3d_pbc", cutoff = 400.0))]
    fn new(trap: &str, cutoff: f64) -> PyResult<Self> {
        let trap = parse_trap(trap)?;
        let inner = build_spectrum(&trap, &CutoffPolicy::Fixed { energy: cutoff }, 0.0).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Spectrum from explicit levels.
    #[staticmethod]
    fn from_levels(energies: Vec<f64>, degeneracies: Vec<u64>) -> PyResult<Self> {
        if energies.len() != degeneracies.len() {
            return Err(PyValueError::new_err("energies and degeneracies differ in length"));
        }
        let levels = energies.into_iter().zip(degeneracies).map(|(e, g)| Level::new(e, g)).collect();
        Ok(Self {
            inner: TrapSpectrum::from_levels(levels).map_err(py_err)?,
        })
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.levels.iter().map(|l| l.energy).collect()
    }

    #[getter]
    fn degeneracies(&self) -> Vec<u64> {
        self.inner.levels.iter().map(|l| l.degeneracy).collect()
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.inner.cutoff_energy
    }

    fn total_states(&self) -> f64 {
        self.inner.total_states()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum({} levels, cutoff {})", self.inner.len(), self.inner.cutoff_energy)
    }
}

/// Grand-canonical state with average particle number fixed.
#[pyclass(frozen, module = "gcecap")]
struct GasState {
    inner: statistics::GasState,
}

#[pymethods]
impl GasState {
    #[getter]
    fn temperature(&self) -> f64 {
        self.inner.temperature()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn particles(&self) -> f64 {
        self.inner.particles
    }

    #[getter]
    fn statistics(&self) -> String {
        self.inner.statistics.to_string()
    }

    /// Per-state occupations, aligned with the spectrum levels.
    #[getter]
    fn occupations(&self) -> Vec<f64> {
        self.inner.occupations.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "GasState({}, T={}, N={}, mu={})",
            self.inner.statistics,
            self.inner.temperature(),
            self.inner.particles,
            self.inner.mu
        )
    }
}

/// Solves `mu` so the average count is `particles`.
#[pyfunction]
#[pyo3(signature = (spectrum, temperature, particles, statistics = "bose", spin = 1, tol = 1e-10))]
fn solve_state(
    spectrum: &Spectrum,
    temperature: f64,
    particles: f64,
    statistics: &str,
    spin: u32,
    tol: f64,
) -> PyResult<GasState> {
    if !(temperature > 0.0) {
        return Err(PyValueError::new_err("temperature must be positive"));
    }
    let stats = parse_stats(statistics)?;
    let inner = statistics::solve_state(&spectrum.inner, 1.0 / temperature, particles, stats, spin, tol).map_err(py_err)?;
    Ok(GasState { inner })
}

/// Capacity in bits of a solved state.
#[pyfunction(name = "capacity")]
fn capacity_bits(spectrum: &Spectrum, state: &GasState) -> PyResult<f64> {
    if spectrum.inner.len() != state.inner.occupations.len() {
        return Err(PyValueError::new_err("state was solved on a different spectrum"));
    }
    Ok(capacity::capacity(&spectrum.inner, &state.inner))
}

/// `(T_c, T_f)` for `trap`.
#[pyfunction]
#[pyo3(signature = (trap, particles, spin = 1))]
fn critical_temperatures(trap: &str, particles: f64, spin: u32) -> PyResult<(f64, f64)> {
    let ct = statistics::critical_temperatures(&parse_trap(trap)?, particles, spin).map_err(py_err)?;
    Ok((ct.bec, ct.fermi))
}

fn option_text(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if value.is_instance_of::<PyBool>() {
        return Ok(if value.extract::<bool>()? { "true" } else { "false" }.into());
    }
    if value.is_instance_of::<PyString>() {
        return value.extract();
    }
    if let Ok(list) = value.cast::<PyList>() {
        let parts: PyResult<Vec<String>> = list.iter().map(|v| Ok(v.str()?.to_string())).collect();
        return Ok(parts?.join(","));
    }
    Ok(value.str()?.to_string())
}

fn raw_config(config: Option<&str>, options: Option<&Bound<'_, PyDict>>) -> PyResult<RawConfig> {
    let mut raw = match config {
        Some(text) => RawConfig::parse_str(text).map_err(|e| py_err(e.into()))?,
        None => RawConfig::default(),
    };
    if let Some(options) = options {
        for (key, value) in options.iter() {
            let key: String = key.extract()?;
            raw.set(&key, &option_text(&value)?).map_err(PyValueError::new_err)?;
        }
    }
    Ok(raw)
}

/// Temperature sweep. `config` is `key = value` text; keyword options use
/// the same keys (`N`, `trap`, `statistics`, `grid_points`, ...) and win over
/// it. Returns a dict of columns plus the detected inflection.
#[pyfunction]
#[pyo3(signature = (config = None, **options))]
fn sweep<'py>(
    py: Python<'py>,
    config: Option<&str>,
    options: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut raw = raw_config(config, options)?;
    let bcs = raw.statistics.as_deref() == Some("bcs");
    if bcs {
        let reference = BcsSettings::reference();
        raw.delta_eps.get_or_insert(reference.shell_half_width);
        raw.v0.get_or_insert(reference.coupling);
    }
    let cfg = validate_config(&raw).map_err(|e| py_err(e.into()))?;
    let table = if bcs {
        bcs_sweep_full(&cfg).map_err(py_err)?.table
    } else {
        capacity::sweep(&cfg).map_err(py_err)?
    };
    let echo = cfg.to_raw();
    let out = PyDict::new(py);
    out.set_item("statistics", echo.statistics.clone())?;
    out.set_item("config", to_py(py, &echo)?)?;
    out.set_item("normalizer", table.normalizer)?;
    out.set_item("T", table.temperatures())?;
    out.set_item("T_norm", table.rows.iter().map(|r| r.normalized).collect::<Vec<_>>())?;
    out.set_item("mu", table.rows.iter().map(|r| r.mu).collect::<Vec<_>>())?;
    out.set_item("E", table.rows.iter().map(|r| r.energy).collect::<Vec<_>>())?;
    out.set_item("C_bits", table.capacities())?;
    out.set_item("converged", table.rows.iter().map(|r| r.converged).collect::<Vec<_>>())?;
    if bcs {
        out.set_item("Delta", table.rows.iter().map(|r| r.gap.unwrap_or(f64::NAN)).collect::<Vec<_>>())?;
    }
    out.set_item("inflection", to_py(py, &table.inflection)?)?;
    Ok(out.into_any())
}

/// Third-order high-temperature series at one temperature, with both
/// coefficient sets and the series capacities.
#[pyfunction]
#[pyo3(signature = (spectrum, temperature, particles, tail_tol = 1e-9))]
fn expansion_report<'py>(
    py: Python<'py>,
    spectrum: &Spectrum,
    temperature: f64,
    particles: f64,
    tail_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = expansion::expansion_report(&spectrum.inner, 1.0 / temperature, particles, tail_tol).map_err(py_err)?;
    to_py(py, &report)
}

/// Fermion-minus-boson capacity and the `alpha2` sign per temperature.
#[pyfunction]
#[pyo3(signature = (trap, temperatures, particles, tail_tol = 1e-9))]
fn theorem_check<'py>(
    py: Python<'py>,
    trap: &str,
    temperatures: Vec<f64>,
    particles: f64,
    tail_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let betas: Vec<f64> = temperatures.iter().map(|t| 1.0 / t).collect();
    let rows = expansion::theorem_check(&parse_trap(trap)?, &betas, particles, tail_tol).map_err(py_err)?;
    to_py(py, &rows)
}

/// Self-consistent gap and `mu` at one temperature; `delta_eps` and `v0`
/// default to the reference weak-coupling values. The returned dict carries
/// the solution plus `C_bits`.
#[pyfunction]
#[pyo3(signature = (spectrum, temperature, particles, delta_eps = None, v0 = None, spin_pairs = false))]
fn bcs_solve<'py>(
    py: Python<'py>,
    spectrum: &Spectrum,
    temperature: f64,
    particles: f64,
    delta_eps: Option<f64>,
    v0: Option<f64>,
    spin_pairs: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let reference = BcsSettings::reference();
    let settings = BcsSettings {
        shell_half_width: delta_eps.unwrap_or(reference.shell_half_width),
        coupling: v0.unwrap_or(reference.coupling),
        count_spin_pairs: spin_pairs,
    };
    let params = BcsParams::new(settings, particles, spectrum.inner.clone()).map_err(py_err)?;
    let sol = solve_gap_and_mu(&params, temperature).map_err(py_err)?;
    let out = to_py(py, &sol)?;
    out.set_item("C_bits", capacity_bcs(&params, &sol))?;
    Ok(out)
}

#[pymodule]
fn gcecap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Spectrum>()?;
    m.add_class::<GasState>()?;
    m.add_function(wrap_pyfunction!(solve_state, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_bits, m)?)?;
    m.add_function(wrap_pyfunction!(critical_temperatures, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_report, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_check, m)?)?;
    m.add_function(wrap_pyfunction!(bcs_solve, m)?)?;
    Ok(())
}
