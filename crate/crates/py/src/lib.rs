use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use rzchart_core::design::{self, ChartConfig, DesignRequest, Side};
use rzchart_core::monitor::{self, ChartState, InspectionInput};
use rzchart_core::ratio_dist::{self, RatioParams};
use rzchart_core::run_length::{self, ShiftScenario};
use rzchart_core::simulation::{self, SimulationSpec};
use rzchart_core::tables::{self, Format, GridSpec};
use rzchart_core::Error;

create_exception!(rzchart, DomainError, PyException, "The approximation is undefined for these parameters.");
create_exception!(rzchart, RunCompletedError, PyException, "The run has used all of its inspections.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) => DomainError::new_err(e.to_string()),
        Error::RunCompleted(_) => RunCompletedError::new_err(e.to_string()),
        Error::Io(_) => pyo3::exceptions::PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_side(side: &str) -> PyResult<Side> {
    side.parse().map_err(to_py)
}

/// Approximate distribution of `X/Y` for correlated normal X, Y.
#[pyclass(frozen, module = "rzchart")]
struct RatioDistribution(RatioParams);

#[pymethods]
impl RatioDistribution {
    #[new]
    fn new(gamma_x: f64, gamma_y: f64, omega: f64, rho: f64) -> PyResult<Self> {
        RatioParams::new(gamma_x, gamma_y, omega, rho).map(Self).map_err(to_py)
    }

    /// Distribution of the ratio of sample means: γ/√n and ω = z0·γX/γY.
    #[staticmethod]
    fn sample_mean(n: u32, gamma_x: f64, gamma_y: f64, z0: f64, rho: f64) -> PyResult<Self> {
        ratio_dist::SampleRatioParams::new(n, gamma_x, gamma_y, z0, rho)
            .map(|sp| Self(sp.aggregated()))
            .map_err(to_py)
    }

    fn cdf(&self, z: f64) -> PyResult<f64> {
        ratio_dist::ratio_cdf(z, &self.0).map_err(to_py)
    }

    fn pdf(&self, z: f64) -> PyResult<f64> {
        ratio_dist::ratio_pdf(z, &self.0).map_err(to_py)
    }

    fn idf(&self, p: f64) -> PyResult<f64> {
        ratio_dist::ratio_idf(p, &self.0).map_err(to_py)
    }

    #[getter]
    fn gamma_x(&self) -> f64 {
        self.0.gamma_x
    }

    #[getter]
    fn gamma_y(&self) -> f64 {
        self.0.gamma_y
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.0.omega
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho
    }

    fn __repr__(&self) -> String {
        format!(
            "RatioDistribution(gamma_x={}, gamma_y={}, omega={}, rho={})",
            self.0.gamma_x, self.0.gamma_y, self.0.omega, self.0.rho
        )
    }
}

/// A designed one-sided chart.
#[pyclass(frozen, skip_from_py_object, module = "rzchart")]
#[derive(Clone)]
struct Chart(ChartConfig);

#[pymethods]
impl Chart {
    /// Solves α₀ so the in-control TARL equals the target (default I) and
    /// places the limit at the matching quantile of Ẑ.
    #[staticmethod]
    #[pyo3(signature = (side, n, gamma_x, gamma_y, rho0, horizon, z0 = 1.0, tarl0_target = None))]
    #[allow(clippy::too_many_arguments)]
    fn design(
        side: &str,
        n: u32,
        gamma_x: f64,
        gamma_y: f64,
        rho0: f64,
        horizon: u32,
        z0: f64,
        tarl0_target: Option<f64>,
    ) -> PyResult<Self> {
        let req = DesignRequest {
            side: parse_side(side)?,
            n,
            gamma_x,
            gamma_y,
            z0,
            rho0,
            horizon_inspections: horizon,
            tarl0_target,
        };
        design::design_chart(&req).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg: ChartConfig = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        cfg.validate().map_err(to_py)?;
        Ok(Self(cfg))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("chart config serializes")
    }

    #[getter]
    fn side(&self) -> String {
        self.0.side.to_string()
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n
    }

    #[getter]
    fn gamma_x(&self) -> f64 {
        self.0.gamma_x
    }

    #[getter]
    fn gamma_y(&self) -> f64 {
        self.0.gamma_y
    }

    #[getter]
    fn z0(&self) -> f64 {
        self.0.z0
    }

    #[getter]
    fn rho0(&self) -> f64 {
        self.0.rho0
    }

    #[getter]
    fn horizon(&self) -> u32 {
        self.0.horizon_inspections
    }

    #[getter]
    fn tarl0_target(&self) -> f64 {
        self.0.tarl0_target
    }

    #[getter]
    fn alpha0(&self) -> f64 {
        self.0.alpha0
    }

    /// `0.0` on an upper chart.
    #[getter]
    fn lcl(&self) -> f64 {
        self.0.lcl
    }

    /// `inf` on a lower chart.
    #[getter]
    fn ucl(&self) -> f64 {
        self.0.ucl
    }

    #[getter]
    fn limit(&self) -> f64 {
        self.0.active_limit()
    }

    fn signals(&self, z_hat: f64) -> bool {
        self.0.signals(z_hat)
    }

    /// Truncated ARL after the ratio moves to τ·z0 and the correlation to ρ1.
    #[pyo3(signature = (tau, rho1 = None))]
    fn tarl1(&self, tau: f64, rho1: Option<f64>) -> PyResult<f64> {
        let sc = ShiftScenario::new(tau, rho1.unwrap_or(self.0.rho0)).map_err(to_py)?;
        run_length::tarl1(&self.0, &sc).map_err(to_py)
    }

    /// Monte-Carlo estimate of the TARL; returns `(mean, standard_error)`.
    #[pyo3(signature = (tau, rho1 = None, replications = simulation::DEFAULT_REPLICATIONS, seed = 1))]
    fn simulate(&self, py: Python<'_>, tau: f64, rho1: Option<f64>, replications: u64, seed: u64) -> PyResult<(f64, f64)> {
        let sc = ShiftScenario::new(tau, rho1.unwrap_or(self.0.rho0)).map_err(to_py)?;
        let spec = SimulationSpec::new(self.0.clone(), sc, replications, seed);
        let est = py.detach(|| simulation::estimate_tarl(&spec)).map_err(to_py)?;
        Ok((est.mean, est.standard_error))
    }

    fn __repr__(&self) -> String {
        format!(
            "Chart(side='{}', n={}, horizon={}, limit={:.5})",
            self.0.side,
            self.0.n,
            self.0.horizon_inspections,
            self.0.active_limit()
        )
    }
}

/// One evaluated inspection.
#[pyclass(frozen, get_all, module = "rzchart")]
struct Inspection {
    index: u32,
    x_bar: f64,
    y_bar: f64,
    z_hat: f64,
    signal: bool,
    label: Option<String>,
    timestamp: Option<String>,
}

impl From<&monitor::InspectionRecord> for Inspection {
    fn from(r: &monitor::InspectionRecord) -> Self {
        Inspection {
            index: r.index,
            x_bar: r.x_bar,
            y_bar: r.y_bar,
            z_hat: r.z_hat,
            signal: r.signal,
            label: r.label.clone(),
            timestamp: r.timestamp.clone(),
        }
    }
}

#[pymethods]
impl Inspection {
    fn __repr__(&self) -> String {
        format!("Inspection(index={}, z_hat={:.4}, signal={})", self.index, self.z_hat, self.signal)
    }
}

/// The state of one production run monitored with a chart.
#[pyclass(module = "rzchart")]
struct Monitor(ChartState);

#[pymethods]
impl Monitor {
    #[new]
    fn new(chart: &Chart) -> PyResult<Self> {
        monitor::create_chart(chart.0.clone()).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("chart state serializes")
    }

    /// Records `n` paired unit measurements; raises if the run is complete.
    #[pyo3(signature = (x, y, label = None, timestamp = None))]
    fn ingest(&mut self, x: Vec<f64>, y: Vec<f64>, label: Option<String>, timestamp: Option<String>) -> PyResult<Inspection> {
        let input = InspectionInput {
            x_values: x,
            y_values: y,
            label,
            timestamp,
        };
        monitor::ingest_inspection(&mut self.0, &input)
            .map(|r| Inspection::from(&r))
            .map_err(to_py)
    }

    /// A fresh run with the same chart, linked to this one.
    fn reset(&self) -> Self {
        Self(monitor::reset_chart(&self.0))
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id.clone()
    }

    #[getter]
    fn chart(&self) -> Chart {
        Chart(self.0.cfg.clone())
    }

    #[getter]
    fn status(&self) -> String {
        serde_json::to_value(self.0.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }

    #[getter]
    fn records(&self) -> Vec<Inspection> {
        self.0.records.iter().map(Inspection::from).collect()
    }

    #[getter]
    fn signals(&self) -> Vec<u32> {
        monitor::chart_status(&self.0).signals
    }

    #[getter]
    fn remaining(&self) -> u32 {
        monitor::chart_status(&self.0).remaining
    }

    fn __repr__(&self) -> String {
        format!("Monitor(id='{}', inspections={}, status='{}')", self.0.id, self.0.records.len(), self.status())
    }
}

/// Truncated ARL when each inspection signals with probability `p`.
#[pyfunction]
fn tarl(p: f64, horizon: u32) -> PyResult<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PyValueError::new_err(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(run_length::tarl(p, horizon))
}

/// Per-inspection false alarm probability giving an in-control TARL of I.
#[pyfunction]
fn solve_alpha_for_tarl0(horizon: u32) -> PyResult<f64> {
    design::solve_alpha_for_tarl0(horizon).map_err(to_py)
}

fn grid(horizons: Option<Vec<u32>>, base: GridSpec) -> GridSpec {
    match horizons {
        Some(h) => GridSpec { horizons: h, ..base },
        None => base,
    }
}

/// CSV of (LCL, UCL) over the standard grid.
#[pyfunction]
#[pyo3(signature = (horizons = None))]
fn limits_table(py: Python<'_>, horizons: Option<Vec<u32>>) -> PyResult<String> {
    let spec = grid(horizons, GridSpec::default());
    py.detach(|| {
        let rows = tables::gen_limits_table(&spec)?;
        tables::render_to_string(&rows, Format::Csv)
    })
    .map_err(to_py)
}

/// CSV of TARL₁ over the standard grid; `correlation_shift` also moves ρ.
#[pyfunction]
#[pyo3(signature = (horizons = None, correlation_shift = false))]
fn tarl_table(py: Python<'_>, horizons: Option<Vec<u32>>, correlation_shift: bool) -> PyResult<String> {
    let base = if correlation_shift {
        GridSpec::correlation_shift()
    } else {
        GridSpec::default()
    };
    let spec = grid(horizons, base);
    py.detach(|| {
        let rows = tables::gen_tarl_table(&spec)?;
        tables::render_to_string(&rows, Format::Csv)
    })
    .map_err(to_py)
}

#[pymodule]
fn rzchart(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("RunCompletedError", m.py().get_type::<RunCompletedError>())?;
    m.add_class::<RatioDistribution>()?;
    m.add_class::<Chart>()?;
    m.add_class::<Inspection>()?;
    m.add_class::<Monitor>()?;
    m.add_function(wrap_pyfunction!(tarl, m)?)?;
    m.add_function(wrap_pyfunction!(solve_alpha_for_tarl0, m)?)?;
    m.add_function(wrap_pyfunction!(limits_table, m)?)?;
    m.add_function(wrap_pyfunction!(tarl_table, m)?)?;
    Ok(())
}
