//! Python bindings for the etdgt simulator: scenario handling, the
//! centralized oracle, simulation runs with metric traces, and the
//! step-size bound report.

use std::str::FromStr;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use etdgt::engine::{self, Algorithm};
use etdgt::oracle;
use etdgt::scenario;
use etdgt::stepsize::BoundReport;

fn to_py_err(e: etdgt::Error) -> PyErr {
    match e {
        etdgt::Error::Parse(_) | etdgt::Error::InvalidScenario(_) | etdgt::Error::Infeasible(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A validated scenario: network, agents, step size, trigger schedule.
#[pyclass(name = "Scenario", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Load and validate a scenario JSON file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = scenario::Scenario::load(std::path::Path::new(path)).map_err(to_py_err)?;
        Ok(PyScenario { inner })
    }

    /// Parse a scenario from a JSON string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = scenario::Scenario::from_json(text).map_err(to_py_err)?;
        Ok(PyScenario { inner })
    }

    /// One of the bundled scenarios: "case1" or "case2".
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        scenario::Scenario::builtin(name)
            .map(|inner| PyScenario { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no bundled scenario named '{name}'")))
    }

    /// Seeded random strongly connected scenario.
    #[staticmethod]
    #[pyo3(signature = (n, gen_fraction=0.3, seed=7))]
    fn generate(n: usize, gen_fraction: f64, seed: u64) -> PyResult<Self> {
        let inner = scenario::gen_large_scenario(n, gen_fraction, seed).map_err(to_py_err)?;
        Ok(PyScenario { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn total_demand(&self) -> f64 {
        self.inner.total_demand()
    }

    fn set_alpha(&mut self, alpha: f64) -> PyResult<()> {
        let mut s = self.inner.clone();
        s.alpha = alpha;
        s.validate().map_err(to_py_err)?;
        self.inner = s;
        Ok(())
    }

    fn set_trigger(&mut self, initial: f64, decay: f64) -> PyResult<()> {
        let mut s = self.inner.clone();
        s.trigger.initial = initial;
        s.trigger.decay = decay;
        s.validate().map_err(to_py_err)?;
        self.inner = s;
        Ok(())
    }

    fn set_horizon(&mut self, k: usize) {
        self.inner.k = k;
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(name='{}', n={}, alpha={}, K={})",
            self.inner.name, self.inner.n, self.inner.alpha, self.inner.k
        )
    }
}

/// Centralized solution of the balance-constrained problem.
#[pyclass(name = "OracleSolution")]
struct PyOracleSolution {
    inner: oracle::OracleSolution,
}

#[pymethods]
impl PyOracleSolution {
    #[getter]
    fn w_star(&self) -> Vec<Vec<f64>> {
        self.inner
            .w_star
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect()
    }

    #[getter]
    fn x_star(&self) -> Vec<f64> {
        self.inner.x_star.to_vec()
    }

    #[getter]
    fn f_star(&self) -> f64 {
        self.inner.f_star
    }

    #[getter]
    fn kkt_residual(&self) -> f64 {
        self.inner.kkt_residual
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner.to_json_value()).expect("json")
    }
}

/// Per-iteration metrics of one run.
#[pyclass(name = "Trace")]
struct PyTrace {
    inner: engine::MetricsTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn algorithm(&self) -> String {
        self.inner.algorithm.file_tag().to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    /// One metric column over all iterations. Names match the CSV header.
    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let rows = &self.inner.rows;
        let col = match name {
            "k" => rows.iter().map(|r| r.k as f64).collect(),
            "consensus_error" => rows.iter().map(|r| r.consensus_error).collect(),
            "tracking_error" => rows.iter().map(|r| r.tracking_error).collect(),
            "grad_norm" => rows.iter().map(|r| r.grad_norm).collect(),
            "primal_err" => rows.iter().map(|r| r.primal_err).collect(),
            "primal_residual" => rows.iter().map(|r| r.primal_residual).collect(),
            "supply_gap" => rows.iter().map(|r| r.supply_gap).collect(),
            "dual_gap" => rows.iter().map(|r| r.dual_gap).collect(),
            "comm_w" => rows.iter().map(|r| r.comm_w as f64).collect(),
            "comm_s" => rows.iter().map(|r| r.comm_s as f64).collect(),
            other => {
                return Err(PyValueError::new_err(format!("unknown column '{other}'")));
            }
        };
        Ok(col)
    }

    /// Total broadcast events over the run (both variables).
    #[getter]
    fn comm_events(&self) -> u64 {
        let last = self.inner.final_row();
        last.comm_w + last.comm_s
    }

    #[getter]
    fn comm_messages(&self) -> u64 {
        self.inner.final_row().comm_messages
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json_value()).expect("json")
    }
}

/// Solve the centralized problem for a scenario.
#[pyfunction]
fn solve_oracle(scenario: &PyScenario) -> PyResult<PyOracleSolution> {
    let costs = scenario.inner.cost_models().map_err(to_py_err)?;
    let inner = oracle::solve_centralized(&costs).map_err(to_py_err)?;
    Ok(PyOracleSolution { inner })
}

/// Run one algorithm ("etdgt" or "ddgt") for `k` rounds.
#[pyfunction]
#[pyo3(signature = (scenario, algorithm="etdgt", k=None, with_oracle=true))]
fn run(
    scenario: &PyScenario,
    algorithm: &str,
    k: Option<usize>,
    with_oracle: bool,
) -> PyResult<PyTrace> {
    let alg = Algorithm::from_str(algorithm).map_err(PyValueError::new_err)?;
    let rounds = k.unwrap_or(scenario.inner.k);
    let sol = if with_oracle {
        let costs = scenario.inner.cost_models().map_err(to_py_err)?;
        Some(oracle::solve_centralized(&costs).map_err(to_py_err)?)
    } else {
        None
    };
    let inner = engine::run(&scenario.inner, alg, rounds, sol.as_ref()).map_err(to_py_err)?;
    Ok(PyTrace { inner })
}

/// Step-size bound report (every constant by name) as a JSON string.
#[pyfunction]
fn bounds_report(scenario: &PyScenario) -> PyResult<String> {
    let report = BoundReport::compute(&scenario.inner).map_err(to_py_err)?;
    Ok(serde_json::to_string_pretty(&report).expect("json"))
}

#[pymodule]
fn etdgt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyOracleSolution>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(solve_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_report, m)?)?;
    Ok(())
}
