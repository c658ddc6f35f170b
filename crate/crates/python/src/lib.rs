//! Python bindings.
//!
//! Structured results (runs, questions, bench rows) cross the boundary as
//! JSON and come out as plain dicts and lists.

use std::sync::{Arc, Mutex};

use isneak::baselines::{flash_run, nga_run, FlashConfig, NgaConfig};
use isneak::engine::{run_isneak, AutoOracle, RunResult, Search, SearchConfig};
use isneak::evalkit::{bench, d2h, d2h_of_goals, hamlet_samples, rank_all, sweep_s, Algorithm, BenchModel};
use isneak::model_io::{
    enumerate_valid, generate_synthetic_model, load_candidate_table, parse_dimacs, CnfModel, ObjectiveSpec,
};
use isneak::preprocess::{encode_pool, EncodedPool};
use isneak::ranking::{Choice, DEFAULT_QUESTION_SIZE};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: isneak::Error) -> PyErr {
    match e {
        isneak::Error::Io(_) | isneak::Error::Oracle(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn run_to_py<'py>(py: Python<'py>, run: &RunResult) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(py, &run.to_json())
}

/// A feature model in conjunctive normal form with its objectives.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    model: Arc<CnfModel>,
    objectives: ObjectiveSpec,
}

#[pymethods]
impl PyModel {
    /// Random feature tree with `ceil(ccr * features)` cross-tree
    /// constraints and random per-feature goal values.
    #[staticmethod]
    #[pyo3(signature = (features, ccr, seed=0))]
    fn synthetic(features: usize, ccr: f64, seed: u64) -> PyResult<Self> {
        let s = generate_synthetic_model(features, ccr, seed).map_err(err)?;
        Ok(Self {
            model: Arc::new(s.model),
            objectives: s.objectives,
        })
    }

    /// DIMACS text plus the objective sidecar JSON and per-feature value CSV.
    #[staticmethod]
    fn from_dimacs(dimacs: &str, objectives_json: &str, features_csv: &str) -> PyResult<Self> {
        let model = parse_dimacs(dimacs).map_err(err)?;
        let spec = ObjectiveSpec::from_sidecar_json(objectives_json).map_err(err)?;
        let table = spec.parse_feature_table(features_csv, &model.var_names).map_err(err)?;
        Ok(Self {
            model: Arc::new(model),
            objectives: spec.with_feature_values(table).map_err(err)?,
        })
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.model.num_vars
    }

    #[getter]
    fn num_clauses(&self) -> usize {
        self.model.clauses.len()
    }

    #[getter]
    fn goals(&self) -> Vec<(String, String)> {
        self.objectives
            .goals()
            .iter()
            .map(|g| (g.name.clone(), format!("{:?}", g.direction).to_lowercase()))
            .collect()
    }

    fn to_dimacs(&self) -> String {
        self.model.to_dimacs()
    }

    fn objectives_json(&self) -> String {
        self.objectives.to_sidecar_json()
    }

    fn features_csv(&self) -> Option<String> {
        self.objectives.feature_table_csv(&self.model.var_names)
    }

    /// Enumerates up to `count` valid configurations.
    #[pyo3(signature = (count=10_000, seed=1))]
    fn enumerate(&self, py: Python<'_>, count: usize, seed: u64) -> PyResult<PyPool> {
        let (model, spec) = (self.model.clone(), self.objectives.clone());
        let pool = py
            .detach(move || enumerate_valid(model, spec, count, seed).and_then(encode_pool))
            .map_err(err)?;
        Ok(PyPool { pool: Arc::new(pool) })
    }

    fn __repr__(&self) -> String {
        format!("Model(vars={}, clauses={})", self.model.num_vars, self.model.clauses.len())
    }
}

/// An encoded candidate pool.
#[pyclass(name = "Pool", frozen)]
struct PyPool {
    pool: Arc<EncodedPool>,
}

#[pymethods]
impl PyPool {
    /// Pre-evaluated candidate table; `objectives_json` names the goal
    /// columns.
    #[staticmethod]
    fn from_csv(csv: &str, objectives_json: &str) -> PyResult<Self> {
        let spec = ObjectiveSpec::from_sidecar_json(objectives_json).map_err(err)?;
        let pool = load_candidate_table(csv, spec).and_then(encode_pool).map_err(err)?;
        Ok(Self { pool: Arc::new(pool) })
    }

    fn __len__(&self) -> usize {
        self.pool.len()
    }

    #[getter]
    fn attributes(&self) -> Vec<String> {
        (0..self.pool.num_attributes())
            .map(|a| self.pool.attribute_name(a).to_string())
            .collect()
    }

    #[getter]
    fn columns(&self) -> usize {
        self.pool.matrix().cols()
    }

    fn goals(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.pool.len() {
            return Err(PyValueError::new_err(format!("candidate {i} out of range")));
        }
        Ok(self.pool.pool().true_goals(i).to_vec())
    }

    fn to_csv(&self) -> PyResult<String> {
        self.pool.pool().to_csv().map_err(err)
    }

    /// Pool indices from best to worst.
    fn rank(&self, py: Python<'_>) -> PyResult<Vec<usize>> {
        let pool = self.pool.clone();
        Ok(py.detach(move || rank_all(pool.pool())).map_err(err)?.order)
    }

    /// Rank of candidate `i` divided by the pool size; 0 is best.
    fn d2h(&self, py: Python<'_>, i: usize) -> PyResult<f64> {
        let pool = self.pool.clone();
        let ranked = py.detach(move || rank_all(pool.pool())).map_err(err)?;
        d2h(i, &ranked).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Pool(candidates={}, attributes={})", self.pool.len(), self.pool.num_attributes())
    }
}

fn parse_choice(choice: &str) -> PyResult<Choice> {
    match choice {
        "A" | "a" => Ok(Choice::A),
        "B" | "b" => Ok(Choice::B),
        other => Err(PyValueError::new_err(format!("choice must be 'A' or 'B', got {other:?}"))),
    }
}

/// Step-by-step interactive search for callers that answer questions
/// themselves.
#[pyclass(name = "Session")]
struct PySession {
    search: Mutex<Option<Search>>,
    pool: Arc<EncodedPool>,
}

impl PySession {
    fn with<T>(&self, f: impl FnOnce(&mut Search) -> PyResult<T>) -> PyResult<T> {
        let mut guard = self.search.lock().expect("session lock");
        match guard.as_mut() {
            Some(s) => f(s),
            None => Err(PyRuntimeError::new_err("session already finished")),
        }
    }
}

#[pymethods]
impl PySession {
    #[new]
    #[pyo3(signature = (pool, seed=0, cap=DEFAULT_QUESTION_SIZE))]
    fn new(py: Python<'_>, pool: &PyPool, seed: u64, cap: usize) -> PyResult<Self> {
        let p = pool.pool.clone();
        let search = py
            .detach(move || Search::new(p, SearchConfig { seed, question_cap: cap }))
            .map_err(err)?;
        Ok(Self {
            search: Mutex::new(Some(search)),
            pool: pool.pool.clone(),
        })
    }

    /// The pending question as `{"id", "optionA", "optionB"}`, or `None`
    /// when no question is left.
    fn next_question<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        let view = self.with(|s| Ok(s.next_question().map(|q| q.to_view(&self.pool))))?;
        view.map(|v| json_to_py(py, &serde_json::to_string(&v).expect("questions serialize"))).transpose()
    }

    fn answer(&self, choice: &str) -> PyResult<()> {
        let c = parse_choice(choice)?;
        self.with(|s| s.answer(c).map(|_| ()).map_err(err))
    }

    #[getter]
    fn live(&self) -> PyResult<usize> {
        self.with(|s| Ok(s.live_count()))
    }

    #[getter]
    fn asked(&self) -> PyResult<usize> {
        self.with(|s| Ok(s.log().questions))
    }

    /// Runs the automatic second pass and returns the run result.
    fn finish<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let search = self
            .search
            .lock()
            .expect("session lock")
            .take()
            .ok_or_else(|| PyRuntimeError::new_err("session already finished"))?;
        let run = py.detach(move || search.finish()).map_err(err)?;
        run_to_py(py, &run)
    }
}

/// Full interactive search against a simulated user.
#[pyfunction]
#[pyo3(signature = (pool, seed=0, cap=DEFAULT_QUESTION_SIZE))]
fn run_isneak_auto<'py>(py: Python<'py>, pool: &PyPool, seed: u64, cap: usize) -> PyResult<Bound<'py, PyAny>> {
    let p = pool.pool.clone();
    let run = py
        .detach(move || {
            let mut oracle = AutoOracle::new(&p, seed);
            run_isneak(p.clone(), &mut oracle, SearchConfig { seed, question_cap: cap })
        })
        .map_err(err)?;
    run_to_py(py, &run)
}

#[pyfunction]
#[pyo3(signature = (pool, seed=0))]
fn run_flash<'py>(py: Python<'py>, pool: &PyPool, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let p = pool.pool.clone();
    let run = py.detach(move || flash_run(&p, FlashConfig::seeded(seed))).map_err(err)?;
    run_to_py(py, &run)
}

#[pyfunction]
#[pyo3(signature = (pool, seed=0, generations=100))]
fn run_nga<'py>(py: Python<'py>, pool: &PyPool, seed: u64, generations: usize) -> PyResult<Bound<'py, PyAny>> {
    let p = pool.pool.clone();
    let config = NgaConfig {
        generations,
        ..NgaConfig::seeded(seed)
    };
    let run = py.detach(move || nga_run(p.pool(), config)).map_err(err)?;
    run_to_py(py, &run)
}

/// d2h of a run's best result on `pool` (1.0 when the run found nothing).
#[pyfunction]
fn score_run(py: Python<'_>, pool: &PyPool, run: &Bound<'_, PyAny>) -> PyResult<f64> {
    let best = run.get_item("best")?;
    if best.is_none() {
        return Ok(1.0);
    }
    let goals: Vec<f64> = best.get_item("goals")?.extract()?;
    let index: Option<usize> = best.get_item("pool_index")?.extract()?;
    let p = pool.pool.clone();
    let ranked = py.detach(move || rank_all(p.pool())).map_err(err)?;
    match index {
        Some(i) => d2h(i, &ranked).map_err(err),
        None => Ok(d2h_of_goals(&goals, pool.pool.pool(), &ranked)),
    }
}

/// Benchmarks `algorithms` over named pools; returns the report CSV.
#[pyfunction]
#[pyo3(signature = (pools, algorithms=vec!["isneak".to_string(), "flash".to_string(), "nga".to_string()], repeats=20, seed0=1, timing=false))]
fn run_bench(
    py: Python<'_>,
    pools: Vec<(String, PyRef<'_, PyPool>)>,
    algorithms: Vec<String>,
    repeats: usize,
    seed0: u64,
    timing: bool,
) -> PyResult<String> {
    let models: Vec<BenchModel> = pools
        .iter()
        .map(|(name, p)| BenchModel {
            name: name.clone(),
            pool: p.pool.clone(),
        })
        .collect();
    let algs = algorithms
        .iter()
        .map(|a| a.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    py.detach(move || bench(&models, &algs, repeats, seed0).and_then(|r| r.to_csv(timing)))
        .map_err(err)
}

/// `(S, median I)` for each question size cap.
#[pyfunction]
#[pyo3(signature = (pool, s_values, repeats=20, seed0=1))]
fn sweep(py: Python<'_>, pool: &PyPool, s_values: Vec<usize>, repeats: usize, seed0: u64) -> PyResult<Vec<(usize, f64)>> {
    let p = pool.pool.clone();
    let rows = py.detach(move || sweep_s(&p, &s_values, repeats, seed0)).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.s, r.median_i)).collect())
}

/// Samples needed to see, with confidence `c`, one candidate from the best
/// fraction `p`.
#[pyfunction]
fn hamlet(confidence: f64, p: f64) -> PyResult<u64> {
    hamlet_samples(confidence, p).map_err(err)
}

#[pymodule]
#[pyo3(name = "isneak")]
fn isneak_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyPool>()?;
    m.add_class::<PySession>()?;
    m.add_function(wrap_pyfunction!(run_isneak_auto, m)?)?;
    m.add_function(wrap_pyfunction!(run_flash, m)?)?;
    m.add_function(wrap_pyfunction!(run_nga, m)?)?;
    m.add_function(wrap_pyfunction!(score_run, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(hamlet, m)?)?;
    m.add("DEFAULT_QUESTION_SIZE", DEFAULT_QUESTION_SIZE)?;
    Ok(())
}
