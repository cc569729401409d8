//! Python bindings: `import engage_bench`.
//!
//! Structured results (reports, reproductions, manifests) cross the boundary as
//! plain dicts decoded from their JSON form; the main model types are classes.

use std::collections::BTreeMap;

use engage_core::analysis::{score_logs as core_score_logs, VectorTable as CoreTable};
use engage_core::cohort::{reference_weights, simulate_cohort as core_simulate, CohortSpec};
use engage_core::ingest::{
    derive_raw_metrics, parse_session_log, satisfaction_score, validate_log, write_session_log, IngestOptions,
    SessionLog as CoreLog, StudentProfile,
};
use engage_core::model::{compose_vector as core_compose, Component, TimeBounds};
use engage_core::orchestrator::run_session as core_run_session;
use engage_core::orchestrator::session::write_transcript;
use engage_core::reproduce::{reproduce as core_reproduce, ReproduceConfig};
use engage_core::stats::{compare_trials, emit_report, mann_whitney_u as core_mwu, ComparisonReport, ReportFormat};
use engage_core::{EngagementVector as CoreVector, RawMetrics as CoreRaw, TrialCondition, WeightConfig as CoreWeights};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn condition(name: &str) -> PyResult<TrialCondition> {
    name.parse().map_err(value_error)
}

fn component(name: &str) -> PyResult<Component> {
    serde_json::from_value(serde_json::Value::String(name.to_string())).map_err(value_error)
}

fn json_to_py<'py>(py: Python<'py>, bytes: &[u8]) -> PyResult<Bound<'py, PyAny>> {
    let text = std::str::from_utf8(bytes).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(module = "engage_bench", name = "WeightConfig", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct WeightConfig {
    pub inner: CoreWeights,
}

#[pymethods]
impl WeightConfig {
    /// Missing groups fall back to uniform weights. `time_bounds=None` means
    /// the range of the cohort being scored.
    #[new]
    #[pyo3(signature = (lambda_=None, gamma=None, beta=None, w=None, time_bounds=None, i_max=12.0))]
    pub fn new(
        lambda_: Option<[f64; 3]>,
        gamma: Option<[f64; 2]>,
        beta: Option<[f64; 3]>,
        w: Option<[f64; 3]>,
        time_bounds: Option<(f64, f64)>,
        i_max: f64,
    ) -> PyResult<Self> {
        let d = CoreWeights::default();
        let mut inner = CoreWeights {
            lambda: lambda_.unwrap_or(d.lambda),
            gamma: gamma.unwrap_or(d.gamma),
            beta: beta.unwrap_or(d.beta),
            w: w.unwrap_or(d.w),
            time_bounds: TimeBounds::CohortRange,
            i_max,
        };
        if let Some((lo, hi)) = time_bounds {
            inner = inner.with_time_bounds(lo, hi);
        }
        inner.validate().map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Uniform weights with a fixed 0 to 20 minute quiz window.
    #[staticmethod]
    pub fn reference() -> Self {
        Self {
            inner: reference_weights(),
        }
    }

    #[staticmethod]
    pub fn from_json(text: &str) -> PyResult<Self> {
        let inner: CoreWeights = serde_json::from_str(text).map_err(value_error)?;
        inner.validate().map_err(value_error)?;
        Ok(Self { inner })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("weights serialise")
    }

    #[getter]
    pub fn lambda_(&self) -> [f64; 3] {
        self.inner.lambda
    }

    #[getter]
    pub fn gamma(&self) -> [f64; 2] {
        self.inner.gamma
    }

    #[getter]
    pub fn beta(&self) -> [f64; 3] {
        self.inner.beta
    }

    #[getter]
    pub fn w(&self) -> [f64; 3] {
        self.inner.w
    }

    #[getter]
    pub fn time_bounds(&self) -> Option<(f64, f64)> {
        self.inner.fixed_time_bounds().ok()
    }

    #[getter]
    pub fn i_max(&self) -> f64 {
        self.inner.i_max
    }

    fn __repr__(&self) -> String {
        format!("WeightConfig({})", self.to_json())
    }
}

#[pyclass(module = "engage_bench", name = "RawMetrics", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct RawMetrics {
    pub inner: CoreRaw,
}

#[pymethods]
impl RawMetrics {
    #[new]
    #[pyo3(signature = (*, tq_minutes, sq_percent, gf_percent, pe_percent, fr_percent, rs_rating, if_count, ga_percent, vr_percent))]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tq_minutes: f64,
        sq_percent: f64,
        gf_percent: f64,
        pe_percent: f64,
        fr_percent: f64,
        rs_rating: f64,
        if_count: u32,
        ga_percent: f64,
        vr_percent: f64,
    ) -> PyResult<Self> {
        let inner = CoreRaw {
            tq_minutes,
            sq_percent,
            gf_percent,
            pe_percent,
            fr_percent,
            rs_rating,
            if_count,
            ga_percent,
            vr_percent,
        };
        inner.validate().map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    pub fn tq_minutes(&self) -> f64 {
        self.inner.tq_minutes
    }
    #[getter]
    pub fn sq_percent(&self) -> f64 {
        self.inner.sq_percent
    }
    #[getter]
    pub fn gf_percent(&self) -> f64 {
        self.inner.gf_percent
    }
    #[getter]
    pub fn pe_percent(&self) -> f64 {
        self.inner.pe_percent
    }
    #[getter]
    pub fn fr_percent(&self) -> f64 {
        self.inner.fr_percent
    }
    #[getter]
    pub fn rs_rating(&self) -> f64 {
        self.inner.rs_rating
    }
    #[getter]
    pub fn if_count(&self) -> u32 {
        self.inner.if_count
    }
    #[getter]
    pub fn ga_percent(&self) -> f64 {
        self.inner.ga_percent
    }
    #[getter]
    pub fn vr_percent(&self) -> f64 {
        self.inner.vr_percent
    }

    fn __repr__(&self) -> String {
        format!("RawMetrics({:?})", self.inner)
    }
}

#[pyclass(module = "engage_bench", name = "EngagementVector", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct EngagementVector {
    pub inner: CoreVector,
}

#[pymethods]
impl EngagementVector {
    #[getter]
    pub fn e_cog(&self) -> f64 {
        self.inner.e_cog
    }
    #[getter]
    pub fn e_emo(&self) -> f64 {
        self.inner.e_emo
    }
    #[getter]
    pub fn e_beh(&self) -> f64 {
        self.inner.e_beh
    }
    #[getter]
    pub fn e_final(&self) -> f64 {
        self.inner.e_final
    }

    fn __repr__(&self) -> String {
        let v = &self.inner;
        format!(
            "EngagementVector(e_cog={}, e_emo={}, e_beh={}, e_final={})",
            v.e_cog, v.e_emo, v.e_beh, v.e_final
        )
    }
}

/// Scores one session. The weights need fixed time bounds.
#[pyfunction]
pub fn compose_vector(raw: &RawMetrics, weights: &WeightConfig) -> PyResult<EngagementVector> {
    core_compose(&raw.inner, &weights.inner)
        .map(|inner| EngagementVector { inner })
        .map_err(value_error)
}

#[pyclass(module = "engage_bench", name = "SessionLog", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct SessionLog {
    pub inner: CoreLog,
}

#[pymethods]
impl SessionLog {
    /// Parses and validates line-delimited JSON.
    #[staticmethod]
    pub fn from_jsonl(data: &[u8]) -> PyResult<Self> {
        parse_session_log(data).map(|inner| Self { inner }).map_err(value_error)
    }

    pub fn to_jsonl<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &write_session_log(&self.inner))
    }

    #[getter]
    pub fn session_id(&self) -> &str {
        &self.inner.session_id
    }

    #[getter]
    pub fn condition(&self) -> &'static str {
        self.inner.condition.as_str()
    }

    #[getter]
    pub fn event_count(&self) -> usize {
        self.inner.events.len()
    }

    pub fn violations(&self) -> Vec<String> {
        validate_log(&self.inner).iter().map(ToString::to_string).collect()
    }

    #[pyo3(signature = (reply_window_ms=None, neutral_defaults=false))]
    pub fn raw_metrics(&self, reply_window_ms: Option<u64>, neutral_defaults: bool) -> PyResult<RawMetrics> {
        let mut opts = IngestOptions {
            neutral_defaults,
            ..IngestOptions::default()
        };
        if let Some(ms) = reply_window_ms {
            opts.reply_window_ms = ms;
        }
        derive_raw_metrics(&self.inner, &opts)
            .map(|inner| RawMetrics { inner })
            .map_err(value_error)
    }

    pub fn satisfaction(&self) -> PyResult<f64> {
        satisfaction_score(&self.inner).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "SessionLog({:?}, {}, {} events)",
            self.inner.session_id,
            self.inner.condition,
            self.inner.events.len()
        )
    }
}

/// Synthetic cohort for `condition` (`trial1`, `trial2`, `trial3`, `memory`
/// or a full condition name).
#[pyfunction]
#[pyo3(signature = (condition_name, n=15, seed=0))]
pub fn simulate_cohort(condition_name: &str, n: usize, seed: u64) -> PyResult<Vec<SessionLog>> {
    let spec = CohortSpec::new(condition(condition_name)?, n, seed);
    core_simulate(&spec)
        .map(|logs| logs.into_iter().map(|inner| SessionLog { inner }).collect())
        .map_err(value_error)
}

/// Drives one tutoring session; returns the log and its transcript bytes.
#[pyfunction]
#[pyo3(signature = (condition_name, student_id, age, gender, seed=0, preferences=None))]
pub fn run_session<'py>(
    py: Python<'py>,
    condition_name: &str,
    student_id: String,
    age: u32,
    gender: String,
    seed: u64,
    preferences: Option<BTreeMap<String, String>>,
) -> PyResult<(SessionLog, Bound<'py, PyBytes>)> {
    let profile = StudentProfile {
        student_id,
        age,
        gender,
        preferences: preferences.unwrap_or_default(),
    };
    let run = core_run_session(condition(condition_name)?, &profile, seed).map_err(value_error)?;
    let transcript = PyBytes::new(py, &write_transcript(&run));
    Ok((SessionLog { inner: run.log }, transcript))
}

#[pyclass(module = "engage_bench", name = "VectorTable", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct VectorTable {
    pub inner: CoreTable,
}

#[pymethods]
impl VectorTable {
    #[staticmethod]
    pub fn from_json(data: &[u8]) -> PyResult<Self> {
        CoreTable::from_json(data)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    pub fn to_json<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_json())
    }

    pub fn to_csv<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_csv())
    }

    /// Weights after cohort-range bounds were resolved.
    #[getter]
    pub fn weights(&self) -> WeightConfig {
        WeightConfig {
            inner: self.inner.weights,
        }
    }

    /// `(session_id, condition, e_cog, e_emo, e_beh, e_final)` per session.
    #[getter]
    pub fn rows(&self) -> Vec<(String, &'static str, f64, f64, f64, f64)> {
        self.inner
            .rows
            .iter()
            .map(|r| {
                (
                    r.session_id.clone(),
                    r.condition.as_str(),
                    r.e_cog,
                    r.e_emo,
                    r.e_beh,
                    r.e_final,
                )
            })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

#[pyfunction]
#[pyo3(signature = (logs, weights=None))]
pub fn score_logs(logs: Vec<PyRef<'_, SessionLog>>, weights: Option<&WeightConfig>) -> PyResult<VectorTable> {
    let logs: Vec<CoreLog> = logs.iter().map(|l| l.inner.clone()).collect();
    let weights = weights.map_or_else(CoreWeights::default, |w| w.inner);
    let (resolved, scored) = core_score_logs(&logs, &weights, &IngestOptions::default()).map_err(value_error)?;
    Ok(VectorTable {
        inner: CoreTable::new(resolved, &scored),
    })
}

#[pyclass(module = "engage_bench", name = "ComparisonReport", frozen)]
pub struct PyComparisonReport {
    pub inner: ComparisonReport,
}

#[pymethods]
impl PyComparisonReport {
    pub fn to_json<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &emit_report(&self.inner, ReportFormat::Json))
    }

    pub fn to_csv<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &emit_report(&self.inner, ReportFormat::Csv))
    }

    pub fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &emit_report(&self.inner, ReportFormat::Json))
    }

    /// `(u, p_value, method, significant)` for one component and pair.
    pub fn pairwise(&self, component_name: &str, a: &str, b: &str) -> PyResult<(f64, f64, &'static str, bool)> {
        let row = self
            .inner
            .pairwise_result(component(component_name)?, condition(a)?, condition(b)?)
            .ok_or_else(|| value_error(format!("no {component_name} comparison between {a} and {b}")))?;
        Ok((
            row.result.u_statistic,
            row.result.p_value,
            row.result.method.as_str(),
            row.significant,
        ))
    }

    /// Conditions from lowest to highest mean final score.
    #[getter]
    pub fn final_ordering(&self) -> Vec<&'static str> {
        self.inner.final_ordering.ascending.iter().map(|c| c.as_str()).collect()
    }
}

/// Compares every cohort found in the given tables.
#[pyfunction]
pub fn compare(tables: Vec<PyRef<'_, VectorTable>>) -> PyResult<PyComparisonReport> {
    let cohorts: Vec<_> = tables.iter().flat_map(|t| t.inner.cohorts()).collect();
    compare_trials(&cohorts)
        .map(|inner| PyComparisonReport { inner })
        .map_err(value_error)
}

/// `(u, p_value, method)`.
#[pyfunction]
pub fn mann_whitney_u(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64, &'static str)> {
    let r = core_mwu(&a, &b).map_err(value_error)?;
    Ok((r.u_statistic, r.p_value, r.method.as_str()))
}

/// Runs all four conditions end to end; returns summaries, report and checks as a dict.
#[pyfunction]
#[pyo3(signature = (seed=0, n=15, weights=None))]
pub fn reproduce<'py>(
    py: Python<'py>,
    seed: u64,
    n: usize,
    weights: Option<&WeightConfig>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ReproduceConfig {
        seed,
        n,
        weights: weights.map_or_else(reference_weights, |w| w.inner),
    };
    let r = py.detach(|| core_reproduce(&cfg)).map_err(value_error)?;
    json_to_py(py, &serde_json::to_vec(&r).expect("reproduction serialises"))
}

pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<WeightConfig>()?;
    m.add_class::<RawMetrics>()?;
    m.add_class::<EngagementVector>()?;
    m.add_class::<SessionLog>()?;
    m.add_class::<VectorTable>()?;
    m.add_class::<PyComparisonReport>()?;
    m.add_function(wrap_pyfunction!(compose_vector, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cohort, m)?)?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    m.add_function(wrap_pyfunction!(score_logs, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(mann_whitney_u, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    m.add("CONDITIONS", TrialCondition::ALL.map(TrialCondition::as_str).to_vec())?;
    Ok(())
}

#[pymodule]
fn engage_bench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(condition("trial3").unwrap(), TrialCondition::VerbalGestureMemory);
        assert_eq!(component("behavioral").unwrap(), Component::Behavioral);
        assert!(component("social").is_err());
    }

    #[test]
    fn weights_fill_defaults_and_validate() {
        let w = WeightConfig::new(None, Some([0.25, 0.75]), None, None, Some((1.0, 9.0)), 10.0).unwrap();
        assert_eq!(w.inner.gamma, [0.25, 0.75]);
        assert_eq!(w.time_bounds(), Some((1.0, 9.0)));
        assert_eq!(
            WeightConfig::new(None, None, None, None, None, 12.0).unwrap().inner,
            CoreWeights::default()
        );
        assert!(WeightConfig::new(None, None, None, None, Some((9.0, 1.0)), 12.0).is_err());
        assert_eq!(WeightConfig::from_json(&w.to_json()).unwrap().inner, w.inner);
    }

    #[test]
    fn statistics_wrap_core() {
        assert_eq!(mann_whitney_u(vec![1.0, 2.0], vec![3.0, 4.0]).unwrap().2, "exact");
        assert!(mann_whitney_u(vec![], vec![1.0]).is_err());
        let logs = simulate_cohort("memory", 3, 1).unwrap();
        assert!(logs
            .iter()
            .all(|l| l.condition() == "verbal_memory" && l.violations().is_empty()));
    }
}
