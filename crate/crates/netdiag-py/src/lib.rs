//! Python bindings for the fault-diagnosis engine: topology ingestion,
//! model building, root-cause diagnosis, and the campaign harness.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use netdiag::bayes::{attach_parameters, PriorConfig, VertexState};
use netdiag::diagnosis::{diagnose, explain, DiagnoseOptions, ObservationSet, ServiceAlarm};
use netdiag::graph::{build_model, export, DependencyGraph, ExportFormat};
use netdiag::simulator::{benchmark_build, run_campaign, BenchConfig, CampaignConfig};
use netdiag::templates::{expected_vertex_count as core_expected_vertex_count, TemplateProfile};
use netdiag::topology::{
    classify_at, generate_topology, parse_dialect, ControlMode, Dialect, ElementType,
    LinkDescriptor, NetworkDescriptor, TopologyKind,
};

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_kind(kind: &str, n_hosts: u32) -> PyResult<TopologyKind> {
    match kind {
        "linear" => Ok(TopologyKind::Linear),
        "ring" => Ok(TopologyKind::Ring),
        "star" => Ok(TopologyKind::Star),
        "tree" => TopologyKind::binary_tree_for_hosts(n_hosts).map_err(value_error),
        other => Err(value_error(format!(
            "unknown topology kind {other:?} (linear, tree, ring or star)"
        ))),
    }
}

fn parse_mode(mode: &str) -> PyResult<ControlMode> {
    match mode {
        "out-of-band" => Ok(ControlMode::OutOfBand),
        "in-band" => Ok(ControlMode::InBand),
        other => Err(value_error(format!(
            "unknown control mode {other:?} (out-of-band or in-band)"
        ))),
    }
}

/// A classified topology snapshot: the network descriptor plus the link
/// endpoints.
#[pyclass(module = "netdiag_py")]
struct NetworkSnapshot {
    descriptor: NetworkDescriptor,
    links: LinkDescriptor,
}

#[pymethods]
impl NetworkSnapshot {
    #[getter]
    fn control_mode(&self) -> String {
        self.descriptor.control_mode.to_string()
    }

    fn element_ids(&self) -> Vec<String> {
        self.descriptor
            .elements
            .iter()
            .map(|e| e.element_id.clone())
            .collect()
    }

    /// Element counts per type, e.g. {"master-switch": 2}.
    fn type_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let dict = PyDict::new(py);
        for (t, count) in self.descriptor.type_counts() {
            let key = serde_json::to_value(t).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            dict.set_item(key.as_str().unwrap_or("?").to_string(), count)?;
        }
        Ok(dict)
    }

    fn link_endpoints(&self, link_id: &str) -> Option<(String, String)> {
        self.links
            .entry(link_id)
            .map(|e| (e.endpoint_a.clone(), e.endpoint_b.clone()))
    }

    /// Builds the dependency-graph model under the given template profile.
    #[pyo3(signature = (profile = "degree-adaptive"))]
    fn build_model(&self, profile: &str) -> PyResult<NetworkModel> {
        let profile = TemplateProfile::from_str(profile).map_err(value_error)?;
        let graph = build_model(&self.descriptor, &self.links, profile).map_err(value_error)?;
        Ok(NetworkModel { graph })
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkSnapshot({} elements, {})",
            self.descriptor.elements.len(),
            self.descriptor.control_mode
        )
    }
}

/// The built dependency graph, ready for parameterization and queries.
#[pyclass(module = "netdiag_py")]
struct NetworkModel {
    graph: DependencyGraph,
}

#[pymethods]
impl NetworkModel {
    #[getter]
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.graph.edges.len()
    }

    fn vertex_labels(&self) -> Vec<String> {
        self.graph.vertices.iter().map(|v| v.label.clone()).collect()
    }

    fn element_ids(&self) -> Vec<String> {
        self.graph.element_ids().iter().map(|s| s.to_string()).collect()
    }

    fn export_json(&self) -> PyResult<String> {
        let bytes = export(&self.graph, ExportFormat::Json).map_err(value_error)?;
        String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn export_dot(&self) -> PyResult<String> {
        let bytes = export(&self.graph, ExportFormat::Dot).map_err(value_error)?;
        String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Ranks root causes for the given observations.
    ///
    /// `alarm` is None (trigger-only), "infrastructure-failure", or
    /// "service-degradation" with src/dst element ids. `nic_states` maps
    /// card labels to "up"/"down"; `cpu_utilization` maps CPU labels to
    /// fractions in [0, 1].
    #[pyo3(signature = (alarm = None, src = None, dst = None, nic_states = None, cpu_utilization = None, priors_json = None, tie_epsilon = 1e-6, top_k = None))]
    #[allow(clippy::too_many_arguments)]
    fn diagnose(
        &self,
        alarm: Option<&str>,
        src: Option<&str>,
        dst: Option<&str>,
        nic_states: Option<HashMap<String, String>>,
        cpu_utilization: Option<HashMap<String, f64>>,
        priors_json: Option<&str>,
        tie_epsilon: f64,
        top_k: Option<usize>,
    ) -> PyResult<DiagnosisReport> {
        let alarm = match alarm {
            None => None,
            Some("infrastructure-failure") => Some(ServiceAlarm::infrastructure()),
            Some("service-degradation") => {
                let (Some(src), Some(dst)) = (src, dst) else {
                    return Err(value_error(
                        "service-degradation alarms require src and dst element ids",
                    ));
                };
                Some(ServiceAlarm::degradation(src, dst))
            }
            Some(other) => {
                return Err(value_error(format!(
                    "unknown alarm kind {other:?} (infrastructure-failure or service-degradation)"
                )))
            }
        };
        let priors = match priors_json {
            Some(text) => PriorConfig::from_json(text).map_err(value_error)?,
            None => PriorConfig::default(),
        };
        let bn = attach_parameters(&self.graph, &priors).map_err(value_error)?;

        let mut obs = ObservationSet::default();
        for (label, state) in nic_states.unwrap_or_default() {
            let state = match state.as_str() {
                "up" => VertexState::Up,
                "down" => VertexState::Down,
                other => {
                    return Err(value_error(format!(
                        "card state for {label} must be \"up\" or \"down\", got {other:?}"
                    )))
                }
            };
            obs.nic_states.insert(label, state);
        }
        obs.cpu_utilization = cpu_utilization
            .unwrap_or_default()
            .into_iter()
            .collect::<BTreeMap<_, _>>();

        let report = diagnose(
            &bn,
            alarm.as_ref(),
            &obs,
            &DiagnoseOptions { tie_epsilon, top_k },
        )
        .map_err(value_error)?;
        Ok(DiagnosisReport { report })
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkModel({} vertices, {} edges)",
            self.graph.vertex_count(),
            self.graph.edges.len()
        )
    }
}

/// Ranked root-cause report.
#[pyclass(module = "netdiag_py")]
struct DiagnosisReport {
    report: netdiag::diagnosis::RootCauseReport,
}

#[pymethods]
impl DiagnosisReport {
    /// (element_id, score) pairs, highest first.
    fn element_ranking(&self) -> Vec<(String, f64)> {
        self.report
            .element_ranking
            .iter()
            .map(|e| (e.element_id.clone(), e.score))
            .collect()
    }

    /// (vertex label, posterior) pairs, highest first.
    fn vertex_ranking(&self) -> Vec<(String, f64)> {
        self.report
            .vertex_ranking
            .iter()
            .map(|v| (v.label.clone(), v.posterior))
            .collect()
    }

    fn top_tie_group(&self) -> Vec<String> {
        self.report.top_tie_group().to_vec()
    }

    fn explain(&self) -> String {
        explain(&self.report)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.report)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        match self.report.element_ranking.first() {
            Some(top) => format!("DiagnosisReport(top = {} @ {:.4})", top.element_id, top.score),
            None => "DiagnosisReport(empty)".to_string(),
        }
    }
}

/// Parses a topology document (native, floodlight or opendaylight layout)
/// into a classified snapshot.
#[pyfunction]
#[pyo3(signature = (text, dialect = "native", controller = None))]
fn parse_topology(text: &str, dialect: &str, controller: Option<&str>) -> PyResult<NetworkSnapshot> {
    let dialect = Dialect::from_str(dialect).map_err(value_error)?;
    let mut raw = parse_dialect(text.as_bytes(), dialect).map_err(value_error)?;
    if let Some(controller) = controller {
        raw.controller_id = controller.to_string();
    }
    let (descriptor, links) = classify_at(&raw, 0).map_err(value_error)?;
    Ok(NetworkSnapshot { descriptor, links })
}

/// Generates a synthetic topology: kind in {linear, tree, ring, star},
/// mode in {out-of-band, in-band}.
#[pyfunction]
#[pyo3(signature = (kind, n_hosts, mode = "out-of-band"))]
fn generate(kind: &str, n_hosts: u32, mode: &str) -> PyResult<NetworkSnapshot> {
    let kind = parse_kind(kind, n_hosts)?;
    let mode = parse_mode(mode)?;
    let (descriptor, links) = generate_topology(kind, n_hosts, mode).map_err(value_error)?;
    Ok(NetworkSnapshot { descriptor, links })
}

/// Closed-form table-compat vertex count for linear and binary-tree
/// topologies.
#[pyfunction]
fn expected_vertex_count(kind: &str, n_hosts: u32) -> PyResult<u64> {
    core_expected_vertex_count(parse_kind(kind, n_hosts)?, n_hosts).map_err(value_error)
}

/// Runs a fault-injection campaign from a JSON config and returns the
/// report as JSON.
#[pyfunction]
fn run_campaign_json(config_json: &str) -> PyResult<String> {
    let config = CampaignConfig::from_json(config_json).map_err(value_error)?;
    let report = run_campaign(&config).map_err(value_error)?;
    Ok(report.to_json())
}

/// Times model building over growing topologies; returns CSV.
#[pyfunction]
#[pyo3(signature = (repetitions = 20))]
fn benchmark_csv(repetitions: u32) -> PyResult<String> {
    let config = BenchConfig {
        repetitions,
        ..BenchConfig::default()
    };
    let report = benchmark_build(&config).map_err(value_error)?;
    Ok(report.to_csv())
}

/// Element type of a normalized id like "MS_2", or None.
#[pyfunction]
fn element_type(element_id: &str) -> Option<String> {
    ElementType::from_element_id(element_id)
        .and_then(|t| serde_json::to_value(t).ok())
        .and_then(|v| v.as_str().map(str::to_string))
}

#[pymodule]
fn netdiag_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<NetworkSnapshot>()?;
    m.add_class::<NetworkModel>()?;
    m.add_class::<DiagnosisReport>()?;
    m.add_function(wrap_pyfunction!(parse_topology, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(expected_vertex_count, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign_json, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark_csv, m)?)?;
    m.add_function(wrap_pyfunction!(element_type, m)?)?;
    Ok(())
}
