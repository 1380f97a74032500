//! Root-cause diagnosis: correlates a service alarm with network
//! observations and ranks candidate elements by posterior failure
//! probability.
//!
//! A degradation alarm is coupled to the model through a synthesized
//! deterministic-OR service vertex whose parents are the link states on the
//! canonical src-dst path, the active-state vertices of the nodes on that
//! path, the controller's active state, and (under in-band control) the
//! link states of the master-to-controller control path. An infrastructure
//! alarm couples to the controller's active state and every control link.
//! Alarms can also be treated as bare triggers (no service vertex), in
//! which case the observations alone drive the posterior.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bayes::{
    eliminate_variables, posterior_disjunction, BayesianNetwork, Evidence, VertexState,
};
use crate::error::DiagnosisError;
use crate::graph::{EdgeClass, Vertex};
use crate::templates::{LayerTag, VertexKind};
use crate::topology::ElementType;

type Result<T> = std::result::Result<T, DiagnosisError>;

pub const SERVICE_ELEMENT: &str = "SVC_1";
pub const SERVICE_VERTEX: &str = "SVC_1.SVC_1";

// --- Alarms and observations -----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlarmKind {
    InfrastructureFailure,
    ServiceDegradation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceAlarm {
    pub kind: AlarmKind,
    /// (src host, dst host) element ids; required for degradations.
    pub endpoints: Option<(String, String)>,
    #[serde(default)]
    pub raised_at: u64,
}

impl ServiceAlarm {
    pub fn infrastructure() -> ServiceAlarm {
        ServiceAlarm {
            kind: AlarmKind::InfrastructureFailure,
            endpoints: None,
            raised_at: 0,
        }
    }

    pub fn degradation(src: &str, dst: &str) -> ServiceAlarm {
        ServiceAlarm {
            kind: AlarmKind::ServiceDegradation,
            endpoints: Some((src.to_string(), dst.to_string())),
            raised_at: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == AlarmKind::ServiceDegradation && self.endpoints.is_none() {
            return Err(DiagnosisError::MissingEndpoints);
        }
        Ok(())
    }
}

/// What the monitoring plane reports: hard card states and fractional CPU
/// utilizations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    #[serde(default)]
    pub nic_states: BTreeMap<String, VertexState>,
    #[serde(default)]
    pub cpu_utilization: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseOptions {
    pub tie_epsilon: f64,
    pub top_k: Option<usize>,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions {
            tie_epsilon: 1e-6,
            top_k: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementScore {
    pub element_id: String,
    /// P(any vertex of the element is down | evidence).
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexScore {
    pub label: String,
    pub posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCauseReport {
    pub element_ranking: Vec<ElementScore>,
    pub vertex_ranking: Vec<VertexScore>,
    pub evidence_echo: Evidence,
    /// Partition of the element ranking into tie groups: adjacent elements
    /// whose scores differ by less than tie_epsilon share a group.
    pub ties: Vec<Vec<String>>,
}

impl RootCauseReport {
    pub fn top_tie_group(&self) -> &[String] {
        self.ties.first().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn element_score(&self, element_id: &str) -> Option<f64> {
        self.element_ranking
            .iter()
            .find(|e| e.element_id == element_id)
            .map(|e| e.score)
    }
}

// --- Element topology recovered from the model -------------------------------------

/// Node/link adjacency reconstructed from a built model's inter edges.
struct ElementGraph {
    /// node element -> (link element, peer node element)
    adjacency: BTreeMap<String, Vec<(String, String)>>,
    links: Vec<(String, String, String)>,
    nodes: BTreeSet<String>,
}

impl ElementGraph {
    fn from_graph(g: &crate::graph::DependencyGraph) -> ElementGraph {
        let mut adjacency: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        let mut links = Vec::new();
        let mut nodes = BTreeSet::new();
        for id in g.element_ids() {
            match ElementType::from_element_id(id) {
                Some(t) if t.is_node() => {
                    nodes.insert(id.to_string());
                    adjacency.entry(id.to_string()).or_default();
                }
                Some(_) => {
                    if let Some((a, b)) = g.link_endpoints(id) {
                        links.push((id.to_string(), a, b));
                    }
                }
                None => {}
            }
        }
        for (link, a, b) in &links {
            adjacency
                .entry(a.clone())
                .or_default()
                .push((link.clone(), b.clone()));
            adjacency
                .entry(b.clone())
                .or_default()
                .push((link.clone(), a.clone()));
        }
        for neighbors in adjacency.values_mut() {
            neighbors.sort();
        }
        ElementGraph {
            adjacency,
            links,
            nodes,
        }
    }

    /// Fewest-hop path between two node elements; among equal-length paths
    /// the lexicographically smallest (link, node) step is taken at every
    /// hop. Returns (nodes, links) with endpoints included.
    fn shortest_path(&self, src: &str, dst: &str) -> Option<(Vec<String>, Vec<String>)> {
        if !self.nodes.contains(src) || !self.nodes.contains(dst) {
            return None;
        }
        if src == dst {
            return Some((vec![src.to_string()], Vec::new()));
        }
        let mut dist: BTreeMap<&str, usize> = BTreeMap::new();
        dist.insert(dst, 0);
        let mut frontier = vec![dst];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &node in &frontier {
                let d = dist[node];
                for (_, peer) in &self.adjacency[node] {
                    if !dist.contains_key(peer.as_str()) {
                        dist.insert(peer, d + 1);
                        next.push(peer.as_str());
                    }
                }
            }
            frontier = next;
        }
        let mut remaining = *dist.get(src)?;
        let mut path_nodes = vec![src.to_string()];
        let mut path_links = Vec::new();
        let mut current = src.to_string();
        while remaining > 0 {
            let (link, node) = self.adjacency[current.as_str()]
                .iter()
                .filter(|(_, peer)| dist.get(peer.as_str()) == Some(&(remaining - 1)))
                .min()
                .expect("a strictly-descending neighbor exists on a shortest path")
                .clone();
            path_links.push(link);
            path_nodes.push(node.clone());
            current = node;
            remaining -= 1;
        }
        Some((path_nodes, path_links))
    }

    fn nodes_of_type(&self, t: ElementType) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| ElementType::from_element_id(n) == Some(t))
            .map(String::as_str)
            .collect()
    }

    fn links_of_type(&self, t: ElementType) -> Vec<&str> {
        self.links
            .iter()
            .filter(|(l, _, _)| ElementType::from_element_id(l) == Some(t))
            .map(|(l, _, _)| l.as_str())
            .collect()
    }

    /// In-band control shows up as slave switches in the normalized ids.
    fn is_in_band(&self) -> bool {
        !self.nodes_of_type(ElementType::SlaveSwitch).is_empty()
    }
}

fn vertex_label(element: &str, kind: VertexKind, ordinal: usize) -> String {
    format!("{element}.{}_{}", kind.code(), ordinal)
}

/// The deterministic fewest-hop path between two node elements of a built
/// model, as (nodes, links). This is the exact rule the degradation alarm
/// coupling uses, exposed so the simulator can pick fault-covering
/// endpoint pairs.
pub fn canonical_path(
    graph: &crate::graph::DependencyGraph,
    src: &str,
    dst: &str,
) -> Option<(Vec<String>, Vec<String>)> {
    ElementGraph::from_graph(graph).shortest_path(src, dst)
}

// --- Operations ---------------------------------------------------------------------

/// Adds the deterministic-OR service vertex for an alarm and returns the
/// extended network. The new vertex is labelled [`SERVICE_VERTEX`].
pub fn attach_service_vertex(
    bn: &BayesianNetwork,
    alarm: &ServiceAlarm,
) -> Result<BayesianNetwork> {
    alarm.validate()?;
    let elements = ElementGraph::from_graph(bn.graph());
    let mut parent_labels: BTreeSet<String> = BTreeSet::new();

    let controller = elements
        .nodes_of_type(ElementType::Controller)
        .first()
        .copied()
        .ok_or_else(|| DiagnosisError::UnknownElement("C_1".into()))?
        .to_string();

    match alarm.kind {
        AlarmKind::InfrastructureFailure => {
            parent_labels.insert(vertex_label(&controller, VertexKind::VnfActive, 1));
            for cl in elements.links_of_type(ElementType::ControlLink) {
                parent_labels.insert(vertex_label(cl, VertexKind::LinkState, 1));
            }
        }
        AlarmKind::ServiceDegradation => {
            let (src, dst) = alarm.endpoints.clone().expect("validated");
            for endpoint in [&src, &dst] {
                if !elements.nodes.contains(endpoint) {
                    return Err(DiagnosisError::UnknownElement(endpoint.clone()));
                }
            }
            let (path_nodes, path_links) =
                elements
                    .shortest_path(&src, &dst)
                    .ok_or(DiagnosisError::UnreachableEndpoints {
                        src: src.clone(),
                        dst: dst.clone(),
                    })?;
            for link in &path_links {
                parent_labels.insert(vertex_label(link, VertexKind::LinkState, 1));
            }
            for node in &path_nodes {
                parent_labels.insert(vertex_label(node, VertexKind::VnfActive, 1));
            }
            parent_labels.insert(vertex_label(&controller, VertexKind::VnfActive, 1));
            if elements.is_in_band() {
                if let Some(master) = elements.nodes_of_type(ElementType::MasterSwitch).first() {
                    if let Some((_, control_path)) = elements.shortest_path(master, &controller) {
                        for link in control_path {
                            parent_labels.insert(vertex_label(&link, VertexKind::LinkState, 1));
                        }
                    }
                }
            }
        }
    }

    let parents: Vec<usize> = parent_labels
        .iter()
        .map(|l| bn.index_of(l))
        .collect::<std::result::Result<_, _>>()?;
    let vertex = Vertex {
        label: SERVICE_VERTEX.to_string(),
        kind: VertexKind::Service,
        layer: LayerTag::LogicalActivated,
        owner_element: SERVICE_ELEMENT.to_string(),
    };
    Ok(bn.with_appended_vertex(vertex, &parents, EdgeClass::Inside, 0.0))
}

/// Turns raw observations into evidence: card states become hard evidence,
/// a CPU utilization `u` becomes the soft likelihood pair `(1-u, u)`.
pub fn ingest_observations(obs: &ObservationSet, bn: &BayesianNetwork) -> Result<Evidence> {
    let mut evidence = Evidence::new();
    for (label, &state) in &obs.nic_states {
        let idx = bn.index_of(label)?;
        if bn.graph().vertices[idx].kind != VertexKind::NetworkCard {
            return Err(DiagnosisError::ObservationKind {
                label: label.clone(),
                expected: "network-card",
            });
        }
        evidence.set_hard(label, state)?;
    }
    for (label, &utilization) in &obs.cpu_utilization {
        let idx = bn.index_of(label)?;
        if bn.graph().vertices[idx].kind != VertexKind::Cpu {
            return Err(DiagnosisError::ObservationKind {
                label: label.clone(),
                expected: "cpu",
            });
        }
        if !(0.0..=1.0).contains(&utilization) {
            return Err(DiagnosisError::UtilizationRange {
                label: label.clone(),
                value: utilization,
            });
        }
        evidence.set_soft(label, 1.0 - utilization, utilization)?;
    }
    Ok(evidence)
}

/// Full diagnosis: attaches the alarm (when coupled), applies observations,
/// ranks vertices and elements. With `alarm = None` the alarm is treated as
/// a bare trigger and the observations alone drive the posterior.
pub fn diagnose(
    bn: &BayesianNetwork,
    alarm: Option<&ServiceAlarm>,
    obs: &ObservationSet,
    options: &DiagnoseOptions,
) -> Result<RootCauseReport> {
    let extended = match alarm {
        Some(alarm) => Some(attach_service_vertex(bn, alarm)?),
        None => None,
    };
    let network = extended.as_ref().unwrap_or(bn);

    let mut evidence = ingest_observations(obs, network)?;
    if extended.is_some() {
        evidence
            .set_hard(SERVICE_VERTEX, VertexState::Down)
            .map_err(DiagnosisError::Bayes)?;
    }

    // Candidate vertices: everything unobserved that belongs to a real
    // element. Soft-evidence vertices stay candidates; their posterior is a
    // genuine probability.
    let graph = network.graph();
    let mut element_members: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut candidates: Vec<&str> = Vec::new();
    for v in &graph.vertices {
        if v.owner_element == SERVICE_ELEMENT {
            continue;
        }
        if evidence.hard_state(&v.label).is_some() {
            continue;
        }
        candidates.push(&v.label);
        element_members
            .entry(v.owner_element.as_str())
            .or_default()
            .push(&v.label);
    }

    let marginals =
        eliminate_variables(network, &evidence, &candidates).map_err(DiagnosisError::Bayes)?;
    let mut vertex_ranking: Vec<VertexScore> = marginals
        .iter()
        .map(|(label, &posterior)| VertexScore {
            label: label.clone(),
            posterior,
        })
        .collect();
    vertex_ranking.sort_by(|a, b| {
        b.posterior
            .partial_cmp(&a.posterior)
            .expect("finite posterior")
            .then_with(|| a.label.cmp(&b.label))
    });

    let mut element_ranking = Vec::with_capacity(element_members.len());
    for (element, members) in &element_members {
        let score =
            posterior_disjunction(network, &evidence, members).map_err(DiagnosisError::Bayes)?;
        element_ranking.push(ElementScore {
            element_id: element.to_string(),
            score,
        });
    }
    element_ranking.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("finite score")
            .then_with(|| a.element_id.cmp(&b.element_id))
    });

    let mut ties: Vec<Vec<String>> = Vec::new();
    let mut previous_score = f64::INFINITY;
    for entry in &element_ranking {
        if !ties.is_empty() && (previous_score - entry.score).abs() < options.tie_epsilon {
            ties.last_mut().expect("non-empty").push(entry.element_id.clone());
        } else {
            ties.push(vec![entry.element_id.clone()]);
        }
        previous_score = entry.score;
    }

    if let Some(k) = options.top_k {
        element_ranking.truncate(k);
        vertex_ranking.truncate(k);
    }

    Ok(RootCauseReport {
        element_ranking,
        vertex_ranking,
        evidence_echo: evidence,
        ties,
    })
}

/// Posterior probability that each vertex of an element failed on its own
/// (vertex down while all of its parents are up). In the single-fault
/// regime these sum to roughly the element's disjunction score.
pub fn subcause_split(
    bn: &BayesianNetwork,
    evidence: &Evidence,
    element: &str,
) -> Result<Vec<(String, f64)>> {
    let members = bn.graph().vertices_of_element(element);
    if members.is_empty() {
        return Err(DiagnosisError::UnknownElement(element.to_string()));
    }
    let mut split = Vec::new();
    for &idx in &members {
        let label = bn.graph().vertices[idx].label.clone();
        if evidence.hard_state(&label).is_some() {
            continue;
        }
        let parents = bn.parents_of(&label).map_err(DiagnosisError::Bayes)?;
        // P(v down, parents up | ev) by chained conditioning: every factor
        // is a single marginal under progressively extended hard evidence.
        let mut conditioned = evidence.clone();
        let mut parents_up = 1.0;
        for parent in parents {
            match conditioned.hard_state(parent) {
                Some(VertexState::Down) => {
                    parents_up = 0.0;
                    break;
                }
                Some(VertexState::Up) => continue,
                None => {}
            }
            let m =
                eliminate_variables(bn, &conditioned, &[parent]).map_err(DiagnosisError::Bayes)?;
            parents_up *= 1.0 - m[parent];
            if parents_up == 0.0 {
                break;
            }
            conditioned.force_hard(parent, VertexState::Up);
        }
        let p = if parents_up == 0.0 {
            0.0
        } else {
            let m = eliminate_variables(bn, &conditioned, &[label.as_str()])
                .map_err(DiagnosisError::Bayes)?;
            m[&label] * parents_up
        };
        split.push((label, p));
    }
    Ok(split)
}

/// Renders a human-readable summary of a report.
pub fn explain(report: &RootCauseReport) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    if report.element_ranking.is_empty() {
        out.push_str("no unobserved candidates: every vertex carries evidence\n");
        return out;
    }
    let top = &report.element_ranking[0];
    writeln!(
        out,
        "most probable root cause: {} (score {:.4})",
        top.element_id, top.score
    )
    .expect("write to string");

    let sub: Vec<&VertexScore> = report
        .vertex_ranking
        .iter()
        .filter(|v| v.label.starts_with(&format!("{}.", top.element_id)))
        .collect();
    if !sub.is_empty() {
        out.push_str("sub-component posteriors:\n");
        for v in sub {
            writeln!(out, "  {}: {:.4}", v.label, v.posterior).expect("write to string");
        }
    }

    let top_group = report.top_tie_group();
    if top_group.len() > 1 {
        writeln!(out, "tied at the top: {}", top_group.join(", ")).expect("write to string");
    }
    out.push_str("ranking:\n");
    for (rank, entry) in report.element_ranking.iter().enumerate().take(8) {
        writeln!(out, "  {}. {} ({:.4})", rank + 1, entry.element_id, entry.score)
            .expect("write to string");
    }
    out
}
