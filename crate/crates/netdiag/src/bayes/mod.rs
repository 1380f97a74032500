//! Noisy-OR Bayesian network over the dependency graph.
//!
//! Every vertex is binary (up/down) with a noisy-OR conditional
//! distribution: a failed parent takes the child down unless inhibited,
//! and the leak is the probability the vertex fails even though every
//! parent is fine. Posteriors are computed two independent ways:
//! [`enumerate_joint`] sums the full joint (small networks only, the test
//! oracle) and [`eliminate_variables`] runs exact variable elimination
//! (the production path, scales to the thousand-vertex models).

mod ve;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::BayesError;
use crate::graph::DependencyGraph;
use crate::templates::VertexKind;

use ve::{CompiledModel, Eliminator};

type Result<T> = std::result::Result<T, BayesError>;

pub const ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexState {
    Up,
    Down,
}

// --- Parameters -----------------------------------------------------------------

/// Noisy-OR conditional probability table of one vertex.
///
/// `P(down | parents) = 1 - (1 - leak) * prod(inhibition_i)` over the
/// parents that are down. With all inhibitions zero (the default), any
/// failed parent takes the vertex down with certainty and the leak is the
/// only source of spontaneous failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyOrCpt {
    pub leak: f64,
    /// Per-parent inhibition, aligned with the network's parent order
    /// (ascending vertex index).
    pub inhibitions: Vec<f64>,
}

impl NoisyOrCpt {
    pub fn new(leak: f64, parent_count: usize) -> NoisyOrCpt {
        NoisyOrCpt {
            leak,
            inhibitions: vec![0.0; parent_count],
        }
    }

    /// Probability of being down given the parents' states.
    pub fn probability_down(&self, parent_states: &[VertexState]) -> Result<f64> {
        if parent_states.len() != self.inhibitions.len() {
            return Err(BayesError::ArityMismatch {
                expected: self.inhibitions.len(),
                got: parent_states.len(),
            });
        }
        let mut up = 1.0 - self.leak;
        for (state, q) in parent_states.iter().zip(&self.inhibitions) {
            if *state == VertexState::Down {
                up *= q;
            }
        }
        Ok(1.0 - up)
    }
}

fn default_leak(kind: VertexKind) -> f64 {
    match kind {
        VertexKind::Cpu => 0.01,
        VertexKind::NetworkCard => 0.005,
        VertexKind::VnfProcess => 0.01,
        VertexKind::VnfConfig => 0.01,
        VertexKind::VnfActive => 0.001,
        VertexKind::LinkState => 0.01,
        VertexKind::Service => 0.0,
    }
}

/// Per-kind leak values plus per-label overrides. Unset kinds fall back to
/// the built-in defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub kinds: BTreeMap<VertexKind, f64>,
    pub overrides: BTreeMap<String, f64>,
}

impl PriorConfig {
    pub fn from_json(text: &str) -> Result<PriorConfig> {
        serde_json::from_str(text).map_err(|e| BayesError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<PriorConfig> {
        toml::from_str(text).map_err(|e| BayesError::Config(e.to_string()))
    }

    fn leak_for(&self, kind: VertexKind, label: &str) -> f64 {
        if let Some(&leak) = self.overrides.get(label) {
            return leak;
        }
        self.kinds.get(&kind).copied().unwrap_or(default_leak(kind))
    }
}

// --- Network ---------------------------------------------------------------------

/// The dependency graph plus one noisy-OR CPT per vertex. Immutable after
/// construction; queries may run concurrently.
#[derive(Debug, Clone)]
pub struct BayesianNetwork {
    graph: DependencyGraph,
    cpts: Vec<NoisyOrCpt>,
    /// Parents of each vertex, ascending index order.
    parents: Vec<Vec<usize>>,
    labels: BTreeMap<String, usize>,
    compiled: OnceLock<CompiledModel>,
}

impl BayesianNetwork {
    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .get(label)
            .copied()
            .ok_or_else(|| BayesError::UnknownLabel(label.to_string()))
    }

    pub fn cpt(&self, label: &str) -> Result<&NoisyOrCpt> {
        Ok(&self.cpts[self.index_of(label)?])
    }

    pub fn parents_of(&self, label: &str) -> Result<Vec<&str>> {
        let idx = self.index_of(label)?;
        Ok(self.parents[idx]
            .iter()
            .map(|&p| self.graph.vertices[p].label.as_str())
            .collect())
    }

    /// Sets the inhibition of one parent edge. Test and calibration hook;
    /// the pipeline leaves all inhibitions at zero.
    pub fn set_inhibition(&mut self, child: &str, parent: &str, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(BayesError::LeakOutOfRange {
                target: format!("{child} <- {parent}"),
                value,
            });
        }
        let c = self.index_of(child)?;
        let p = self.index_of(parent)?;
        let slot = self.parents[c]
            .iter()
            .position(|&x| x == p)
            .ok_or_else(|| BayesError::Config(format!("{parent} is not a parent of {child}")))?;
        self.cpts[c].inhibitions[slot] = value;
        self.compiled = OnceLock::new();
        Ok(())
    }

    /// Network extended by one vertex with the given parents (by index) and
    /// a zero-inhibition CPT with the given leak. The new vertex takes the
    /// highest index, so the graph stays sorted.
    pub fn with_appended_vertex(
        &self,
        vertex: crate::graph::Vertex,
        parent_indices: &[usize],
        class: crate::graph::EdgeClass,
        leak: f64,
    ) -> BayesianNetwork {
        let mut graph = self.graph.clone();
        let label = vertex.label.clone();
        let mut parents: Vec<usize> = parent_indices.to_vec();
        parents.sort_unstable();
        parents.dedup();
        graph.append_vertex(vertex, &parents, class);
        let mut cpts = self.cpts.clone();
        cpts.push(NoisyOrCpt::new(leak, parents.len()));
        let mut all_parents = self.parents.clone();
        all_parents.push(parents);
        let mut labels = self.labels.clone();
        labels.insert(label, graph.vertex_count() - 1);
        BayesianNetwork {
            graph,
            cpts,
            parents: all_parents,
            labels,
            compiled: OnceLock::new(),
        }
    }

    fn compiled(&self) -> &CompiledModel {
        self.compiled.get_or_init(|| CompiledModel::compile(self))
    }
}

/// Parameterizes a sorted dependency graph: every vertex gets a noisy-OR
/// CPT with a leak from the prior configuration and zero inhibitions.
pub fn attach_parameters(
    graph: &DependencyGraph,
    priors: &PriorConfig,
) -> Result<BayesianNetwork> {
    if !graph.sorted {
        return Err(BayesError::Config(
            "graph must be topologically sorted before parameterization".into(),
        ));
    }
    for (kind, &leak) in &priors.kinds {
        if !(0.0..=1.0).contains(&leak) {
            return Err(BayesError::LeakOutOfRange {
                target: format!("{kind:?}"),
                value: leak,
            });
        }
    }
    let mut labels = BTreeMap::new();
    for (i, v) in graph.vertices.iter().enumerate() {
        labels.insert(v.label.clone(), i);
    }
    for (label, &leak) in &priors.overrides {
        if !labels.contains_key(label) {
            return Err(BayesError::UnknownOverride(label.clone()));
        }
        if !(0.0..=1.0).contains(&leak) {
            return Err(BayesError::LeakOutOfRange {
                target: label.clone(),
                value: leak,
            });
        }
    }

    let n = graph.vertex_count();
    let mut parents = vec![Vec::new(); n];
    for e in &graph.edges {
        parents[e.to].push(e.from);
    }
    for p in &mut parents {
        p.sort_unstable();
        p.dedup();
    }
    let cpts = graph
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| NoisyOrCpt::new(priors.leak_for(v.kind, &v.label), parents[i].len()))
        .collect();
    Ok(BayesianNetwork {
        graph: graph.clone(),
        cpts,
        parents,
        labels,
        compiled: OnceLock::new(),
    })
}

// --- Evidence ---------------------------------------------------------------------

/// Hard states and soft likelihood weightings over vertex labels. Hard and
/// soft keys stay disjoint by construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    hard: BTreeMap<String, VertexState>,
    soft: BTreeMap<String, (f64, f64)>,
}

impl Evidence {
    pub fn new() -> Evidence {
        Evidence::default()
    }

    pub fn set_hard(&mut self, label: &str, state: VertexState) -> Result<()> {
        if self.soft.contains_key(label) {
            return Err(BayesError::ConflictingEvidence(label.to_string()));
        }
        if let Some(&existing) = self.hard.get(label) {
            if existing != state {
                return Err(BayesError::ConflictingEvidence(label.to_string()));
            }
        }
        self.hard.insert(label.to_string(), state);
        Ok(())
    }

    /// Sets a virtual likelihood pair (lambda_up, lambda_down).
    pub fn set_soft(&mut self, label: &str, lambda_up: f64, lambda_down: f64) -> Result<()> {
        if self.hard.contains_key(label) {
            return Err(BayesError::ConflictingEvidence(label.to_string()));
        }
        if !(0.0..=1.0).contains(&lambda_up) || !(0.0..=1.0).contains(&lambda_down) {
            return Err(BayesError::Config(format!(
                "likelihoods for {label} must lie in [0, 1]"
            )));
        }
        if lambda_up == 0.0 && lambda_down == 0.0 {
            return Err(BayesError::DegenerateLikelihood(label.to_string()));
        }
        self.soft.insert(label.to_string(), (lambda_up, lambda_down));
        Ok(())
    }

    /// Replaces any soft entry for the label with a hard state. Used when
    /// conditioning a query on a vertex that already carries a likelihood
    /// weighting.
    pub fn force_hard(&mut self, label: &str, state: VertexState) {
        self.soft.remove(label);
        self.hard.insert(label.to_string(), state);
    }

    pub fn hard(&self) -> &BTreeMap<String, VertexState> {
        &self.hard
    }

    pub fn soft(&self) -> &BTreeMap<String, (f64, f64)> {
        &self.soft
    }

    pub fn hard_state(&self, label: &str) -> Option<VertexState> {
        self.hard.get(label).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty() && self.soft.is_empty()
    }

    fn indexed(&self, bn: &BayesianNetwork) -> Result<IndexedEvidence> {
        let mut hard = BTreeMap::new();
        for (label, &state) in &self.hard {
            hard.insert(bn.index_of(label)?, state);
        }
        let mut soft = BTreeMap::new();
        for (label, &lambda) in &self.soft {
            soft.insert(bn.index_of(label)?, lambda);
        }
        Ok(IndexedEvidence { hard, soft })
    }
}

struct IndexedEvidence {
    hard: BTreeMap<usize, VertexState>,
    soft: BTreeMap<usize, (f64, f64)>,
}

/// Posterior failure probabilities keyed by vertex label.
pub type Marginals = BTreeMap<String, f64>;

// --- Inference --------------------------------------------------------------------

/// Exact posteriors by summing the full 2^V joint. Only usable on networks
/// of at most [`ENUMERATION_CAP`] vertices; this is the verification oracle
/// for [`eliminate_variables`].
pub fn enumerate_joint(
    bn: &BayesianNetwork,
    evidence: &Evidence,
    queries: &[&str],
) -> Result<Marginals> {
    let n = bn.graph.vertex_count();
    if n > ENUMERATION_CAP {
        return Err(BayesError::EnumerationCap {
            vertices: n,
            cap: ENUMERATION_CAP,
        });
    }
    let ev = evidence.indexed(bn)?;
    let query_idx: Vec<usize> = queries
        .iter()
        .map(|q| bn.index_of(q))
        .collect::<Result<_>>()?;

    let mut hard_mask = 0usize;
    let mut hard_bits = 0usize;
    for (&v, &state) in &ev.hard {
        hard_mask |= 1 << v;
        if state == VertexState::Down {
            hard_bits |= 1 << v;
        }
    }

    let mut z = 0.0;
    let mut down_weight = vec![0.0; n];
    for mask in 0usize..(1 << n) {
        if mask & hard_mask != hard_bits {
            continue;
        }
        let mut w = 1.0;
        for v in 0..n {
            let down = (mask >> v) & 1 == 1;
            let mut up_prob = 1.0 - bn.cpts[v].leak;
            for (slot, &p) in bn.parents[v].iter().enumerate() {
                if (mask >> p) & 1 == 1 {
                    up_prob *= bn.cpts[v].inhibitions[slot];
                }
            }
            w *= if down { 1.0 - up_prob } else { up_prob };
            if w == 0.0 {
                break;
            }
        }
        if w == 0.0 {
            continue;
        }
        for (&v, &(lu, ld)) in &ev.soft {
            w *= if (mask >> v) & 1 == 1 { ld } else { lu };
        }
        z += w;
        for (v, weight) in down_weight.iter_mut().enumerate() {
            if (mask >> v) & 1 == 1 {
                *weight += w;
            }
        }
    }
    if z <= 0.0 {
        return Err(BayesError::Contradiction {
            assignment: format!("{:?}", evidence.hard),
        });
    }
    Ok(query_idx
        .into_iter()
        .map(|v| (bn.graph.vertices[v].label.clone(), down_weight[v] / z))
        .collect())
}

/// Exact posteriors by variable elimination with a min-degree order.
/// Matches [`enumerate_joint`] wherever both run and scales to the
/// thousand-vertex models the benchmarks build.
pub fn eliminate_variables(
    bn: &BayesianNetwork,
    evidence: &Evidence,
    queries: &[&str],
) -> Result<Marginals> {
    let ev = evidence.indexed(bn)?;
    let model = bn.compiled();
    let eliminator = Eliminator::new(model, &ev.hard, &ev.soft);
    let mut out = Marginals::new();
    for q in queries {
        let idx = bn.index_of(q)?;
        out.insert((*q).to_string(), eliminator.marginal(idx)?);
    }
    Ok(out)
}

/// Exact `P(at least one vertex of the set is down | evidence)`, computed
/// by augmenting the compiled model with a temporary deterministic-OR
/// query variable.
pub fn posterior_disjunction(
    bn: &BayesianNetwork,
    evidence: &Evidence,
    vertex_set: &[&str],
) -> Result<f64> {
    if vertex_set.is_empty() {
        return Err(BayesError::Config(
            "posterior_disjunction requires a non-empty vertex set".into(),
        ));
    }
    let ev = evidence.indexed(bn)?;
    let members: Vec<usize> = vertex_set
        .iter()
        .map(|l| bn.index_of(l))
        .collect::<Result<_>>()?;
    if members.len() == 1 {
        let eliminator = Eliminator::new(bn.compiled(), &ev.hard, &ev.soft);
        return eliminator.marginal(members[0]);
    }
    let mut model = bn.compiled().clone();
    let query = model.add_disjunction(&members);
    let eliminator = Eliminator::new(&model, &ev.hard, &ev.soft);
    eliminator.marginal(query)
}
