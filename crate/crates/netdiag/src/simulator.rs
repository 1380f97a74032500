//! Fault-injection harness: forces failures on synthetic topologies,
//! synthesizes the observations a monitoring system would report, scores
//! diagnosis accuracy over seeded campaigns, and benchmarks model-build
//! time.
//!
//! Injection semantics: a node shutdown takes every vertex of that element
//! down but leaves peer cards alone (the peer's card is alive, only its
//! link partner vanished); a link cut takes the link-state vertex down and
//! both attached cards read carrier loss; a CPU load records a utilization
//! without any hard state change.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{attach_parameters, PriorConfig, VertexState};
use crate::diagnosis::{canonical_path, diagnose, DiagnoseOptions, ObservationSet, ServiceAlarm};
use crate::error::{Error, SimulatorError};
use crate::graph::{build_model, DependencyGraph, EdgeClass};
use crate::templates::{TemplateProfile, VertexKind};
use crate::topology::{generate_topology, ControlMode, ElementType, TopologyKind};

type Result<T, E = SimulatorError> = std::result::Result<T, E>;

// --- Scenarios ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultMode {
    NodeShutdown,
    LinkCut,
    CpuLoad(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub target: String,
    pub mode: FaultMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultScenario {
    pub faults: Vec<Fault>,
    pub seed: u64,
}

/// Vertex states implied by a scenario; vertices not listed are up.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub vertex_states: BTreeMap<String, VertexState>,
    pub cpu_loads: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    AllNics,
    Sampled { fraction: f64, seed: u64 },
}

/// Applies a fault scenario to a built model.
pub fn inject(model: &DependencyGraph, scenario: &FaultScenario) -> Result<GroundTruth> {
    let elements = model.element_ids();
    let mut seen = std::collections::BTreeSet::new();
    let mut truth = GroundTruth::default();
    for fault in &scenario.faults {
        if !elements.contains(&fault.target.as_str()) {
            return Err(SimulatorError::UnknownTarget(fault.target.clone()));
        }
        if !seen.insert(fault.target.as_str()) {
            return Err(SimulatorError::DuplicateTarget(fault.target.clone()));
        }
        match fault.mode {
            FaultMode::NodeShutdown => {
                for idx in model.vertices_of_element(&fault.target) {
                    truth
                        .vertex_states
                        .insert(model.vertices[idx].label.clone(), VertexState::Down);
                }
            }
            FaultMode::LinkCut => {
                let state = model
                    .vertices_of_element(&fault.target)
                    .into_iter()
                    .find(|&i| model.vertices[i].kind == VertexKind::LinkState)
                    .ok_or_else(|| SimulatorError::UnknownTarget(fault.target.clone()))?;
                truth
                    .vertex_states
                    .insert(model.vertices[state].label.clone(), VertexState::Down);
                // carrier loss on both attached cards
                for e in &model.edges {
                    if e.from == state && e.class == EdgeClass::Inter {
                        truth
                            .vertex_states
                            .insert(model.vertices[e.to].label.clone(), VertexState::Down);
                    }
                }
            }
            FaultMode::CpuLoad(fraction) => {
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(SimulatorError::LoadRange(fraction));
                }
                let cpu = model
                    .vertices_of_element(&fault.target)
                    .into_iter()
                    .find(|&i| model.vertices[i].kind == VertexKind::Cpu)
                    .ok_or_else(|| SimulatorError::UnknownTarget(fault.target.clone()))?;
                truth
                    .cpu_loads
                    .insert(model.vertices[cpu].label.clone(), fraction);
            }
        }
    }
    Ok(truth)
}

/// Builds the observation set a monitor with the given visibility would
/// report for a ground truth. Recorded CPU loads are always included.
pub fn synthesize_observations(
    truth: &GroundTruth,
    model: &DependencyGraph,
    visibility: Visibility,
) -> ObservationSet {
    let mut obs = ObservationSet::default();
    let mut rng = match visibility {
        Visibility::Sampled { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Visibility::AllNics => None,
    };
    for v in &model.vertices {
        if v.kind != VertexKind::NetworkCard {
            continue;
        }
        if let (Visibility::Sampled { fraction, .. }, Some(rng)) = (visibility, rng.as_mut()) {
            if rng.random::<f64>() >= fraction {
                continue;
            }
        }
        let state = truth
            .vertex_states
            .get(&v.label)
            .copied()
            .unwrap_or(VertexState::Up);
        obs.nic_states.insert(v.label.clone(), state);
    }
    obs.cpu_utilization = truth.cpu_loads.clone();
    obs
}

// --- Campaigns ---------------------------------------------------------------------

/// Topology family selector in campaign configs; trees are sized as binary
/// trees with two hosts per leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyFamily {
    Linear,
    Tree,
    Ring,
    Star,
}

impl TopologyFamily {
    pub fn kind_for_hosts(self, n_hosts: u32) -> Result<TopologyKind> {
        match self {
            TopologyFamily::Linear => Ok(TopologyKind::Linear),
            TopologyFamily::Ring => Ok(TopologyKind::Ring),
            TopologyFamily::Star => Ok(TopologyKind::Star),
            TopologyFamily::Tree => TopologyKind::binary_tree_for_hosts(n_hosts)
                .map_err(|e| SimulatorError::Config(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignFaultMode {
    NodeShutdown,
    LinkCut,
    CpuLoad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub topologies: Vec<TopologyFamily>,
    pub modes: Vec<ControlMode>,
    /// Host counts per topology.
    pub sizes: Vec<u32>,
    pub fault_modes: Vec<CampaignFaultMode>,
    pub trials: u32,
    pub seed: u64,
    pub top_k: usize,
    /// Wall-clock stats are off by default so reports stay byte-reproducible.
    pub include_timing: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            topologies: vec![
                TopologyFamily::Linear,
                TopologyFamily::Tree,
                TopologyFamily::Ring,
                TopologyFamily::Star,
            ],
            modes: vec![ControlMode::OutOfBand, ControlMode::InBand],
            sizes: vec![4, 8, 16],
            fault_modes: vec![CampaignFaultMode::NodeShutdown, CampaignFaultMode::LinkCut],
            trials: 200,
            seed: 7,
            top_k: 3,
            include_timing: false,
        }
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<CampaignConfig> {
        serde_json::from_str(text).map_err(|e| SimulatorError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<CampaignConfig> {
        toml::from_str(text).map_err(|e| SimulatorError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub topology: TopologyFamily,
    pub mode: ControlMode,
    pub n_hosts: u32,
    pub fault_mode: CampaignFaultMode,
    pub target: String,
    pub top1: Option<String>,
    pub hit_top1: bool,
    pub hit_topk: bool,
    /// Set when the trial aborted with a component error.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub topology: TopologyFamily,
    pub mode: ControlMode,
    pub n_hosts: u32,
    pub trials: u32,
    pub top1_hits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub total_ms: f64,
    pub mean_trial_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub trials: u32,
    pub completed: u32,
    pub diagnostic_failures: u32,
    pub top1_hits: u32,
    /// None when no trials ran.
    pub top1_accuracy: Option<f64>,
    pub topk_hits: u32,
    pub topk_accuracy: Option<f64>,
    pub k: usize,
    pub breakdown: Vec<BreakdownRow>,
    pub records: Vec<TrialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingStats>,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Per-trial CSV rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "trial,topology,mode,n_hosts,fault_mode,target,top1,hit_top1,hit_topk,error\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{:?},{},{},{:?},{},{},{},{},{}\n",
                r.trial,
                r.topology,
                r.mode,
                r.n_hosts,
                r.fault_mode,
                r.target,
                r.top1.as_deref().unwrap_or(""),
                r.hit_top1,
                r.hit_topk,
                r.error.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// Picks the degradation endpoints whose canonical path covers the target,
/// or an infrastructure alarm for control-plane targets.
fn alarm_for_target(model: &DependencyGraph, target: &str) -> Option<ServiceAlarm> {
    match ElementType::from_element_id(target) {
        Some(ElementType::Controller) | Some(ElementType::ControlLink) => {
            return Some(ServiceAlarm::infrastructure());
        }
        _ => {}
    }
    let hosts: Vec<String> = model
        .element_ids()
        .into_iter()
        .filter(|id| ElementType::from_element_id(id) == Some(ElementType::Host))
        .map(str::to_string)
        .collect();
    if ElementType::from_element_id(target) == Some(ElementType::Host) {
        let other = hosts.iter().find(|h| h.as_str() != target)?;
        return Some(ServiceAlarm::degradation(target, other));
    }
    for (i, src) in hosts.iter().enumerate() {
        for dst in &hosts[i + 1..] {
            if let Some((nodes, links)) = canonical_path(model, src, dst) {
                if nodes.iter().any(|n| n == target) || links.iter().any(|l| l == target) {
                    return Some(ServiceAlarm::degradation(src, dst));
                }
            }
        }
    }
    None
}

/// Runs a seeded fault campaign: generate, build, inject, synthesize,
/// diagnose, score. A hit requires the fault set to equal the top tie
/// group exactly (for single faults: strict rank 1). Component errors
/// abort the trial, are recorded, and the campaign continues.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    if config.topologies.is_empty()
        || config.modes.is_empty()
        || config.sizes.is_empty()
        || config.fault_modes.is_empty()
    {
        return Err(SimulatorError::Config(
            "topologies, modes, sizes and fault_modes must be non-empty".into(),
        ));
    }
    let mut grid = Vec::new();
    for &topology in &config.topologies {
        for &mode in &config.modes {
            for &n_hosts in &config.sizes {
                grid.push((topology, mode, n_hosts));
            }
        }
    }

    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let trial_seeds: Vec<u64> = (0..config.trials).map(|_| master.random()).collect();

    let started = Instant::now();
    let mut records = Vec::with_capacity(config.trials as usize);
    let mut by_grid: BTreeMap<usize, (u32, u32)> = BTreeMap::new();
    for trial in 0..config.trials {
        let grid_index = trial as usize % grid.len();
        let (family, mode, n_hosts) = grid[grid_index];
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seeds[trial as usize]);
        let record = run_trial(trial, family, mode, n_hosts, config, &mut rng).unwrap_or_else(
            |err| TrialRecord {
                trial,
                topology: family,
                mode,
                n_hosts,
                fault_mode: config.fault_modes[0],
                target: String::new(),
                top1: None,
                hit_top1: false,
                hit_topk: false,
                error: Some(err.to_string()),
            },
        );
        let entry = by_grid.entry(grid_index).or_insert((0, 0));
        entry.0 += 1;
        if record.hit_top1 {
            entry.1 += 1;
        }
        records.push(record);
    }
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    let completed = records.iter().filter(|r| r.error.is_none()).count() as u32;
    log::info!(
        "campaign: {} trials in {:.0} ms, {} completed",
        config.trials,
        elapsed_ms,
        completed
    );
    let top1_hits = records.iter().filter(|r| r.hit_top1).count() as u32;
    let topk_hits = records.iter().filter(|r| r.hit_topk).count() as u32;
    let breakdown = by_grid
        .into_iter()
        .map(|(gi, (trials, hits))| {
            let (topology, mode, n_hosts) = grid[gi];
            BreakdownRow {
                topology,
                mode,
                n_hosts,
                trials,
                top1_hits: hits,
            }
        })
        .collect();
    Ok(CampaignReport {
        trials: config.trials,
        completed,
        diagnostic_failures: config.trials - completed,
        top1_hits,
        top1_accuracy: (config.trials > 0).then(|| top1_hits as f64 / config.trials as f64),
        topk_hits,
        topk_accuracy: (config.trials > 0).then(|| topk_hits as f64 / config.trials as f64),
        k: config.top_k,
        breakdown,
        records,
        timing: config.include_timing.then_some(TimingStats {
            total_ms: elapsed_ms,
            mean_trial_ms: elapsed_ms / config.trials.max(1) as f64,
        }),
    })
}

fn run_trial(
    trial: u32,
    family: TopologyFamily,
    mode: ControlMode,
    n_hosts: u32,
    config: &CampaignConfig,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<TrialRecord, Error> {
    let kind = family.kind_for_hosts(n_hosts).map_err(Error::Simulator)?;
    let (descriptor, links) = generate_topology(kind, n_hosts, mode)?;
    let model = build_model(&descriptor, &links, TemplateProfile::DegreeAdaptive)?;
    let bn = attach_parameters(&model, &PriorConfig::default()).map_err(Error::Bayes)?;

    let fault_mode = config.fault_modes[rng.random_range(0..config.fault_modes.len())];
    let pool: Vec<&str> = model
        .element_ids()
        .into_iter()
        .filter(|id| match ElementType::from_element_id(id) {
            Some(t) => match fault_mode {
                CampaignFaultMode::LinkCut => t.is_link(),
                CampaignFaultMode::NodeShutdown | CampaignFaultMode::CpuLoad => t.is_node(),
            },
            None => false,
        })
        .collect();
    let target = pool[rng.random_range(0..pool.len())].to_string();

    let mut faults = vec![Fault {
        target: target.clone(),
        mode: match fault_mode {
            CampaignFaultMode::NodeShutdown => FaultMode::NodeShutdown,
            CampaignFaultMode::LinkCut => FaultMode::LinkCut,
            CampaignFaultMode::CpuLoad => FaultMode::CpuLoad(0.95),
        },
    }];
    if fault_mode == CampaignFaultMode::CpuLoad {
        // the rest of the nodes run at a seeded load between 5% and 95%
        for id in model.element_ids() {
            if id != target && ElementType::from_element_id(id).is_some_and(ElementType::is_node) {
                faults.push(Fault {
                    target: id.to_string(),
                    mode: FaultMode::CpuLoad(rng.random_range(0.05..0.95)),
                });
            }
        }
    }
    let scenario = FaultScenario {
        faults,
        seed: config.seed,
    };
    let truth = inject(&model, &scenario).map_err(Error::Simulator)?;
    let obs = synthesize_observations(&truth, &model, Visibility::AllNics);
    let alarm = alarm_for_target(&model, &target);
    let report = diagnose(
        &bn,
        alarm.as_ref(),
        &obs,
        &DiagnoseOptions {
            tie_epsilon: 1e-6,
            top_k: None,
        },
    )
    .map_err(Error::Diagnosis)?;

    let top1 = report.element_ranking.first().map(|e| e.element_id.clone());
    let hit_top1 = report.top_tie_group() == [target.clone()];
    let hit_topk = report
        .element_ranking
        .iter()
        .take(config.top_k)
        .any(|e| e.element_id == target);
    Ok(TrialRecord {
        trial,
        topology: family,
        mode,
        n_hosts,
        fault_mode,
        target,
        top1,
        hit_top1,
        hit_topk,
        error: None,
    })
}

// --- Build benchmark ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub kinds: Vec<TopologyFamily>,
    /// Target element counts; each is mapped to the largest realizable
    /// topology with at most that many elements.
    pub element_counts: Vec<u32>,
    pub repetitions: u32,
    pub profile: TemplateProfile,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            kinds: vec![TopologyFamily::Linear, TopologyFamily::Tree],
            element_counts: vec![15, 50, 125, 250, 375, 500],
            repetitions: 20,
            profile: TemplateProfile::TableCompat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub topology: TopologyFamily,
    pub n_hosts: u32,
    pub n_elements: usize,
    pub n_vertices: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub repetitions: u32,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("topology,n_hosts,n_elements,n_vertices,mean_ms,min_ms,max_ms\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{},{},{},{:.3},{:.3},{:.3}\n",
                r.topology, r.n_hosts, r.n_elements, r.n_vertices, r.mean_ms, r.min_ms, r.max_ms
            ));
        }
        out
    }
}

/// Largest host count whose generated topology stays at or under the
/// element budget. Linear: 5 hosts-worth of elements per host; binary
/// tree: 5n - 3 elements with n a power of two.
fn hosts_for_elements(family: TopologyFamily, elements: u32) -> Result<u32> {
    match family {
        TopologyFamily::Linear => Ok((elements / 5).max(1)),
        TopologyFamily::Tree => {
            let mut n = 2u32;
            while 5 * (n * 2) - 3 <= elements {
                n *= 2;
            }
            Ok(n)
        }
        other => Err(SimulatorError::Config(format!(
            "benchmark supports linear and tree shapes, not {other:?}"
        ))),
    }
}

/// Times `build_model` over the configured sizes; sizes are emitted in
/// ascending element order per topology.
pub fn benchmark_build(config: &BenchConfig) -> Result<BenchReport, Error> {
    if config.repetitions == 0 {
        return Err(Error::Simulator(SimulatorError::Config(
            "repetitions must be >= 1".into(),
        )));
    }
    let mut rows = Vec::new();
    for &family in &config.kinds {
        let mut counts = config.element_counts.clone();
        counts.sort_unstable();
        let mut done = std::collections::BTreeSet::new();
        for target in counts {
            let n_hosts = hosts_for_elements(family, target).map_err(Error::Simulator)?;
            if !done.insert(n_hosts) {
                continue;
            }
            let kind = family.kind_for_hosts(n_hosts).map_err(Error::Simulator)?;
            let (descriptor, links) = generate_topology(kind, n_hosts, ControlMode::OutOfBand)?;
            let n_elements = descriptor.elements.len();
            let mut samples = Vec::with_capacity(config.repetitions as usize);
            let mut n_vertices = 0;
            for _ in 0..config.repetitions {
                let start = Instant::now();
                let model = build_model(&descriptor, &links, config.profile)?;
                samples.push(start.elapsed().as_secs_f64() * 1e3);
                n_vertices = model.vertex_count();
            }
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
            let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rows.push(BenchRow {
                topology: family,
                n_hosts,
                n_elements,
                n_vertices,
                mean_ms: mean,
                min_ms: min,
                max_ms: max,
            });
        }
    }
    Ok(BenchReport {
        repetitions: config.repetitions,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::TopologyKind;

    fn fig7_model() -> DependencyGraph {
        let (desc, links) =
            generate_topology(TopologyKind::Linear, 2, ControlMode::OutOfBand).unwrap();
        build_model(&desc, &links, TemplateProfile::DegreeAdaptive).unwrap()
    }

    #[test]
    fn controller_shutdown_marks_its_vertices_only() {
        let model = fig7_model();
        let scenario = FaultScenario {
            faults: vec![Fault {
                target: "C_1".into(),
                mode: FaultMode::NodeShutdown,
            }],
            seed: 0,
        };
        let truth = inject(&model, &scenario).unwrap();
        // controller in fig. 7 (degree-adaptive): CPU + 2 cards + 3 lifecycle
        assert_eq!(truth.vertex_states.len(), 6);
        assert!(truth.vertex_states.keys().all(|l| l.starts_with("C_1.")));
        // the control-link-facing switch cards stay up
        assert!(!truth.vertex_states.contains_key("MS_1.NC_1"));
        assert!(!truth.vertex_states.contains_key("MS_2.NC_1"));
    }

    #[test]
    fn triple_cut_marks_three_states_and_six_cards() {
        let model = fig7_model();
        let scenario = FaultScenario {
            faults: ["CL_1", "AL_1", "AL_2"]
                .iter()
                .map(|t| Fault {
                    target: t.to_string(),
                    mode: FaultMode::LinkCut,
                })
                .collect(),
            seed: 0,
        };
        let truth = inject(&model, &scenario).unwrap();
        assert_eq!(truth.vertex_states.len(), 9);
        let cards = truth
            .vertex_states
            .keys()
            .filter(|l| l.contains(".NC_"))
            .count();
        assert_eq!(cards, 6);
    }

    #[test]
    fn empty_fault_list_leaves_everything_up() {
        let model = fig7_model();
        let truth = inject(&model, &FaultScenario { faults: vec![], seed: 0 }).unwrap();
        assert!(truth.vertex_states.is_empty());
        assert!(truth.cpu_loads.is_empty());
    }

    #[test]
    fn unknown_and_duplicate_targets_rejected() {
        let model = fig7_model();
        let unknown = FaultScenario {
            faults: vec![Fault {
                target: "GHOST_9".into(),
                mode: FaultMode::NodeShutdown,
            }],
            seed: 0,
        };
        assert!(matches!(
            inject(&model, &unknown),
            Err(SimulatorError::UnknownTarget(_))
        ));
        let duplicate = FaultScenario {
            faults: vec![
                Fault {
                    target: "H_1".into(),
                    mode: FaultMode::NodeShutdown,
                },
                Fault {
                    target: "H_1".into(),
                    mode: FaultMode::CpuLoad(0.5),
                },
            ],
            seed: 0,
        };
        assert!(matches!(
            inject(&model, &duplicate),
            Err(SimulatorError::DuplicateTarget(_))
        ));
    }

    #[test]
    fn injection_soundness_only_forced_vertices_go_down() {
        let model = fig7_model();
        let scenario = FaultScenario {
            faults: vec![
                Fault {
                    target: "MS_1".into(),
                    mode: FaultMode::NodeShutdown,
                },
                Fault {
                    target: "AL_2".into(),
                    mode: FaultMode::LinkCut,
                },
            ],
            seed: 0,
        };
        let truth = inject(&model, &scenario).unwrap();
        for label in truth.vertex_states.keys() {
            let idx = model.index_of(label).unwrap();
            let v = &model.vertices[idx];
            let forced_by_shutdown = v.owner_element == "MS_1";
            let forced_by_cut = v.owner_element == "AL_2"
                || model.edges.iter().any(|e| {
                    e.class == EdgeClass::Inter
                        && e.to == idx
                        && model.vertices[e.from].owner_element == "AL_2"
                });
            assert!(forced_by_shutdown || forced_by_cut, "{label} not forced");
        }
    }

    #[test]
    fn all_nics_visibility_reports_every_card() {
        let model = fig7_model();
        let scenario = FaultScenario {
            faults: vec![Fault {
                target: "AL_1".into(),
                mode: FaultMode::LinkCut,
            }],
            seed: 0,
        };
        let truth = inject(&model, &scenario).unwrap();
        let obs = synthesize_observations(&truth, &model, Visibility::AllNics);
        let total_cards = model
            .vertices
            .iter()
            .filter(|v| v.kind == VertexKind::NetworkCard)
            .count();
        assert_eq!(obs.nic_states.len(), total_cards);
        let down = obs
            .nic_states
            .values()
            .filter(|s| **s == VertexState::Down)
            .count();
        assert_eq!(down, 2);
    }

    #[test]
    fn sampled_visibility_limits() {
        let model = fig7_model();
        let truth = inject(&model, &FaultScenario { faults: vec![], seed: 0 }).unwrap();
        let none = synthesize_observations(
            &truth,
            &model,
            Visibility::Sampled { fraction: 0.0, seed: 5 },
        );
        assert!(none.nic_states.is_empty());
        let all = synthesize_observations(
            &truth,
            &model,
            Visibility::Sampled { fraction: 1.0, seed: 5 },
        );
        let full = synthesize_observations(&truth, &model, Visibility::AllNics);
        assert_eq!(all, full);
    }

    #[test]
    fn campaign_is_seed_reproducible() {
        let config = CampaignConfig {
            topologies: vec![TopologyFamily::Linear, TopologyFamily::Star],
            modes: vec![ControlMode::OutOfBand],
            sizes: vec![3],
            trials: 8,
            seed: 42,
            ..CampaignConfig::default()
        };
        let a = run_campaign(&config).unwrap();
        let b = run_campaign(&config).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.trials, 8);
        assert_eq!(a.completed, 8);
    }

    #[test]
    fn zero_trials_has_no_accuracy() {
        let config = CampaignConfig {
            trials: 0,
            ..CampaignConfig::default()
        };
        let report = run_campaign(&config).unwrap();
        assert_eq!(report.top1_accuracy, None);
        assert!(report.records.is_empty());
    }

    #[test]
    fn case_1_and_case_2_as_a_two_trial_campaign() {
        // Both canonical cases replayed through the campaign plumbing.
        let model = fig7_model();
        let bn = attach_parameters(&model, &PriorConfig::default()).unwrap();

        let shutdown = FaultScenario {
            faults: vec![Fault {
                target: "C_1".into(),
                mode: FaultMode::NodeShutdown,
            }],
            seed: 1,
        };
        let truth = inject(&model, &shutdown).unwrap();
        let obs = synthesize_observations(&truth, &model, Visibility::AllNics);
        let report = diagnose(
            &bn,
            Some(&ServiceAlarm::infrastructure()),
            &obs,
            &DiagnoseOptions::default(),
        )
        .unwrap();
        assert_eq!(report.top_tie_group(), ["C_1".to_string()]);

        let cuts = FaultScenario {
            faults: ["CL_1", "AL_1", "AL_2"]
                .iter()
                .map(|t| Fault {
                    target: t.to_string(),
                    mode: FaultMode::LinkCut,
                })
                .collect(),
            seed: 2,
        };
        let truth = inject(&model, &cuts).unwrap();
        let mut obs = synthesize_observations(&truth, &model, Visibility::AllNics);
        for v in &model.vertices {
            if v.kind == VertexKind::Cpu {
                obs.cpu_utilization.insert(v.label.clone(), 0.0);
            }
        }
        let report = diagnose(&bn, None, &obs, &DiagnoseOptions::default()).unwrap();
        let mut top = report.top_tie_group().to_vec();
        top.sort();
        assert_eq!(top, ["AL_1", "AL_2", "CL_1"]);
    }

    #[test]
    fn bench_single_repetition_collapses_stats() {
        let config = BenchConfig {
            kinds: vec![TopologyFamily::Linear],
            element_counts: vec![15],
            repetitions: 1,
            profile: TemplateProfile::TableCompat,
        };
        let report = benchmark_build(&config).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!(row.n_elements, 15);
        assert_eq!(row.mean_ms, row.min_ms);
        assert_eq!(row.mean_ms, row.max_ms);
    }

    #[test]
    fn bench_sizes_are_sorted_and_realizable() {
        let config = BenchConfig {
            kinds: vec![TopologyFamily::Linear, TopologyFamily::Tree],
            element_counts: vec![125, 15, 50],
            repetitions: 2,
            profile: TemplateProfile::TableCompat,
        };
        let report = benchmark_build(&config).unwrap();
        for pair in report.rows.windows(2) {
            if pair[0].topology == pair[1].topology {
                assert!(pair[0].n_elements < pair[1].n_elements);
            }
        }
        let csv = report.to_csv();
        assert!(csv.starts_with("topology,n_hosts,n_elements"));
    }
}
