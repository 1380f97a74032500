//! Per-element-type dependency templates and their instantiation.
//!
//! A node template holds one CPU vertex, a profile-dependent number of
//! network cards, and the VNF lifecycle vertices (process, configuration,
//! active state). A link template is a single link-state vertex. The CPU
//! underpins every card and both logical prerequisites; the active state
//! depends on the process and the configuration:
//!
//! ```text
//!   CPU -> NC_1 .. NC_n        (physical)
//!   CPU -> VNF_1 -> ACT_1      (initiated  -> activated)
//!   CPU -> CFG_1 -> ACT_1      (configured -> activated)
//! ```
//!
//! Instantiating a template for a concrete element yields a
//! [`GraphFragment`] whose vertex labels embed the element id, e.g.
//! `MS_1.NC_2`.

use serde::{Deserialize, Serialize};

use crate::error::TemplateError;
use crate::topology::{ElementType, LinkDescriptor, NetworkDescriptor, TopologyKind};

type Result<T> = std::result::Result<T, TemplateError>;

// --- Vertex taxonomy -----------------------------------------------------------

/// Model layer a vertex belongs to. The logical tags follow the VNF
/// lifecycle order: initiated < configured < activated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerTag {
    Physical,
    LogicalInitiated,
    LogicalConfigured,
    LogicalActivated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    Cpu,
    NetworkCard,
    VnfProcess,
    VnfConfig,
    VnfActive,
    LinkState,
    /// Synthesized end-to-end service vertex; never emitted by templates.
    Service,
}

impl VertexKind {
    pub fn layer(self) -> LayerTag {
        match self {
            VertexKind::Cpu | VertexKind::NetworkCard | VertexKind::LinkState => LayerTag::Physical,
            VertexKind::VnfProcess => LayerTag::LogicalInitiated,
            VertexKind::VnfConfig => LayerTag::LogicalConfigured,
            VertexKind::VnfActive | VertexKind::Service => LayerTag::LogicalActivated,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            VertexKind::Cpu => "CPU",
            VertexKind::NetworkCard => "NC",
            VertexKind::VnfProcess => "VNF",
            VertexKind::VnfConfig => "CFG",
            VertexKind::VnfActive => "ACT",
            VertexKind::LinkState => "LNK",
            VertexKind::Service => "SVC",
        }
    }
}

/// One vertex slot of a template, before instantiation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub local_index: usize,
    pub kind: VertexKind,
    pub layer: LayerTag,
    /// Suffix of the instantiated label, e.g. `NC_2`; the owner element id
    /// is prefixed at instantiation time.
    pub label_pattern: String,
}

impl VertexSpec {
    fn new(local_index: usize, kind: VertexKind, ordinal: usize) -> VertexSpec {
        VertexSpec {
            local_index,
            kind,
            layer: kind.layer(),
            label_pattern: format!("{}_{}", kind.code(), ordinal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTemplate {
    pub element_type: ElementType,
    pub vertices: Vec<VertexSpec>,
    /// Intra-template dependency edges over local indices.
    pub intra_edges: Vec<(usize, usize)>,
    pub nic_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkTemplate {
    pub element_type: ElementType,
    pub vertex: VertexSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Template {
    Node(NodeTemplate),
    Link(LinkTemplate),
}

impl Template {
    pub fn vertex_count(&self) -> usize {
        match self {
            Template::Node(t) => t.vertices.len(),
            Template::Link(_) => 1,
        }
    }
}

// --- Profiles -------------------------------------------------------------------

/// How network-card counts are chosen when instantiating node templates.
///
/// `TableCompat` pins per-type counts (host 2, switch 4, controller 1) so
/// template totals come out at 6/8/5/1 vertices for host/switch/controller/
/// link. `DegreeAdaptive` gives each node one card per incident link, which
/// matches what a real topology reports and is the mode diagnosis runs in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateProfile {
    TableCompat,
    #[default]
    DegreeAdaptive,
}

impl std::str::FromStr for TemplateProfile {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table-compat" => Ok(TemplateProfile::TableCompat),
            "degree-adaptive" => Ok(TemplateProfile::DegreeAdaptive),
            other => Err(TemplateError::Missing(format!(
                "unknown profile {other:?} (expected table-compat or degree-adaptive)"
            ))),
        }
    }
}

impl TemplateProfile {
    fn nic_count(self, element_type: ElementType, degree: u32) -> u32 {
        match self {
            TemplateProfile::TableCompat => match element_type {
                ElementType::Host => 2,
                ElementType::MasterSwitch | ElementType::SlaveSwitch => 4,
                ElementType::Controller => 1,
                _ => 0,
            },
            TemplateProfile::DegreeAdaptive => degree,
        }
    }
}

// --- Instantiation ---------------------------------------------------------------

/// An instantiated vertex with its global label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentVertex {
    pub label: String,
    pub kind: VertexKind,
    pub layer: LayerTag,
}

/// The dependency graph of one concrete element: instantiated vertices and
/// the intra-element edges among them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFragment {
    pub owner_element: String,
    pub vertices: Vec<FragmentVertex>,
    pub edges: Vec<(usize, usize)>,
}

/// Builds the template for one element type under the given profile.
///
/// `degree` is the element's incident link count; it is only consulted in
/// degree-adaptive mode.
pub fn template_for(
    element_type: ElementType,
    profile: TemplateProfile,
    degree: u32,
) -> Result<Template> {
    if element_type.is_link() {
        return Ok(Template::Link(LinkTemplate {
            element_type,
            vertex: VertexSpec::new(0, VertexKind::LinkState, 1),
        }));
    }
    let nic_count = profile.nic_count(element_type, degree);
    if profile == TemplateProfile::DegreeAdaptive && nic_count == 0 {
        return Err(TemplateError::IsolatedNode {
            element: format!("{element_type:?}"),
        });
    }

    let mut vertices = vec![VertexSpec::new(0, VertexKind::Cpu, 1)];
    let mut edges = Vec::new();
    for k in 0..nic_count as usize {
        vertices.push(VertexSpec::new(1 + k, VertexKind::NetworkCard, k + 1));
        edges.push((0, 1 + k));
    }
    let vnf = vertices.len();
    vertices.push(VertexSpec::new(vnf, VertexKind::VnfProcess, 1));
    vertices.push(VertexSpec::new(vnf + 1, VertexKind::VnfConfig, 1));
    vertices.push(VertexSpec::new(vnf + 2, VertexKind::VnfActive, 1));
    edges.push((0, vnf)); // CPU -> process
    edges.push((0, vnf + 1)); // CPU -> config
    edges.push((vnf, vnf + 2)); // process -> active
    edges.push((vnf + 1, vnf + 2)); // config -> active

    Ok(Template::Node(NodeTemplate {
        element_type,
        vertices,
        intra_edges: edges,
        nic_count,
    }))
}

/// Instantiates one fragment per descriptor element, in descriptor order.
pub fn instantiate_all(
    descriptor: &NetworkDescriptor,
    links: &LinkDescriptor,
    profile: TemplateProfile,
) -> Result<Vec<GraphFragment>> {
    descriptor
        .elements
        .iter()
        .map(|e| {
            let degree = links.degree(&e.element_id) as u32;
            let template = template_for(e.element_type, profile, degree).map_err(|err| {
                match err {
                    TemplateError::IsolatedNode { .. } => TemplateError::IsolatedNode {
                        element: e.element_id.clone(),
                    },
                    other => other,
                }
            })?;
            Ok(instantiate(&template, &e.element_id))
        })
        .collect()
}

fn instantiate(template: &Template, owner: &str) -> GraphFragment {
    match template {
        Template::Link(t) => GraphFragment {
            owner_element: owner.to_string(),
            vertices: vec![FragmentVertex {
                label: format!("{owner}.{}", t.vertex.label_pattern),
                kind: t.vertex.kind,
                layer: t.vertex.layer,
            }],
            edges: Vec::new(),
        },
        Template::Node(t) => GraphFragment {
            owner_element: owner.to_string(),
            vertices: t
                .vertices
                .iter()
                .map(|v| FragmentVertex {
                    label: format!("{owner}.{}", v.label_pattern),
                    kind: v.kind,
                    layer: v.layer,
                })
                .collect(),
            edges: t.intra_edges.clone(),
        },
    }
}

/// Closed-form vertex count of a generated out-of-band topology under the
/// table-compat profile: `4 + 10*N_SWITCHES + 7*N_HOSTS`, with `N_SWITCHES
/// = N_HOSTS` for linear shapes and `N_SWITCHES = N_HOSTS - 1` for binary
/// trees with hosts two per leaf.
pub fn expected_vertex_count(kind: TopologyKind, n_hosts: u32) -> Result<u64> {
    let n_hosts = n_hosts as u64;
    match kind {
        TopologyKind::Linear => Ok(4 + 17 * n_hosts),
        TopologyKind::Tree { fanout: 2, .. } => Ok(17 * n_hosts - 6),
        other => Err(TemplateError::UnsupportedKind(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_topology, ControlMode};

    #[test]
    fn table_compat_vertex_totals() {
        let cases = [
            (ElementType::Host, 6),
            (ElementType::MasterSwitch, 8),
            (ElementType::SlaveSwitch, 8),
            (ElementType::Controller, 5),
        ];
        for (t, expected) in cases {
            let template = template_for(t, TemplateProfile::TableCompat, 0).unwrap();
            assert_eq!(template.vertex_count(), expected, "{t:?}");
        }
        let link = template_for(ElementType::AccessLink, TemplateProfile::TableCompat, 0).unwrap();
        assert_eq!(link.vertex_count(), 1);
    }

    #[test]
    fn degree_adaptive_controller_with_two_cards() {
        let t = template_for(ElementType::Controller, TemplateProfile::DegreeAdaptive, 2).unwrap();
        match &t {
            Template::Node(n) => assert_eq!(n.nic_count, 2),
            _ => panic!("controller is a node"),
        }
        assert_eq!(t.vertex_count(), 6);
    }

    #[test]
    fn degree_adaptive_rejects_isolated_nodes() {
        let err =
            template_for(ElementType::Host, TemplateProfile::DegreeAdaptive, 0).unwrap_err();
        assert!(matches!(err, TemplateError::IsolatedNode { .. }));
    }

    #[test]
    fn identical_inputs_yield_identical_templates() {
        let a = template_for(ElementType::MasterSwitch, TemplateProfile::TableCompat, 3).unwrap();
        let b = template_for(ElementType::MasterSwitch, TemplateProfile::TableCompat, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fig5a_fragment_totals() {
        let (desc, links) = generate_topology(TopologyKind::Linear, 2, ControlMode::OutOfBand).unwrap();
        let fragments = instantiate_all(&desc, &links, TemplateProfile::TableCompat).unwrap();
        assert_eq!(fragments.len(), 10);
        let total: usize = fragments.iter().map(|f| f.vertices.len()).sum();
        assert_eq!(total, 38); // 5 + 2*8 + 2*6 + 5*1
    }

    #[test]
    fn empty_descriptor_gives_empty_fragment_list() {
        let desc = NetworkDescriptor {
            elements: vec![],
            snapshot_instant: 0,
            control_mode: ControlMode::OutOfBand,
        };
        let fragments =
            instantiate_all(&desc, &LinkDescriptor::default(), TemplateProfile::TableCompat)
                .unwrap();
        assert!(fragments.is_empty());
    }

    #[test]
    fn linear_4_table_compat_totals_72() {
        let (desc, links) = generate_topology(TopologyKind::Linear, 4, ControlMode::OutOfBand).unwrap();
        let fragments = instantiate_all(&desc, &links, TemplateProfile::TableCompat).unwrap();
        let total: usize = fragments.iter().map(|f| f.vertices.len()).sum();
        assert_eq!(total, 72);
        assert_eq!(total as u64, expected_vertex_count(TopologyKind::Linear, 4).unwrap());
    }

    #[test]
    fn closed_form_matches_brute_force_instantiation() {
        for n in [1u32, 2, 3, 5, 8, 13, 64] {
            let (desc, links) =
                generate_topology(TopologyKind::Linear, n, ControlMode::OutOfBand).unwrap();
            let fragments = instantiate_all(&desc, &links, TemplateProfile::TableCompat).unwrap();
            let total: u64 = fragments.iter().map(|f| f.vertices.len() as u64).sum();
            assert_eq!(total, expected_vertex_count(TopologyKind::Linear, n).unwrap());
        }
        for n in [2u32, 4, 8, 16] {
            let kind = TopologyKind::binary_tree_for_hosts(n).unwrap();
            let (desc, links) = generate_topology(kind, n, ControlMode::OutOfBand).unwrap();
            let fragments = instantiate_all(&desc, &links, TemplateProfile::TableCompat).unwrap();
            let total: u64 = fragments.iter().map(|f| f.vertices.len() as u64).sum();
            assert_eq!(total, expected_vertex_count(kind, n).unwrap());
        }
    }

    #[test]
    fn unsupported_kind_for_closed_form() {
        assert!(expected_vertex_count(TopologyKind::Ring, 4).is_err());
        assert!(expected_vertex_count(TopologyKind::Star, 4).is_err());
    }

    #[test]
    fn fragments_are_dags_with_active_reachable_from_cpu() {
        let (desc, links) = generate_topology(TopologyKind::Linear, 3, ControlMode::OutOfBand).unwrap();
        for f in instantiate_all(&desc, &links, TemplateProfile::DegreeAdaptive).unwrap() {
            // every edge goes low -> high local index, so the fragment is a DAG
            assert!(f.edges.iter().all(|(a, b)| a < b));
            if f.vertices.len() == 1 {
                assert!(f.edges.is_empty());
                assert_eq!(f.vertices[0].kind, VertexKind::LinkState);
                continue;
            }
            // active state reachable from the CPU through the logical layer
            let cpu = f.vertices.iter().position(|v| v.kind == VertexKind::Cpu).unwrap();
            let active = f.vertices.iter().position(|v| v.kind == VertexKind::VnfActive).unwrap();
            let mut reach = vec![false; f.vertices.len()];
            reach[cpu] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for (a, b) in &f.edges {
                    if reach[*a] && !reach[*b] {
                        reach[*b] = true;
                        changed = true;
                    }
                }
            }
            assert!(reach[active]);
            // labels embed the owner element
            for v in &f.vertices {
                assert!(v.label.starts_with(&format!("{}.", f.owner_element)));
            }
        }
    }

    #[test]
    fn instantiation_is_order_stable() {
        let (desc, links) = generate_topology(TopologyKind::Ring, 4, ControlMode::InBand).unwrap();
        let fragments = instantiate_all(&desc, &links, TemplateProfile::DegreeAdaptive).unwrap();
        let owners: Vec<&str> = fragments.iter().map(|f| f.owner_element.as_str()).collect();
        let expected: Vec<&str> = desc.elements.iter().map(|e| e.element_id.as_str()).collect();
        assert_eq!(owners, expected);
    }
}
