//! Topology ingestion and classification.
//!
//! Raw controller dumps come in dialect-specific JSON layouts (see
//! `docs/formats.md` for the exact schemas). [`parse_dialect`] normalizes
//! them into a [`RawTopology`]; [`classify`] turns that into the
//! [`NetworkDescriptor`] / [`LinkDescriptor`] pair that drives model
//! building; [`generate_topology`] produces synthetic topologies for the
//! simulator and benchmarks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::TopologyError;

type Result<T> = std::result::Result<T, TopologyError>;

// --- Raw topology ------------------------------------------------------------

/// Input layout of a topology document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dialect {
    /// This crate's own fixture layout.
    Native,
    /// Separate `switches`/`hosts`/`links` arrays with DPID-style ids.
    FloodlightStyle,
    /// Single `network-topology` node/link nesting.
    OpendaylightStyle,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dialect::Native => "native",
            Dialect::FloodlightStyle => "floodlight-style",
            Dialect::OpendaylightStyle => "opendaylight-style",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Dialect {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(Dialect::Native),
            "floodlight" | "floodlight-style" => Ok(Dialect::FloodlightStyle),
            "opendaylight" | "opendaylight-style" | "odl" => Ok(Dialect::OpendaylightStyle),
            other => Err(TopologyError::InvalidParameter(format!(
                "unknown dialect {other:?} (expected native, floodlight or opendaylight)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawNode {
    pub raw_id: String,
    pub kind_hint: Option<KindHint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindHint {
    Switch,
    Host,
    Controller,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLink {
    pub raw_id: String,
    pub endpoint_a: String,
    pub endpoint_b: String,
}

/// Normalized snapshot of a controller topology dump, before classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTopology {
    pub nodes: Vec<RawNode>,
    pub links: Vec<RawLink>,
    pub source_dialect: Dialect,
    pub controller_id: String,
}

impl RawTopology {
    /// Checks id uniqueness and link endpoint referential integrity.
    pub fn validate(&self) -> Result<()> {
        let mut node_ids = BTreeSet::new();
        for n in &self.nodes {
            if !node_ids.insert(n.raw_id.as_str()) {
                return Err(TopologyError::DuplicateId {
                    what: "node",
                    id: n.raw_id.clone(),
                });
            }
        }
        let mut link_ids = BTreeSet::new();
        for l in &self.links {
            if !link_ids.insert(l.raw_id.as_str()) {
                return Err(TopologyError::DuplicateId {
                    what: "link",
                    id: l.raw_id.clone(),
                });
            }
            for ep in [&l.endpoint_a, &l.endpoint_b] {
                if !node_ids.contains(ep.as_str()) {
                    return Err(TopologyError::DanglingEndpoint {
                        link: l.raw_id.clone(),
                        endpoint: ep.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

// --- Classified descriptor ----------------------------------------------------

/// The seven element categories every network element falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementType {
    Controller,
    MasterSwitch,
    SlaveSwitch,
    Host,
    ControlLink,
    AccessLink,
    InterSwitchLink,
}

impl ElementType {
    pub const ALL: [ElementType; 7] = [
        ElementType::Controller,
        ElementType::MasterSwitch,
        ElementType::SlaveSwitch,
        ElementType::Host,
        ElementType::ControlLink,
        ElementType::AccessLink,
        ElementType::InterSwitchLink,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            ElementType::Controller => "C",
            ElementType::MasterSwitch => "MS",
            ElementType::SlaveSwitch => "SS",
            ElementType::Host => "H",
            ElementType::ControlLink => "CL",
            ElementType::AccessLink => "AL",
            ElementType::InterSwitchLink => "IL",
        }
    }

    pub fn is_link(self) -> bool {
        matches!(
            self,
            ElementType::ControlLink | ElementType::AccessLink | ElementType::InterSwitchLink
        )
    }

    pub fn is_node(self) -> bool {
        !self.is_link()
    }

    pub fn is_switch(self) -> bool {
        matches!(self, ElementType::MasterSwitch | ElementType::SlaveSwitch)
    }

    /// Recovers the type from a normalized element id such as `MS_2`.
    pub fn from_element_id(id: &str) -> Option<ElementType> {
        let prefix = id.split('_').next()?;
        ElementType::ALL.into_iter().find(|t| t.prefix() == prefix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMode {
    OutOfBand,
    InBand,
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlMode::OutOfBand => f.write_str("out-of-band"),
            ControlMode::InBand => f.write_str("in-band"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    /// Normalized id, e.g. `MS_1`.
    pub element_id: String,
    pub raw_id: String,
    #[serde(rename = "type")]
    pub element_type: ElementType,
}

/// Classified list of network elements at a snapshot instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDescriptor {
    pub elements: Vec<Element>,
    /// Nanoseconds of a process-monotonic clock; 0 for generated topologies.
    pub snapshot_instant: u64,
    pub control_mode: ControlMode,
}

impl NetworkDescriptor {
    pub fn element(&self, element_id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.element_id == element_id)
    }

    pub fn of_type(&self, t: ElementType) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(move |e| e.element_type == t)
    }

    pub fn count(&self, t: ElementType) -> usize {
        self.of_type(t).count()
    }

    pub fn switches(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| e.element_type.is_switch())
    }

    /// Multiset of element types, keyed by type, for identity checks.
    pub fn type_counts(&self) -> BTreeMap<ElementType, usize> {
        let mut m = BTreeMap::new();
        for e in &self.elements {
            *m.entry(e.element_type).or_insert(0) += 1;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEntry {
    pub link_id: String,
    pub endpoint_a: String,
    pub endpoint_b: String,
}

/// Endpoints of every link element, keyed by normalized link id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkDescriptor {
    pub entries: Vec<LinkEntry>,
}

impl LinkDescriptor {
    pub fn entry(&self, link_id: &str) -> Option<&LinkEntry> {
        self.entries.iter().find(|e| e.link_id == link_id)
    }

    /// Number of link entries incident to the given node element.
    pub fn degree(&self, element_id: &str) -> usize {
        self.entries
            .iter()
            .filter(|e| e.endpoint_a == element_id || e.endpoint_b == element_id)
            .count()
    }

    pub fn incident<'a>(&'a self, element_id: &'a str) -> impl Iterator<Item = &'a LinkEntry> + 'a {
        self.entries
            .iter()
            .filter(move |e| e.endpoint_a == element_id || e.endpoint_b == element_id)
    }
}

/// Shape of a synthetic topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Linear,
    Tree { fanout: u32, depth: u32 },
    Ring,
    Star,
}

impl TopologyKind {
    /// Binary tree sized so that `n_hosts` hosts sit two per leaf switch,
    /// giving `n_switches = n_hosts - 1`. `n_hosts` must be a power of two.
    pub fn binary_tree_for_hosts(n_hosts: u32) -> Result<TopologyKind> {
        if n_hosts < 2 || !n_hosts.is_power_of_two() {
            return Err(TopologyError::InvalidParameter(format!(
                "binary tree sizing requires a power-of-two host count >= 2, got {n_hosts}"
            )));
        }
        Ok(TopologyKind::Tree {
            fanout: 2,
            depth: n_hosts.trailing_zeros(),
        })
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyKind::Linear => f.write_str("linear"),
            TopologyKind::Tree { fanout, depth } => write!(f, "tree({fanout},{depth})"),
            TopologyKind::Ring => f.write_str("ring"),
            TopologyKind::Star => f.write_str("star"),
        }
    }
}

// --- Dialect parsing ----------------------------------------------------------

/// Parses a topology document in the declared dialect.
///
/// The controller is carried by the document itself in all three layouts;
/// callers may override it afterwards via [`RawTopology::controller_id`].
pub fn parse_dialect(bytes: &[u8], dialect: Dialect) -> Result<RawTopology> {
    let text = std::str::from_utf8(bytes).map_err(|e| TopologyError::Malformed {
        offset: e.valid_up_to(),
        line: 0,
        column: 0,
        message: "document is not UTF-8".into(),
    })?;
    let raw = match dialect {
        Dialect::Native => parse_native(text)?,
        Dialect::FloodlightStyle => parse_floodlight(text)?,
        Dialect::OpendaylightStyle => parse_opendaylight(text)?,
    };
    raw.validate()?;
    if !raw.nodes.iter().any(|n| n.raw_id == raw.controller_id) {
        return Err(TopologyError::UnknownController(raw.controller_id));
    }
    Ok(raw)
}

fn json_error(text: &str, dialect: Dialect, err: serde_json::Error) -> TopologyError {
    let (line, column) = (err.line(), err.column());
    if err.is_syntax() || err.is_eof() {
        // byte offset of (line, column), both 1-based in serde_json
        let offset = text
            .lines()
            .take(line.saturating_sub(1))
            .map(|l| l.len() + 1)
            .sum::<usize>()
            + column.saturating_sub(1);
        TopologyError::Malformed {
            offset,
            line,
            column,
            message: err.to_string(),
        }
    } else {
        TopologyError::Dialect {
            dialect: dialect.to_string(),
            detail: err.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct NativeDoc {
    controller: String,
    nodes: Vec<NativeNode>,
    links: Vec<NativeLink>,
}

#[derive(Deserialize)]
struct NativeNode {
    id: String,
    kind: KindHint,
}

#[derive(Deserialize)]
struct NativeLink {
    id: String,
    a: String,
    b: String,
}

fn parse_native(text: &str) -> Result<RawTopology> {
    let doc: NativeDoc =
        serde_json::from_str(text).map_err(|e| json_error(text, Dialect::Native, e))?;
    let mut nodes = vec![RawNode {
        raw_id: doc.controller.clone(),
        kind_hint: Some(KindHint::Controller),
    }];
    nodes.extend(doc.nodes.into_iter().map(|n| RawNode {
        raw_id: n.id,
        kind_hint: Some(n.kind),
    }));
    let links = doc
        .links
        .into_iter()
        .map(|l| RawLink {
            raw_id: l.id,
            endpoint_a: l.a,
            endpoint_b: l.b,
        })
        .collect();
    Ok(RawTopology {
        nodes,
        links,
        source_dialect: Dialect::Native,
        controller_id: doc.controller,
    })
}

#[derive(Deserialize)]
struct FloodlightDoc {
    controller: FloodlightController,
    switches: Vec<FloodlightSwitch>,
    hosts: Vec<FloodlightHost>,
    links: Vec<FloodlightLink>,
}

#[derive(Deserialize)]
struct FloodlightController {
    id: String,
    #[serde(rename = "controlLinks")]
    control_links: Vec<FloodlightControlLink>,
}

#[derive(Deserialize)]
struct FloodlightControlLink {
    id: String,
    switch: String,
}

#[derive(Deserialize)]
struct FloodlightSwitch {
    dpid: String,
}

#[derive(Deserialize)]
struct FloodlightHost {
    mac: String,
    #[serde(rename = "attachmentPoint")]
    attachment_point: FloodlightAttachment,
}

#[derive(Deserialize)]
struct FloodlightAttachment {
    switch: String,
    link: String,
}

#[derive(Deserialize)]
struct FloodlightLink {
    id: String,
    #[serde(rename = "src-switch")]
    src_switch: String,
    #[serde(rename = "dst-switch")]
    dst_switch: String,
}

fn parse_floodlight(text: &str) -> Result<RawTopology> {
    let doc: FloodlightDoc =
        serde_json::from_str(text).map_err(|e| json_error(text, Dialect::FloodlightStyle, e))?;
    let mut nodes = vec![RawNode {
        raw_id: doc.controller.id.clone(),
        kind_hint: Some(KindHint::Controller),
    }];
    nodes.extend(doc.switches.into_iter().map(|s| RawNode {
        raw_id: s.dpid,
        kind_hint: Some(KindHint::Switch),
    }));
    let mut links = Vec::new();
    for cl in doc.controller.control_links {
        links.push(RawLink {
            raw_id: cl.id,
            endpoint_a: doc.controller.id.clone(),
            endpoint_b: cl.switch,
        });
    }
    for h in doc.hosts {
        nodes.push(RawNode {
            raw_id: h.mac.clone(),
            kind_hint: Some(KindHint::Host),
        });
        links.push(RawLink {
            raw_id: h.attachment_point.link,
            endpoint_a: h.mac,
            endpoint_b: h.attachment_point.switch,
        });
    }
    for l in doc.links {
        links.push(RawLink {
            raw_id: l.id,
            endpoint_a: l.src_switch,
            endpoint_b: l.dst_switch,
        });
    }
    let controller_id = doc.controller.id;
    Ok(RawTopology {
        nodes,
        links,
        source_dialect: Dialect::FloodlightStyle,
        controller_id,
    })
}

#[derive(Deserialize)]
struct OdlDoc {
    #[serde(rename = "network-topology")]
    network_topology: OdlNetworkTopology,
}

#[derive(Deserialize)]
struct OdlNetworkTopology {
    topology: Vec<OdlTopology>,
}

#[derive(Deserialize)]
struct OdlTopology {
    #[serde(rename = "node")]
    nodes: Vec<OdlNode>,
    #[serde(rename = "link", default)]
    links: Vec<OdlLink>,
}

#[derive(Deserialize)]
struct OdlNode {
    #[serde(rename = "node-id")]
    node_id: String,
}

#[derive(Deserialize)]
struct OdlLink {
    #[serde(rename = "link-id")]
    link_id: String,
    source: OdlLinkSource,
    destination: OdlLinkDest,
}

#[derive(Deserialize)]
struct OdlLinkSource {
    #[serde(rename = "source-node")]
    source_node: String,
}

#[derive(Deserialize)]
struct OdlLinkDest {
    #[serde(rename = "dest-node")]
    dest_node: String,
}

fn parse_opendaylight(text: &str) -> Result<RawTopology> {
    let doc: OdlDoc =
        serde_json::from_str(text).map_err(|e| json_error(text, Dialect::OpendaylightStyle, e))?;
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let mut controller_id = None;
    for topo in doc.network_topology.topology {
        for n in topo.nodes {
            let hint = match n.node_id.split(':').next() {
                Some("openflow") => Some(KindHint::Switch),
                Some("host") => Some(KindHint::Host),
                Some("controller") => Some(KindHint::Controller),
                _ => None,
            };
            if hint == Some(KindHint::Controller) {
                if controller_id.is_some() {
                    return Err(TopologyError::Unsupported(
                        "more than one controller node".into(),
                    ));
                }
                controller_id = Some(n.node_id.clone());
            }
            nodes.push(RawNode {
                raw_id: n.node_id,
                kind_hint: hint,
            });
        }
        for l in topo.links {
            links.push(RawLink {
                raw_id: l.link_id,
                endpoint_a: l.source.source_node,
                endpoint_b: l.destination.dest_node,
            });
        }
    }
    let controller_id = controller_id.ok_or_else(|| TopologyError::Dialect {
        dialect: Dialect::OpendaylightStyle.to_string(),
        detail: "no node-id with a controller: prefix".into(),
    })?;
    Ok(RawTopology {
        nodes,
        links,
        source_dialect: Dialect::OpendaylightStyle,
        controller_id,
    })
}

// --- Classification -----------------------------------------------------------

/// Classifies every element of a raw topology into the seven types and
/// assigns normalized ids (lexicographic raw id within each type).
///
/// The control mode is detected as part of classification and recorded in
/// the returned descriptor.
pub fn classify(raw: &RawTopology) -> Result<(NetworkDescriptor, LinkDescriptor)> {
    classify_at(raw, monotonic_nanos())
}

/// [`classify`] with an explicit snapshot instant (0 for generated
/// topologies, which keeps exported artifacts byte-reproducible).
pub fn classify_at(raw: &RawTopology, snapshot_instant: u64) -> Result<(NetworkDescriptor, LinkDescriptor)> {
    raw.validate()?;
    if !raw.nodes.iter().any(|n| n.raw_id == raw.controller_id) {
        return Err(TopologyError::UnknownController(raw.controller_id.clone()));
    }
    for n in &raw.nodes {
        if n.kind_hint == Some(KindHint::Controller) && n.raw_id != raw.controller_id {
            return Err(TopologyError::Unsupported(format!(
                "node {} is hinted as a second controller",
                n.raw_id
            )));
        }
    }

    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for n in &raw.nodes {
        adjacency.entry(n.raw_id.as_str()).or_default();
    }
    for l in &raw.links {
        adjacency
            .get_mut(l.endpoint_a.as_str())
            .expect("validated endpoint")
            .push(l.endpoint_b.as_str());
        adjacency
            .get_mut(l.endpoint_b.as_str())
            .expect("validated endpoint")
            .push(l.endpoint_a.as_str());
    }

    // Node classification. kind_hint wins; the fallback takes a degree-1
    // node attached to a switch for a host.
    #[derive(Clone, Copy, PartialEq)]
    enum NodeClass {
        Controller,
        Switch,
        Host,
        Unknown,
    }
    let mut classes: BTreeMap<&str, NodeClass> = BTreeMap::new();
    for n in &raw.nodes {
        let class = if n.raw_id == raw.controller_id {
            NodeClass::Controller
        } else {
            match n.kind_hint {
                Some(KindHint::Host) => NodeClass::Host,
                Some(KindHint::Switch) => NodeClass::Switch,
                _ => NodeClass::Unknown,
            }
        };
        classes.insert(n.raw_id.as_str(), class);
    }
    // First pass: unhinted nodes with degree != 1 are switches.
    for n in &raw.nodes {
        let degree = adjacency[n.raw_id.as_str()].len();
        if degree == 0 && n.raw_id != raw.controller_id {
            return Err(TopologyError::IsolatedNode(n.raw_id.clone()));
        }
        if classes[n.raw_id.as_str()] == NodeClass::Unknown && degree != 1 {
            classes.insert(n.raw_id.as_str(), NodeClass::Switch);
        }
    }
    // Second pass: remaining unknowns have degree 1; host iff the sole
    // neighbor is a switch.
    for n in &raw.nodes {
        if classes[n.raw_id.as_str()] != NodeClass::Unknown {
            continue;
        }
        let neighbor = adjacency[n.raw_id.as_str()][0];
        let class = if classes[neighbor] == NodeClass::Switch {
            NodeClass::Host
        } else {
            NodeClass::Switch
        };
        classes.insert(n.raw_id.as_str(), class);
    }

    // Master switches are the ones adjacent to the controller.
    let controller_neighbors: BTreeSet<&str> = adjacency[raw.controller_id.as_str()]
        .iter()
        .copied()
        .collect();

    let node_type = |raw_id: &str| -> ElementType {
        match classes[raw_id] {
            NodeClass::Controller => ElementType::Controller,
            NodeClass::Host => ElementType::Host,
            NodeClass::Switch | NodeClass::Unknown => {
                if controller_neighbors.contains(raw_id) {
                    ElementType::MasterSwitch
                } else {
                    ElementType::SlaveSwitch
                }
            }
        }
    };

    // Link classification: controller-incident first, then host-incident,
    // then switch-to-switch.
    let mut link_types: Vec<(ElementType, &RawLink)> = Vec::with_capacity(raw.links.len());
    for l in &raw.links {
        let ta = node_type(&l.endpoint_a);
        let tb = node_type(&l.endpoint_b);
        let t = if ta == ElementType::Controller || tb == ElementType::Controller {
            ElementType::ControlLink
        } else if ta == ElementType::Host && tb == ElementType::Host {
            return Err(TopologyError::HostToHostLink(l.raw_id.clone()));
        } else if ta == ElementType::Host || tb == ElementType::Host {
            ElementType::AccessLink
        } else {
            ElementType::InterSwitchLink
        };
        link_types.push((t, l));
    }

    // Normalized ids: per type, lexicographic raw id, counters from 1.
    let mut elements = Vec::with_capacity(raw.nodes.len() + raw.links.len());
    let mut normalized: BTreeMap<&str, String> = BTreeMap::new();
    for t in ElementType::ALL {
        let mut members: Vec<&str> = if t.is_link() {
            link_types
                .iter()
                .filter(|(lt, _)| *lt == t)
                .map(|(_, l)| l.raw_id.as_str())
                .collect()
        } else {
            raw.nodes
                .iter()
                .filter(|n| node_type(&n.raw_id) == t)
                .map(|n| n.raw_id.as_str())
                .collect()
        };
        members.sort_unstable();
        for (k, raw_id) in members.into_iter().enumerate() {
            let element_id = format!("{}_{}", t.prefix(), k + 1);
            normalized.insert(raw_id, element_id.clone());
            elements.push(Element {
                element_id,
                raw_id: raw_id.to_string(),
                element_type: t,
            });
        }
    }

    let entries = elements
        .iter()
        .filter(|e| e.element_type.is_link())
        .map(|e| {
            let l = raw
                .links
                .iter()
                .find(|l| l.raw_id == e.raw_id)
                .expect("link element came from raw.links");
            LinkEntry {
                link_id: e.element_id.clone(),
                endpoint_a: normalized[l.endpoint_a.as_str()].clone(),
                endpoint_b: normalized[l.endpoint_b.as_str()].clone(),
            }
        })
        .collect();
    let links = LinkDescriptor { entries };

    let mut descriptor = NetworkDescriptor {
        elements,
        snapshot_instant,
        control_mode: ControlMode::OutOfBand,
    };
    descriptor.control_mode = detect_control_mode(&descriptor, &links)?;
    Ok((descriptor, links))
}

/// Determines the SDN control mode from the classified topology.
///
/// Out-of-band iff every switch has a control link to the controller;
/// in-band iff exactly one does and the remaining switches reach it over
/// inter-switch links. Topologies without slave switches are canonically
/// out-of-band (the two modes coincide there).
pub fn detect_control_mode(
    descriptor: &NetworkDescriptor,
    links: &LinkDescriptor,
) -> Result<ControlMode> {
    let switches: Vec<&str> = descriptor
        .switches()
        .map(|e| e.element_id.as_str())
        .collect();
    if switches.is_empty() {
        return Ok(ControlMode::OutOfBand);
    }

    let mut controlled: BTreeSet<&str> = BTreeSet::new();
    for e in descriptor.of_type(ElementType::ControlLink) {
        let entry = links.entry(&e.element_id).expect("link has an entry");
        for ep in [&entry.endpoint_a, &entry.endpoint_b] {
            if let Some(sw) = switches.iter().find(|s| *s == ep) {
                controlled.insert(sw);
            }
        }
    }

    if controlled.is_empty() {
        return Err(TopologyError::NoControlPath {
            switches: switches.len(),
        });
    }
    if controlled.len() == switches.len() {
        return Ok(ControlMode::OutOfBand);
    }
    if controlled.len() > 1 {
        return Err(TopologyError::HybridControl {
            masters: controlled.len(),
            switches: switches.len(),
        });
    }

    // Exactly one master: every slave must reach it over inter-switch links.
    let master = *controlled.iter().next().expect("non-empty");
    let mut reached: BTreeSet<&str> = BTreeSet::new();
    reached.insert(master);
    let mut frontier = vec![master];
    while let Some(current) = frontier.pop() {
        for e in descriptor.of_type(ElementType::InterSwitchLink) {
            let entry = links.entry(&e.element_id).expect("link has an entry");
            let other = if entry.endpoint_a == current {
                entry.endpoint_b.as_str()
            } else if entry.endpoint_b == current {
                entry.endpoint_a.as_str()
            } else {
                continue;
            };
            if let Some(sw) = switches.iter().find(|s| **s == other) {
                if reached.insert(sw) {
                    frontier.push(sw);
                }
            }
        }
    }
    let unreachable: Vec<String> = switches
        .iter()
        .filter(|s| !reached.contains(**s))
        .map(|s| s.to_string())
        .collect();
    if !unreachable.is_empty() {
        return Err(TopologyError::PartitionedControl { unreachable });
    }
    Ok(ControlMode::InBand)
}

// --- Synthetic generation -------------------------------------------------------

/// Generates a synthetic topology of the given shape.
///
/// Hosts sit one per switch for linear and ring shapes, all on the single
/// switch for star, and evenly on the leaf switches for trees. Out-of-band
/// control gives every switch its own control link; in-band gives one to
/// the lowest-id switch. The output goes through [`classify`], so generated
/// descriptors obey every classification invariant by construction.
pub fn generate_topology(
    kind: TopologyKind,
    n_hosts: u32,
    mode: ControlMode,
) -> Result<(NetworkDescriptor, LinkDescriptor)> {
    if n_hosts == 0 {
        return Err(TopologyError::InvalidParameter(
            "n_hosts must be >= 1".into(),
        ));
    }

    let mut nodes = vec![RawNode {
        raw_id: "ctl".into(),
        kind_hint: Some(KindHint::Controller),
    }];
    let mut links: Vec<RawLink> = Vec::new();
    let switch_id = |k: u32| format!("sw-{k:04}");
    let host_id = |k: u32| format!("h-{k:04}");

    let add_link = |links: &mut Vec<RawLink>, prefix: &str, k: u32, a: String, b: String| {
        links.push(RawLink {
            raw_id: format!("{prefix}-{k:04}"),
            endpoint_a: a,
            endpoint_b: b,
        });
    };

    // Switch fabric and host attachment per shape.
    let n_switches: u32;
    match kind {
        TopologyKind::Linear | TopologyKind::Ring => {
            n_switches = n_hosts;
            for k in 1..=n_switches {
                nodes.push(RawNode {
                    raw_id: switch_id(k),
                    kind_hint: Some(KindHint::Switch),
                });
            }
            for k in 1..n_switches {
                add_link(&mut links, "il", k, switch_id(k), switch_id(k + 1));
            }
            if kind == TopologyKind::Ring && n_switches >= 2 {
                add_link(&mut links, "il", n_switches, switch_id(n_switches), switch_id(1));
            }
            for k in 1..=n_hosts {
                nodes.push(RawNode {
                    raw_id: host_id(k),
                    kind_hint: Some(KindHint::Host),
                });
                add_link(&mut links, "al", k, host_id(k), switch_id(k));
            }
        }
        TopologyKind::Star => {
            n_switches = 1;
            nodes.push(RawNode {
                raw_id: switch_id(1),
                kind_hint: Some(KindHint::Switch),
            });
            for k in 1..=n_hosts {
                nodes.push(RawNode {
                    raw_id: host_id(k),
                    kind_hint: Some(KindHint::Host),
                });
                add_link(&mut links, "al", k, host_id(k), switch_id(1));
            }
        }
        TopologyKind::Tree { fanout, depth } => {
            if fanout < 2 || depth < 1 {
                return Err(TopologyError::InvalidParameter(format!(
                    "tree requires fanout >= 2 and depth >= 1, got fanout {fanout} depth {depth}"
                )));
            }
            let leaves = fanout
                .checked_pow(depth - 1)
                .ok_or_else(|| TopologyError::InvalidParameter("tree too large".into()))?;
            if !n_hosts.is_multiple_of(leaves) {
                return Err(TopologyError::TreeShape {
                    hosts: n_hosts,
                    fanout,
                    depth,
                    leaves,
                });
            }
            let hosts_per_leaf = n_hosts / leaves;
            // Switch levels 0..depth-1; level l holds fanout^l switches.
            let mut level_start = vec![1u32]; // first switch index of each level
            let mut total = 0u32;
            for l in 0..depth {
                let width = fanout.pow(l);
                total += width;
                level_start.push(total + 1);
            }
            n_switches = total;
            for k in 1..=n_switches {
                nodes.push(RawNode {
                    raw_id: switch_id(k),
                    kind_hint: Some(KindHint::Switch),
                });
            }
            let mut il = 0u32;
            for l in 1..depth {
                let width = fanout.pow(l);
                for i in 0..width {
                    let child = level_start[l as usize] + i;
                    let parent = level_start[(l - 1) as usize] + i / fanout;
                    il += 1;
                    add_link(&mut links, "il", il, switch_id(parent), switch_id(child));
                }
            }
            let first_leaf = level_start[(depth - 1) as usize];
            for k in 1..=n_hosts {
                let leaf = first_leaf + (k - 1) / hosts_per_leaf;
                nodes.push(RawNode {
                    raw_id: host_id(k),
                    kind_hint: Some(KindHint::Host),
                });
                add_link(&mut links, "al", k, host_id(k), switch_id(leaf));
            }
        }
    }

    match mode {
        ControlMode::OutOfBand => {
            for k in 1..=n_switches {
                add_link(&mut links, "cl", k, "ctl".into(), switch_id(k));
            }
        }
        ControlMode::InBand => {
            // Master is the lowest-id switch.
            add_link(&mut links, "cl", 1, "ctl".into(), switch_id(1));
        }
    }

    let raw = RawTopology {
        nodes,
        links,
        source_dialect: Dialect::Native,
        controller_id: "ctl".into(),
    };
    classify_at(&raw, 0)
}

fn monotonic_nanos() -> u64 {
    use std::sync::OnceLock;
    static EPOCH: OnceLock<Instant> = OnceLock::new();
    EPOCH.get_or_init(Instant::now).elapsed().as_nanos() as u64
}
