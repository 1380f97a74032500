//! Crate-wide error types.
//!
//! Each pipeline stage has its own error enum; [`Error`] aggregates them so
//! callers that drive the whole pipeline (the CLI, the simulator) can match
//! on one type. [`Error::class`] buckets every variant into the coarse
//! classes the CLI maps to exit codes.

use thiserror::Error;

/// Coarse error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input data (fixtures, configs, evidence files).
    Input,
    /// A model invariant was violated while building or transforming the graph.
    Model,
    /// Evidence has zero likelihood under the model.
    Contradiction,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    Diagnosis(#[from] DiagnosisError),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Topology(_) => ErrorClass::Input,
            Error::Template(_) => ErrorClass::Model,
            Error::Graph(e) => e.class(),
            Error::Bayes(e) => e.class(),
            Error::Diagnosis(e) => e.class(),
            Error::Simulator(_) => ErrorClass::Input,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("malformed JSON at byte {offset} (line {line}, column {column}): {message}")]
    Malformed {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("document does not match the {dialect} layout: {detail}")]
    Dialect { dialect: String, detail: String },
    #[error("link {link} references undeclared node {endpoint}")]
    DanglingEndpoint { link: String, endpoint: String },
    #[error("duplicate {what} id {id}")]
    DuplicateId { what: &'static str, id: String },
    #[error("controller id {0} does not name a declared node")]
    UnknownController(String),
    #[error("node {0} is not attached to any link")]
    IsolatedNode(String),
    #[error("link {0} connects two hosts")]
    HostToHostLink(String),
    #[error("unsupported topology: {0}")]
    Unsupported(String),
    #[error("no control path: none of the {switches} switches has a control link")]
    NoControlPath { switches: usize },
    #[error("partitioned control: switches {unreachable:?} cannot reach the controller")]
    PartitionedControl { unreachable: Vec<String> },
    #[error("hybrid control ({masters} of {switches} switches controller-attached) is not supported")]
    HybridControl { masters: usize, switches: usize },
    #[error("{hosts} hosts cannot be placed on a tree with fanout {fanout} and depth {depth} ({leaves} leaf switches)")]
    TreeShape {
        hosts: u32,
        fanout: u32,
        depth: u32,
        leaves: u32,
    },
    #[error("invalid topology parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("no template registered for element type {0}")]
    Missing(String),
    #[error("degree-adaptive template for {element} requires degree >= 1, node is isolated")]
    IsolatedNode { element: String },
    #[error("unsupported topology kind for the vertex-count formula: {0}")]
    UnsupportedKind(String),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex label {0} appears in more than one fragment")]
    LabelCollision(String),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("no free network-card slot on {element} for link {link}")]
    NicCapacity { element: String, link: String },
    #[error("link {link} has no link-state vertex in the graph")]
    MissingLinkVertex { link: String },
    #[error("graph must be topologically sorted before {0}")]
    Unsorted(&'static str),
    #[error("unsupported export format {0}")]
    UnknownFormat(String),
    #[error("model document is invalid: {0}")]
    InvalidModel(String),
}

impl GraphError {
    fn class(&self) -> ErrorClass {
        match self {
            GraphError::InvalidModel(_) | GraphError::UnknownFormat(_) => ErrorClass::Input,
            _ => ErrorClass::Model,
        }
    }
}

#[derive(Debug, Error)]
pub enum BayesError {
    #[error("leak probability {value} for {target} is outside [0, 1]")]
    LeakOutOfRange { target: String, value: f64 },
    #[error("prior override targets unknown vertex label {0}")]
    UnknownOverride(String),
    #[error("unknown vertex label {0}")]
    UnknownLabel(String),
    #[error("vertex {0} carries both hard and soft evidence")]
    ConflictingEvidence(String),
    #[error("soft evidence on {0} has both likelihoods zero")]
    DegenerateLikelihood(String),
    #[error("network has {vertices} vertices, enumeration capped at {cap}")]
    EnumerationCap { vertices: usize, cap: usize },
    #[error("evidence has zero probability under the model: {assignment}")]
    Contradiction { assignment: String },
    #[error("parent-state arity mismatch: CPT has {expected} parents, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("prior configuration error: {0}")]
    Config(String),
}

impl BayesError {
    fn class(&self) -> ErrorClass {
        match self {
            BayesError::Contradiction { .. } => ErrorClass::Contradiction,
            BayesError::EnumerationCap { .. } | BayesError::ArityMismatch { .. } => {
                ErrorClass::Model
            }
            _ => ErrorClass::Input,
        }
    }
}

#[derive(Debug, Error)]
pub enum DiagnosisError {
    #[error("service degradation alarm requires src and dst endpoints")]
    MissingEndpoints,
    #[error("no path between {src} and {dst}")]
    UnreachableEndpoints { src: String, dst: String },
    #[error("{label} is not a {expected} vertex")]
    ObservationKind { label: String, expected: &'static str },
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("cpu utilization {value} for {label} is outside [0, 1]")]
    UtilizationRange { label: String, value: f64 },
    #[error(transparent)]
    Bayes(#[from] BayesError),
}

impl DiagnosisError {
    fn class(&self) -> ErrorClass {
        match self {
            DiagnosisError::Bayes(e) => e.class(),
            _ => ErrorClass::Input,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("fault targets unknown element {0}")]
    UnknownTarget(String),
    #[error("element {0} appears in more than one fault")]
    DuplicateTarget(String),
    #[error("cpu load {0} is outside [0, 1]")]
    LoadRange(f64),
    #[error("campaign config error: {0}")]
    Config(String),
}
