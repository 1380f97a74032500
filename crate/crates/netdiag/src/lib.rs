//! Self-modeling fault diagnosis for software-defined networks.
//!
//! The crate builds, at runtime, a fine-grained dependency graph from a
//! network topology snapshot and parameterizes it as a noisy-OR Bayesian
//! network, then ranks root causes of service alarms from physical and
//! logical observations. The pipeline is:
//!
//! 1. [`topology`] — ingest a controller topology dump (or generate a
//!    synthetic one) and classify every element into one of seven types.
//! 2. [`templates`] — instantiate per-element-type dependency templates
//!    into graph fragments.
//! 3. [`graph`] — assemble fragments into the global dependency graph,
//!    topologically sort it, and wire link vertices to network cards.
//! 4. [`bayes`] — attach noisy-OR parameters and answer posterior queries
//!    by exact variable elimination (with a brute-force oracle for tests).
//! 5. [`diagnosis`] — correlate a service alarm with observations and emit
//!    a ranked root-cause report.
//! 6. [`simulator`] — inject faults into synthetic topologies, score
//!    diagnosis accuracy, and benchmark model-build time.

pub mod bayes;
pub mod diagnosis;
mod error;
pub mod graph;
pub mod simulator;
pub mod templates;
pub mod topology;

pub use error::{
    BayesError, DiagnosisError, Error, ErrorClass, GraphError, Result, SimulatorError,
    TemplateError, TopologyError,
};
