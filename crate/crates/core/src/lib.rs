//! K dissimilar paths: networks, instance generators, dissimilarity metrics,
//! MILP formulations, loop removal, the iterative penalty heuristic, the
//! presence bound, a brute-force oracle and the experiment harness.

pub mod formulations;
pub mod graph;
pub mod harness;
pub mod instance;
pub mod ipm;
pub mod loops;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod rstar;

pub use graph::{DirectedNetwork, PathSeq};
pub use instance::InstanceSpec;
pub use par::Exec;
