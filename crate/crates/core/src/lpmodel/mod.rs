//! Linear optimal power flow model emission.
//!
//! [`build_lp`] writes the multi-period Angles+Flow formulation with storage
//! expansion as a solver-agnostic [`LpProblem`], for the unaggregated horizon
//! or either aggregated form described by an [`AggregationDescriptor`].
//! [`extract_solution`] maps a primal solution back onto the network.

mod build;
mod descriptor;
pub mod names;
mod problem;
mod solution;

pub use build::{build_lp, soc_timeline, SocStep};
pub use descriptor::{AggregationDescriptor, Method, HOURS_PER_DAY};
pub use problem::{Constraint, LpProblem, Relation, Variable};
pub use solution::{
    extract_solution, objective_breakdown, CostBreakdown, DispatchResult, GeneratorResult, SeriesResult,
    StorageResult,
};

use crate::network::Diagnostic;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("duplicate name {0}")]
    DuplicateName(String),
    #[error("variable {name} has bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("invalid descriptor: {0}")]
    Descriptor(String),
    #[error("descriptor does not match network: {0}")]
    Mismatch(String),
    #[error("coupled day clustering needs a horizon that is a multiple of 24 hours, got {0}")]
    HorizonNotDaily(usize),
    #[error("solution has no value for {0}")]
    MissingValue(String),
    #[error("invalid network: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<Diagnostic>),
}
