//! Search-based identification of causal effects from multiple data sources.
//!
//! Given a semi-Markovian causal graph, a collection of available
//! distributions (observational, experimental, or affected by missing data)
//! and a target distribution, the engine searches over do-calculus and
//! probability-calculus rewrites. When the target is derived, it returns an
//! identifying formula that can be evaluated on discrete probability tables.

pub mod engine;
pub mod fixtures;
pub mod formula;
pub mod graph;
pub mod scenario;
pub mod scm;
pub mod term;
pub mod varset;

pub use engine::{identify, IdentifyResult, SearchLimits, Verdict};
pub use formula::{Formula, ProbTable};
pub use graph::{CausalGraph, GraphError, VarKind};
pub use scm::DiscreteScm;
pub use term::{DistributionTerm, QuerySpec, TermError};
pub use varset::VarSet;
