//! Capacity expansion for two-sided matching.
//!
//! Given a residency-match instance with base quotas, per-hospital expansion
//! limits and a total budget of extra seats, find the expansion whose
//! resident-proposing deferred-acceptance outcome minimizes the total resident
//! rank. The main solver is an upper-confidence tree search ([`uct`]) over one
//! of three tree representations of the expansion set ([`tree`]); greedy and
//! min-cost-flow baselines and brute-force oracles sit alongside it.

pub mod baselines;
pub mod da;
pub mod datagen;
pub mod error;
pub mod flow;
pub mod harness;
pub mod instance;
pub mod oracle;
pub mod tree;
pub mod uct;

pub use baselines::{greedy_expansion, lp_heuristic, BaselineOutcome, LphOutcome};
pub use da::{find_blocking_pairs, per_resident_ranks, run_da, total_cost, StabilityReport};
pub use datagen::{generate_partial, generate_set1, generate_set2, PartialParams, SyntheticParams};
pub use error::{Error, Result};
pub use flow::{min_cost_flow, FlowNetwork, FlowSolution};
pub use harness::{gap, run_method, GapTable, Method, RunConfig, RunOutcome, RunRecord};
pub use instance::{
    complete_with_dummy, load_instance, save_instance, validate, ExpansionVector, InstanceParts,
    Matching, MatchingInstance, ValidationReport, Violation,
};
pub use oracle::{brute_force_optimal, enumerate_stable_matchings, enumerate_theta};
pub use tree::{
    envy_scores, make_ordering, popularity_scores, ExpansionTree, HospitalOrdering, OrderingKind,
    Representation, TreePath,
};
pub use uct::{search, ucb_value, SearchConfig, SearchResult, TrajectoryPoint, UctSearch};
