//! Exact weak- and actual-cause identification on layered causal graphs,
//! plus the brute-force oracle used to validate it.

mod actual;
mod enumerate;
mod oracle;
mod query;
mod recurrence;
mod weak;

pub use actual::{
    determine_actual_causes, determine_actual_causes_relative, determine_actual_causes_verified,
};
pub use enumerate::{pick, subsets, Assignments};
pub use oracle::{oracle_weak_cause, oracle_weak_cause_in, oracle_weak_cause_with_budget, DEFAULT_ORACLE_BUDGET};
pub use query::{CausalQuery, CauseSet, InferenceError, Witness};
pub use recurrence::{layer_zero_tuples, recurrence_step, RTuple};
pub use weak::{determine_weak_causes, determine_weak_causes_with_stats, witness_defeats_event, InferenceStats};
