//! Approximate causal inference: responsibility scoring, sampling,
//! discretization and beam search.

mod beam;
mod config;
mod discretize;
mod resp;
mod sampled;

pub use beam::{beam_search_influence, BeamResult, BeamTrace};
pub use config::{ApproxConfig, ApproxError, ResponsibilityScore};
pub use discretize::{
    apply_rule, discretize_domains, DiscretizationScheme, FamilyGrid, RuleExpr, RuleSpec,
    RuleTarget,
};
pub use resp::{
    factor_flip, factor_space, mean_resp, mean_resp_with, responsibility_search, CandidateSpace,
    SpaceAssignment,
};
pub use sampled::mean_resp_sampled;
