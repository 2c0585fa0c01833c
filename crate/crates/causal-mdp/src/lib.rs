//! Causal analysis of Markov decision processes via structural causal models.
//!
//! The library compiles a solved MDP into one of two structural causal models
//! (a state-factor model and a reward/transition/value model), layers the
//! induced causal graph, and identifies weak and actual causes of the agent's
//! action selection — exactly, through a layered recurrence over candidate
//! variable sets, or approximately, through responsibility scoring and beam
//! search. Identified causes can be rendered as templated natural-language
//! explanations.
//!
//! The crate is organized around the pipeline:
//!
//! 1. [`mdp`] — factored MDP representation, value iteration, policy
//!    evaluation, successor graphs and finite-horizon layering.
//! 2. [`scm`] — structural causal models built from a solved MDP, causal
//!    graph derivation via bipartite matching, graph layering and reduction.
//! 3. [`exact`] — exact weak/actual cause identification on layered causal
//!    graphs, plus a brute-force oracle used for validation.
//! 4. [`approx`] — responsibility scoring (exhaustive and sampled),
//!    domain discretization, and beam search over value-layer influence.
//! 5. [`explain`] — query routing and templated explanation rendering.
//!
//! With the `parallel` feature (default), data-parallel inner loops run on
//! rayon with deterministic merges; without it, everything runs sequentially
//! with identical results.

pub mod approx;
pub mod exact;
pub mod explain;
pub mod mdp;
pub mod par;
pub mod scm;

pub use approx::{
    beam_search_influence, discretize_domains, mean_resp, mean_resp_sampled, ApproxConfig,
    DiscretizationScheme, ResponsibilityScore,
};
pub use exact::{
    determine_actual_causes, determine_weak_causes, oracle_weak_cause, CausalQuery, CauseSet,
    RTuple,
};
pub use explain::{render_explanation, run_query, Explanation, ExplanationRequest, PhraseMap};
pub use mdp::{
    build_successor_graph, evaluate_policy, layerize_finite_horizon, solve_value_iteration,
    LayeredMdp, MdpModel, Policy, SuccessorGraph, ValueFunction,
};
pub use scm::{
    build_factor_scm, build_value_scm, construct_causal_graph, construct_lcg, evaluate_scm,
    reduce_lcg, CausalGraph, LayeredCausalGraph, StructuralCausalModel, Variable,
};

/// Test-support fixtures shared by unit, integration and acceptance tests.
#[doc(hidden)]
pub mod testkit;
