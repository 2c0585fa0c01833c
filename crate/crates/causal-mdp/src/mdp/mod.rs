//! Factored MDP representation and solvers.
//!
//! States are stored as indices with a canonical row-major factor encoding:
//! the first factor varies slowest. [`MdpModel::state_of_factors`] and
//! [`MdpModel::factors_of_state`] convert between the two views bijectively.

mod graph;
mod io;
mod model;
mod solve;

pub use graph::{build_successor_graph, layerize_finite_horizon, LayeredMdp, SuccessorGraph};
pub use io::MdpFile;
pub use model::{ActionId, Factor, MdpError, MdpModel, Policy, StateId, TransitionEntry, ValueFunction};
pub use solve::{
    backward_induction, evaluate_policy, finite_horizon_action, solve_value_iteration,
};
