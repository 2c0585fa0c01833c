//! Structural causal models compiled from solved MDPs.

mod dot;
mod equation;
mod factor;
mod graph;
mod layer;
mod model;
mod reduce;
mod value;
mod variable;

pub use dot::lcg_to_dot;
pub use equation::{Equation, Operand, QTerm};
pub use factor::{action_selected_event, build_factor_scm, build_factor_scm_at, rebase_factor_scm};
pub use graph::{construct_causal_graph, CausalGraph};
pub use layer::{construct_lcg, LayeredCausalGraph};
pub use model::{evaluate_scm, Event, Literal, ScmBuilder, ScmError, StructuralCausalModel};
pub use reduce::reduce_lcg;
pub use value::{build_value_scm, build_value_scm_with, induced_action, ValueScmOptions};
pub use variable::{Domain, Value, VarId, VarKind, Variable};
