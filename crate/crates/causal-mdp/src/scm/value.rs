//! The reward/transition/value causal model.
//!
//! Built per current state: transition and reward roots feed value variables
//! for every state reachable within the horizon, which feed the action
//! indicators at the current state. Without a fixed policy each state carries
//! per-action value variables aggregated by max (value iteration); with one,
//! those collapse into the plain value variables (policy evaluation).
//!
//! Successor values beyond the horizon enter the fringe equations as baked
//! constants at their solved values, matching the layering rule that severed
//! parents are pinned at the actual world.

use super::equation::{Equation, Operand, QTerm};
use super::model::{ScmBuilder, ScmError, StructuralCausalModel};
use super::variable::{Domain, Value, VarId, VarKind};
use crate::mdp::{
    build_successor_graph, evaluate_policy, solve_value_iteration, ActionId, MdpModel, Policy,
    StateId,
};
use std::collections::BTreeMap;

/// Variable families that can be moved from the endogenous set into the
/// context, excluding them from causal analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValueScmOptions {
    pub rewards_in_context: bool,
    pub transitions_in_context: bool,
}

const SOLVE_TOLERANCE: f64 = 1e-9;

/// Builds the value model rooted at `s0` with horizon `h ≥ 1`.
///
/// With `fixed_policy`, per-action value variables are collapsed away and
/// downstream values follow that policy; action selection at `s0` still
/// compares per-action Q sums. The context holds γ (and any family moved out
/// of the endogenous set).
pub fn build_value_scm(
    mdp: &MdpModel,
    s0: StateId,
    h: usize,
    fixed_policy: Option<&Policy>,
) -> Result<StructuralCausalModel, ScmError> {
    build_value_scm_with(mdp, s0, h, fixed_policy, ValueScmOptions::default())
}

/// As [`build_value_scm`] with explicit context options.
pub fn build_value_scm_with(
    mdp: &MdpModel,
    s0: StateId,
    h: usize,
    fixed_policy: Option<&Policy>,
    options: ValueScmOptions,
) -> Result<StructuralCausalModel, ScmError> {
    if h < 1 {
        return Err(ScmError::HorizonTooSmall(h));
    }
    let solved_values: Vec<f64> = match fixed_policy {
        Some(policy) => {
            evaluate_policy(mdp, policy, SOLVE_TOLERANCE)
                .map_err(|e| ScmError::NotLayered(e.to_string()))?
                .values
        }
        None => {
            solve_value_iteration(mdp, SOLVE_TOLERANCE)
                .map_err(|e| ScmError::NotLayered(e.to_string()))?
                .0
                .values
        }
    };

    let succ = build_successor_graph(mdp);
    let dist = succ.distances_from(s0);
    let included: Vec<StateId> = (0..mdp.num_states())
        .filter(|&s| dist[s].is_some_and(|d| d <= h))
        .map(StateId)
        .collect();

    let mut b = ScmBuilder::new();
    b.set_context("gamma", mdp.discount());
    let mut actuals: Vec<Value> = Vec::new();
    let add = |b: &mut ScmBuilder,
                   actuals: &mut Vec<Value>,
                   kind: VarKind,
                   domain: Domain,
                   parents: Vec<VarId>,
                   eq: Equation,
                   actual: Value| {
        let id = b.add(kind, domain, parents, eq);
        actuals.push(actual);
        id
    };

    // Roots: transition and reward variables per listed (s, a, s') triple.
    let mut t_vars: BTreeMap<(StateId, ActionId, StateId), VarId> = BTreeMap::new();
    let mut r_vars: BTreeMap<(StateId, ActionId, StateId), VarId> = BTreeMap::new();
    for &s in &included {
        for a in 0..mdp.num_actions() {
            let a = ActionId(a);
            if fixed_policy.is_some_and(|p| p.action_of(s) != a) && s != s0 {
                // Collapsed model: only the policy's action matters
                // downstream; s0 keeps all actions for the selection layer.
                continue;
            }
            for e in mdp.row(s, a) {
                if !options.transitions_in_context {
                    let id = add(
                        &mut b,
                        &mut actuals,
                        VarKind::Transition {
                            state: s,
                            action: a,
                            successor: e.successor,
                        },
                        Domain::singleton(Value::num(e.probability)),
                        vec![],
                        Equation::Const(Value::num(e.probability)),
                        Value::num(e.probability),
                    );
                    t_vars.insert((s, a, e.successor), id);
                }
                if !options.rewards_in_context {
                    let id = add(
                        &mut b,
                        &mut actuals,
                        VarKind::Reward {
                            state: s,
                            action: a,
                            successor: e.successor,
                        },
                        Domain::singleton(Value::num(e.reward)),
                        vec![],
                        Equation::Const(Value::num(e.reward)),
                        Value::num(e.reward),
                    );
                    r_vars.insert((s, a, e.successor), id);
                }
            }
        }
    }

    // Value variables exist for every included state.
    let mut v_vars: BTreeMap<StateId, VarId> = BTreeMap::new();
    for &s in &included {
        let actual = Value::num(solved_values[s.0]);
        // Equation filled in below once per-state parents are known.
        let id = add(
            &mut b,
            &mut actuals,
            VarKind::Value { state: s },
            Domain::singleton(actual),
            vec![],
            Equation::Const(actual),
            actual,
        );
        v_vars.insert(s, id);
    }

    // Assembles the Q terms for (s, a): parents gathered positionally,
    // missing variables baked as constants.
    let gamma = mdp.discount();
    let q_actual = |s: StateId, a: ActionId| -> f64 {
        mdp.row(s, a)
            .iter()
            .map(|e| e.probability * (e.reward + gamma * solved_values[e.successor.0]))
            .sum()
    };
    let build_terms = |s: StateId,
                       a: ActionId,
                       parents: &mut Vec<VarId>,
                       positions: &mut BTreeMap<VarId, usize>|
     -> Vec<QTerm> {
        let mut operand = |var: Option<&VarId>, baked: f64| -> Operand {
            match var {
                Some(&id) => {
                    let pos = *positions.entry(id).or_insert_with(|| {
                        parents.push(id);
                        parents.len() - 1
                    });
                    Operand::Parent(pos)
                }
                None => Operand::Const(baked),
            }
        };
        mdp.row(s, a)
            .iter()
            .map(|e| {
                let t = operand(t_vars.get(&(s, a, e.successor)), e.probability);
                let r = operand(r_vars.get(&(s, a, e.successor)), e.reward);
                let v = operand(
                    v_vars.get(&e.successor),
                    solved_values[e.successor.0],
                );
                (t, r, v)
            })
            .collect()
    };

    // Per-action value variables (only without a fixed policy).
    let mut q_vars: BTreeMap<(StateId, ActionId), VarId> = BTreeMap::new();
    if fixed_policy.is_none() {
        for &s in &included {
            for a in 0..mdp.num_actions() {
                let a = ActionId(a);
                let mut parents = Vec::new();
                let mut positions = BTreeMap::new();
                let terms = build_terms(s, a, &mut parents, &mut positions);
                let actual = Value::num(q_actual(s, a));
                let id = add(
                    &mut b,
                    &mut actuals,
                    VarKind::ActionValue { state: s, action: a },
                    Domain::singleton(actual),
                    parents,
                    Equation::QValue { terms },
                    actual,
                );
                q_vars.insert((s, a), id);
            }
        }
    }

    // Wire the value equations now that all inputs exist.
    let mut wired = ScmBuilder::new();
    wired.set_context("gamma", mdp.discount());
    if options.rewards_in_context || options.transitions_in_context {
        for &s in &included {
            for a in 0..mdp.num_actions() {
                let a = ActionId(a);
                for e in mdp.row(s, a) {
                    if options.transitions_in_context {
                        wired.set_context(
                            &VarKind::Transition {
                                state: s,
                                action: a,
                                successor: e.successor,
                            }
                            .name(),
                            e.probability,
                        );
                    }
                    if options.rewards_in_context {
                        wired.set_context(
                            &VarKind::Reward {
                                state: s,
                                action: a,
                                successor: e.successor,
                            }
                            .name(),
                            e.reward,
                        );
                    }
                }
            }
        }
    }
    // Rebuild variables in creation order, replacing the placeholder value
    // equations with their real parents.
    let partial = b.build_with_actuals(actuals.clone());
    for var in partial.variables() {
        let (parents, eq) = match var.kind {
            VarKind::Value { state } => match fixed_policy {
                None => {
                    let parents: Vec<VarId> = (0..mdp.num_actions())
                        .map(|a| q_vars[&(state, ActionId(a))])
                        .collect();
                    (parents, Equation::MaxOf)
                }
                Some(policy) => {
                    let mut parents = Vec::new();
                    let mut positions = BTreeMap::new();
                    let terms =
                        build_terms(state, policy.action_of(state), &mut parents, &mut positions);
                    (parents, Equation::QValue { terms })
                }
            },
            _ => (
                partial.parents(var.id).to_vec(),
                partial.equation(var.id).clone(),
            ),
        };
        wired.add(var.kind, var.domain.clone(), parents, eq);
    }

    // Action-selection layer at the current state.
    let selection_values: Vec<f64> = (0..mdp.num_actions())
        .map(|a| q_actual(s0, ActionId(a)))
        .collect();
    let best = selection_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    for a in 0..mdp.num_actions() {
        let a = ActionId(a);
        let (parents, eq) = match fixed_policy {
            None => {
                let parents: Vec<VarId> = (0..mdp.num_actions())
                    .map(|b| q_vars[&(s0, ActionId(b))])
                    .collect();
                (parents, Equation::ArgmaxEq { index: a.0 })
            }
            Some(_) => {
                let mut parents = Vec::new();
                let mut positions = BTreeMap::new();
                let entries: Vec<Vec<QTerm>> = (0..mdp.num_actions())
                    .map(|b| build_terms(s0, ActionId(b), &mut parents, &mut positions))
                    .collect();
                (parents, Equation::QArgmax { entries, index: a.0 })
            }
        };
        wired.add(
            VarKind::PolicyIndicator { state: s0, action: a },
            Domain::boolean(),
            parents,
            eq,
        );
        actuals.push(Value::Bool(selection_values[a.0] >= best));
    }

    Ok(wired.build_with_actuals(actuals))
}

/// The action selected at `s0` in an evaluated world: the lowest-indexed
/// action whose indicator is true.
pub fn induced_action(
    scm: &StructuralCausalModel,
    world: &[Value],
    s0: StateId,
    num_actions: usize,
) -> ActionId {
    for a in 0..num_actions {
        let name = VarKind::PolicyIndicator {
            state: s0,
            action: ActionId(a),
        }
        .name();
        if let Some(v) = scm.by_name(&name) {
            if world[v.0].as_bool() {
                return ActionId(a);
            }
        }
    }
    ActionId(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{construct_causal_graph, construct_lcg};
    use crate::testkit;

    #[test]
    fn two_state_census_without_fixed_policy() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        // Q variables for s1 exist for both actions and aggregate into V(s1).
        assert!(scm.by_name("Q:1:0").is_some());
        assert!(scm.by_name("Q:1:1").is_some());
        let v1 = scm.by_name("V:1").unwrap();
        assert_eq!(scm.parents(v1).len(), 2);
        assert!(matches!(scm.equation(v1), Equation::MaxOf));
        // π indicators exist only for the current state
        assert!(scm.by_name("pi:0:0").is_some());
        assert!(scm.by_name("pi:1:0").is_none());
    }

    #[test]
    fn fixed_policy_build_is_smaller() {
        let mdp = testkit::two_state_mdp(0.9);
        let policy = testkit::greedy(&mdp);
        let free = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let fixed = build_value_scm(&mdp, StateId(0), 1, Some(&policy)).unwrap();
        assert!(fixed.num_vars() < free.num_vars());
        assert!(fixed.by_name("Q:1:0").is_none());
    }

    #[test]
    fn rewards_move_to_context() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm_with(
            &mdp,
            StateId(0),
            1,
            None,
            ValueScmOptions {
                rewards_in_context: true,
                transitions_in_context: false,
            },
        )
        .unwrap();
        assert!(scm.by_name("R:0:0:1").is_none());
        assert!(scm.context().contains_key("R:0:0:1"));
        assert!(scm.by_name("T:0:0:1").is_some());
    }

    #[test]
    fn layered_actual_world_selects_optimal_action() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        let succ = build_successor_graph(&mdp);
        let lcg = construct_lcg(&scm, &g, &succ, StateId(0), 1).unwrap();
        let world = lcg.evaluate(&BTreeMap::new());
        assert_eq!(induced_action(&scm, &world, StateId(0), 2), ActionId(0));
    }

    #[test]
    fn reward_intervention_flips_selection() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        let succ = build_successor_graph(&mdp);
        let lcg = construct_lcg(&scm, &g, &succ, StateId(0), 1).unwrap();
        let r = scm.by_name("R:0:0:1").unwrap();
        let mut iv = BTreeMap::new();
        iv.insert(r, Value::num(-5.0));
        let world = lcg.evaluate(&iv);
        assert_eq!(induced_action(&scm, &world, StateId(0), 2), ActionId(1));
    }
}
