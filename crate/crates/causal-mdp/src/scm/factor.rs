//! The state-factor causal model.
//!
//! Three layers: factor variables feed state indicators, which gate the
//! policy indicators [π(s) = a]. The solved policy enters as constants inside
//! the gate equations, so interventions on factors show how the *fixed*
//! policy's action selection responds to counterfactual states.

use super::layer::LayeredCausalGraph;
use super::model::{Event, Literal, ScmBuilder, ScmError, StructuralCausalModel};
use super::variable::{Domain, Value, VarId, VarKind};
use crate::mdp::{ActionId, MdpModel, Policy, StateId};
use std::collections::BTreeMap;

/// Builds the factor model for a solved MDP. The factor roots default to the
/// most likely start state; use [`rebase_factor_scm`] to analyze another
/// current state.
///
/// Layer sizes are (|A|·|S|, |S|, number of factors) from the event layer up.
pub fn build_factor_scm(
    mdp: &MdpModel,
    policy: &Policy,
) -> Result<(StructuralCausalModel, LayeredCausalGraph), ScmError> {
    build_factor_scm_at(mdp, policy, mdp.likely_start())
}

/// As [`build_factor_scm`], rooted at an explicit current state.
pub fn build_factor_scm_at(
    mdp: &MdpModel,
    policy: &Policy,
    s0: StateId,
) -> Result<(StructuralCausalModel, LayeredCausalGraph), ScmError> {
    let mut b = ScmBuilder::new();
    let s0_values = mdp.factors_of_state(s0);

    let factor_vars: Vec<VarId> = mdp
        .factors()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            b.add(
                VarKind::Factor { index: i },
                Domain::indexed(f.values.len()),
                vec![],
                super::Equation::Const(Value::Index(s0_values[i])),
            )
        })
        .collect();

    let n = mdp.num_states();
    let indicator_vars: Vec<VarId> = (0..n)
        .map(|s| {
            b.add(
                VarKind::StateIndicator { state: StateId(s) },
                Domain::boolean(),
                factor_vars.clone(),
                super::Equation::StateEquals {
                    expected: mdp.factors_of_state(StateId(s)),
                },
            )
        })
        .collect();

    let mut policy_vars = Vec::with_capacity(n * mdp.num_actions());
    for s in 0..n {
        for a in 0..mdp.num_actions() {
            policy_vars.push(b.add(
                VarKind::PolicyIndicator {
                    state: StateId(s),
                    action: ActionId(a),
                },
                Domain::boolean(),
                vec![indicator_vars[s]],
                super::Equation::PolicyGate {
                    selected: policy.action_of(StateId(s)) == ActionId(a),
                },
            ));
        }
    }

    let scm = b.build()?;
    let live = (0..scm.num_vars())
        .map(|v| vec![true; scm.parents(VarId(v)).len()])
        .collect();
    let lcg = LayeredCausalGraph::from_parts(
        scm.clone(),
        vec![policy_vars, indicator_vars, factor_vars],
        live,
    )?;
    Ok((scm, lcg))
}

/// Re-roots a factor model at a new current state by replacing the factor
/// root constants.
pub fn rebase_factor_scm(
    mdp: &MdpModel,
    scm: &StructuralCausalModel,
    s0: StateId,
) -> Result<StructuralCausalModel, ScmError> {
    let values = mdp.factors_of_state(s0);
    let mut roots = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        let var = scm
            .by_name(&VarKind::Factor { index: i }.name())
            .ok_or_else(|| ScmError::UnknownVariable(format!("f:{i}")))?;
        roots.insert(var, Value::Index(*v));
    }
    scm.with_root_values(&roots)
}

/// The event "the selected action is `a`" over the factor model's policy
/// layer: no state whose policy prescribes a different action may be active.
/// Exactly one diagonal indicator [π(s) = π(s)] is true per factor
/// assignment, so the conjunction pins the chosen action without naming the
/// state.
pub fn action_selected_event(
    mdp: &MdpModel,
    policy: &Policy,
    scm: &StructuralCausalModel,
    action: ActionId,
) -> Event {
    let mut literals = Vec::new();
    for s in 0..mdp.num_states() {
        let pa = policy.action_of(StateId(s));
        if pa == action {
            continue;
        }
        let name = VarKind::PolicyIndicator {
            state: StateId(s),
            action: pa,
        }
        .name();
        let var = scm.by_name(&name).expect("policy indicator exists");
        literals.push(Literal {
            var,
            value: Value::Bool(true),
            negated: true,
        });
    }
    Event(literals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::evaluate_scm;
    use crate::testkit;

    #[test]
    fn toy_layer_sizes() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let (_, lcg) = build_factor_scm(&mdp, &policy).unwrap();
        // event layer |S||A| = 8, then |S| = 4, then 2 factors
        assert_eq!(lcg.layer(0).len(), 8);
        assert_eq!(lcg.layer(1).len(), 4);
        assert_eq!(lcg.layer(2).len(), 2);
    }

    #[test]
    fn actual_world_selects_policy_action() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let s0 = StateId(2); // (f1, f2) = (1, 0)
        let (scm, _) = build_factor_scm_at(&mdp, &policy, s0).unwrap();
        let world = evaluate_scm(&scm, &BTreeMap::new()).unwrap();
        let a = policy.action_of(s0);
        let diag = scm
            .by_name(&VarKind::PolicyIndicator { state: s0, action: a }.name())
            .unwrap();
        assert_eq!(world[diag.0], Value::Bool(true));
        for s in 0..mdp.num_states() {
            for act in 0..mdp.num_actions() {
                let v = scm
                    .by_name(
                        &VarKind::PolicyIndicator {
                            state: StateId(s),
                            action: ActionId(act),
                        }
                        .name(),
                    )
                    .unwrap();
                if v != diag {
                    assert_eq!(world[v.0], Value::Bool(false));
                }
            }
        }
    }

    #[test]
    fn intervening_factor_flips_selection() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let s0 = StateId(2);
        let (scm, _) = build_factor_scm_at(&mdp, &policy, s0).unwrap();
        let f1 = scm.by_name("f:0").unwrap();
        let mut iv = BTreeMap::new();
        iv.insert(f1, Value::Index(0));
        let world = evaluate_scm(&scm, &iv).unwrap();
        let event = action_selected_event(&mdp, &policy, &scm, policy.action_of(s0));
        assert!(!event.holds(&world));
    }

    #[test]
    fn fidelity_across_all_states() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let (scm, _) = build_factor_scm(&mdp, &policy).unwrap();
        for s in 0..mdp.num_states() {
            let mut iv = BTreeMap::new();
            for (i, v) in mdp.factors_of_state(StateId(s)).iter().enumerate() {
                iv.insert(scm.by_name(&format!("f:{i}")).unwrap(), Value::Index(*v));
            }
            let world = evaluate_scm(&scm, &iv).unwrap();
            for a in 0..mdp.num_actions() {
                let v = scm
                    .by_name(
                        &VarKind::PolicyIndicator {
                            state: StateId(s),
                            action: ActionId(a),
                        }
                        .name(),
                    )
                    .unwrap();
                let expect = policy.action_of(StateId(s)) == ActionId(a);
                assert_eq!(world[v.0], Value::Bool(expect), "state {s} action {a}");
            }
        }
    }
}
