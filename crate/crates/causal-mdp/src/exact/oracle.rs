//! Brute-force weak-cause oracle.
//!
//! Enumerates every witness set, witness assignment and counterfactual
//! candidate assignment over the whole model, checking the two counterfactual
//! conditions directly: some (W, w, x̄) defeats the event, and for that same
//! (W, w), the actual candidate values restore the event against every
//! sub-witness and every actual-value pinning of the remaining variables.
//!
//! The oracle never truncates: if the requested enumeration would exceed its
//! evaluation budget it aborts with an explicit error.

use super::enumerate::{pick, Assignments};
use super::query::{CausalQuery, InferenceError};
use crate::scm::{evaluate_scm, StructuralCausalModel, Value, VarId};
use std::collections::BTreeMap;

/// Default evaluation budget (counted worlds).
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

struct Counter {
    used: u64,
    budget: u64,
}

impl Counter {
    fn spend(&mut self) -> Result<(), InferenceError> {
        self.used += 1;
        if self.used > self.budget {
            Err(InferenceError::EnumerationBudget(self.budget))
        } else {
            Ok(())
        }
    }
}

/// Is `candidate = actual(candidate)` a weak cause of the query's event?
/// Witnesses range over every endogenous variable outside the candidate.
pub fn oracle_weak_cause(
    scm: &StructuralCausalModel,
    query: &CausalQuery,
    candidate: &[VarId],
) -> Result<bool, InferenceError> {
    let universe: Vec<VarId> = (0..scm.num_vars()).map(VarId).collect();
    oracle_weak_cause_in(scm, query, candidate, &universe, DEFAULT_ORACLE_BUDGET)
}

/// As [`oracle_weak_cause`] with an explicit evaluation budget.
pub fn oracle_weak_cause_with_budget(
    scm: &StructuralCausalModel,
    query: &CausalQuery,
    candidate: &[VarId],
    budget: u64,
) -> Result<bool, InferenceError> {
    let universe: Vec<VarId> = (0..scm.num_vars()).map(VarId).collect();
    oracle_weak_cause_in(scm, query, candidate, &universe, budget)
}

/// Weak-cause check with witnesses and pinnings restricted to `universe`
/// (variables outside it always follow their equations). Searching the
/// explanans universe alone mirrors the responsibility search over state
/// factors, where both sides range over factor assignments only.
pub fn oracle_weak_cause_in(
    scm: &StructuralCausalModel,
    query: &CausalQuery,
    candidate: &[VarId],
    universe: &[VarId],
    budget: u64,
) -> Result<bool, InferenceError> {
    for c in candidate {
        if !query.explanans.contains(c) {
            return Err(InferenceError::CandidateOutsideExplanans(
                scm.var(*c).name.clone(),
            ));
        }
    }
    // Condition 1: the actual world realizes the candidate values (trivially
    // true) and the event.
    if !query.event.holds(scm.actuals()) {
        return Ok(false);
    }
    let mut counter = Counter { used: 0, budget };
    let rest: Vec<VarId> = universe
        .iter()
        .copied()
        .filter(|v| !candidate.contains(v))
        .collect();
    let actual_candidate: Vec<Value> = candidate.iter().map(|&v| scm.actual(v)).collect();

    let eval_event = |iv: &BTreeMap<VarId, Value>,
                      counter: &mut Counter|
     -> Result<bool, InferenceError> {
        counter.spend()?;
        let world = evaluate_scm(scm, iv)?;
        Ok(query.event.holds(&world))
    };

    for w_mask in 0u64..(1u64 << rest.len()) {
        let witness_vars = pick(&rest, w_mask);
        let others: Vec<VarId> = rest
            .iter()
            .copied()
            .filter(|v| !witness_vars.contains(v))
            .collect();
        for w in Assignments::new(scm, &witness_vars) {
            // 2A: some candidate assignment defeats the event under (W, w).
            let mut defeated = false;
            for xbar in Assignments::new(scm, candidate) {
                let mut iv: BTreeMap<VarId, Value> = BTreeMap::new();
                for (&v, &val) in witness_vars.iter().zip(&w) {
                    iv.insert(v, val);
                }
                for (&v, &val) in candidate.iter().zip(&xbar) {
                    iv.insert(v, val);
                }
                if !eval_event(&iv, &mut counter)? {
                    defeated = true;
                    break;
                }
            }
            if !defeated {
                continue;
            }
            // 2B: actual candidate values restore the event for every
            // sub-witness and every actual pinning of the other variables.
            let mut robust = true;
            'outer: for wp_mask in 0u64..(1u64 << witness_vars.len()) {
                for z_mask in 0u64..(1u64 << others.len()) {
                    let mut iv: BTreeMap<VarId, Value> = BTreeMap::new();
                    for (&v, &val) in candidate.iter().zip(&actual_candidate) {
                        iv.insert(v, val);
                    }
                    for (i, (&v, &val)) in witness_vars.iter().zip(&w).enumerate() {
                        if wp_mask >> i & 1 == 1 {
                            iv.insert(v, val);
                        }
                    }
                    for (i, &v) in others.iter().enumerate() {
                        if z_mask >> i & 1 == 1 {
                            iv.insert(v, scm.actual(v));
                        }
                    }
                    if !eval_event(&iv, &mut counter)? {
                        robust = false;
                        break 'outer;
                    }
                }
            }
            if robust {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{
        action_selected_event, build_factor_scm_at, Domain, Equation, Event, Literal, ScmBuilder,
        VarKind,
    };
    use crate::testkit;

    fn id_eq() -> Equation {
        Equation::Table {
            dims: vec![2],
            out: vec![Value::Bool(false), Value::Bool(true)],
        }
    }

    /// x := true; m := x; e := m.
    fn copy_chain() -> (StructuralCausalModel, VarId, VarId) {
        let mut b = ScmBuilder::new();
        let x = b.add(
            VarKind::Factor { index: 0 },
            Domain::boolean(),
            vec![],
            Equation::Const(Value::Bool(true)),
        );
        let m = b.add(VarKind::Factor { index: 1 }, Domain::boolean(), vec![x], id_eq());
        let e = b.add(VarKind::Factor { index: 2 }, Domain::boolean(), vec![m], id_eq());
        (b.build().unwrap(), x, e)
    }

    #[test]
    fn copy_chain_root_is_weak_cause() {
        let (scm, x, e) = copy_chain();
        let query = CausalQuery::new(
            vec![x],
            Event(vec![Literal {
                var: e,
                value: Value::Bool(true),
                negated: false,
            }]),
        );
        assert!(oracle_weak_cause(&scm, &query, &[x]).unwrap());
    }

    #[test]
    fn disconnected_candidate_is_not_a_cause() {
        // x has no path to the event variable.
        let mut b = ScmBuilder::new();
        let x = b.add(
            VarKind::Factor { index: 0 },
            Domain::boolean(),
            vec![],
            Equation::Const(Value::Bool(true)),
        );
        let e = b.add(
            VarKind::Factor { index: 1 },
            Domain::boolean(),
            vec![],
            Equation::Const(Value::Bool(true)),
        );
        let scm = b.build().unwrap();
        let query = CausalQuery::new(
            vec![x],
            Event(vec![Literal {
                var: e,
                value: Value::Bool(true),
                negated: false,
            }]),
        );
        assert!(!oracle_weak_cause(&scm, &query, &[x]).unwrap());
    }

    #[test]
    fn toy_policy_first_factor_causes_action() {
        // enumerate all 4 factor worlds and all factor witness sets
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let s0 = crate::mdp::StateId(2); // (f1, f2) = (1, 0)
        let (scm, _) = build_factor_scm_at(&mdp, &policy, s0).unwrap();
        let event = action_selected_event(&mdp, &policy, &scm, policy.action_of(s0));
        let f1 = scm.by_name("f:0").unwrap();
        let f2 = scm.by_name("f:1").unwrap();
        let query = CausalQuery::new(vec![f1, f2], event);
        let factors = [f1, f2];
        assert!(oracle_weak_cause_in(&scm, &query, &[f1], &factors, 1 << 20).unwrap());
        assert!(!oracle_weak_cause_in(&scm, &query, &[f2], &factors, 1 << 20).unwrap());
    }

    #[test]
    fn budget_overflow_is_explicit() {
        let (scm, x, e) = copy_chain();
        let query = CausalQuery::new(
            vec![x],
            Event(vec![Literal {
                var: e,
                value: Value::Bool(true),
                negated: false,
            }]),
        );
        let err = oracle_weak_cause_with_budget(&scm, &query, &[x], 2).unwrap_err();
        assert!(matches!(err, InferenceError::EnumerationBudget(2)));
    }
}
