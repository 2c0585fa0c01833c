//! Value iteration, policy evaluation and finite-horizon recursion.

use super::model::{ActionId, MdpError, MdpModel, Policy, StateId, ValueFunction};
use crate::par;

const MAX_SWEEPS: usize = 2_000_000;

/// Q(s, a) under the given value estimate.
fn q_value(mdp: &MdpModel, values: &[f64], s: StateId, a: ActionId) -> f64 {
    mdp.row(s, a)
        .iter()
        .map(|e| e.probability * (e.reward + mdp.discount() * values[e.successor.0]))
        .sum()
}

/// One Bellman backup: the max Q over actions and its argmax.
/// Ties break toward the lowest action index.
fn backup(mdp: &MdpModel, values: &[f64], s: StateId) -> (f64, ActionId) {
    let mut best = f64::NEG_INFINITY;
    let mut best_a = ActionId(0);
    for a in 0..mdp.num_actions() {
        let q = q_value(mdp, values, s, ActionId(a));
        if q > best {
            best = q;
            best_a = ActionId(a);
        }
    }
    (best, best_a)
}

fn sweep_values<F>(mdp: &MdpModel, values: &[f64], per_state: F) -> Vec<f64>
where
    F: Fn(StateId) -> f64 + Sync + Send,
{
    let _ = (mdp, values);
    par::map_range(values.len(), |s| per_state(StateId(s)))
}

/// Solves the MDP by synchronous value iteration.
///
/// Stops once the sup-norm change between sweeps drops to `tolerance`; the
/// returned residual is that final change. Because the backup is a
/// γ-contraction, the returned values then satisfy a Bellman residual of at
/// most `tolerance` as well. The greedy policy breaks ties toward the lowest
/// action index.
pub fn solve_value_iteration(
    mdp: &MdpModel,
    tolerance: f64,
) -> Result<(ValueFunction, Policy), MdpError> {
    if tolerance <= 0.0 {
        return Err(MdpError::BadTolerance(tolerance));
    }
    let n = mdp.num_states();
    let mut values = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let next = sweep_values(mdp, &values, |s| backup(mdp, &values, s).0);
        residual = values
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        if residual <= tolerance {
            let actions = values
                .iter()
                .enumerate()
                .map(|(s, _)| backup(mdp, &values, StateId(s)).1)
                .collect();
            return Ok((ValueFunction { values, residual }, Policy { actions }));
        }
    }
    let _ = residual;
    Err(MdpError::NoConvergence(MAX_SWEEPS))
}

/// Fixed point of the policy-restricted Bellman operator, to `tolerance`.
pub fn evaluate_policy(
    mdp: &MdpModel,
    policy: &Policy,
    tolerance: f64,
) -> Result<ValueFunction, MdpError> {
    if tolerance <= 0.0 {
        return Err(MdpError::BadTolerance(tolerance));
    }
    policy.check_total(mdp)?;
    let n = mdp.num_states();
    let mut values = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        let next = sweep_values(mdp, &values, |s| {
            q_value(mdp, &values, s, policy.action_of(s))
        });
        let residual = values
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        if residual <= tolerance {
            return Ok(ValueFunction { values, residual });
        }
    }
    Err(MdpError::NoConvergence(MAX_SWEEPS))
}

/// h-step finite-horizon values by direct recursion on the original MDP,
/// terminal values zero. Returns V_0 where V_0 is the value with `h` steps
/// to go at the root.
pub fn finite_horizon_values(mdp: &MdpModel, h: usize) -> Vec<Vec<f64>> {
    let n = mdp.num_states();
    // steps_to_go = 0 .. h
    let mut table = vec![vec![0.0; n]; h + 1];
    for k in 1..=h {
        let (prev, cur) = {
            let (a, b) = table.split_at_mut(k);
            (&a[k - 1], &mut b[0])
        };
        for s in 0..n {
            cur[s] = backup_with(mdp, prev, StateId(s)).0;
        }
    }
    table
}

fn backup_with(mdp: &MdpModel, values: &[f64], s: StateId) -> (f64, ActionId) {
    backup(mdp, values, s)
}

/// The optimal action at `s0` with exactly `h` steps to go (h ≥ 1),
/// computed by direct finite-horizon recursion. Ties break low.
pub fn finite_horizon_action(mdp: &MdpModel, s0: StateId, h: usize) -> ActionId {
    assert!(h >= 1, "finite-horizon action needs at least one step");
    let table = finite_horizon_values(mdp, h - 1);
    backup_with(mdp, &table[h - 1], s0).1
}

/// Backward induction over a layered MDP: the optimal action at the root
/// with terminal values zero at the deepest layer. Ties break low.
pub fn backward_induction(mdp: &MdpModel, layered: &super::LayeredMdp) -> ActionId {
    let depth = layered.layers.len() - 1;
    // values per (depth, state); deepest layer is terminal with value 0
    let mut values: Vec<std::collections::BTreeMap<StateId, f64>> = layered
        .layers
        .iter()
        .map(|layer| layer.iter().map(|&s| (s, 0.0)).collect())
        .collect();
    let mut root_action = ActionId(0);
    for d in (0..depth).rev() {
        let next: Vec<(StateId, f64, ActionId)> = layered.layers[d]
            .iter()
            .map(|&s| {
                let mut best = f64::NEG_INFINITY;
                let mut best_a = ActionId(0);
                for a in 0..mdp.num_actions() {
                    let q: f64 = mdp
                        .row(s, ActionId(a))
                        .iter()
                        .map(|e| {
                            let tail = values[d + 1].get(&e.successor).copied().unwrap_or(0.0);
                            e.probability * (e.reward + mdp.discount() * tail)
                        })
                        .sum();
                    if q > best {
                        best = q;
                        best_a = ActionId(a);
                    }
                }
                (s, best, best_a)
            })
            .collect();
        for (s, v, a) in next {
            values[d].insert(s, v);
            if d == 0 && s == layered.root {
                root_action = a;
            }
        }
    }
    root_action
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn two_state_chain_solves_by_hand() {
        // s0 -a-> s1 reward 1, s0 -b-> s1 reward 0, s1 absorbing reward 0
        let mdp = testkit::two_state_mdp(0.9);
        let (vf, pi) = solve_value_iteration(&mdp, 1e-10).unwrap();
        assert!((vf.value(StateId(0)) - 1.0).abs() < 1e-9);
        assert!(vf.value(StateId(1)).abs() < 1e-9);
        assert_eq!(pi.action_of(StateId(0)), ActionId(0)); // action a
    }

    #[test]
    fn zero_rewards_fix_point_is_zero() {
        let mdp = testkit::zero_reward_mdp();
        let (vf, pi) = solve_value_iteration(&mdp, 1e-10).unwrap();
        assert!(vf.values.iter().all(|v| v.abs() < 1e-9));
        // tie-break: first action everywhere
        assert!(pi.actions.iter().all(|a| *a == ActionId(0)));
    }

    #[test]
    fn self_loop_geometric_series() {
        let mdp = testkit::self_loop_mdp(0.5);
        let (vf, _) = solve_value_iteration(&mdp, 1e-12).unwrap();
        assert!((vf.value(StateId(0)) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn policy_evaluation_matches_hand_result() {
        let mdp = testkit::two_state_mdp(0.9);
        let pi_b = Policy {
            actions: vec![ActionId(1), ActionId(0)],
        };
        let vf = evaluate_policy(&mdp, &pi_b, 1e-10).unwrap();
        assert!(vf.value(StateId(0)).abs() < 1e-9);
    }

    #[test]
    fn optimal_policy_evaluation_matches_value_iteration() {
        let mdp = testkit::two_state_mdp(0.9);
        let tol = 1e-10;
        let (vf, pi) = solve_value_iteration(&mdp, tol).unwrap();
        let vf_pi = evaluate_policy(&mdp, &pi, tol).unwrap();
        for s in 0..mdp.num_states() {
            assert!((vf.values[s] - vf_pi.values[s]).abs() <= 2.0 * tol);
        }
    }

    #[test]
    fn zero_reward_any_policy_is_zero() {
        let mdp = testkit::zero_reward_mdp();
        let pi = Policy {
            actions: vec![ActionId(1); mdp.num_states()],
        };
        let vf = evaluate_policy(&mdp, &pi, 1e-10).unwrap();
        assert!(vf.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let mdp = testkit::two_state_mdp(0.9);
        assert!(solve_value_iteration(&mdp, 0.0).is_err());
        assert!(evaluate_policy(&mdp, &testkit::greedy(&mdp), -1.0).is_err());
    }
}
