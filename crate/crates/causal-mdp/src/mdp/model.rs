//! Core MDP model types and validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that transition rows are normalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Index of a state in the canonical row-major factor encoding.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct StateId(pub usize);

/// Index of an action in the model's action list.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct ActionId(pub usize);

/// A named finite domain; one per state factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    /// Ordered list of values the factor can take.
    pub values: Vec<String>,
}

/// One sparse transition: successor, probability, and the reward collected
/// on the transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEntry {
    pub successor: StateId,
    pub probability: f64,
    pub reward: f64,
}

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("factor `{0}` has an empty domain")]
    EmptyFactorDomain(String),
    #[error("model has no factors")]
    NoFactors,
    #[error("model has no actions")]
    NoActions,
    #[error("discount {0} outside [0, 1)")]
    BadDiscount(f64),
    #[error("transition row for state {state:?} action {action:?} sums to {sum}, not 1")]
    UnnormalizedRow {
        state: StateId,
        action: ActionId,
        sum: f64,
    },
    #[error("probability {p} for state {state:?} action {action:?} outside [0, 1]")]
    BadProbability {
        state: StateId,
        action: ActionId,
        p: f64,
    },
    #[error("start distribution sums to {0}, not 1")]
    UnnormalizedStart(f64),
    #[error("state index {0} out of range (|S| = {1})")]
    StateOutOfRange(usize, usize),
    #[error("action index {0} out of range (|A| = {1})")]
    ActionOutOfRange(usize, usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("value iteration failed to converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("policy is not total: no action for state {0:?}")]
    PartialPolicy(StateId),
    #[error("unknown factor value `{value}` for factor `{factor}`")]
    UnknownFactorValue { factor: String, value: String },
    #[error("model file: {0}")]
    File(String),
}

/// A factored MDP with sparse transition/reward rows.
///
/// The state space is the full product of the factor domains. A state index
/// encodes one value per factor in row-major order (first factor slowest).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpModel {
    factors: Vec<Factor>,
    actions: Vec<String>,
    /// `rows[s][a]` lists the positive-probability successors of (s, a).
    rows: Vec<Vec<Vec<TransitionEntry>>>,
    discount: f64,
    /// Start distribution, dense over states.
    start: Vec<f64>,
}

impl MdpModel {
    /// Builds and validates a model from parts. `rows` must already be the
    /// dense-outer/sparse-inner layout described on the type.
    pub fn new(
        factors: Vec<Factor>,
        actions: Vec<String>,
        rows: Vec<Vec<Vec<TransitionEntry>>>,
        discount: f64,
        start: Vec<f64>,
    ) -> Result<Self, MdpError> {
        let model = Self {
            factors,
            actions,
            rows,
            discount,
            start,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), MdpError> {
        if self.factors.is_empty() {
            return Err(MdpError::NoFactors);
        }
        for f in &self.factors {
            if f.values.is_empty() {
                return Err(MdpError::EmptyFactorDomain(f.name.clone()));
            }
        }
        if self.actions.is_empty() {
            return Err(MdpError::NoActions);
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(MdpError::BadDiscount(self.discount));
        }
        let n = self.num_states();
        if self.rows.len() != n {
            return Err(MdpError::File(format!(
                "expected {n} transition rows, found {}",
                self.rows.len()
            )));
        }
        for (s, per_action) in self.rows.iter().enumerate() {
            if per_action.len() != self.actions.len() {
                return Err(MdpError::File(format!(
                    "state {s}: expected {} action rows, found {}",
                    self.actions.len(),
                    per_action.len()
                )));
            }
            for (a, row) in per_action.iter().enumerate() {
                let mut sum = 0.0;
                for e in row {
                    if !(0.0..=1.0).contains(&e.probability) {
                        return Err(MdpError::BadProbability {
                            state: StateId(s),
                            action: ActionId(a),
                            p: e.probability,
                        });
                    }
                    if e.successor.0 >= n {
                        return Err(MdpError::StateOutOfRange(e.successor.0, n));
                    }
                    sum += e.probability;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(MdpError::UnnormalizedRow {
                        state: StateId(s),
                        action: ActionId(a),
                        sum,
                    });
                }
            }
        }
        if self.start.len() != n {
            return Err(MdpError::File(format!(
                "start distribution has {} entries, expected {n}",
                self.start.len()
            )));
        }
        let s: f64 = self.start.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(MdpError::UnnormalizedStart(s));
        }
        Ok(())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.0]
    }

    pub fn num_states(&self) -> usize {
        self.factors.iter().map(|f| f.values.len()).product()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    /// The start state with the highest probability; ties break toward the
    /// lowest index. Used to root the factor model's defaults.
    pub fn likely_start(&self) -> StateId {
        let mut best = 0;
        for (i, p) in self.start.iter().enumerate() {
            if *p > self.start[best] {
                best = i;
            }
        }
        StateId(best)
    }

    /// Positive-probability successors of (s, a).
    pub fn row(&self, s: StateId, a: ActionId) -> &[TransitionEntry] {
        &self.rows[s.0][a.0]
    }

    /// T(s, a, s'): zero when the triple is not listed.
    pub fn transition(&self, s: StateId, a: ActionId, succ: StateId) -> f64 {
        self.rows[s.0][a.0]
            .iter()
            .find(|e| e.successor == succ)
            .map_or(0.0, |e| e.probability)
    }

    /// R(s, a, s') for a listed triple; the row default (0) otherwise.
    pub fn reward(&self, s: StateId, a: ActionId, succ: StateId) -> f64 {
        self.rows[s.0][a.0]
            .iter()
            .find(|e| e.successor == succ)
            .map_or(0.0, |e| e.reward)
    }

    /// Encodes a per-factor value-index assignment into a state index.
    /// Row-major: the first factor varies slowest.
    pub fn state_of_factors(&self, values: &[usize]) -> StateId {
        debug_assert_eq!(values.len(), self.factors.len());
        let mut idx = 0;
        for (f, &v) in self.factors.iter().zip(values) {
            debug_assert!(v < f.values.len());
            idx = idx * f.values.len() + v;
        }
        StateId(idx)
    }

    /// Decodes a state index into per-factor value indices.
    pub fn factors_of_state(&self, s: StateId) -> Vec<usize> {
        let mut rem = s.0;
        let mut out = vec![0; self.factors.len()];
        for (i, f) in self.factors.iter().enumerate().rev() {
            out[i] = rem % f.values.len();
            rem /= f.values.len();
        }
        out
    }

    /// Looks up factor value indices from their names, e.g. `["5", "1", "R", "5"]`.
    pub fn factor_indices_of_names(&self, names: &[String]) -> Result<Vec<usize>, MdpError> {
        self.factors
            .iter()
            .zip(names)
            .map(|(f, v)| {
                f.values.iter().position(|x| x == v).ok_or_else(|| {
                    MdpError::UnknownFactorValue {
                        factor: f.name.clone(),
                        value: v.clone(),
                    }
                })
            })
            .collect()
    }

    /// Human-readable state label, e.g. `x=5,y=1,t=R,c=5`.
    pub fn state_label(&self, s: StateId) -> String {
        let vals = self.factors_of_state(s);
        self.factors
            .iter()
            .zip(&vals)
            .map(|(f, &v)| format!("{}={}", f.name, f.values[v]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A value function together with the final Bellman residual of the solve
/// that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    pub residual: f64,
}

impl ValueFunction {
    pub fn value(&self, s: StateId) -> f64 {
        self.values[s.0]
    }
}

/// A deterministic policy, total over the state space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub actions: Vec<ActionId>,
}

impl Policy {
    pub fn action_of(&self, s: StateId) -> ActionId {
        self.actions[s.0]
    }

    pub fn check_total(&self, mdp: &MdpModel) -> Result<(), MdpError> {
        if self.actions.len() != mdp.num_states() {
            return Err(MdpError::PartialPolicy(StateId(self.actions.len())));
        }
        for (s, a) in self.actions.iter().enumerate() {
            if a.0 >= mdp.num_actions() {
                return Err(MdpError::ActionOutOfRange(a.0, mdp.num_actions()));
            }
            let _ = s;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn state_factor_encoding_round_trips() {
        let mdp = testkit::grid2x3_mdp();
        for s in 0..mdp.num_states() {
            let vals = mdp.factors_of_state(StateId(s));
            assert_eq!(mdp.state_of_factors(&vals), StateId(s));
        }
    }

    #[test]
    fn first_factor_varies_slowest() {
        let mdp = testkit::grid2x3_mdp();
        // factors: f0 with 2 values, f1 with 3 values
        assert_eq!(mdp.state_of_factors(&[0, 0]), StateId(0));
        assert_eq!(mdp.state_of_factors(&[0, 2]), StateId(2));
        assert_eq!(mdp.state_of_factors(&[1, 0]), StateId(3));
    }

    #[test]
    fn unnormalized_row_rejected() {
        let err = testkit::broken_row_mdp().unwrap_err();
        assert!(matches!(err, MdpError::UnnormalizedRow { .. }));
    }
}
