//! JSON model files.
//!
//! Unlisted transitions are probability 0; unlisted rewards take the declared
//! default. Parsing is strict: unknown fields are rejected.

use super::model::{ActionId, Factor, MdpError, MdpModel, StateId, TransitionEntry};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub state: usize,
    pub action: usize,
    pub successor: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    pub state: usize,
    pub action: usize,
    pub successor: usize,
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardTable {
    pub default: f64,
    #[serde(default)]
    pub entries: Vec<RewardSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartSpec {
    pub state: usize,
    pub p: f64,
}

/// On-disk MDP document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpFile {
    pub factors: Vec<FactorSpec>,
    pub actions: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
    pub rewards: RewardTable,
    pub gamma: f64,
    pub start: Vec<StartSpec>,
}

impl MdpFile {
    pub fn from_json(text: &str) -> Result<Self, MdpError> {
        serde_json::from_str(text).map_err(|e| MdpError::File(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("MDP file serializes")
    }

    /// Validates and assembles the in-memory model.
    pub fn build(&self) -> Result<MdpModel, MdpError> {
        let factors: Vec<Factor> = self
            .factors
            .iter()
            .map(|f| Factor {
                name: f.name.clone(),
                values: f.domain.clone(),
            })
            .collect();
        let n: usize = factors.iter().map(|f| f.values.len()).product();
        let na = self.actions.len();
        if na == 0 {
            return Err(MdpError::NoActions);
        }
        let mut rows: Vec<Vec<Vec<TransitionEntry>>> = vec![vec![Vec::new(); na]; n];
        for t in &self.transitions {
            if t.state >= n || t.successor >= n {
                return Err(MdpError::StateOutOfRange(t.state.max(t.successor), n));
            }
            if t.action >= na {
                return Err(MdpError::ActionOutOfRange(t.action, na));
            }
            rows[t.state][t.action].push(TransitionEntry {
                successor: StateId(t.successor),
                probability: t.p,
                reward: self.rewards.default,
            });
        }
        for r in &self.rewards.entries {
            if r.state >= n || r.successor >= n {
                return Err(MdpError::StateOutOfRange(r.state.max(r.successor), n));
            }
            if r.action >= na {
                return Err(MdpError::ActionOutOfRange(r.action, na));
            }
            let row = &mut rows[r.state][r.action];
            match row.iter_mut().find(|e| e.successor == StateId(r.successor)) {
                Some(e) => e.reward = r.r,
                None => {
                    return Err(MdpError::File(format!(
                        "reward listed for missing transition ({}, {}, {})",
                        r.state, r.action, r.successor
                    )))
                }
            }
        }
        for row in rows.iter_mut().flatten() {
            row.sort_by_key(|e| e.successor);
        }
        let mut start = vec![0.0; n];
        for s in &self.start {
            if s.state >= n {
                return Err(MdpError::StateOutOfRange(s.state, n));
            }
            start[s.state] += s.p;
        }
        MdpModel::new(factors, self.actions.clone(), rows, self.gamma, start)
    }

    /// Inverse of [`MdpFile::build`] for an existing model.
    pub fn from_model(mdp: &MdpModel, reward_default: f64) -> Self {
        let mut transitions = Vec::new();
        let mut entries = Vec::new();
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                for e in mdp.row(StateId(s), ActionId(a)) {
                    transitions.push(TransitionSpec {
                        state: s,
                        action: a,
                        successor: e.successor.0,
                        p: e.probability,
                    });
                    if e.reward != reward_default {
                        entries.push(RewardSpec {
                            state: s,
                            action: a,
                            successor: e.successor.0,
                            r: e.reward,
                        });
                    }
                }
            }
        }
        MdpFile {
            factors: mdp
                .factors()
                .iter()
                .map(|f| FactorSpec {
                    name: f.name.clone(),
                    domain: f.values.clone(),
                })
                .collect(),
            actions: mdp.actions().to_vec(),
            transitions,
            rewards: RewardTable {
                default: reward_default,
                entries,
            },
            gamma: mdp.discount(),
            start: mdp
                .start()
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(state, &p)| StartSpec { state, p })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"factors": [], "actions": [], "transitions": [],
            "rewards": {"default": 0.0}, "gamma": 0.9, "start": [], "extra": 1}"#;
        assert!(MdpFile::from_json(text).is_err());
    }

    #[test]
    fn file_round_trip_preserves_model() {
        let mdp = testkit::two_state_mdp(0.9);
        let file = MdpFile::from_model(&mdp, 0.0);
        let rebuilt = MdpFile::from_json(&file.to_json()).unwrap().build().unwrap();
        assert_eq!(rebuilt.num_states(), mdp.num_states());
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                assert_eq!(
                    rebuilt.row(StateId(s), ActionId(a)),
                    mdp.row(StateId(s), ActionId(a))
                );
            }
        }
    }

    #[test]
    fn reward_for_missing_transition_rejected() {
        let mdp = testkit::two_state_mdp(0.9);
        let mut file = MdpFile::from_model(&mdp, 0.0);
        file.rewards.entries.push(RewardSpec {
            state: 1,
            action: 0,
            successor: 0,
            r: 3.0,
        });
        assert!(file.build().is_err());
    }
}
