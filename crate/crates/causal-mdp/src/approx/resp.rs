//! Mean responsibility search.
//!
//! Works over an abstract candidate space so the same engine scores state
//! factors (flips checked against the policy directly) and discretized
//! value-model inputs such as reward bounds or transition rules (flips
//! checked through the layered model).
//!
//! For each candidate subset, witness sets of growing size β are enumerated;
//! a witness assignment that already flips the action through one of its
//! sub-witnesses is screened out (it cannot certify the subset), and the
//! remaining assignments accumulate counterfactual flip mass. The first β
//! with positive score accepts the subset.

use super::config::{ApproxConfig, ApproxError, ResponsibilityScore};
use crate::exact::CauseSet;
use crate::mdp::{MdpModel, Policy, StateId};
use crate::par;
use crate::scm::Value;
use std::collections::BTreeMap;

/// A finite candidate space: named candidates with finite domains, their
/// actual values and display labels for those.
#[derive(Debug, Clone)]
pub struct CandidateSpace {
    pub names: Vec<String>,
    pub domains: Vec<Vec<Value>>,
    pub actual: Vec<Value>,
    pub actual_labels: Vec<String>,
}

impl CandidateSpace {
    fn domain_product(&self, members: &[usize]) -> f64 {
        members.iter().map(|&i| self.domains[i].len() as f64).product()
    }
}

/// Partial assignment over a candidate space, by candidate index.
pub type SpaceAssignment = BTreeMap<usize, Value>;

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k > pool.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        // advance the combination
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] != pos + pool.len() - k {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn assignments_over(space: &CandidateSpace, members: &[usize]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for &m in members {
        let mut next = Vec::with_capacity(out.len() * space.domains[m].len());
        for partial in &out {
            for &v in &space.domains[m] {
                let mut row = partial.clone();
                row.push(v);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Scores one candidate subset at one witness size over explicit witness
/// draws; returns the accumulated flip mass and trial count.
fn score_subset_at_beta<F>(
    space: &CandidateSpace,
    subset: &[usize],
    witness_draws: &[(Vec<usize>, Vec<Value>)],
    z_empty: bool,
    flip: &F,
) -> (f64, u64)
where
    F: Fn(&SpaceAssignment) -> bool,
{
    let mut sigma = 0.0;
    let mut trials = 0u64;
    let d_f = space.domain_product(subset);
    let others: Vec<usize> = (0..space.names.len())
        .filter(|i| !subset.contains(i))
        .collect();
    'witness: for (w_vars, w_vals) in witness_draws {
        trials += 1;
        // Sub-witness guard: if any restriction of the witness already flips
        // the action, this assignment cannot certify the subset.
        for mask in 0u64..(1u64 << w_vars.len()) {
            let mut iv: SpaceAssignment = BTreeMap::new();
            for (i, (&v, &val)) in w_vars.iter().zip(w_vals).enumerate() {
                if mask >> i & 1 == 1 {
                    iv.insert(v, val);
                }
            }
            if !z_empty {
                for &o in &others {
                    iv.entry(o).or_insert(space.actual[o]);
                }
            }
            if flip(&iv) {
                continue 'witness;
            }
        }
        // Count counterfactual flips over the subset's alternates.
        for alt in assignments_over(space, subset) {
            if alt
                .iter()
                .zip(subset)
                .all(|(v, &m)| *v == space.actual[m])
            {
                continue;
            }
            let mut iv: SpaceAssignment = BTreeMap::new();
            for (&m, &v) in subset.iter().zip(&alt) {
                iv.insert(m, v);
            }
            for (&v, &val) in w_vars.iter().zip(w_vals) {
                iv.insert(v, val);
            }
            if !z_empty {
                for &o in &others {
                    iv.entry(o).or_insert(space.actual[o]);
                }
            }
            if flip(&iv) {
                sigma += 1.0 / d_f;
            }
        }
    }
    (sigma, trials)
}

fn exhaustive_draws(space: &CandidateSpace, pool: &[usize], beta: usize) -> Vec<(Vec<usize>, Vec<Value>)> {
    let mut draws = Vec::new();
    for combo in combinations(pool, beta) {
        for vals in assignments_over(space, &combo) {
            draws.push((combo.clone(), vals));
        }
    }
    draws
}

fn sampled_draws(
    space: &CandidateSpace,
    pool: &[usize],
    beta: usize,
    samples: usize,
    seed: u64,
) -> Vec<(Vec<usize>, Vec<Value>)> {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut pool: Vec<usize> = pool.to_vec();
            pool.shuffle(&mut rng);
            let mut combo: Vec<usize> = pool.into_iter().take(beta).collect();
            combo.sort_unstable();
            let vals = combo
                .iter()
                .map(|&m| space.domains[m][rng.gen_range(0..space.domains[m].len())])
                .collect();
            (combo, vals)
        })
        .collect()
}

/// Derives a per-candidate-subset RNG seed from the base seed.
fn subset_seed(base: u64, mask: u64) -> u64 {
    // splitmix-style mix so neighbouring masks decorrelate
    let mut z = base ^ mask.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs the responsibility search over every non-empty candidate subset.
/// Returns accepted subsets (member indices, canonical order) with scores.
pub fn responsibility_search<F>(
    space: &CandidateSpace,
    config: &ApproxConfig,
    sampled: bool,
    flip: F,
) -> Result<Vec<(Vec<usize>, ResponsibilityScore)>, ApproxError>
where
    F: Fn(&SpaceAssignment) -> bool + Sync + Send,
{
    config.validate()?;
    if sampled && config.samples.is_none() {
        return Err(ApproxError::SamplesRequired);
    }
    let n = space.names.len();
    let masks: Vec<u64> = (1u64..(1u64 << n)).collect();
    let results = par::map_collect(&masks, |&mask| {
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let pool: Vec<usize> = (0..n).filter(|i| !subset.contains(i)).collect();
        let beta_cap = config.eta.unwrap_or(pool.len()).min(pool.len());
        for beta in 0..=beta_cap {
            let draws = if sampled {
                sampled_draws(
                    space,
                    &pool,
                    beta,
                    config.samples.expect("checked above"),
                    subset_seed(config.seed, mask),
                )
            } else {
                exhaustive_draws(space, &pool, beta)
            };
            let (sigma, trials) = score_subset_at_beta(space, &subset, &draws, config.z_empty, &flip);
            if trials == 0 {
                continue;
            }
            let rho = sigma / (trials as f64 * (1.0 + beta as f64));
            if rho > 0.0 && rho >= config.epsilon {
                return Some((
                    subset,
                    ResponsibilityScore {
                        rho,
                        sigma,
                        trials,
                        beta,
                    },
                ));
            }
        }
        None
    });
    Ok(results.into_iter().flatten().collect())
}

/// Builds the candidate space of an MDP's state factors at a current state,
/// restricted to the given factor indices.
pub fn factor_space(mdp: &MdpModel, s0: StateId, factors: &[usize]) -> CandidateSpace {
    let values = mdp.factors_of_state(s0);
    CandidateSpace {
        names: factors
            .iter()
            .map(|&i| mdp.factors()[i].name.clone())
            .collect(),
        domains: factors
            .iter()
            .map(|&i| (0..mdp.factors()[i].values.len()).map(Value::Index).collect())
            .collect(),
        actual: factors.iter().map(|&i| Value::Index(values[i])).collect(),
        actual_labels: factors
            .iter()
            .map(|&i| mdp.factors()[i].values[values[i]].clone())
            .collect(),
    }
}

fn causes_from(
    space: &CandidateSpace,
    accepted: Vec<(Vec<usize>, ResponsibilityScore)>,
) -> (Vec<CauseSet>, Vec<ResponsibilityScore>) {
    let mut causes = Vec::new();
    let mut scores = Vec::new();
    for (subset, score) in accepted {
        causes.push(CauseSet {
            variables: subset.iter().map(|&m| space.names[m].clone()).collect(),
            values: subset
                .iter()
                .map(|&m| space.actual_labels[m].clone())
                .collect(),
            witness: None,
            responsibility: Some(score.rho),
            minimality_relative: false,
        });
        scores.push(score);
    }
    (causes, scores)
}

/// Exhaustive responsibility scoring of state-factor subsets against the
/// solved policy's action at `s0`.
pub fn mean_resp(
    mdp: &MdpModel,
    policy: &Policy,
    s0: StateId,
    candidates: &[usize],
) -> Result<(Vec<CauseSet>, Vec<ResponsibilityScore>), ApproxError> {
    mean_resp_with(mdp, policy, s0, candidates, &ApproxConfig::default())
}

/// As [`mean_resp`] honouring the η/ε restrictions of a config.
pub fn mean_resp_with(
    mdp: &MdpModel,
    policy: &Policy,
    s0: StateId,
    candidates: &[usize],
    config: &ApproxConfig,
) -> Result<(Vec<CauseSet>, Vec<ResponsibilityScore>), ApproxError> {
    let space = factor_space(mdp, s0, candidates);
    let flip = factor_flip(mdp, policy, s0, candidates);
    let accepted = responsibility_search(&space, config, false, flip)?;
    Ok(causes_from(&space, accepted))
}

/// Flip predicate over factor subsets: does overriding the factors move the
/// state somewhere the policy acts differently?
pub fn factor_flip<'a>(
    mdp: &'a MdpModel,
    policy: &'a Policy,
    s0: StateId,
    candidates: &'a [usize],
) -> impl Fn(&SpaceAssignment) -> bool + Sync + Send + 'a {
    let base = mdp.factors_of_state(s0);
    let actual_action = policy.action_of(s0);
    move |assignment: &SpaceAssignment| {
        let mut values = base.clone();
        for (&member, &val) in assignment {
            values[candidates[member]] = val.as_index();
        }
        let state = mdp.state_of_factors(&values);
        policy.action_of(state) != actual_action
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn toy_policy_scores_by_hand() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let s0 = StateId(2); // (f1, f2) = (1, 0)
        let (causes, scores) = mean_resp(&mdp, &policy, s0, &[0, 1]).unwrap();
        let by_name: BTreeMap<Vec<String>, f64> = causes
            .iter()
            .zip(&scores)
            .map(|(c, s)| (c.variables.clone(), s.rho))
            .collect();
        // {f1} accepted at β = 0 with ρ = 0.5
        assert_eq!(by_name[&vec!["f1".to_string()]], 0.5);
        // {f2} rejected at every β
        assert!(!by_name.contains_key(&vec!["f2".to_string()]));
        // {f1, f2} accepted with ρ = 0.5
        assert_eq!(by_name[&vec!["f1".to_string(), "f2".to_string()]], 0.5);
    }

    #[test]
    fn constant_policy_has_no_causes() {
        let mdp = testkit::zero_reward_mdp();
        let policy = testkit::greedy(&mdp); // ties break to action 0 everywhere
        let (causes, _) = mean_resp(&mdp, &policy, StateId(0), &[0]).unwrap();
        assert!(causes.is_empty());
    }

    #[test]
    fn rho_within_bounds() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let (_, scores) = mean_resp(&mdp, &policy, StateId(2), &[0, 1]).unwrap();
        for s in scores {
            assert!(s.rho > 0.0);
            assert!(s.rho <= 1.0 / (1.0 + s.beta as f64));
        }
    }
}
