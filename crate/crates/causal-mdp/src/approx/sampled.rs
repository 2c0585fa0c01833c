//! Sampled responsibility search over factor grids.

use super::config::{ApproxConfig, ApproxError, ResponsibilityScore};
use super::discretize::DiscretizationScheme;
use super::resp::{factor_flip, responsibility_search, CandidateSpace};
use crate::exact::CauseSet;
use crate::mdp::{MdpModel, Policy, StateId};
use crate::scm::Value;

/// Builds the factor candidate space from the scheme's per-factor grids.
/// Every candidate must have a grid; grids map factor value names to domain
/// indices and always include the actual value.
fn gridded_factor_space(
    mdp: &MdpModel,
    s0: StateId,
    candidates: &[usize],
    scheme: &DiscretizationScheme,
) -> Result<CandidateSpace, ApproxError> {
    let values = mdp.factors_of_state(s0);
    let mut names = Vec::new();
    let mut domains = Vec::new();
    let mut actual = Vec::new();
    let mut actual_labels = Vec::new();
    for &i in candidates {
        let factor = &mdp.factors()[i];
        let grid = scheme
            .factors
            .get(&factor.name)
            .ok_or_else(|| ApproxError::MissingGrid(factor.name.clone()))?;
        let mut domain: Vec<Value> = grid
            .iter()
            .map(|name| {
                factor
                    .values
                    .iter()
                    .position(|v| v == name)
                    .map(Value::Index)
                    .ok_or_else(|| ApproxError::MissingGrid(format!("{}={name}", factor.name)))
            })
            .collect::<Result<_, _>>()?;
        domain.push(Value::Index(values[i]));
        domain.sort();
        domain.dedup();
        names.push(factor.name.clone());
        domains.push(domain);
        actual.push(Value::Index(values[i]));
        actual_labels.push(factor.values[values[i]].clone());
    }
    Ok(CandidateSpace {
        names,
        domains,
        actual,
        actual_labels,
    })
}

/// Seeded, sampled replacement for the exhaustive witness enumeration:
/// `config.samples` witness vectors per witness size are drawn from the
/// scheme's grids. Deterministic for a fixed seed, with candidate subsets
/// drawing from independently derived streams so parallel evaluation cannot
/// perturb results.
pub fn mean_resp_sampled(
    mdp: &MdpModel,
    policy: &Policy,
    s0: StateId,
    candidates: &[usize],
    config: &ApproxConfig,
    scheme: &DiscretizationScheme,
) -> Result<(Vec<CauseSet>, Vec<ResponsibilityScore>), ApproxError> {
    if config.samples.is_none() {
        return Err(ApproxError::SamplesRequired);
    }
    let space = gridded_factor_space(mdp, s0, candidates, scheme)?;
    let flip = factor_flip(mdp, policy, s0, candidates);
    let accepted = responsibility_search(&space, config, true, flip)?;
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
    Ok((causes, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::mean_resp;
    use crate::testkit;
    use std::collections::BTreeMap;

    fn toy_scheme(mdp: &MdpModel) -> DiscretizationScheme {
        let mut factors = BTreeMap::new();
        for f in mdp.factors() {
            factors.insert(f.name.clone(), f.values.clone());
        }
        DiscretizationScheme {
            factors,
            ..Default::default()
        }
    }

    #[test]
    fn saturating_samples_match_exhaustive() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let s0 = StateId(2);
        let scheme = toy_scheme(&mdp);
        let config = ApproxConfig {
            samples: Some(512),
            seed: 7,
            ..Default::default()
        };
        let (sampled, _) =
            mean_resp_sampled(&mdp, &policy, s0, &[0, 1], &config, &scheme).unwrap();
        let (exhaustive, _) = mean_resp(&mdp, &policy, s0, &[0, 1]).unwrap();
        let names = |cs: &[CauseSet]| -> Vec<Vec<String>> {
            cs.iter().map(|c| c.variables.clone()).collect()
        };
        assert_eq!(names(&sampled), names(&exhaustive));
    }

    #[test]
    fn same_seed_is_deterministic() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let scheme = toy_scheme(&mdp);
        let config = ApproxConfig {
            samples: Some(16),
            seed: 42,
            ..Default::default()
        };
        let run = || {
            let (c, s) =
                mean_resp_sampled(&mdp, &policy, StateId(2), &[0, 1], &config, &scheme).unwrap();
            (c, s)
        };
        let (c1, s1) = run();
        let (c2, s2) = run();
        assert_eq!(c1, c2);
        assert_eq!(
            s1.iter().map(|s| s.rho).collect::<Vec<_>>(),
            s2.iter().map(|s| s.rho).collect::<Vec<_>>()
        );
    }

    #[test]
    fn zero_flip_candidate_rejected_as_in_exhaustive() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let scheme = toy_scheme(&mdp);
        let config = ApproxConfig {
            samples: Some(64),
            seed: 3,
            ..Default::default()
        };
        let (sampled, _) =
            mean_resp_sampled(&mdp, &policy, StateId(2), &[0, 1], &config, &scheme).unwrap();
        assert!(!sampled
            .iter()
            .any(|c| c.variables == vec!["f2".to_string()]));
    }

    #[test]
    fn missing_grid_is_an_error() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let config = ApproxConfig {
            samples: Some(8),
            ..Default::default()
        };
        let err = mean_resp_sampled(
            &mdp,
            &policy,
            StateId(2),
            &[0, 1],
            &config,
            &DiscretizationScheme::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ApproxError::MissingGrid(_)));
    }
}
