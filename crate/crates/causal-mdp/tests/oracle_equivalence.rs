//! The layered recurrence must agree with the brute-force oracle on every
//! candidate subset, across randomly generated layered models.

use causal_mdp::exact::{
    determine_weak_causes, oracle_weak_cause, witness_defeats_event,
};
use causal_mdp::par;
use causal_mdp::testkit::random_layered_scm;
use rand::SeedableRng;
use std::collections::BTreeSet;

fn subset_names(lcg: &causal_mdp::LayeredCausalGraph, vars: &[causal_mdp::scm::VarId]) -> Vec<String> {
    vars.iter().map(|&v| lcg.scm.var(v).name.clone()).collect()
}

#[test]
fn recurrence_matches_oracle_on_random_layered_models() {
    let instances = 250;
    let failures: Vec<String> = par::map_range(instances, |i| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let (lcg, query) = random_layered_scm(&mut rng);
        let weak = determine_weak_causes(&lcg, &query).expect("query is valid");
        let weak_sets: BTreeSet<Vec<String>> =
            weak.iter().map(|c| c.variables.clone()).collect();

        // every returned witness must replay to ¬φ
        for cause in &weak {
            if !witness_defeats_event(&lcg, &query, cause) {
                return Some(format!(
                    "instance {i}: witness for {:?} does not defeat the event",
                    cause.variables
                ));
            }
        }

        for mask in 1u64..(1u64 << query.explanans.len()) {
            let subset: Vec<causal_mdp::scm::VarId> = query
                .explanans
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            let expected = oracle_weak_cause(&lcg.scm, &query, &subset).expect("within budget");
            let got = weak_sets.contains(&subset_names(&lcg, &subset));
            if expected != got {
                return Some(format!(
                    "instance {i}: subset {:?} oracle={expected} recurrence={got}",
                    subset_names(&lcg, &subset),
                ));
            }
        }
        None
    })
    .into_iter()
    .flatten()
    .collect();
    assert!(
        failures.is_empty(),
        "{} disagreements, first: {}",
        failures.len(),
        failures[0]
    );
}
