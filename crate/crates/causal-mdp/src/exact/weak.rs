//! Weak-cause determination over a layered causal graph.

use super::query::{CausalQuery, CauseSet, InferenceError, Witness};
use super::recurrence::{layer_zero_tuples, recurrence_step};
use crate::scm::{LayeredCausalGraph, Value, VarId};
use std::collections::BTreeMap;

/// Peak record counts observed while climbing the layers; used to check the
/// one-layer-at-a-time memory bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct InferenceStats {
    pub layers_climbed: usize,
    pub peak_live_records: usize,
}

/// Identifies every non-empty subset of the query's explanans whose actual
/// values are a weak cause of the event.
pub fn determine_weak_causes(
    lcg: &LayeredCausalGraph,
    query: &CausalQuery,
) -> Result<Vec<CauseSet>, InferenceError> {
    determine_weak_causes_with_stats(lcg, query).map(|(c, _)| c)
}

/// As [`determine_weak_causes`], also reporting record-count statistics.
///
/// Seeds records at the event layer, lifts them one layer at a time up to the
/// explanans layer — discarding the previous layer's records after each step
/// — and reports each candidate subset for which some record holds both a
/// defeating assignment and the subset's actual values among the sustained
/// ones.
pub fn determine_weak_causes_with_stats(
    lcg: &LayeredCausalGraph,
    query: &CausalQuery,
) -> Result<(Vec<CauseSet>, InferenceStats), InferenceError> {
    let k = query.validate(lcg)?;
    let mut current = layer_zero_tuples(lcg, &query.event, k)?;
    let mut stats = InferenceStats {
        layers_climbed: 0,
        peak_live_records: current.len(),
    };
    for i in 1..=k {
        let next = recurrence_step(lcg, i, k, &current);
        stats.peak_live_records = stats.peak_live_records.max(current.len() + next.len());
        stats.layers_climbed = i;
        current = next;
    }

    let scm = &lcg.scm;
    let mut causes = Vec::new();
    for mask in 1u64..(1u64 << query.explanans.len()) {
        let subset: Vec<VarId> = query
            .explanans
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let actual: Vec<Value> = subset.iter().map(|&v| scm.actual(v)).collect();
        let hit = current
            .iter()
            .find(|t| t.scope == subset && !t.defeat.is_empty() && t.sustain.contains(&actual));
        if let Some(tuple) = hit {
            causes.push(CauseSet {
                variables: subset.iter().map(|&v| scm.var(v).name.clone()).collect(),
                values: actual.iter().map(|v| v.to_string()).collect(),
                witness: Some(Witness {
                    vars: tuple
                        .witness_vars
                        .iter()
                        .map(|&v| scm.var(v).name.clone())
                        .collect(),
                    values: tuple.witness_values.clone(),
                    defeating: tuple
                        .defeat
                        .iter()
                        .next()
                        .cloned()
                        .expect("non-certifying records were pruned"),
                }),
                responsibility: None,
                minimality_relative: false,
            });
        }
    }
    Ok((causes, stats))
}

/// Replays a cause's witness certificate: intervening the witness variables
/// at their recorded values and the cause variables at the defeating
/// assignment must make the event false.
pub fn witness_defeats_event(
    lcg: &LayeredCausalGraph,
    query: &CausalQuery,
    cause: &CauseSet,
) -> bool {
    let scm = &lcg.scm;
    let Some(witness) = &cause.witness else {
        return false;
    };
    let mut iv: BTreeMap<VarId, Value> = BTreeMap::new();
    for (name, &val) in witness.vars.iter().zip(&witness.values) {
        let Some(v) = scm.by_name(name) else {
            return false;
        };
        iv.insert(v, val);
    }
    for (name, &val) in cause.variables.iter().zip(&witness.defeating) {
        let Some(v) = scm.by_name(name) else {
            return false;
        };
        iv.insert(v, val);
    }
    let world = lcg.evaluate(&iv);
    !query.event.holds(&world)
}
