//! The layer recurrence for weak-cause identification.
//!
//! Layer 0 seeds one record per (candidate subset, witness assignment): which
//! candidate-subset assignments defeat the event through that witness, and
//! which survive every sub-witness and every actual-value pinning. The
//! recurrence lifts records one layer at a time: an assignment over a
//! layer-i subset qualifies according to where it drives the downstream
//! record's variables. Records that can no longer certify anything (no
//! defeating assignment, or no sustained one) are dropped, and duplicates
//! are merged keeping the first witness chain found in canonical order.

use super::enumerate::{pick, Assignments};
use super::query::InferenceError;
use crate::scm::{Event, LayeredCausalGraph, Value, VarId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One recurrence record: for the variable subset `scope` of a layer, the
/// assignments that can defeat the downstream event via this record's
/// witness (`defeat`) and those that sustain it against all sub-witnesses
/// (`sustain`).
///
/// The witness accumulates the per-layer complements along the whole chain
/// that produced the record, so previous layers can be discarded as the
/// recurrence climbs: only one layer of records is live at a time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RTuple {
    pub scope: Vec<VarId>,
    pub defeat: BTreeSet<Vec<Value>>,
    pub sustain: BTreeSet<Vec<Value>>,
    /// Union of the witness assignments of this record's chain.
    pub witness_vars: Vec<VarId>,
    pub witness_values: Vec<Value>,
}

/// Values of `targets` (one layer below `upper`'s layer) given a partial
/// assignment of the upper layer; unassigned or severed parents read their
/// actual values.
fn eval_targets(
    lcg: &LayeredCausalGraph,
    targets: &[VarId],
    upper: &BTreeMap<VarId, Value>,
) -> Vec<Value> {
    let scm = &lcg.scm;
    targets
        .iter()
        .map(|&v| {
            let parents = scm.parents(v);
            let vals: Vec<Value> = parents
                .iter()
                .enumerate()
                .map(|(pos, &p)| {
                    if lcg.is_live(v, pos) {
                        upper.get(&p).copied().unwrap_or_else(|| scm.actual(p))
                    } else {
                        scm.actual(p)
                    }
                })
                .collect();
            scm.eval_equation(v, &vals)
        })
        .collect()
}

fn dedup_push(
    out: &mut Vec<RTuple>,
    seen: &mut BTreeSet<(Vec<VarId>, Vec<Vec<Value>>, Vec<Vec<Value>>)>,
    tuple: RTuple,
) {
    let key = (
        tuple.scope.clone(),
        tuple.defeat.iter().cloned().collect(),
        tuple.sustain.iter().cloned().collect(),
    );
    if seen.insert(key) {
        out.push(tuple);
    }
}

/// Seeds the recurrence at the event layer. `explanans_layer` is the layer
/// index of the query's X; pinned subsets Ẑ range over the scope only on
/// layers below it.
///
/// Scopes are restricted to supersets of the event's variables: an event
/// variable left to a record's witness side would have its flow under
/// upstream sub-witnesses silently replaced by a pinned value, making the
/// sustain verdict too permissive. Because event variables are sinks of the
/// layered graph, any witness pinning one shrinks to a witness that does
/// not, so the restriction loses no certificates.
pub fn layer_zero_tuples(
    lcg: &LayeredCausalGraph,
    event: &Event,
    explanans_layer: usize,
) -> Result<Vec<RTuple>, InferenceError> {
    let scm = &lcg.scm;
    let event_vars = event.vars();
    let rest: Vec<VarId> = lcg
        .layer(0)
        .iter()
        .copied()
        .filter(|v| !event_vars.contains(v))
        .collect();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for mask in 0u64..(1u64 << rest.len()) {
        let mut scope = event_vars.clone();
        scope.extend(pick(&rest, mask));
        scope.sort();
        let comp: Vec<VarId> = rest.iter().copied().filter(|v| !scope.contains(v)).collect();
        let zhat_pool: Vec<VarId> = if explanans_layer == 0 {
            Vec::new()
        } else {
            scope.clone()
        };
        for w in Assignments::new(scm, &comp) {
            // Defeating assignments: the event fails under (scope = p, comp = w).
            let mut defeat = BTreeSet::new();
            for p in Assignments::new(scm, &scope) {
                let mut world: BTreeMap<VarId, Value> = BTreeMap::new();
                for (&v, &val) in scope.iter().zip(&p) {
                    world.insert(v, val);
                }
                for (&v, &val) in comp.iter().zip(&w) {
                    world.insert(v, val);
                }
                if !holds_on_layer(event, scm, &world) {
                    defeat.insert(p);
                }
            }
            if defeat.is_empty() {
                continue;
            }
            // Sustained assignments: the event holds for every sub-witness
            // and every actual-value pinning of scope variables.
            let mut sustain = BTreeSet::new();
            'q: for q in Assignments::new(scm, &scope) {
                for wp_mask in 0u64..(1u64 << comp.len()) {
                    for z_mask in 0u64..(1u64 << zhat_pool.len()) {
                        let mut world: BTreeMap<VarId, Value> = BTreeMap::new();
                        for (&v, &val) in scope.iter().zip(&q) {
                            world.insert(v, val);
                        }
                        for (i, &v) in zhat_pool.iter().enumerate() {
                            if z_mask >> i & 1 == 1 {
                                world.insert(v, scm.actual(v));
                            }
                        }
                        for (i, (&v, &val)) in comp.iter().zip(&w).enumerate() {
                            if wp_mask >> i & 1 == 1 {
                                world.insert(v, val);
                            } else {
                                world.insert(v, scm.actual(v));
                            }
                        }
                        if !holds_on_layer(event, scm, &world) {
                            continue 'q;
                        }
                    }
                }
                sustain.insert(q);
            }
            if sustain.is_empty() {
                continue;
            }
            dedup_push(
                &mut out,
                &mut seen,
                RTuple {
                    scope: scope.clone(),
                    defeat,
                    sustain,
                    witness_vars: comp.clone(),
                    witness_values: w,
                },
            );
        }
    }
    Ok(out)
}

fn holds_on_layer(
    event: &Event,
    scm: &crate::scm::StructuralCausalModel,
    assigned: &BTreeMap<VarId, Value>,
) -> bool {
    event.0.iter().all(|lit| {
        let val = assigned
            .get(&lit.var)
            .copied()
            .unwrap_or_else(|| scm.actual(lit.var));
        (val == lit.value) != lit.negated
    })
}

/// Lifts the records of layer `i - 1` to layer `i`.
pub fn recurrence_step(
    lcg: &LayeredCausalGraph,
    layer_index: usize,
    explanans_layer: usize,
    previous: &[RTuple],
) -> Vec<RTuple> {
    let layer = lcg.layer(layer_index).to_vec();
    let scm = &lcg.scm;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for mask in 0u64..(1u64 << layer.len()) {
        let scope = pick(&layer, mask);
        let comp: Vec<VarId> = layer.iter().copied().filter(|v| !scope.contains(v)).collect();
        let zhat_pool: Vec<VarId> = if layer_index == explanans_layer {
            Vec::new()
        } else {
            scope.clone()
        };
        for w in Assignments::new(scm, &comp) {
            for parent_tuple in previous {
                let mut defeat = BTreeSet::new();
                for p in Assignments::new(scm, &scope) {
                    let mut upper: BTreeMap<VarId, Value> = BTreeMap::new();
                    for (&v, &val) in scope.iter().zip(&p) {
                        upper.insert(v, val);
                    }
                    for (&v, &val) in comp.iter().zip(&w) {
                        upper.insert(v, val);
                    }
                    let down = eval_targets(lcg, &parent_tuple.scope, &upper);
                    if parent_tuple.defeat.contains(&down) {
                        defeat.insert(p);
                    }
                }
                if defeat.is_empty() {
                    continue;
                }
                let mut sustain = BTreeSet::new();
                'q: for q in Assignments::new(scm, &scope) {
                    for wp_mask in 0u64..(1u64 << comp.len()) {
                        for z_mask in 0u64..(1u64 << zhat_pool.len()) {
                            let mut upper: BTreeMap<VarId, Value> = BTreeMap::new();
                            for (&v, &val) in scope.iter().zip(&q) {
                                upper.insert(v, val);
                            }
                            for (i, &v) in zhat_pool.iter().enumerate() {
                                if z_mask >> i & 1 == 1 {
                                    upper.insert(v, scm.actual(v));
                                }
                            }
                            for (i, (&v, &val)) in comp.iter().zip(&w).enumerate() {
                                if wp_mask >> i & 1 == 1 {
                                    upper.insert(v, val);
                                } else {
                                    upper.insert(v, scm.actual(v));
                                }
                            }
                            let down = eval_targets(lcg, &parent_tuple.scope, &upper);
                            if !parent_tuple.sustain.contains(&down) {
                                continue 'q;
                            }
                        }
                    }
                    sustain.insert(q);
                }
                if sustain.is_empty() {
                    continue;
                }
                let mut witness_vars = parent_tuple.witness_vars.clone();
                let mut witness_values = parent_tuple.witness_values.clone();
                witness_vars.extend_from_slice(&comp);
                witness_values.extend_from_slice(&w);
                dedup_push(
                    &mut out,
                    &mut seen,
                    RTuple {
                        scope: scope.clone(),
                        defeat,
                        sustain,
                        witness_vars,
                        witness_values,
                    },
                );
            }
        }
    }
    out
}
