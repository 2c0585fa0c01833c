//! Beam search over value-layer influence.
//!
//! Climbs the layered graph from the event layer toward the explanans layer,
//! scoring each variable's influence as the fraction of its grid alternates
//! that perturb the current intermediate events (the event itself at the
//! first layer, the surviving variables' values afterwards), and keeps only
//! the `m` most influential variables as the next events.

use super::config::{ApproxError, ResponsibilityScore};
use crate::exact::{CausalQuery, CauseSet};
use crate::scm::{LayeredCausalGraph, Value, VarId};
use std::collections::BTreeMap;

/// The per-layer survivors of a beam run, from the first layer above the
/// event up to the explanans layer.
#[derive(Debug, Clone)]
pub struct BeamTrace {
    pub survivors: Vec<Vec<VarId>>,
}

#[derive(Debug, Clone)]
pub struct BeamResult {
    pub causes: Vec<CauseSet>,
    pub scores: Vec<ResponsibilityScore>,
    pub trace: BeamTrace,
}

fn influence(
    lcg: &LayeredCausalGraph,
    query: &CausalQuery,
    targets: Option<&[VarId]>,
    v: VarId,
) -> f64 {
    let scm = &lcg.scm;
    let domain = scm.domain(v);
    let actual = scm.actual(v);
    let alternates: Vec<Value> = domain.0.iter().copied().filter(|x| *x != actual).collect();
    if alternates.is_empty() {
        return 0.0;
    }
    let mut flips = 0usize;
    for alt in &alternates {
        let mut iv = BTreeMap::new();
        iv.insert(v, *alt);
        let world = lcg.evaluate(&iv);
        let changed = match targets {
            None => !query.event.holds(&world),
            Some(vars) => vars.iter().any(|&t| world[t.0] != scm.actual(t)),
        };
        if changed {
            flips += 1;
        }
    }
    flips as f64 / alternates.len() as f64
}

/// Runs the influence beam search with width `m ≥ 1`. Returned causes are
/// the surviving explanans variables whose direct flip fraction against the
/// query event is positive, as singleton sets scored at witness size zero.
/// Ties in influence break toward the canonical variable order.
pub fn beam_search_influence(
    lcg: &LayeredCausalGraph,
    query: &CausalQuery,
    m: usize,
) -> Result<BeamResult, ApproxError> {
    if m == 0 {
        return Err(ApproxError::ZeroBeam);
    }
    let k = query
        .validate(lcg)
        .map_err(|e| ApproxError::Scm(crate::scm::ScmError::NotLayered(e.to_string())))?;
    let mut survivors: Vec<Vec<VarId>> = Vec::new();
    let mut events: Option<Vec<VarId>> = None; // None = the query event itself
    for layer_index in 1..=k {
        let mut scored: Vec<(VarId, f64)> = lcg
            .layer(layer_index)
            .iter()
            .map(|&v| (v, influence(lcg, query, events.as_deref(), v)))
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        let kept: Vec<VarId> = scored.into_iter().take(m).map(|(v, _)| v).collect();
        survivors.push(kept.clone());
        events = Some(kept);
    }

    let surviving_explanans: Vec<VarId> = match survivors.last() {
        Some(kept) => query
            .explanans
            .iter()
            .copied()
            .filter(|x| kept.contains(x))
            .collect(),
        None => query.explanans.clone(),
    };
    let scm = &lcg.scm;
    let mut causes = Vec::new();
    let mut scores = Vec::new();
    for x in surviving_explanans {
        let rho = influence(lcg, query, None, x);
        if rho > 0.0 {
            causes.push(CauseSet {
                variables: vec![scm.var(x).name.clone()],
                values: vec![scm.actual(x).to_string()],
                witness: None,
                responsibility: Some(rho),
                minimality_relative: true,
            });
            scores.push(ResponsibilityScore {
                rho,
                sigma: rho,
                trials: 1,
                beta: 0,
            });
        }
    }
    Ok(BeamResult {
        causes,
        scores,
        trace: BeamTrace { survivors },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{discretize_domains, DiscretizationScheme, FamilyGrid};
    use crate::mdp::StateId;
    use crate::scm::{build_value_scm, construct_causal_graph, construct_lcg, Event, Literal};
    use crate::testkit;

    fn value_lcg(
        mdp: &crate::mdp::MdpModel,
        s0: StateId,
        h: usize,
    ) -> (LayeredCausalGraph, CausalQuery) {
        let scm = build_value_scm(mdp, s0, h, None).unwrap();
        let scheme = DiscretizationScheme {
            reward: Some(FamilyGrid::uniform(-100.0, 100.0, 5)),
            transition: Some(FamilyGrid::uniform(0.0, 1.0, 3)),
            value: Some(FamilyGrid::uniform(-100.0, 100.0, 5)),
            ..Default::default()
        };
        let scm = discretize_domains(&scm, &scheme).unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        let succ = crate::mdp::build_successor_graph(mdp);
        let lcg = construct_lcg(&scm, &g, &succ, s0, h).unwrap();
        // event: the optimal action's indicator stays true
        let (_, policy) = crate::mdp::solve_value_iteration(mdp, 1e-10).unwrap();
        let a = policy.action_of(s0);
        let pi = scm.by_name(&format!("pi:{}:{}", s0.0, a.0)).unwrap();
        // explanans: the deepest layer holding transition/reward/value roots
        let xs: Vec<VarId> = (0..lcg.num_layers())
            .rev()
            .map(|i| {
                lcg.layer(i)
                    .iter()
                    .copied()
                    .filter(|&v| {
                        matches!(
                            scm.var(v).kind,
                            crate::scm::VarKind::Value { .. }
                                | crate::scm::VarKind::Transition { .. }
                                | crate::scm::VarKind::Reward { .. }
                        )
                    })
                    .collect::<Vec<_>>()
            })
            .find(|v| !v.is_empty())
            .unwrap();
        let query = CausalQuery::new(
            xs,
            Event(vec![Literal {
                var: pi,
                value: Value::Bool(true),
                negated: false,
            }]),
        );
        (lcg, query)
    }

    #[test]
    fn full_width_equals_unpruned_restricted_search() {
        let mdp = testkit::two_state_mdp(0.9);
        let (lcg, query) = value_lcg(&mdp, StateId(0), 1);
        let width = (0..lcg.num_layers()).map(|i| lcg.layer(i).len()).max().unwrap();
        let full = beam_search_influence(&lcg, &query, width).unwrap();
        // unpruned restricted search: every explanans var with positive
        // direct flip fraction
        let direct: Vec<String> = query
            .explanans
            .iter()
            .filter(|&&x| influence(&lcg, &query, None, x) > 0.0)
            .map(|&x| lcg.scm.var(x).name.clone())
            .collect();
        let got: Vec<String> = full
            .causes
            .iter()
            .map(|c| c.variables[0].clone())
            .collect();
        assert_eq!(got, direct);
        assert!(!got.is_empty());
    }

    #[test]
    fn narrow_beam_prunes_zero_influence_branch() {
        let mdp = testkit::diamond_mdp();
        let (lcg, query) = value_lcg(&mdp, StateId(0), 2);
        let result = beam_search_influence(&lcg, &query, 1).unwrap();
        assert_eq!(result.trace.survivors[0].len(), 1);
        // the survivor at the first climbed layer actually influences the event
        let v = result.trace.survivors[0][0];
        assert!(influence(&lcg, &query, None, v) > 0.0);
    }
}
