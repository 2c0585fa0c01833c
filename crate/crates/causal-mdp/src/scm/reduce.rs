//! Strong reduction of layered causal graphs.
//!
//! Given explanans candidates X and an event φ, variables that cannot affect
//! the verdict are dropped: candidates with no X-free path to the event, and
//! bystanders that are neither direct parents of an event variable nor on any
//! X → φ chain. Dropped variables stay pinned at their actual values.

use super::layer::LayeredCausalGraph;
use super::model::{Event, ScmError};
use super::variable::VarId;
use std::collections::BTreeSet;

/// Forward closure from `seeds` over live edges whose interior avoids
/// `blocked`. Seeds are included; expansion stops at blocked nodes.
fn reach_forward(
    lcg: &LayeredCausalGraph,
    seeds: &[VarId],
    blocked: &BTreeSet<VarId>,
) -> BTreeSet<VarId> {
    let mut seen: BTreeSet<VarId> = seeds.iter().copied().collect();
    let mut stack: Vec<VarId> = seeds.to_vec();
    while let Some(v) = stack.pop() {
        for c in lcg.live_children(v) {
            if blocked.contains(&c) || !seen.insert(c) {
                continue;
            }
            stack.push(c);
        }
    }
    seen
}

/// Backward closure: nodes reaching `targets` over live edges with non-X
/// interiors. Targets are included.
fn reach_backward(
    lcg: &LayeredCausalGraph,
    targets: &[VarId],
    blocked: &BTreeSet<VarId>,
) -> BTreeSet<VarId> {
    let mut seen: BTreeSet<VarId> = targets.iter().copied().collect();
    let mut stack: Vec<VarId> = targets.to_vec();
    while let Some(v) = stack.pop() {
        for p in lcg.live_parents(v) {
            if blocked.contains(&p) || !seen.insert(p) {
                continue;
            }
            stack.push(p);
        }
    }
    seen
}

/// Strongly reduces the graph with respect to explanans `x_set` and event
/// `event`. Removed variables are unlayered and their edges severed (their
/// consumers read actual values); empty layers are dropped and layer indices
/// compacted.
pub fn reduce_lcg(
    lcg: &LayeredCausalGraph,
    x_set: &[VarId],
    event: &Event,
) -> Result<LayeredCausalGraph, ScmError> {
    let event_vars = event.vars();
    let x: BTreeSet<VarId> = x_set.iter().copied().collect();
    if event_vars.iter().any(|v| x.contains(v)) {
        return Err(ScmError::ExplanansIntersectsEvent);
    }

    // A candidate x stays iff some live path x → … → φ has an X-free
    // interior (event variables are never in X, so endpoints are fine).
    let back_to_event = reach_backward(lcg, &event_vars, &x);
    let kept_x: Vec<VarId> = x_set
        .iter()
        .copied()
        .filter(|xv| {
            lcg.live_children(*xv)
                .iter()
                .any(|c| back_to_event.contains(c))
        })
        .collect();

    // Bystanders stay iff they are a direct parent of an event variable or
    // sit on an X-free chain from a kept candidate to the event.
    let forward_from_x = reach_forward(lcg, &kept_x, &x);
    let mut direct_parents: BTreeSet<VarId> = BTreeSet::new();
    for &ev in &event_vars {
        for p in lcg.live_parents(ev) {
            direct_parents.insert(p);
        }
    }

    let mut keep: BTreeSet<VarId> = kept_x.iter().copied().collect();
    keep.extend(event_vars.iter().copied());
    for layer in lcg.layers() {
        for &v in layer {
            if x.contains(&v) || event_vars.contains(&v) {
                continue;
            }
            let on_chain = forward_from_x.contains(&v) && back_to_event.contains(&v);
            if on_chain || direct_parents.contains(&v) {
                keep.insert(v);
            }
        }
    }

    let layers: Vec<Vec<VarId>> = lcg
        .layers()
        .iter()
        .map(|layer| layer.iter().copied().filter(|v| keep.contains(v)).collect())
        .filter(|layer: &Vec<VarId>| !layer.is_empty())
        .collect();
    if layers.is_empty() {
        return Err(ScmError::NotLayered(
            "reduction removed every variable".into(),
        ));
    }
    let live: Vec<Vec<bool>> = (0..lcg.scm.num_vars())
        .map(|v| {
            let vid = VarId(v);
            lcg.scm
                .parents(vid)
                .iter()
                .enumerate()
                .map(|(pos, p)| {
                    keep.contains(&vid) && keep.contains(p) && lcg.is_live(vid, pos)
                })
                .collect()
        })
        .collect();
    LayeredCausalGraph::from_parts(lcg.scm.clone(), layers, live)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::model::{Literal, ScmBuilder};
    use crate::scm::variable::{Domain, Value, VarKind};
    use crate::scm::Equation;

    fn id_eq() -> Equation {
        Equation::Table {
            dims: vec![2],
            out: vec![Value::Bool(false), Value::Bool(true)],
        }
    }

    /// x → m → e with an isolated bystander v, all Boolean.
    fn chain_with_bystander() -> (LayeredCausalGraph, VarId, VarId) {
        let mut b = ScmBuilder::new();
        let x = b.add(
            VarKind::Factor { index: 0 },
            Domain::boolean(),
            vec![],
            Equation::Const(Value::Bool(true)),
        );
        let v = b.add(
            VarKind::Factor { index: 1 },
            Domain::boolean(),
            vec![],
            Equation::Const(Value::Bool(true)),
        );
        let m = b.add(
            VarKind::Factor { index: 2 },
            Domain::boolean(),
            vec![x],
            id_eq(),
        );
        let e = b.add(
            VarKind::Factor { index: 3 },
            Domain::boolean(),
            vec![m],
            id_eq(),
        );
        let scm = b.build().unwrap();
        let live = vec![vec![], vec![], vec![true], vec![true]];
        let lcg = LayeredCausalGraph::from_parts(
            scm,
            vec![vec![e], vec![m], vec![x, v]],
            live,
        )
        .unwrap();
        (lcg, x, e)
    }

    #[test]
    fn bystander_removed_chain_intact() {
        let (lcg, x, e) = chain_with_bystander();
        let event = Event(vec![Literal {
            var: e,
            value: Value::Bool(true),
            negated: false,
        }]);
        let reduced = reduce_lcg(&lcg, &[x], &event).unwrap();
        assert_eq!(reduced.num_layers(), 3);
        assert!(reduced.layer_index(VarId(1)).is_none()); // bystander gone
        assert!(reduced.layer_index(x).is_some());
    }

    #[test]
    fn candidate_blocked_by_other_candidate_removed() {
        // x2 → x1 → e: every path from x2 passes x1 ∈ X.
        let mut b = ScmBuilder::new();
        let x2 = b.add(
            VarKind::Factor { index: 0 },
            Domain::boolean(),
            vec![],
            Equation::Const(Value::Bool(true)),
        );
        let x1 = b.add(
            VarKind::Factor { index: 1 },
            Domain::boolean(),
            vec![x2],
            id_eq(),
        );
        let e = b.add(
            VarKind::Factor { index: 2 },
            Domain::boolean(),
            vec![x1],
            id_eq(),
        );
        let scm = b.build().unwrap();
        let lcg = LayeredCausalGraph::from_parts(
            scm,
            vec![vec![e], vec![x1], vec![x2]],
            vec![vec![], vec![true], vec![true]],
        )
        .unwrap();
        let event = Event(vec![Literal {
            var: e,
            value: Value::Bool(true),
            negated: false,
        }]);
        let reduced = reduce_lcg(&lcg, &[x1, x2], &event).unwrap();
        assert!(reduced.layer_index(x1).is_some());
        assert!(reduced.layer_index(x2).is_none());
    }

    #[test]
    fn fully_connected_graph_unchanged() {
        let (lcg, x, e) = chain_with_bystander();
        // restrict to the chain only: x → m → e, no bystander in layers
        let event = Event(vec![Literal {
            var: e,
            value: Value::Bool(true),
            negated: false,
        }]);
        let reduced1 = reduce_lcg(&lcg, &[x], &event).unwrap();
        let reduced2 = reduce_lcg(&reduced1, &[x], &event).unwrap();
        assert_eq!(reduced1.layers(), reduced2.layers());
    }
}
