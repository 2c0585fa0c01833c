//! Successor graphs and finite-horizon layering.

use super::model::{MdpModel, StateId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Directed graph over states with an edge wherever some action moves
/// between them with positive probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuccessorGraph {
    pub num_states: usize,
    /// Sorted out-neighbour lists.
    pub adjacency: Vec<Vec<StateId>>,
}

impl SuccessorGraph {
    pub fn edges(&self) -> Vec<(StateId, StateId)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, outs)| outs.iter().map(move |&j| (StateId(i), j)))
            .collect()
    }

    pub fn has_edge(&self, from: StateId, to: StateId) -> bool {
        self.adjacency[from.0].binary_search(&to).is_ok()
    }

    /// BFS distance (number of actions) from `s0` to every state;
    /// `None` for unreachable states.
    pub fn distances_from(&self, s0: StateId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_states];
        let mut queue = std::collections::VecDeque::new();
        dist[s0.0] = Some(0);
        queue.push_back(s0);
        while let Some(s) = queue.pop_front() {
            let d = dist[s.0].unwrap();
            for &t in &self.adjacency[s.0] {
                if dist[t.0].is_none() {
                    dist[t.0] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
        dist
    }
}

/// Builds the successor graph: edge (i, j) iff ∃a with T(s_i, a, s_j) > 0.
pub fn build_successor_graph(mdp: &MdpModel) -> SuccessorGraph {
    let n = mdp.num_states();
    let mut adjacency = vec![BTreeSet::new(); n];
    for s in 0..n {
        for a in 0..mdp.num_actions() {
            for e in mdp.row(StateId(s), super::model::ActionId(a)) {
                if e.probability > 0.0 {
                    adjacency[s].insert(e.successor);
                }
            }
        }
    }
    SuccessorGraph {
        num_states: n,
        adjacency: adjacency
            .into_iter()
            .map(|set| set.into_iter().collect())
            .collect(),
    }
}

/// Depth-h unrolling of the successor graph from a start state. Nodes are
/// (state, depth) pairs with duplicates within a layer merged; every edge
/// spans adjacent layers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayeredMdp {
    /// `layers[d]` holds the distinct states occurring at depth d, sorted.
    pub layers: Vec<Vec<StateId>>,
    /// `edges[d]` connects depth d to depth d+1.
    pub edges: Vec<Vec<(StateId, StateId)>>,
    pub root: StateId,
}

impl LayeredMdp {
    /// Every edge must span exactly adjacent layers; used by tests.
    pub fn is_layered(&self) -> bool {
        if self.edges.len() + 1 != self.layers.len() {
            return false;
        }
        self.edges.iter().enumerate().all(|(d, es)| {
            es.iter().all(|(from, to)| {
                self.layers[d].binary_search(from).is_ok()
                    && self.layers[d + 1].binary_search(to).is_ok()
            })
        })
    }
}

/// Unrolls all paths of length ≤ h from `s0` — breadth-first expansion with
/// no explored list — merging duplicate (state, depth) nodes.
pub fn layerize_finite_horizon(mdp: &MdpModel, s0: StateId, h: usize) -> LayeredMdp {
    let graph = build_successor_graph(mdp);
    let mut layers: Vec<Vec<StateId>> = vec![vec![s0]];
    let mut edges = Vec::new();
    for d in 0..h {
        let mut next = BTreeSet::new();
        let mut layer_edges = BTreeSet::new();
        for &s in &layers[d] {
            for &t in &graph.adjacency[s.0] {
                next.insert(t);
                layer_edges.insert((s, t));
            }
        }
        if next.is_empty() {
            break;
        }
        layers.push(next.into_iter().collect());
        edges.push(layer_edges.into_iter().collect());
    }
    LayeredMdp {
        layers,
        edges,
        root: s0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::ActionId;
    use crate::testkit;

    #[test]
    fn deterministic_cycle_has_three_edges() {
        let mdp = testkit::three_cycle_mdp();
        let g = build_successor_graph(&mdp);
        assert_eq!(g.edges().len(), 3);
        assert!(g.has_edge(StateId(0), StateId(1)));
        assert!(g.has_edge(StateId(1), StateId(2)));
        assert!(g.has_edge(StateId(2), StateId(0)));
    }

    #[test]
    fn absorbing_state_keeps_self_edge() {
        let mdp = testkit::two_state_mdp(0.9);
        let g = build_successor_graph(&mdp);
        assert!(g.has_edge(StateId(1), StateId(1)));
    }

    #[test]
    fn stochastic_action_yields_both_edges() {
        // two outcomes from one (s, a) row
        let mdp = testkit::stochastic_split_mdp();
        let g = build_successor_graph(&mdp);
        assert!(g.has_edge(StateId(0), StateId(1)));
        assert!(g.has_edge(StateId(0), StateId(2)));
        let _ = ActionId(0);
    }

    #[test]
    fn diamond_unrolls_and_merges() {
        let mdp = testkit::diamond_mdp();
        let lm = layerize_finite_horizon(&mdp, StateId(0), 2);
        assert_eq!(lm.layers.len(), 3);
        assert_eq!(lm.layers[0], vec![StateId(0)]);
        assert_eq!(lm.layers[1], vec![StateId(1), StateId(2)]);
        // s3 appears once even though two paths reach it
        assert_eq!(lm.layers[2], vec![StateId(3)]);
        assert!(lm.is_layered());
    }

    #[test]
    fn zero_horizon_is_single_layer() {
        let mdp = testkit::diamond_mdp();
        let lm = layerize_finite_horizon(&mdp, StateId(0), 0);
        assert_eq!(lm.layers.len(), 1);
        assert!(lm.edges.is_empty());
    }

    #[test]
    fn cycle_unrolls_without_back_edges() {
        let mdp = testkit::three_cycle_mdp();
        let lm = layerize_finite_horizon(&mdp, StateId(0), 3);
        assert_eq!(lm.layers.len(), 4);
        assert_eq!(lm.layers[3], vec![StateId(0)]); // s0 again, at depth 3
        assert!(lm.is_layered());
    }
}
