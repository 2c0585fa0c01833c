//! Causal graph derivation from structural equations.
//!
//! The bipartite graph pairs each variable with the equations that mention
//! it (an equation mentions its defined variable and its parents). A perfect
//! matching decides which variable each equation determines; matched
//! equations orient edges into their variable, unmatched incidences orient
//! edges away from it. Hopcroft–Karp with sorted adjacency makes the pick
//! deterministic when circular equation sets admit several matchings.

use super::model::{ScmError, StructuralCausalModel};
use super::variable::VarId;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

/// Directed cause → effect graph over the endogenous variables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CausalGraph {
    pub num_vars: usize,
    pub edges: BTreeSet<(VarId, VarId)>,
}

impl CausalGraph {
    pub fn parents_of(&self, v: VarId) -> Vec<VarId> {
        self.edges
            .iter()
            .filter(|(_, to)| *to == v)
            .map(|(from, _)| *from)
            .collect()
    }

    pub fn children_of(&self, v: VarId) -> Vec<VarId> {
        self.edges
            .range((v, VarId(0))..=(v, VarId(usize::MAX)))
            .map(|(_, to)| *to)
            .collect()
    }
}

/// Maximum bipartite matching; `pair_right[j]` is the left vertex matched to
/// right vertex j. Left vertices are tried in ascending order and adjacency
/// lists are pre-sorted, so the matching is deterministic.
fn hopcroft_karp(num_left: usize, num_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const UNSEEN: usize = usize::MAX;
    let mut pair_left = vec![UNSEEN; num_left];
    let mut pair_right = vec![UNSEEN; num_right];
    loop {
        // BFS phase: distances over free left vertices.
        let mut dist = vec![UNSEEN; num_left];
        let mut queue: VecDeque<usize> = (0..num_left)
            .filter(|&u| pair_left[u] == UNSEEN)
            .collect();
        for &u in &queue {
            dist[u] = 0;
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match pair_right[v] {
                    UNSEEN => found = true,
                    w if dist[w] == UNSEEN => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return pair_right.iter().map(|&u| (u != UNSEEN).then_some(u)).collect();
        }
        // DFS phase: augment along shortest alternating paths.
        fn try_augment(
            u: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            pair_left: &mut [usize],
            pair_right: &mut [usize],
        ) -> bool {
            for &v in &adj[u] {
                let w = pair_right[v];
                if w == usize::MAX
                    || (dist[w] == dist[u] + 1
                        && try_augment(w, adj, dist, pair_left, pair_right))
                {
                    pair_left[u] = v;
                    pair_right[v] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..num_left {
            if pair_left[u] == UNSEEN && dist[u] == 0 {
                try_augment(u, adj, &mut dist, &mut pair_left, &mut pair_right);
            }
        }
    }
}

/// Derives the causal graph from the model's equations via a perfect
/// matching on the variable–equation bipartite graph.
///
/// Fails when no perfect matching exists; the error names the variables in
/// a Hall-condition violator so callers can see which equations are
/// under-determined.
pub fn construct_causal_graph(scm: &StructuralCausalModel) -> Result<CausalGraph, ScmError> {
    let n = scm.num_vars();
    // Left side: equations (one per variable). Right side: variables.
    // Equation i mentions variable i and its parents.
    let members: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut m: Vec<usize> = scm.parents(VarId(i)).iter().map(|p| p.0).collect();
            m.push(i);
            m.sort_unstable();
            m.dedup();
            m
        })
        .collect();
    let matched = hopcroft_karp(n, n, &members);
    // pair_right[var] = equation matched to it; invert to equation → var.
    let mut eq_to_var = vec![None; n];
    for (var, eq) in matched.iter().enumerate() {
        if let Some(eq) = eq {
            eq_to_var[*eq] = Some(var);
        }
    }
    if eq_to_var.iter().any(Option::is_none) {
        let deficient: Vec<String> = eq_to_var
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_none())
            .flat_map(|(eq, _)| members[eq].iter().map(|&v| scm.var(VarId(v)).name.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        return Err(ScmError::NoPerfectMatching(deficient));
    }
    // Matched incidences orient every other member of the equation into the
    // matched variable; an unmatched incidence of v in equation Q orients v
    // toward the variable Q determines. Both reduce to the same edge set:
    // members of each equation point at its matched variable.
    let mut edges = BTreeSet::new();
    for (eq, mems) in members.iter().enumerate() {
        let determined = eq_to_var[eq].expect("perfect matching checked above");
        for &other in mems.iter().filter(|&&m| m != determined) {
            edges.insert((VarId(other), VarId(determined)));
        }
    }
    Ok(CausalGraph { num_vars: n, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::model::ScmBuilder;
    use crate::scm::variable::{Domain, Value, VarKind};
    use crate::scm::Equation;

    fn identity_table() -> Equation {
        Equation::Table {
            dims: vec![2],
            out: vec![Value::Bool(false), Value::Bool(true)],
        }
    }

    #[test]
    fn chain_orients_along_equations() {
        // a := const, b := a, c := b
        let mut b = ScmBuilder::new();
        let a = b.add(
            VarKind::Factor { index: 0 },
            Domain::boolean(),
            vec![],
            Equation::Const(Value::Bool(true)),
        );
        let bb = b.add(
            VarKind::Factor { index: 1 },
            Domain::boolean(),
            vec![a],
            identity_table(),
        );
        let c = b.add(
            VarKind::Factor { index: 2 },
            Domain::boolean(),
            vec![bb],
            identity_table(),
        );
        let scm = b.build().unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        assert_eq!(
            g.edges,
            BTreeSet::from([(a, bb), (bb, c)])
        );
    }

    #[test]
    fn isolated_variables_give_edgeless_graph() {
        let mut b = ScmBuilder::new();
        for i in 0..3 {
            b.add(
                VarKind::Factor { index: i },
                Domain::boolean(),
                vec![],
                Equation::Const(Value::Bool(false)),
            );
        }
        let scm = b.build().unwrap();
        let g = construct_causal_graph(&scm).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn circular_equations_resolve_deterministically() {
        // a := b, b := a — the matching is deterministic, and repeated runs
        // produce identical graphs.
        let build = || {
            let mut b = ScmBuilder::new();
            let a = VarId(0);
            let bb = VarId(1);
            b.add(
                VarKind::Factor { index: 0 },
                Domain::boolean(),
                vec![bb],
                identity_table(),
            );
            b.add(
                VarKind::Factor { index: 1 },
                Domain::boolean(),
                vec![a],
                identity_table(),
            );
            b.build_with_actuals(vec![Value::Bool(true), Value::Bool(true)])
        };
        let g1 = construct_causal_graph(&build()).unwrap();
        let g2 = construct_causal_graph(&build()).unwrap();
        assert_eq!(g1.edges, g2.edges);
        // Both orientations of the circular pair appear as cause-effect
        // candidates; layering is what later removes one.
        assert!(g1.edges.contains(&(VarId(0), VarId(1))));
        assert!(g1.edges.contains(&(VarId(1), VarId(0))));
    }
}
