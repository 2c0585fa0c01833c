//! DOT export for layered causal graphs.
//!
//! Nodes are grouped into clusters by variable family (factors, state
//! indicators, transition/reward roots, values, action selection), with each
//! node carrying its layer index as an attribute. Output is deterministic:
//! identical inputs produce byte-identical files.

use super::layer::LayeredCausalGraph;
use super::variable::{VarId, VarKind};
use std::fmt::Write;

fn family(kind: &VarKind) -> (usize, &'static str) {
    match kind {
        VarKind::Factor { .. } => (0, "factors"),
        VarKind::StateIndicator { .. } => (1, "states"),
        VarKind::Transition { .. } | VarKind::Reward { .. } => (2, "transitions_rewards"),
        VarKind::Value { .. } | VarKind::ActionValue { .. } => (3, "values"),
        VarKind::PolicyIndicator { .. } => (4, "action_selection"),
    }
}

fn kind_label(kind: &VarKind) -> &'static str {
    match kind {
        VarKind::Factor { .. } => "factor",
        VarKind::StateIndicator { .. } => "state",
        VarKind::PolicyIndicator { .. } => "policy",
        VarKind::Reward { .. } => "reward",
        VarKind::Transition { .. } => "transition",
        VarKind::Value { .. } => "value",
        VarKind::ActionValue { .. } => "action-value",
    }
}

/// Renders the layered graph in DOT.
pub fn lcg_to_dot(lcg: &LayeredCausalGraph) -> String {
    let mut clusters: Vec<(usize, &'static str, Vec<VarId>)> = Vec::new();
    for layer in lcg.layers() {
        for &v in layer {
            let (rank, name) = family(&lcg.scm.var(v).kind);
            match clusters.iter_mut().find(|(r, _, _)| *r == rank) {
                Some((_, _, members)) => members.push(v),
                None => clusters.push((rank, name, vec![v])),
            }
        }
    }
    clusters.sort_by_key(|(r, _, _)| *r);
    for (_, _, members) in &mut clusters {
        members.sort();
    }

    let mut out = String::from("digraph lcg {\n  rankdir=BT;\n");
    for (rank, name, members) in &clusters {
        let _ = writeln!(out, "  subgraph cluster_{rank} {{");
        let _ = writeln!(out, "    label=\"{name}\";");
        for &v in members {
            let var = lcg.scm.var(v);
            let layer = lcg
                .layer_index(v)
                .map_or("-".to_string(), |l| l.to_string());
            let _ = writeln!(
                out,
                "    n{} [label=\"{} [{}]\", layer=\"{layer}\"];",
                v.0,
                var.name,
                kind_label(&var.kind),
            );
        }
        let _ = writeln!(out, "  }}");
    }
    for layer in lcg.layers() {
        for &v in layer {
            for p in lcg.live_parents(v) {
                let _ = writeln!(out, "  n{} -> n{};", p.0, v.0);
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::build_factor_scm;
    use crate::testkit;

    #[test]
    fn factor_model_exports_three_clusters() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let (_, lcg) = build_factor_scm(&mdp, &policy).unwrap();
        let dot = lcg_to_dot(&lcg);
        assert_eq!(dot.matches("subgraph cluster_").count(), 3);
        assert_eq!(dot.matches("[factor]").count(), 2);
        assert_eq!(dot.matches("[state]").count(), 4);
        assert_eq!(dot.matches("[policy]").count(), 8);
    }

    #[test]
    fn export_is_deterministic() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let (_, lcg) = build_factor_scm(&mdp, &policy).unwrap();
        assert_eq!(lcg_to_dot(&lcg), lcg_to_dot(&lcg));
    }
}
