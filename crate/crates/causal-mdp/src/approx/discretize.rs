//! Discretization of continuous model inputs.
//!
//! Reward, transition and value variables carry real domains; causal search
//! needs finite ones. A scheme assigns each such variable a bounded grid
//! (always extended with the variable's actual value), and may declare
//! high-level rules — one parameter driving many transition or reward
//! variables jointly — so counterfactual loops range over rule values
//! instead of independent per-variable values.

use super::config::ApproxError;
use crate::mdp::{ActionId, StateId};
use crate::scm::{Domain, ScmError, StructuralCausalModel, Value, VarId, VarKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: Vec<f64>,
}

impl FamilyGrid {
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Self {
        let points = if n == 1 {
            vec![lo]
        } else {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        };
        FamilyGrid { lo, hi, points }
    }
}

/// How one rule target derives its value from the rule parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleExpr {
    Param,
    OneMinusParam,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleTarget {
    /// Variable name, e.g. `T:12:1:13`.
    pub var: String,
    pub expr: RuleExpr,
}

/// A named high-level parameter with its own grid, driving several
/// transition or reward variables jointly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub name: String,
    pub grid: Vec<f64>,
    pub targets: Vec<RuleTarget>,
}

impl RuleSpec {
    /// The parameter value consistent with the actual world, derived from
    /// the first target.
    pub fn actual_param(&self, scm: &StructuralCausalModel) -> Result<f64, ApproxError> {
        let first = self
            .targets
            .first()
            .ok_or_else(|| ApproxError::MissingGrid(self.name.clone()))?;
        let var = scm
            .by_name(&first.var)
            .ok_or_else(|| ApproxError::Scm(ScmError::UnknownVariable(first.var.clone())))?;
        let actual = scm.actual(var).as_f64();
        Ok(match first.expr {
            RuleExpr::Param => actual,
            RuleExpr::OneMinusParam => 1.0 - actual,
        })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationScheme {
    pub reward: Option<FamilyGrid>,
    pub transition: Option<FamilyGrid>,
    pub value: Option<FamilyGrid>,
    /// Per-factor grids (subsets of factor domains) for sampled factor
    /// search, keyed by factor name.
    pub factors: BTreeMap<String, Vec<String>>,
    /// Per-variable grid overrides, keyed by variable name.
    pub variables: BTreeMap<String, Vec<f64>>,
    pub rules: Vec<RuleSpec>,
}

impl DiscretizationScheme {
    fn grid_for(&self, name: &str, kind: &VarKind) -> Option<(&[f64], f64, f64)> {
        if let Some(g) = self.variables.get(name) {
            let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Some((g, lo, hi));
        }
        let fam = match kind {
            VarKind::Reward { .. } => self.reward.as_ref(),
            VarKind::Transition { .. } => self.transition.as_ref(),
            VarKind::Value { .. } | VarKind::ActionValue { .. } => self.value.as_ref(),
            _ => None,
        }?;
        Some((&fam.points, fam.lo, fam.hi))
    }
}

/// Replaces every continuous-kind variable's domain with its grid extended
/// by the actual value. Errors when a continuous variable is uncovered or
/// its actual value lies outside the declared bounds. Discrete variables are
/// untouched.
pub fn discretize_domains(
    scm: &StructuralCausalModel,
    scheme: &DiscretizationScheme,
) -> Result<StructuralCausalModel, ScmError> {
    let mut out = scm.clone();
    for v in 0..scm.num_vars() {
        let var = scm.var(VarId(v));
        let continuous = matches!(
            var.kind,
            VarKind::Reward { .. }
                | VarKind::Transition { .. }
                | VarKind::Value { .. }
                | VarKind::ActionValue { .. }
        );
        if !continuous {
            continue;
        }
        let (grid, lo, hi) = scheme
            .grid_for(&var.name, &var.kind)
            .ok_or_else(|| ScmError::UncoveredVariable(var.name.clone()))?;
        let actual = scm.actual(VarId(v)).as_f64();
        if actual < lo - 1e-12 || actual > hi + 1e-12 {
            return Err(ScmError::OutOfBounds {
                name: var.name.clone(),
                actual,
                lo,
                hi,
            });
        }
        let mut values: Vec<Value> = grid.iter().map(|&x| Value::num(x)).collect();
        values.push(Value::num(actual));
        values.sort();
        values.dedup();
        out.replace_domain(VarId(v), Domain(values));
    }
    Ok(out)
}

/// Expands one rule at a parameter value into variable interventions,
/// re-normalizing any transition row the rule touches. Untargeted entries of
/// a touched row are scaled to absorb the remaining mass; rows whose entries
/// are all targeted must sum to one.
pub fn apply_rule(
    scm: &StructuralCausalModel,
    rule: &RuleSpec,
    param: f64,
) -> Result<BTreeMap<VarId, Value>, ApproxError> {
    let mut out = BTreeMap::new();
    let mut touched_rows: Vec<(StateId, ActionId)> = Vec::new();
    for target in &rule.targets {
        let var = scm
            .by_name(&target.var)
            .ok_or_else(|| ApproxError::Scm(ScmError::UnknownVariable(target.var.clone())))?;
        let value = match target.expr {
            RuleExpr::Param => param,
            RuleExpr::OneMinusParam => 1.0 - param,
        };
        out.insert(var, Value::num(value));
        if let VarKind::Transition { state, action, .. } = scm.var(var).kind {
            if !touched_rows.contains(&(state, action)) {
                touched_rows.push((state, action));
            }
        }
    }
    for (state, action) in touched_rows {
        let row_vars: Vec<VarId> = scm.vars_of_kind(|k| {
            matches!(k, VarKind::Transition { state: s, action: a, .. } if *s == state && *a == action)
        });
        let targeted: f64 = row_vars
            .iter()
            .filter_map(|v| out.get(v))
            .map(|v| v.as_f64())
            .sum();
        let untargeted: Vec<VarId> = row_vars
            .iter()
            .copied()
            .filter(|v| !out.contains_key(v))
            .collect();
        let untargeted_actual: f64 = untargeted.iter().map(|&v| scm.actual(v).as_f64()).sum();
        if untargeted.is_empty() {
            if (targeted - 1.0).abs() > 1e-9 {
                return Err(ApproxError::Scm(ScmError::NotLayered(format!(
                    "rule `{}` drives row ({}, {}) to total probability {targeted}",
                    rule.name, state.0, action.0
                ))));
            }
            continue;
        }
        let scale = (1.0 - targeted) / untargeted_actual;
        for v in untargeted {
            out.insert(v, Value::num(scm.actual(v).as_f64() * scale));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::StateId;
    use crate::scm::build_value_scm;
    use crate::testkit;

    fn full_scheme() -> DiscretizationScheme {
        DiscretizationScheme {
            reward: Some(FamilyGrid::uniform(-100.0, 100.0, 5)),
            transition: Some(FamilyGrid::uniform(0.0, 1.0, 3)),
            value: Some(FamilyGrid::uniform(-100.0, 100.0, 3)),
            ..Default::default()
        }
    }

    #[test]
    fn uniform_reward_grid_includes_actual() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let out = discretize_domains(&scm, &full_scheme()).unwrap();
        let r = out.by_name("R:0:0:1").unwrap();
        let values: Vec<f64> = out.domain(r).0.iter().map(|v| v.as_f64()).collect();
        assert_eq!(values, vec![-100.0, -50.0, 0.0, 1.0, 50.0, 100.0]);
    }

    #[test]
    fn missing_family_grid_is_an_error() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let scheme = DiscretizationScheme {
            reward: Some(FamilyGrid::uniform(-100.0, 100.0, 5)),
            ..Default::default()
        };
        assert!(matches!(
            discretize_domains(&scm, &scheme),
            Err(ScmError::UncoveredVariable(_))
        ));
    }

    #[test]
    fn actual_outside_bounds_is_an_error() {
        let mdp = testkit::two_state_mdp(0.9);
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        let mut scheme = full_scheme();
        scheme.reward = Some(FamilyGrid::uniform(2.0, 100.0, 5)); // actual reward 1 < 2
        assert!(matches!(
            discretize_domains(&scm, &scheme),
            Err(ScmError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn slip_rule_renormalizes_rows() {
        let mdp = testkit::stochastic_split_mdp();
        let scm = build_value_scm(&mdp, StateId(0), 1, None).unwrap();
        // Target only the 0.6 branch; the 0.4 branch must absorb the rest.
        let rule = RuleSpec {
            name: "slip".into(),
            grid: vec![0.0, 0.2, 0.4],
            targets: vec![RuleTarget {
                var: "T:0:0:1".into(),
                expr: RuleExpr::Param,
            }],
        };
        let iv = apply_rule(&scm, &rule, 0.2).unwrap();
        let t1 = scm.by_name("T:0:0:1").unwrap();
        let t2 = scm.by_name("T:0:0:2").unwrap();
        let sum = iv[&t1].as_f64() + iv[&t2].as_f64();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!((iv[&t1].as_f64() - 0.2).abs() < 1e-12);
        assert!((iv[&t2].as_f64() - 0.8).abs() < 1e-9);
    }

    #[test]
    fn scheme_matching_existing_domains_leaves_model_unchanged() {
        let mdp = testkit::toy_policy_mdp();
        let policy = testkit::greedy(&mdp);
        let (scm, _) = crate::scm::build_factor_scm(&mdp, &policy).unwrap();
        let out = discretize_domains(&scm, &DiscretizationScheme::default()).unwrap();
        for v in 0..scm.num_vars() {
            assert_eq!(scm.domain(VarId(v)), out.domain(VarId(v)));
        }
    }
}
