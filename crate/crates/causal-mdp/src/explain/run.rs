//! Maps explanation requests onto the right model and inference pipeline.
//!
//! F-type queries run on the factor model (exactly or via responsibility
//! scoring); R- and T-type queries run on the value model with the
//! complementary family moved into the context, discretized by the request's
//! scheme, searching over its high-level rules; V-type queries run beam
//! search (or the restricted exact engine) over value variables of the
//! deepest finite layer.

use crate::approx::{
    apply_rule, beam_search_influence, discretize_domains, mean_resp_sampled, mean_resp_with,
    responsibility_search, ApproxConfig, ApproxError, CandidateSpace, DiscretizationScheme,
};
use crate::exact::{
    determine_actual_causes, determine_actual_causes_relative, determine_weak_causes,
    oracle_weak_cause_with_budget, CausalQuery, CauseSet, InferenceError,
};
use crate::mdp::{build_successor_graph, ActionId, MdpModel, Policy, StateId};
use crate::scm::{
    action_selected_event, build_factor_scm_at, build_value_scm_with, construct_causal_graph,
    construct_lcg, induced_action, reduce_lcg, Event, Literal, ScmError, Value, VarId, VarKind,
    ValueScmOptions,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("method {method:?} is not applicable to {query_type:?} queries")]
    MethodMismatch {
        query_type: QueryType,
        method: Method,
    },
    #[error("beam search requires a beam width")]
    BeamWidthRequired,
    #[error("sampled search requires a sample count")]
    SamplesRequired,
    #[error("{0} queries need discretization rules for their variable family")]
    RulesRequired(&'static str),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Mdp(#[from] crate::mdp::MdpError),
}

/// Which MDP component family supplies the candidate explanans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryType {
    F,
    R,
    T,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    MeanResp,
    Sampled,
    Beam,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplanationRequest {
    pub query_type: QueryType,
    pub s0: StateId,
    pub method: Method,
    #[serde(default)]
    pub config: ApproxConfig,
    /// Horizon for value-model builds.
    pub horizon: usize,
    #[serde(default)]
    pub scheme: DiscretizationScheme,
}

impl ExplanationRequest {
    fn validate(&self) -> Result<(), ExplainError> {
        match (self.query_type, self.method) {
            (QueryType::V, Method::Beam) if self.config.beam_width.is_none() => {
                Err(ExplainError::BeamWidthRequired)
            }
            (_, Method::Sampled) if self.config.samples.is_none() => {
                Err(ExplainError::SamplesRequired)
            }
            (QueryType::V, Method::MeanResp | Method::Sampled) => {
                Err(ExplainError::MethodMismatch {
                    query_type: self.query_type,
                    method: self.method,
                })
            }
            (QueryType::R | QueryType::T, Method::Exact | Method::Beam) => {
                Err(ExplainError::MethodMismatch {
                    query_type: self.query_type,
                    method: self.method,
                })
            }
            (QueryType::F, Method::Beam) => Err(ExplainError::MethodMismatch {
                query_type: self.query_type,
                method: self.method,
            }),
            _ => Ok(()),
        }
    }
}

/// The explained action with its ranked causes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Explanation {
    pub action: String,
    pub causes: Vec<CauseSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Per-layer survivors of a beam run, event layer upward.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_survivors: Option<Vec<Vec<String>>>,
}

/// Sorts causes by descending ρ; unscored causes rank last; ties fall back
/// to the canonical variable order.
fn rank_causes(causes: &mut [CauseSet]) {
    causes.sort_by(|a, b| {
        let ra = a.responsibility.unwrap_or(f64::NEG_INFINITY);
        let rb = b.responsibility.unwrap_or(f64::NEG_INFINITY);
        rb.partial_cmp(&ra)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.variables.cmp(&b.variables))
    });
}

/// Runs an explanation query against a solved model.
pub fn run_query(
    mdp: &MdpModel,
    policy: &Policy,
    request: &ExplanationRequest,
) -> Result<Explanation, ExplainError> {
    request.validate()?;
    request.config.validate()?;
    let s0 = request.s0;
    let action = policy.action_of(s0);
    let (mut causes, beam_survivors) = match request.query_type {
        QueryType::F => (run_factor_query(mdp, policy, request, action)?, None),
        QueryType::R => (
            run_rule_query(mdp, request, action, QueryType::R)?,
            None,
        ),
        QueryType::T => (
            run_rule_query(mdp, request, action, QueryType::T)?,
            None,
        ),
        QueryType::V => run_value_query(mdp, request, action)?,
    };
    rank_causes(&mut causes);
    Ok(Explanation {
        action: mdp.action_name(action).to_string(),
        causes,
        text: None,
        beam_survivors,
    })
}

fn run_factor_query(
    mdp: &MdpModel,
    policy: &Policy,
    request: &ExplanationRequest,
    action: ActionId,
) -> Result<Vec<CauseSet>, ExplainError> {
    let factor_indices: Vec<usize> = (0..mdp.factors().len()).collect();
    match request.method {
        Method::Exact => {
            let (scm, lcg) = build_factor_scm_at(mdp, policy, request.s0)?;
            let event = action_selected_event(mdp, policy, &scm, action);
            let xs: Vec<VarId> = factor_indices
                .iter()
                .map(|&i| scm.by_name(&VarKind::Factor { index: i }.name()).unwrap())
                .collect();
            let reduced = reduce_lcg(&lcg, &xs, &event)?;
            let surviving: Vec<VarId> = xs
                .iter()
                .copied()
                .filter(|&x| reduced.layer_index(x).is_some())
                .collect();
            if surviving.is_empty() {
                return Ok(Vec::new());
            }
            let query = CausalQuery::new(surviving, event);
            let weak = determine_weak_causes(&reduced, &query)?;
            let mut actual = determine_actual_causes(&weak);
            // translate variable names back to factor names and attach ρ
            let (resp_causes, resp_scores) =
                mean_resp_with(mdp, policy, request.s0, &factor_indices, &request.config)?;
            let scores: BTreeMap<Vec<String>, f64> = resp_causes
                .iter()
                .zip(&resp_scores)
                .map(|(c, s)| (c.variables.clone(), s.rho))
                .collect();
            for cause in &mut actual {
                let indices: Vec<usize> = cause
                    .variables
                    .iter()
                    .filter_map(|n| n.strip_prefix("f:").and_then(|i| i.parse().ok()))
                    .collect();
                cause.variables = cause
                    .variables
                    .iter()
                    .map(|name| factor_display_name(mdp, name))
                    .collect();
                cause.values = indices
                    .iter()
                    .zip(&cause.values)
                    .map(|(&i, raw)| {
                        raw.parse::<usize>()
                            .ok()
                            .and_then(|idx| mdp.factors()[i].values.get(idx).cloned())
                            .unwrap_or_else(|| raw.clone())
                    })
                    .collect();
                cause.responsibility = scores.get(&cause.variables).copied();
            }
            Ok(actual)
        }
        Method::MeanResp => {
            let (weak, _) =
                mean_resp_with(mdp, policy, request.s0, &factor_indices, &request.config)?;
            Ok(determine_actual_causes(&weak))
        }
        Method::Sampled => {
            let (weak, _) = mean_resp_sampled(
                mdp,
                policy,
                request.s0,
                &factor_indices,
                &request.config,
                &request.scheme,
            )?;
            Ok(determine_actual_causes_relative(&weak))
        }
        Method::Beam => unreachable!("rejected by validate"),
    }
}

fn factor_display_name(mdp: &MdpModel, schema_name: &str) -> String {
    schema_name
        .strip_prefix("f:")
        .and_then(|i| i.parse::<usize>().ok())
        .map(|i| mdp.factors()[i].name.clone())
        .unwrap_or_else(|| schema_name.to_string())
}

/// R- and T-type queries: value model with the complementary family in the
/// context, candidates drawn from the scheme's rules for the family.
fn run_rule_query(
    mdp: &MdpModel,
    request: &ExplanationRequest,
    action: ActionId,
    family: QueryType,
) -> Result<Vec<CauseSet>, ExplainError> {
    let options = match family {
        QueryType::R => ValueScmOptions {
            transitions_in_context: true,
            rewards_in_context: false,
        },
        QueryType::T => ValueScmOptions {
            transitions_in_context: false,
            rewards_in_context: true,
        },
        _ => unreachable!(),
    };
    let scm = build_value_scm_with(mdp, request.s0, request.horizon, None, options)?;
    let scm = discretize_domains(&scm, &request.scheme)?;
    let graph = construct_causal_graph(&scm)?;
    let succ = build_successor_graph(mdp);
    let lcg = construct_lcg(&scm, &graph, &succ, request.s0, request.horizon)?;

    // Candidate rules of the right family: a rule belongs to the family of
    // its first target variable.
    let rules: Vec<&crate::approx::RuleSpec> = request
        .scheme
        .rules
        .iter()
        .filter(|r| {
            r.targets.first().is_some_and(|t| {
                let is_reward = t.var.starts_with("R:");
                match family {
                    QueryType::R => is_reward,
                    QueryType::T => !is_reward,
                    _ => false,
                }
            })
        })
        .filter(|r| r.targets.iter().all(|t| scm.by_name(&t.var).is_some()))
        .collect();
    if rules.is_empty() {
        return Err(ExplainError::RulesRequired(match family {
            QueryType::R => "R-type",
            _ => "T-type",
        }));
    }

    let mut names = Vec::new();
    let mut domains = Vec::new();
    let mut actual = Vec::new();
    let mut actual_labels = Vec::new();
    for rule in &rules {
        let actual_param = rule.actual_param(&scm)?;
        let mut domain: Vec<Value> = rule.grid.iter().map(|&x| Value::num(x)).collect();
        domain.push(Value::num(actual_param));
        domain.sort();
        domain.dedup();
        names.push(rule.name.clone());
        domains.push(domain);
        actual.push(Value::num(actual_param));
        actual_labels.push(actual_param.to_string());
    }
    let space = CandidateSpace {
        names,
        domains,
        actual,
        actual_labels,
    };
    let num_actions = mdp.num_actions();
    let s0 = request.s0;
    let flip = |assignment: &crate::approx::SpaceAssignment| -> bool {
        let mut iv: BTreeMap<VarId, Value> = BTreeMap::new();
        for (&member, &param) in assignment {
            let expanded = match apply_rule(&scm, rules[member], param.as_f64()) {
                Ok(x) => x,
                Err(_) => return false,
            };
            iv.extend(expanded);
        }
        let world = lcg.evaluate(&iv);
        induced_action(&scm, &world, s0, num_actions) != action
    };
    let sampled = matches!(request.method, Method::Sampled);
    let accepted = responsibility_search(&space, &request.config, sampled, flip)?;
    let weak: Vec<CauseSet> = accepted
        .iter()
        .map(|(subset, score)| CauseSet {
            variables: subset.iter().map(|&m| space.names[m].clone()).collect(),
            values: subset
                .iter()
                .map(|&m| space.actual_labels[m].clone())
                .collect(),
            witness: None,
            responsibility: Some(score.rho),
            minimality_relative: false,
        })
        .collect();
    Ok(if sampled {
        determine_actual_causes_relative(&weak)
    } else {
        determine_actual_causes(&weak)
    })
}

fn run_value_query(
    mdp: &MdpModel,
    request: &ExplanationRequest,
    action: ActionId,
) -> Result<(Vec<CauseSet>, Option<Vec<Vec<String>>>), ExplainError> {
    let scm = build_value_scm_with(
        mdp,
        request.s0,
        request.horizon,
        None,
        ValueScmOptions::default(),
    )?;
    let scm = discretize_domains(&scm, &request.scheme)?;
    let graph = construct_causal_graph(&scm)?;
    let succ = build_successor_graph(mdp);
    let lcg = construct_lcg(&scm, &graph, &succ, request.s0, request.horizon)?;
    let pi_var = scm
        .by_name(
            &VarKind::PolicyIndicator {
                state: request.s0,
                action,
            }
            .name(),
        )
        .expect("selection indicator exists");
    let event = Event(vec![Literal {
        var: pi_var,
        value: Value::Bool(true),
        negated: false,
    }]);
    // Explanans: value variables of the deepest finite layer that has any.
    let top_values: Vec<VarId> = (0..lcg.num_layers())
        .rev()
        .map(|i| {
            lcg.layer(i)
                .iter()
                .copied()
                .filter(|&v| matches!(scm.var(v).kind, VarKind::Value { .. }))
                .collect::<Vec<_>>()
        })
        .find(|vs| !vs.is_empty())
        .unwrap_or_default();
    if top_values.is_empty() {
        return Ok((Vec::new(), None));
    }
    let query = CausalQuery::new(top_values, event);
    match request.method {
        Method::Beam => {
            let width = request.config.beam_width.expect("validated");
            let result = beam_search_influence(&lcg, &query, width)?;
            let survivors = result
                .trace
                .survivors
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|&v| scm.var(v).name.clone())
                        .collect::<Vec<_>>()
                })
                .collect();
            Ok((result.causes, Some(survivors)))
        }
        Method::Exact => {
            let reduced = reduce_lcg(&lcg, &query.explanans, &query.event)?;
            let surviving: Vec<VarId> = query
                .explanans
                .iter()
                .copied()
                .filter(|&x| reduced.layer_index(x).is_some())
                .collect();
            if surviving.is_empty() {
                return Ok((Vec::new(), None));
            }
            let query = CausalQuery::new(surviving, query.event.clone());
            let weak = determine_weak_causes(&reduced, &query)?;
            let actual = verified_minimal(&reduced, &query, weak);
            Ok((actual, None))
        }
        _ => unreachable!("rejected by validate"),
    }
}

/// Minimality with oracle re-verification when the subset fits the budget.
fn verified_minimal(
    lcg: &crate::scm::LayeredCausalGraph,
    query: &CausalQuery,
    weak: Vec<CauseSet>,
) -> Vec<CauseSet> {
    let scm = &lcg.scm;
    crate::exact::determine_actual_causes_verified(&weak, |subset| {
        let vars: Option<Vec<VarId>> = subset.iter().map(|n| scm.by_name(n)).collect();
        let vars = vars?;
        oracle_weak_cause_with_budget(scm, query, &vars, 200_000).ok()
    })
}
