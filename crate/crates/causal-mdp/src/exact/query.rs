//! Causal queries and cause sets.

use crate::scm::{Event, LayeredCausalGraph, StructuralCausalModel, Value, VarId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("enumeration budget of {0} evaluations exceeded")]
    EnumerationBudget(u64),
    #[error("explanans variables span more than one layer")]
    ExplanansSplitAcrossLayers,
    #[error("explanans variable `{0}` is not in the layered graph")]
    ExplanansNotLayered(String),
    #[error("event variable `{0}` is outside the event layer")]
    EventOutsideEventLayer(String),
    #[error("event does not hold in the actual world")]
    EventFailsActually,
    #[error("candidate variable `{0}` is not among the explanans")]
    CandidateOutsideExplanans(String),
    #[error("explanans and event variables overlap")]
    ExplanansIntersectsEvent,
    #[error("explanans is empty")]
    EmptyExplanans,
    #[error(transparent)]
    Scm(#[from] crate::scm::ScmError),
}

/// A weak/actual-cause query: candidate explanans X (with their actual
/// values) against an event φ over the event layer. The context assignment
/// lives in the model itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CausalQuery {
    /// Candidate explanans, sorted by variable id.
    pub explanans: Vec<VarId>,
    pub event: Event,
}

impl CausalQuery {
    pub fn new(mut explanans: Vec<VarId>, event: Event) -> Self {
        explanans.sort();
        explanans.dedup();
        CausalQuery { explanans, event }
    }

    /// Actual values of the explanans variables, in explanans order.
    pub fn actual_values(&self, scm: &StructuralCausalModel) -> Vec<Value> {
        self.explanans.iter().map(|&v| scm.actual(v)).collect()
    }

    /// Checks the query against a layered graph: the event must live in S^0,
    /// the explanans in one common layer, the two disjoint, and the event
    /// must hold in the actual world. Returns the explanans layer index.
    pub fn validate(&self, lcg: &LayeredCausalGraph) -> Result<usize, InferenceError> {
        if self.explanans.is_empty() {
            return Err(InferenceError::EmptyExplanans);
        }
        let event_vars = self.event.vars();
        for v in &event_vars {
            if self.explanans.contains(v) {
                return Err(InferenceError::ExplanansIntersectsEvent);
            }
            if lcg.layer_index(*v) != Some(0) {
                return Err(InferenceError::EventOutsideEventLayer(
                    lcg.scm.var(*v).name.clone(),
                ));
            }
        }
        let mut layer = None;
        for &x in &self.explanans {
            let lx = lcg
                .layer_index(x)
                .ok_or_else(|| InferenceError::ExplanansNotLayered(lcg.scm.var(x).name.clone()))?;
            match layer {
                None => layer = Some(lx),
                Some(l) if l != lx => return Err(InferenceError::ExplanansSplitAcrossLayers),
                _ => {}
            }
        }
        if !self.event.holds(lcg.scm.actuals()) {
            return Err(InferenceError::EventFailsActually);
        }
        Ok(layer.expect("explanans non-empty"))
    }
}

/// A certificate for condition 2A: holding `vars = values` fixed while the
/// cause variables take `defeating` makes the event false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub vars: Vec<String>,
    pub values: Vec<Value>,
    pub defeating: Vec<Value>,
}

/// One identified cause: a subset of the explanans with its actual values
/// (as display labels), an optional witness certificate and an optional
/// responsibility score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauseSet {
    #[serde(rename = "vars")]
    pub variables: Vec<String>,
    pub values: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(rename = "rho", skip_serializing_if = "Option::is_none")]
    pub responsibility: Option<f64>,
    /// True when minimality was only checked against the (possibly
    /// incomplete) family the cause came from.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub minimality_relative: bool,
}

impl CauseSet {
    pub fn var_set(&self) -> std::collections::BTreeSet<&str> {
        self.variables.iter().map(String::as_str).collect()
    }

    pub fn is_proper_subset_of(&self, other: &CauseSet) -> bool {
        let a = self.var_set();
        let b = other.var_set();
        a.len() < b.len() && a.is_subset(&b)
    }
}
