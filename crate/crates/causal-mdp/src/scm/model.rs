//! The structural causal model and forward evaluation.

use super::equation::Equation;
use super::variable::{Domain, Value, VarId, VarKind, Variable};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScmError {
    #[error("equation graph is cyclic; layer it first")]
    CyclicEquations,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("no perfect matching between variables and equations; deficient set: {0:?}")]
    NoPerfectMatching(Vec<String>),
    #[error("graph is not layered: {0}")]
    NotLayered(String),
    #[error("value-model horizon must be at least 1, got {0}")]
    HorizonTooSmall(usize),
    #[error("explanans intersects event variables")]
    ExplanansIntersectsEvent,
    #[error("variable `{0}` has an undiscretized continuous domain")]
    Undiscretized(String),
    #[error("actual value {actual} of `{name}` outside declared bounds [{lo}, {hi}]")]
    OutOfBounds {
        name: String,
        actual: f64,
        lo: f64,
        hi: f64,
    },
    #[error("discretization scheme does not cover variable `{0}`")]
    UncoveredVariable(String),
}

/// One (variable, required value) literal; negated literals require the
/// variable to differ from the value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub var: VarId,
    pub value: Value,
    pub negated: bool,
}

/// A conjunction of literals over the event layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Event(pub Vec<Literal>);

impl Event {
    pub fn holds(&self, world: &[Value]) -> bool {
        self.0.iter().all(|lit| {
            let is = world[lit.var.0] == lit.value;
            is != lit.negated
        })
    }

    /// Distinct variables mentioned, sorted.
    pub fn vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.0.iter().map(|l| l.var).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// A structural causal model: exogenous context, endogenous variables and one
/// structural equation per variable.
///
/// The actual world (the values every variable takes under the current
/// context with no interventions) is fixed at construction. For acyclic
/// models it equals the no-intervention evaluation; value models built from
/// a Bellman system store the solved fixed point instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructuralCausalModel {
    variables: Vec<Variable>,
    parents: Vec<Vec<VarId>>,
    equations: Vec<Equation>,
    context: BTreeMap<String, f64>,
    actuals: Vec<Value>,
    /// Cached topological order; `None` when the equation graph is cyclic.
    topo: Option<Vec<VarId>>,
}

impl StructuralCausalModel {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn domain(&self, v: VarId) -> &Domain {
        &self.variables[v.0].domain
    }

    pub fn parents(&self, v: VarId) -> &[VarId] {
        &self.parents[v.0]
    }

    pub fn equation(&self, v: VarId) -> &Equation {
        &self.equations[v.0]
    }

    pub fn context(&self) -> &BTreeMap<String, f64> {
        &self.context
    }

    pub fn gamma(&self) -> f64 {
        self.context.get("gamma").copied().unwrap_or(1.0)
    }

    pub fn actuals(&self) -> &[Value] {
        &self.actuals
    }

    pub fn actual(&self, v: VarId) -> Value {
        self.actuals[v.0]
    }

    pub fn by_name(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(VarId)
    }

    pub fn vars_of_kind(&self, pred: impl Fn(&VarKind) -> bool) -> Vec<VarId> {
        self.variables
            .iter()
            .filter(|v| pred(&v.kind))
            .map(|v| v.id)
            .collect()
    }

    /// Cached topological order; `None` when cyclic.
    pub fn topological_order(&self) -> Option<&[VarId]> {
        self.topo.as_deref()
    }

    /// Kahn topological order over the equation graph; `None` if cyclic.
    fn compute_topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (v, ps) in self.parents.iter().enumerate() {
            indegree[v] = ps.len();
            for p in ps {
                children[p.0].push(v);
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        ready.sort_unstable();
        let mut order = Vec::with_capacity(n);
        let mut queue = std::collections::BinaryHeap::new();
        for v in ready.drain(..) {
            queue.push(std::cmp::Reverse(v));
        }
        while let Some(std::cmp::Reverse(v)) = queue.pop() {
            order.push(VarId(v));
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(std::cmp::Reverse(c));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Evaluates one variable's equation against explicit parent values.
    pub fn eval_equation(&self, v: VarId, parent_values: &[Value]) -> Value {
        let ps = &self.parents[v.0];
        self.equations[v.0].eval(
            parent_values,
            |i, val| {
                self.domain(ps[i]).index_of(val).unwrap_or_else(|| {
                    panic!(
                        "value {val} outside domain of `{}`",
                        self.var(ps[i]).name
                    )
                })
            },
            self.gamma(),
        )
    }

    /// Swaps in a new domain for one variable (used by discretization).
    pub fn replace_domain(&mut self, v: VarId, domain: Domain) {
        self.variables[v.0].domain = domain;
    }

    /// Replaces the root constants named by `values` and recomputes the
    /// actual world. Only valid on acyclic models. Used to re-root the
    /// factor model at a different current state.
    pub fn with_root_values(
        &self,
        values: &BTreeMap<VarId, Value>,
    ) -> Result<StructuralCausalModel, ScmError> {
        let mut scm = self.clone();
        for (&v, &val) in values {
            scm.equations[v.0] = Equation::Const(val);
        }
        scm.actuals = evaluate_scm(&scm, &BTreeMap::new())?;
        Ok(scm)
    }
}

/// Evaluates the model under a partial intervention.
///
/// Intervened variables take the intervened value, ignoring their equation;
/// every other variable takes its equation's value given its parents, in
/// topological order. Cyclic models are rejected.
pub fn evaluate_scm(
    scm: &StructuralCausalModel,
    interventions: &BTreeMap<VarId, Value>,
) -> Result<Vec<Value>, ScmError> {
    let order = scm.topological_order().ok_or(ScmError::CyclicEquations)?;
    let mut world = vec![Value::Bool(false); scm.num_vars()];
    let mut parent_buf = Vec::new();
    for &v in order {
        if let Some(val) = interventions.get(&v) {
            world[v.0] = *val;
            continue;
        }
        parent_buf.clear();
        parent_buf.extend(scm.parents(v).iter().map(|p| world[p.0]));
        world[v.0] = scm.eval_equation(v, &parent_buf);
    }
    Ok(world)
}

/// Incremental builder used by the model constructors and tests.
#[derive(Debug, Default)]
pub struct ScmBuilder {
    variables: Vec<Variable>,
    parents: Vec<Vec<VarId>>,
    equations: Vec<Equation>,
    context: BTreeMap<String, f64>,
}

impl ScmBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_context(&mut self, key: &str, value: f64) {
        self.context.insert(key.to_string(), value);
    }

    pub fn add(
        &mut self,
        kind: VarKind,
        domain: Domain,
        parents: Vec<VarId>,
        equation: Equation,
    ) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            id,
            name: kind.name(),
            kind,
            domain,
        });
        self.parents.push(parents);
        self.equations.push(equation);
        id
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Finishes an acyclic model; the actual world is the no-intervention
    /// evaluation.
    pub fn build(self) -> Result<StructuralCausalModel, ScmError> {
        let mut scm = StructuralCausalModel {
            variables: self.variables,
            parents: self.parents,
            equations: self.equations,
            context: self.context,
            actuals: Vec::new(),
            topo: None,
        };
        scm.topo = scm.compute_topological_order();
        if scm.topo.is_none() {
            return Err(ScmError::CyclicEquations);
        }
        scm.actuals = evaluate_scm(&scm, &BTreeMap::new())?;
        Ok(scm)
    }

    /// Finishes a model whose actual world is supplied externally (cyclic
    /// Bellman systems store their solved fixed point).
    pub fn build_with_actuals(self, actuals: Vec<Value>) -> StructuralCausalModel {
        debug_assert_eq!(actuals.len(), self.variables.len());
        let mut scm = StructuralCausalModel {
            variables: self.variables,
            parents: self.parents,
            equations: self.equations,
            context: self.context,
            actuals,
            topo: None,
        };
        scm.topo = scm.compute_topological_order();
        scm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_scm() -> StructuralCausalModel {
        // a := true; b := a; c := b  (boolean copy chain via tables)
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
            Equation::Table {
                dims: vec![2],
                out: vec![Value::Bool(false), Value::Bool(true)],
            },
        );
        b.add(
            VarKind::Factor { index: 2 },
            Domain::boolean(),
            vec![bb],
            Equation::Table {
                dims: vec![2],
                out: vec![Value::Bool(false), Value::Bool(true)],
            },
        );
        b.build().unwrap()
    }

    #[test]
    fn no_intervention_reproduces_actuals() {
        let scm = chain_scm();
        let world = evaluate_scm(&scm, &BTreeMap::new()).unwrap();
        assert_eq!(world, scm.actuals().to_vec());
        assert_eq!(world[2], Value::Bool(true));
    }

    #[test]
    fn intervention_propagates_downstream() {
        let scm = chain_scm();
        let mut iv = BTreeMap::new();
        iv.insert(VarId(0), Value::Bool(false));
        let world = evaluate_scm(&scm, &iv).unwrap();
        assert_eq!(world[2], Value::Bool(false));
    }

    #[test]
    fn idempotent_intervention_matches_actual_world() {
        let scm = chain_scm();
        let mut iv = BTreeMap::new();
        iv.insert(VarId(1), scm.actual(VarId(1)));
        let world = evaluate_scm(&scm, &iv).unwrap();
        assert_eq!(world, scm.actuals().to_vec());
    }

    #[test]
    fn cyclic_equations_rejected() {
        let mut b = ScmBuilder::new();
        let id_table = Equation::Table {
            dims: vec![2],
            out: vec![Value::Bool(false), Value::Bool(true)],
        };
        // a := b, b := a
        let a = VarId(0);
        let bb = VarId(1);
        b.add(
            VarKind::Factor { index: 0 },
            Domain::boolean(),
            vec![bb],
            id_table.clone(),
        );
        b.add(
            VarKind::Factor { index: 1 },
            Domain::boolean(),
            vec![a],
            id_table,
        );
        assert!(matches!(b.build(), Err(ScmError::CyclicEquations)));
    }
}
