//! Structural equations.
//!
//! Equations are plain data so models serialize; each references its parents
//! positionally. Numeric inputs that were pruned out of the variable set
//! (horizon fringes, families moved to the context) appear as baked constants.

use super::variable::Value;
use serde::{Deserialize, Serialize};

/// A numeric input to a value equation: either the i-th parent or a baked
/// constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Operand {
    Parent(usize),
    Const(f64),
}

impl Operand {
    fn get(&self, parents: &[Value]) -> f64 {
        match self {
            Operand::Parent(i) => parents[*i].as_f64(),
            Operand::Const(c) => *c,
        }
    }
}

/// One expected-successor term of a Q-value sum: probability, reward, and
/// next-state value.
pub type QTerm = (Operand, Operand, Operand);

fn q_sum(terms: &[QTerm], parents: &[Value], gamma: f64) -> f64 {
    terms
        .iter()
        .map(|(t, r, v)| t.get(parents) * (r.get(parents) + gamma * v.get(parents)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Equation {
    /// Root variable pinned to a constant.
    Const(Value),
    /// [s = s_i]: true iff every factor parent takes the expected value index.
    StateEquals { expected: Vec<usize> },
    /// [π(s) = a] in the factor model: the solved policy's verdict for (s, a)
    /// gated by the state indicator parent.
    PolicyGate { selected: bool },
    /// Σ_i t_i · (r_i + γ · v_i); γ is read from the model context.
    QValue { terms: Vec<QTerm> },
    /// max over numeric parents (value aggregation across action-values).
    MaxOf,
    /// [parent_k = max_j parent_j] over explicit action-value parents.
    ArgmaxEq { index: usize },
    /// [q_k = max_j q_j] where each q_j is a Q-value sum computed inline.
    QArgmax { entries: Vec<Vec<QTerm>>, index: usize },
    /// Dense lookup over parent domain indices, row-major in parent order.
    /// `dims[i]` is the domain size of parent i.
    Table { dims: Vec<usize>, out: Vec<Value> },
}

impl Equation {
    /// Evaluates the equation given parent values (in parent order).
    ///
    /// For [`Equation::Table`] the parent values must be convertible to
    /// domain indices, which the caller guarantees by passing values drawn
    /// from the parents' domains.
    pub fn eval(&self, parents: &[Value], parent_index: impl Fn(usize, &Value) -> usize, gamma: f64) -> Value {
        match self {
            Equation::Const(v) => *v,
            Equation::StateEquals { expected } => Value::Bool(
                expected
                    .iter()
                    .enumerate()
                    .all(|(i, &e)| parents[i].as_index() == e),
            ),
            Equation::PolicyGate { selected } => {
                Value::Bool(*selected && parents[0].as_bool())
            }
            Equation::QValue { terms } => Value::num(q_sum(terms, parents, gamma)),
            Equation::MaxOf => Value::num(
                parents
                    .iter()
                    .map(|v| v.as_f64())
                    .fold(f64::NEG_INFINITY, f64::max),
            ),
            Equation::ArgmaxEq { index } => {
                let best = parents
                    .iter()
                    .map(|v| v.as_f64())
                    .fold(f64::NEG_INFINITY, f64::max);
                Value::Bool(parents[*index].as_f64() >= best)
            }
            Equation::QArgmax { entries, index } => {
                let qs: Vec<f64> = entries.iter().map(|t| q_sum(t, parents, gamma)).collect();
                let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Value::Bool(qs[*index] >= best)
            }
            Equation::Table { dims, out } => {
                let mut idx = 0;
                for (i, p) in parents.iter().enumerate() {
                    idx = idx * dims[i] + parent_index(i, p);
                }
                out[idx]
            }
        }
    }

    /// Positions of parents referenced by operands (all of them for
    /// non-operand equations).
    pub fn arity_hint(&self) -> Option<usize> {
        match self {
            Equation::Const(_) => Some(0),
            Equation::PolicyGate { .. } => Some(1),
            Equation::StateEquals { expected } => Some(expected.len()),
            Equation::Table { dims, .. } => Some(dims.len()),
            _ => None,
        }
    }
}
