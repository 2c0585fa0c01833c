//! Variables, values and finite domains.

use crate::mdp::{ActionId, StateId};
use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Index of a variable within its model.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct VarId(pub usize);

/// A single variable value. Factor values are indices into the factor's
/// domain list; numeric values carry a total order so assignments can be
/// hashed and sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Index(usize),
    Num(OrderedFloat<f64>),
}

impl Value {
    pub fn num(x: f64) -> Self {
        Value::Num(OrderedFloat(x))
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Index(i) => *i != 0,
            Value::Num(x) => x.0 != 0.0,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Bool(b) => {
                if *b {
                    1.0
                } else {
                    0.0
                }
            }
            Value::Index(i) => *i as f64,
            Value::Num(x) => x.0,
        }
    }

    pub fn as_index(&self) -> usize {
        match self {
            Value::Index(i) => *i,
            Value::Bool(b) => *b as usize,
            Value::Num(x) => x.0 as usize,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Index(i) => write!(f, "{i}"),
            Value::Num(x) => write!(f, "{}", x.0),
        }
    }
}

/// An ordered, finite, non-empty list of values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain(pub Vec<Value>);

impl Domain {
    pub fn boolean() -> Self {
        Domain(vec![Value::Bool(false), Value::Bool(true)])
    }

    pub fn indexed(n: usize) -> Self {
        Domain((0..n).map(Value::Index).collect())
    }

    pub fn singleton(v: Value) -> Self {
        Domain(vec![v])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }
}

/// What a variable stands for. The kind determines the name schema and the
/// state association used when layering value-model graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    /// State factor f_i.
    Factor { index: usize },
    /// Indicator [s = s_i].
    StateIndicator { state: StateId },
    /// Indicator [π(s) = a].
    PolicyIndicator { state: StateId, action: ActionId },
    /// R(s, a, s').
    Reward {
        state: StateId,
        action: ActionId,
        successor: StateId,
    },
    /// T(s, a, s').
    Transition {
        state: StateId,
        action: ActionId,
        successor: StateId,
    },
    /// V(s).
    Value { state: StateId },
    /// V^a(s), the value of committing to action a at s.
    ActionValue { state: StateId, action: ActionId },
}

impl VarKind {
    /// Stable, parseable name: `f:<i>`, `s:<s>`, `pi:<s>:<a>`, `R:<s>:<a>:<s'>`,
    /// `T:<s>:<a>:<s'>`, `V:<s>`, `Q:<s>:<a>`.
    pub fn name(&self) -> String {
        match self {
            VarKind::Factor { index } => format!("f:{index}"),
            VarKind::StateIndicator { state } => format!("s:{}", state.0),
            VarKind::PolicyIndicator { state, action } => format!("pi:{}:{}", state.0, action.0),
            VarKind::Reward {
                state,
                action,
                successor,
            } => format!("R:{}:{}:{}", state.0, action.0, successor.0),
            VarKind::Transition {
                state,
                action,
                successor,
            } => format!("T:{}:{}:{}", state.0, action.0, successor.0),
            VarKind::Value { state } => format!("V:{}", state.0),
            VarKind::ActionValue { state, action } => format!("Q:{}:{}", state.0, action.0),
        }
    }

    /// The state this variable is associated with when layering: indicators,
    /// policy and value variables map to their own state; transition and
    /// reward variables map to their successor state. Factors are global.
    pub fn associated_state(&self) -> Option<StateId> {
        match self {
            VarKind::Factor { .. } => None,
            VarKind::StateIndicator { state }
            | VarKind::PolicyIndicator { state, .. }
            | VarKind::Value { state }
            | VarKind::ActionValue { state, .. } => Some(*state),
            VarKind::Reward { successor, .. } | VarKind::Transition { successor, .. } => {
                Some(*successor)
            }
        }
    }

    /// Sub-level within a state's stack of variables: action-values sit half
    /// a layer above plain values so aggregation edges survive layering.
    pub fn sublevel(&self) -> u8 {
        matches!(self, VarKind::ActionValue { .. }) as u8
    }
}

/// A named variable with a finite domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
    pub domain: Domain,
}
