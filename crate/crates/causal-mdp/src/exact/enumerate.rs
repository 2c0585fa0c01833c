//! Canonical enumeration helpers: subsets by ascending bitmask over a sorted
//! variable slice, assignments in row-major domain order (last variable
//! varies fastest).

use crate::scm::{StructuralCausalModel, Value, VarId};

/// All subsets of `vars` in ascending bitmask order (the empty set first).
/// Bit `i` selects `vars[i]`.
pub fn subsets(vars: &[VarId]) -> impl Iterator<Item = Vec<VarId>> + '_ {
    (0u64..(1u64 << vars.len())).map(move |mask| pick(vars, mask))
}

pub fn pick(vars: &[VarId], mask: u64) -> Vec<VarId> {
    vars.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &v)| v)
        .collect()
}

/// Iterates every assignment over `vars`, yielding values in `vars` order.
pub struct Assignments<'a> {
    scm: &'a StructuralCausalModel,
    vars: &'a [VarId],
    counter: Vec<usize>,
    done: bool,
}

impl<'a> Assignments<'a> {
    pub fn new(scm: &'a StructuralCausalModel, vars: &'a [VarId]) -> Self {
        Assignments {
            scm,
            vars,
            counter: vec![0; vars.len()],
            done: vars.iter().any(|&v| scm.domain(v).is_empty()),
        }
    }

    /// Total number of assignments.
    pub fn count_total(scm: &StructuralCausalModel, vars: &[VarId]) -> u64 {
        vars.iter()
            .map(|&v| scm.domain(v).len() as u64)
            .product()
    }
}

impl Iterator for Assignments<'_> {
    type Item = Vec<Value>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out: Vec<Value> = self
            .vars
            .iter()
            .zip(&self.counter)
            .map(|(&v, &i)| self.scm.domain(v).0[i])
            .collect();
        // advance, last position fastest
        let mut pos = self.vars.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.counter[pos] += 1;
            if self.counter[pos] < self.scm.domain(self.vars[pos]).len() {
                break;
            }
            self.counter[pos] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{Domain, Equation, ScmBuilder, VarKind};

    #[test]
    fn assignments_cover_product_in_order() {
        let mut b = ScmBuilder::new();
        let x = b.add(
            VarKind::Factor { index: 0 },
            Domain::indexed(2),
            vec![],
            Equation::Const(Value::Index(0)),
        );
        let y = b.add(
            VarKind::Factor { index: 1 },
            Domain::indexed(3),
            vec![],
            Equation::Const(Value::Index(0)),
        );
        let scm = b.build().unwrap();
        let vars = [x, y];
        let all: Vec<Vec<Value>> = Assignments::new(&scm, &vars).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![Value::Index(0), Value::Index(0)]);
        assert_eq!(all[1], vec![Value::Index(0), Value::Index(1)]);
        assert_eq!(all[5], vec![Value::Index(1), Value::Index(2)]);
    }

    #[test]
    fn subsets_ascending() {
        let vars = [VarId(3), VarId(7)];
        let all: Vec<Vec<VarId>> = subsets(&vars).collect();
        assert_eq!(all.len(), 4);
        assert!(all[0].is_empty());
        assert_eq!(all[1], vec![VarId(3)]);
        assert_eq!(all[2], vec![VarId(7)]);
        assert_eq!(all[3], vec![VarId(3), VarId(7)]);
    }
}
