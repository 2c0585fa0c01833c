//! Actual causes: subset-minimal weak causes.

use super::query::CauseSet;

/// Filters a weak-cause family down to its subset-minimal members.
///
/// When the family is complete (exact inference enumerates every candidate
/// subset) relative minimality is true minimality. Approximate searches may
/// miss weak causes, so their outputs are flagged as relative; callers with
/// an affordable oracle can re-verify via [`determine_actual_causes_verified`].
pub fn determine_actual_causes(weak: &[CauseSet]) -> Vec<CauseSet> {
    minimal_members(weak, false)
}

/// As [`determine_actual_causes`], marking each member as only relatively
/// minimal (used when the weak family may be incomplete).
pub fn determine_actual_causes_relative(weak: &[CauseSet]) -> Vec<CauseSet> {
    minimal_members(weak, true)
}

/// Minimality with subset re-verification: a member is dropped if any proper
/// subset of it is in the family or is confirmed weak by `verify`. `verify`
/// returns `None` when the check is out of budget, in which case minimality
/// for that pair falls back to family membership and the member is flagged
/// relative.
pub fn determine_actual_causes_verified(
    weak: &[CauseSet],
    mut verify: impl FnMut(&[String]) -> Option<bool>,
) -> Vec<CauseSet> {
    let mut out = Vec::new();
    for c in weak {
        let mut minimal = true;
        let mut fully_checked = true;
        for other in weak {
            if other.is_proper_subset_of(c) {
                minimal = false;
                break;
            }
        }
        if minimal {
            // check proper subsets missing from the family
            let vars = &c.variables;
            for mask in 1u64..(1u64 << vars.len()) - 1 {
                let subset: Vec<String> = vars
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| v.clone())
                    .collect();
                if weak.iter().any(|w| {
                    w.variables.len() == subset.len() && w.var_set() == to_set(&subset)
                }) {
                    continue; // already covered by the family scan
                }
                match verify(&subset) {
                    Some(true) => {
                        minimal = false;
                        break;
                    }
                    Some(false) => {}
                    None => fully_checked = false,
                }
            }
        }
        if minimal {
            let mut c = c.clone();
            c.minimality_relative = !fully_checked;
            out.push(c);
        }
    }
    out
}

fn to_set(names: &[String]) -> std::collections::BTreeSet<&str> {
    names.iter().map(String::as_str).collect()
}

fn minimal_members(weak: &[CauseSet], relative: bool) -> Vec<CauseSet> {
    weak.iter()
        .filter(|c| !weak.iter().any(|other| other.is_proper_subset_of(c)))
        .map(|c| {
            let mut c = c.clone();
            c.minimality_relative = relative;
            c
        })
        .collect()
}
