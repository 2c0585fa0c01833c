//! Fixtures for unit, integration and acceptance tests. Not part of the
//! public API surface.

use crate::mdp::{
    solve_value_iteration, ActionId, Factor, MdpError, MdpModel, Policy, StateId, TransitionEntry,
};
use rand::Rng;

fn entry(successor: usize, probability: f64, reward: f64) -> TransitionEntry {
    TransitionEntry {
        successor: StateId(successor),
        probability,
        reward,
    }
}

fn point_start(n: usize, s: usize) -> Vec<f64> {
    let mut start = vec![0.0; n];
    start[s] = 1.0;
    start
}

fn single_factor(n: usize) -> Vec<Factor> {
    vec![Factor {
        name: "s".into(),
        values: (0..n).map(|i| i.to_string()).collect(),
    }]
}

/// Two states: s0 -a-> s1 with reward 1, s0 -b-> s1 with reward 0,
/// s1 absorbing with reward 0 under both actions.
pub fn two_state_mdp(gamma: f64) -> MdpModel {
    MdpModel::new(
        single_factor(2),
        vec!["a".into(), "b".into()],
        vec![
            vec![vec![entry(1, 1.0, 1.0)], vec![entry(1, 1.0, 0.0)]],
            vec![vec![entry(1, 1.0, 0.0)], vec![entry(1, 1.0, 0.0)]],
        ],
        gamma,
        point_start(2, 0),
    )
    .unwrap()
}

/// Three states, all rewards zero, two actions (loop or advance).
pub fn zero_reward_mdp() -> MdpModel {
    let rows = (0..3)
        .map(|s| {
            vec![
                vec![entry(s, 1.0, 0.0)],
                vec![entry((s + 1) % 3, 1.0, 0.0)],
            ]
        })
        .collect();
    MdpModel::new(
        single_factor(3),
        vec!["stay".into(), "go".into()],
        rows,
        0.9,
        point_start(3, 0),
    )
    .unwrap()
}

/// Single state with a self-loop of reward 1.
pub fn self_loop_mdp(gamma: f64) -> MdpModel {
    MdpModel::new(
        single_factor(1),
        vec!["loop".into()],
        vec![vec![vec![entry(0, 1.0, 1.0)]]],
        gamma,
        point_start(1, 0),
    )
    .unwrap()
}

/// Deterministic 3-cycle s0 → s1 → s2 → s0 with a single action.
pub fn three_cycle_mdp() -> MdpModel {
    let rows = (0..3).map(|s| vec![vec![entry((s + 1) % 3, 1.0, 0.0)]]).collect();
    MdpModel::new(
        single_factor(3),
        vec!["go".into()],
        rows,
        0.9,
        point_start(3, 0),
    )
    .unwrap()
}

/// s0 splits stochastically to s1 (0.6) and s2 (0.4); s1, s2 absorbing.
pub fn stochastic_split_mdp() -> MdpModel {
    MdpModel::new(
        single_factor(3),
        vec!["go".into()],
        vec![
            vec![vec![entry(1, 0.6, 0.0), entry(2, 0.4, 0.0)]],
            vec![vec![entry(1, 1.0, 0.0)]],
            vec![vec![entry(2, 1.0, 0.0)]],
        ],
        0.9,
        point_start(3, 0),
    )
    .unwrap()
}

/// Diamond: s0 -a-> s1, s0 -b-> s2, both continue to s3, s3 absorbing.
pub fn diamond_mdp() -> MdpModel {
    MdpModel::new(
        single_factor(4),
        vec!["a".into(), "b".into()],
        vec![
            vec![vec![entry(1, 1.0, 0.0)], vec![entry(2, 1.0, 0.0)]],
            vec![vec![entry(3, 1.0, 1.0)], vec![entry(3, 1.0, 0.0)]],
            vec![vec![entry(3, 1.0, 0.0)], vec![entry(3, 1.0, 0.5)]],
            vec![vec![entry(3, 1.0, 0.0)], vec![entry(3, 1.0, 0.0)]],
        ],
        0.9,
        point_start(4, 0),
    )
    .unwrap()
}

/// Two Boolean factors f1, f2; all states absorbing. Rewards make the
/// optimal policy "a iff f1 = 1" with deterministic margins.
pub fn toy_policy_mdp() -> MdpModel {
    let factors = vec![
        Factor {
            name: "f1".into(),
            values: vec!["0".into(), "1".into()],
        },
        Factor {
            name: "f2".into(),
            values: vec!["0".into(), "1".into()],
        },
    ];
    // States in row-major order: (f1,f2) = (0,0), (0,1), (1,0), (1,1).
    let rows = (0..4usize)
        .map(|s| {
            let f1 = s / 2;
            let reward_a = if f1 == 1 { 1.0 } else { -1.0 };
            vec![
                vec![entry(s, 1.0, reward_a)],
                vec![entry(s, 1.0, 0.0)],
            ]
        })
        .collect();
    MdpModel::new(
        factors,
        vec!["a".into(), "b".into()],
        rows,
        0.5,
        point_start(4, 2), // start at (f1, f2) = (1, 0)
    )
    .unwrap()
}

/// 2×3 grid of two factors; trivial self-loop dynamics. Used for encoding
/// tests only.
pub fn grid2x3_mdp() -> MdpModel {
    let factors = vec![
        Factor {
            name: "r".into(),
            values: vec!["0".into(), "1".into()],
        },
        Factor {
            name: "c".into(),
            values: vec!["0".into(), "1".into(), "2".into()],
        },
    ];
    let rows = (0..6).map(|s| vec![vec![entry(s, 1.0, 0.0)]]).collect();
    MdpModel::new(factors, vec!["stay".into()], rows, 0.9, point_start(6, 0)).unwrap()
}

/// A model with a transition row that sums to 0.9 — must fail validation.
pub fn broken_row_mdp() -> Result<MdpModel, MdpError> {
    MdpModel::new(
        single_factor(2),
        vec!["a".into()],
        vec![
            vec![vec![entry(1, 0.9, 0.0)]],
            vec![vec![entry(1, 1.0, 0.0)]],
        ],
        0.9,
        point_start(2, 0),
    )
}

/// Greedy policy for a model, solved to high precision.
pub fn greedy(mdp: &MdpModel) -> Policy {
    solve_value_iteration(mdp, 1e-10).unwrap().1
}

/// A random factored MDP with the given bounds. Transitions are sparse
/// (1–3 successors per row) and normalized; rewards in [−1, 1].
pub fn random_mdp<R: Rng>(
    rng: &mut R,
    max_factors: usize,
    max_domain: usize,
    max_actions: usize,
) -> MdpModel {
    let nf = rng.gen_range(1..=max_factors);
    let factors: Vec<Factor> = (0..nf)
        .map(|i| Factor {
            name: format!("f{i}"),
            values: (0..rng.gen_range(2..=max_domain.max(2)))
                .map(|v| v.to_string())
                .collect(),
        })
        .collect();
    let n: usize = factors.iter().map(|f| f.values.len()).product();
    let na = rng.gen_range(1..=max_actions);
    let actions = (0..na).map(|a| format!("a{a}")).collect();
    let rows = (0..n)
        .map(|_| {
            (0..na)
                .map(|_| {
                    let k = rng.gen_range(1..=3.min(n));
                    let mut succs = Vec::new();
                    while succs.len() < k {
                        let s = rng.gen_range(0..n);
                        if !succs.contains(&s) {
                            succs.push(s);
                        }
                    }
                    let mut probs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let total: f64 = probs.iter().sum();
                    for p in &mut probs {
                        *p /= total;
                    }
                    // force exact normalization
                    let adjust: f64 = 1.0 - probs.iter().sum::<f64>();
                    probs[0] += adjust;
                    succs
                        .iter()
                        .zip(&probs)
                        .map(|(&s, &p)| entry(s, p, rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let gamma = rng.gen_range(0.5..0.95);
    MdpModel::new(factors, actions, rows, gamma, point_start(n, 0)).unwrap()
}

/// Convenience: the action index of a named action.
pub fn action_index(mdp: &MdpModel, name: &str) -> ActionId {
    ActionId(mdp.actions().iter().position(|a| a == name).unwrap())
}

use crate::exact::CausalQuery;
use crate::scm::{
    Domain, Equation, Event, LayeredCausalGraph, Literal, ScmBuilder, Value, VarId, VarKind,
};

/// A random layered SCM (1–3 layers, ≤ 6 variables, domains of size 2–3)
/// with a query whose event holds in the actual world and whose explanans
/// is a subset of the top layer.
pub fn random_layered_scm<R: Rng>(rng: &mut R) -> (LayeredCausalGraph, CausalQuery) {
    let num_layers = rng.gen_range(1..=3);
    let mut sizes = vec![1; num_layers];
    let mut remaining = rng.gen_range(0..=(6 - num_layers));
    while remaining > 0 {
        let i = rng.gen_range(0..num_layers);
        if sizes[i] < 4 {
            sizes[i] += 1;
            remaining -= 1;
        } else {
            break;
        }
    }

    let mut b = ScmBuilder::new();
    let mut domain_sizes: Vec<usize> = Vec::new();
    // Build from the top layer down so parents exist before children.
    let mut layers_top_down: Vec<Vec<VarId>> = Vec::new();
    let mut index = 0usize;
    for li in (0..num_layers).rev() {
        let mut layer = Vec::new();
        for _ in 0..sizes[li] {
            let domain_size = rng.gen_range(2..=3);
            let domain = Domain::indexed(domain_size);
            let (parents, eq) = if li == num_layers - 1 {
                (
                    Vec::new(),
                    Equation::Const(Value::Index(rng.gen_range(0..domain_size))),
                )
            } else {
                let upper = layers_top_down.last().expect("built top-down");
                let parents: Vec<VarId> = upper
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.7))
                    .collect();
                if parents.is_empty() {
                    (
                        Vec::new(),
                        Equation::Const(Value::Index(rng.gen_range(0..domain_size))),
                    )
                } else {
                    let dims: Vec<usize> =
                        parents.iter().map(|&p| domain_sizes[p.0]).collect();
                    let rows: usize = dims.iter().product();
                    let out = (0..rows)
                        .map(|_| Value::Index(rng.gen_range(0..domain_size)))
                        .collect();
                    (parents, Equation::Table { dims, out })
                }
            };
            let id = b.add(VarKind::Factor { index }, domain, parents, eq);
            domain_sizes.push(domain_size);
            index += 1;
            layer.push(id);
        }
        layers_top_down.push(layer);
    }
    let scm = b.build().expect("layered models are acyclic");
    let live = (0..scm.num_vars())
        .map(|v| vec![true; scm.parents(VarId(v)).len()])
        .collect();
    let mut layers = layers_top_down;
    layers.reverse(); // S^0 first
    let lcg = LayeredCausalGraph::from_parts(scm, layers, live).expect("layered by construction");

    // Event over S^0 (1–2 positive literals at actual values, or a negated
    // non-actual literal), explanans in the top layer minus the event.
    let event_layer = lcg.layer(0).to_vec();
    let top = lcg.explanans_layer().to_vec();
    let mut event_vars: Vec<VarId> = Vec::new();
    let first = event_layer[rng.gen_range(0..event_layer.len())];
    event_vars.push(first);
    if event_layer.len() > 1 && rng.gen_bool(0.4) {
        let second = event_layer[rng.gen_range(0..event_layer.len())];
        if second != first {
            event_vars.push(second);
        }
    }
    let scm = &lcg.scm;
    let literals = event_vars
        .iter()
        .map(|&v| {
            let actual = scm.actual(v);
            if rng.gen_bool(0.25) {
                let other = scm
                    .domain(v)
                    .0
                    .iter()
                    .copied()
                    .find(|x| *x != actual)
                    .expect("domains have at least two values");
                Literal {
                    var: v,
                    value: other,
                    negated: true,
                }
            } else {
                Literal {
                    var: v,
                    value: actual,
                    negated: false,
                }
            }
        })
        .collect();
    let event = Event(literals);
    let explanans: Vec<VarId> = top
        .iter()
        .copied()
        .filter(|v| !event_vars.contains(v))
        .collect();
    if explanans.is_empty() {
        // single-layer instance whose event swallowed the whole layer
        return random_layered_scm(rng);
    }
    let query = CausalQuery::new(explanans, event);
    (lcg, query)
}
