use causal_mdp::exact::{determine_weak_causes, oracle_weak_cause};
use causal_mdp::testkit::random_layered_scm;
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + 295);
    let (lcg, query) = random_layered_scm(&mut rng);
    let scm = &lcg.scm;
    println!("layers:");
    for (i, layer) in lcg.layers().iter().enumerate() {
        println!("  S^{i}: {:?}", layer.iter().map(|&v| scm.var(v).name.clone()).collect::<Vec<_>>());
    }
    for v in 0..scm.num_vars() {
        let v = causal_mdp::scm::VarId(v);
        println!(
            "  {}: domain {:?} parents {:?} eq {:?} actual {}",
            scm.var(v).name,
            scm.domain(v).0.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            scm.parents(v).iter().map(|&p| scm.var(p).name.clone()).collect::<Vec<_>>(),
            scm.equation(v),
            scm.actual(v),
        );
    }
    println!("event: {:?}", query.event);
    println!("explanans: {:?}", query.explanans.iter().map(|&v| scm.var(v).name.clone()).collect::<Vec<_>>());
    let weak = determine_weak_causes(&lcg, &query).unwrap();
    for w in &weak {
        println!("recurrence weak: {:?} witness {:?}", w.variables, w.witness);
    }
    let f2 = scm.by_name("f:1").unwrap();
    let o = oracle_weak_cause(scm, &query, &[f2]).unwrap();
    println!("oracle(f:1) = {o}");
}
