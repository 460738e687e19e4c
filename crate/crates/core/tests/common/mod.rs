#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use multiverse_kit::boolean::{check_equality_axioms, BValuedStructure, CRelation, ClassicalStructure};
use multiverse_kit::{Formula, KripkeModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_graph(rng: &mut ChaCha8Rng, size: usize) -> ClassicalStructure {
    let mut tuples = BTreeSet::new();
    for a in 0..size {
        for b in 0..size {
            if rng.gen_bool(0.4) {
                tuples.insert(vec![a, b]);
            }
        }
    }
    ClassicalStructure {
        elements: (0..size).map(|i| format!("e{i}")).collect(),
        relations: BTreeMap::from([("R".to_string(), CRelation { arity: 2, tuples })]),
    }
}

/// A Boolean-valued structure over three atoms with three names, built from
/// three random graph stalks, together with the stalks and denotations.
pub struct StalkFixture {
    pub structure: BValuedStructure,
    pub stalks: Vec<(ClassicalStructure, Vec<usize>)>,
}

pub fn stalk_fixtures(count: usize, seed: u64) -> Vec<StalkFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = ["s", "t", "u"].iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    while out.len() < count {
        let stalks: Vec<(ClassicalStructure, Vec<usize>)> = (0..3)
            .map(|_| {
                let size = rng.gen_range(1..=3);
                let g = random_graph(&mut rng, size);
                let den = (0..names.len()).map(|_| rng.gen_range(0..size)).collect();
                (g, den)
            })
            .collect();
        let s = BValuedStructure::from_stalks(&names, &stalks).unwrap();
        assert!(check_equality_axioms(&s).pass);
        out.push(StalkFixture { structure: s, stalks });
    }
    out
}

/// Textbook recursive satisfaction, independent of the compiled evaluator.
pub fn naive_eval(m: &KripkeModel, w: usize, f: &Formula) -> bool {
    let n = m.world_count();
    let succ = |w: usize| (0..n).filter(move |&v| m.frame.accessible(w, v));
    match f {
        Formula::Var(v) => m.valuation.get(v).is_some_and(|s| s.contains(w)),
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Not(a) => !naive_eval(m, w, a),
        Formula::And(a, b) => naive_eval(m, w, a) && naive_eval(m, w, b),
        Formula::Or(a, b) => naive_eval(m, w, a) || naive_eval(m, w, b),
        Formula::Implies(a, b) => !naive_eval(m, w, a) || naive_eval(m, w, b),
        Formula::Iff(a, b) => naive_eval(m, w, a) == naive_eval(m, w, b),
        Formula::Box(a) => succ(w).all(|v| naive_eval(m, v, a)),
        Formula::Diamond(a) => succ(w).any(|v| naive_eval(m, v, a)),
    }
}
