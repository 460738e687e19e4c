use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use multiverse_kit::geology::{
    analyze_world, check_ddg, generic_multiverse, geology_report, inner_mantles, MultiverseGraph,
    MultiverseJson, WorldId,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

const FIXTURES: [&str; 5] = ["diamond", "fork", "chain", "ga_singleton", "ddg8"];

#[derive(Debug, Deserialize, PartialEq)]
struct Expected {
    world: WorldId,
    grounds: Vec<WorldId>,
    bedrocks: Vec<WorldId>,
    ground_axiom: bool,
    mantle: Vec<String>,
    ddg: bool,
    generic_multiverse: Vec<WorldId>,
    generic_mantle: Vec<String>,
    two_step: bool,
    inner_mantle_trace: Vec<WorldId>,
    outer_core: Option<WorldId>,
}

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn load(name: &str) -> MultiverseGraph {
    let text = fs::read_to_string(dir().join(format!("fixtures/geology/{name}.json"))).unwrap();
    let j: MultiverseJson = serde_json::from_str(&text).unwrap();
    MultiverseGraph::try_from(&j).unwrap()
}

fn golden(name: &str) -> Vec<Expected> {
    let text = fs::read_to_string(dir().join(format!("golden/geology/{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn fixtures_match_golden_files() {
    for name in FIXTURES {
        let g = load(name);
        let expected = golden(name);
        assert_eq!(expected.len(), g.len(), "{name}");
        for e in expected {
            let r = geology_report(&g, e.world, 16).unwrap();
            let got = Expected {
                world: r.analysis.world,
                grounds: r.analysis.grounds,
                bedrocks: r.analysis.bedrocks,
                ground_axiom: r.analysis.ground_axiom,
                mantle: r.analysis.mantle,
                ddg: r.ddg,
                generic_multiverse: r.generic_multiverse,
                generic_mantle: r.generic_mantle,
                two_step: r.two_step,
                inner_mantle_trace: r.inner_mantles.trace,
                outer_core: r.outer_core,
            };
            assert_eq!(got, e, "{name} world {}", e.world);
            assert_eq!(r.strong_ddg, r.ddg);
        }
    }
}

/// When every world of the generic multiverse has directed grounds, any two
/// of its worlds share a ground and the mantle is the generic mantle.
fn check_directed_implication(g: &MultiverseGraph) -> bool {
    let mut exercised = false;
    for &v in g.ids() {
        let gm = generic_multiverse(g, v).unwrap();
        let all_ddg = gm.worlds.iter().all(|&w| check_ddg(g, w).unwrap().ddg);
        if all_ddg {
            exercised = true;
            assert!(gm.two_step, "world {v}");
            assert_eq!(analyze_world(g, v).unwrap().mantle, gm.generic_mantle, "world {v}");
        }
    }
    exercised
}

#[test]
fn directed_grounds_imply_two_step_on_fixtures() {
    for name in FIXTURES {
        check_directed_implication(&load(name));
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> MultiverseGraph {
    let mut below = vec![vec![false; n]; n];
    for j in 0..n {
        for i in 0..j {
            if rng.gen_bool(0.35) {
                below[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if below[i][k] && below[k][j] {
                    below[i][j] = true;
                }
            }
        }
    }
    let mut content: Vec<BTreeSet<String>> = Vec::new();
    for j in 0..n {
        let mut c: BTreeSet<String> = (0..j).filter(|&i| below[i][j]).flat_map(|i| content[i].clone()).collect();
        for _ in 0..rng.gen_range(0..3) {
            c.insert(format!("x{}", rng.gen_range(0..12)));
        }
        content.push(c);
    }
    let edges: Vec<[WorldId; 2]> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| below[i][j])
        .map(|(i, j)| [i as WorldId, j as WorldId])
        .collect();
    MultiverseGraph::new(content.into_iter().enumerate().map(|(i, c)| (i as WorldId, c)).collect(), &edges).unwrap()
}

#[test]
fn directed_grounds_imply_two_step_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut exercised = 0;
    for _ in 0..400 {
        let n = rng.gen_range(1..=8);
        let g = random_graph(&mut rng, n);
        exercised += check_directed_implication(&g) as usize;
        for &v in g.ids() {
            // Report construction asserts the mantle containments.
            geology_report(&g, v, 16).unwrap();
        }
    }
    assert!(exercised > 50);
}

#[test]
fn ground_axiom_worlds_are_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 6);
        for &v in g.ids() {
            if analyze_world(&g, v).unwrap().ground_axiom {
                let t = inner_mantles(&g, v, 8).unwrap();
                assert_eq!(t.trace, vec![v]);
                assert_eq!(t.outer_core(), Some(v));
            }
        }
    }
}

#[test]
fn analysis_is_invariant_under_renaming_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for name in FIXTURES {
        let g = load(name);
        let elements: BTreeSet<String> = g.ids().iter().flat_map(|&v| g.content(v).unwrap().clone()).collect();
        let elements: Vec<String> = elements.into_iter().collect();
        let mut shuffled = elements.clone();
        shuffled.shuffle(&mut rng);
        let rename = |x: &str| shuffled[elements.iter().position(|e| e == x).unwrap()].clone();
        let h = g.relabel(rename);
        for &v in g.ids() {
            let a = analyze_world(&g, v).unwrap();
            let b = analyze_world(&h, v).unwrap();
            assert_eq!(a.grounds, b.grounds);
            assert_eq!(a.bedrocks, b.bedrocks);
            assert_eq!(a.ground_axiom, b.ground_axiom);
            let renamed: BTreeSet<String> = a.mantle.iter().map(|x| rename(x)).collect();
            assert_eq!(renamed, b.mantle.into_iter().collect());
        }
    }
}

#[test]
fn axioms_match_golden_report() {
    use multiverse_kit::geology::{check_multiverse_axioms, LabeledMultiverse, MultiverseAxiom};
    let text = fs::read_to_string(dir().join("fixtures/geology/labeled.json")).unwrap();
    let j: MultiverseJson = serde_json::from_str(&text).unwrap();
    let lm = LabeledMultiverse::try_from(&j).unwrap();
    let report = check_multiverse_axioms(&lm, &MultiverseAxiom::ALL).unwrap();
    let golden: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir().join("golden/axioms/labeled.json")).unwrap()).unwrap();
    assert_eq!(serde_json::to_value(&report).unwrap(), golden);

    // Dropping a relation is an input error, not a failed check.
    let mut bare = j.clone();
    bare.labels.as_mut().unwrap().reflects = None;
    let lm = LabeledMultiverse::try_from(&bare).unwrap();
    assert!(check_multiverse_axioms(&lm, &[MultiverseAxiom::Reflection]).is_err());
    assert!(check_multiverse_axioms(&lm, &[MultiverseAxiom::Countability]).unwrap().pass);
}
