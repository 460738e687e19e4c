//! End-to-end checks, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use multiverse_kit::boolean::{
    binary_tree, boolean_ultrapower, build_generic_filter, find_isomorphism, level_dense_sets,
    los_formula_family, verify_los, FiniteBooleanAlgebra, MaximalAntichain, UltrapowerMode,
};
use multiverse_kit::forcing::{
    all_statements, button_atom, check_maximality, check_trichotomy, make_multiverse, simulate_kripke_model,
};
use multiverse_kit::geology::{analyze_world, check_ddg, generic_multiverse, geology_report, MultiverseGraph, MultiverseJson};
use multiverse_kit::kripke::enumerate_frames;
use multiverse_kit::syntax::{self, Formula};
use multiverse_kit::theories::{self, verify_frame_inclusions, S42_AXIOMS, NON_VALID_AXIOMS};
use multiverse_kit::{eval, valid_on_frame, Frame, FrameClass, KripkeModel, Limits};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

mod common;

type Check = Result<String, String>;

/// Number, time limit in seconds, check.
type Criterion<'a> = (u32, u64, Box<dyn Fn() -> Check + 'a>);

/// Every instance of a scheme with metavariables drawn from `vars`.
fn instances(scheme: &syntax::AxiomScheme, vars: &[&str]) -> Vec<Formula> {
    let metas = scheme.metavariables();
    let mut out = Vec::new();
    let total = vars.len().pow(metas.len() as u32);
    for mut i in 0..total {
        let mut picked = Vec::new();
        for _ in &metas {
            picked.push(vars[i % vars.len()]);
            i /= vars.len();
        }
        out.push(scheme.instance_over(&picked));
    }
    out
}

fn criterion_1(limits: &Limits) -> Check {
    let mut formulas = Vec::new();
    for name in S42_AXIOMS {
        formulas.extend(instances(&theories::axiom(name).map_err(|e| e.to_string())?.scheme, &["p", "q"]));
    }
    let frames: Vec<Frame> = enumerate_frames(4, FrameClass::DirectedPreorder, false, limits)
        .map_err(|e| e.to_string())?
        .collect();
    let mut failures = 0;
    for fr in &frames {
        for f in &formulas {
            if !valid_on_frame(fr, f, limits).map_err(|e| e.to_string())? {
                failures += 1;
            }
        }
    }
    let msg = format!("{} instances x {} frames, {failures} failures", formulas.len(), frames.len());
    if failures == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2(limits: &Limits) -> Check {
    let mut found = 0;
    let mut missing = Vec::new();
    for name in NON_VALID_AXIOMS {
        let f = theories::axiom(name).map_err(|e| e.to_string())?.scheme.instance_over(&["p", "q"]);
        match theories::find_countermodel(FrameClass::PreLattice, &f, 4, limits).map_err(|e| e.to_string())? {
            Some((m, w))
                if m.world_count() <= 4
                    && FrameClass::PreLattice.contains(&m.frame)
                    && !eval(&m, w, &f).map_err(|e| e.to_string())?
                    && !common::naive_eval(&m, w, &f) =>
            {
                found += 1
            }
            _ => missing.push(name),
        }
    }
    let msg = format!("{found}/{} witnesses", NON_VALID_AXIOMS.len());
    if missing.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; missing {missing:?}"))
    }
}

fn criterion_3(limits: &Limits) -> Check {
    let mv = make_multiverse(2, 2, limits).map_err(|e| e.to_string())?;
    let root = mv.root();
    for i in 0..2 {
        let b = syntax::var(&button_atom(i));
        let five = syntax::implies(syntax::poss(syntax::nec(b.clone())), b);
        if eval(mv.model(), root, &five).map_err(|e| e.to_string())? {
            return Err(format!("axiom 5 holds at the root for {}", button_atom(i)));
        }
    }
    let all = all_statements(mv.model(), limits).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for bits in 0..4 {
        let w = mv.state(0b11, bits);
        let r = check_maximality(mv.model(), w, &all).map_err(|e| e.to_string())?;
        if !r.holds {
            return Err(format!("maximality fails at state {w}: {:?}", r.failures.first()));
        }
        checked += r.checked;
    }
    Ok(format!("5 fails at root for both buttons; {} statements x 4 top states ({checked} checks)", all.len()))
}

fn criterion_4(limits: &Limits) -> Check {
    let mv = make_multiverse(2, 2, limits).map_err(|e| e.to_string())?;
    let r = check_trichotomy(mv.model(), mv.root(), limits).map_err(|e| e.to_string())?;
    let msg = format!("{} statements, {} unlabeled", r.statements, r.unlabeled);
    if r.statements == 65536 && r.unlabeled == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Check {
    let fixtures = common::stalk_fixtures(24, 2026);
    let family = los_formula_family(&[("R".to_string(), 2)]);
    let mut checked = 0;
    for fx in &fixtures {
        let s = &fx.structure;
        let r = verify_los(s, &s.algebra.ultrafilters(), &family).map_err(|e| e.to_string())?;
        if r.counterexample.is_some() || r.checked != r.agreed {
            return Err(format!("disagreement: {:?}", r.counterexample));
        }
        checked += r.checked;
    }
    Ok(format!("{} structures x {} formulas x 3 ultrafilters, {checked} checks, 100% agreement", fixtures.len(), family.len()))
}

/// Frame whose cluster quotient is the power set of `k` atoms, with cluster
/// `S` of size `sizes[S]`; world 0 lies in the bottom cluster.
fn pba_frame(k: usize, sizes: &[usize]) -> Frame {
    let mut cluster = Vec::new();
    for (s, &size) in sizes.iter().enumerate() {
        cluster.extend(std::iter::repeat_n(s, size));
    }
    let n = cluster.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if cluster[u] & !cluster[v] == 0 {
                edges.push((u, v));
            }
        }
    }
    debug_assert_eq!(sizes.len(), 1 << k);
    Frame::new(n, edges).expect("valid frame")
}

fn criterion_6(limits: &Limits) -> Check {
    let vars: Vec<String> = vec!["p".into(), "q".into()];
    let mut jobs = Vec::new();
    for k in 1..=2usize {
        let clusters = 1 << k;
        for shape in 0..(1u32 << clusters) {
            let sizes: Vec<usize> = (0..clusters).map(|c| 1 + (shape >> c & 1) as usize).collect();
            let fr = pba_frame(k, &sizes);
            if !FrameClass::PreBooleanAlgebra.contains(&fr) {
                return Err(format!("constructed frame {sizes:?} is not pre-Boolean"));
            }
            let n = fr.world_count();
            for bits in 0..(1u64 << (n * vars.len())) {
                jobs.push((fr.clone(), bits));
            }
        }
    }
    let total = jobs.len();
    let bad = jobs.par_iter().find_map_any(|(fr, bits)| {
        let m = KripkeModel::from_valuation_bits(fr.clone(), &vars, *bits);
        match simulate_kripke_model(&m, 0, 3, None, limits) {
            Ok((_, r)) if r.agreement && r.discrepancies.is_empty() => None,
            Ok((_, r)) => Some(format!("{:?}: {:?}", fr.edges(), r.discrepancies.first())),
            Err(e) => Some(e.to_string()),
        }
    });
    match bad {
        None => Ok(format!("{total} models, 0 discrepancies")),
        Some(e) => Err(e),
    }
}

/// Maximal antichains of the algebra on `atoms` atoms: one per partition.
fn all_antichains(alg: &FiniteBooleanAlgebra) -> Result<Vec<MaximalAntichain>, String> {
    fn partitions(atoms: usize) -> Vec<Vec<u64>> {
        if atoms == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in partitions(atoms - 1) {
            let bit = 1u64 << (atoms - 1);
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i] |= bit;
                out.push(q);
            }
            let mut q = p;
            q.push(bit);
            out.push(q);
        }
        out
    }
    partitions(alg.atom_count())
        .into_iter()
        .map(|p| MaximalAntichain::new(alg, p).map_err(|e| e.to_string()))
        .collect()
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = 0;
    for atoms in 1..=3 {
        let alg = FiniteBooleanAlgebra::new(atoms).map_err(|e| e.to_string())?;
        let family = all_antichains(&alg)?;
        for size in 1..=4 {
            for _ in 0..3 {
                let v0 = common::random_graph(&mut rng, size);
                for u in alg.ultrafilters() {
                    let q = boolean_ultrapower(&v0, &alg, &u, &UltrapowerMode::Quotient).map_err(|e| e.to_string())?;
                    let l = boolean_ultrapower(&v0, &alg, &u, &UltrapowerMode::AntichainLimit(family.clone()))
                        .map_err(|e| e.to_string())?;
                    let iso = |a, b| find_isomorphism(a, b).map_err(|e| e.to_string());
                    if iso(&q.structure, &l.structure)?.is_none() || iso(&v0, &q.structure)?.is_none() {
                        return Err(format!("modes differ for |B| = {} and |V0| = {size}", 1 << atoms));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} (algebra, base, ultrafilter) cases agree with the stalk"))
}

fn criterion_8() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests");
    let mut worlds = 0;
    for name in ["diamond", "fork", "chain", "ga_singleton", "ddg8"] {
        let read = |p: PathBuf| fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()));
        let j: MultiverseJson = serde_json::from_str(&read(dir.join(format!("fixtures/geology/{name}.json")))?)
            .map_err(|e| e.to_string())?;
        let g = MultiverseGraph::try_from(&j).map_err(|e| e.to_string())?;
        let golden: Vec<Value> = serde_json::from_str(&read(dir.join(format!("golden/geology/{name}.json")))?)
            .map_err(|e| e.to_string())?;
        if golden.len() != g.len() {
            return Err(format!("{name}: golden file covers {} of {} worlds", golden.len(), g.len()));
        }
        for e in golden {
            let w = e["world"].as_u64().ok_or("golden entry without world")?;
            let r = geology_report(&g, w, 16).map_err(|e| e.to_string())?;
            let got = json!({
                "world": w,
                "grounds": r.analysis.grounds,
                "bedrocks": r.analysis.bedrocks,
                "ground_axiom": r.analysis.ground_axiom,
                "mantle": r.analysis.mantle,
                "ddg": r.ddg,
                "generic_multiverse": r.generic_multiverse,
                "generic_mantle": r.generic_mantle,
                "two_step": r.two_step,
                "inner_mantle_trace": r.inner_mantles.trace,
                "outer_core": r.outer_core,
            });
            if got != e {
                return Err(format!("{name} world {w}: got {got}, expected {e}"));
            }
            worlds += 1;
        }
        for &v in g.ids() {
            let gm = generic_multiverse(&g, v).map_err(|e| e.to_string())?;
            let mut all_ddg = true;
            for &w in &gm.worlds {
                all_ddg &= check_ddg(&g, w).map_err(|e| e.to_string())?.ddg;
            }
            let mantle = analyze_world(&g, v).map_err(|e| e.to_string())?.mantle;
            if all_ddg && !(gm.two_step && mantle == gm.generic_mantle) {
                return Err(format!("{name} world {v}: directed grounds without two-step closure"));
            }
        }
    }
    Ok(format!("{worlds} worlds match golden files; implication holds"))
}

fn criterion_9(limits: &Limits) -> Check {
    let r = verify_frame_inclusions(4, limits).map_err(|e| e.to_string())?;
    let msg = format!(
        "{} class inclusions, {} diagram edges, {} soundness checks",
        r.class_inclusions.len(),
        r.edges.len(),
        r.class_soundness.len()
    );
    if r.all_pass() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_10() -> Check {
    let tree = binary_tree(3);
    let dense = level_dense_sets(&tree, 3);
    let g = build_generic_filter(&tree, &dense).map_err(|e| e.to_string())?;
    let idx: Vec<usize> = g.filter.iter().map(|c| tree.index(c).unwrap()).collect();
    let members: BTreeSet<usize> = idx.iter().copied().collect();
    // A branch: one condition per level, linearly ordered, upward closed.
    let linear = idx.iter().all(|&a| idx.iter().all(|&b| tree.leq(a, b) || tree.leq(b, a)));
    let upward = idx
        .iter()
        .all(|&a| (0..tree.len()).all(|q| !tree.leq(a, q) || members.contains(&q)));
    let meets_all = dense.iter().all(|d| d.iter().any(|x| members.contains(x)));
    if g.filter.len() == 4 && linear && upward && meets_all {
        Ok(format!("branch {}", g.filter.join(" > ")))
    } else {
        Err(format!("filter {:?} is not a generic branch", g.filter))
    }
}

fn main() -> ExitCode {
    let limits = Limits::default();
    let criteria: Vec<Criterion> = vec![
        (1, 60, Box::new(|| criterion_1(&limits))),
        (2, 60, Box::new(|| criterion_2(&limits))),
        (3, 120, Box::new(|| criterion_3(&limits))),
        (4, 120, Box::new(|| criterion_4(&limits))),
        (5, 60, Box::new(criterion_5)),
        (6, 600, Box::new(|| criterion_6(&limits))),
        (7, 30, Box::new(criterion_7)),
        (8, 5, Box::new(criterion_8)),
        (9, 60, Box::new(|| criterion_9(&limits))),
        (10, 1, Box::new(criterion_10)),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, limit, run) in &criteria {
        if only.is_some_and(|o| o != *n) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (ok, detail) = match result {
            Ok(d) if in_time => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit} s limit")),
            Err(d) => (false, d),
        };
        failed += !ok as u32;
        println!(
            "criterion {n}: {} ({:.2} s / {limit} s) {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
