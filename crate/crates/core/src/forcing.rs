//! The buttons-and-switches toy multiverse.
//!
//! A state is a pair (pushed buttons, switch settings). From a state one
//! may move to any state whose pushed set contains the current one; the
//! switches may be set arbitrarily along the way. State index is
//! `(pushed_mask << switches) | switch_mask`, so state 0 is the root where
//! nothing is pushed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kripke::{quotient_poset, Frame, KripkeError, KripkeModel};
use crate::limits::Limits;
use crate::syntax::{self, Formula};
use crate::worldset::{WorldSet, MAX_WORLDS};

/// Largest button or switch count accepted by [`make_multiverse`].
pub const MAX_FAMILY: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForcingError {
    #[error("{what}: {requested} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("frame is not a pre-Boolean algebra: {0}")]
    NotPreBooleanAlgebra(String),
    #[error("a cluster of {size} worlds does not fit in {capacity} switch patterns")]
    ClusterTooLarge { size: usize, capacity: usize },
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

pub fn button_atom(i: usize) -> String {
    format!("button_{i}")
}

pub fn switch_atom(j: usize) -> String {
    format!("switch_{j}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyMultiverse {
    buttons: usize,
    switches: usize,
    model: KripkeModel,
}

pub fn make_multiverse(
    buttons: usize,
    switches: usize,
    limits: &Limits,
) -> Result<ToyMultiverse, ForcingError> {
    for (what, n) in [("buttons", buttons), ("switches", switches)] {
        if n > MAX_FAMILY {
            return Err(ForcingError::CapExceeded {
                what,
                requested: n,
                cap: MAX_FAMILY,
            });
        }
    }
    let states = 1usize << (buttons + switches);
    let cap = limits.max_states.min(MAX_WORLDS);
    if states > cap {
        return Err(ForcingError::CapExceeded {
            what: "states",
            requested: states,
            cap,
        });
    }
    let pushed = |x: usize| x >> switches;
    let succ = (0..states)
        .map(|x| {
            (0..states)
                .filter(|&y| pushed(x) & !pushed(y) == 0)
                .collect()
        })
        .collect();
    let frame = Frame::from_successors(succ)?;
    let mut valuation = BTreeMap::new();
    for i in 0..buttons {
        let set = (0..states).filter(|&x| pushed(x) >> i & 1 == 1).collect();
        valuation.insert(button_atom(i), set);
    }
    for j in 0..switches {
        let set = (0..states).filter(|&x| x >> j & 1 == 1).collect();
        valuation.insert(switch_atom(j), set);
    }
    Ok(ToyMultiverse {
        buttons,
        switches,
        model: KripkeModel::new(frame, valuation)?,
    })
}

impl ToyMultiverse {
    pub fn buttons(&self) -> usize {
        self.buttons
    }

    pub fn switches(&self) -> usize {
        self.switches
    }

    pub fn state_count(&self) -> usize {
        self.model.world_count()
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn state(&self, pushed: usize, switch_bits: usize) -> usize {
        (pushed << self.switches) | switch_bits
    }

    pub fn pushed(&self, state: usize) -> usize {
        state >> self.switches
    }

    pub fn switch_bits(&self, state: usize) -> usize {
        state & ((1 << self.switches) - 1)
    }

    /// States with every button pushed: the final cluster.
    pub fn top_cluster(&self) -> Vec<usize> {
        let all = (1 << self.buttons) - 1;
        (0..1 << self.switches).map(|s| self.state(all, s)).collect()
    }

    pub fn button_atoms(&self) -> Vec<String> {
        (0..self.buttons).map(button_atom).collect()
    }

    pub fn switch_atoms(&self) -> Vec<String> {
        (0..self.switches).map(switch_atom).collect()
    }

    /// Conjunction of literals pinning down `state` exactly.
    pub fn state_formula(&self, state: usize) -> Formula {
        let pushed = self.pushed(state);
        let bits = self.switch_bits(state);
        let lits = (0..self.buttons)
            .map(|i| (button_atom(i), pushed >> i & 1 == 1))
            .chain((0..self.switches).map(|j| (switch_atom(j), bits >> j & 1 == 1)))
            .map(|(a, pos)| if pos { syntax::var(&a) } else { syntax::not(syntax::var(&a)) });
        lits.reduce(syntax::and).unwrap_or(Formula::Top)
    }

    /// A Boolean combination of buttons and switches true exactly on `states`
    /// (disjunctive normal form, states in increasing order).
    pub fn statement_formula(&self, states: &WorldSet) -> Formula {
        states
            .iter()
            .map(|x| self.state_formula(x))
            .reduce(syntax::or)
            .unwrap_or(Formula::Bottom)
    }
}

/// A statement about the toy multiverse: an explicit set of states or a
/// formula over the button and switch atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statement {
    States(Vec<usize>),
    Formula(Formula),
}

impl Statement {
    pub fn truth_set(&self, model: &KripkeModel) -> Result<WorldSet, KripkeError> {
        match self {
            Statement::States(states) => {
                let n = model.world_count();
                if let Some(&x) = states.iter().find(|&&x| x >= n) {
                    return Err(KripkeError::WorldOutOfRange { world: x, worlds: n });
                }
                Ok(states.iter().copied().collect())
            }
            Statement::Formula(f) => model.truth_set(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    Switch,
    Button,
    NegatedButton,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub labels: BTreeSet<Label>,
    /// For a button: already necessary at the reference state.
    pub pushed: bool,
}

/// Classify the statement true exactly on `truth` at state `w` of `model`.
pub fn classify_set(model: &KripkeModel, truth: &WorldSet, w: usize) -> Classification {
    let fr = &model.frame;
    let n = fr.world_count();
    let neg = truth.complement(n);
    let nec = |s: &WorldSet| fr.box_of(s);
    let pos = |s: &WorldSet| fr.diamond_of(s);
    let mut labels = BTreeSet::new();
    if nec(&pos(truth).intersection(&pos(&neg))).contains(w) {
        labels.insert(Label::Switch);
    }
    let button = nec(&pos(&nec(truth))).contains(w);
    if button {
        labels.insert(Label::Button);
    }
    if nec(&pos(&nec(&neg))).contains(w) {
        labels.insert(Label::NegatedButton);
    }
    Classification {
        labels,
        pushed: button && nec(truth).contains(w),
    }
}

pub fn classify_statement(
    mv: &ToyMultiverse,
    st: &Statement,
    w: usize,
) -> Result<Classification, ForcingError> {
    check_world(mv.model(), w)?;
    let truth = st.truth_set(mv.model())?;
    Ok(classify_set(mv.model(), &truth, w))
}

fn check_world(model: &KripkeModel, w: usize) -> Result<(), KripkeError> {
    if w >= model.world_count() {
        return Err(KripkeError::WorldOutOfRange {
            world: w,
            worlds: model.world_count(),
        });
    }
    Ok(())
}

fn check_statement_space(model: &KripkeModel, limits: &Limits) -> Result<usize, ForcingError> {
    let n = model.world_count();
    let statements = if n >= 63 { usize::MAX } else { 1usize << n };
    if statements > limits.max_statements {
        return Err(ForcingError::CapExceeded {
            what: "statements",
            requested: statements,
            cap: limits.max_statements,
        });
    }
    Ok(statements)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TrichotomyReport {
    pub world: usize,
    pub statements: usize,
    pub switch: usize,
    pub button: usize,
    pub pushed_button: usize,
    pub negated_button: usize,
    pub unlabeled: usize,
    /// Statements (as state lists) with no label, least first.
    pub unlabeled_examples: Vec<Vec<usize>>,
}

/// Classify every subset of the state space at `w`.
pub fn check_trichotomy(
    model: &KripkeModel,
    w: usize,
    limits: &Limits,
) -> Result<TrichotomyReport, ForcingError> {
    check_world(model, w)?;
    let statements = check_statement_space(model, limits)?;
    let mut report = (0..statements as u64)
        .into_par_iter()
        .map(|mask| {
            let truth = WorldSet::from_mask(mask);
            let c = classify_set(model, &truth, w);
            let mut r = TrichotomyReport {
                statements: 1,
                ..Default::default()
            };
            r.switch = c.labels.contains(&Label::Switch) as usize;
            r.button = c.labels.contains(&Label::Button) as usize;
            r.pushed_button = c.pushed as usize;
            r.negated_button = c.labels.contains(&Label::NegatedButton) as usize;
            if c.labels.is_empty() {
                r.unlabeled = 1;
                r.unlabeled_examples.push(truth.iter().collect());
            }
            r
        })
        .reduce(TrichotomyReport::default, |mut a, b| {
            a.statements += b.statements;
            a.switch += b.switch;
            a.button += b.button;
            a.pushed_button += b.pushed_button;
            a.negated_button += b.negated_button;
            a.unlabeled += b.unlabeled;
            a.unlabeled_examples.extend(b.unlabeled_examples);
            a
        });
    report.world = w;
    report.unlabeled_examples.truncate(16);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub independent: bool,
    pub failure: Option<String>,
}

fn atom_pattern(model: &KripkeModel, atoms: &[String], x: usize) -> Vec<bool> {
    atoms
        .iter()
        .map(|a| model.valuation.get(a).is_some_and(|s| s.contains(x)))
        .collect()
}

/// Independence of the given buttons and switches at `w`: no button is
/// necessary at `w`, and from every state accessible from `w` each unpushed
/// button can be pushed, and each switch flipped, leaving every other atom
/// unchanged.
pub fn check_independence(
    model: &KripkeModel,
    buttons: &[String],
    switches: &[String],
    w: usize,
) -> Result<IndependenceReport, KripkeError> {
    check_world(model, w)?;
    for a in buttons.iter().chain(switches) {
        if !model.valuation.contains_key(a) {
            return Err(KripkeError::UnknownVariable(a.clone()));
        }
    }
    let fail = |msg: String| {
        Ok(IndependenceReport {
            independent: false,
            failure: Some(msg),
        })
    };
    let fr = &model.frame;
    for b in buttons {
        if fr.box_of(&model.valuation[b]).contains(w) {
            return fail(format!("{b} is already pushed at state {w}"));
        }
    }
    let atoms: Vec<String> = buttons.iter().chain(switches).cloned().collect();
    for x in fr.successors(w).iter() {
        let here = atom_pattern(model, &atoms, x);
        for (k, atom) in atoms.iter().enumerate() {
            let is_button = k < buttons.len();
            if is_button && here[k] {
                continue;
            }
            let mut wanted = here.clone();
            wanted[k] = !wanted[k];
            let reachable = fr
                .successors(x)
                .iter()
                .any(|y| atom_pattern(model, &atoms, y) == wanted);
            if !reachable {
                let verb = if is_button { "pushed" } else { "toggled" };
                return fail(format!(
                    "from state {x}, {atom} cannot be {verb} without disturbing the others"
                ));
            }
        }
    }
    Ok(IndependenceReport {
        independent: true,
        failure: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximalityReport {
    pub world: usize,
    pub checked: usize,
    pub passed: usize,
    /// Indices into the statement family where `<>[]st -> []st` fails.
    pub failures: Vec<usize>,
    pub holds: bool,
}

/// `<>[]st -> []st` at `w` for each statement of the family.
pub fn check_maximality(
    model: &KripkeModel,
    w: usize,
    statements: &[WorldSet],
) -> Result<MaximalityReport, KripkeError> {
    check_world(model, w)?;
    let fr = &model.frame;
    let failures: Vec<usize> = statements
        .par_iter()
        .enumerate()
        .filter_map(|(i, st)| {
            let nec = fr.box_of(st);
            let ok = !fr.diamond_of(&nec).contains(w) || nec.contains(w);
            (!ok).then_some(i)
        })
        .collect();
    Ok(MaximalityReport {
        world: w,
        checked: statements.len(),
        passed: statements.len() - failures.len(),
        holds: failures.is_empty(),
        failures,
    })
}

/// Every subset of the state space, indexed by bit mask.
pub fn all_statements(model: &KripkeModel, limits: &Limits) -> Result<Vec<WorldSet>, ForcingError> {
    let statements = check_statement_space(model, limits)?;
    Ok((0..statements as u64).map(WorldSet::from_mask).collect())
}

/// Propositional variables of a Kripke model translated into statements of
/// a toy multiverse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Translation {
    pub buttons: usize,
    pub switches: usize,
    pub source_world: usize,
    pub target_state: usize,
    /// For each variable, the states where its translation holds.
    pub statements: BTreeMap<String, Vec<usize>>,
    /// The same statements as Boolean combinations of buttons and switches.
    pub formulas: BTreeMap<String, Formula>,
    /// World of the source model simulated by each state.
    pub state_to_world: Vec<usize>,
    /// Button pattern of each cluster of the source model.
    pub cluster_pattern: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelStats {
    pub modal_depth: usize,
    pub generators: usize,
    pub atoms: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub formula: Formula,
    pub model_worlds: Vec<usize>,
    pub multiverse_states: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    pub depth: usize,
    pub levels: Vec<LevelStats>,
    /// Every formula of modal depth ≤ `depth` holds at world `u` of the model
    /// iff its translation holds at each state simulating `u`.
    pub agreement: bool,
    pub discrepancies: Vec<Discrepancy>,
}

/// Truth sets of one formula on the model and on the multiverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Pair {
    model: WorldSet,
    mv: WorldSet,
}

/// Largest number of atoms in the Boolean algebra of truth-set pairs.
const MAX_ALGEBRA_ATOMS: usize = 20;

pub fn simulate_kripke_model(
    m: &KripkeModel,
    w: usize,
    depth: usize,
    switches: Option<usize>,
    limits: &Limits,
) -> Result<(Translation, SimulationReport), ForcingError> {
    check_world(m, w)?;
    let q = quotient_poset(&m.frame)
        .map_err(|e| ForcingError::NotPreBooleanAlgebra(e.to_string()))?;
    let pattern = q.powerset_embedding().ok_or_else(|| {
        ForcingError::NotPreBooleanAlgebra("cluster quotient is not a powerset order".into())
    })?;
    let buttons = q.atoms().len();
    let largest = q.clusters.iter().map(Vec::len).max().unwrap_or(1);
    let switches = switches.unwrap_or_else(|| largest.next_power_of_two().trailing_zeros() as usize);
    if switches > MAX_FAMILY || largest > 1 << switches {
        return Err(ForcingError::ClusterTooLarge {
            size: largest,
            capacity: 1 << switches.min(MAX_FAMILY),
        });
    }
    let mv = make_multiverse(buttons, switches, limits)?;

    let cluster_by_pattern: HashMap<u64, usize> =
        pattern.iter().enumerate().map(|(c, &p)| (p, c)).collect();
    let state_to_world: Vec<usize> = (0..mv.state_count())
        .map(|x| {
            let members = &q.clusters[cluster_by_pattern[&(mv.pushed(x) as u64)]];
            members[mv.switch_bits(x) % members.len()]
        })
        .collect();
    let preimage = |s: &WorldSet| -> WorldSet {
        (0..mv.state_count())
            .filter(|&x| s.contains(state_to_world[x]))
            .collect()
    };
    let world_state = |u: usize| -> usize {
        let c = q.cluster_of[u];
        let index = q.clusters[c].iter().position(|&v| v == u).expect("member");
        mv.state(pattern[c] as usize, index)
    };

    let mut statements = BTreeMap::new();
    let mut formulas = BTreeMap::new();
    for (name, set) in &m.valuation {
        let psi = preimage(set);
        statements.insert(name.clone(), psi.iter().collect());
        formulas.insert(name.clone(), mv.statement_formula(&psi));
    }
    let translation = Translation {
        buttons,
        switches,
        source_world: w,
        target_state: world_state(w),
        statements,
        formulas,
        state_to_world: state_to_world.clone(),
        cluster_pattern: pattern.clone(),
    };

    let report = verify_translation(m, &mv, &translation, depth, &preimage)?;
    Ok((translation, report))
}

/// Closes the translated atoms under Boolean operations and `[]` up to the
/// given modal depth, comparing truth sets on both sides. Each formula of
/// modal depth ≤ `depth` denotes an element of the final algebra, so
/// agreement on the algebra covers every such formula.
fn verify_translation(
    m: &KripkeModel,
    mv: &ToyMultiverse,
    translation: &Translation,
    depth: usize,
    preimage: &dyn Fn(&WorldSet) -> WorldSet,
) -> Result<SimulationReport, ForcingError> {
    let (nm, nv) = (m.world_count(), mv.state_count());
    let mut generators: Vec<(Pair, Formula)> = m
        .valuation
        .iter()
        .map(|(name, set)| {
            let mv_set: WorldSet = translation.statements[name].iter().copied().collect();
            (Pair { model: *set, mv: mv_set }, syntax::var(name))
        })
        .collect();
    generators.push((
        Pair {
            model: WorldSet::full(nm),
            mv: WorldSet::full(nv),
        },
        Formula::Top,
    ));
    let mut levels = Vec::new();
    let mut discrepancies = Vec::new();
    let check = |pair: &Pair, f: &Formula, out: &mut Vec<Discrepancy>| {
        if preimage(&pair.model) != pair.mv {
            out.push(Discrepancy {
                formula: f.clone(),
                model_worlds: pair.model.iter().collect(),
                multiverse_states: pair.mv.iter().collect(),
            });
        }
    };
    for (pair, f) in &generators {
        check(pair, f, &mut discrepancies);
    }
    for d in 0..=depth {
        let atoms = algebra_atoms(&generators, nm, nv);
        if atoms.len() > MAX_ALGEBRA_ATOMS {
            return Err(ForcingError::CapExceeded {
                what: "atoms of the generated algebra",
                requested: atoms.len(),
                cap: MAX_ALGEBRA_ATOMS,
            });
        }
        let classes = 1usize << atoms.len();
        levels.push(LevelStats {
            modal_depth: d,
            generators: generators.len(),
            atoms: atoms.len(),
            classes,
        });
        if d == depth || !discrepancies.is_empty() {
            break;
        }
        let mut seen: BTreeSet<(WorldSet, WorldSet)> =
            generators.iter().map(|(p, _)| (p.model, p.mv)).collect();
        let mut fresh = Vec::new();
        for mask in 0..classes {
            let element = atoms
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .fold(
                    Pair {
                        model: WorldSet::empty(),
                        mv: WorldSet::empty(),
                    },
                    |acc, (_, (a, _))| Pair {
                        model: acc.model.union(&a.model),
                        mv: acc.mv.union(&a.mv),
                    },
                );
            let boxed = Pair {
                model: m.frame.box_of(&element.model),
                mv: mv.model().frame.box_of(&element.mv),
            };
            if seen.insert((boxed.model, boxed.mv)) {
                let inner = atoms
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, (_, f))| f.clone())
                    .reduce(syntax::or)
                    .unwrap_or(Formula::Bottom);
                let f = syntax::nec(inner);
                check(&boxed, &f, &mut discrepancies);
                fresh.push((boxed, f));
            }
        }
        generators.extend(fresh);
    }
    discrepancies.truncate(16);
    Ok(SimulationReport {
        depth,
        levels,
        agreement: discrepancies.is_empty(),
        discrepancies,
    })
}

/// Atoms of the Boolean algebra generated by the pairs, over the disjoint
/// union of model worlds and multiverse states, each with a defining
/// conjunction of generator literals.
fn algebra_atoms(generators: &[(Pair, Formula)], nm: usize, nv: usize) -> Vec<(Pair, Formula)> {
    let signature = |side_model: bool, x: usize| -> Vec<bool> {
        generators
            .iter()
            .map(|(p, _)| if side_model { p.model.contains(x) } else { p.mv.contains(x) })
            .collect()
    };
    let mut by_sig: BTreeMap<Vec<bool>, Pair> = BTreeMap::new();
    for x in 0..nm {
        by_sig
            .entry(signature(true, x))
            .or_insert(Pair {
                model: WorldSet::empty(),
                mv: WorldSet::empty(),
            })
            .model
            .insert(x);
    }
    for x in 0..nv {
        by_sig
            .entry(signature(false, x))
            .or_insert(Pair {
                model: WorldSet::empty(),
                mv: WorldSet::empty(),
            })
            .mv
            .insert(x);
    }
    by_sig
        .into_iter()
        .map(|(sig, pair)| {
            let f = sig
                .iter()
                .zip(generators)
                .map(|(&pos, (_, g))| if pos { g.clone() } else { syntax::not(g.clone()) })
                .reduce(syntax::and)
                .unwrap_or(Formula::Top);
            (pair, f)
        })
        .collect()
}
