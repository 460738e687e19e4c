//! Finite Kripke frames and models.
//!
//! Worlds are indices `0..n`. A frame stores, for each world, the set of
//! worlds it can access; `[]f` holds at `w` iff `f` holds at every
//! successor of `w`, `<>f` iff at some successor.

mod classes;
mod enumerate;

pub use classes::{classify_frame, quotient_poset, ClusterQuotient, FrameClass};
pub use enumerate::{canonical_code, enumerate_frames, frame_count, is_canonical};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::Limits;
use crate::syntax::Formula;
use crate::worldset::{WorldSet, MAX_WORLDS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("world {world} out of range for a frame with {worlds} worlds")]
    WorldOutOfRange { world: usize, worlds: usize },
    #[error("{0} worlds requested; at most {MAX_WORLDS} are supported")]
    TooManyWorlds(usize),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("exhaustive sweep needs {needed} valuation bits; the cap is {cap}")]
    ResourceBound { needed: usize, cap: usize },
    #[error("frame is not a preorder: {0}")]
    NotAPreorder(String),
    #[error("frame enumeration up to {requested} worlds exceeds the cap of {cap}")]
    CapExceeded { requested: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    worlds: usize,
    succ: Vec<WorldSet>,
}

impl Frame {
    pub fn new(
        worlds: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Frame, KripkeError> {
        if worlds > MAX_WORLDS {
            return Err(KripkeError::TooManyWorlds(worlds));
        }
        let mut succ = vec![WorldSet::empty(); worlds];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= worlds {
                    return Err(KripkeError::WorldOutOfRange { world: w, worlds });
                }
            }
            succ[u].insert(v);
        }
        Ok(Frame { worlds, succ })
    }

    pub fn from_successors(succ: Vec<WorldSet>) -> Result<Frame, KripkeError> {
        let worlds = succ.len();
        if worlds > MAX_WORLDS {
            return Err(KripkeError::TooManyWorlds(worlds));
        }
        let all = WorldSet::full(worlds);
        if let Some((u, s)) = succ.iter().enumerate().find(|(_, s)| !s.is_subset(&all)) {
            let v = s.difference(&all).first().unwrap_or(u);
            return Err(KripkeError::WorldOutOfRange { world: v, worlds });
        }
        Ok(Frame { worlds, succ })
    }

    /// Frame on `n ≤ 8` worlds whose edge `(i, j)` is bit `i * n + j` of `code`.
    pub fn from_code(n: usize, code: u64) -> Frame {
        assert!(n <= 8, "edge codes cover at most 8 worlds");
        let succ = (0..n)
            .map(|i| WorldSet::from_mask((code >> (i * n)) & ((1u64 << n) - 1)))
            .collect();
        Frame { worlds: n, succ }
    }

    /// Inverse of [`Frame::from_code`].
    pub fn code(&self) -> u64 {
        assert!(self.worlds <= 8, "edge codes cover at most 8 worlds");
        self.succ
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, s)| acc | (s.low_mask() << (i * self.worlds)))
    }

    pub fn world_count(&self) -> usize {
        self.worlds
    }

    pub fn all_worlds(&self) -> WorldSet {
        WorldSet::full(self.worlds)
    }

    pub fn successors(&self, w: usize) -> &WorldSet {
        &self.succ[w]
    }

    pub fn accessible(&self, u: usize, v: usize) -> bool {
        self.succ[u].contains(v)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.worlds)
            .flat_map(|u| self.succ[u].iter().map(move |v| (u, v)))
            .collect()
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.worlds).all(|w| self.succ[w].contains(w))
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.worlds).all(|w| !self.succ[w].contains(w))
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.worlds).all(|u| {
            self.succ[u]
                .iter()
                .all(|v| self.succ[v].is_subset(&self.succ[u]))
        })
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.worlds).all(|u| {
            self.succ[u]
                .iter()
                .all(|v| v == u || !self.succ[v].contains(u))
        })
    }

    /// Worlds `w` all of whose successors lie in `s`.
    pub fn box_of(&self, s: &WorldSet) -> WorldSet {
        (0..self.worlds)
            .filter(|&w| self.succ[w].is_subset(s))
            .collect()
    }

    /// Worlds with at least one successor in `s`.
    pub fn diamond_of(&self, s: &WorldSet) -> WorldSet {
        (0..self.worlds)
            .filter(|&w| self.succ[w].intersects(s))
            .collect()
    }

    /// Frame with worlds renamed by `perm` (world `i` becomes `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Frame {
        let mut succ = vec![WorldSet::empty(); self.worlds];
        for (u, v) in self.edges() {
            succ[perm[u]].insert(perm[v]);
        }
        Frame {
            worlds: self.worlds,
            succ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Var(usize),
    Top,
    Bottom,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Box(usize),
    Diamond(usize),
}

/// A formula flattened to a post-order program over shared subformulas.
/// Variables are numbered by first occurrence.
#[derive(Debug, Clone)]
pub struct CompiledFormula {
    ops: Vec<Op>,
    vars: Vec<String>,
}

impl CompiledFormula {
    pub fn new(f: &Formula) -> Self {
        fn go<'a>(
            f: &'a Formula,
            memo: &mut HashMap<&'a Formula, usize>,
            vars: &mut Vec<String>,
            ops: &mut Vec<Op>,
        ) -> usize {
            if let Some(&i) = memo.get(f) {
                return i;
            }
            let op = match f {
                Formula::Var(name) => {
                    let idx = match vars.iter().position(|v| v == name) {
                        Some(i) => i,
                        None => {
                            vars.push(name.clone());
                            vars.len() - 1
                        }
                    };
                    Op::Var(idx)
                }
                Formula::Top => Op::Top,
                Formula::Bottom => Op::Bottom,
                Formula::Not(a) => Op::Not(go(a, memo, vars, ops)),
                Formula::Box(a) => Op::Box(go(a, memo, vars, ops)),
                Formula::Diamond(a) => Op::Diamond(go(a, memo, vars, ops)),
                Formula::And(a, b) => Op::And(go(a, memo, vars, ops), go(b, memo, vars, ops)),
                Formula::Or(a, b) => Op::Or(go(a, memo, vars, ops), go(b, memo, vars, ops)),
                Formula::Implies(a, b) => {
                    Op::Implies(go(a, memo, vars, ops), go(b, memo, vars, ops))
                }
                Formula::Iff(a, b) => Op::Iff(go(a, memo, vars, ops), go(b, memo, vars, ops)),
            };
            ops.push(op);
            memo.insert(f, ops.len() - 1);
            ops.len() - 1
        }
        let mut memo = HashMap::new();
        let mut vars = Vec::new();
        let mut ops = Vec::new();
        go(f, &mut memo, &mut vars, &mut ops);
        CompiledFormula { ops, vars }
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Truth set on `frame`, with variable `i` true exactly on `valuation[i]`.
    pub fn truth_set(&self, frame: &Frame, valuation: &[WorldSet]) -> WorldSet {
        let mut scratch = Vec::with_capacity(self.ops.len());
        self.truth_set_with(frame, valuation, &mut scratch)
    }

    pub(crate) fn truth_set_with(
        &self,
        frame: &Frame,
        valuation: &[WorldSet],
        scratch: &mut Vec<WorldSet>,
    ) -> WorldSet {
        let n = frame.world_count();
        let all = WorldSet::full(n);
        scratch.clear();
        for op in &self.ops {
            let s = match *op {
                Op::Var(i) => valuation[i],
                Op::Top => all,
                Op::Bottom => WorldSet::empty(),
                Op::Not(a) => scratch[a].complement(n),
                Op::And(a, b) => scratch[a].intersection(&scratch[b]),
                Op::Or(a, b) => scratch[a].union(&scratch[b]),
                Op::Implies(a, b) => scratch[a].complement(n).union(&scratch[b]),
                Op::Iff(a, b) => {
                    let (x, y) = (scratch[a], scratch[b]);
                    x.intersection(&y)
                        .union(&x.union(&y).complement(n))
                }
                Op::Box(a) => frame.box_of(&scratch[a]),
                Op::Diamond(a) => frame.diamond_of(&scratch[a]),
            };
            scratch.push(s);
        }
        *scratch.last().expect("compiled formula is nonempty")
    }

    /// Least refuting valuation (bits of variable `i` occupy
    /// `i*n .. (i+1)*n`) and the least world where the formula fails.
    pub fn first_refutation(
        &self,
        frame: &Frame,
        limits: &Limits,
    ) -> Result<Option<(u64, usize)>, KripkeError> {
        let n = frame.world_count();
        let k = self.vars.len();
        let needed = n * k;
        if needed > limits.max_valuation_bits || needed >= 64 {
            return Err(KripkeError::ResourceBound {
                needed,
                cap: limits.max_valuation_bits,
            });
        }
        let all = frame.all_worlds();
        let block = if n == 0 { 0 } else { (1u64 << n) - 1 };
        let mut valuation = vec![WorldSet::empty(); k];
        let mut scratch = Vec::with_capacity(self.ops.len());
        for bits in 0..(1u64 << needed) {
            for (i, slot) in valuation.iter_mut().enumerate() {
                *slot = WorldSet::from_mask((bits >> (i * n)) & block);
            }
            let truth = self.truth_set_with(frame, &valuation, &mut scratch);
            if let Some(w) = all.difference(&truth).first() {
                return Ok(Some((bits, w)));
            }
        }
        Ok(None)
    }
}

/// A frame with a valuation over a declared set of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub frame: Frame,
    pub valuation: BTreeMap<String, WorldSet>,
}

impl KripkeModel {
    pub fn new(frame: Frame, valuation: BTreeMap<String, WorldSet>) -> Result<Self, KripkeError> {
        let all = frame.all_worlds();
        for set in valuation.values() {
            if let Some(w) = set.difference(&all).first() {
                return Err(KripkeError::WorldOutOfRange {
                    world: w,
                    worlds: frame.world_count(),
                });
            }
        }
        Ok(KripkeModel { frame, valuation })
    }

    pub fn world_count(&self) -> usize {
        self.frame.world_count()
    }

    pub fn truth_set(&self, f: &Formula) -> Result<WorldSet, KripkeError> {
        let compiled = CompiledFormula::new(f);
        let valuation = compiled
            .variables()
            .iter()
            .map(|v| {
                self.valuation
                    .get(v)
                    .copied()
                    .ok_or_else(|| KripkeError::UnknownVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(compiled.truth_set(&self.frame, &valuation))
    }

    /// Model on `frame` reading variable `i` of `vars` from bit block `i`
    /// of `bits`, as in [`CompiledFormula::first_refutation`].
    pub fn from_valuation_bits(frame: Frame, vars: &[String], bits: u64) -> KripkeModel {
        let n = frame.world_count();
        let block = if n == 0 { 0 } else { (1u64 << n) - 1 };
        let valuation = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), WorldSet::from_mask((bits >> (i * n)) & block)))
            .collect();
        KripkeModel { frame, valuation }
    }
}

pub fn eval(m: &KripkeModel, w: usize, f: &Formula) -> Result<bool, KripkeError> {
    if w >= m.world_count() {
        return Err(KripkeError::WorldOutOfRange {
            world: w,
            worlds: m.world_count(),
        });
    }
    Ok(m.truth_set(f)?.contains(w))
}

/// True iff `f` holds at every world under every valuation of its variables.
pub fn valid_on_frame(fr: &Frame, f: &Formula, limits: &Limits) -> Result<bool, KripkeError> {
    Ok(CompiledFormula::new(f).first_refutation(fr, limits)?.is_none())
}

/// Wire format: `{"worlds": n, "edges": [[i, j], ...], "valuation": {"p": [worlds], ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KripkeModelJson {
    pub worlds: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<usize>>,
}

impl From<&KripkeModel> for KripkeModelJson {
    fn from(m: &KripkeModel) -> Self {
        KripkeModelJson {
            worlds: m.world_count(),
            edges: m.frame.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            valuation: m
                .valuation
                .iter()
                .map(|(k, s)| (k.clone(), s.iter().collect()))
                .collect(),
        }
    }
}

impl TryFrom<KripkeModelJson> for KripkeModel {
    type Error = KripkeError;
    fn try_from(j: KripkeModelJson) -> Result<Self, Self::Error> {
        let frame = Frame::new(j.worlds, j.edges.iter().map(|e| (e[0], e[1])))?;
        let mut valuation = BTreeMap::new();
        for (name, ws) in j.valuation {
            if let Some(&w) = ws.iter().find(|&&w| w >= j.worlds) {
                return Err(KripkeError::WorldOutOfRange {
                    world: w,
                    worlds: j.worlds,
                });
            }
            valuation.insert(name, ws.into_iter().collect());
        }
        KripkeModel::new(frame, valuation)
    }
}

impl Serialize for KripkeModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        KripkeModelJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for KripkeModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = KripkeModelJson::deserialize(d)?;
        KripkeModel::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{nec, parse_formula, poss, var, Formula};

    fn two_chain_model() -> KripkeModel {
        let frame = Frame::new(2, [(0, 0), (1, 1), (0, 1)]).unwrap();
        KripkeModel::new(frame, BTreeMap::from([("p".into(), WorldSet::singleton(1))])).unwrap()
    }

    #[test]
    fn diamond_and_box_on_two_chain() {
        let m = two_chain_model();
        assert!(eval(&m, 0, &poss(var("p"))).unwrap());
        assert!(!eval(&m, 0, &nec(var("p"))).unwrap());
        assert!(eval(&m, 1, &nec(var("p"))).unwrap());
    }

    #[test]
    fn box_top_is_always_true() {
        let m = two_chain_model();
        let f = nec(Formula::Top);
        for w in 0..2 {
            assert!(eval(&m, w, &f).unwrap());
        }
        // Dead ends satisfy every box, including []false.
        let dead = KripkeModel::new(Frame::new(1, []).unwrap(), BTreeMap::new()).unwrap();
        assert!(eval(&dead, 0, &nec(Formula::Bottom)).unwrap());
        assert!(!eval(&dead, 0, &poss(Formula::Top)).unwrap());
    }

    #[test]
    fn axiom_five_instance_fails_at_root_of_two_chain() {
        let m = two_chain_model();
        let f = parse_formula("<>[]p -> p").unwrap();
        assert!(!eval(&m, 0, &f).unwrap());
        assert!(eval(&m, 1, &f).unwrap());
    }

    #[test]
    fn eval_errors() {
        let m = two_chain_model();
        assert_eq!(
            eval(&m, 0, &var("q")),
            Err(KripkeError::UnknownVariable("q".into()))
        );
        assert_eq!(
            eval(&m, 5, &var("p")),
            Err(KripkeError::WorldOutOfRange { world: 5, worlds: 2 })
        );
        assert!(Frame::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn frame_validity_examples() {
        let limits = Limits::default();
        let point = Frame::new(1, [(0, 0)]).unwrap();
        assert!(valid_on_frame(&point, &parse_formula("[]p -> p").unwrap(), &limits).unwrap());
        let lob = parse_formula("[]([]p -> p) -> []p").unwrap();
        assert!(!valid_on_frame(&point, &lob, &limits).unwrap());
        let chain = Frame::new(2, [(0, 0), (1, 1), (0, 1)]).unwrap();
        let dot2 = parse_formula("<>[]p -> []<>p").unwrap();
        assert!(valid_on_frame(&chain, &dot2, &limits).unwrap());
    }

    #[test]
    fn valuation_sweep_respects_cap() {
        let limits = Limits {
            max_valuation_bits: 4,
            ..Limits::default()
        };
        let fr = Frame::new(3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let f = parse_formula("p & q").unwrap();
        assert_eq!(
            valid_on_frame(&fr, &f, &limits),
            Err(KripkeError::ResourceBound { needed: 6, cap: 4 })
        );
    }

    #[test]
    fn edge_codes_round_trip() {
        for code in [0u64, 1, 0b1011, 0xFFFF, 0x1234] {
            assert_eq!(Frame::from_code(4, code).code(), code);
        }
        let fr = Frame::from_code(2, 0b1011);
        assert_eq!(fr.edges(), vec![(0, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn json_round_trip() {
        let m = two_chain_model();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            r#"{"worlds":2,"edges":[[0,0],[0,1],[1,1]],"valuation":{"p":[1]}}"#
        );
        let back: KripkeModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"worlds":2,"edges":[[0,3]],"valuation":{}}"#;
        assert!(serde_json::from_str::<KripkeModel>(bad).is_err());
    }
}
