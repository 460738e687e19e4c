//! Finite Boolean algebras and Boolean-valued first-order structures.
//!
//! An element of the algebra with `n` atoms is a bit mask over the atoms.

mod formula;
mod generic;
mod ultrapower;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use formula::{parse_fo_formula, FOFormula, FoParseError};
pub use generic::{binary_tree, build_generic_filter, level_dense_sets, GenericFilter, Poset, PosetJson};
pub use ultrapower::{
    boolean_ultrapower, check_names_structure, find_isomorphism, UltrapowerMode, UltrapowerResult,
};

/// Largest atom count accepted for an algebra.
pub const MAX_ATOMS: usize = 20;

pub type Element = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BvmError {
    #[error("{what}: {requested} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("atom {atom} out of range for an algebra with {atoms} atoms")]
    AtomOutOfRange { atom: usize, atoms: usize },
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("unbound variable {0:?}")]
    UnboundVariable(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("relation {relation} has arity {arity}, used with {used} arguments")]
    ArityMismatch {
        relation: String,
        arity: usize,
        used: usize,
    },
    #[error("malformed tuple key {0:?}")]
    BadTuple(String),
    #[error("not an ultrafilter: {0}")]
    NotAnUltrafilter(String),
    #[error("not a maximal antichain: {0}")]
    NotAnAntichain(String),
    #[error("antichain family is not directed under refinement: no member refines both {0} and {1}")]
    NotDirected(usize, usize),
    #[error("equality axioms fail: {0}")]
    EqualityAxioms(String),
    #[error("not an existential formula: {0}")]
    NotExistential(String),
    #[error(transparent)]
    Parse(#[from] FoParseError),
    #[error("not a partial order: {0}")]
    NotAPartialOrder(String),
    #[error("unknown condition {0:?}")]
    UnknownCondition(String),
    #[error("set {set} is not dense: nothing in it lies below {condition}")]
    NotDense { set: usize, condition: String },
    #[error("poset has no conditions")]
    EmptyPoset,
    #[error("internal check failed: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteBooleanAlgebra {
    atoms: usize,
}

impl FiniteBooleanAlgebra {
    pub fn new(atoms: usize) -> Result<Self, BvmError> {
        if atoms > MAX_ATOMS {
            return Err(BvmError::CapExceeded {
                what: "atoms",
                requested: atoms,
                cap: MAX_ATOMS,
            });
        }
        Ok(FiniteBooleanAlgebra { atoms })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    pub fn size(&self) -> usize {
        1 << self.atoms
    }

    pub fn zero(&self) -> Element {
        0
    }

    pub fn one(&self) -> Element {
        (1 << self.atoms) - 1
    }

    pub fn atom(&self, i: usize) -> Element {
        1 << i
    }

    pub fn meet(&self, a: Element, b: Element) -> Element {
        a & b
    }

    pub fn join(&self, a: Element, b: Element) -> Element {
        a | b
    }

    pub fn complement(&self, a: Element) -> Element {
        !a & self.one()
    }

    pub fn leq(&self, a: Element, b: Element) -> bool {
        a & !b == 0
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = Element>) -> Element {
        xs.into_iter().fold(0, |a, b| a | b)
    }

    pub fn meet_all(&self, xs: impl IntoIterator<Item = Element>) -> Element {
        xs.into_iter().fold(self.one(), |a, b| a & b)
    }

    pub fn contains(&self, a: Element) -> bool {
        a & !self.one() == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        0..(1u64 << self.atoms)
    }

    pub fn element_from_atoms(&self, atoms: &[usize]) -> Result<Element, BvmError> {
        atoms.iter().try_fold(0, |acc, &a| {
            if a >= self.atoms {
                Err(BvmError::AtomOutOfRange {
                    atom: a,
                    atoms: self.atoms,
                })
            } else {
                Ok(acc | 1 << a)
            }
        })
    }

    pub fn atoms_of(&self, e: Element) -> Vec<usize> {
        (0..self.atoms).filter(|i| e >> i & 1 == 1).collect()
    }

    pub fn ultrafilters(&self) -> Vec<Ultrafilter> {
        (0..self.atoms)
            .map(|a| Ultrafilter { algebra: *self, atom: a })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MaximalAntichain {
    elements: Vec<Element>,
}

impl MaximalAntichain {
    pub fn new(alg: &FiniteBooleanAlgebra, elements: Vec<Element>) -> Result<Self, BvmError> {
        for (i, &a) in elements.iter().enumerate() {
            if a == 0 || !alg.contains(a) {
                return Err(BvmError::NotAnAntichain(format!("element {a:#b} is zero or outside the algebra")));
            }
            for &b in &elements[..i] {
                if a & b != 0 {
                    return Err(BvmError::NotAnAntichain(format!("{b:#b} and {a:#b} overlap")));
                }
            }
        }
        if alg.join_all(elements.iter().copied()) != alg.one() {
            return Err(BvmError::NotAnAntichain("join is not 1".into()));
        }
        Ok(MaximalAntichain { elements })
    }

    /// The antichain of all atoms.
    pub fn atoms(alg: &FiniteBooleanAlgebra) -> Self {
        MaximalAntichain {
            elements: (0..alg.atom_count()).map(|i| alg.atom(i)).collect(),
        }
    }

    pub fn trivial(alg: &FiniteBooleanAlgebra) -> Self {
        MaximalAntichain {
            elements: vec![alg.one()],
        }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Every element of `self` lies below some element of `coarser`.
    pub fn refines(&self, coarser: &MaximalAntichain) -> bool {
        self.elements
            .iter()
            .all(|&a| coarser.elements.iter().any(|&b| a & !b == 0))
    }

    /// Index of the element of `coarser` above each element of `self`.
    pub fn refinement_map(&self, coarser: &MaximalAntichain) -> Option<Vec<usize>> {
        self.elements
            .iter()
            .map(|&a| coarser.elements.iter().position(|&b| a & !b == 0))
            .collect()
    }
}

/// An ultrafilter on a finite algebra, which is principal at one atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Ultrafilter {
    #[serde(skip)]
    algebra: FiniteBooleanAlgebra,
    atom: usize,
}

impl Ultrafilter {
    pub fn principal(alg: &FiniteBooleanAlgebra, atom: usize) -> Result<Self, BvmError> {
        if atom >= alg.atom_count() {
            return Err(BvmError::AtomOutOfRange {
                atom,
                atoms: alg.atom_count(),
            });
        }
        Ok(Ultrafilter { algebra: *alg, atom })
    }

    /// Validate an explicit set of elements as an ultrafilter.
    pub fn from_elements(alg: &FiniteBooleanAlgebra, elements: &[Element]) -> Result<Self, BvmError> {
        let set: BTreeSet<Element> = elements.iter().copied().collect();
        for &e in &set {
            if !alg.contains(e) {
                return Err(BvmError::NotAnUltrafilter(format!("{e:#b} is outside the algebra")));
            }
        }
        for b in alg.elements() {
            if set.contains(&b) == set.contains(&alg.complement(b)) {
                return Err(BvmError::NotAnUltrafilter(format!(
                    "needs exactly one of {b:#b} and its complement"
                )));
            }
        }
        for &a in &set {
            for b in alg.elements() {
                if alg.leq(a, b) && !set.contains(&b) {
                    return Err(BvmError::NotAnUltrafilter(format!("not upward closed at {a:#b} <= {b:#b}")));
                }
            }
            for &b in &set {
                if !set.contains(&(a & b)) {
                    return Err(BvmError::NotAnUltrafilter(format!("not closed under meet of {a:#b}, {b:#b}")));
                }
            }
        }
        let atom = (0..alg.atom_count())
            .find(|&i| set.contains(&alg.atom(i)))
            .ok_or_else(|| BvmError::NotAnUltrafilter("contains no atom".into()))?;
        Ok(Ultrafilter { algebra: *alg, atom })
    }

    pub fn atom(&self) -> usize {
        self.atom
    }

    pub fn contains(&self, e: Element) -> bool {
        e >> self.atom & 1 == 1
    }

    pub fn elements(&self) -> Vec<Element> {
        self.algebra.elements().filter(|&e| self.contains(e)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BRelation {
    pub arity: usize,
    /// Boolean value of each name tuple; absent tuples have value 0.
    pub values: BTreeMap<Vec<usize>, Element>,
}

impl BRelation {
    pub fn value(&self, tuple: &[usize]) -> Element {
        self.values.get(tuple).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BValuedStructure {
    pub algebra: FiniteBooleanAlgebra,
    pub names: Vec<String>,
    /// `eq[i][j]` is the value of `names[i] = names[j]`.
    pub eq: Vec<Vec<Element>>,
    pub relations: BTreeMap<String, BRelation>,
}

pub type Env = BTreeMap<String, usize>;

impl BValuedStructure {
    /// A structure whose names are pairwise equal with value 0 and have no
    /// relations.
    pub fn discrete(algebra: FiniteBooleanAlgebra, names: &[&str]) -> Self {
        let n = names.len();
        let eq = (0..n)
            .map(|i| (0..n).map(|j| if i == j { algebra.one() } else { 0 }).collect())
            .collect();
        BValuedStructure {
            algebra,
            names: names.iter().map(|s| s.to_string()).collect(),
            eq,
            relations: BTreeMap::new(),
        }
    }

    pub fn name_index(&self, name: &str) -> Result<usize, BvmError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| BvmError::UnknownName(name.into()))
    }

    pub fn set_eq(&mut self, a: usize, b: usize, value: Element) {
        self.eq[a][b] = value;
        self.eq[b][a] = value;
    }

    pub fn env(&self, pairs: &[(&str, &str)]) -> Result<Env, BvmError> {
        pairs
            .iter()
            .map(|(v, n)| Ok((v.to_string(), self.name_index(n)?)))
            .collect()
    }

    fn atomic_value(&self, r: &str, args: &[String], env: &Env) -> Result<Element, BvmError> {
        let rel = self
            .relations
            .get(r)
            .ok_or_else(|| BvmError::UnknownRelation(r.into()))?;
        if rel.arity != args.len() {
            return Err(BvmError::ArityMismatch {
                relation: r.into(),
                arity: rel.arity,
                used: args.len(),
            });
        }
        let tuple = args.iter().map(|a| lookup(env, a)).collect::<Result<Vec<_>, _>>()?;
        Ok(rel.value(&tuple))
    }

    /// Stalk-wise construction: each name denotes an element of every stalk,
    /// one classical structure per atom.
    pub fn from_stalks(names: &[String], stalks: &[(ClassicalStructure, Vec<usize>)]) -> Result<Self, BvmError> {
        let algebra = FiniteBooleanAlgebra::new(stalks.len())?;
        let n = names.len();
        let mut eq = vec![vec![0; n]; n];
        for (i, row) in eq.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = stalks
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, den))| den[i] == den[j])
                    .fold(0, |acc, (a, _)| acc | 1 << a);
            }
        }
        let mut relations = BTreeMap::new();
        if let Some((first, _)) = stalks.first() {
            for (r, crel) in &first.relations {
                let mut values = BTreeMap::new();
                for tuple in tuples(n, crel.arity) {
                    let mut v = 0;
                    for (a, (stalk, den)) in stalks.iter().enumerate() {
                        let image: Vec<usize> = tuple.iter().map(|&t| den[t]).collect();
                        if stalk.relations.get(r).is_some_and(|s| s.tuples.contains(&image)) {
                            v |= 1 << a;
                        }
                    }
                    if v != 0 {
                        values.insert(tuple, v);
                    }
                }
                relations.insert(r.clone(), BRelation { arity: crel.arity, values });
            }
        }
        Ok(BValuedStructure {
            algebra,
            names: names.to_vec(),
            eq,
            relations,
        })
    }
}

fn lookup(env: &Env, v: &str) -> Result<usize, BvmError> {
    env.get(v).copied().ok_or_else(|| BvmError::UnboundVariable(v.into()))
}

/// All tuples over `0..n` of the given length, in lexicographic order.
pub fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Boolean value of `f` with free variables bound to names by `env`.
pub fn boolean_value(s: &BValuedStructure, f: &FOFormula, env: &Env) -> Result<Element, BvmError> {
    let alg = &s.algebra;
    Ok(match f {
        FOFormula::True => alg.one(),
        FOFormula::False => 0,
        FOFormula::Eq(a, b) => s.eq[lookup(env, a)?][lookup(env, b)?],
        FOFormula::Rel(r, args) => s.atomic_value(r, args, env)?,
        FOFormula::Not(g) => alg.complement(boolean_value(s, g, env)?),
        FOFormula::And(a, b) => boolean_value(s, a, env)? & boolean_value(s, b, env)?,
        FOFormula::Or(a, b) => boolean_value(s, a, env)? | boolean_value(s, b, env)?,
        FOFormula::Implies(a, b) => alg.complement(boolean_value(s, a, env)?) | boolean_value(s, b, env)?,
        FOFormula::Exists(x, g) | FOFormula::Forall(x, g) => {
            let universal = matches!(f, FOFormula::Forall(..));
            let mut env = env.clone();
            let mut acc = if universal { alg.one() } else { 0 };
            for t in 0..s.names.len() {
                env.insert(x.clone(), t);
                let v = boolean_value(s, g, &env)?;
                acc = if universal { acc & v } else { acc | v };
            }
            acc
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqualityViolation {
    pub axiom: &'static str,
    pub names: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqualityReport {
    pub pass: bool,
    pub violations: Vec<EqualityViolation>,
}

pub fn check_equality_axioms(s: &BValuedStructure) -> EqualityReport {
    let alg = &s.algebra;
    let n = s.names.len();
    let name = |i: usize| s.names[i].clone();
    let mut violations = Vec::new();
    for i in 0..n {
        if s.eq[i][i] != alg.one() {
            violations.push(EqualityViolation {
                axiom: "reflexivity",
                names: vec![name(i)],
                relation: None,
                detail: format!("value is {:?}", alg.atoms_of(s.eq[i][i])),
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if s.eq[i][j] != s.eq[j][i] {
                violations.push(EqualityViolation {
                    axiom: "symmetry",
                    names: vec![name(i), name(j)],
                    relation: None,
                    detail: format!("{:?} vs {:?}", alg.atoms_of(s.eq[i][j]), alg.atoms_of(s.eq[j][i])),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if !alg.leq(s.eq[i][j] & s.eq[j][k], s.eq[i][k]) {
                    violations.push(EqualityViolation {
                        axiom: "transitivity",
                        names: vec![name(i), name(j), name(k)],
                        relation: None,
                        detail: "value of the chain exceeds the value of the ends".into(),
                    });
                }
            }
        }
    }
    for (r, rel) in &s.relations {
        for tuple in tuples(n, rel.arity) {
            let v = rel.value(&tuple);
            for pos in 0..rel.arity {
                for alt in 0..n {
                    let mut moved = tuple.clone();
                    moved[pos] = alt;
                    if !alg.leq(s.eq[tuple[pos]][alt] & v, rel.value(&moved)) {
                        violations.push(EqualityViolation {
                            axiom: "congruence",
                            names: tuple.iter().map(|&t| name(t)).chain([name(alt)]).collect(),
                            relation: Some(r.clone()),
                            detail: format!("argument {pos} replaced"),
                        });
                    }
                }
            }
        }
    }
    EqualityReport {
        pass: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullnessEntry {
    pub formula: FOFormula,
    pub value: Vec<usize>,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullnessReport {
    pub full: bool,
    pub entries: Vec<FullnessEntry>,
}

/// For each `exists x. phi`, look for a name whose value for `phi` equals
/// the value of the whole formula. The least such name is the witness.
pub fn is_full(s: &BValuedStructure, fs: &[FOFormula], env: &Env) -> Result<FullnessReport, BvmError> {
    let mut entries = Vec::new();
    for f in fs {
        let FOFormula::Exists(x, body) = f else {
            return Err(BvmError::NotExistential(f.to_string()));
        };
        let value = boolean_value(s, f, env)?;
        let mut env = env.clone();
        let mut witness = None;
        for t in 0..s.names.len() {
            env.insert(x.clone(), t);
            if boolean_value(s, body, &env)? == value {
                witness = Some(s.names[t].clone());
                break;
            }
        }
        entries.push(FullnessEntry {
            formula: f.clone(),
            value: s.algebra.atoms_of(value),
            witness,
        });
    }
    Ok(FullnessReport {
        full: entries.iter().all(|e| e.witness.is_some()),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CRelation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<usize>>,
}

/// An ordinary two-valued structure with identity as equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalStructure {
    pub elements: Vec<String>,
    pub relations: BTreeMap<String, CRelation>,
}

impl ClassicalStructure {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn holds(&self, f: &FOFormula, env: &Env) -> Result<bool, BvmError> {
        Ok(match f {
            FOFormula::True => true,
            FOFormula::False => false,
            FOFormula::Eq(a, b) => lookup(env, a)? == lookup(env, b)?,
            FOFormula::Rel(r, args) => {
                let rel = self
                    .relations
                    .get(r)
                    .ok_or_else(|| BvmError::UnknownRelation(r.clone()))?;
                if rel.arity != args.len() {
                    return Err(BvmError::ArityMismatch {
                        relation: r.clone(),
                        arity: rel.arity,
                        used: args.len(),
                    });
                }
                let tuple = args.iter().map(|a| lookup(env, a)).collect::<Result<Vec<_>, _>>()?;
                rel.tuples.contains(&tuple)
            }
            FOFormula::Not(g) => !self.holds(g, env)?,
            FOFormula::And(a, b) => self.holds(a, env)? && self.holds(b, env)?,
            FOFormula::Or(a, b) => self.holds(a, env)? || self.holds(b, env)?,
            FOFormula::Implies(a, b) => !self.holds(a, env)? || self.holds(b, env)?,
            FOFormula::Exists(x, g) | FOFormula::Forall(x, g) => {
                let universal = matches!(f, FOFormula::Forall(..));
                let mut env = env.clone();
                let mut result = universal;
                for e in 0..self.len() {
                    env.insert(x.clone(), e);
                    if self.holds(g, &env)? != universal {
                        result = !universal;
                        break;
                    }
                }
                result
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub structure: ClassicalStructure,
    /// Class of each name.
    pub class_of: Vec<usize>,
}

/// Collapse names modulo `U`. Classes are numbered by least member and
/// labeled by it.
pub fn quotient_by_ultrafilter(s: &BValuedStructure, u: &Ultrafilter) -> Result<Quotient, BvmError> {
    let report = check_equality_axioms(s);
    if let Some(v) = report.violations.first() {
        return Err(BvmError::EqualityAxioms(format!("{} at {:?}", v.axiom, v.names)));
    }
    let n = s.names.len();
    let mut class_of = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(i);
        for j in i..n {
            if u.contains(s.eq[i][j]) {
                class_of[j] = c;
            }
        }
    }
    let mut relations = BTreeMap::new();
    for (r, rel) in &s.relations {
        let mut holds = BTreeSet::new();
        for tuple in tuples(n, rel.arity) {
            let classes: Vec<usize> = tuple.iter().map(|&t| class_of[t]).collect();
            let via_reps: Vec<usize> = classes.iter().map(|&c| reps[c]).collect();
            let here = u.contains(rel.value(&tuple));
            if here != u.contains(rel.value(&via_reps)) {
                return Err(BvmError::Internal(format!("relation {r} is not well defined on classes")));
            }
            if here {
                holds.insert(classes);
            }
        }
        relations.insert(r.clone(), CRelation { arity: rel.arity, tuples: holds });
    }
    Ok(Quotient {
        structure: ClassicalStructure {
            elements: reps.iter().map(|&i| s.names[i].clone()).collect(),
            relations,
        },
        class_of,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LosCounterexample {
    pub formula: FOFormula,
    pub env: BTreeMap<String, String>,
    pub ultrafilter_atom: usize,
    pub value: Vec<usize>,
    pub holds_in_quotient: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LosReport {
    pub checked: usize,
    pub agreed: usize,
    pub agreement: String,
    pub counterexample: Option<LosCounterexample>,
}

fn percent(agreed: usize, checked: usize) -> String {
    if agreed == checked {
        "100%".into()
    } else {
        format!("{:.2}%", 100.0 * agreed as f64 / checked as f64)
    }
}

/// Compare truth in the quotient by each ultrafilter with membership of the
/// Boolean value, for each formula under every assignment of names to its
/// free variables.
pub fn verify_los(
    s: &BValuedStructure,
    us: &[Ultrafilter],
    fs: &[FOFormula],
) -> Result<LosReport, BvmError> {
    let quotients = us
        .iter()
        .map(|u| quotient_by_ultrafilter(s, u))
        .collect::<Result<Vec<_>, _>>()?;
    let results = fs
        .par_iter()
        .map(|f| -> Result<(usize, usize, Option<LosCounterexample>), BvmError> {
            let vars = f.free_variables();
            let mut checked = 0;
            let mut agreed = 0;
            let mut first = None;
            for assignment in tuples(s.names.len(), vars.len()) {
                let env: Env = vars.iter().cloned().zip(assignment.iter().copied()).collect();
                let value = boolean_value(s, f, &env)?;
                for (u, q) in us.iter().zip(&quotients) {
                    let qenv: Env = env.iter().map(|(v, &t)| (v.clone(), q.class_of[t])).collect();
                    let holds = q.structure.holds(f, &qenv)?;
                    checked += 1;
                    if holds == u.contains(value) {
                        agreed += 1;
                    } else if first.is_none() {
                        first = Some(LosCounterexample {
                            formula: f.clone(),
                            env: env.iter().map(|(v, &t)| (v.clone(), s.names[t].clone())).collect(),
                            ultrafilter_atom: u.atom(),
                            value: s.algebra.atoms_of(value),
                            holds_in_quotient: holds,
                        });
                    }
                }
            }
            Ok((checked, agreed, first))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let checked = results.iter().map(|r| r.0).sum();
    let agreed = results.iter().map(|r| r.1).sum();
    Ok(LosReport {
        checked,
        agreed,
        agreement: percent(agreed, checked),
        counterexample: results.into_iter().find_map(|r| r.2),
    })
}

/// Formulas of quantifier depth at most 2 in the variables `x` and `y`
/// over the given relations: atoms and their negations and pairwise
/// conjunctions, then quantifications of those, closed again under
/// negation and under conjunction and disjunction with an atom, and
/// quantified once more.
pub fn los_formula_family(relations: &[(String, usize)]) -> Vec<FOFormula> {
    let vars = ["x", "y"];
    let mut atoms = vec![
        FOFormula::eq("x", "y"),
        FOFormula::eq("x", "x"),
        FOFormula::eq("y", "y"),
    ];
    for (r, arity) in relations {
        for args in tuples(2, *arity) {
            atoms.push(FOFormula::Rel(r.clone(), args.iter().map(|&i| vars[i].to_string()).collect()));
        }
    }
    let mut b0: Vec<FOFormula> = atoms.clone();
    b0.extend(atoms.iter().map(|a| FOFormula::not(a.clone())));
    for a in &atoms {
        for b in &atoms {
            b0.push(FOFormula::and(a.clone(), b.clone()));
        }
    }
    let quantify = |fs: &[FOFormula]| -> Vec<FOFormula> {
        let mut out = Vec::new();
        for f in fs {
            for v in vars {
                out.push(FOFormula::exists(v, f.clone()));
                out.push(FOFormula::forall(v, f.clone()));
            }
        }
        out
    };
    let q1 = quantify(&b0);
    let mut b1 = q1.clone();
    b1.extend(q1.iter().map(|q| FOFormula::not(q.clone())));
    for q in &q1 {
        for a in &atoms {
            b1.push(FOFormula::and(q.clone(), a.clone()));
            b1.push(FOFormula::or(q.clone(), a.clone()));
        }
    }
    let q2 = quantify(&b1);
    let mut family = b0;
    family.extend(b1);
    family.extend(q2);
    family
}

// JSON formats.

/// `{"atoms": n, "names": [...], "eq": {"a,b": [atoms]}, "relations":
/// {"R": {"arity": 2, "values": {"a,b": [atoms]}}}}`. A missing `eq` entry
/// takes the value of its mirror image if that is given and 0 otherwise;
/// the diagonal defaults to 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BValuedStructureJson {
    pub atoms: usize,
    pub names: Vec<String>,
    #[serde(default)]
    pub eq: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub relations: BTreeMap<String, BRelationJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BRelationJson {
    pub arity: usize,
    #[serde(default)]
    pub values: BTreeMap<String, Vec<usize>>,
}

fn parse_tuple(key: &str, names: &[String]) -> Result<Vec<usize>, BvmError> {
    if key.trim().is_empty() {
        return Ok(Vec::new());
    }
    key.split(',')
        .map(|part| {
            let part = part.trim();
            names
                .iter()
                .position(|n| n == part)
                .ok_or_else(|| BvmError::UnknownName(part.into()))
        })
        .collect()
}

fn tuple_key(tuple: &[usize], names: &[String]) -> String {
    tuple.iter().map(|&t| names[t].as_str()).collect::<Vec<_>>().join(",")
}

impl TryFrom<BValuedStructureJson> for BValuedStructure {
    type Error = BvmError;

    fn try_from(j: BValuedStructureJson) -> Result<Self, BvmError> {
        let algebra = FiniteBooleanAlgebra::new(j.atoms)?;
        let n = j.names.len();
        for (i, name) in j.names.iter().enumerate() {
            if j.names[..i].contains(name) {
                return Err(BvmError::DuplicateName(name.clone()));
            }
            if name.contains(',') || name.trim() != name || name.is_empty() {
                return Err(BvmError::BadTuple(name.clone()));
            }
        }
        let mut given: BTreeMap<(usize, usize), Element> = BTreeMap::new();
        for (key, atoms) in &j.eq {
            let t = parse_tuple(key, &j.names)?;
            if t.len() != 2 {
                return Err(BvmError::BadTuple(key.clone()));
            }
            given.insert((t[0], t[1]), algebra.element_from_atoms(atoms)?);
        }
        let mut eq = vec![vec![0; n]; n];
        for (i, row) in eq.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate() {
                *cell = match (given.get(&(i, k)), given.get(&(k, i))) {
                    (Some(&v), _) => v,
                    (None, Some(&v)) => v,
                    (None, None) if i == k => algebra.one(),
                    (None, None) => 0,
                };
            }
        }
        let mut relations = BTreeMap::new();
        for (r, rj) in j.relations {
            let mut values = BTreeMap::new();
            for (key, atoms) in &rj.values {
                let t = parse_tuple(key, &j.names)?;
                if t.len() != rj.arity {
                    return Err(BvmError::ArityMismatch {
                        relation: r.clone(),
                        arity: rj.arity,
                        used: t.len(),
                    });
                }
                let v = algebra.element_from_atoms(atoms)?;
                if v != 0 {
                    values.insert(t, v);
                }
            }
            relations.insert(r, BRelation { arity: rj.arity, values });
        }
        Ok(BValuedStructure {
            algebra,
            names: j.names,
            eq,
            relations,
        })
    }
}

impl From<&BValuedStructure> for BValuedStructureJson {
    fn from(s: &BValuedStructure) -> Self {
        let n = s.names.len();
        let mut eq = BTreeMap::new();
        for i in 0..n {
            for k in 0..n {
                let v = s.eq[i][k];
                let implied = if i == k { s.algebra.one() } else { 0 };
                if v != implied || s.eq[k][i] != v {
                    eq.insert(tuple_key(&[i, k], &s.names), s.algebra.atoms_of(v));
                }
            }
        }
        let relations = s
            .relations
            .iter()
            .map(|(r, rel)| {
                let values = rel
                    .values
                    .iter()
                    .map(|(t, &v)| (tuple_key(t, &s.names), s.algebra.atoms_of(v)))
                    .collect();
                (r.clone(), BRelationJson { arity: rel.arity, values })
            })
            .collect();
        BValuedStructureJson {
            atoms: s.algebra.atom_count(),
            names: s.names.clone(),
            eq,
            relations,
        }
    }
}

/// `{"elements": [...], "relations": {"E": {"arity": 2, "tuples": [["a","b"]]}}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalStructureJson {
    pub elements: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, CRelationJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CRelationJson {
    pub arity: usize,
    #[serde(default)]
    pub tuples: Vec<Vec<String>>,
}

impl TryFrom<ClassicalStructureJson> for ClassicalStructure {
    type Error = BvmError;

    fn try_from(j: ClassicalStructureJson) -> Result<Self, BvmError> {
        for (i, e) in j.elements.iter().enumerate() {
            if j.elements[..i].contains(e) {
                return Err(BvmError::DuplicateName(e.clone()));
            }
        }
        let index = |e: &String| {
            j.elements
                .iter()
                .position(|x| x == e)
                .ok_or_else(|| BvmError::UnknownName(e.clone()))
        };
        let mut relations = BTreeMap::new();
        for (r, rj) in &j.relations {
            let mut tuples = BTreeSet::new();
            for t in &rj.tuples {
                if t.len() != rj.arity {
                    return Err(BvmError::ArityMismatch {
                        relation: r.clone(),
                        arity: rj.arity,
                        used: t.len(),
                    });
                }
                tuples.insert(t.iter().map(index).collect::<Result<Vec<_>, _>>()?);
            }
            relations.insert(r.clone(), CRelation { arity: rj.arity, tuples });
        }
        Ok(ClassicalStructure {
            elements: j.elements,
            relations,
        })
    }
}

impl From<&ClassicalStructure> for ClassicalStructureJson {
    fn from(s: &ClassicalStructure) -> Self {
        ClassicalStructureJson {
            elements: s.elements.clone(),
            relations: s
                .relations
                .iter()
                .map(|(r, rel)| {
                    let tuples = rel
                        .tuples
                        .iter()
                        .map(|t| t.iter().map(|&i| s.elements[i].clone()).collect())
                        .collect();
                    (r.clone(), CRelationJson { arity: rel.arity, tuples })
                })
                .collect(),
        }
    }
}
