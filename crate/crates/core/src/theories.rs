//! Axiom and theory catalog for the modal logic of forcing, with semantic
//! decision by exhaustive frame search.
//!
//! A formula is refuted in a theory by a model on a frame of the theory's
//! frame class. Theories without a standard finite frame class are searched
//! over arbitrary frames on which all of their axioms are frame-valid; such
//! searches never report completeness.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kripke::{
    enumerate_frames, eval, CompiledFormula, Frame, FrameClass, KripkeError, KripkeModel,
};
use crate::limits::Limits;
use crate::syntax::{parse_formula, subformulas, AxiomScheme, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedAxiom {
    pub name: &'static str,
    pub scheme: AxiomScheme,
}

/// Axiom templates in table order, `p` and `q` standing for the
/// metavariables φ and ψ.
const AXIOM_TABLE: [(&str, &str); 13] = [
    ("K", "[](p -> q) -> ([]p -> []q)"),
    ("Dual", "[]~p <-> ~<>p"),
    ("S", "[]p -> p"),
    ("4", "[]p -> [][]p"),
    (".2", "<>[]p -> []<>p"),
    ("5", "<>[]p -> p"),
    ("M", "[]<>p -> <>[]p"),
    ("W5", "<>[]p -> (p -> []p)"),
    (".3", "<>p & <>q -> (<>(p & <>q) | <>(p & q) | <>(q & <>p))"),
    ("Dm", "[]([](p -> []p) -> p) -> (<>[]p -> p)"),
    ("Grz", "[]([](p -> []p) -> p) -> p"),
    ("Löb", "[]([]p -> p) -> []p"),
    ("H", "p -> [](<>p -> p)"),
];

/// The principles valid under every forcing interpretation.
pub const S42_AXIOMS: [&str; 5] = ["K", "Dual", "S", "4", ".2"];

/// The principles beyond S4.2 that fail in some model of set theory.
pub const NON_VALID_AXIOMS: [&str; 8] = ["5", "M", "W5", ".3", "Dm", "Grz", "Löb", "H"];

pub fn axiom_catalog() -> Vec<NamedAxiom> {
    AXIOM_TABLE
        .iter()
        .map(|(name, text)| NamedAxiom {
            name,
            scheme: AxiomScheme::new(
                name,
                parse_formula(text).expect("axiom table entries parse"),
            ),
        })
        .collect()
}

pub fn axiom(name: &str) -> Result<NamedAxiom, TheoryError> {
    let wanted = match name {
        "Lob" | "Loeb" | "L" => "Löb",
        other => other,
    };
    axiom_catalog()
        .into_iter()
        .find(|a| a.name == wanted)
        .ok_or_else(|| TheoryError::UnknownAxiom(name.to_string()))
}

/// Name, base theory, extra axioms, finite frame class.
type TheoryRow = (&'static str, Option<&'static str>, &'static [&'static str], Option<FrameClass>);

/// How each theory is built: a base theory plus extra axioms.
const THEORY_TABLE: [TheoryRow; 14] = [
    ("K", None, &["K", "Dual"], Some(FrameClass::Arbitrary)),
    ("K4", Some("K"), &["4"], Some(FrameClass::Transitive)),
    ("S4", Some("K4"), &["S"], Some(FrameClass::Preorder)),
    ("S4.1", Some("S4"), &["M"], None),
    ("S4.2", Some("S4"), &[".2"], Some(FrameClass::DirectedPreorder)),
    ("S4.2.1", Some("S4"), &[".2", "M"], None),
    ("S4.3", Some("S4"), &[".3"], Some(FrameClass::LinearPreorder)),
    ("S4W5", Some("S4"), &["W5"], None),
    ("S5", Some("S4"), &["5"], Some(FrameClass::Universal)),
    ("Dm", Some("S4"), &["Dm"], None),
    ("Dm.2", Some("S4.2"), &["Dm"], None),
    ("Grz", Some("K"), &["Grz"], Some(FrameClass::PartialOrder)),
    ("GL", Some("K4"), &["Löb"], Some(FrameClass::StrictPartialOrder)),
    ("K4H", Some("K4"), &["H"], None),
];

/// Edges of the strength diagram, stronger theory first.
pub const DIAGRAM_EDGES: [(&str, &str); 16] = [
    ("S5", "S4W5"),
    ("S4W5", "S4.3"),
    ("S4W5", "Dm.2"),
    ("S4.2.1", "S4.1"),
    ("S4.2.1", "S4.2"),
    ("S4.3", "S4.2"),
    ("Dm.2", "S4.2"),
    ("Dm.2", "Dm"),
    ("Grz", "Dm"),
    ("S4.1", "S4"),
    ("S4.2", "S4"),
    ("Dm", "S4"),
    ("GL", "K4"),
    ("K4H", "K4"),
    ("S4", "K4"),
    ("K4", "K"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModalTheory {
    pub name: &'static str,
    /// Theory this one extends, as drawn in the diagram.
    pub base: Option<&'static str>,
    pub axioms: Vec<NamedAxiom>,
    pub frame_class: Option<FrameClass>,
}

impl ModalTheory {
    pub fn axiom_names(&self) -> Vec<&'static str> {
        self.axioms.iter().map(|a| a.name).collect()
    }

    /// Frame-validity of every axiom on `fr`.
    pub fn valid_on(&self, fr: &Frame, limits: &Limits) -> Result<bool, KripkeError> {
        for a in &self.axioms {
            if CompiledFormula::new(&a.scheme.template)
                .first_refutation(fr, limits)?
                .is_some()
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn theory(name: &str) -> Result<ModalTheory, TheoryError> {
    let (tname, base, extra, class) = THEORY_TABLE
        .iter()
        .find(|t| t.0 == name)
        .ok_or_else(|| TheoryError::UnknownTheory(name.to_string()))?;
    let mut axioms = match base {
        Some(b) => theory(b)?.axioms,
        None => Vec::new(),
    };
    for a in extra.iter() {
        if axioms.iter().all(|x| x.name != *a) {
            axioms.push(axiom(a)?);
        }
    }
    Ok(ModalTheory {
        name: tname,
        base: *base,
        axioms,
        frame_class: *class,
    })
}

pub fn theory_catalog() -> Vec<ModalTheory> {
    THEORY_TABLE
        .iter()
        .map(|t| theory(t.0).expect("table entries resolve"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Valid { searched_bound: usize, complete: bool },
    Refuted { model: KripkeModel, world: usize },
    Unknown { bound_exhausted: usize },
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecideOptions {
    /// Report `Unknown` instead of an incomplete `Valid`.
    pub unknown_when_incomplete: bool,
}

/// World count at which a finite search is assumed complete for `f`:
/// `2^|subformulas(f)|`.
pub fn filtration_bound(f: &Formula) -> usize {
    let k = subformulas(f).len();
    if k >= usize::BITS as usize - 1 {
        usize::MAX
    } else {
        1usize << k
    }
}

/// Least countermodel over the given frames: frames are taken in order and
/// valuations by increasing bit pattern, so the result does not depend on
/// how the search is split across threads.
fn least_refutation(
    frames: &[Frame],
    f: &Formula,
    limits: &Limits,
) -> Result<Option<(KripkeModel, usize)>, KripkeError> {
    let compiled = CompiledFormula::new(f);
    let found = frames
        .par_iter()
        .map(|fr| compiled.first_refutation(fr, limits).map(|r| r.map(|hit| (fr, hit))))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    match found {
        None => Ok(None),
        Some(Err(e)) => Err(e),
        Some(Ok(None)) => unreachable!("filtered above"),
        Some(Ok(Some((fr, (bits, world))))) => {
            let model = KripkeModel::from_valuation_bits(fr.clone(), compiled.variables(), bits);
            let holds = eval(&model, world, f)?;
            assert!(!holds, "countermodel failed re-verification");
            Ok(Some((model, world)))
        }
    }
}

/// Smallest model in `class` with at most `max_worlds` worlds falsifying `f`
/// at some world. Ties break on (world count, edge code, valuation bits),
/// then the least falsifying world.
pub fn find_countermodel(
    class: FrameClass,
    f: &Formula,
    max_worlds: usize,
    limits: &Limits,
) -> Result<Option<(KripkeModel, usize)>, KripkeError> {
    let frames: Vec<Frame> = enumerate_frames(max_worlds, class, true, limits)?.collect();
    least_refutation(&frames, f, limits)
}

pub fn decide(
    theory: &ModalTheory,
    f: &Formula,
    bound: usize,
    options: DecideOptions,
    limits: &Limits,
) -> Result<Verdict, TheoryError> {
    let frames: Vec<Frame> = match theory.frame_class {
        Some(class) => enumerate_frames(bound, class, true, limits)?.collect(),
        None => {
            let candidates: Vec<Frame> =
                enumerate_frames(bound, FrameClass::Arbitrary, true, limits)?.collect();
            let keep = candidates
                .par_iter()
                .map(|fr| theory.valid_on(fr, limits))
                .collect::<Result<Vec<bool>, _>>()?;
            candidates
                .into_iter()
                .zip(keep)
                .filter_map(|(fr, k)| k.then_some(fr))
                .collect()
        }
    };
    if let Some((model, world)) = least_refutation(&frames, f, limits)? {
        return Ok(Verdict::Refuted { model, world });
    }
    let complete = theory.frame_class.is_some() && bound >= filtration_bound(f);
    if !complete && options.unknown_when_incomplete {
        return Ok(Verdict::Unknown {
            bound_exhausted: bound,
        });
    }
    Ok(Verdict::Valid {
        searched_bound: bound,
        complete,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassInclusion {
    pub smaller: FrameClass,
    pub larger: FrameClass,
    pub pass: bool,
    /// Edges of a frame in `smaller` but not `larger`.
    pub counterexample: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeCheck {
    pub stronger: &'static str,
    pub weaker: &'static str,
    /// Every frame validating the stronger theory validates the weaker one.
    pub pass: bool,
    pub counterexample: Option<Vec<(usize, usize)>>,
    /// A frame validating the weaker theory on which the stronger fails.
    pub strictness_witness: Option<FrameWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrameWitness {
    pub worlds: usize,
    pub edges: Vec<(usize, usize)>,
}

impl From<&Frame> for FrameWitness {
    fn from(fr: &Frame) -> Self {
        FrameWitness {
            worlds: fr.world_count(),
            edges: fr.edges(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassSoundness {
    pub theory: &'static str,
    pub class: FrameClass,
    pub frames_checked: usize,
    pub pass: bool,
    pub failure: Option<FrameWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomOnClass {
    pub axiom: &'static str,
    pub class: FrameClass,
    pub valid_everywhere: bool,
    pub refuting_frame: Option<FrameWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionReport {
    pub max_worlds: usize,
    pub frames_checked: usize,
    pub class_inclusions: Vec<ClassInclusion>,
    pub edges: Vec<EdgeCheck>,
    pub class_soundness: Vec<ClassSoundness>,
    pub axioms_on_classes: Vec<AxiomOnClass>,
}

impl InclusionReport {
    pub fn all_pass(&self) -> bool {
        self.class_inclusions.iter().all(|c| c.pass)
            && self
                .edges
                .iter()
                .all(|e| e.pass && e.strictness_witness.is_some())
            && self.class_soundness.iter().all(|c| c.pass)
    }
}

/// Checks the diagram over all frames with at most `max_worlds` worlds
/// (up to isomorphism): frame-class inclusions, validity inclusion along each
/// edge with a strictness witness, and soundness of each theory's frame class.
pub fn verify_frame_inclusions(
    max_worlds: usize,
    limits: &Limits,
) -> Result<InclusionReport, TheoryError> {
    let frames: Vec<Frame> =
        enumerate_frames(max_worlds, FrameClass::Arbitrary, true, limits)?.collect();
    let catalog = axiom_catalog();
    let compiled: Vec<CompiledFormula> = catalog
        .iter()
        .map(|a| CompiledFormula::new(&a.scheme.template))
        .collect();
    // valid[i] = bit mask of catalog axioms frame-valid on frames[i].
    let valid: Vec<u32> = frames
        .par_iter()
        .map(|fr| {
            compiled.iter().enumerate().try_fold(0u32, |acc, (k, c)| {
                Ok::<u32, KripkeError>(if c.first_refutation(fr, limits)?.is_none() {
                    acc | (1 << k)
                } else {
                    acc
                })
            })
        })
        .collect::<Result<_, _>>()?;
    let mask_of = |t: &ModalTheory| -> u32 {
        t.axioms.iter().fold(0u32, |acc, a| {
            let k = catalog.iter().position(|c| c.name == a.name).expect("catalog axiom");
            acc | (1 << k)
        })
    };
    let theory_holds = |mask: u32, i: usize| valid[i] & mask == mask;

    let class_pairs = [
        (FrameClass::PreBooleanAlgebra, FrameClass::PreLattice),
        (FrameClass::PreLattice, FrameClass::DirectedPreorder),
        (FrameClass::LinearPreorder, FrameClass::DirectedPreorder),
        (FrameClass::DirectedPreorder, FrameClass::Preorder),
        (FrameClass::Universal, FrameClass::LinearPreorder),
        (FrameClass::PartialOrder, FrameClass::Preorder),
        (FrameClass::Preorder, FrameClass::Transitive),
        (FrameClass::StrictPartialOrder, FrameClass::Transitive),
    ];
    let class_inclusions = class_pairs
        .iter()
        .map(|&(smaller, larger)| {
            let bad = frames
                .iter()
                .find(|fr| smaller.contains(fr) && !larger.contains(fr));
            ClassInclusion {
                smaller,
                larger,
                pass: bad.is_none(),
                counterexample: bad.map(|fr| fr.edges()),
            }
        })
        .collect();

    let mut edges = Vec::new();
    for (stronger, weaker) in DIAGRAM_EDGES {
        let (s, w) = (mask_of(&theory(stronger)?), mask_of(&theory(weaker)?));
        let bad = (0..frames.len()).find(|&i| theory_holds(s, i) && !theory_holds(w, i));
        let strict = (0..frames.len()).find(|&i| theory_holds(w, i) && !theory_holds(s, i));
        edges.push(EdgeCheck {
            stronger,
            weaker,
            pass: bad.is_none(),
            counterexample: bad.map(|i| frames[i].edges()),
            strictness_witness: strict.map(|i| FrameWitness::from(&frames[i])),
        });
    }

    let mut class_soundness = Vec::new();
    for t in theory_catalog() {
        let Some(class) = t.frame_class else { continue };
        let mask = mask_of(&t);
        let in_class: Vec<usize> = (0..frames.len()).filter(|&i| class.contains(&frames[i])).collect();
        let failure = in_class.iter().find(|&&i| !theory_holds(mask, i));
        class_soundness.push(ClassSoundness {
            theory: t.name,
            class,
            frames_checked: in_class.len(),
            pass: failure.is_none(),
            failure: failure.map(|&i| FrameWitness::from(&frames[i])),
        });
    }

    let mut axioms_on_classes = Vec::new();
    for (name, class) in [
        (".3", FrameClass::LinearPreorder),
        (".3", FrameClass::PreLattice),
        (".2", FrameClass::DirectedPreorder),
    ] {
        let k = catalog.iter().position(|c| c.name == name).expect("catalog axiom");
        let refuting = frames
            .iter()
            .zip(&valid)
            .find(|(fr, v)| class.contains(fr) && *v & (1 << k) == 0);
        axioms_on_classes.push(AxiomOnClass {
            axiom: catalog[k].name,
            class,
            valid_everywhere: refuting.is_none(),
            refuting_frame: refuting.map(|(fr, _)| FrameWitness::from(fr)),
        });
    }

    Ok(InclusionReport {
        max_worlds,
        frames_checked: frames.len(),
        class_inclusions,
        edges,
        class_soundness,
        axioms_on_classes,
    })
}
