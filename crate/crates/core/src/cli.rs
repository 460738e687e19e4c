//! Command-line front end. Reports go to standard output as JSON (default)
//! or as a flat text table; diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boolean::{
    self, BValuedStructure, BValuedStructureJson, ClassicalStructure, ClassicalStructureJson,
    FOFormula, FiniteBooleanAlgebra, MaximalAntichain, Poset, PosetJson, Ultrafilter, UltrapowerMode,
};
use crate::forcing::{self, Statement, ToyMultiverse};
use crate::geology::{self, LabeledMultiverse, MultiverseAxiom, MultiverseGraph, MultiverseJson, WorldId};
use crate::kripke::{FrameClass, KripkeModel};
use crate::limits::Limits;
use crate::syntax::{parse_formula, subformulas, Formula};
use crate::theories::{self, DecideOptions, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "multiverse-kit", version, about = "Finite-scale toolkit for the modal logic of forcing")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Group,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Modal formulas, theories and frame classes.
    #[command(subcommand)]
    Modal(ModalCmd),
    /// The buttons-and-switches multiverse.
    #[command(subcommand)]
    Mv(MvCmd),
    /// Boolean-valued structures.
    #[command(subcommand)]
    Bvm(BvmCmd),
    /// Geology of multiverse graphs.
    #[command(subcommand)]
    Geo(GeoCmd),
}

fn theory_name(s: &str) -> Result<String, String> {
    theories::theory(s).map(|t| t.name.to_string()).map_err(|e| e.to_string())
}

fn formula_arg(s: &str) -> Result<Formula, String> {
    parse_formula(s).map_err(|e| e.to_string())
}

fn fo_formula_arg(s: &str) -> Result<FOFormula, String> {
    boolean::parse_fo_formula(s).map_err(|e| e.to_string())
}

fn frame_class_arg(s: &str) -> Result<FrameClass, String> {
    s.parse::<FrameClass>().map_err(|e| e.to_string())
}

fn axiom_arg(s: &str) -> Result<MultiverseAxiom, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expectation {
    Valid,
    Refuted,
}

#[derive(Debug, Subcommand)]
pub enum ModalCmd {
    /// Parse and normalize a formula.
    Parse {
        #[arg(long, value_parser = formula_arg)]
        formula: Formula,
    },
    /// Decide a formula in a theory by bounded countermodel search.
    Decide {
        #[arg(long, value_parser = theory_name)]
        theory: String,
        #[arg(long, value_parser = formula_arg)]
        formula: Formula,
        /// Largest frame size searched.
        #[arg(long, default_value_t = 4)]
        bound: usize,
        /// Exit 1 unless the verdict matches.
        #[arg(long, value_enum)]
        expect: Option<Expectation>,
        /// Report "unknown" when the search bound is not known to be complete.
        #[arg(long)]
        strict: bool,
    },
    /// Least countermodel in a frame class.
    Countermodel {
        #[arg(long, value_parser = frame_class_arg)]
        class: FrameClass,
        #[arg(long, value_parser = formula_arg)]
        formula: Formula,
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
    },
    /// Check frame-class inclusions and the theory diagram.
    Inclusions {
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
    },
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long, default_value_t = 2)]
    pub buttons: usize,
    #[arg(long, default_value_t = 2)]
    pub switches: usize,
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Kripke model JSON; the toy multiverse is used when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub toy: ToyArgs,
    /// Reference state or world.
    #[arg(long, default_value_t = 0)]
    pub state: usize,
}

#[derive(Debug, Subcommand)]
pub enum MvCmd {
    /// Build the toy multiverse as a Kripke model.
    Build {
        #[command(flatten)]
        toy: ToyArgs,
    },
    /// Classify one statement as button, switch or negated button.
    Classify {
        #[command(flatten)]
        source: ModelSource,
        /// Statement as a formula over the model's atoms.
        #[arg(long, value_parser = formula_arg, conflicts_with = "states", required_unless_present = "states")]
        statement: Option<Formula>,
        /// Statement as a comma-separated list of states.
        #[arg(long, value_delimiter = ',')]
        states: Option<Vec<usize>>,
    },
    /// Classify every statement at a state.
    Trichotomy {
        #[command(flatten)]
        source: ModelSource,
    },
    /// Check independence of buttons and switches.
    Independence {
        #[command(flatten)]
        source: ModelSource,
        /// Button atoms (defaults to the toy multiverse's).
        #[arg(long, value_delimiter = ',')]
        button_atoms: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        switch_atoms: Option<Vec<String>>,
    },
    /// Check <>[]st -> []st for every statement at a state.
    Maximality {
        #[command(flatten)]
        source: ModelSource,
    },
    /// Translate a Kripke model into the toy multiverse and verify it.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        world: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        switches: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum BvmCmd {
    /// Boolean value of a formula.
    Value {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_parser = fo_formula_arg)]
        formula: FOFormula,
        /// Variable bindings such as x=t1,y=t2.
        #[arg(long, value_delimiter = ',')]
        env: Vec<String>,
    },
    /// Check the equality axioms.
    Equality {
        #[arg(long)]
        structure: PathBuf,
    },
    /// Check that existential formulas have witnessing names.
    Full {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long = "formula", value_parser = fo_formula_arg, required = true)]
        formulas: Vec<FOFormula>,
        #[arg(long, value_delimiter = ',')]
        env: Vec<String>,
    },
    /// Quotient by the ultrafilter at an atom.
    Quotient {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        atom: usize,
    },
    /// Compare quotient truth with Boolean values.
    Los {
        #[arg(long)]
        structure: PathBuf,
        /// Formulas to check; defaults to the depth-2 family in x, y.
        #[arg(long = "formula", value_parser = fo_formula_arg)]
        formulas: Vec<FOFormula>,
        /// Ultrafilter atoms; defaults to all.
        #[arg(long = "atom")]
        atoms: Vec<usize>,
    },
    /// Boolean ultrapower of a classical structure.
    Ultrapower {
        #[arg(long)]
        base: PathBuf,
        /// Atom count of the algebra.
        #[arg(long)]
        atoms: usize,
        #[arg(long)]
        atom: usize,
        #[arg(long, value_enum, default_value = "quotient")]
        mode: UltrapowerModeArg,
        /// Antichain family JSON: a list of antichains, each a list of
        /// elements given as atom lists.
        #[arg(long)]
        antichains: Option<PathBuf>,
    },
    /// Generic filter through a list of dense sets.
    Generic {
        #[arg(long)]
        poset: PathBuf,
        /// JSON list of dense sets, each a list of condition names.
        #[arg(long)]
        dense: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UltrapowerModeArg {
    Quotient,
    AntichainLimit,
}

#[derive(Debug, Args)]
pub struct GraphWorld {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub world: WorldId,
}

#[derive(Debug, Subcommand)]
pub enum GeoCmd {
    /// Grounds, bedrocks, ground axiom and mantle of a world.
    Analyze {
        #[command(flatten)]
        at: GraphWorld,
    },
    /// Downward directedness of the grounds of a world.
    Ddg {
        #[command(flatten)]
        at: GraphWorld,
    },
    /// Generic multiverse and generic mantle of a world.
    Multiverse {
        #[command(flatten)]
        at: GraphWorld,
    },
    /// Iterated mantles down to the outer core.
    InnerMantles {
        #[command(flatten)]
        at: GraphWorld,
        #[arg(long, default_value_t = 16)]
        max_iter: usize,
    },
    /// Multiverse axioms on a labeled graph.
    Axioms {
        #[arg(long)]
        graph: PathBuf,
        /// Axioms to check; defaults to all.
        #[arg(long, value_delimiter = ',', value_parser = axiom_arg)]
        axioms: Vec<MultiverseAxiom>,
    },
}

/// Each subcommand and the library operation it runs.
pub const DISPATCH: &[(&str, &str)] = &[
    ("modal parse", "syntax::parse_formula"),
    ("modal decide", "theories::decide"),
    ("modal countermodel", "theories::find_countermodel"),
    ("modal inclusions", "theories::verify_frame_inclusions"),
    ("mv build", "forcing::make_multiverse"),
    ("mv classify", "forcing::classify_statement"),
    ("mv trichotomy", "forcing::check_trichotomy"),
    ("mv independence", "forcing::check_independence"),
    ("mv maximality", "forcing::check_maximality"),
    ("mv simulate", "forcing::simulate_kripke_model"),
    ("bvm value", "boolean::boolean_value"),
    ("bvm equality", "boolean::check_equality_axioms"),
    ("bvm full", "boolean::is_full"),
    ("bvm quotient", "boolean::quotient_by_ultrafilter"),
    ("bvm los", "boolean::verify_los"),
    ("bvm ultrapower", "boolean::boolean_ultrapower"),
    ("bvm generic", "boolean::build_generic_filter"),
    ("geo analyze", "geology::analyze_world"),
    ("geo ddg", "geology::check_ddg"),
    ("geo multiverse", "geology::generic_multiverse"),
    ("geo inner-mantles", "geology::inner_mantles"),
    ("geo axioms", "geology::check_multiverse_axioms"),
];

/// An input or resource error, reported with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<(Value, bool), InputError>;

fn report<T: Serialize>(value: &T, ok: bool) -> Outcome {
    Ok((serde_json::to_value(value)?, ok))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn parse_env(s: &BValuedStructure, bindings: &[String]) -> Result<boolean::Env, InputError> {
    bindings
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| {
            let (v, n) = b
                .split_once('=')
                .ok_or_else(|| InputError(format!("binding {b:?} is not of the form var=name")))?;
            Ok((v.trim().to_string(), s.name_index(n.trim())?))
        })
        .collect()
}

fn load_structure(path: &Path) -> Result<BValuedStructure, InputError> {
    let j: BValuedStructureJson = read_json(path)?;
    Ok(BValuedStructure::try_from(j)?)
}

fn load_graph(path: &Path) -> Result<MultiverseJson, InputError> {
    read_json(path)
}

enum Source {
    Toy(ToyMultiverse),
    Model(KripkeModel),
}

impl Source {
    fn load(s: &ModelSource, limits: &Limits) -> Result<Source, InputError> {
        match &s.model {
            Some(path) => Ok(Source::Model(read_json(path)?)),
            None => Ok(Source::Toy(forcing::make_multiverse(s.toy.buttons, s.toy.switches, limits)?)),
        }
    }

    fn model(&self) -> &KripkeModel {
        match self {
            Source::Toy(mv) => mv.model(),
            Source::Model(m) => m,
        }
    }
}

fn modal(cmd: &ModalCmd, limits: &Limits) -> Outcome {
    match cmd {
        ModalCmd::Parse { formula } => report(
            &json!({
                "formula": formula,
                "variables": formula.variables(),
                "modal_depth": formula.modal_depth(),
                "subformulas": subformulas(formula).len(),
            }),
            true,
        ),
        ModalCmd::Decide {
            theory,
            formula,
            bound,
            expect,
            strict,
        } => {
            let t = theories::theory(theory)?;
            let options = DecideOptions {
                unknown_when_incomplete: *strict,
            };
            let verdict = theories::decide(&t, formula, *bound, options, limits)?;
            let ok = match expect {
                None => true,
                Some(Expectation::Valid) => matches!(verdict, Verdict::Valid { .. }),
                Some(Expectation::Refuted) => verdict.is_refuted(),
            };
            report(&verdict, ok)
        }
        ModalCmd::Countermodel {
            class,
            formula,
            max_worlds,
        } => {
            let found = theories::find_countermodel(*class, formula, *max_worlds, limits)?;
            let value = match found {
                Some((model, world)) => json!({"found": true, "model": model, "world": world}),
                None => json!({"found": false, "max_worlds": max_worlds}),
            };
            report(&value, true)
        }
        ModalCmd::Inclusions { max_worlds } => {
            let r = theories::verify_frame_inclusions(*max_worlds, limits)?;
            let ok = r.all_pass();
            report(&r, ok)
        }
    }
}

fn mv(cmd: &MvCmd, limits: &Limits) -> Outcome {
    match cmd {
        MvCmd::Build { toy } => {
            let mv = forcing::make_multiverse(toy.buttons, toy.switches, limits)?;
            report(
                &json!({
                    "buttons": mv.buttons(),
                    "switches": mv.switches(),
                    "states": mv.state_count(),
                    "model": mv.model(),
                }),
                true,
            )
        }
        MvCmd::Classify {
            source,
            statement,
            states,
        } => {
            let src = Source::load(source, limits)?;
            let st = match (statement, states) {
                (Some(f), _) => Statement::Formula(f.clone()),
                (None, Some(s)) => Statement::States(s.clone()),
                (None, None) => return Err(InputError("a statement is required".into())),
            };
            let model = src.model();
            if source.state >= model.world_count() {
                return Err(InputError(format!("state {} out of range", source.state)));
            }
            let truth = st.truth_set(model)?;
            let c = forcing::classify_set(model, &truth, source.state);
            report(&c, true)
        }
        MvCmd::Trichotomy { source } => {
            let src = Source::load(source, limits)?;
            let r = forcing::check_trichotomy(src.model(), source.state, limits)?;
            let ok = r.unlabeled == 0;
            report(&r, ok)
        }
        MvCmd::Independence {
            source,
            button_atoms,
            switch_atoms,
        } => {
            let src = Source::load(source, limits)?;
            let (default_b, default_s) = match &src {
                Source::Toy(mv) => (mv.button_atoms(), mv.switch_atoms()),
                Source::Model(_) => (Vec::new(), Vec::new()),
            };
            let b = button_atoms.clone().unwrap_or(default_b);
            let s = switch_atoms.clone().unwrap_or(default_s);
            let r = forcing::check_independence(src.model(), &b, &s, source.state)?;
            let ok = r.independent;
            report(&r, ok)
        }
        MvCmd::Maximality { source } => {
            let src = Source::load(source, limits)?;
            let all = forcing::all_statements(src.model(), limits)?;
            let r = forcing::check_maximality(src.model(), source.state, &all)?;
            let ok = r.holds;
            report(&r, ok)
        }
        MvCmd::Simulate {
            model,
            world,
            depth,
            switches,
        } => {
            let m: KripkeModel = read_json(model)?;
            let (t, r) = forcing::simulate_kripke_model(&m, *world, *depth, *switches, limits)?;
            let ok = r.agreement;
            report(&json!({"translation": t, "report": r}), ok)
        }
    }
}

fn bvm(cmd: &BvmCmd) -> Outcome {
    match cmd {
        BvmCmd::Value { structure, formula, env } => {
            let s = load_structure(structure)?;
            let env = parse_env(&s, env)?;
            let v = boolean::boolean_value(&s, formula, &env)?;
            report(&json!({"formula": formula, "value": s.algebra.atoms_of(v)}), true)
        }
        BvmCmd::Equality { structure } => {
            let s = load_structure(structure)?;
            let r = boolean::check_equality_axioms(&s);
            let ok = r.pass;
            report(&r, ok)
        }
        BvmCmd::Full { structure, formulas, env } => {
            let s = load_structure(structure)?;
            let env = parse_env(&s, env)?;
            let r = boolean::is_full(&s, formulas, &env)?;
            let ok = r.full;
            report(&r, ok)
        }
        BvmCmd::Quotient { structure, atom } => {
            let s = load_structure(structure)?;
            let u = Ultrafilter::principal(&s.algebra, *atom)?;
            let q = boolean::quotient_by_ultrafilter(&s, &u)?;
            let mut classes = vec![Vec::new(); q.structure.len()];
            for (i, &c) in q.class_of.iter().enumerate() {
                classes[c].push(s.names[i].clone());
            }
            report(
                &json!({
                    "classes": classes,
                    "structure": ClassicalStructureJson::from(&q.structure),
                }),
                true,
            )
        }
        BvmCmd::Los { structure, formulas, atoms } => {
            let s = load_structure(structure)?;
            let us = if atoms.is_empty() {
                s.algebra.ultrafilters()
            } else {
                atoms
                    .iter()
                    .map(|&a| Ultrafilter::principal(&s.algebra, a))
                    .collect::<Result<_, _>>()?
            };
            let fs = if formulas.is_empty() {
                let rels: Vec<(String, usize)> =
                    s.relations.iter().map(|(r, rel)| (r.clone(), rel.arity)).collect();
                boolean::los_formula_family(&rels)
            } else {
                formulas.clone()
            };
            let r = boolean::verify_los(&s, &us, &fs)?;
            let ok = r.counterexample.is_none();
            report(&r, ok)
        }
        BvmCmd::Ultrapower {
            base,
            atoms,
            atom,
            mode,
            antichains,
        } => {
            let j: ClassicalStructureJson = read_json(base)?;
            let v0 = ClassicalStructure::try_from(j)?;
            let alg = FiniteBooleanAlgebra::new(*atoms)?;
            let u = Ultrafilter::principal(&alg, *atom)?;
            let mode = match mode {
                UltrapowerModeArg::Quotient => UltrapowerMode::Quotient,
                UltrapowerModeArg::AntichainLimit => {
                    let family = match antichains {
                        Some(path) => {
                            let raw: Vec<Vec<Vec<usize>>> = read_json(path)?;
                            raw.iter()
                                .map(|a| {
                                    let elements = a
                                        .iter()
                                        .map(|e| alg.element_from_atoms(e))
                                        .collect::<Result<Vec<_>, _>>()?;
                                    MaximalAntichain::new(&alg, elements)
                                })
                                .collect::<Result<Vec<_>, _>>()?
                        }
                        None => vec![MaximalAntichain::trivial(&alg), MaximalAntichain::atoms(&alg)],
                    };
                    UltrapowerMode::AntichainLimit(family)
                }
            };
            let r = boolean::boolean_ultrapower(&v0, &alg, &u, &mode)?;
            report(
                &json!({
                    "structure": ClassicalStructureJson::from(&r.structure),
                    "embedding": r.embedding,
                    "names": r.names,
                    "stages": r.stages,
                    "isomorphic_to_base": true,
                }),
                true,
            )
        }
        BvmCmd::Generic { poset, dense } => {
            let j: PosetJson = read_json(poset)?;
            let p = Poset::try_from(j)?;
            let sets: Vec<Vec<String>> = match dense {
                Some(path) => read_json(path)?,
                None => Vec::new(),
            };
            let sets = sets
                .iter()
                .map(|d| d.iter().map(|c| p.index(c)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let g = boolean::build_generic_filter(&p, &sets)?;
            report(&g, true)
        }
    }
}

fn geo(cmd: &GeoCmd) -> Outcome {
    let graph = |path: &Path| -> Result<MultiverseGraph, InputError> {
        Ok(MultiverseGraph::try_from(&load_graph(path)?)?)
    };
    match cmd {
        GeoCmd::Analyze { at } => report(&geology::analyze_world(&graph(&at.graph)?, at.world)?, true),
        GeoCmd::Ddg { at } => report(&geology::check_ddg(&graph(&at.graph)?, at.world)?, true),
        GeoCmd::Multiverse { at } => report(&geology::generic_multiverse(&graph(&at.graph)?, at.world)?, true),
        GeoCmd::InnerMantles { at, max_iter } => {
            report(&geology::inner_mantles(&graph(&at.graph)?, at.world, *max_iter)?, true)
        }
        GeoCmd::Axioms { graph: path, axioms } => {
            let lm = LabeledMultiverse::try_from(&load_graph(path)?)?;
            let axioms = if axioms.is_empty() {
                MultiverseAxiom::ALL.to_vec()
            } else {
                axioms.clone()
            };
            let r = geology::check_multiverse_axioms(&lm, &axioms)?;
            let ok = r.pass;
            report(&r, ok)
        }
    }
}

/// Run a parsed command, returning the report and whether its check passed.
pub fn execute(cli: &Cli, limits: &Limits) -> Outcome {
    match &cli.command {
        Group::Modal(c) => modal(c, limits),
        Group::Mv(c) => mv(c, limits),
        Group::Bvm(c) => bvm(c),
        Group::Geo(c) => geo(c),
    }
}

fn render_text(v: &Value, path: &str, out: &mut String) {
    let scalar = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                render_text(x, &p, out);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = xs.iter().map(scalar).collect();
            out.push_str(&format!("{path:<40} [{}]\n", items.join(", ")));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                render_text(x, &format!("{path}[{i}]"), out);
            }
        }
        other => out.push_str(&format!("{path:<40} {}\n", scalar(other))),
    }
}

pub fn format_report(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            render_text(v, "", &mut s);
            s
        }
    }
}

/// Parse `argv` (including the program name), run, and write the report.
/// Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write, limits: &Limits) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, limits) {
        Ok((value, ok)) => {
            let _ = write!(out, "{}", format_report(&value, cli.format));
            if ok {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Subcommand paths known to the argument parser.
pub fn subcommand_paths() -> Vec<String> {
    use clap::CommandFactory;
    let root = Cli::command();
    let mut out = Vec::new();
    for group in root.get_subcommands() {
        for leaf in group.get_subcommands() {
            out.push(format!("{} {}", group.get_name(), leaf.get_name()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("multiverse-kit").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err, &Limits::default());
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn dispatch_table_covers_every_subcommand_once() {
        let paths: BTreeSet<String> = subcommand_paths().into_iter().collect();
        let table: Vec<&str> = DISPATCH.iter().map(|(p, _)| *p).collect();
        let table_set: BTreeSet<String> = table.iter().map(|s| s.to_string()).collect();
        assert_eq!(table.len(), table_set.len(), "duplicate subcommand");
        assert_eq!(paths, table_set);
        let ops: BTreeSet<&str> = DISPATCH.iter().map(|(_, op)| *op).collect();
        assert_eq!(ops.len(), DISPATCH.len(), "operation reachable twice");
    }

    #[test]
    fn parse_examples() {
        let cli = Cli::try_parse_from([
            "mk", "modal", "decide", "--theory", "S4.2", "--formula", "<>[]p -> []<>p", "--bound", "4",
        ])
        .unwrap();
        assert!(matches!(cli.command, Group::Modal(ModalCmd::Decide { bound: 4, .. })));
        let cli = Cli::try_parse_from(["mk", "geo", "analyze", "--graph", "g.json", "--world", "0"]).unwrap();
        assert!(matches!(cli.command, Group::Geo(GeoCmd::Analyze { .. })));
        let (code, _, err) = run_args(&["modal", "decide", "--theory", "S9"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("S9"));
        let (code, _, _) = run_args(&["modal", "parse", "--formula", "p", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn decide_verdicts_and_exit_codes() {
        let (code, out, _) = run_args(&["modal", "decide", "--theory", "S4.2", "--formula", "<>[]p -> []<>p"]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "valid");

        let (code, out, _) = run_args(&["modal", "decide", "--theory", "S4.2", "--formula", "<>[]p -> p"]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "refuted");
        assert_eq!(v["model"]["worlds"], 2);

        let (code, _, _) = run_args(&[
            "modal", "decide", "--theory", "S4.2", "--formula", "<>[]p -> p", "--expect", "valid",
        ]);
        assert_eq!(code, EXIT_CHECK_FAILED);
    }

    #[test]
    fn help_and_text_output() {
        let (code, out, _) = run_args(&["mv", "trichotomy", "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("--buttons"));
        let (code, out, _) = run_args(&["--format", "text", "mv", "build", "--buttons", "1", "--switches", "0"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("states"));
        assert!(!out.contains('{'));
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let (code, _, err) = run_args(&["geo", "ddg", "--graph", "/nonexistent.json", "--world", "0"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("nonexistent"));
    }

    #[test]
    fn output_is_deterministic() {
        let args = ["mv", "trichotomy", "--buttons", "1", "--switches", "1"];
        assert_eq!(run_args(&args), run_args(&args));
    }
}
