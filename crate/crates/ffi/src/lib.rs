//! C ABI over `multiverse-kit`.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `mk_*_new`/`mk_*_parse`/`mk_*_from_json` function and released by the
//! matching `mk_*_free`. Functions return an [`MkStatus`]; on failure the
//! message is available from [`mk_last_error`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and released with
//! [`mk_string_free`]. Reports are JSON documents.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use multiverse_kit::boolean::{self, BValuedStructure, BValuedStructureJson, BvmError};
use multiverse_kit::forcing::{self, ForcingError, ToyMultiverse};
use multiverse_kit::geology::{self, GeologyError, MultiverseGraph, MultiverseJson};
use multiverse_kit::kripke::KripkeError;
use multiverse_kit::theories::{self, DecideOptions, TheoryError};
use multiverse_kit::{eval, parse_formula, render_formula, Formula, KripkeModel, Limits};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInput = 4,
    ResourceLimit = 5,
    Panic = 6,
}

/// Parsed modal formula.
pub struct MkFormula(Formula);
/// Kripke model.
pub struct MkModel(KripkeModel);
/// Buttons-and-switches multiverse.
pub struct MkMultiverse(ToyMultiverse);
/// Boolean-valued structure.
pub struct MkStructure(BValuedStructure);
/// Multiverse graph for geology queries.
pub struct MkGraph(MultiverseGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(MkStatus, String);

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure(MkStatus::InvalidInput, e.to_string())
    }
}

impl From<KripkeError> for Failure {
    fn from(e: KripkeError) -> Self {
        let status = match e {
            KripkeError::TooManyWorlds(_) | KripkeError::ResourceBound { .. } | KripkeError::CapExceeded { .. } => {
                MkStatus::ResourceLimit
            }
            _ => MkStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<TheoryError> for Failure {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Kripke(k) => k.into(),
            other => Failure::input(other),
        }
    }
}

impl From<ForcingError> for Failure {
    fn from(e: ForcingError) -> Self {
        match e {
            ForcingError::Kripke(k) => k.into(),
            ForcingError::CapExceeded { .. } | ForcingError::ClusterTooLarge { .. } => {
                Failure(MkStatus::ResourceLimit, e.to_string())
            }
            other => Failure::input(other),
        }
    }
}

impl From<BvmError> for Failure {
    fn from(e: BvmError) -> Self {
        match e {
            BvmError::CapExceeded { .. } => Failure(MkStatus::ResourceLimit, e.to_string()),
            BvmError::Parse(_) => Failure(MkStatus::ParseError, e.to_string()),
            other => Failure::input(other),
        }
    }
}

impl From<GeologyError> for Failure {
    fn from(e: GeologyError) -> Self {
        Failure::input(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(MkStatus::ParseError, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MkStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(MkStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(MkStatus::NullPointer, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(MkStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(Failure::input)?;
    put(out, c.into_raw())
}

unsafe fn put_json<T: serde::Serialize>(out: *mut *mut c_char, value: &T) -> Result<(), Failure> {
    put_string(out, serde_json::to_string(value)?)
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `src` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_formula_parse(src: *const c_char, out: *mut *mut MkFormula) -> MkStatus {
    guard(|| {
        let f = parse_formula(str_arg(src)?).map_err(|e| Failure(MkStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(MkFormula(f))))
    })
}

/// Canonical text of a formula.
///
/// # Safety
/// `f` must be a live formula handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_formula_render(f: *const MkFormula, out: *mut *mut c_char) -> MkStatus {
    guard(|| put_string(out, render_formula(&handle(f)?.0)))
}

/// # Safety
/// `f` must be a live formula handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_formula_modal_depth(f: *const MkFormula, out: *mut usize) -> MkStatus {
    guard(|| put(out, handle(f)?.0.modal_depth()))
}

/// # Safety
/// `f` must be null or a handle from `mk_formula_parse`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mk_formula_free(f: *mut MkFormula) {
    free_handle(f)
}

/// Model from `{"worlds": n, "edges": [[u, v], ...], "valuation": {...}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_model_from_json(json: *const c_char, out: *mut *mut MkModel) -> MkStatus {
    guard(|| {
        let m: KripkeModel = serde_json::from_str(str_arg(json)?)?;
        put(out, Box::into_raw(Box::new(MkModel(m))))
    })
}

/// # Safety
/// `m` must be a live model handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_model_to_json(m: *const MkModel, out: *mut *mut c_char) -> MkStatus {
    guard(|| put_json(out, &handle(m)?.0))
}

/// Truth of `f` at world `w`.
///
/// # Safety
/// `m` and `f` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_model_eval(
    m: *const MkModel,
    w: usize,
    f: *const MkFormula,
    out: *mut bool,
) -> MkStatus {
    guard(|| {
        let v = eval(&handle(m)?.0, w, &handle(f)?.0)?;
        put(out, v)
    })
}

/// # Safety
/// `m` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn mk_model_free(m: *mut MkModel) {
    free_handle(m)
}

/// Decide `f` in the named theory; writes the verdict as JSON.
///
/// # Safety
/// `theory` must be a NUL-terminated string, `f` a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_decide(
    theory: *const c_char,
    f: *const MkFormula,
    bound: usize,
    out: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let t = theories::theory(str_arg(theory)?)?;
        let v = theories::decide(&t, &handle(f)?.0, bound, DecideOptions::default(), &Limits::from_env())?;
        put_json(out, &v)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_multiverse_new(buttons: usize, switches: usize, out: *mut *mut MkMultiverse) -> MkStatus {
    guard(|| {
        let mv = forcing::make_multiverse(buttons, switches, &Limits::from_env())?;
        put(out, Box::into_raw(Box::new(MkMultiverse(mv))))
    })
}

/// # Safety
/// `mv` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_multiverse_state_count(mv: *const MkMultiverse, out: *mut usize) -> MkStatus {
    guard(|| put(out, handle(mv)?.0.state_count()))
}

/// Trichotomy report at `state` as JSON.
///
/// # Safety
/// `mv` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_multiverse_trichotomy(
    mv: *const MkMultiverse,
    state: usize,
    out: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let r = forcing::check_trichotomy(handle(mv)?.0.model(), state, &Limits::from_env())?;
        put_json(out, &r)
    })
}

/// # Safety
/// `mv` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mk_multiverse_free(mv: *mut MkMultiverse) {
    free_handle(mv)
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_structure_from_json(json: *const c_char, out: *mut *mut MkStructure) -> MkStatus {
    guard(|| {
        let j: BValuedStructureJson = serde_json::from_str(str_arg(json)?)?;
        let s = BValuedStructure::try_from(j)?;
        put(out, Box::into_raw(Box::new(MkStructure(s))))
    })
}

/// Boolean value of a sentence, as a bit mask over the atoms.
///
/// # Safety
/// `s` must be a live handle, `formula` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mk_structure_value(s: *const MkStructure, formula: *const c_char, out: *mut u64) -> MkStatus {
    guard(|| {
        let s = &handle(s)?.0;
        let f = boolean::parse_fo_formula(str_arg(formula)?).map_err(|e| Failure(MkStatus::ParseError, e.to_string()))?;
        let v = boolean::boolean_value(s, &f, &boolean::Env::new())?;
        put(out, v)
    })
}

/// Equality-axiom report as JSON.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_structure_check_equality(s: *const MkStructure, out: *mut *mut c_char) -> MkStatus {
    guard(|| put_json(out, &boolean::check_equality_axioms(&handle(s)?.0)))
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mk_structure_free(s: *mut MkStructure) {
    free_handle(s)
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_graph_from_json(json: *const c_char, out: *mut *mut MkGraph) -> MkStatus {
    guard(|| {
        let j: MultiverseJson = serde_json::from_str(str_arg(json)?)?;
        let g = MultiverseGraph::try_from(&j)?;
        put(out, Box::into_raw(Box::new(MkGraph(g))))
    })
}

/// Grounds, bedrocks, ground axiom and mantle of `world` as JSON.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mk_graph_analyze(g: *const MkGraph, world: u64, out: *mut *mut c_char) -> MkStatus {
    guard(|| put_json(out, &geology::analyze_world(&handle(g)?.0, world)?))
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mk_graph_free(g: *mut MkGraph) {
    free_handle(g)
}
