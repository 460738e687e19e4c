use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use multiverse_kit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    mk_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = mk_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn formula_round_trip_and_errors() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mk_formula_parse(c("<>[]p -> []<>p").as_ptr(), &mut f), MkStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(mk_formula_render(f, &mut s), MkStatus::Ok);
        assert_eq!(take(s), "(<>([](p))) -> ([](<>(p)))");
        let mut d = 0usize;
        assert_eq!(mk_formula_modal_depth(f, &mut d), MkStatus::Ok);
        assert_eq!(d, 2);
        mk_formula_free(f);

        let mut g = ptr::null_mut();
        assert_eq!(mk_formula_parse(c("p &").as_ptr(), &mut g), MkStatus::ParseError);
        assert!(g.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(mk_formula_parse(ptr::null(), &mut g), MkStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(mk_formula_parse(bad.as_ptr().cast(), &mut g), MkStatus::InvalidUtf8);
        assert_eq!(mk_formula_render(ptr::null(), &mut s), MkStatus::NullPointer);
        mk_formula_free(ptr::null_mut());
        mk_string_free(ptr::null_mut());
    }
}

#[test]
fn decide_and_eval() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mk_formula_parse(c("<>p -> []<>p").as_ptr(), &mut f), MkStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(mk_decide(c("S4.2").as_ptr(), f, 4, &mut out), MkStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["verdict"], "refuted");
        let world = v["world"].as_u64().unwrap() as usize;

        let model_json = c(&v["model"].to_string());
        let mut m = ptr::null_mut();
        assert_eq!(mk_model_from_json(model_json.as_ptr(), &mut m), MkStatus::Ok);
        let mut truth = true;
        assert_eq!(mk_model_eval(m, world, f, &mut truth), MkStatus::Ok);
        assert!(!truth);
        assert_eq!(mk_model_eval(m, 99, f, &mut truth), MkStatus::InvalidInput);
        let mut back = ptr::null_mut();
        assert_eq!(mk_model_to_json(m, &mut back), MkStatus::Ok);
        let back: serde_json::Value = serde_json::from_str(&take(back)).unwrap();
        assert_eq!(back, v["model"]);
        mk_model_free(m);

        assert_eq!(mk_decide(c("S9").as_ptr(), f, 4, &mut out), MkStatus::InvalidInput);
        assert!(last_error().contains("S9"));
        mk_formula_free(f);
    }
}

#[test]
fn multiverse_handles() {
    unsafe {
        let mut mv = ptr::null_mut();
        assert_eq!(mk_multiverse_new(2, 2, &mut mv), MkStatus::Ok);
        let mut n = 0;
        assert_eq!(mk_multiverse_state_count(mv, &mut n), MkStatus::Ok);
        assert_eq!(n, 16);
        let mut out = ptr::null_mut();
        assert_eq!(mk_multiverse_trichotomy(mv, 0, &mut out), MkStatus::Ok);
        let r: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(r["unlabeled"], 0);
        mk_multiverse_free(mv);

        let mut big = ptr::null_mut();
        assert_eq!(mk_multiverse_new(40, 40, &mut big), MkStatus::ResourceLimit);
    }
}

#[test]
fn structures_and_graphs() {
    unsafe {
        let json = c(r#"{"atoms":2,"names":["s","t"],"eq":{"s,t":[1]},
            "relations":{"R":{"arity":1,"values":{"s":[0,1],"t":[1]}}}}"#);
        let mut s = ptr::null_mut();
        assert_eq!(mk_structure_from_json(json.as_ptr(), &mut s), MkStatus::Ok);
        let mut v = 0u64;
        assert_eq!(mk_structure_value(s, c("forall x. R(x)").as_ptr(), &mut v), MkStatus::Ok);
        assert_eq!(v, 0b10);
        assert_eq!(mk_structure_value(s, c("R(x)").as_ptr(), &mut v), MkStatus::InvalidInput);
        assert_eq!(mk_structure_value(s, c("R(").as_ptr(), &mut v), MkStatus::ParseError);
        let mut out = ptr::null_mut();
        assert_eq!(mk_structure_check_equality(s, &mut out), MkStatus::Ok);
        assert!(take(out).contains("\"pass\":true"));
        mk_structure_free(s);

        let g = c(r#"{"worlds":[{"id":0,"content":["a"]},{"id":1,"content":["a","b"]}],"ground":[[0,1]]}"#);
        let mut h = ptr::null_mut();
        assert_eq!(mk_graph_from_json(g.as_ptr(), &mut h), MkStatus::Ok);
        assert_eq!(mk_graph_analyze(h, 1, &mut out), MkStatus::Ok);
        let a: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(a["bedrocks"], serde_json::json!([0]));
        assert_eq!(mk_graph_analyze(h, 7, &mut out), MkStatus::InvalidInput);
        mk_graph_free(h);

        let cyclic = c(r#"{"worlds":[{"id":0,"content":[]},{"id":1,"content":[]}],"ground":[[0,1],[1,0]]}"#);
        assert_eq!(mk_graph_from_json(cyclic.as_ptr(), &mut h), MkStatus::InvalidInput);
    }
}

#[test]
fn errors_are_thread_local() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mk_formula_parse(c("(").as_ptr(), &mut f), MkStatus::ParseError);
        let here = last_error();
        std::thread::spawn(|| assert!(mk_last_error().is_null())).join().unwrap();
        assert_eq!(last_error(), here);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/multiverse_kit.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["mk_formula_parse", "mk_decide", "mk_graph_analyze", "MK_STATUS_RESOURCE_LIMIT"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(status.success());
}
