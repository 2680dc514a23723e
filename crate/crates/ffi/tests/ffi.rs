use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sdatlas::catalog::{save_snapshot, Catalog, CatalogDocument};
use sdatlas::narrative::{from_structured, StructuredDiagram};
use sdatlas_ffi::*;

fn population() -> Vec<u8> {
    std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/corpus/population.xmile")).unwrap()
}

fn parse(bytes: &[u8]) -> *mut SdModel {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { sdatlas_model_parse_xmile(bytes.as_ptr(), bytes.len(), &mut model) }, SdStatus::Ok);
    model
}

/// Takes ownership of a library string.
fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let owned = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { sdatlas_string_free(s) };
    owned
}

fn last_error() -> Option<String> {
    let p = sdatlas_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn model_outputs() {
    let model = parse(&population());
    assert_eq!(unsafe { sdatlas_model_variable_count(model) }, 5);
    let mut out = ptr::null_mut();

    assert_eq!(unsafe { sdatlas_model_loops_json(model, -1, &mut out) }, SdStatus::Ok);
    let loops: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(loops["truncated"], false);
    assert_eq!(loops["loops"].as_array().unwrap().len(), 2);

    assert_eq!(unsafe { sdatlas_model_loops_json(model, 1, &mut out) }, SdStatus::Ok);
    let bounded: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(bounded["truncated"], true);
    assert!(bounded["loops"].as_array().unwrap().is_empty());

    assert_eq!(unsafe { sdatlas_model_structured_json(model, &mut out) }, SdStatus::Ok);
    let diagram: StructuredDiagram = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(diagram.links.len(), 6);
    assert!(from_structured(&diagram).unwrap().warnings.is_empty());

    assert_eq!(unsafe { sdatlas_model_narrative(model, &mut out) }, SdStatus::Ok);
    assert!(take(out).starts_with("Overview\n"));

    assert_eq!(unsafe { sdatlas_model_layout_json(model, 7, &mut out) }, SdStatus::Ok);
    let first = take(out);
    assert_eq!(unsafe { sdatlas_model_layout_json(model, 7, &mut out) }, SdStatus::Ok);
    assert_eq!(first, take(out));

    assert_eq!(unsafe { sdatlas_model_serialize_xmile(model, &mut out) }, SdStatus::Ok);
    let written = take(out);
    let again = parse(written.as_bytes());
    assert_eq!(unsafe { sdatlas_model_variable_count(again) }, 5);

    assert_eq!(unsafe { sdatlas_model_diagnostics_json(model, &mut out) }, SdStatus::Ok);
    assert_eq!(take(out), "[]");
    unsafe {
        sdatlas_model_free(again);
        sdatlas_model_free(model);
    }
}

#[test]
fn errors_are_reported() {
    let mut model = ptr::null_mut();
    let bad = b"<xmile><model>";
    assert_eq!(unsafe { sdatlas_model_parse_xmile(bad.as_ptr(), bad.len(), &mut model) }, SdStatus::ParseError);
    assert!(model.is_null());
    assert!(last_error().unwrap().starts_with("malformed_xml"));

    assert_eq!(unsafe { sdatlas_model_parse_xmile(ptr::null(), 0, &mut model) }, SdStatus::NullArgument);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sdatlas_model_narrative(ptr::null(), &mut out) }, SdStatus::NullArgument);
    assert_eq!(last_error().as_deref(), Some("model is null"));

    let model = parse(&population());
    assert_eq!(unsafe { sdatlas_model_narrative(model, ptr::null_mut()) }, SdStatus::NullArgument);
    assert_eq!(unsafe { sdatlas_model_narrative(model, &mut out) }, SdStatus::Ok);
    assert!(last_error().is_none());
    take(out);
    unsafe {
        sdatlas_model_free(model);
        sdatlas_model_free(ptr::null_mut());
        sdatlas_string_free(ptr::null_mut());
    }

    let mut catalog = ptr::null_mut();
    let missing = CString::new("/definitely/not/here").unwrap();
    assert_eq!(unsafe { sdatlas_catalog_load(missing.as_ptr(), &mut catalog) }, SdStatus::CatalogError);
    assert!(catalog.is_null());
}

#[test]
fn catalog_round_trip() {
    let mut catalog = Catalog::new();
    let mut doc = CatalogDocument::new("d1", "Malaria transmission dynamics");
    doc.sdg_labels = sdatlas::catalog::classify_sdg("malaria");
    catalog.index_document(doc).unwrap();
    catalog.index_document(CatalogDocument::new("d2", "Urban traffic congestion")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_snapshot(&catalog, dir.path()).unwrap();

    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { sdatlas_catalog_load(path.as_ptr(), &mut handle) }, SdStatus::Ok);
    assert_eq!(unsafe { sdatlas_catalog_len(handle) }, 2);

    let mut out = ptr::null_mut();
    let query = CString::new(r#"{"text":"malaria"}"#).unwrap();
    assert_eq!(unsafe { sdatlas_catalog_search_json(handle, query.as_ptr(), &mut out) }, SdStatus::Ok);
    let hits: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(hits[0]["id"], "d1");

    let bad = CString::new(r#"{"text":"malaria","limit":0}"#).unwrap();
    assert_eq!(unsafe { sdatlas_catalog_search_json(handle, bad.as_ptr(), &mut out) }, SdStatus::InvalidQuery);
    assert!(last_error().unwrap().starts_with("bad_limit"));
    let unknown = CString::new(r#"{"txt":"malaria"}"#).unwrap();
    assert_eq!(unsafe { sdatlas_catalog_search_json(handle, unknown.as_ptr(), &mut out) }, SdStatus::InvalidQuery);

    let id = CString::new("d2").unwrap();
    assert_eq!(unsafe { sdatlas_catalog_document_json(handle, id.as_ptr(), &mut out) }, SdStatus::Ok);
    assert!(take(out).contains("Urban traffic"));
    let id = CString::new("nope").unwrap();
    assert_eq!(unsafe { sdatlas_catalog_document_json(handle, id.as_ptr(), &mut out) }, SdStatus::Ok);
    assert!(out.is_null());
    unsafe { sdatlas_catalog_free(handle) };
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libsdatlas_ffi.a");
    let Some(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    assert!(lib.exists(), "{} missing", lib.display());
    let work = tempfile::tempdir().unwrap();
    let exe = work.path().join("c_abi");
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c_abi.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.1.0"));
}

fn which_cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|cc| Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()))
}
