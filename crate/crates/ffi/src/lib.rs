//! C ABI over the sdatlas core.
//!
//! Every function returns an [`SdStatus`]. On failure a message is kept per
//! thread and can be read with [`sdatlas_last_error`]. Strings handed out by
//! the library are NUL-terminated UTF-8 and must be released with
//! [`sdatlas_string_free`]; handles are released with their own `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sdatlas::catalog::{load_snapshot, Catalog, SearchQuery};
use sdatlas::graph::{derive_causal_graph, enumerate_loops, layout_with_hints, CausalGraph, FeedbackLoop};
use sdatlas::model::SystemModel;
use sdatlas::narrative::{describe, to_structured};
use sdatlas::xmile::{parse_xmile, serialize_xmile};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    AnalysisError = 4,
    CatalogError = 5,
    InvalidQuery = 6,
    SerializeError = 7,
    Panic = 8,
}

/// A parsed system model.
pub struct SdModel {
    model: SystemModel,
}

/// A loaded, read-only catalog snapshot.
pub struct SdCatalog {
    catalog: Catalog,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SdStatus, String);

impl Failure {
    fn new(status: SdStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SdStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(SdStatus::NullArgument, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(SdStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(SdStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::new(SdStatus::SerializeError, "output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(SdStatus::NullArgument, "out is null"));
    }
    Ok(())
}

fn to_json(value: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure::new(SdStatus::SerializeError, e))
}

fn analyze(model: &SystemModel, max_length: Option<usize>) -> Result<(CausalGraph, Vec<FeedbackLoop>, bool), Failure> {
    let graph = derive_causal_graph(model).map_err(|e| Failure::new(SdStatus::AnalysisError, e))?;
    let found = enumerate_loops(&graph, max_length).map_err(|e| Failure::new(SdStatus::AnalysisError, e))?;
    Ok((graph, found.loops, found.truncated))
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn sdatlas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next sdatlas call on the same thread.
#[no_mangle]
pub extern "C" fn sdatlas_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an XMILE document of `len` bytes.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_parse_xmile(data: *const u8, len: usize, out: *mut *mut SdModel) -> SdStatus {
    guard(|| {
        check_out(out)?;
        if data.is_null() {
            return Err(Failure::new(SdStatus::NullArgument, "data is null"));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let model = parse_xmile(bytes).map_err(|e| Failure::new(SdStatus::ParseError, format!("{}: {e}", e.code())))?;
        *out = Box::into_raw(Box::new(SdModel { model }));
        Ok(())
    })
}

/// Releases a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from [`sdatlas_model_parse_xmile`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_free(model: *mut SdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of variables in the model, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_variable_count(model: *const SdModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.variables.len())
}

/// Parse and validation diagnostics as a JSON array.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_diagnostics_json(model: *const SdModel, out: *mut *mut c_char) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let m = borrow(model, "model")?;
        write_string(out, to_json(&m.model.diagnostics)?)
    })
}

/// Writes the model back out as XMILE.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_serialize_xmile(model: *const SdModel, out: *mut *mut c_char) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let m = borrow(model, "model")?;
        let bytes = serialize_xmile(&m.model).map_err(|e| Failure::new(SdStatus::SerializeError, format!("{}: {e}", e.code())))?;
        let s = String::from_utf8(bytes).map_err(|e| Failure::new(SdStatus::SerializeError, e))?;
        write_string(out, s)
    })
}

/// Feedback loops as `{"loops": [...], "truncated": bool}`. A negative
/// `max_length` enumerates every loop.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_loops_json(model: *const SdModel, max_length: i64, out: *mut *mut c_char) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let m = borrow(model, "model")?;
        let bound = usize::try_from(max_length).ok();
        let (_, loops, truncated) = analyze(&m.model, bound)?;
        write_string(out, to_json(&serde_json::json!({ "loops": loops, "truncated": truncated }))?)
    })
}

/// Causal diagram with named loops as structured JSON.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_structured_json(model: *const SdModel, out: *mut *mut c_char) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let m = borrow(model, "model")?;
        let (graph, loops, _) = analyze(&m.model, None)?;
        let diagram = to_structured(&graph, &loops).map_err(|e| Failure::new(SdStatus::AnalysisError, e))?;
        write_string(out, to_json(&diagram)?)
    })
}

/// Plain-text description of the causal diagram.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_narrative(model: *const SdModel, out: *mut *mut c_char) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let m = borrow(model, "model")?;
        let (graph, loops, _) = analyze(&m.model, None)?;
        write_string(out, describe(&graph, &loops).render())
    })
}

/// Node positions in the unit square as JSON, deterministic in `seed`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_model_layout_json(model: *const SdModel, seed: u64, out: *mut *mut c_char) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let m = borrow(model, "model")?;
        let graph = derive_causal_graph(&m.model).map_err(|e| Failure::new(SdStatus::AnalysisError, e))?;
        write_string(out, to_json(&layout_with_hints(&graph, seed, &m.model.views))?)
    })
}

/// Loads a catalog snapshot directory.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_catalog_load(dir: *const c_char, out: *mut *mut SdCatalog) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let dir = text(dir, "dir")?;
        let catalog = load_snapshot(Path::new(dir)).map_err(|e| Failure::new(SdStatus::CatalogError, format!("{}: {e}", e.code())))?;
        *out = Box::into_raw(Box::new(SdCatalog { catalog }));
        Ok(())
    })
}

/// Releases a catalog handle. NULL is ignored.
///
/// # Safety
/// `catalog` must come from [`sdatlas_catalog_load`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_catalog_free(catalog: *mut SdCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Number of documents, or 0 for NULL.
///
/// # Safety
/// `catalog` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_catalog_len(catalog: *const SdCatalog) -> usize {
    catalog.as_ref().map_or(0, |c| c.catalog.len())
}

/// Runs a search. `query_json` carries the same fields as the HTTP search
/// body; the result is a JSON array of hits.
///
/// # Safety
/// `catalog` must be a live handle, `query_json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_catalog_search_json(
    catalog: *const SdCatalog,
    query_json: *const c_char,
    out: *mut *mut c_char,
) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let c = borrow(catalog, "catalog")?;
        let raw = text(query_json, "query_json")?;
        let query: SearchQuery = serde_json::from_str(raw).map_err(|e| Failure::new(SdStatus::InvalidQuery, e))?;
        let hits = c.catalog.search(&query).map_err(|e| Failure::new(SdStatus::InvalidQuery, format!("{}: {e}", e.code())))?;
        write_string(out, to_json(&hits)?)
    })
}

/// Document as JSON, or NULL in `out` when the id is unknown.
///
/// # Safety
/// `catalog` must be a live handle, `id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sdatlas_catalog_document_json(catalog: *const SdCatalog, id: *const c_char, out: *mut *mut c_char) -> SdStatus {
    guard(|| {
        check_out(out)?;
        let c = borrow(catalog, "catalog")?;
        let id = text(id, "id")?;
        match c.catalog.get(id) {
            Some(doc) => write_string(out, to_json(doc)?),
            None => {
                *out = ptr::null_mut();
                Ok(())
            }
        }
    })
}
