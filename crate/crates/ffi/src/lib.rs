//! C ABI over the whitney-forest library.
//!
//! Conventions: objects cross the boundary as opaque handles or JSON strings,
//! every fallible call returns a `WfStatus`, and string/handle outputs are
//! owned by the caller (release with `wf_string_free` / `wf_forest_free`).
//! `wf_last_error_message` returns a thread-local description of the most
//! recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use whitney_forest::invariants::{self, ArfOutcome, IntersectionForest};
use whitney_forest::tree_groups::{framed_presentation, structure, twisted_presentation};
use whitney_forest::trees::{parse_expr, TreeExpr};
use whitney_forest::{eta, lie, Error};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum WfStatus {
    Ok = 0,
    InvalidArgument = 1,
    ParseError = 2,
    ValidationError = 3,
    ResourceLimit = 4,
    InternalError = 5,
}

/// Opaque parsed intersection forest.
pub struct WfForest {
    inner: IntersectionForest,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(e: &Error) -> WfStatus {
    match e {
        Error::Syntax { .. } | Error::LabelRange { .. } => WfStatus::ParseError,
        Error::Validation(_) => WfStatus::ValidationError,
        Error::Resource(_) => WfStatus::ResourceLimit,
        Error::Internal(_) => WfStatus::InternalError,
    }
}

fn guard<F: FnOnce() -> Result<WfStatus, Error>>(f: F) -> WfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic across the FFI boundary");
            WfStatus::InternalError
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated UTF-8 string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, Error> {
    if ptr.is_null() {
        return Err(Error::Validation("null string argument".into()));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Error::Validation("string argument is not UTF-8".into()))
}

fn write_string(out: *mut *mut c_char, s: String) -> Result<WfStatus, Error> {
    if out.is_null() {
        return Err(Error::Validation("null output pointer".into()));
    }
    let c = CString::new(s.replace('\0', " ")).unwrap();
    unsafe { *out = c.into_raw() };
    Ok(WfStatus::Ok)
}

/// Thread-local message for the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by any `*_json` call.
///
/// # Safety
/// `s` must be a pointer previously returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn wf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a forest document (JSON, see the library docs for the schema) into
/// an opaque handle.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_forest_parse_json(
    json: *const c_char,
    out: *mut *mut WfForest,
) -> WfStatus {
    guard(|| {
        let text = read_str(json)?;
        if out.is_null() {
            return Err(Error::Validation("null output pointer".into()));
        }
        let inner = invariants::parse_forest_str(text)?;
        *out = Box::into_raw(Box::new(WfForest { inner }));
        Ok(WfStatus::Ok)
    })
}

/// # Safety
/// `forest` must come from `wf_forest_parse_json`, or be null.
#[no_mangle]
pub unsafe extern "C" fn wf_forest_free(forest: *mut WfForest) {
    if !forest.is_null() {
        drop(Box::from_raw(forest));
    }
}

/// Component count of a parsed forest.
///
/// # Safety
/// `forest` must be a live handle from `wf_forest_parse_json`.
#[no_mangle]
pub unsafe extern "C" fn wf_forest_components(forest: *const WfForest) -> u32 {
    if forest.is_null() {
        return 0;
    }
    (*forest).inner.m
}

/// Order of a parsed forest.
///
/// # Safety
/// `forest` must be a live handle from `wf_forest_parse_json`.
#[no_mangle]
pub unsafe extern "C" fn wf_forest_order(forest: *const WfForest) -> usize {
    if forest.is_null() {
        return 0;
    }
    (*forest).inner.n
}

/// Evaluates τ of the forest; `*out_is_zero` is 1 when the obstruction
/// vanishes in the twisted tree group.
///
/// # Safety
/// `forest` must be a live handle; `out_is_zero` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_forest_tau_is_zero(
    forest: *const WfForest,
    generator_cap: usize,
    out_is_zero: *mut i32,
) -> WfStatus {
    guard(|| {
        if forest.is_null() || out_is_zero.is_null() {
            return Err(Error::Validation("null argument".into()));
        }
        let t = invariants::tau(&(*forest).inner, generator_cap)?;
        *out_is_zero = t.is_zero() as i32;
        Ok(WfStatus::Ok)
    })
}

/// Milnor invariant of the forest as a JSON document (total tensor,
/// longitudes, kernel-lattice coordinates).
///
/// # Safety
/// `forest` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_forest_milnor_json(
    forest: *const WfForest,
    generator_cap: usize,
    out_json: *mut *mut c_char,
) -> WfStatus {
    guard(|| {
        if forest.is_null() {
            return Err(Error::Validation("null forest handle".into()));
        }
        let mu = invariants::milnor(&(*forest).inner, generator_cap)?;
        write_string(out_json, mu.to_json(generator_cap)?.to_string())
    })
}

/// Higher-order Arf representative of the forest as JSON: either
/// `{"arf": {"k": ..., "terms": [...]}}` or
/// `{"milnor_obstruction": {...}}` when μ ≠ 0.
///
/// # Safety
/// `forest` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_forest_arf_json(
    forest: *const WfForest,
    generator_cap: usize,
    out_json: *mut *mut c_char,
) -> WfStatus {
    guard(|| {
        if forest.is_null() {
            return Err(Error::Validation("null forest handle".into()));
        }
        let doc = match invariants::arf_value(&(*forest).inner, generator_cap)? {
            ArfOutcome::Value(v) => serde_json::json!({
                "arf": {
                    "k": v.k,
                    "terms": v.terms.iter().map(|j| j.to_string()).collect::<Vec<_>>(),
                }
            }),
            ArfOutcome::MilnorObstruction(mu) => serde_json::json!({
                "milnor_obstruction": mu.to_json(generator_cap)?,
            }),
        };
        write_string(out_json, doc.to_string())
    })
}

/// Structure of a tree group as `{"rank": r, "torsion": [...], "generators": g}`.
///
/// # Safety
/// `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_group_json(
    m: u32,
    n: usize,
    twisted: i32,
    generator_cap: usize,
    out_json: *mut *mut c_char,
) -> WfStatus {
    guard(|| {
        let p = if twisted != 0 {
            twisted_presentation(m, n, generator_cap)?
        } else {
            framed_presentation(m, n, generator_cap)?
        };
        let s = structure(&p);
        let doc = serde_json::json!({
            "rank": s.rank,
            "torsion": s.torsion.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "generators": p.generators.len(),
        });
        write_string(out_json, doc.to_string())
    })
}

/// η of a tree or ∞-tree expression over labels 1..=m, as tensor JSON.
///
/// # Safety
/// `expr` must be a NUL-terminated UTF-8 string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_eta_apply_json(
    expr: *const c_char,
    m: u32,
    generator_cap: usize,
    out_json: *mut *mut c_char,
) -> WfStatus {
    guard(|| {
        let text = read_str(expr)?;
        let tensor = match parse_expr(text, m)? {
            TreeExpr::Unrooted(t, sign) => eta::eta_tree(&t, m, generator_cap)?
                .scale(&whitney_forest::linalg::int(sign as i64)),
            TreeExpr::Inf(j) => eta::eta_inf(&j, m, generator_cap)?,
            TreeExpr::Rooted(_) => {
                return Err(Error::Validation(
                    "η applies to unrooted trees <A,B> and ∞-trees inf(J)".into(),
                ))
            }
        };
        write_string(out_json, lie::tensor_to_json(&tensor, generator_cap)?.to_string())
    })
}

/// Symbolic Bing-doubling recipe for a generator expression, as JSON.
///
/// # Safety
/// `expr` must be a NUL-terminated UTF-8 string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_realize_json(
    expr: *const c_char,
    m: u32,
    out_json: *mut *mut c_char,
) -> WfStatus {
    guard(|| {
        let text = read_str(expr)?;
        let gen = match parse_expr(text, m)? {
            TreeExpr::Unrooted(t, _) => whitney_forest::tree_groups::Generator::Tree(t),
            TreeExpr::Inf(j) => whitney_forest::tree_groups::Generator::Inf(j),
            TreeExpr::Rooted(_) => {
                return Err(Error::Validation(
                    "realize takes an unrooted tree <A,B> or an ∞-tree inf(J)".into(),
                ))
            }
        };
        let recipe = invariants::realize_recipe(&gen)?;
        write_string(out_json, recipe.to_json().to_string())
    })
}

/// Witt rank r_n(m) as a decimal string (arbitrary precision).
///
/// # Safety
/// `out_decimal` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_witt_rank(
    m: u32,
    n: usize,
    out_decimal: *mut *mut c_char,
) -> WfStatus {
    guard(|| {
        if n == 0 {
            return Err(Error::Validation("witt rank needs n ≥ 1".into()));
        }
        write_string(out_decimal, lie::witt_rank(m, n).to_string())
    })
}
