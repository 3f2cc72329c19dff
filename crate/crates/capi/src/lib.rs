//! C ABI for the tsurf library.
//!
//! Results cross the boundary as JSON strings allocated by this library;
//! free them with `tsurf_string_free`. Building data travels through the
//! opaque `TsurfCover` handle. Every entry point returns a status code;
//! on failure `tsurf_last_error` yields a thread-local message valid
//! until the next failing call on the same thread.

use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use tsurf::construct::ConstructionInput;
use tsurf::cover::{BuildingData, BuildingDataJson, VerifyMode};
use tsurf::sing::NormalForm;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum TsurfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    MathError = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Message of the most recent failure on this thread, or null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tsurf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn tsurf_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).unwrap())
        .as_ptr()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through an out-parameter of
/// this library, or null.
#[no_mangle]
pub unsafe extern "C" fn tsurf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn emit_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> TsurfStatus {
    let text = match serde_json::to_string_pretty(value) {
        Ok(t) => t,
        Err(e) => {
            set_error(e.to_string());
            return TsurfStatus::MathError;
        }
    };
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            TsurfStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::MathError
        }
    }
}

fn guarded<F: FnOnce() -> TsurfStatus>(f: F) -> TsurfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(message);
            TsurfStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, TsurfStatus> {
    if ptr.is_null() {
        set_error("null pointer argument".to_string());
        return Err(TsurfStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(e.to_string());
        TsurfStatus::InvalidUtf8
    })
}

/// Normal form of the quotient with weights `(a, b)` at order `p`, as
/// JSON.
///
/// # Safety
/// `out_json` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tsurf_sing_normalize(
    p: u64,
    a: i64,
    b: i64,
    out_json: *mut *mut c_char,
) -> TsurfStatus {
    if out_json.is_null() {
        return TsurfStatus::NullArgument;
    }
    guarded(|| match tsurf::sing::normalize(p, a, b) {
        Ok(form) => emit_json(&form, out_json),
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::InvalidArgument
        }
    })
}

/// Continued-fraction chain of `1/p (1,q)` as JSON (an array).
///
/// # Safety
/// `out_json` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tsurf_sing_hj(p: u64, q: u64, out_json: *mut *mut c_char) -> TsurfStatus {
    if out_json.is_null() {
        return TsurfStatus::NullArgument;
    }
    guarded(|| match tsurf::sing::normalize(p, 1, q as i64) {
        Ok(NormalForm::Cyclic(s)) => emit_json(&tsurf::sing::hj(&s), out_json),
        Ok(NormalForm::Smooth) => emit_json(&Vec::<u64>::new(), out_json),
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::InvalidArgument
        }
    })
}

/// Class-T detection; `found` reports whether a witness exists and the
/// JSON carries the normal form plus the witness, if any.
///
/// # Safety
/// `out_json` and `found` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tsurf_sing_class_t(
    p: u64,
    a: i64,
    b: i64,
    out_json: *mut *mut c_char,
    found: *mut bool,
) -> TsurfStatus {
    if out_json.is_null() || found.is_null() {
        return TsurfStatus::NullArgument;
    }
    guarded(|| match tsurf::sing::normalize(p, a, b) {
        Ok(form) => {
            let witness = tsurf::sing::class_t_witness(&form);
            *found = witness.is_some();
            emit_json(
                &serde_json::json!({"normal_form": form, "witness": witness}),
                out_json,
            )
        }
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::InvalidArgument
        }
    })
}

/// Mapping-class report of `L(p,q)` as JSON.
///
/// # Safety
/// `out_json` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tsurf_lens_mcg(p: u64, q: u64, out_json: *mut *mut c_char) -> TsurfStatus {
    if out_json.is_null() {
        return TsurfStatus::NullArgument;
    }
    guarded(|| match tsurf::lens::LensSpace::new(p, q) {
        Ok(space) => emit_json(&tsurf::lens::mcg(space), out_json),
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::InvalidArgument
        }
    })
}

/// Full embedding-obstruction verdict report up to the size bound.
///
/// # Safety
/// `out_json` and `all_agree` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tsurf_obstruct_lemmas(
    max_n: u64,
    out_json: *mut *mut c_char,
    all_agree: *mut bool,
) -> TsurfStatus {
    if out_json.is_null() || all_agree.is_null() {
        return TsurfStatus::NullArgument;
    }
    guarded(|| match tsurf::lens::lemma_verdicts(max_n) {
        Ok(report) => {
            *all_agree = report.all_agree;
            emit_json(&report, out_json)
        }
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::MathError
        }
    })
}

/// Validates the action table against computation.
///
/// # Safety
/// `out_json` and `passed` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tsurf_actions_check(
    out_json: *mut *mut c_char,
    passed: *mut bool,
) -> TsurfStatus {
    if out_json.is_null() || passed.is_null() {
        return TsurfStatus::NullArgument;
    }
    guarded(|| match tsurf::actions::consistency_check() {
        Ok(report) => {
            *passed = report.passed;
            emit_json(&report, out_json)
        }
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::MathError
        }
    })
}

/// Opaque handle around parsed building data.
pub struct TsurfCover {
    inner: BuildingData,
}

/// Parses building data from its JSON form into an opaque handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` must point to
/// writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn tsurf_cover_parse(
    json: *const c_char,
    out: *mut *mut TsurfCover,
) -> TsurfStatus {
    if out.is_null() {
        return TsurfStatus::NullArgument;
    }
    let text = match read_str(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let parsed: BuildingDataJson = match serde_json::from_str(text) {
            Ok(p) => p,
            Err(e) => {
                set_error(e.to_string());
                return TsurfStatus::InvalidArgument;
            }
        };
        match BuildingData::try_from(parsed) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(TsurfCover { inner: data }));
                TsurfStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                TsurfStatus::InvalidArgument
            }
        }
    })
}

/// Releases a cover handle.
///
/// # Safety
/// `cover` must come from `tsurf_cover_parse` (or be null) and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tsurf_cover_free(cover: *mut TsurfCover) {
    if !cover.is_null() {
        drop(Box::from_raw(cover));
    }
}

/// Exhaustively verifies the cover condition of a handle.
///
/// # Safety
/// `cover` must be a live handle; `report_json` and `passed` must point
/// to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tsurf_cover_verify(
    cover: *const TsurfCover,
    rank_cap: u32,
    report_json: *mut *mut c_char,
    passed: *mut bool,
) -> TsurfStatus {
    if cover.is_null() || report_json.is_null() || passed.is_null() {
        return TsurfStatus::NullArgument;
    }
    let data = &(*cover).inner;
    guarded(
        || match tsurf::cover::verify_all(data, VerifyMode::Exhaustive, rank_cap as usize) {
            Ok(report) => {
                *passed = report.passed();
                emit_json(&report, report_json)
            }
            Err(e) => {
                set_error(e.to_string());
                TsurfStatus::MathError
            }
        },
    )
}

/// `K^2` and `chi` of the covering surface, dual-route checked.
///
/// # Safety
/// `cover` must be a live handle; `out_json` must point to writable
/// storage.
#[no_mangle]
pub unsafe extern "C" fn tsurf_cover_invariants(
    cover: *const TsurfCover,
    rank_cap: u32,
    out_json: *mut *mut c_char,
) -> TsurfStatus {
    if cover.is_null() || out_json.is_null() {
        return TsurfStatus::NullArgument;
    }
    let data = &(*cover).inner;
    guarded(|| match tsurf::cover::invariants(data, rank_cap as usize) {
        Ok(inv) => emit_json(
            &serde_json::json!({
                "schema_version": 1,
                "k2": inv.k2.to_string(),
                "chi": inv.chi.to_string(),
            }),
            out_json,
        ),
        Err(e) => {
            set_error(e.to_string());
            TsurfStatus::MathError
        }
    })
}

/// Runs the global construction from a JSON input of the form
/// `{"factors":[{"a":3,"b":6,"n":30}],"multiplier":1,"mode":"bounded","seed":0}`
/// and returns the certificate JSON.
///
/// # Safety
/// `input_json` must be a valid NUL-terminated string; `cert_json` and
/// `passed` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn tsurf_construct_certify(
    input_json: *const c_char,
    rank_cap: u32,
    m_cap: u32,
    cert_json: *mut *mut c_char,
    passed: *mut bool,
) -> TsurfStatus {
    if cert_json.is_null() || passed.is_null() {
        return TsurfStatus::NullArgument;
    }
    let text = match read_str(input_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let input: ConstructionInput = match serde_json::from_str(text) {
            Ok(i) => i,
            Err(e) => {
                set_error(e.to_string());
                return TsurfStatus::InvalidArgument;
            }
        };
        match tsurf::construct::certify(&input, rank_cap as usize, m_cap) {
            Ok(cert) => {
                *passed = cert.passed();
                emit_json(&cert, cert_json)
            }
            Err(e) => {
                set_error(e.to_string());
                TsurfStatus::MathError
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    unsafe fn take_string(ptr: *mut c_char) -> String {
        let text = CStr::from_ptr(ptr).to_str().unwrap().to_string();
        tsurf_string_free(ptr);
        text
    }

    #[test]
    fn version_and_errors() {
        unsafe {
            assert!(!tsurf_version().is_null());
            let status = tsurf_sing_normalize(4, 2, 1, &mut ptr::null_mut());
            assert!(matches!(status, TsurfStatus::InvalidArgument));
            let message = CStr::from_ptr(tsurf_last_error()).to_str().unwrap();
            assert!(message.contains("non-isolated"), "{message}");
        }
    }

    #[test]
    fn singularity_surface() {
        unsafe {
            let mut out = ptr::null_mut();
            assert!(matches!(tsurf_sing_hj(7, 5, &mut out), TsurfStatus::Ok));
            assert_eq!(take_string(out), "[\n  2,\n  2,\n  3\n]");

            let mut found = false;
            let mut out = ptr::null_mut();
            assert!(matches!(
                tsurf_sing_class_t(4, 1, 1, &mut out, &mut found),
                TsurfStatus::Ok
            ));
            assert!(found);
            let text = take_string(out);
            assert!(text.contains("\"n\": 2"), "{text}");
        }
    }

    #[test]
    fn cover_handle_round_trip() {
        let data = tsurf::demo::three_branch_cover();
        let json = serde_json::to_string(&tsurf::cover::BuildingDataJson::from(&data)).unwrap();
        let cjson = CString::new(json).unwrap();
        unsafe {
            let mut handle: *mut TsurfCover = ptr::null_mut();
            assert!(matches!(
                tsurf_cover_parse(cjson.as_ptr(), &mut handle),
                TsurfStatus::Ok
            ));
            let mut passed = false;
            let mut report = ptr::null_mut();
            assert!(matches!(
                tsurf_cover_verify(handle, 24, &mut report, &mut passed),
                TsurfStatus::Ok
            ));
            assert!(passed);
            take_string(report);
            let mut inv = ptr::null_mut();
            assert!(matches!(
                tsurf_cover_invariants(handle, 24, &mut inv),
                TsurfStatus::Ok
            ));
            let text = take_string(inv);
            assert!(text.contains("\"k2\": \"44\""), "{text}");
            tsurf_cover_free(handle);
            // malformed input is rejected with a message
            let bad = CString::new("{\"nope\":1}").unwrap();
            let mut handle: *mut TsurfCover = ptr::null_mut();
            assert!(matches!(
                tsurf_cover_parse(bad.as_ptr(), &mut handle),
                TsurfStatus::InvalidArgument
            ));
        }
    }

    #[test]
    fn certify_through_the_boundary() {
        let input = CString::new(
            r#"{"factors":[{"a":3,"b":6,"n":6}],"multiplier":1,"mode":"exhaustive","seed":0}"#,
        )
        .unwrap();
        unsafe {
            let mut passed = false;
            let mut cert = ptr::null_mut();
            assert!(matches!(
                tsurf_construct_certify(input.as_ptr(), 24, 64, &mut cert, &mut passed),
                TsurfStatus::Ok
            ));
            assert!(passed);
            let text = take_string(cert);
            assert!(text.contains("\"group_rank\": 13"), "{text}");
        }
    }
}
