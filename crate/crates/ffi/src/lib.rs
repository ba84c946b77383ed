//! C ABI over `frcert`: parse, generate, scramble, export and verify documents.
//!
//! Every fallible call returns an [`FrcStatus`]; on failure the message is kept
//! per thread and read back with [`frc_last_error_message`]. Handles and strings
//! returned by the library are released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frcert::generator::{gen_infeasible, gen_weak, mess, GenParams};
use frcert::instance::Instance;
use frcert::io::native::{read_native, write_native};
use frcert::io::sdpa::export_sdpa;
use frcert::io::NativeDocument;
use frcert::verifier::{verify_bundle, Verdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidParams = 4,
    Verification = 5,
    Io = 6,
    Panic = 7,
}

/// An instance with its certificates.
pub struct FrcDocument {
    inner: NativeDocument,
}

/// The verdicts for every certificate of a document.
pub struct FrcVerdict {
    verdicts: Vec<Verdict>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes replaced"));
}

fn guard(f: impl FnOnce() -> Result<(), (FrcStatus, String)>) -> FrcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FrcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FrcStatus::Panic
        }
    }
}

fn null(what: &str) -> (FrcStatus, String) {
    (FrcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FrcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller passes a nul-terminated string that outlives this call.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|e| (FrcStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn sizes_arg(p: *const u32, len: usize, what: &str) -> Result<Vec<usize>, (FrcStatus, String)> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) }.iter().map(|&x| x as usize).collect())
}

fn put<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null before producing a value.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (FrcStatus, String)> {
    let c = CString::new(s).map_err(|e| (FrcStatus::InvalidParams, e.to_string()))?;
    // SAFETY: callers check `out` for null first.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Parses a native document.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_document_parse(text: *const c_char, out: *mut *mut FrcDocument) -> FrcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { text_arg(text, "text") }?;
        let doc = read_native(text).map_err(|e| (FrcStatus::Parse, e.to_string()))?;
        put(out, FrcDocument { inner: doc });
        Ok(())
    })
}

/// # Safety
/// `doc` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn frc_document_free(doc: *mut FrcDocument) {
    if !doc.is_null() {
        // SAFETY: produced by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(doc) });
    }
}

#[allow(clippy::too_many_arguments)]
unsafe fn generate(
    weak: bool,
    n: u32,
    m: u32,
    p: *const u32,
    p_len: usize,
    q: *const u32,
    q_len: usize,
    entry_range: i64,
    seed: u64,
    messy: bool,
    out: *mut *mut FrcDocument,
) -> FrcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = GenParams {
            n: n as usize,
            m: m as usize,
            p: unsafe { sizes_arg(p, p_len, "p") }?,
            q: unsafe { sizes_arg(q, q_len, "q") }?,
            entry_range,
            seed,
            mess: messy,
        };
        let made = if weak { gen_weak(&params) } else { gen_infeasible(&params) };
        let (inst, bundle) = made.map_err(|e| (FrcStatus::InvalidParams, e.to_string()))?;
        put(out, FrcDocument { inner: NativeDocument::new(Instance::Dual(inst), bundle) });
        Ok(())
    })
}

/// Weakly infeasible dual system with block sizes `p` (k + 1 entries) and `q` (l + 1 entries).
///
/// # Safety
/// `p` and `q` must point to `p_len` and `q_len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_generate_weak(
    n: u32,
    m: u32,
    p: *const u32,
    p_len: usize,
    q: *const u32,
    q_len: usize,
    entry_range: i64,
    seed: u64,
    messy: bool,
    out: *mut *mut FrcDocument,
) -> FrcStatus {
    unsafe { generate(true, n, m, p, p_len, q, q_len, entry_range, seed, messy, out) }
}

/// Infeasible dual system in staircase form with block sizes `p`.
///
/// # Safety
/// `p` must point to `p_len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_generate_infeasible(
    n: u32,
    m: u32,
    p: *const u32,
    p_len: usize,
    entry_range: i64,
    seed: u64,
    messy: bool,
    out: *mut *mut FrcDocument,
) -> FrcStatus {
    unsafe { generate(false, n, m, p, p_len, ptr::null(), 0, entry_range, seed, messy, out) }
}

/// Scrambles a dual psd document; its certificates are transformed along.
///
/// # Safety
/// `doc` must be a live document; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_mess(doc: *const FrcDocument, seed: u64, out: *mut *mut FrcDocument) -> FrcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = unsafe { doc.as_ref() }.ok_or_else(|| null("doc"))?;
        let Some(Instance::Dual(inst)) = &doc.inner.instance else {
            return Err((FrcStatus::InvalidParams, "only dual psd documents can be scrambled".into()));
        };
        let (inst, bundle) =
            mess(inst, &doc.inner.bundle, seed).map_err(|e| (FrcStatus::InvalidParams, e.to_string()))?;
        put(out, FrcDocument { inner: NativeDocument::new(Instance::Dual(inst), bundle) });
        Ok(())
    })
}

/// Native text of the document; free with [`frc_string_free`].
///
/// # Safety
/// `doc` must be a live document; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_document_to_native(doc: *const FrcDocument, out: *mut *mut c_char) -> FrcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = unsafe { doc.as_ref() }.ok_or_else(|| null("doc"))?;
        put_string(out, write_native(&doc.inner))
    })
}

/// SDPA text of a dual psd document; certificates are not included.
///
/// # Safety
/// `doc` must be a live document; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_document_to_sdpa(doc: *const FrcDocument, out: *mut *mut c_char) -> FrcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = unsafe { doc.as_ref() }.ok_or_else(|| null("doc"))?;
        let Some(Instance::Dual(inst)) = &doc.inner.instance else {
            return Err((FrcStatus::InvalidParams, "only dual psd documents have an SDPA form".into()));
        };
        put_string(out, export_sdpa(inst).text)
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn frc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Checks every certificate of the document. A rejected certificate is still
/// `FRC_STATUS_OK`; inspect the verdict.
///
/// # Safety
/// `doc` must be a live document; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_verify(doc: *const FrcDocument, out: *mut *mut FrcVerdict) -> FrcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = unsafe { doc.as_ref() }.ok_or_else(|| null("doc"))?;
        let inst =
            doc.inner.instance.as_ref().ok_or((FrcStatus::InvalidParams, "document holds no instance".into()))?;
        let verdicts = verify_bundle(inst, &doc.inner.bundle).map_err(|e| (FrcStatus::Verification, e.to_string()))?;
        put(out, FrcVerdict { verdicts });
        Ok(())
    })
}

/// True when there is at least one certificate and every one is proven exactly.
///
/// # Safety
/// `verdict` must be a live verdict or null.
#[no_mangle]
pub unsafe extern "C" fn frc_verdict_is_proven(verdict: *const FrcVerdict) -> bool {
    match unsafe { verdict.as_ref() } {
        Some(v) => !v.verdicts.is_empty() && v.verdicts.iter().all(Verdict::is_proven),
        None => false,
    }
}

/// JSON array with one transcript per certificate; free with [`frc_string_free`].
///
/// # Safety
/// `verdict` must be a live verdict; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frc_verdict_report_json(verdict: *const FrcVerdict, out: *mut *mut c_char) -> FrcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = unsafe { verdict.as_ref() }.ok_or_else(|| null("verdict"))?;
        let arr: Vec<_> = v.verdicts.iter().map(Verdict::to_json).collect();
        put_string(out, json_array(arr))
    })
}

fn json_array(arr: Vec<impl std::fmt::Display>) -> String {
    let parts: Vec<String> = arr.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// # Safety
/// `verdict` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn frc_verdict_free(verdict: *mut FrcVerdict) {
    if !verdict.is_null() {
        // SAFETY: produced by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(verdict) });
    }
}

/// Message of the last failed call on this thread, empty after a success. The
/// pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn frc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
