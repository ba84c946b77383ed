use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use frcert_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(frc_last_error_message()) }.to_string_lossy().into_owned()
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { frc_string_free(s) };
    out
}

fn weak(seed: u64, messy: bool) -> *mut FrcDocument {
    let (p, q) = ([2u32, 3, 2], [2u32, 1]);
    let mut doc = ptr::null_mut();
    let st = unsafe { frc_generate_weak(10, 10, p.as_ptr(), 3, q.as_ptr(), 2, 2, seed, messy, &mut doc) };
    assert_eq!(st, FrcStatus::Ok, "{}", last_error());
    doc
}

#[test]
fn generate_verify_round_trip() {
    let doc = weak(3, false);
    let mut messed = ptr::null_mut();
    assert_eq!(unsafe { frc_mess(doc, 9, &mut messed) }, FrcStatus::Ok);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { frc_document_to_native(messed, &mut text) }, FrcStatus::Ok);
    let text = CString::new(take(text)).unwrap();
    let mut parsed = ptr::null_mut();
    assert_eq!(unsafe { frc_document_parse(text.as_ptr(), &mut parsed) }, FrcStatus::Ok);
    let mut verdict = ptr::null_mut();
    assert_eq!(unsafe { frc_verify(parsed, &mut verdict) }, FrcStatus::Ok);
    assert!(unsafe { frc_verdict_is_proven(verdict) });
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { frc_verdict_report_json(verdict, &mut report) }, FrcStatus::Ok);
    let report = take(report);
    assert!(report.starts_with('[') && report.contains("\"proven\""));
    let mut sdpa = ptr::null_mut();
    assert_eq!(unsafe { frc_document_to_sdpa(parsed, &mut sdpa) }, FrcStatus::Ok);
    assert!(take(sdpa).contains("=mDIM"));
    unsafe {
        frc_verdict_free(verdict);
        frc_document_free(parsed);
        frc_document_free(messed);
        frc_document_free(doc);
    }
}

#[test]
fn infeasible_generation() {
    let p = [2u32, 3, 2];
    let mut doc = ptr::null_mut();
    assert_eq!(unsafe { frc_generate_infeasible(10, 20, p.as_ptr(), 3, 2, 5, true, &mut doc) }, FrcStatus::Ok);
    let mut verdict = ptr::null_mut();
    assert_eq!(unsafe { frc_verify(doc, &mut verdict) }, FrcStatus::Ok);
    assert!(unsafe { frc_verdict_is_proven(verdict) });
    unsafe {
        frc_verdict_free(verdict);
        frc_document_free(doc);
    }
}

#[test]
fn errors_are_reported() {
    let mut doc = ptr::null_mut();
    assert_eq!(unsafe { frc_document_parse(ptr::null(), &mut doc) }, FrcStatus::NullPointer);
    assert!(last_error().contains("null"));
    let bad = CString::new("format frcert-native 1\nbogus\n").unwrap();
    assert_eq!(unsafe { frc_document_parse(bad.as_ptr(), &mut doc) }, FrcStatus::Parse);
    assert!(last_error().starts_with("line 2"));
    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { frc_document_parse(invalid.as_ptr().cast(), &mut doc) }, FrcStatus::InvalidUtf8);
    let p = [5u32, 5, 5];
    assert_eq!(
        unsafe { frc_generate_infeasible(4, 4, p.as_ptr(), 3, 2, 0, false, &mut doc) },
        FrcStatus::InvalidParams
    );
    assert!(doc.is_null());
    assert!(!unsafe { frc_verdict_is_proven(ptr::null()) });
    unsafe {
        frc_document_free(ptr::null_mut());
        frc_verdict_free(ptr::null_mut());
        frc_string_free(ptr::null_mut());
    }
    let d = weak(1, false);
    assert_eq!(unsafe { frc_mess(d, 0, ptr::null_mut()) }, FrcStatus::NullPointer);
    let ok_doc = weak(2, false);
    assert_eq!(last_error(), "");
    unsafe {
        frc_document_free(d);
        frc_document_free(ok_doc);
    }
}

#[test]
fn rejected_certificate_is_not_proven() {
    let text = CString::new(
        "format frcert-native 1\ninstance dual-sdp\nn 2\nm 2\na 0 : 1 0 0\na 1 : 0 1 1\nc : 0 -1\nobjective : 1 0 1\n\
         certificate dual-infeasible\nsizes 1 0\nM 2 2 : 1 0 0 1\nt 2 2 : 1 0 0 1\nend\n",
    )
    .unwrap();
    let mut doc = ptr::null_mut();
    assert_eq!(unsafe { frc_document_parse(text.as_ptr(), &mut doc) }, FrcStatus::Ok);
    let mut verdict = ptr::null_mut();
    assert_eq!(unsafe { frc_verify(doc, &mut verdict) }, FrcStatus::Ok);
    assert!(!unsafe { frc_verdict_is_proven(verdict) });
    unsafe {
        frc_verdict_free(verdict);
        frc_document_free(doc);
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = crate_dir.join("include");
    assert!(include.join("frcert.h").exists(), "header missing");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler available; skipped");
        return;
    }
    let src = crate_dir.join("tests/c/smoke.c");
    let syntax = Command::new(&cc)
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(syntax.success(), "header does not compile");
    let lib = target_dir().join("libfrcert_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; link step skipped", lib.display());
        return;
    }
    let exe = std::env::temp_dir().join(format!("frcert-smoke-{}", std::process::id()));
    let link = Command::new(&cc)
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(link.success(), "link failed");
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
