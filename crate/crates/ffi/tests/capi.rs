//! Exercises the C surface through the Rust side of the ABI: handle
//! lifecycle, error reporting, report JSON and classification codes.

use bianchi_ffi::*;
use std::ffi::{CStr, CString};

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let out = CStr::from_ptr(ptr).to_str().unwrap().to_owned();
    bianchi_string_free(ptr);
    out
}

#[test]
fn version_is_a_static_string() {
    let v = bianchi_version();
    assert!(!v.is_null());
    let text = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
    assert!(!text.is_empty());
}

#[test]
fn builtin_model_lifecycle() {
    unsafe {
        let name = cstr("cylinder_r1s3");
        let model = bianchi_model_builtin(name.as_ptr());
        assert!(!model.is_null());
        assert_eq!(bianchi_model_dimension(model), 4);
        let model_name = take_string(bianchi_model_name(model));
        assert_eq!(model_name, "cylinder_r1s3");
        bianchi_model_free(model);
    }
}

#[test]
fn unknown_model_sets_the_error_message() {
    unsafe {
        let name = cstr("not_a_model");
        let model = bianchi_model_builtin(name.as_ptr());
        assert!(model.is_null());
        let msg = take_string(bianchi_last_error());
        assert!(msg.contains("not_a_model"), "{msg}");
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert!(bianchi_model_builtin(std::ptr::null()).is_null());
        assert_eq!(bianchi_model_dimension(std::ptr::null()), 0);
        assert_eq!(bianchi_report_len(std::ptr::null()), 0);
        assert!(!bianchi_report_pass(std::ptr::null()));
        bianchi_model_free(std::ptr::null_mut());
        bianchi_report_free(std::ptr::null_mut());
        bianchi_string_free(std::ptr::null_mut());
    }
}

#[test]
fn tier_run_produces_valid_report_json() {
    unsafe {
        let name = cstr("gaussian4");
        let model = bianchi_model_builtin(name.as_ptr());
        assert!(!model.is_null());
        let report = bianchi_run_tier(model, b'A' as std::ffi::c_char, 5, 3, 0.0);
        assert!(!report.is_null(), "{:?}", take_string(bianchi_last_error()));
        assert!(bianchi_report_pass(report));
        assert!(bianchi_report_len(report) >= 5);
        let json = take_string(bianchi_report_json(report));
        let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
        assert_eq!(rows.len(), bianchi_report_len(report));
        assert!(rows.iter().any(|r| r["check_id"] == "A.bianchi2c"));
        bianchi_report_free(report);
        bianchi_model_free(model);
    }
}

#[test]
fn single_check_run_reports_na_for_inapplicable() {
    unsafe {
        let name = cstr("warped_test");
        let model = bianchi_model_builtin(name.as_ptr());
        let id = cstr("B.p2_13");
        let report = bianchi_run_check(model, id.as_ptr(), 4, 0, 0.0);
        assert!(!report.is_null());
        assert_eq!(bianchi_report_len(report), 1);
        assert!(bianchi_report_pass(report));
        let json = take_string(bianchi_report_json(report));
        let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
        assert_eq!(rows[0]["points"].as_u64(), Some(0));
        bianchi_report_free(report);
        bianchi_model_free(model);
    }
}

#[test]
fn bad_tier_and_unknown_check_error_cleanly() {
    unsafe {
        let name = cstr("gaussian4");
        let model = bianchi_model_builtin(name.as_ptr());
        let report = bianchi_run_tier(model, b'X' as std::ffi::c_char, 5, 0, 0.0);
        assert!(report.is_null());
        let msg = take_string(bianchi_last_error());
        assert!(msg.contains("tier"), "{msg}");

        let id = cstr("Z.nothing");
        let report = bianchi_run_check(model, id.as_ptr(), 5, 0, 0.0);
        assert!(report.is_null());
        let msg = take_string(bianchi_last_error());
        assert!(msg.contains("Z.nothing"), "{msg}");
        bianchi_model_free(model);
    }
}

#[test]
fn classification_codes_cover_catalog_and_errors() {
    unsafe {
        let cases = [
            ("gaussian4", BianchiCode::VerdictGaussian),
            ("product_r2s2", BianchiCode::VerdictR2xS2),
            ("cylinder_r1s3", BianchiCode::VerdictRxS3),
            ("sphere4", BianchiCode::VerdictEinstein),
            ("warped_test", BianchiCode::VerdictNotASoliton),
        ];
        for (name, want) in cases {
            let name = cstr(name);
            let model = bianchi_model_builtin(name.as_ptr());
            let code = bianchi_classify(model, 10, 0, 1e-8);
            assert_eq!(code, want);
            bianchi_model_free(model);
        }
        // wrong dimension is an error code, not a verdict
        let name = cstr("sphere3");
        let model = bianchi_model_builtin(name.as_ptr());
        assert_eq!(bianchi_classify(model, 5, 0, 1e-8), BianchiCode::ErrVerify);
        bianchi_model_free(model);
    }
}

#[test]
fn classification_json_round_trips() {
    unsafe {
        let name = cstr("sphere4");
        let model = bianchi_model_builtin(name.as_ptr());
        let json = take_string(bianchi_classify_json(model, 10, 0, 1e-8));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["verdict"], "Einstein");
        bianchi_model_free(model);
    }
}

#[test]
fn model_json_loading_works_through_the_abi() {
    unsafe {
        let spec = bianchi::models::find_model("product_r2s2").unwrap().spec;
        let json = cstr(&bianchi::models::model_to_json(&spec));
        let model = bianchi_model_from_json(json.as_ptr());
        assert!(!model.is_null());
        assert_eq!(bianchi_model_dimension(model), 4);
        let report = bianchi_run_check(model, cstr("B.soliton_gate").as_ptr(), 8, 1, 0.0);
        assert!(!report.is_null());
        assert!(bianchi_report_pass(report));
        bianchi_report_free(report);
        bianchi_model_free(model);

        let bad = cstr("{\"name\":");
        assert!(bianchi_model_from_json(bad.as_ptr()).is_null());
    }
}

#[test]
fn generated_header_exists_and_declares_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("bianchi.h");
    let text = std::fs::read_to_string(&header).expect("cbindgen header should be generated");
    for symbol in [
        "bianchi_model_builtin",
        "bianchi_run_tier",
        "bianchi_report_json",
        "bianchi_classify",
        "bianchi_string_free",
        "BianchiCode",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
