//! Exercises the C surface from Rust the way a foreign binding would.

use std::ffi::{CStr, CString};
use std::ptr;

use tvslip_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tvs_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn run_quadratic_through_the_c_surface() {
    let config = CString::new(
        r#"{
            "model": {"kind": "quadratic", "alpha": 0.0,
                      "values": [0, 1],
                      "target": [1,1,1,1,1,1,1,1]},
            "grid": {"n": 8},
            "patches": {"n_per_axis": [2], "overlap": [0.6]},
            "algorithm": {"delta0": 1.0}
        }"#,
    )
    .unwrap();

    let mut handle: *mut tvs_run = ptr::null_mut();
    let status = unsafe { tvs_run_config_json(config.as_ptr(), &mut handle) };
    assert_eq!(status, tvs_status::TVS_OK, "{}", last_error());
    assert!(!handle.is_null());

    let (mut j, mut f, mut tv) = (f64::NAN, f64::NAN, f64::NAN);
    assert_eq!(
        unsafe { tvs_run_objective(handle, &mut j, &mut f, &mut tv) },
        tvs_status::TVS_OK
    );
    assert_eq!(j, 0.0);
    assert_eq!(f, 0.0);

    let mut reason = tvs_reason::TVS_REASON_MAX_OUTER_ITERS;
    assert_eq!(unsafe { tvs_run_reason(handle, &mut reason) }, tvs_status::TVS_OK);
    assert_eq!(reason, tvs_reason::TVS_REASON_STATIONARY);

    let mut len = 0usize;
    assert_eq!(unsafe { tvs_run_field_len(handle, &mut len) }, tvs_status::TVS_OK);
    assert_eq!(len, 8);
    let mut buf = vec![0i32; len];
    assert_eq!(
        unsafe { tvs_run_copy_field(handle, buf.as_mut_ptr(), len) },
        tvs_status::TVS_OK
    );
    assert!(buf.iter().all(|&v| v == 1));

    // undersized buffer is reported, not written past
    let mut small = [0i32; 2];
    assert_eq!(
        unsafe { tvs_run_copy_field(handle, small.as_mut_ptr(), 2) },
        tvs_status::TVS_BUFFER_TOO_SMALL
    );

    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { tvs_run_summary_json(handle, &mut json) },
        tvs_status::TVS_OK
    );
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["reason"], "Stationary");
    assert_eq!(doc["n_cells"], 8);
    unsafe { tvs_string_free(json) };

    unsafe { tvs_run_free(handle) };
}

#[test]
fn config_errors_are_reported() {
    let mut handle: *mut tvs_run = ptr::null_mut();

    let bad_json = CString::new("{ not json").unwrap();
    assert_eq!(
        unsafe { tvs_run_config_json(bad_json.as_ptr(), &mut handle) },
        tvs_status::TVS_CONFIG_ERROR
    );
    assert!(last_error().contains("parse error"));

    let bad_sigma = CString::new(
        r#"{"model": {"kind": "conv1d", "alpha": 1e-3},
            "grid": {"n": 16},
            "algorithm": {"sigma": 1.5}}"#,
    )
    .unwrap();
    assert_eq!(
        unsafe { tvs_run_config_json(bad_sigma.as_ptr(), &mut handle) },
        tvs_status::TVS_CONFIG_ERROR
    );
    assert!(last_error().contains("sigma must be in (0,1)"));

    assert_eq!(
        unsafe { tvs_run_config_json(ptr::null(), &mut handle) },
        tvs_status::TVS_NULL_POINTER
    );
}

#[test]
fn subsolve_and_oversize_patch_code() {
    let instance = CString::new(
        r#"{"dim": 1, "lower": [-1.0, 0.0], "upper": [1.0, 1.0], "n": [6, 1],
            "values": [-1, 0, 1], "base": [0, 0, 0, 0, 0, 0],
            "grad": [-2.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            "patch_box_lower": [-1.0, 0.0], "patch_box_upper": [1.0, 1.0],
            "radius": 0.4, "alpha": 0.01}"#,
    )
    .unwrap();
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { tvs_subsolve_json(instance.as_ptr(), &mut out) },
        tvs_status::TVS_OK
    );
    let doc: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    assert!(doc["pred"].as_f64().unwrap() > 0.0);
    unsafe { tvs_string_free(out) };

    // a 6x6 patch exceeds the depth-first solver cap
    let n = 8;
    let base = vec![0; n * n];
    let grad = vec![0.1; n * n];
    let oversize = serde_json::json!({
        "dim": 2, "lower": [0.0, 0.0], "upper": [1.0, 1.0], "n": [n, n],
        "values": [0, 1], "base": base, "grad": grad,
        "patch_box_lower": [0.01, 0.01], "patch_box_upper": [0.74, 0.74],
        "radius": 0.5, "alpha": 0.01
    });
    let oversize = CString::new(oversize.to_string()).unwrap();
    assert_eq!(
        unsafe { tvs_subsolve_json(oversize.as_ptr(), &mut out) },
        tvs_status::TVS_PATCH_TOO_LARGE
    );
    assert!(last_error().contains("increase the number of patches"));
}

#[test]
fn version_is_a_cstring() {
    let v = unsafe { CStr::from_ptr(tvs_version()) };
    assert!(!v.to_bytes().is_empty());
}
