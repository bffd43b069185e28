use std::ffi::{CStr, CString};
use std::ptr;

use splitgauge_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { sg_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn features(values: &[f64], rows: usize, dim: usize) -> *mut SgFeatures {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sg_features_from_rows(values.as_ptr(), rows, dim, &mut out) }, SgStatus::Ok);
    out
}

#[test]
fn frechet_one_dimensional() {
    // N(0, 1) vs N(3, 4) from exact samples: means 0 and 3, variances 1 and 4
    let a = features(&[-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2], 2, 1);
    let b = features(&[3.0 - 2f64.sqrt(), 3.0 + 2f64.sqrt()], 2, 1);
    unsafe {
        assert_eq!((sg_features_rows(a), sg_features_dim(a)), (2, 1));
        let (mut ga, mut gb) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(sg_summarize(a, &mut ga), SgStatus::Ok);
        assert_eq!(sg_summarize(b, &mut gb), SgStatus::Ok);
        let mut d = 0.0;
        assert_eq!(sg_frechet(ga, gb, &mut d), SgStatus::Ok);
        assert!((d - 10.0).abs() < 1e-12, "{d}");
        sg_summary_free(ga);
        sg_summary_free(gb);
        sg_features_free(a);
        sg_features_free(b);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(sg_features_from_rows(ptr::null(), 2, 2, &mut out), SgStatus::NullPointer);
        assert!(last_error().contains("null"));

        let bad = [f64::NAN, 1.0];
        assert_eq!(sg_features_from_rows(bad.as_ptr(), 1, 2, &mut out), SgStatus::Validation);

        let path = CString::new("/nonexistent/x.fm").unwrap();
        assert_eq!(sg_features_load(path.as_ptr(), &mut out), SgStatus::Io);
        assert!(out.is_null());

        let mut score = 0.0;
        let probs = [0.7, 0.7];
        assert_eq!(sg_inception_score(probs.as_ptr(), 1, 2, &mut score), SgStatus::Validation);
        sg_features_free(ptr::null_mut());
        sg_string_free(ptr::null_mut());
    }
}

#[test]
fn inception_score_uniform() {
    let probs = vec![0.25; 40];
    let mut score = 0.0;
    assert_eq!(unsafe { sg_inception_score(probs.as_ptr(), 10, 4, &mut score) }, SgStatus::Ok);
    assert!((score - 1.0).abs() < 1e-12);
}

#[test]
fn audit_and_json() {
    let values: Vec<f64> = (0..400).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
    let train = features(&values, 200, 2);
    let test = features(&values[..200], 100, 2);
    let seeds = [1u64, 2, 3];
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(sg_audit(train, test, 50, seeds.as_ptr(), seeds.len(), &mut r), SgStatus::Ok);
        let mut stats = [0.0; 6];
        assert_eq!(sg_audit_stats(r, stats.as_mut_ptr()), SgStatus::Ok);
        assert!(stats[0] >= 0.0 && stats[2] >= 0.0);
        let _ = sg_audit_verdict(r);
        let mut json = ptr::null_mut();
        assert_eq!(sg_audit_report_json(r, &mut json), SgStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"verdict\""));
        sg_string_free(json);
        sg_audit_report_free(r);

        // m larger than the test split
        assert_eq!(sg_audit(train, test, 150, seeds.as_ptr(), 3, &mut r), SgStatus::Validation);
        sg_features_free(train);
        sg_features_free(test);
    }
}

#[test]
fn remix_plan_json() {
    let tr = [0u32, 1, 1, 0, 2];
    let te = [2u32, 0];
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sg_remix(tr.as_ptr(), tr.len(), te.as_ptr(), te.len(), 3, 7, &mut p), SgStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(sg_remix_plan_json(p, &mut json), SgStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["new_train"].as_array().unwrap().len(), 5);
        assert_eq!(v["new_test"].as_array().unwrap().len(), 2);
        sg_string_free(json);
        sg_remix_plan_free(p);

        let bad = [5u32];
        assert_eq!(sg_remix(bad.as_ptr(), 1, ptr::null(), 0, 3, 7, &mut p), SgStatus::Validation);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
