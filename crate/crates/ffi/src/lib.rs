//! C ABI over the splitgauge core.
//!
//! Objects cross the boundary as opaque handles created by `sg_*_new`/`load`
//! style calls and released with the matching `sg_*_free`. Every fallible
//! call returns an [`SgStatus`]; on failure the message is kept per thread and
//! can be read with [`sg_last_error`]. Strings returned by the library must be
//! released with [`sg_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use splitgauge::audit::{AuditConfig, Verdict};
use splitgauge::{Error, FeatureMatrix, GaussianSummary, ProbMatrix};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    Io = 2,
    Format = 3,
    Validation = 4,
    Numeric = 5,
    InvalidArgument = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgVerdict {
    Match = 0,
    Mismatch = 1,
    Inconclusive = 2,
}

pub struct SgFeatures(FeatureMatrix);
pub struct SgSummary(GaussianSummary);
pub struct SgAuditReport(splitgauge::AuditReport);
pub struct SgRemixPlan(splitgauge::RemixPlan);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SgStatus {
    match e {
        Error::Io { .. } => SgStatus::Io,
        Error::UnsupportedFormat(_) | Error::Format { .. } | Error::Truncated { .. } | Error::Json(_) => {
            SgStatus::Format
        }
        Error::Asymmetric(_) | Error::NotPsd { .. } | Error::Degenerate(_) => SgStatus::Numeric,
        Error::InvalidArgument(_) => SgStatus::InvalidArgument,
        _ => SgStatus::Validation,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), SgStatus>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SgStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            SgStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SgStatus>;
}

impl<T> OrStatus<T> for splitgauge::Result<T> {
    fn or_status(self) -> Result<T, SgStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn null(what: &str) -> SgStatus {
    set_error(format!("null pointer: {what}"));
    SgStatus::NullPointer
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, SgStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SgStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], SgStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, SgStatus> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p).to_str().map(str::to_owned).map_err(|_| {
        set_error("path is not valid UTF-8".into());
        SgStatus::InvalidArgument
    })
}

fn into_c_string(s: String) -> Result<*mut c_char, SgStatus> {
    CString::new(s).map(CString::into_raw).map_err(|_| {
        set_error("string contains an interior NUL".into());
        SgStatus::Format
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL, or
/// 0 when there is no error.
#[no_mangle]
pub unsafe extern "C" fn sg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a FEATMTX1 feature file.
#[no_mangle]
pub unsafe extern "C" fn sg_features_load(path: *const c_char, out: *mut *mut SgFeatures) -> SgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let f = splitgauge::ingest::read_features(path_arg(path)?).or_status()?;
        *out = Box::into_raw(Box::new(SgFeatures(f)));
        Ok(())
    })
}

/// Copies a row-major `rows × dim` buffer into a feature handle.
#[no_mangle]
pub unsafe extern "C" fn sg_features_from_rows(
    values: *const f64,
    rows: usize,
    dim: usize,
    out: *mut *mut SgFeatures,
) -> SgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows.checked_mul(dim).ok_or_else(|| {
            set_error("rows × dim overflows".into());
            SgStatus::InvalidArgument
        })?;
        let v = slice(values, len, "values")?.to_vec();
        let f = FeatureMatrix::new(rows, dim, v, "ffi", 0).or_status()?;
        *out = Box::into_raw(Box::new(SgFeatures(f)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_features_rows(f: *const SgFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.0.rows())
}

#[no_mangle]
pub unsafe extern "C" fn sg_features_dim(f: *const SgFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.0.dim())
}

#[no_mangle]
pub unsafe extern "C" fn sg_features_free(f: *mut SgFeatures) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Mean and unbiased covariance of a feature matrix.
#[no_mangle]
pub unsafe extern "C" fn sg_summarize(f: *const SgFeatures, out: *mut *mut SgSummary) -> SgStatus {
    guard(|| {
        let f = borrow(f, "features")?;
        let out = out_ptr(out, "out")?;
        let g = splitgauge::summarize(&f.0).or_status()?;
        *out = Box::into_raw(Box::new(SgSummary(g)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_summary_free(g: *mut SgSummary) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Fréchet distance between two Gaussian summaries.
#[no_mangle]
pub unsafe extern "C" fn sg_frechet(a: *const SgSummary, b: *const SgSummary, out: *mut f64) -> SgStatus {
    guard(|| {
        let (a, b) = (borrow(a, "a")?, borrow(b, "b")?);
        let out = out_ptr(out, "out")?;
        *out = splitgauge::frechet(&a.0, &b.0).or_status()?;
        Ok(())
    })
}

/// Inception Score of a row-major `rows × classes` probability matrix.
#[no_mangle]
pub unsafe extern "C" fn sg_inception_score(
    probs: *const f64,
    rows: usize,
    classes: usize,
    out: *mut f64,
) -> SgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows.checked_mul(classes).ok_or_else(|| {
            set_error("rows × classes overflows".into());
            SgStatus::InvalidArgument
        })?;
        let p = ProbMatrix::new(rows, classes, slice(probs, len, "probs")?.to_vec()).or_status()?;
        *out = splitgauge::inception_score(&p).or_status()?.score;
        Ok(())
    })
}

/// Runs the subset audit. `seeds` may be null with `n_seeds == 0` for the
/// default seeds; `m == 0` selects the default subset size.
#[no_mangle]
pub unsafe extern "C" fn sg_audit(
    train: *const SgFeatures,
    test: *const SgFeatures,
    m: usize,
    seeds: *const u64,
    n_seeds: usize,
    out: *mut *mut SgAuditReport,
) -> SgStatus {
    guard(|| {
        let (train, test) = (borrow(train, "train")?, borrow(test, "test")?);
        let out = out_ptr(out, "out")?;
        let mut cfg = AuditConfig::default();
        if m != 0 {
            cfg.m = m;
        }
        if n_seeds != 0 {
            cfg.seeds = slice(seeds, n_seeds, "seeds")?.to_vec();
        }
        let r = splitgauge::audit(&train.0, &test.0, &cfg).or_status()?;
        *out = Box::into_raw(Box::new(SgAuditReport(r)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_audit_verdict(r: *const SgAuditReport) -> SgVerdict {
    match r.as_ref().map(|r| r.0.verdict) {
        Some(Verdict::Match) => SgVerdict::Match,
        Some(Verdict::Mismatch) => SgVerdict::Mismatch,
        _ => SgVerdict::Inconclusive,
    }
}

/// Writes the aggregates `within_mean, within_std, cross_mean, cross_std,
/// gap_ratio, z_gap` into `out[0..6]`.
#[no_mangle]
pub unsafe extern "C" fn sg_audit_stats(r: *const SgAuditReport, out: *mut f64) -> SgStatus {
    guard(|| {
        let r = &borrow(r, "report")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = [r.within_mean, r.within_std, r.cross_mean, r.cross_std, r.gap_ratio, r.z_gap];
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// Report as a JSON string; free with `sg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn sg_audit_report_json(r: *const SgAuditReport, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        let r = borrow(r, "report")?;
        let out = out_ptr(out, "out")?;
        let text = serde_json::to_string(&r.0).map_err(Error::from).or_status()?;
        *out = into_c_string(text)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_audit_report_free(r: *mut SgAuditReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Class-stratified remix plan for two label arrays.
#[no_mangle]
pub unsafe extern "C" fn sg_remix(
    train_labels: *const u32,
    n_train: usize,
    test_labels: *const u32,
    n_test: usize,
    classes: u32,
    seed: u64,
    out: *mut *mut SgRemixPlan,
) -> SgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let tr = slice(train_labels, n_train, "train_labels")?;
        let te = slice(test_labels, n_test, "test_labels")?;
        let plan = splitgauge::remix(tr, te, classes, seed).or_status()?;
        *out = Box::into_raw(Box::new(SgRemixPlan(plan)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_remix_plan_json(p: *const SgRemixPlan, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        let p = borrow(p, "plan")?;
        let out = out_ptr(out, "out")?;
        *out = into_c_string(p.0.to_json().or_status()?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_remix_plan_free(p: *mut SgRemixPlan) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
