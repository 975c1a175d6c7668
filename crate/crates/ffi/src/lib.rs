//! C ABI over the `lmnpt` estimators.
//!
//! Samples and fitted models are opaque heap handles created by
//! `lmnpt_sample_new` / `lmnpt_model_fit` and released with the matching
//! `_free` function. Every fallible call returns an [`LmnptStatus`]; on
//! failure a description is available from `lmnpt_last_error` on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lmnpt::cornish_fisher::{cf_cubic_coefficients, cf_validity, sample_central_moments};
use lmnpt::npt::{self, evaluate_curve, fit_lmnpt, NptCoefficients};
use lmnpt::{inverse_normal_cdf, sample_lmoments, Error, SampleSet, ValidityKind, ValidityStatus};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmnptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientSample = 3,
    Degenerate = 4,
    Domain = 5,
    Panic = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmnptMethod {
    Lmnpt = 0,
    CornishFisher = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmnptValidityKind {
    Valid = 0,
    InvalidTau4Low = 1,
    InvalidTau4High = 2,
    InvalidDiscriminant = 3,
    InvalidCurvature = 4,
    UndefinedRatios = 5,
}

impl From<ValidityKind> for LmnptValidityKind {
    fn from(k: ValidityKind) -> Self {
        match k {
            ValidityKind::Valid => Self::Valid,
            ValidityKind::InvalidTau4Low => Self::InvalidTau4Low,
            ValidityKind::InvalidTau4High => Self::InvalidTau4High,
            ValidityKind::InvalidDiscriminant => Self::InvalidDiscriminant,
            ValidityKind::InvalidCurvature => Self::InvalidCurvature,
            ValidityKind::UndefinedRatios => Self::UndefinedRatios,
        }
    }
}

/// Sample L-moments. `tau3`/`tau4` are NaN when `ratios_defined` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LmnptLMoments {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub tau3: f64,
    pub tau4: f64,
    pub ratios_defined: bool,
}

/// Validity verdict. For LMNPT the shape fields are τ3, τ4 and h(τ3); for
/// Cornish-Fisher they are skewness, excess kurtosis and the discriminant.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmnptValidity {
    pub kind: LmnptValidityKind,
    pub shape1: f64,
    pub shape2: f64,
    pub discriminant: f64,
}

impl From<ValidityStatus> for LmnptValidity {
    fn from(v: ValidityStatus) -> Self {
        Self {
            kind: v.kind.into(),
            shape1: v.tau3,
            shape2: v.tau4,
            discriminant: v.h_value,
        }
    }
}

/// Q(p) = a + b·z + c·z² + d·z³ with z = Φ⁻¹(p).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LmnptCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Opaque validated sample.
pub struct LmnptSample {
    inner: SampleSet,
}

/// Opaque fitted percentile function.
pub struct LmnptModel {
    coeffs: NptCoefficients,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> LmnptStatus {
    match e {
        Error::InsufficientSample { .. } => LmnptStatus::InsufficientSample,
        Error::Degenerate(_) => LmnptStatus::Degenerate,
        Error::Domain { .. } => LmnptStatus::Domain,
        Error::InvalidSampleValue { .. } | Error::InvalidGrid(_) | Error::Config(_) => {
            LmnptStatus::InvalidArgument
        }
        _ => LmnptStatus::Internal,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard<F>(body: F) -> LmnptStatus
where
    F: FnOnce() -> Result<(), (LmnptStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LmnptStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            LmnptStatus::Panic
        }
    }
}

fn lift(e: Error) -> (LmnptStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LmnptStatus, String) {
    (LmnptStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failing call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lmnpt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lmnpt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `len` travel times into a new sample handle.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_sample_new(
    values: *const f64,
    len: usize,
    out: *mut *mut LmnptSample,
) -> LmnptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if values.is_null() && len > 0 {
            return Err(null("values"));
        }
        let data = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        let inner = SampleSet::new(data).map_err(lift)?;
        *out = Box::into_raw(Box::new(LmnptSample { inner }));
        Ok(())
    })
}

/// # Safety
/// `sample` must be null or a handle from `lmnpt_sample_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_sample_free(sample: *mut LmnptSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_sample_len(
    sample: *const LmnptSample,
    out: *mut usize,
) -> LmnptStatus {
    guard(|| {
        let s = sample.as_ref().ok_or_else(|| null("sample"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.inner.len();
        Ok(())
    })
}

/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_sample_lmoments(
    sample: *const LmnptSample,
    out: *mut LmnptLMoments,
) -> LmnptStatus {
    guard(|| {
        let s = sample.as_ref().ok_or_else(|| null("sample"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let lm = sample_lmoments(&s.inner).map_err(lift)?;
        let ratios = lm.ratios();
        *out = LmnptLMoments {
            l1: lm.l1,
            l2: lm.l2,
            l3: lm.l3,
            l4: lm.l4,
            tau3: ratios.map_or(f64::NAN, |r| r.0),
            tau4: ratios.map_or(f64::NAN, |r| r.1),
            ratios_defined: ratios.is_some(),
        };
        Ok(())
    })
}

/// LMNPT validity-domain check for an L-skewness / L-kurtosis pair.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_validity(
    tau3: f64,
    tau4: f64,
    out: *mut LmnptValidity,
) -> LmnptStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = npt::lmnpt_validity(tau3, tau4).into();
        Ok(())
    })
}

/// Fits a percentile function to the sample with the chosen method.
///
/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_model_fit(
    sample: *const LmnptSample,
    method: LmnptMethod,
    out: *mut *mut LmnptModel,
) -> LmnptStatus {
    guard(|| {
        let s = sample.as_ref().ok_or_else(|| null("sample"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let coeffs = match method {
            LmnptMethod::Lmnpt => {
                let lm = sample_lmoments(&s.inner).map_err(lift)?;
                fit_lmnpt(&lm).map_err(lift)?
            }
            LmnptMethod::CornishFisher => {
                let cm = sample_central_moments(&s.inner).map_err(lift)?;
                let [a, b, c, d] = cf_cubic_coefficients(&cm);
                NptCoefficients {
                    a,
                    b,
                    c,
                    d,
                    validity: cf_validity(cm.skewness, cm.excess_kurtosis),
                }
            }
        };
        *out = Box::into_raw(Box::new(LmnptModel { coeffs }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from `lmnpt_model_fit` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_model_free(model: *mut LmnptModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_model_coefficients(
    model: *const LmnptModel,
    out: *mut LmnptCoefficients,
) -> LmnptStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let [a, b, c, d] = m.coeffs.as_array();
        *out = LmnptCoefficients { a, b, c, d };
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_model_validity(
    model: *const LmnptModel,
    out: *mut LmnptValidity,
) -> LmnptStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.coeffs.validity.into();
        Ok(())
    })
}

/// Percentile at probability 0 < p < 1.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_model_quantile(
    model: *const LmnptModel,
    p: f64,
    out: *mut f64,
) -> LmnptStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let z = inverse_normal_cdf(p).map_err(lift)?;
        *out = m.coeffs.polynomial(z);
        Ok(())
    })
}

/// Evaluates the model on a strictly increasing grid in (0, 1).
/// `monotone` may be null.
///
/// # Safety
/// `grid` must hold `len` readable doubles and `values` `len` writable ones.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_model_curve(
    model: *const LmnptModel,
    grid: *const f64,
    len: usize,
    values: *mut f64,
    monotone: *mut bool,
) -> LmnptStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if grid.is_null() || values.is_null() {
            return Err(null("grid or values"));
        }
        if len == 0 {
            return Err((LmnptStatus::InvalidArgument, "empty grid".into()));
        }
        let grid = std::slice::from_raw_parts(grid, len);
        let curve = evaluate_curve(&m.coeffs, grid).map_err(lift)?;
        std::slice::from_raw_parts_mut(values, len).copy_from_slice(curve.values());
        if let Some(flag) = monotone.as_mut() {
            *flag = curve.is_monotone();
        }
        Ok(())
    })
}

/// Standard normal quantile.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lmnpt_inverse_normal_cdf(p: f64, out: *mut f64) -> LmnptStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = inverse_normal_cdf(p).map_err(lift)?;
        Ok(())
    })
}
