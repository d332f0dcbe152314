//! C interface to `deformexp`.
//!
//! Every function returns a [`DxStatus`]; results are written through out
//! pointers. On failure the message is kept per thread and read with
//! [`dx_last_error`]. Objects are opaque handles released by their `_free`
//! function. Matrices cross the boundary as row-major real and imaginary
//! parts of length `dim * dim`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use deformexp::lab::{self, LabFunction, SearchConfig};
use deformexp::state::{self, Direction, FaithfulDensity, ModelConfig, ModelPoint};
use deformexp::{io, scalar, DeformationParameter, Error, HermitianMatrix, ScalarEvalConfig};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DxStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Malformed = 3,
    NotHermitian = 4,
    DimensionMismatch = 5,
    InvalidTrace = 6,
    NotFaithful = 7,
    NotCentered = 8,
    NoConvergence = 9,
    SearchExhausted = 10,
    InvalidConfig = 11,
    Io = 12,
    Panic = 13,
}

impl From<&Error> for DxStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain { .. } => DxStatus::Domain,
            Error::NoConvergence { .. } => DxStatus::NoConvergence,
            Error::DimensionMismatch(..) => DxStatus::DimensionMismatch,
            Error::NotHermitian(_) => DxStatus::NotHermitian,
            Error::Malformed(_) | Error::Json(_) => DxStatus::Malformed,
            Error::InvalidTrace(_) => DxStatus::InvalidTrace,
            Error::NotFaithful(_) => DxStatus::NotFaithful,
            Error::NotCentered(_) => DxStatus::NotCentered,
            Error::InvalidConfig(_) => DxStatus::InvalidConfig,
            Error::SearchExhausted { .. } => DxStatus::SearchExhausted,
            Error::Io(_) => DxStatus::Io,
        }
    }
}

/// Functions accepted by [`dx_counterexample_json`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DxLabFunction {
    UMinusExpPhi = 0,
    LogExpPhi = 1,
    LogPhi = 2,
    Identity = 3,
}

fn lab_function(code: u32) -> Result<LabFunction, Error> {
    Ok(match code {
        0 => LabFunction::UMinusExpPhi,
        1 => LabFunction::LogExpPhi,
        2 => LabFunction::LogPhi,
        3 => LabFunction::Identity,
        _ => return Err(Error::InvalidConfig(format!("unknown function code {code}"))),
    })
}

/// A Hermitian matrix.
pub struct DxMatrix(HermitianMatrix);

/// A faithful density matrix.
pub struct DxDensity(FaithfulDensity);

/// A point `ω_X` of the family together with its density and settings.
pub struct DxModel {
    rho: FaithfulDensity,
    point: ModelPoint,
    cfg: ModelConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DxStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            DxStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            DxStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            DxStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `φ(u) = u/(λ+u)`.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_phi(u: f64, lambda: f64, result: *mut f64) -> DxStatus {
    guard(|| {
        *out(result, "result")? = scalar::phi(u, DeformationParameter::new(lambda)?)?;
        Ok(())
    })
}

/// `log_φ(v) = v − 1 + λ ln v`.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_log_phi(v: f64, lambda: f64, result: *mut f64) -> DxStatus {
    guard(|| {
        *out(result, "result")? = scalar::log_phi(v, DeformationParameter::new(lambda)?)?;
        Ok(())
    })
}

/// `exp_φ(u)` at the default solver settings.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_exp_phi(u: f64, lambda: f64, result: *mut f64) -> DxStatus {
    guard(|| {
        let p = DeformationParameter::new(lambda)?;
        *out(result, "result")? = scalar::exp_phi(u, p, &ScalarEvalConfig::default())?;
        Ok(())
    })
}

/// `λ(3 − e)/(e² − 3e + 1)`.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_violation_threshold(lambda: f64, result: *mut f64) -> DxStatus {
    guard(|| {
        *out(result, "result")? = lab::violation_threshold(DeformationParameter::new(lambda)?);
        Ok(())
    })
}

/// Builds a Hermitian matrix from row-major parts; `im` may be null for a
/// real matrix.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `dim * dim` doubles; `matrix`
/// must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_matrix_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    matrix: *mut *mut DxMatrix,
) -> DxStatus {
    guard(|| {
        let slot = out(matrix, "matrix")?;
        if re.is_null() {
            return Err(Fail::Null("re"));
        }
        let len = dim.checked_mul(dim).ok_or_else(|| Error::Malformed("dimension overflows".into()))?;
        let re = std::slice::from_raw_parts(re, len);
        let zeros = vec![0.0; len];
        let im = if im.is_null() { &zeros[..] } else { std::slice::from_raw_parts(im, len) };
        let m = HermitianMatrix::from_parts(dim, re, im)?;
        *slot = boxed(DxMatrix(m));
        Ok(())
    })
}

/// Parses the JSON matrix format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `matrix` must be null or valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_matrix_from_json(json: *const c_char, matrix: *mut *mut DxMatrix) -> DxStatus {
    guard(|| {
        let slot = out(matrix, "matrix")?;
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = std::ffi::CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::Malformed(format!("JSON is not UTF-8: {e}")))?;
        *slot = boxed(DxMatrix(io::matrix_from_json(text)?));
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dx_matrix_free(matrix: *mut DxMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Dimension of a matrix, 0 for null.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dx_matrix_dim(matrix: *const DxMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.dim())
}

/// Copies the row-major parts into `re` and `im` (each `dim * dim`); either
/// may be null to skip it.
///
/// # Safety
/// `matrix` must be a live handle; non-null buffers must hold `dim * dim`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn dx_matrix_copy(matrix: *const DxMatrix, re: *mut f64, im: *mut f64) -> DxStatus {
    guard(|| {
        let m = &deref(matrix, "matrix")?.0;
        copy_parts(m, re, im);
        Ok(())
    })
}

unsafe fn copy_parts(m: &HermitianMatrix, re: *mut f64, im: *mut f64) {
    let len = m.dim() * m.dim();
    if !re.is_null() {
        std::slice::from_raw_parts_mut(re, len).copy_from_slice(&m.re_rows());
    }
    if !im.is_null() {
        std::slice::from_raw_parts_mut(im, len).copy_from_slice(&m.im_rows());
    }
}

/// Validates `matrix` as a faithful density (unit trace, positive).
///
/// # Safety
/// `matrix` must be a live handle; `density` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_density_new(matrix: *const DxMatrix, density: *mut *mut DxDensity) -> DxStatus {
    guard(|| {
        let slot = out(density, "density")?;
        let m = deref(matrix, "matrix")?.0.clone();
        *slot = boxed(DxDensity(FaithfulDensity::new(m)?));
        Ok(())
    })
}

/// # Safety
/// `density` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dx_density_free(density: *mut DxDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

unsafe fn direction(rho: &FaithfulDensity, k: *const DxMatrix, center: bool) -> Result<Direction, Fail> {
    let k = &deref(k, "k")?.0;
    Ok(if center {
        state::center_direction(rho, k)?
    } else {
        Direction::new(rho, k.clone())?
    })
}

fn model_config(lambda: f64) -> Result<ModelConfig, Error> {
    Ok(ModelConfig::with_lambda(DeformationParameter::new(lambda)?))
}

/// `α(K)` with `tr(ρ exp_φ(K − α)) = 1`. With `center` nonzero an
/// uncentered `K` is accepted and `α(K)` includes the shift `tr(ρK)`;
/// otherwise it is rejected with [`DxStatus::NotCentered`].
///
/// # Safety
/// Handles must be live; `alpha` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_solve_alpha(
    density: *const DxDensity,
    k: *const DxMatrix,
    lambda: f64,
    center: bool,
    alpha: *mut f64,
) -> DxStatus {
    guard(|| {
        let slot = out(alpha, "alpha")?;
        let rho = &deref(density, "density")?.0;
        let cfg = model_config(lambda)?;
        *slot = if center {
            state::solve_alpha_uncentered(rho, &deref(k, "k")?.0, &cfg)?
        } else {
            state::solve_alpha(&direction(rho, k, false)?, &cfg)?
        };
        Ok(())
    })
}

/// Builds the state for a centered direction `K`.
///
/// # Safety
/// Handles must be live; `model` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_model_new(
    density: *const DxDensity,
    k: *const DxMatrix,
    lambda: f64,
    model: *mut *mut DxModel,
) -> DxStatus {
    guard(|| {
        let slot = out(model, "model")?;
        let rho = deref(density, "density")?.0.clone();
        let cfg = model_config(lambda)?;
        let d = direction(&rho, k, false)?;
        let point = state::make_state(&rho, &d, &cfg)?;
        *slot = boxed(DxModel { rho, point, cfg });
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dx_model_free(model: *mut DxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `alpha` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_model_alpha(model: *const DxModel, alpha: *mut f64) -> DxStatus {
    guard(|| {
        *out(alpha, "alpha")? = deref(model, "model")?.point.alpha;
        Ok(())
    })
}

/// Copies the density `σ` of the state.
///
/// # Safety
/// `model` must be a live handle; non-null buffers must hold `dim * dim`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn dx_model_sigma(model: *const DxModel, re: *mut f64, im: *mut f64) -> DxStatus {
    guard(|| {
        copy_parts(&deref(model, "model")?.point.sigma, re, im);
        Ok(())
    })
}

/// `z = tr(ρ φ(Y))`.
///
/// # Safety
/// `model` must be a live handle; `z` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_model_escort_z(model: *const DxModel, z: *mut f64) -> DxStatus {
    guard(|| {
        let slot = out(z, "z")?;
        let m = deref(model, "model")?;
        *slot = state::escort(&m.rho, &m.point, &m.cfg)?.z;
        Ok(())
    })
}

/// `d/dt α(tK)` at `t` for the direction the model was built from.
///
/// # Safety
/// `model` must be a live handle; `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_model_alpha_derivative(model: *const DxModel, t: f64, result: *mut f64) -> DxStatus {
    guard(|| {
        let slot = out(result, "result")?;
        let m = deref(model, "model")?;
        *slot = state::alpha_derivative(&m.rho, &m.point.direction, t, &m.cfg)?;
        Ok(())
    })
}

/// Searches for a certificate that `function` (a `DxLabFunction` value) is
/// not operator monotone and returns it as JSON in `json`, to be released
/// with [`dx_string_free`].
///
/// # Safety
/// `json` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dx_counterexample_json(
    function: u32,
    lambda: f64,
    seed: u64,
    json: *mut *mut c_char,
) -> DxStatus {
    guard(|| {
        let slot = out(json, "json")?;
        let search = SearchConfig {
            seed,
            ..SearchConfig::with_lambda(DeformationParameter::new(lambda)?)
        };
        let sc = ScalarEvalConfig::default();
        let cert = lab::build_counterexample(lab_function(function)?, &search, &sc)?;
        let reval = cert.revalidate(&sc)?;
        let text = serde_json::to_string(&io::CertificateFile::new(&cert, Some(reval))).map_err(Error::from)?;
        *slot = CString::new(text).map_err(|e| Error::Malformed(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
