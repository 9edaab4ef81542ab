//! C ABI for the `interlace` crate.
//!
//! Every function returns an [`InterlaceStatus`]; results go through out
//! pointers. Ensembles and polynomials are opaque handles released with their
//! `_free` function. After a non-OK status, [`interlace_last_error_message`]
//! describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use interlace::discrepancy::{solve_kls, DiscrepancyInstance};
use interlace::engine::FiniteDistribution;
use interlace::io::EnsembleFile;
use interlace::lyapunov::{ks_r_partition, lyapunov_select, LyapunovInstance};
use interlace::mixed::{mixed_char_poly, quadratic_mixed_char_poly};
use interlace::{Error, HermitianMatrix, MatrixEnsemble, RealPolynomial};
use num_complex::Complex64;

const HERMITIAN_TOL: f64 = 1e-9;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterlaceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotHermitian = 3,
    NotPsd = 4,
    SizeGuard = 5,
    NotRealRooted = 6,
    NumericalFailure = 7,
    Parse = 8,
    /// Hypothesis of a bound not met (sum above identity, bad proportions, ...).
    Hypothesis = 9,
    BufferTooSmall = 10,
    Panic = 99,
}

/// Opaque matrix ensemble.
pub struct InterlaceEnsemble {
    inner: MatrixEnsemble,
}

/// Opaque real polynomial (ascending coefficients).
pub struct InterlacePolynomial {
    inner: RealPolynomial,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> InterlaceStatus {
    match e {
        Error::NotHermitian { .. } => InterlaceStatus::NotHermitian,
        Error::NotPsd { .. } => InterlaceStatus::NotPsd,
        Error::SizeGuard { .. } => InterlaceStatus::SizeGuard,
        Error::NotRealRooted { .. } => InterlaceStatus::NotRealRooted,
        Error::NumericalFailure(_) | Error::DescentIncrease { .. } => InterlaceStatus::NumericalFailure,
        Error::Parse(_) | Error::Validation { .. } => InterlaceStatus::Parse,
        Error::NotContraction { .. }
        | Error::SumExceedsIdentity { .. }
        | Error::BadProportions(_)
        | Error::EpsilonOutOfRange { .. }
        | Error::WeightOutOfRange { .. }
        | Error::QxNormalizationViolated(_)
        | Error::NotAboveRoots { .. } => InterlaceStatus::Hypothesis,
        _ => InterlaceStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (InterlaceStatus, String)>) -> InterlaceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InterlaceStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            InterlaceStatus::Panic
        }
    }
}

fn lib<T>(r: interlace::Result<T>) -> Result<T, (InterlaceStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (InterlaceStatus, String) {
    (InterlaceStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (InterlaceStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], (InterlaceStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn ensemble<'a>(e: *const InterlaceEnsemble) -> Result<&'a MatrixEnsemble, (InterlaceStatus, String)> {
    e.as_ref().map(|e| &e.inner).ok_or_else(|| null("ensemble"))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn interlace_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds an ensemble of `m` hermitian `dim x dim` matrices from row-major
/// real and imaginary parts (`m * dim * dim` values each; `im` may be null).
///
/// # Safety
/// `re` (and `im` when non-null) must point to `m * dim * dim` doubles; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn interlace_ensemble_new(
    dim: usize,
    m: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut InterlaceEnsemble,
) -> InterlaceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if dim == 0 || m == 0 {
            return Err((InterlaceStatus::InvalidArgument, "dim and m must be positive".into()));
        }
        let n = m * dim * dim;
        let re = slice(re, n, "re")?;
        let im = if im.is_null() { None } else { Some(slice(im, n, "im")?) };
        let mats = (0..m)
            .map(|k| {
                let entries: Vec<Vec<Complex64>> = (0..dim)
                    .map(|i| {
                        (0..dim)
                            .map(|j| {
                                let at = k * dim * dim + i * dim + j;
                                Complex64::new(re[at], im.map_or(0.0, |v| v[at]))
                            })
                            .collect()
                    })
                    .collect();
                HermitianMatrix::make_hermitian(&entries, HERMITIAN_TOL)
            })
            .collect::<interlace::Result<Vec<_>>>();
        let inner = lib(mats.and_then(MatrixEnsemble::new))?;
        *out = Box::into_raw(Box::new(InterlaceEnsemble { inner }));
        Ok(())
    })
}

/// Parses an ensemble file (JSON text, NUL-terminated).
///
/// # Safety
/// `json` must be a valid C string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn interlace_ensemble_from_json(json: *const c_char, out: *mut *mut InterlaceEnsemble) -> InterlaceStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (InterlaceStatus::Parse, e.to_string()))?;
        let inner = lib(EnsembleFile::from_json(text).and_then(|f| f.ensemble()))?;
        *out = Box::into_raw(Box::new(InterlaceEnsemble { inner }));
        Ok(())
    })
}

/// # Safety
/// `e` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn interlace_ensemble_free(e: *mut InterlaceEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `e` must be a live handle; `dim` and `len` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn interlace_ensemble_shape(e: *const InterlaceEnsemble, dim: *mut usize, len: *mut usize) -> InterlaceStatus {
    guard(|| {
        let e = ensemble(e)?;
        if dim.is_null() || len.is_null() {
            return Err(null("out"));
        }
        *dim = e.dim();
        *len = e.len();
        Ok(())
    })
}

/// `mu[s_1 A_1, ..., s_m A_m]`; `scalars` has one entry per matrix.
///
/// # Safety
/// `e` must be a live handle, `scalars` must point to `m` doubles and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn interlace_mixed_char_poly(
    e: *const InterlaceEnsemble,
    scalars: *const f64,
    m: usize,
    out: *mut *mut InterlacePolynomial,
) -> InterlaceStatus {
    guard(|| {
        let e = ensemble(e)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = slice(scalars, m, "scalars")?;
        let inner = lib(mixed_char_poly(e, s))?;
        *out = Box::into_raw(Box::new(InterlacePolynomial { inner }));
        Ok(())
    })
}

/// `mu_2[A_1, ..., A_m]`.
///
/// # Safety
/// `e` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn interlace_quadratic_mixed_char_poly(e: *const InterlaceEnsemble, out: *mut *mut InterlacePolynomial) -> InterlaceStatus {
    guard(|| {
        let e = ensemble(e)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = lib(quadratic_mixed_char_poly(e))?;
        *out = Box::into_raw(Box::new(InterlacePolynomial { inner }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn interlace_polynomial_free(p: *mut InterlacePolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the ascending coefficients into `buf`. `len` receives the number of
/// coefficients; `BufferTooSmall` is returned (with `len` set) when `cap` is short.
///
/// # Safety
/// `p` must be a live handle, `buf` must have room for `cap` doubles, `len`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn interlace_polynomial_coeffs(p: *const InterlacePolynomial, buf: *mut f64, cap: usize, len: *mut usize) -> InterlaceStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("polynomial"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        let c = p.inner.coeffs();
        *len = c.len();
        if cap < c.len() {
            return Err((InterlaceStatus::BufferTooSmall, format!("need {} coefficients, buffer holds {cap}", c.len())));
        }
        slice_mut(buf, c.len(), "buf")?.copy_from_slice(c);
        Ok(())
    })
}

/// Certified largest root (bracket width `tol`); fails when not real-rooted.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn interlace_polynomial_maxroot(p: *const InterlacePolynomial, tol: f64, out: *mut f64) -> InterlaceStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("polynomial"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err((InterlaceStatus::InvalidArgument, format!("tol must be positive, got {tol}")));
        }
        *out = lib(p.inner.maxroot_certified(tol))?;
        Ok(())
    })
}

/// Derandomized outcome for `||sum (s_i - E xi_i) A_i|| <= 4 sigma`.
///
/// Distributions are flattened: variable `i` has `support_sizes[i]` values and
/// probabilities, stored consecutively in `values` and `probs`.
/// `outcome` receives `m` chosen values.
///
/// # Safety
/// `e` must be a live handle; `support_sizes`, `outcome` hold `m` entries,
/// `values` and `probs` hold `sum support_sizes` entries; `achieved`, `bound`
/// are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn interlace_solve_kls(
    e: *const InterlaceEnsemble,
    values: *const f64,
    probs: *const f64,
    support_sizes: *const usize,
    reduce: bool,
    outcome: *mut f64,
    achieved: *mut f64,
    bound: *mut f64,
) -> InterlaceStatus {
    guard(|| {
        let e = ensemble(e)?;
        if achieved.is_null() || bound.is_null() {
            return Err(null("out"));
        }
        let m = e.len();
        let sizes = slice(support_sizes, m, "support_sizes")?;
        let total: usize = sizes.iter().sum();
        let vals = slice(values, total, "values")?;
        let ps = slice(probs, total, "probs")?;
        let mut at = 0;
        let mut dists = Vec::with_capacity(m);
        for (i, &n) in sizes.iter().enumerate() {
            dists.push(lib(FiniteDistribution::validated(vals[at..at + n].to_vec(), ps[at..at + n].to_vec(), i))?);
            at += n;
        }
        let out = slice_mut(outcome, m, "outcome")?;
        let res = lib(DiscrepancyInstance::new(e.clone(), dists).and_then(|inst| solve_kls(&inst, reduce)))?;
        out.copy_from_slice(&res.outcome);
        *achieved = res.achieved;
        *bound = res.bound;
        Ok(())
    })
}

/// Subset selection: `selected[i]` is set to 1 for `i` in `I_0`, else 0.
///
/// # Safety
/// `e` must be a live handle; `weights` and `selected` hold `m` entries;
/// `achieved`, `bound` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn interlace_lyapunov_select(
    e: *const InterlaceEnsemble,
    weights: *const f64,
    selected: *mut u8,
    achieved: *mut f64,
    bound: *mut f64,
) -> InterlaceStatus {
    guard(|| {
        let e = ensemble(e)?;
        if achieved.is_null() || bound.is_null() {
            return Err(null("out"));
        }
        let m = e.len();
        let w = slice(weights, m, "weights")?.to_vec();
        let sel = slice_mut(selected, m, "selected")?;
        let res = lib(LyapunovInstance::new(e.clone(), w).and_then(|inst| lyapunov_select(&inst)))?;
        sel.fill(0);
        for &i in &res.indices {
            sel[i] = 1;
        }
        *achieved = res.achieved;
        *bound = res.bound;
        Ok(())
    })
}

/// KS_r partition: `block_of[i]` receives the block of matrix `i`;
/// `block_norms[k]` and `bounds[k]` the norm of block `k` and its bound
/// `t_k (1 + sqrt(r eps))^2`.
///
/// # Safety
/// `e` must be a live handle; `proportions`, `block_norms`, `bounds` hold `r`
/// entries and `block_of` holds `m`.
#[no_mangle]
pub unsafe extern "C" fn interlace_ks_r_partition(
    e: *const InterlaceEnsemble,
    proportions: *const f64,
    r: usize,
    block_of: *mut usize,
    block_norms: *mut f64,
    bounds: *mut f64,
) -> InterlaceStatus {
    guard(|| {
        let e = ensemble(e)?;
        let t = slice(proportions, r, "proportions")?;
        let assign = slice_mut(block_of, e.len(), "block_of")?;
        let norms = slice_mut(block_norms, r, "block_norms")?;
        let bnds = slice_mut(bounds, r, "bounds")?;
        let res = lib(ks_r_partition(e, t))?;
        for (k, block) in res.blocks.iter().enumerate() {
            for &i in block {
                assign[i] = k;
            }
        }
        norms.copy_from_slice(&res.block_norms);
        bnds.copy_from_slice(&res.bounds);
        Ok(())
    })
}
