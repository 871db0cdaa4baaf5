//! C ABI over `neumann-fft`.
//!
//! Objects cross the boundary as opaque handles released with their
//! `*_free` function. Every fallible call returns an [`NfStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`nf_last_error`]. Enumerations are passed as plain integers and
//! validated on entry.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use neumann_fft::ratemap;
use neumann_fft::schemes::{self, Criterion, EmForm, SchemeKind, SolveOptions, SolveReport, SolveStatus};
use neumann_fft::series;
use neumann_fft::{Error, GreenVariant, MicroKind, Microstructure};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Contrast outside the scheme's or formula's domain.
    Domain = 3,
    Io = 4,
    /// Internal failure; the library state is unchanged.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum NfScheme {
    B = 0,
    Ms = 1,
    Em = 2,
    /// EM iterated on the polarization field (solve only).
    EmPolarization = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum NfGreen {
    Continuous = 0,
    Mueller = 1,
    Willot = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum NfCriterion {
    Div = 0,
    Diff = 1,
    Coef = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum NfMicroKind {
    Obnosov = 0,
    Checkerboard = 1,
    FourDisks = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfSolveStatus {
    Converged = 0,
    MaxIter = 1,
    Diverged = 2,
}

/// One iteration of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NfSolveRow {
    pub k: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub coef: f64,
    pub z_eff: f64,
}

/// Convergence rates; `r_em` is NaN when undefined (`z < 0`).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NfRates {
    pub r_b: f64,
    pub r_ms: f64,
    pub r_em: f64,
}

/// Opaque two-phase microstructure.
pub struct NfMicro(Microstructure);

/// Opaque solve report.
pub struct NfReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: NfStatus, msg: &str) -> NfStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> NfStatus {
    let status = match &e {
        Error::Io(_) | Error::Raster(_) => NfStatus::Io,
        Error::Domain(_) | Error::BranchCut(_) | Error::SingularReference(_) => NfStatus::Domain,
        _ => NfStatus::InvalidArgument,
    };
    fail(status, &e.to_string())
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), NfStatus>) -> NfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(NfStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, NfStatus>;
}

impl<T> OrStatus<T> for neumann_fft::Result<T> {
    fn or_status(self) -> Result<T, NfStatus> {
        self.map_err(from_error)
    }
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), NfStatus> {
    if p.is_null() {
        Err(fail(NfStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn bad(msg: String) -> NfStatus {
    fail(NfStatus::InvalidArgument, &msg)
}

fn parse_scheme(v: i32) -> Result<(SchemeKind, EmForm), NfStatus> {
    Ok(match v {
        0 => (SchemeKind::B, EmForm::Classic),
        1 => (SchemeKind::Ms, EmForm::Classic),
        2 => (SchemeKind::Em, EmForm::Classic),
        3 => (SchemeKind::Em, EmForm::Polarization),
        _ => return Err(bad(format!("unknown scheme {v}"))),
    })
}

fn parse_series_scheme(v: i32) -> Result<SchemeKind, NfStatus> {
    match parse_scheme(v)? {
        (k, EmForm::Classic) => Ok(k),
        _ => Err(bad("series take NF_SCHEME_B, NF_SCHEME_MS or NF_SCHEME_EM".into())),
    }
}

fn parse_green(v: i32) -> Result<GreenVariant, NfStatus> {
    match v {
        0 => Ok(GreenVariant::Continuous),
        1 => Ok(GreenVariant::Mueller),
        2 => Ok(GreenVariant::Willot),
        _ => Err(bad(format!("unknown Green operator {v}"))),
    }
}

fn parse_criterion(v: i32) -> Result<Criterion, NfStatus> {
    match v {
        0 => Ok(Criterion::Div),
        1 => Ok(Criterion::Diff),
        2 => Ok(Criterion::Coef),
        _ => Err(bad(format!("unknown criterion {v}"))),
    }
}

fn parse_micro_kind(v: i32) -> Result<MicroKind, NfStatus> {
    match v {
        0 => Ok(MicroKind::Obnosov),
        1 => Ok(MicroKind::Checkerboard),
        2 => Ok(MicroKind::FourDisks),
        _ => Err(bad(format!("unknown microstructure kind {v}"))),
    }
}

unsafe fn c_path<'a>(p: *const c_char) -> Result<&'a str, NfStatus> {
    nonnull(p, "path")?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| bad("path is not valid UTF-8".into()))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Generates a microstructure `kind` (an `NfMicroKind`) on an `n` x `n` grid.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn nf_micro_generate(kind: i32, n: usize, out: *mut *mut NfMicro) -> NfStatus {
    guard(|| {
        nonnull(out, "out")?;
        let m = Microstructure::generate(parse_micro_kind(kind)?, n).or_status()?;
        *out = Box::into_raw(Box::new(NfMicro(m)));
        Ok(())
    })
}

/// Loads a binary PGM raster; values >= 128 are phase 1.
///
/// # Safety
/// `path` must be a nul-terminated string, `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn nf_micro_load_pgm(path: *const c_char, out: *mut *mut NfMicro) -> NfStatus {
    guard(|| {
        nonnull(out, "out")?;
        let m = Microstructure::load_pgm(c_path(path)?).or_status()?;
        *out = Box::into_raw(Box::new(NfMicro(m)));
        Ok(())
    })
}

/// # Safety
/// `micro` must come from this library; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn nf_micro_save_pgm(micro: *const NfMicro, path: *const c_char) -> NfStatus {
    guard(|| {
        nonnull(micro, "micro")?;
        (*micro).0.save_pgm(c_path(path)?).or_status()
    })
}

/// Grid size and phase-1 volume fraction.
///
/// # Safety
/// `micro` must come from this library; outputs may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn nf_micro_info(
    micro: *const NfMicro,
    n1: *mut usize,
    n2: *mut usize,
    volume_fraction: *mut f64,
) -> NfStatus {
    guard(|| {
        nonnull(micro, "micro")?;
        let m = &(*micro).0;
        if !n1.is_null() {
            *n1 = m.grid().n1();
        }
        if !n2.is_null() {
            *n2 = m.grid().n2();
        }
        if !volume_fraction.is_null() {
            *volume_fraction = m.volume_fraction();
        }
        Ok(())
    })
}

/// # Safety
/// `micro` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_micro_free(micro: *mut NfMicro) {
    if !micro.is_null() {
        drop(Box::from_raw(micro));
    }
}

unsafe fn write_series(
    s: &series::SeriesCoefficients,
    b_out: *mut f64,
    d_out: *mut f64,
) {
    let len = s.d.len();
    if !b_out.is_null() {
        ptr::copy_nonoverlapping(s.b.as_ptr(), b_out, len);
    }
    if !d_out.is_null() {
        ptr::copy_nonoverlapping(s.d.as_ptr(), d_out, len);
    }
}

/// Numerically extracted `b_0..b_order` and `d_0..d_order`.
///
/// # Safety
/// `micro` must come from this library; `b_out` and `d_out` must each be
/// null or hold `order + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn nf_series_numerical(
    micro: *const NfMicro,
    scheme: i32,
    green: i32,
    order: usize,
    b_out: *mut f64,
    d_out: *mut f64,
) -> NfStatus {
    guard(|| {
        nonnull(micro, "micro")?;
        let s = series::numerical_coefficients(parse_series_scheme(scheme)?, &(*micro).0, parse_green(green)?, order)
            .or_status()?;
        write_series(&s, b_out, d_out);
        Ok(())
    })
}

/// Exact coefficients of the square-inclusion cell, rounded to double.
///
/// # Safety
/// `b_out` and `d_out` must each be null or hold `order + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn nf_series_analytic(
    scheme: i32,
    order: usize,
    b_out: *mut f64,
    d_out: *mut f64,
) -> NfStatus {
    guard(|| {
        let s = series::analytic_obnosov(parse_series_scheme(scheme)?, order).or_status()?;
        write_series(&s, b_out, d_out);
        Ok(())
    })
}

/// `√((1 + 3z) / (3 + z))`; `NF_STATUS_DOMAIN` on the branch cut.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn nf_obnosov_exact(z: f64, out: *mut f64) -> NfStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = series::obnosov_exact(z).or_status()?;
        Ok(())
    })
}

/// Runs a scheme with loading `e1`. A diverged run still returns
/// `NF_STATUS_OK`; query [`nf_report_status`].
///
/// # Safety
/// `micro` must come from this library; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn nf_solve(
    micro: *const NfMicro,
    scheme: i32,
    green: i32,
    z: f64,
    criterion: i32,
    tol: f64,
    max_iter: usize,
    out: *mut *mut NfReport,
) -> NfStatus {
    guard(|| {
        nonnull(micro, "micro")?;
        nonnull(out, "out")?;
        let (kind, em_form) = parse_scheme(scheme)?;
        let opts = SolveOptions {
            variant: parse_green(green)?,
            criterion: parse_criterion(criterion)?,
            tol,
            max_iter,
            loading: schemes::E1,
            em_form,
        };
        let r = schemes::solve(kind, &(*micro).0, z, &opts).or_status()?;
        *out = Box::into_raw(Box::new(NfReport(r)));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library; `len` and `status` may be null.
#[no_mangle]
pub unsafe extern "C" fn nf_report_info(
    report: *const NfReport,
    len: *mut usize,
    status: *mut NfSolveStatus,
) -> NfStatus {
    guard(|| {
        nonnull(report, "report")?;
        let r = &(*report).0;
        if !len.is_null() {
            *len = r.rows.len();
        }
        if !status.is_null() {
            *status = match r.status {
                SolveStatus::Converged => NfSolveStatus::Converged,
                SolveStatus::MaxIter => NfSolveStatus::MaxIter,
                SolveStatus::Diverged => NfSolveStatus::Diverged,
            };
        }
        Ok(())
    })
}

/// Terminal status of a solve.
///
/// # Safety
/// As [`nf_report_info`].
#[no_mangle]
pub unsafe extern "C" fn nf_report_status(report: *const NfReport, status: *mut NfSolveStatus) -> NfStatus {
    if status.is_null() {
        return fail(NfStatus::NullPointer, "status is null");
    }
    nf_report_info(report, ptr::null_mut(), status)
}

/// Row `index` (0-based) of a report.
///
/// # Safety
/// `report` must come from this library; `row` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn nf_report_row(report: *const NfReport, index: usize, row: *mut NfSolveRow) -> NfStatus {
    guard(|| {
        nonnull(report, "report")?;
        nonnull(row, "row")?;
        let rows = &(*report).0.rows;
        let r = rows
            .get(index)
            .ok_or_else(|| bad(format!("row {index} out of range ({} rows)", rows.len())))?;
        *row = NfSolveRow {
            k: r.k,
            delta1: r.delta1,
            delta2: r.delta2,
            coef: r.coef,
            z_eff: r.z_eff,
        };
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_report_free(report: *mut NfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Rates `ρ/|t|` of the three schemes for singularities in `[-β, -1/β]`.
/// `beta` may be `INFINITY`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn nf_rates(beta: f64, z: f64, out: *mut NfRates) -> NfStatus {
    guard(|| {
        nonnull(out, "out")?;
        let r = ratemap::rates(beta, z).or_status()?;
        *out = NfRates {
            r_b: r.r_b,
            r_ms: r.r_ms,
            r_em: r.r_em.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Contrast thresholds; `z1` and `z2` are NaN when `β < 3`.
///
/// # Safety
/// Outputs must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn nf_regime_thresholds(beta: f64, z0: *mut f64, z1: *mut f64, z2: *mut f64) -> NfStatus {
    guard(|| {
        nonnull(z0, "z0")?;
        nonnull(z1, "z1")?;
        nonnull(z2, "z2")?;
        let t = ratemap::regime_thresholds(beta).or_status()?;
        let (a, b) = t.window.unwrap_or((f64::NAN, f64::NAN));
        *z0 = t.z0;
        *z1 = a;
        *z2 = b;
        Ok(())
    })
}
