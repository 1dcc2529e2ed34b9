//! C interface to `lisce`.
//!
//! Every fallible function returns a [`LisceStatus`]; on failure a message is
//! kept per thread and can be read with [`lisce_last_error`]. Experiments and
//! reports are opaque handles that the caller releases with the matching
//! `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use lisce::crlb::crlb_closed_form;
use lisce::estimators::{des_estimate, ls_estimate, DualAscentConfig, StepSchedule};
use lisce::harness::{run_experiment, Component, Estimator, ExperimentConfig, ExperimentReport};
use lisce::signal::{build_design_matrix, PilotFrame};
use lisce::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LisceStatus {
    Ok = 0,
    InvalidParameter = 1,
    SingularMatrix = 2,
    Dimension = 3,
    IncompleteData = 4,
    Config = 5,
    Io = 6,
    NullPointer = 7,
    InvalidUtf8 = 8,
    OutOfRange = 9,
    Panic = 10,
}

impl From<&Error> for LisceStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Self::InvalidParameter,
            Error::SingularMatrix { .. } => Self::SingularMatrix,
            Error::Dimension { .. } => Self::Dimension,
            Error::IncompleteData(_) => Self::IncompleteData,
            Error::Config { .. } => Self::Config,
            Error::Io(_) => Self::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

struct Failure(LisceStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(LisceStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LisceStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LisceStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LisceStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LisceStatus::Panic
        }
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lisce_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lisce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LisceComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for LisceComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<LisceComplex> for Complex64 {
    fn from(z: LisceComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Bounds for Re h, Im h and eta.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LisceCrlb {
    pub re_h: f64,
    pub im_h: f64,
    pub eta: f64,
}

/// Dual-ascent settings. `schedule` is 0 for constant steps and 1 for the
/// 1/sqrt(t+1) schedule.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LisceDualAscentConfig {
    pub eps0: f64,
    pub tau0: f64,
    pub t_max: usize,
    pub tol: f64,
    pub lambda0: f64,
    pub delta0: f64,
    pub feas_tol: f64,
    pub schedule: u32,
    pub domain_margin: f64,
    pub max_backoffs: usize,
}

impl From<&DualAscentConfig> for LisceDualAscentConfig {
    fn from(c: &DualAscentConfig) -> Self {
        Self {
            eps0: c.eps0,
            tau0: c.tau0,
            t_max: c.t_max,
            tol: c.tol,
            lambda0: c.lambda0,
            delta0: c.delta0,
            feas_tol: c.feas_tol,
            schedule: match c.schedule {
                StepSchedule::Constant => 0,
                StepSchedule::Diminishing => 1,
            },
            domain_margin: c.domain_margin,
            max_backoffs: c.max_backoffs,
        }
    }
}

fn dual_ascent_from(c: &LisceDualAscentConfig) -> Result<DualAscentConfig, Failure> {
    let schedule = match c.schedule {
        0 => StepSchedule::Constant,
        1 => StepSchedule::Diminishing,
        other => {
            return Err(Failure(LisceStatus::InvalidParameter, format!("unknown schedule {other}")));
        }
    };
    Ok(DualAscentConfig {
        eps0: c.eps0,
        tau0: c.tau0,
        t_max: c.t_max,
        tol: c.tol,
        lambda0: c.lambda0,
        delta0: c.delta0,
        feas_tol: c.feas_tol,
        schedule,
        domain_margin: c.domain_margin,
        max_backoffs: c.max_backoffs,
    })
}

/// Estimator output. For least squares `iterations` is 0, `converged` is
/// true and both multipliers are 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LisceEstimate {
    pub h: LisceComplex,
    pub eta: LisceComplex,
    pub iterations: usize,
    pub converged: bool,
    pub lambda: f64,
    pub delta: f64,
}

/// Estimator codes: 0 = LS, 1 = DES. Component codes: 0 = Re h, 1 = Im h, 2 = eta.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LisceRecord {
    pub snr_db: f64,
    pub estimator: u32,
    pub component: u32,
    pub mse: f64,
    pub crlb: f64,
    pub trials: usize,
    pub nonconverged: usize,
    pub seed: u64,
}

/// Opaque experiment configuration.
pub struct LisceExperiment {
    config: ExperimentConfig,
}

/// Opaque experiment result.
pub struct LisceReport {
    report: ExperimentReport,
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn frame_from(
    pilots1: *const LisceComplex,
    k1: usize,
    pilots2: *const LisceComplex,
    k2: usize,
) -> Result<PilotFrame, Failure> {
    let s1 = in_slice(pilots1, k1, "pilots1")?.iter().map(|z| (*z).into()).collect();
    let s2 = in_slice(pilots2, k2, "pilots2")?.iter().map(|z| (*z).into()).collect();
    Ok(PilotFrame::new(s1, s2)?)
}

/// Cramér–Rao bounds for pilot energies `energy1`, `energy2` and noise
/// variance `sigma_w2`.
///
/// # Safety
/// `out` must point to writable memory for one `LisceCrlb`.
#[no_mangle]
pub unsafe extern "C" fn lisce_crlb(energy1: f64, energy2: f64, sigma_w2: f64, out: *mut LisceCrlb) -> LisceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let b = crlb_closed_form(energy1, energy2, sigma_w2)?;
        *out = LisceCrlb {
            re_h: b.re_h,
            im_h: b.im_h,
            eta: b.eta,
        };
        Ok(())
    })
}

/// Writes the default dual-ascent settings.
///
/// # Safety
/// `out` must point to writable memory for one `LisceDualAscentConfig`.
#[no_mangle]
pub unsafe extern "C" fn lisce_dual_ascent_default(out: *mut LisceDualAscentConfig) -> LisceStatus {
    guard(|| {
        *out_ref(out, "out")? = (&DualAscentConfig::default()).into();
        Ok(())
    })
}

/// Least-squares estimate from `k1 + k2` observations.
///
/// # Safety
/// `pilots1` and `pilots2` must hold `k1` and `k2` values, `y` must hold
/// `k1 + k2` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lisce_ls_estimate(
    pilots1: *const LisceComplex,
    k1: usize,
    pilots2: *const LisceComplex,
    k2: usize,
    y: *const LisceComplex,
    out: *mut LisceEstimate,
) -> LisceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let frame = frame_from(pilots1, k1, pilots2, k2)?;
        let y: Vec<Complex64> = in_slice(y, k1 + k2, "y")?.iter().map(|z| (*z).into()).collect();
        let x = ls_estimate(&build_design_matrix(&frame), &y)?;
        *out = LisceEstimate {
            h: x.h.into(),
            eta: x.eta.into(),
            iterations: 0,
            converged: true,
            lambda: 0.0,
            delta: 0.0,
        };
        Ok(())
    })
}

/// Dual-ascent estimate. A null `config` selects the defaults.
///
/// # Safety
/// As for [`lisce_ls_estimate`]; `config` is either null or readable.
#[no_mangle]
pub unsafe extern "C" fn lisce_des_estimate(
    pilots1: *const LisceComplex,
    k1: usize,
    pilots2: *const LisceComplex,
    k2: usize,
    y: *const LisceComplex,
    config: *const LisceDualAscentConfig,
    out: *mut LisceEstimate,
) -> LisceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = match config.as_ref() {
            Some(c) => dual_ascent_from(c)?,
            None => DualAscentConfig::default(),
        };
        let frame = frame_from(pilots1, k1, pilots2, k2)?;
        let y: Vec<Complex64> = in_slice(y, k1 + k2, "y")?.iter().map(|z| (*z).into()).collect();
        let r = des_estimate(&build_design_matrix(&frame), &y, &cfg)?;
        *out = LisceEstimate {
            h: r.x_hat.h.into(),
            eta: r.x_hat.eta.into(),
            iterations: r.iterations,
            converged: r.converged,
            lambda: r.lambda(),
            delta: r.delta(),
        };
        Ok(())
    })
}

/// New experiment with the reference settings.
#[no_mangle]
pub extern "C" fn lisce_experiment_new() -> *mut LisceExperiment {
    Box::into_raw(Box::new(LisceExperiment {
        config: ExperimentConfig::default(),
    }))
}

/// Parses a `key = value` configuration text into a new experiment.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lisce_experiment_from_config(
    text: *const c_char,
    out: *mut *mut LisceExperiment,
) -> LisceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(LisceStatus::InvalidUtf8, e.to_string()))?;
        let parsed = lisce::cli::parse_config(text)?;
        *out = Box::into_raw(Box::new(LisceExperiment { config: parsed.config }));
        Ok(())
    })
}

unsafe fn experiment<'a>(exp: *mut LisceExperiment) -> Result<&'a mut ExperimentConfig, Failure> {
    Ok(&mut out_ref(exp, "experiment")?.config)
}

/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lisce_experiment_set_trials(exp: *mut LisceExperiment, trials: usize) -> LisceStatus {
    guard(|| {
        experiment(exp)?.trials = trials;
        Ok(())
    })
}

/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lisce_experiment_set_seed(exp: *mut LisceExperiment, seed: u64) -> LisceStatus {
    guard(|| {
        experiment(exp)?.master_seed = seed;
        Ok(())
    })
}

/// Worker threads for [`lisce_experiment_run`]; 0 uses every core.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lisce_experiment_set_workers(exp: *mut LisceExperiment, workers: usize) -> LisceStatus {
    guard(|| {
        experiment(exp)?.workers = workers;
        Ok(())
    })
}

/// # Safety
/// `exp` must be a live handle and `snr_db` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn lisce_experiment_set_snr_db(
    exp: *mut LisceExperiment,
    snr_db: *const f64,
    len: usize,
) -> LisceStatus {
    guard(|| {
        let list = in_slice(snr_db, len, "snr_db")?.to_vec();
        experiment(exp)?.snr_db_list = list;
        Ok(())
    })
}

/// Runs the sweep and returns a report handle through `out`.
///
/// # Safety
/// `exp` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lisce_experiment_run(exp: *const LisceExperiment, out: *mut *mut LisceReport) -> LisceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let exp = exp.as_ref().ok_or_else(|| null("experiment"))?;
        let report = run_experiment(&exp.config)?;
        *out = Box::into_raw(Box::new(LisceReport { report }));
        Ok(())
    })
}

/// # Safety
/// `exp` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lisce_experiment_free(exp: *mut LisceExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Number of records in a report; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lisce_report_len(report: *const LisceReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.records.len())
}

/// Number of warnings attached to a report.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lisce_report_warning_count(report: *const LisceReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.warnings.len())
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lisce_report_record(
    report: *const LisceReport,
    index: usize,
    out: *mut LisceRecord,
) -> LisceStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let records = &report.report.records;
        let r = records.get(index).ok_or_else(|| {
            Failure(
                LisceStatus::OutOfRange,
                format!("record {index} out of range ({} records)", records.len()),
            )
        })?;
        *out = LisceRecord {
            snr_db: r.snr_db,
            estimator: match r.estimator {
                Estimator::Ls => 0,
                Estimator::Des => 1,
            },
            component: match r.component {
                Component::ReH => 0,
                Component::ImH => 1,
                Component::Eta => 2,
            },
            mse: r.mse,
            crlb: r.crlb,
            trials: r.trials,
            nonconverged: r.nonconverged,
            seed: r.seed,
        };
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lisce_report_free(report: *mut LisceReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
