use std::ffi::{CStr, CString};
use std::ptr;

use lisce_ffi::*;

fn one() -> LisceComplex {
    LisceComplex { re: 1.0, im: 0.0 }
}

fn last_error() -> String {
    let p = lisce_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn crlb_matches_closed_form() {
    let mut out = LisceCrlb::default();
    assert_eq!(unsafe { lisce_crlb(4.0, 1.0, 2.0, &mut out) }, LisceStatus::Ok);
    assert!((out.re_h - 0.25).abs() < 1e-15);
    assert!((out.im_h - 0.2).abs() < 1e-15);
    assert!((out.eta - 1.25).abs() < 1e-15);
    assert!(lisce_last_error().is_null());
}

#[test]
fn bad_arguments_set_status_and_message() {
    let mut out = LisceCrlb::default();
    assert_eq!(unsafe { lisce_crlb(0.0, 1.0, 1.0, &mut out) }, LisceStatus::InvalidParameter);
    assert!(last_error().contains("energy1"));
    assert_eq!(unsafe { lisce_crlb(1.0, 1.0, 1.0, ptr::null_mut()) }, LisceStatus::NullPointer);

    let y = [one(), one()];
    let mut est = LisceEstimate::default();
    let status = unsafe { lisce_ls_estimate(&one(), 1, ptr::null(), 0, y.as_ptr(), &mut est) };
    assert_eq!(status, LisceStatus::InvalidParameter);
}

#[test]
fn ls_and_des_agree_on_feasible_data() {
    let y = [LisceComplex { re: 1.0, im: 0.0 }, LisceComplex { re: 3.0, im: 0.0 }];
    let mut ls = LisceEstimate::default();
    let mut des = LisceEstimate::default();
    unsafe {
        assert_eq!(lisce_ls_estimate(&one(), 1, &one(), 1, y.as_ptr(), &mut ls), LisceStatus::Ok);
        assert_eq!(
            lisce_des_estimate(&one(), 1, &one(), 1, y.as_ptr(), ptr::null(), &mut des),
            LisceStatus::Ok
        );
    }
    assert_eq!((ls.h.re, ls.eta.re), (1.0, 2.0));
    assert_eq!((des.h, des.eta), (ls.h, ls.eta));
    assert!(des.converged);
    assert_eq!((des.lambda, des.delta), (0.0, 0.0));
}

#[test]
fn des_config_round_trips_and_is_validated() {
    let mut cfg = unsafe { std::mem::zeroed::<LisceDualAscentConfig>() };
    assert_eq!(unsafe { lisce_dual_ascent_default(&mut cfg) }, LisceStatus::Ok);
    assert_eq!(cfg.t_max, 50);
    assert_eq!(cfg.schedule, 0);

    let y = [LisceComplex { re: -1.0, im: 0.0 }, LisceComplex { re: -0.4, im: 0.0 }];
    let mut est = LisceEstimate::default();
    cfg.t_max = 5000;
    cfg.tol = 1e-9;
    let status = unsafe { lisce_des_estimate(&one(), 1, &one(), 1, y.as_ptr(), &cfg, &mut est) };
    assert_eq!(status, LisceStatus::Ok);
    assert!(est.converged && est.delta > 0.0);
    assert!((est.h.re + 1.0).abs() < 1e-6 && (est.eta.re - 1.0).abs() < 1e-6);

    cfg.schedule = 7;
    let status = unsafe { lisce_des_estimate(&one(), 1, &one(), 1, y.as_ptr(), &cfg, &mut est) };
    assert_eq!(status, LisceStatus::InvalidParameter);
    assert!(last_error().contains("schedule"));
}

#[test]
fn experiment_handles_run_and_free() {
    let text = CString::new("trials = 200\nsnr_db = 0, 8\nseed = 5\n").unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        assert_eq!(lisce_experiment_from_config(text.as_ptr(), &mut exp), LisceStatus::Ok);
        assert!(!exp.is_null());
        assert_eq!(lisce_experiment_set_workers(exp, 2), LisceStatus::Ok);

        let mut rep = ptr::null_mut();
        assert_eq!(lisce_experiment_run(exp, &mut rep), LisceStatus::Ok);
        assert_eq!(lisce_report_len(rep), 2 * 2 * 3);
        let mut rec = LisceRecord::default();
        assert_eq!(lisce_report_record(rep, 0, &mut rec), LisceStatus::Ok);
        assert_eq!((rec.snr_db, rec.estimator, rec.component), (0.0, 0, 0));
        assert_eq!((rec.trials, rec.seed), (200, 5));
        assert!(rec.mse > 0.0 && rec.crlb > 0.0);
        assert_eq!(lisce_report_record(rep, 12, &mut rec), LisceStatus::OutOfRange);

        // same seed through the setters gives the same numbers
        let other = lisce_experiment_new();
        let snrs = [0.0, 8.0];
        assert_eq!(lisce_experiment_set_snr_db(other, snrs.as_ptr(), 2), LisceStatus::Ok);
        assert_eq!(lisce_experiment_set_trials(other, 200), LisceStatus::Ok);
        assert_eq!(lisce_experiment_set_seed(other, 5), LisceStatus::Ok);
        let mut rep2 = ptr::null_mut();
        assert_eq!(lisce_experiment_run(other, &mut rep2), LisceStatus::Ok);
        let mut rec2 = LisceRecord::default();
        for i in 0..lisce_report_len(rep) {
            lisce_report_record(rep, i, &mut rec);
            lisce_report_record(rep2, i, &mut rec2);
            assert_eq!(rec, rec2);
        }

        lisce_report_free(rep);
        lisce_report_free(rep2);
        lisce_experiment_free(exp);
        lisce_experiment_free(other);
        lisce_experiment_free(ptr::null_mut());
        lisce_report_free(ptr::null_mut());
    }
}

#[test]
fn config_errors_map_to_status_codes() {
    let mut exp = ptr::null_mut();
    let bad = CString::new("trials = 10\nnope = 1\n").unwrap();
    assert_eq!(unsafe { lisce_experiment_from_config(bad.as_ptr(), &mut exp) }, LisceStatus::Config);
    assert!(exp.is_null());
    assert!(last_error().contains("line 2"));

    let zero = CString::new("trials = 0\n").unwrap();
    assert_eq!(
        unsafe { lisce_experiment_from_config(zero.as_ptr(), &mut exp) },
        LisceStatus::InvalidParameter
    );
    assert_eq!(unsafe { lisce_experiment_from_config(ptr::null(), &mut exp) }, LisceStatus::NullPointer);

    let e = lisce_experiment_new();
    let mut rep = ptr::null_mut();
    unsafe {
        lisce_experiment_set_trials(e, 0);
        assert_eq!(lisce_experiment_run(e, &mut rep), LisceStatus::InvalidParameter);
        assert!(rep.is_null());
        lisce_experiment_free(e);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(lisce_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
