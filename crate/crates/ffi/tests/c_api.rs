use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use monisum_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(monisum_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn generated(n: usize, steps: usize) -> *mut MonisumTrace {
    let mut trace = ptr::null_mut();
    let st = unsafe { monisum_trace_generate(n, steps, 2, 3, 0.0, 0.01, 9, &mut trace) };
    assert_eq!(st, MonisumStatus::Ok, "{}", last_error());
    trace
}

#[test]
fn trace_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
    let trace = generated(6, 30);
    unsafe {
        assert_eq!(monisum_trace_write_csv(trace, path.as_ptr()), MonisumStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(
            monisum_trace_load_csv(path.as_ptr(), MonisumNormalization::Strict, &mut back),
            MonisumStatus::Ok
        );
        let (mut s, mut n, mut d) = (0, 0, 0);
        assert_eq!(monisum_trace_shape(back, &mut s, &mut n, &mut d), MonisumStatus::Ok);
        assert_eq!((s, n, d), (30, 6, 2));
        let (mut a, mut b) = (0.0, 0.0);
        monisum_trace_value(trace, 17, 4, 1, &mut a);
        monisum_trace_value(back, 17, 4, 1, &mut b);
        assert_eq!(a, b);
        assert_eq!(
            monisum_trace_value(back, 30, 0, 0, &mut b),
            MonisumStatus::InvalidArgument
        );
        monisum_trace_free(back);
        monisum_trace_free(trace);
    }
}

#[test]
fn missing_file_reports_io_and_names_path() {
    let path = CString::new("/nonexistent/monisum.csv").unwrap();
    let mut trace = ptr::null_mut();
    let st = unsafe { monisum_trace_load_csv(path.as_ptr(), MonisumNormalization::Strict, &mut trace) };
    assert_eq!(st, MonisumStatus::Io);
    assert!(last_error().contains("/nonexistent/monisum.csv"));
    assert!(trace.is_null());
}

#[test]
fn null_handles_are_rejected() {
    let mut out = 0.0;
    let st = unsafe { monisum_run_objective(ptr::null(), c"all".as_ptr(), &mut out) };
    assert_eq!(st, MonisumStatus::NullPointer);
    unsafe {
        monisum_trace_free(ptr::null_mut());
        monisum_run_free(ptr::null_mut());
    }
}

#[test]
fn config_and_run() {
    let trace = generated(8, 80);
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut config = ptr::null_mut();
        assert_eq!(monisum_config_new(&mut config), MonisumStatus::Ok);
        for (k, v) in [("w_init", "20"), ("w_retrain", "10"), ("horizons", "0,1,2"), ("budget", "1")] {
            let (k, v) = (CString::new(k).unwrap(), CString::new(v).unwrap());
            assert_eq!(monisum_config_set(config, k.as_ptr(), v.as_ptr()), MonisumStatus::Ok);
        }
        assert_eq!(
            monisum_config_set(config, c"nope".as_ptr(), c"1".as_ptr()),
            MonisumStatus::Config
        );
        assert!(last_error().contains("nope"));

        let mut run = ptr::null_mut();
        assert_eq!(monisum_run(config, trace, &mut run), MonisumStatus::Ok, "{}", last_error());
        let mut v = -1.0;
        assert_eq!(monisum_run_time_avg_rmse(run, 0, c"all".as_ptr(), &mut v), MonisumStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(monisum_run_objective(run, c"cpu".as_ptr(), &mut v), MonisumStatus::Ok);
        assert!(v.is_finite() && v >= 0.0);
        assert_eq!(monisum_run_intermediate_rmse(run, c"mem".as_ptr(), &mut v), MonisumStatus::Ok);
        assert_eq!(monisum_run_frequency(run, 3, &mut v), MonisumStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(
            monisum_run_time_avg_rmse(run, 9, c"all".as_ptr(), &mut v),
            MonisumStatus::InvalidArgument
        );
        let out_dir = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
        assert_eq!(monisum_run_write(run, out_dir.as_ptr()), MonisumStatus::Ok);
        assert!(dir.path().join("out/metrics.csv").exists());
        monisum_run_free(run);
        monisum_config_free(config);
        monisum_trace_free(trace);
    }
}

#[test]
fn short_trace_is_insufficient_data() {
    let trace = generated(5, 50);
    unsafe {
        let mut config = ptr::null_mut();
        monisum_config_new(&mut config);
        let mut run = ptr::null_mut();
        assert_eq!(monisum_run(config, trace, &mut run), MonisumStatus::InsufficientData);
        monisum_config_free(config);
        monisum_trace_free(trace);
    }
}

#[test]
fn transmitter_first_step_sends_then_tracks_queue() {
    unsafe {
        let mut tx = ptr::null_mut();
        assert_eq!(monisum_transmitter_new(0.3, 1e-12, 0.65, 1, &mut tx), MonisumStatus::Ok);
        let mut send = false;
        assert_eq!(monisum_transmitter_step(tx, [0.5].as_ptr(), 1, 1, &mut send), MonisumStatus::Ok);
        assert!(send);
        let mut q = 0.0;
        monisum_transmitter_queue(tx, &mut q);
        assert!((q - 0.7).abs() < 1e-15);
        assert_eq!(
            monisum_transmitter_step(tx, [0.5, 0.1].as_ptr(), 2, 2, &mut send),
            MonisumStatus::DimensionMismatch
        );
        monisum_transmitter_free(tx);

        assert_eq!(
            monisum_transmitter_new(1.5, 1e-12, 0.65, 1, &mut tx),
            MonisumStatus::InvalidArgument
        );
    }
}

#[test]
fn match_labels_picks_heaviest_permutation() {
    let w = [1.0, 5.0, 0.0, 4.0, 0.0, 1.0, 0.0, 1.0, 6.0];
    let mut perm = [9usize; 3];
    let st = unsafe { monisum_match_labels(w.as_ptr(), 3, perm.as_mut_ptr()) };
    assert_eq!(st, MonisumStatus::Ok);
    assert_eq!(perm, [1, 0, 2]);
    let bad = [1.0, -1.0, 0.0, 0.0];
    let st = unsafe { monisum_match_labels(bad.as_ptr(), 2, perm.as_mut_ptr()) };
    assert_eq!(st, MonisumStatus::InvalidArgument);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(monisum_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/monisum.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["monisum_run", "monisum_match_labels", "MONISUM_STATUS_OK", "monisum_last_error"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(status.success());
}
