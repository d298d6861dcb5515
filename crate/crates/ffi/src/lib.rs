//! C ABI over the `monisum` simulator.
//!
//! Every fallible call returns a [`MonisumStatus`]; on failure the message
//! is kept per thread and read with [`monisum_last_error`]. Objects cross
//! the boundary as opaque handles, each with its own `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use libc::{c_char, c_double, size_t};
use monisum::clustering::{match_labels, SimilarityMatrix};
use monisum::pipeline::{run, write_run, ExperimentConfig, RunOutput};
use monisum::trace::{
    generate_synthetic, load_csv, write_csv, CsvSchema, Normalization, SyntheticSpec, TraceDataset,
};
use monisum::transmission::{TransmitterParams, TransmitterState};
use monisum::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonisumStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    InsufficientData = 6,
    DimensionMismatch = 7,
    Utf8 = 8,
    Panic = 9,
}

/// Input normalization for [`monisum_trace_load_csv`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonisumNormalization {
    Strict = 0,
    Clamp = 1,
    MaxDivide = 2,
}

pub struct MonisumTrace(TraceDataset);
pub struct MonisumConfig(ExperimentConfig);
pub struct MonisumRun(RunOutput);
pub struct MonisumTransmitter(TransmitterState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(MonisumStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            "io" => MonisumStatus::Io,
            "parse" => MonisumStatus::Parse,
            "config" => MonisumStatus::Config,
            "insufficient-data" => MonisumStatus::InsufficientData,
            "dimension-mismatch" => MonisumStatus::DimensionMismatch,
            _ => MonisumStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MonisumStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(f: F) -> MonisumStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MonisumStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(&format!("panic: {msg}"));
            MonisumStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MonisumStatus::Utf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn monisum_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn monisum_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn monisum_trace_load_csv(
    path: *const c_char,
    normalization: MonisumNormalization,
    out: *mut *mut MonisumTrace,
) -> MonisumStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let schema = CsvSchema {
            normalization: match normalization {
                MonisumNormalization::Strict => Normalization::Strict,
                MonisumNormalization::Clamp => Normalization::Clamp,
                MonisumNormalization::MaxDivide => Normalization::MaxDivide { pre_clamp: true },
            },
            ..CsvSchema::default()
        };
        let ds = load_csv(path, &schema)?;
        put(out, boxed(MonisumTrace(ds)), "out")
    })
}

/// Synthetic grouped trace with the default signal shape.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn monisum_trace_generate(
    n_nodes: size_t,
    n_steps: size_t,
    n_resources: size_t,
    n_groups: size_t,
    switch_probability: c_double,
    noise_std: c_double,
    seed: u64,
    out: *mut *mut MonisumTrace,
) -> MonisumStatus {
    guard(|| {
        let spec = SyntheticSpec {
            n_resources,
            switch_probability,
            noise_std,
            ..SyntheticSpec::new(n_nodes, n_steps, n_groups, seed)
        };
        let trace = generate_synthetic(&spec)?;
        put(out, boxed(MonisumTrace(trace.dataset)), "out")
    })
}

/// # Safety
/// `trace` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_trace_shape(
    trace: *const MonisumTrace,
    n_steps: *mut size_t,
    n_nodes: *mut size_t,
    n_resources: *mut size_t,
) -> MonisumStatus {
    guard(|| {
        let ds = &handle(trace, "trace")?.0;
        put(n_steps, ds.n_steps(), "n_steps")?;
        put(n_nodes, ds.n_nodes(), "n_nodes")?;
        put(n_resources, ds.n_resources(), "n_resources")
    })
}

/// Value at 0-based step `t`.
///
/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_trace_value(
    trace: *const MonisumTrace,
    t: size_t,
    node: size_t,
    resource: size_t,
    out: *mut c_double,
) -> MonisumStatus {
    guard(|| {
        let ds = &handle(trace, "trace")?.0;
        if t >= ds.n_steps() || node >= ds.n_nodes() || resource >= ds.n_resources() {
            return Err(Failure(
                MonisumStatus::InvalidArgument,
                format!("index (t={t}, node={node}, resource={resource}) out of range"),
            ));
        }
        put(out, ds.value(t, node, resource), "out")
    })
}

/// # Safety
/// `trace` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn monisum_trace_write_csv(trace: *const MonisumTrace, path: *const c_char) -> MonisumStatus {
    guard(|| {
        let ds = &handle(trace, "trace")?.0;
        Ok(write_csv(ds, str_arg(path, "path")?)?)
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn monisum_trace_free(trace: *mut MonisumTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Default configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_config_new(out: *mut *mut MonisumConfig) -> MonisumStatus {
    guard(|| put(out, boxed(MonisumConfig(ExperimentConfig::default())), "out"))
}

/// Reads a `key = value` config file.
///
/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_config_load(path: *const c_char, out: *mut *mut MonisumConfig) -> MonisumStatus {
    guard(|| {
        let c = ExperimentConfig::load(str_arg(path, "path")?)?;
        put(out, boxed(MonisumConfig(c)), "out")
    })
}

/// Sets one field by its config-file key.
///
/// # Safety
/// `config` must be a live handle; `key` and `value` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn monisum_config_set(
    config: *mut MonisumConfig,
    key: *const c_char,
    value: *const c_char,
) -> MonisumStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        Ok(c.0.set(str_arg(key, "key")?, str_arg(value, "value")?)?)
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn monisum_config_free(config: *mut MonisumConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the full simulation.
///
/// # Safety
/// `config` and `trace` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_run(
    config: *const MonisumConfig,
    trace: *const MonisumTrace,
    out: *mut *mut MonisumRun,
) -> MonisumStatus {
    guard(|| {
        let c = &handle(config, "config")?.0;
        let ds = &handle(trace, "trace")?.0;
        let result = run(c, ds)?;
        put(out, boxed(MonisumRun(result)), "out")
    })
}

fn missing(what: String) -> Failure {
    Failure(MonisumStatus::InvalidArgument, what)
}

/// Time-averaged RMSE at horizon `h` for a resource name or `all`.
///
/// # Safety
/// `run` must be a live handle, `resource` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_run_time_avg_rmse(
    run: *const MonisumRun,
    h: size_t,
    resource: *const c_char,
    out: *mut c_double,
) -> MonisumStatus {
    guard(|| {
        let r = &handle(run, "run")?.0;
        let name = str_arg(resource, "resource")?;
        let v = r
            .aggregate
            .time_avg(h, name)
            .ok_or_else(|| missing(format!("no aggregate for h={h}, resource `{name}`")))?;
        put(out, v, "out")
    })
}

/// # Safety
/// `run` must be a live handle, `resource` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_run_objective(
    run: *const MonisumRun,
    resource: *const c_char,
    out: *mut c_double,
) -> MonisumStatus {
    guard(|| {
        let r = &handle(run, "run")?.0;
        let name = str_arg(resource, "resource")?;
        let v = r
            .aggregate
            .objective(name)
            .ok_or_else(|| missing(format!("no objective for resource `{name}`")))?;
        put(out, v, "out")
    })
}

/// # Safety
/// `run` must be a live handle, `resource` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_run_intermediate_rmse(
    run: *const MonisumRun,
    resource: *const c_char,
    out: *mut c_double,
) -> MonisumStatus {
    guard(|| {
        let r = &handle(run, "run")?.0;
        let name = str_arg(resource, "resource")?;
        let v = r
            .aggregate
            .intermediate(name)
            .ok_or_else(|| missing(format!("no intermediate RMSE for resource `{name}`")))?;
        put(out, v, "out")
    })
}

/// Empirical transmission frequency of one node.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_run_frequency(run: *const MonisumRun, node: size_t, out: *mut c_double) -> MonisumStatus {
    guard(|| {
        let r = &handle(run, "run")?.0;
        let v = *r
            .aggregate
            .frequencies
            .get(node)
            .ok_or_else(|| missing(format!("node {node} out of range")))?;
        put(out, v, "out")
    })
}

/// Writes the run's manifest and CSVs into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn monisum_run_write(run: *const MonisumRun, dir: *const c_char) -> MonisumStatus {
    guard(|| {
        let r = &handle(run, "run")?.0;
        Ok(write_run(r, str_arg(dir, "dir")?)?)
    })
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn monisum_run_free(run: *mut MonisumRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// One node's adaptive transmitter.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_transmitter_new(
    budget: c_double,
    v0: c_double,
    gamma: c_double,
    dim: size_t,
    out: *mut *mut MonisumTransmitter,
) -> MonisumStatus {
    guard(|| {
        let params = TransmitterParams {
            budget,
            v0,
            gamma,
            project_queue: false,
        };
        let state = TransmitterState::new(params, dim)?;
        put(out, boxed(MonisumTransmitter(state)), "out")
    })
}

/// Decides for step `t` (1-based) and updates the queue.
///
/// # Safety
/// `tx` must be a live handle, `x` must point to `len` doubles and
/// `transmit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_transmitter_step(
    tx: *mut MonisumTransmitter,
    x: *const c_double,
    len: size_t,
    t: size_t,
    transmit: *mut bool,
) -> MonisumStatus {
    guard(|| {
        let tx = tx.as_mut().ok_or_else(|| null("transmitter"))?;
        if x.is_null() {
            return Err(null("x"));
        }
        let x = std::slice::from_raw_parts(x, len);
        let decision = tx.0.step(x, t)?;
        put(transmit, decision.transmit, "transmit")
    })
}

/// # Safety
/// `tx` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn monisum_transmitter_queue(tx: *const MonisumTransmitter, out: *mut c_double) -> MonisumStatus {
    guard(|| put(out, handle(tx, "transmitter")?.0.queue(), "out"))
}

/// # Safety
/// `tx` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn monisum_transmitter_free(tx: *mut MonisumTransmitter) {
    if !tx.is_null() {
        drop(Box::from_raw(tx));
    }
}

/// Maximum-weight label permutation for a row-major `k × k` similarity
/// matrix: fresh cluster `r` gets label `perm[r]`.
///
/// # Safety
/// `weights` must point to `k * k` doubles and `perm` to `k` writable
/// entries.
#[no_mangle]
pub unsafe extern "C" fn monisum_match_labels(weights: *const c_double, k: size_t, perm: *mut size_t) -> MonisumStatus {
    guard(|| {
        if weights.is_null() {
            return Err(null("weights"));
        }
        if perm.is_null() {
            return Err(null("perm"));
        }
        let flat = std::slice::from_raw_parts(weights, k * k);
        let rows: Vec<Vec<f64>> = flat.chunks(k.max(1)).map(<[f64]>::to_vec).collect();
        let w = SimilarityMatrix::from_rows(&rows)?;
        let result = match_labels(&w)?;
        ptr::copy_nonoverlapping(result.as_ptr(), perm, k);
        Ok(())
    })
}
