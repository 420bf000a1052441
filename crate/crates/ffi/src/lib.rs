//! C ABI over the `lte-sched` simulator.
//!
//! Objects are opaque heap handles created by `*_new` functions and
//! released by the matching `*_free`. Every fallible call returns an
//! [`LteStatus`]; on failure, [`lte_last_error_message`] describes the most
//! recent error on the calling thread. No function unwinds across the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lte_sched::kalman::{ChannelPredictor, KalmanParams};
use lte_sched::{SimConfig, SimError, SimRun};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LteStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Unreadable config file, unknown key or invalid value.
    Config = 3,
    /// Trace or other output failure.
    Io = 4,
    /// The simulation has already reached `sim_ttis`.
    Finished = 5,
    Panic = 6,
}

/// Result row of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LteSummary {
    pub throughput_bps: f64,
    pub plr_ratio: f64,
    pub n_users: u64,
    pub seed: u64,
    pub sim_ttis: u64,
    pub ttis_done: u64,
}

/// Simulation parameters.
pub struct LteConfig {
    inner: SimConfig,
}

/// One simulation run.
pub struct LteSim {
    inner: SimRun,
}

/// Kalman SINR predictor for a single (user, PRB) link.
pub struct LtePredictor {
    filter: ChannelPredictor,
    params: KalmanParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> LteStatus) -> LteStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            LteStatus::Panic
        }
    }
}

fn fail(status: LteStatus, message: impl Into<String>) -> LteStatus {
    set_error(message);
    status
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, LteStatus> {
    if p.is_null() {
        return Err(fail(LteStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LteStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn sim_error(e: SimError) -> LteStatus {
    let status = match e {
        SimError::Config(_) => LteStatus::Config,
        SimError::Trace(_) => LteStatus::Io,
    };
    fail(status, e.to_string())
}

fn boxed<T>(out: *mut *mut T, value: T) -> LteStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    LteStatus::Ok
}

/// Most recent error message on this thread, or null. Valid until the next
/// call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lte_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lte_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn lte_config_new(out: *mut *mut LteConfig) -> LteStatus {
    guard(|| {
        if out.is_null() {
            return fail(LteStatus::NullPointer, "out is null");
        }
        boxed(out, LteConfig { inner: SimConfig::default() })
    })
}

/// Defaults overlaid with a `key = value` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lte_config_load(path: *const c_char, out: *mut *mut LteConfig) -> LteStatus {
    guard(|| {
        if out.is_null() {
            return fail(LteStatus::NullPointer, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match SimConfig::load(Path::new(path)) {
            Ok(inner) => boxed(out, LteConfig { inner }),
            Err(e) => fail(LteStatus::Config, e.to_string()),
        }
    })
}

/// Sets one key, with the same syntax as a config file line.
///
/// # Safety
/// `config` must come from `lte_config_new` or `lte_config_load`; `key` and
/// `value` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn lte_config_set(
    config: *mut LteConfig,
    key: *const c_char,
    value: *const c_char,
) -> LteStatus {
    guard(|| {
        let Some(config) = config.as_mut() else {
            return fail(LteStatus::NullPointer, "config is null");
        };
        let (key, value) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match config.inner.set(key, value) {
            Ok(()) => LteStatus::Ok,
            Err(e) => fail(LteStatus::Config, e.to_string()),
        }
    })
}

/// Checks every field; reports the first invalid one.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lte_config_validate(config: *const LteConfig) -> LteStatus {
    guard(|| {
        let Some(config) = config.as_ref() else {
            return fail(LteStatus::NullPointer, "config is null");
        };
        match config.inner.validate() {
            Ok(()) => LteStatus::Ok,
            Err(e) => fail(LteStatus::Config, e.to_string()),
        }
    })
}

/// # Safety
/// `config` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lte_config_free(config: *mut LteConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Starts a run from a copy of `config`.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lte_sim_new(config: *const LteConfig, out: *mut *mut LteSim) -> LteStatus {
    guard(|| {
        let Some(config) = config.as_ref() else {
            return fail(LteStatus::NullPointer, "config is null");
        };
        if out.is_null() {
            return fail(LteStatus::NullPointer, "out is null");
        }
        match SimRun::new(config.inner.clone()) {
            Ok(inner) => boxed(out, LteSim { inner }),
            Err(e) => sim_error(e),
        }
    })
}

/// Advances one TTI. Returns `LTE_STATUS_FINISHED` once the run is over.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lte_sim_step(sim: *mut LteSim) -> LteStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(LteStatus::NullPointer, "sim is null");
        };
        if sim.inner.is_done() {
            return fail(LteStatus::Finished, "simulation already finished");
        }
        match sim.inner.step() {
            Ok(()) => LteStatus::Ok,
            Err(e) => sim_error(e),
        }
    })
}

/// Runs the remaining TTIs.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lte_sim_run(sim: *mut LteSim) -> LteStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(LteStatus::NullPointer, "sim is null");
        };
        match sim.inner.run_to_end() {
            Ok(()) => LteStatus::Ok,
            Err(e) => sim_error(e),
        }
    })
}

/// Metrics so far.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lte_sim_summary(sim: *const LteSim, out: *mut LteSummary) -> LteStatus {
    guard(|| {
        let (Some(sim), Some(out)) = (sim.as_ref(), out.as_mut()) else {
            return fail(LteStatus::NullPointer, "sim or out is null");
        };
        let s = sim.inner.summary();
        *out = LteSummary {
            throughput_bps: s.throughput_bps,
            plr_ratio: s.plr_ratio,
            n_users: s.n_users as u64,
            seed: s.seed,
            sim_ttis: s.sim_ttis,
            ttis_done: sim.inner.current_tti(),
        };
        LteStatus::Ok
    })
}

/// # Safety
/// `sim` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lte_sim_free(sim: *mut LteSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Predictor using the Kalman settings of `config`, or the defaults when
/// `config` is null.
///
/// # Safety
/// `config` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lte_predictor_new(config: *const LteConfig, out: *mut *mut LtePredictor) -> LteStatus {
    guard(|| {
        if out.is_null() {
            return fail(LteStatus::NullPointer, "out is null");
        }
        let params = config
            .as_ref()
            .map_or_else(KalmanParams::default, |c| KalmanParams::from_config(&c.inner));
        boxed(
            out,
            LtePredictor {
                filter: ChannelPredictor::new(),
                params,
            },
        )
    })
}

/// Feeds one TTI. `has_report` false means the report is missing or
/// blanked. On success `*valid` tells whether `*estimate_db` holds an
/// estimate; it is false until the first report arrives.
///
/// # Safety
/// `predictor` must be a live handle; `estimate_db` and `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn lte_predictor_estimate(
    predictor: *mut LtePredictor,
    has_report: bool,
    report_db: f64,
    delay_ttis: u32,
    estimate_db: *mut f64,
    valid: *mut bool,
) -> LteStatus {
    guard(|| {
        let (Some(p), Some(est), Some(valid)) = (predictor.as_mut(), estimate_db.as_mut(), valid.as_mut()) else {
            return fail(LteStatus::NullPointer, "predictor or output is null");
        };
        let report = has_report.then_some(report_db);
        if report.is_some_and(|r| !r.is_finite()) {
            return fail(LteStatus::Config, "report_db must be finite");
        }
        match p.filter.estimate_sinr(report, delay_ttis as usize, &p.params) {
            Some(e) => {
                *est = e;
                *valid = true;
            }
            None => *valid = false,
        }
        LteStatus::Ok
    })
}

/// # Safety
/// `predictor` must be a live handle or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lte_predictor_free(predictor: *mut LtePredictor) {
    if !predictor.is_null() {
        drop(Box::from_raw(predictor));
    }
}
