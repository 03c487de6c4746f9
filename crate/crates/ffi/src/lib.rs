//! C ABI over the eitmem simulator.
//!
//! Scenarios and run results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns an
//! [`EitmemStatus`]; on failure, [`eitmem_last_error`] describes the error on
//! the calling thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use eitmem::model::Channel;
use eitmem::scenario::{self, RunOutput, Scenario};
use eitmem::Error;

/// Opaque scenario handle.
pub struct EitmemScenario(Scenario);

/// Opaque handle to the in-memory result of a simulation.
pub struct EitmemRun(RunOutput);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EitmemStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Bad config, unknown key/preset/parameter or violated invariant.
    Config = 3,
    /// Numerical abort (step too large, non-finite values).
    Numerical = 4,
    /// File-system or serialization failure.
    Io = 5,
    /// A metric could not be computed.
    Metric = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Scalar metrics of one run. `has_*` flags mark which optional values are set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EitmemMetrics {
    pub eta_ch1: f64,
    pub eta_ch2: f64,
    pub visibility: f64,
    pub crosstalk_db: f64,
    pub correlation: f64,
    pub camera_total_counts: u64,
    pub camera_pgm_scale: f64,
    pub has_visibility: bool,
    pub has_crosstalk_db: bool,
    pub has_correlation: bool,
}

/// Energy bookkeeping of one channel, in photons.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EitmemLedger {
    pub input: f64,
    pub leaked: f64,
    pub retrieved: f64,
    pub absorbed: f64,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EitmemStatus {
    match e {
        Error::NonFinite { .. } | Error::StepTooLarge { .. } => EitmemStatus::Numerical,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => EitmemStatus::Io,
        Error::Metric(_) | Error::ZeroEnergy => EitmemStatus::Metric,
        _ => EitmemStatus::Config,
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (EitmemStatus, String)>) -> EitmemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EitmemStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            EitmemStatus::Panic
        }
    }
}

fn lib(e: Error) -> (EitmemStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (EitmemStatus, String) {
    (EitmemStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EitmemStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (EitmemStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn channel(index: u32) -> Result<Channel, (EitmemStatus, String)> {
    match index {
        1 => Ok(Channel::Ch1),
        2 => Ok(Channel::Ch2),
        _ => Err((EitmemStatus::Config, format!("channel must be 1 or 2, got {index}"))),
    }
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eitmem_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eitmem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a scenario from an INI config file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_scenario_load(path: *const c_char, out: *mut *mut EitmemScenario) -> EitmemStatus {
    guard(|| {
        let path = text(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = scenario::load_config(Path::new(path)).map_err(lib)?;
        store(out, EitmemScenario(s));
        Ok(())
    })
}

/// Parses a scenario from INI text.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_scenario_parse(config: *const c_char, out: *mut *mut EitmemScenario) -> EitmemStatus {
    guard(|| {
        let t = text(config, "config")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s: Scenario = t.parse().map_err(lib)?;
        store(out, EitmemScenario(s));
        Ok(())
    })
}

/// Loads a bundled preset by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_scenario_preset(name: *const c_char, out: *mut *mut EitmemScenario) -> EitmemStatus {
    guard(|| {
        let name = text(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = scenario::preset(name).map_err(lib)?;
        store(out, EitmemScenario(s));
        Ok(())
    })
}

/// Sets the numeric parameter `path` (e.g. `control.write_angle_deg`) in place.
/// On failure the scenario is left unchanged.
///
/// # Safety
/// `s` must be a live scenario handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn eitmem_scenario_set(s: *mut EitmemScenario, path: *const c_char, value: f64) -> EitmemStatus {
    guard(|| {
        let p = text(path, "path")?;
        let s = s.as_mut().ok_or_else(|| null("scenario"))?;
        s.0 = s.0.with_param(p, value).map_err(lib)?;
        Ok(())
    })
}

/// Renders the scenario as INI text. The returned string must be released
/// with [`eitmem_string_free`].
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_scenario_to_ini(s: *const EitmemScenario, out: *mut *mut c_char) -> EitmemStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(s.0.to_ini()).map_err(|e| (EitmemStatus::Io, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eitmem_scenario_free(s: *mut EitmemScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `p` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eitmem_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

/// Simulates the scenario in memory.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_simulate(s: *const EitmemScenario, out: *mut *mut EitmemRun) -> EitmemStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = scenario::simulate(&s.0).map_err(lib)?;
        store(out, EitmemRun(r));
        Ok(())
    })
}

/// Simulates the scenario and writes all artifacts into `out_dir`. `out`
/// may be null if the in-memory result is not needed.
///
/// # Safety
/// `s` must be a live scenario handle; `out_dir` a NUL-terminated string;
/// `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_run(
    s: *const EitmemScenario,
    out_dir: *const c_char,
    out: *mut *mut EitmemRun,
) -> EitmemStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        let dir = text(out_dir, "out_dir")?;
        let r = scenario::run_scenario(&s.0, Path::new(dir)).map_err(lib)?;
        if !out.is_null() {
            store(out, EitmemRun(r));
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_run_metrics(r: *const EitmemRun, out: *mut EitmemMetrics) -> EitmemStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("run"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = &r.0.metrics;
        *out = EitmemMetrics {
            eta_ch1: m.eta_ch1,
            eta_ch2: m.eta_ch2,
            visibility: m.visibility.unwrap_or(0.0),
            crosstalk_db: m.crosstalk_db.unwrap_or(0.0),
            correlation: m.correlation.unwrap_or(0.0),
            camera_total_counts: m.camera_total_counts,
            camera_pgm_scale: m.camera_pgm_scale,
            has_visibility: m.visibility.is_some(),
            has_crosstalk_db: m.crosstalk_db.is_some(),
            has_correlation: m.correlation.is_some(),
        };
        Ok(())
    })
}

/// Energy ledger of channel 1 or 2.
///
/// # Safety
/// `r` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_run_ledger(r: *const EitmemRun, channel_index: u32, out: *mut EitmemLedger) -> EitmemStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("run"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let l = r.0.record.ledger(channel(channel_index)?);
        *out = EitmemLedger {
            input: l.input,
            leaked: l.leaked,
            retrieved: l.retrieved,
            absorbed: l.absorbed,
            residual: l.residual,
        };
        Ok(())
    })
}

/// Grid size of the run's images.
///
/// # Safety
/// `r` must be a live run handle; `nx`, `ny` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eitmem_run_image_shape(r: *const EitmemRun, nx: *mut usize, ny: *mut usize) -> EitmemStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("run"))?;
        let (nx, ny) = (nx.as_mut().ok_or_else(|| null("nx"))?, ny.as_mut().ok_or_else(|| null("ny"))?);
        (*nx, *ny) = r.0.images[0].grid.shape();
        Ok(())
    })
}

/// Copies the noiseless retrieved camera image of a channel into `buf`
/// (row-major over (x, y), `len` = nx·ny).
///
/// # Safety
/// `r` must be a live run handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eitmem_run_image(r: *const EitmemRun, channel_index: u32, buf: *mut f64, len: usize) -> EitmemStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("run"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let img = &r.0.images[channel(channel_index)?.index()];
        if len != img.data.len() {
            return Err((EitmemStatus::Config, format!("buffer holds {len} values, image has {}", img.data.len())));
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for (d, s) in dst.iter_mut().zip(img.data.iter()) {
            *d = *s;
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eitmem_run_free(r: *mut EitmemRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
