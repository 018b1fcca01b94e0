//! C ABI for `synlab`.
//!
//! Every fallible call returns a [`SynlabStatus`]; on failure the message is
//! kept per thread and can be read with [`synlab_last_error_message`].
//! Handles are opaque: a lab comes from `synlab_lab_default`,
//! `synlab_lab_from_json` or `synlab_lab_flat`, a window from
//! `synlab_lab_run_window`, and each is released by its `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use synlab::experiment::{Experiment, StdpWindowResult};
use synlab::fitting::{fit_exponential, fit_linear, FitResult, FitStatus, Side};
use synlab::{Error, RunConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynlabStatus {
    Ok = 0,
    InvalidArgument = 1,
    Config = 2,
    FitNotConverged = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynlabSide {
    Set = 0,
    Reset = 1,
}

/// Configuration plus the compound synapse built from it.
pub struct SynlabLab {
    config: RunConfig,
    experiment: Experiment,
}

/// Result of a Monte Carlo window run.
pub struct SynlabWindow {
    result: StdpWindowResult,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SynlabWindowPoint {
    pub delta_t: f64,
    pub mean: f64,
    pub std: f64,
    pub mode: i32,
    pub analytic_mean: f64,
    pub analytic_variance: f64,
    pub analytic_mode: i32,
    pub tvd: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SynlabFit {
    /// Intercept (linear) or amplitude (exponential).
    pub a: f64,
    /// Slope (linear) or rate (exponential).
    pub b: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub excluded: usize,
    pub converged: bool,
    pub iterations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(SynlabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) => SynlabStatus::Config,
            Error::FitNotConverged(_) => SynlabStatus::FitNotConverged,
            Error::Io { .. } | Error::Input { .. } => SynlabStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SynlabStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SynlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SynlabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside synlab");
            SynlabStatus::Panic
        }
    }
}

unsafe fn lab_ref<'a>(lab: *const SynlabLab) -> Result<&'a SynlabLab, Failure> {
    lab.as_ref().ok_or_else(|| invalid("lab handle is null"))
}

unsafe fn out_slice<'a>(
    ptr: *mut f64,
    len: usize,
    needed: usize,
    what: &str,
) -> Result<&'a mut [f64], Failure> {
    if ptr.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    if len < needed {
        return Err(invalid(format!(
            "{what} holds {len} values, {needed} needed"
        )));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn in_slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn new_lab(config: RunConfig) -> Result<*mut SynlabLab, Failure> {
    let experiment = Experiment::from_config(&config)?;
    Ok(Box::into_raw(Box::new(SynlabLab { config, experiment })))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn synlab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn synlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Standard normal CDF.
#[no_mangle]
pub extern "C" fn synlab_normal_cdf(x: f64) -> f64 {
    synlab::normal::cdf(x)
}

/// Lab with the default configuration.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_default(out: *mut *mut SynlabLab) -> SynlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = new_lab(RunConfig::default())?;
        Ok(())
    })
}

/// Lab from a JSON configuration (unknown keys are rejected).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_from_json(
    json: *const c_char,
    out: *mut *mut SynlabLab,
) -> SynlabStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(invalid("json or out is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| invalid("json is not UTF-8"))?;
        *out = new_lab(RunConfig::from_json(text)?)?;
        Ok(())
    })
}

/// Same lab with flat attenuation (every α = 1).
///
/// # Safety
/// `lab` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_flat(
    lab: *const SynlabLab,
    out: *mut *mut SynlabLab,
) -> SynlabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = new_lab(lab.config.flat())?;
        Ok(())
    })
}

/// # Safety
/// `lab` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_free(lab: *mut SynlabLab) {
    if !lab.is_null() {
        drop(Box::from_raw(lab));
    }
}

/// Number of devices; 0 for a null handle.
///
/// # Safety
/// `lab` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_device_count(lab: *const SynlabLab) -> usize {
    lab.as_ref().map_or(0, |l| l.experiment.synapse().len())
}

/// Overrides seed and epoch count of the lab's protocol.
///
/// # Safety
/// `lab` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_set_protocol(
    lab: *mut SynlabLab,
    seed: u64,
    epochs: usize,
) -> SynlabStatus {
    guard(|| {
        let lab = lab.as_mut().ok_or_else(|| invalid("lab handle is null"))?;
        let mut config = lab.config.clone();
        config.protocol.seed = seed;
        config.protocol.epochs = epochs;
        lab.experiment = Experiment::from_config(&config)?;
        lab.config = config;
        Ok(())
    })
}

/// Per-device switching probabilities at `dt`. Both buffers need at least
/// `synlab_lab_device_count` entries.
///
/// # Safety
/// `lab` must be a live handle; buffers valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_branch_probabilities(
    lab: *const SynlabLab,
    dt: f64,
    p_set: *mut f64,
    p_reset: *mut f64,
    len: usize,
) -> SynlabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        if !dt.is_finite() {
            return Err(invalid("dt is not finite"));
        }
        let n = lab.experiment.synapse().len();
        let set = out_slice(p_set, len, n, "p_set")?;
        let reset = out_slice(p_reset, len, n, "p_reset")?;
        for (i, r) in lab
            .experiment
            .branch_probabilities(dt)
            .records
            .iter()
            .enumerate()
        {
            set[i] = r.p_set;
            reset[i] = r.p_reset;
        }
        Ok(())
    })
}

/// Analytic law of the number of switching devices at `dt`: `pmf[k]` is the
/// probability that `k` devices switch. `sign` receives +1 when they SET and
/// -1 when they RESET. `pmf` needs `device_count + 1` entries.
///
/// # Safety
/// `lab` must be a live handle; `pmf` valid for `len` doubles; `sign` null or
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_state_distribution(
    lab: *const SynlabLab,
    dt: f64,
    pmf: *mut f64,
    len: usize,
    sign: *mut i32,
) -> SynlabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        if !dt.is_finite() {
            return Err(invalid("dt is not finite"));
        }
        let (polarity, p) = lab.experiment.success_probabilities(dt);
        let out = out_slice(pmf, len, p.len() + 1, "pmf")?;
        out[..=p.len()].copy_from_slice(&synlab::state_distribution(&p));
        if !sign.is_null() {
            *sign = polarity.sign();
        }
        Ok(())
    })
}

/// Runs the Monte Carlo window over the lab's Δt grid. `threads` = 0 uses
/// one worker per core; results do not depend on it.
///
/// # Safety
/// `lab` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn synlab_lab_run_window(
    lab: *const SynlabLab,
    threads: usize,
    out: *mut *mut SynlabWindow,
) -> SynlabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let result = lab.experiment.run_with_threads(threads)?;
        *out = Box::into_raw(Box::new(SynlabWindow { result }));
        Ok(())
    })
}

/// # Safety
/// `window` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn synlab_window_free(window: *mut SynlabWindow) {
    if !window.is_null() {
        drop(Box::from_raw(window));
    }
}

/// Number of grid points; 0 for a null handle.
///
/// # Safety
/// `window` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn synlab_window_len(window: *const SynlabWindow) -> usize {
    window.as_ref().map_or(0, |w| w.result.points.len())
}

/// # Safety
/// `window` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn synlab_window_point(
    window: *const SynlabWindow,
    index: usize,
    out: *mut SynlabWindowPoint,
) -> SynlabStatus {
    guard(|| {
        let w = window
            .as_ref()
            .ok_or_else(|| invalid("window handle is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let p = w
            .result
            .points
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range")))?;
        *out = SynlabWindowPoint {
            delta_t: p.delta_t,
            mean: p.mean,
            std: p.std,
            mode: p.mode,
            analytic_mean: p.analytic_mean,
            analytic_variance: p.analytic_variance,
            analytic_mode: p.analytic_mode,
            tvd: p.tvd,
        };
        Ok(())
    })
}

/// Sample counts of one grid point, indexed by `level + device_count`.
///
/// # Safety
/// `window` must be a live handle; `counts` valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn synlab_window_histogram(
    window: *const SynlabWindow,
    index: usize,
    counts: *mut u64,
    len: usize,
) -> SynlabStatus {
    guard(|| {
        let w = window
            .as_ref()
            .ok_or_else(|| invalid("window handle is null"))?;
        let p = w
            .result
            .points
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range")))?;
        if counts.is_null() || len < p.histogram.len() {
            return Err(invalid(format!(
                "counts needs {} entries",
                p.histogram.len()
            )));
        }
        std::slice::from_raw_parts_mut(counts, len)[..p.histogram.len()]
            .copy_from_slice(&p.histogram);
        Ok(())
    })
}

/// Poisson-binomial law of the number of successes among `n` independent
/// trials with probabilities `p`. `pmf` needs `n + 1` entries.
///
/// # Safety
/// `p` valid for `n` doubles, `pmf` for `len`.
#[no_mangle]
pub unsafe extern "C" fn synlab_state_distribution(
    p: *const f64,
    n: usize,
    pmf: *mut f64,
    len: usize,
) -> SynlabStatus {
    guard(|| {
        let p = in_slice(p, n, "p")?;
        if p.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(invalid("probabilities must lie in [0, 1]"));
        }
        let out = out_slice(pmf, len, n + 1, "pmf")?;
        out[..=n].copy_from_slice(&synlab::state_distribution(p));
        Ok(())
    })
}

fn side(s: SynlabSide) -> Side {
    match s {
        SynlabSide::Set => Side::Set,
        SynlabSide::Reset => Side::Reset,
    }
}

fn write_fit(fit: &FitResult, out: *mut SynlabFit) {
    unsafe {
        *out = SynlabFit {
            a: fit.a,
            b: fit.b,
            r_squared: fit.r_squared,
            n_points: fit.n_points,
            excluded: fit.excluded,
            converged: fit.converged,
            iterations: fit.iterations,
        };
    }
}

unsafe fn points(x: *const f64, y: *const f64, n: usize) -> Result<Vec<(f64, f64)>, Failure> {
    let x = in_slice(x, n, "x")?;
    let y = in_slice(y, n, "y")?;
    Ok(x.iter().copied().zip(y.iter().copied()).collect())
}

/// Least-squares line `y = a + b x`.
///
/// # Safety
/// `x` and `y` valid for `n` doubles; `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn synlab_fit_linear(
    x: *const f64,
    y: *const f64,
    n: usize,
    fit_side: SynlabSide,
    out: *mut SynlabFit,
) -> SynlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let fit = fit_linear(&points(x, y, n)?, side(fit_side))?;
        write_fit(&fit, out);
        Ok(())
    })
}

/// Least-squares `y = a exp(b x)` over the points with `y > 0` (at least
/// three). Returns `FitNotConverged`, with `out` still filled, when the
/// iteration stalls.
///
/// # Safety
/// `x` and `y` valid for `n` doubles; `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn synlab_fit_exponential(
    x: *const f64,
    y: *const f64,
    n: usize,
    fit_side: SynlabSide,
    out: *mut SynlabFit,
) -> SynlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let fit = fit_exponential(&points(x, y, n)?, side(fit_side));
        if let FitStatus::Skipped { reason } = &fit.status {
            return Err(invalid(reason.clone()));
        }
        write_fit(&fit, out);
        if !fit.converged {
            return Err(Failure(
                SynlabStatus::FitNotConverged,
                "exponential fit did not converge".into(),
            ));
        }
        Ok(())
    })
}
