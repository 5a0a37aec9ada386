//! C interface to the `illpose` numerics.
//!
//! Objects cross the boundary as opaque handles. Every handle returned
//! through an out-pointer is owned by the caller and released with the
//! matching `*_free` function. Calls return an [`IllposeStatus`]; on failure
//! a message is kept per thread and read back with
//! [`illpose_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use illpose::closed_forms::cauchy_hs_norm;
use illpose::evolution::{evolve, IntegratorConfig};
use illpose::feasibility::region_entry;
use illpose::harness::{self, config::Experiment, report::ExperimentReport};
use illpose::inflation::{dominance_check, inflation_experiment, InflationBudget, InflationMode, InflationSetup};
use illpose::spectral::{Grid, NormSpec, SpectralField};
use illpose::C64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IllposeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ComputationFailed = 3,
    /// A norm that does not converge for the given field.
    NotConvergent = 4,
    /// The experiment ran but at least one verdict failed.
    VerdictFailed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IllposeNorm {
    L2 = 0,
    Sobolev = 1,
    Homogeneous = 2,
    Modulation = 3,
}

/// Sampled field on a periodic grid.
pub struct IllposeField(SpectralField);

/// Result of a harness experiment.
pub struct IllposeReport(ExperimentReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IllposeRegionEntry {
    pub feasible: bool,
    pub special: bool,
    pub has_witness: bool,
    pub theta: f64,
    pub a: f64,
    pub b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IllposeInflationSummary {
    pub n: f64,
    pub a: f64,
    pub r: f64,
    pub t: f64,
    pub norm_phi_hs: f64,
    pub norm_u1: f64,
    pub norm_u3_lower: f64,
    pub tail_bound: f64,
    pub ratio: f64,
    pub dominance_holds: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (IllposeStatus, String)>) -> IllposeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IllposeStatus::Ok,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside illpose");
            IllposeStatus::Panic
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> (IllposeStatus, String) {
    (IllposeStatus::InvalidArgument, e.to_string())
}

fn failed(e: impl std::fmt::Display) -> (IllposeStatus, String) {
    (IllposeStatus::ComputationFailed, e.to_string())
}

fn null(name: &str) -> (IllposeStatus, String) {
    (IllposeStatus::NullPointer, format!("{name} is null"))
}

/// Message for the last failing call on this thread, or null.
/// The pointer stays valid until the next `illpose_*` call on the same thread.
#[no_mangle]
pub extern "C" fn illpose_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a field on a periodic grid of `points` samples over `[-length/2, length/2)`.
///
/// # Safety
/// `re` and `im` must each point to `points` readable doubles; `im` may be
/// null for a real field. `out` must be a valid pointer to write to.
#[no_mangle]
pub unsafe extern "C" fn illpose_field_new(
    length: f64,
    points: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut IllposeField,
) -> IllposeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if re.is_null() {
            return Err(null("re"));
        }
        let grid = Grid::new(length, points).map_err(invalid)?;
        let re = std::slice::from_raw_parts(re, points);
        let values: Vec<C64> = if im.is_null() {
            re.iter().map(|&x| C64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, points);
            re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect()
        };
        let field = SpectralField::from_values(grid, values).map_err(invalid)?;
        *out = Box::into_raw(Box::new(IllposeField(field)));
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn illpose_field_free(field: *mut IllposeField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn illpose_field_len(field: *const IllposeField) -> usize {
    field.as_ref().map_or(0, |f| f.0.grid().len())
}

/// Copies the samples into `re` and `im`, each of length `len`.
///
/// # Safety
/// `field` must be a live handle; `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn illpose_field_values(field: *const IllposeField, re: *mut f64, im: *mut f64, len: usize) -> IllposeStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let v = f.0.values();
        if len != v.len() {
            return Err(invalid(format!("buffer length {len} does not match field length {}", v.len())));
        }
        for (k, z) in v.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Evaluates a norm. `param` is `s` for the Sobolev norms and `A` for the
/// modulation norm; it is ignored for `L2`.
///
/// # Safety
/// `field` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn illpose_field_norm(
    field: *const IllposeField,
    kind: IllposeNorm,
    param: f64,
    out: *mut f64,
) -> IllposeStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let spec = match kind {
            IllposeNorm::L2 => NormSpec::L2,
            IllposeNorm::Sobolev => NormSpec::Sobolev { s: param },
            IllposeNorm::Homogeneous => NormSpec::Homogeneous { s: param },
            IllposeNorm::Modulation => NormSpec::Modulation { a: param },
        };
        match f.0.norm(spec).map_err(invalid)?.value() {
            Some(v) => {
                *out = v;
                Ok(())
            }
            None => Err((IllposeStatus::NotConvergent, "norm does not converge for this field".into())),
        }
    })
}

/// Runs the split-step integrator for `i u_t - |D|^β u = μ|u|²u` up to `t_final`.
///
/// # Safety
/// `field` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn illpose_evolve(
    field: *const IllposeField,
    beta: f64,
    mu: f64,
    dt: f64,
    t_final: f64,
    out: *mut *mut IllposeField,
) -> IllposeStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = IntegratorConfig::new(beta, mu, dt);
        let mut snaps = evolve(&f.0, &cfg, t_final, &[t_final]).map_err(failed)?;
        let (_, u) = snaps.pop().ok_or_else(|| failed("integrator returned no snapshot"))?;
        *out = Box::into_raw(Box::new(IllposeField(u)));
        Ok(())
    })
}

/// Closed-form `Ḣ^s` norm of `1/(x + ip)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn illpose_cauchy_hs_norm(p: f64, s: f64, out: *mut f64) -> IllposeStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = cauchy_hs_norm(p, s).map_err(invalid)?;
        Ok(())
    })
}

/// Feasibility of norm inflation at `(β, s)`, with a witness `(θ, a, b)` when one exists.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn illpose_region_entry(beta: f64, s: f64, out: *mut IllposeRegionEntry) -> IllposeStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if beta.is_nan() || beta <= 0.0 || !s.is_finite() {
            return Err(invalid(format!("need β > 0 and finite s, got ({beta}, {s})")));
        }
        let e = region_entry(beta, s);
        let (theta, a, b) = e.witness.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        *out = IllposeRegionEntry {
            feasible: e.feasible,
            special: e.special,
            has_witness: e.witness.is_some(),
            theta,
            a,
            b,
        };
        Ok(())
    })
}

/// One point of the inflation sweep with the default setup and the series solution.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn illpose_inflation_run(
    theta: f64,
    a: f64,
    b: f64,
    beta: f64,
    s: f64,
    n: f64,
    out: *mut IllposeInflationSummary,
) -> IllposeStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let budget = InflationBudget { theta, a, b, beta, s };
        let setup = InflationSetup::default();
        let run = inflation_experiment(&budget, n, &setup, InflationMode::Series).map_err(failed)?;
        *out = IllposeInflationSummary {
            n: run.n,
            a: run.a,
            r: run.r,
            t: run.t,
            norm_phi_hs: run.norm_phi_hs,
            norm_u1: run.norm_u1,
            norm_u3_lower: run.norm_u3_lower,
            tail_bound: run.tail_bound,
            ratio: run.ratio(),
            dominance_holds: dominance_check(&run, setup.dominance).all(),
        };
        Ok(())
    })
}

/// Runs a harness experiment by name with `--key value` style arguments.
/// When `out_dir` is non-null the report files are written below it.
/// A run whose verdicts fail still produces a report and returns
/// `VerdictFailed`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `argv` must point to `argc`
/// NUL-terminated strings (or be null when `argc` is 0); `out_dir` must be
/// null or NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn illpose_run_experiment(
    name: *const c_char,
    argv: *const *const c_char,
    argc: usize,
    out_dir: *const c_char,
    out: *mut *mut IllposeReport,
) -> IllposeStatus {
    let mut verdicts_failed = false;
    let status = guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let exp: Experiment = CStr::from_ptr(name).to_str().map_err(invalid)?.parse().map_err(invalid)?;
        let mut args = Vec::with_capacity(argc);
        if argc > 0 {
            if argv.is_null() {
                return Err(null("argv"));
            }
            for k in 0..argc {
                let p = *argv.add(k);
                if p.is_null() {
                    return Err(null("argv entry"));
                }
                args.push(CStr::from_ptr(p).to_str().map_err(invalid)?.to_string());
            }
        }
        let cfg = harness::config::ExperimentConfig::from_args(exp, &args).map_err(invalid)?;
        let rep = harness::run(&cfg).map_err(|e| match e {
            harness::HarnessError::Config(m) => invalid(m),
            other => failed(other),
        })?;
        if !out_dir.is_null() {
            let dir = CStr::from_ptr(out_dir).to_str().map_err(invalid)?;
            rep.write(Path::new(dir), false).map_err(failed)?;
        }
        verdicts_failed = !rep.passed();
        *out = Box::into_raw(Box::new(IllposeReport(rep)));
        Ok(())
    });
    if status == IllposeStatus::Ok && verdicts_failed {
        set_error("at least one verdict failed");
        return IllposeStatus::VerdictFailed;
    }
    status
}

/// # Safety
/// `report` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn illpose_report_free(report: *mut IllposeReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of verdicts, 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn illpose_report_verdict_count(report: *const IllposeReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.verdicts.len())
}

/// Whether verdict `index` passed. Writes its name as a new string that the
/// caller releases with [`illpose_string_free`].
///
/// # Safety
/// `report` must be a live handle; `passed` and `name` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn illpose_report_verdict(
    report: *const IllposeReport,
    index: usize,
    passed: *mut bool,
    name: *mut *mut c_char,
) -> IllposeStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if passed.is_null() || name.is_null() {
            return Err(null("passed/name"));
        }
        let v = r.0.verdicts.get(index).ok_or_else(|| invalid(format!("verdict index {index} out of range")))?;
        *passed = v.pass;
        *name = CString::new(v.name.clone()).map_err(failed)?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn illpose_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
