//! C ABI over the `cyins` library.
//!
//! Models are opaque handles created by `cyins_model_load` or
//! `cyins_model_parse` and released with `cyins_model_free`. Every fallible
//! call returns a [`CyinsStatus`]; on failure the message is available from
//! `cyins_last_error` until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cyins::analytic::{Case, Protection, TwoState, TwoStateModel};
use cyins::contracts::{
    expected_cumulative_coverage, insurer_profit, linear_grid, solve_baseline, solve_contract, sweep, threshold_grid,
    SweepFamily, SweepOptions, DEFAULT_TOL,
};
use cyins::io::sweep_csv;
use cyins::{CoveragePolicy, Error, MdpModel};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyinsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    IoError = 5,
    InvalidArgument = 6,
    NotTwoByTwo = 7,
    SolverError = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Opaque model handle.
pub struct CyinsModel {
    inner: MdpModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyinsCoverageKind {
    None = 0,
    Linear = 1,
    Threshold = 2,
}

/// Coverage function. `level` is used by `LINEAR`; `cutoff`, `low_level`
/// and `high_level` by `THRESHOLD`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CyinsCoverage {
    pub kind: CyinsCoverageKind,
    pub level: f64,
    pub cutoff: f64,
    pub low_level: f64,
    pub high_level: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyinsCase {
    One = 1,
    Two = 2,
    Three = 3,
    FourA = 4,
    FourB = 5,
    FourC = 6,
}

/// Closed-form results for a two-state, two-action model.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CyinsAnalyticSummary {
    pub case_id: CyinsCase,
    pub rho: f64,
    /// `h(S_G,A_H,0)`, `h(S_G,A_L,0)`, `h(S_B,A_H,0)`, `h(S_B,A_L,0)`.
    pub h: [f64; 4],
    pub num_thresholds: usize,
    /// Policy switch points in increasing order; unused entries are NaN.
    pub thresholds: [f64; 2],
    /// `K(R) = premium_slope * R` on the zero-profit region.
    pub premium_slope: f64,
    /// Upper end of the zero-profit region `[0, region_hi)`, or `[0, 1]`
    /// when `region_hi_closed` is non-zero.
    pub region_hi: f64,
    pub region_hi_closed: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(error: &Error) -> CyinsStatus {
    match error {
        Error::Validation(_) | Error::TwoStateOrdering(_) => CyinsStatus::ValidationError,
        Error::Parse { .. } => CyinsStatus::ParseError,
        Error::Io { .. } => CyinsStatus::IoError,
        Error::NotTwoByTwo => CyinsStatus::NotTwoByTwo,
        Error::InvalidArgument(_) => CyinsStatus::InvalidArgument,
        Error::TooLarge { .. } | Error::Lp(_) | Error::CrossCheck(_) => CyinsStatus::SolverError,
    }
}

struct Failure(CyinsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CyinsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CyinsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            CyinsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CyinsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CyinsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn model_arg<'a>(p: *const CyinsModel) -> Result<&'a MdpModel, Failure> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn coverage_arg(p: *const CyinsCoverage) -> Result<CoveragePolicy, Failure> {
    let c = p.as_ref().ok_or_else(|| null("coverage"))?;
    let coverage = match c.kind {
        CyinsCoverageKind::None => CoveragePolicy::Zero,
        CyinsCoverageKind::Linear => CoveragePolicy::Linear { level: c.level },
        CyinsCoverageKind::Threshold => CoveragePolicy::Threshold {
            cutoff: c.cutoff,
            low_level: c.low_level,
            high_level: c.high_level,
        },
    };
    Ok(coverage.validated()?)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn into_handle(model: MdpModel) -> *mut CyinsModel {
    Box::into_raw(Box::new(CyinsModel { inner: model }))
}

/// Message of the last failing call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cyins_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cyins_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a model file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cyins_model_load(path: *const c_char, out: *mut *mut CyinsModel) -> CyinsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let model = cyins::load_model(path)?;
        write_out(out, into_handle(model))
    })
}

/// Parses model text into `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cyins_model_parse(text: *const c_char, out: *mut *mut CyinsModel) -> CyinsStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let model = cyins::parse_model(text, "<memory>")?;
        write_out(out, into_handle(model))
    })
}

/// Writes the model to `path`.
///
/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cyins_model_save(model: *const CyinsModel, path: *const c_char) -> CyinsStatus {
    guard(|| {
        let model = model_arg(model)?;
        let path = str_arg(path, "path")?;
        Ok(cyins::save_model(model, path)?)
    })
}

/// Releases a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cyins_model_free(model: *mut CyinsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of states, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cyins_model_num_states(model: *const CyinsModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_states())
}

/// Number of actions, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cyins_model_num_actions(model: *const CyinsModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_actions())
}

/// Optimal policy (action indices) and values under `coverage`.
///
/// Both buffers must hold `len >= num_states` entries; otherwise
/// `BUFFER_TOO_SMALL` is returned and nothing is written.
///
/// # Safety
/// Pointers must be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn cyins_solve(
    model: *const CyinsModel,
    coverage: *const CyinsCoverage,
    tol: f64,
    policy_out: *mut usize,
    values_out: *mut f64,
    len: usize,
) -> CyinsStatus {
    guard(|| {
        let model = model_arg(model)?;
        let coverage = coverage_arg(coverage)?;
        if policy_out.is_null() || values_out.is_null() {
            return Err(null("output buffer"));
        }
        let n = model.num_states();
        if len < n {
            return Err(Failure(CyinsStatus::BufferTooSmall, format!("need {n} entries, got {len}")));
        }
        let solved = solve_contract(model, &coverage, tol)?;
        for s in 0..n {
            policy_out.add(s).write(solved.policy[s]);
            values_out.add(s).write(solved.values[s]);
        }
        Ok(())
    })
}

/// Maximum premium, coverage paid and insurer profit at the initial state.
/// Any output pointer may be NULL to skip it.
///
/// # Safety
/// Non-NULL pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cyins_contract_terms(
    model: *const CyinsModel,
    coverage: *const CyinsCoverage,
    max_premium_out: *mut f64,
    coverage_paid_out: *mut f64,
    profit_out: *mut f64,
) -> CyinsStatus {
    guard(|| {
        let model = model_arg(model)?;
        let coverage = coverage_arg(coverage)?;
        let baseline = solve_baseline(model, DEFAULT_TOL)?;
        let solved = solve_contract(model, &coverage, DEFAULT_TOL)?;
        let s0 = model.initial_state();
        let terms = [
            (max_premium_out, (baseline.values[s0] - solved.values[s0]).max(0.0)),
            (coverage_paid_out, expected_cumulative_coverage(model, &coverage, &solved)),
            (profit_out, insurer_profit(model, &coverage, &baseline, &solved)),
        ];
        for (p, v) in terms {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Closed-form classification of a two-state, two-action model.
///
/// # Safety
/// `model` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cyins_analytic_summary(
    model: *const CyinsModel,
    out: *mut CyinsAnalyticSummary,
) -> CyinsStatus {
    guard(|| {
        let m = TwoStateModel::from_mdp(model_arg(model)?)?;
        let c = m.classify();
        let contract = m.optimal_contract();
        let mut thresholds = [f64::NAN; 2];
        for (slot, t) in thresholds.iter_mut().zip(&c.thresholds) {
            *slot = t.value;
        }
        let h = |s, a| m.h(s, a, 0.0);
        let summary = CyinsAnalyticSummary {
            case_id: match c.case {
                Case::Case1 => CyinsCase::One,
                Case::Case2 => CyinsCase::Two,
                Case::Case3 => CyinsCase::Three,
                Case::Case4a => CyinsCase::FourA,
                Case::Case4b => CyinsCase::FourB,
                Case::Case4c => CyinsCase::FourC,
            },
            rho: c.rho,
            h: [
                h(TwoState::Good, Protection::Strong),
                h(TwoState::Good, Protection::Weak),
                h(TwoState::Bad, Protection::Strong),
                h(TwoState::Bad, Protection::Weak),
            ],
            num_thresholds: c.thresholds.len(),
            thresholds,
            premium_slope: contract.premium_slope,
            region_hi: contract.hi,
            region_hi_closed: i32::from(contract.hi_closed),
        };
        write_out(out, summary)
    })
}

/// Runs a contract sweep and writes it as CSV to `path`.
///
/// `family` is `LINEAR` (grid over `[0, 1]`) or `THRESHOLD` (cutoff grid over
/// `[0, 1.25 max loss]` paying `low_level`/`high_level`). `threads` caps the
/// worker count; 0 uses all cores.
///
/// # Safety
/// `model` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cyins_sweep_csv(
    model: *const CyinsModel,
    family: CyinsCoverageKind,
    low_level: f64,
    high_level: f64,
    points: usize,
    threads: usize,
    path: *const c_char,
) -> CyinsStatus {
    guard(|| {
        let model = model_arg(model)?;
        let path = str_arg(path, "path")?;
        let (family, grid) = match family {
            CyinsCoverageKind::Linear => (SweepFamily::Linear, linear_grid(points)),
            CyinsCoverageKind::Threshold => (
                SweepFamily::Threshold { low_level, high_level },
                threshold_grid(model, points),
            ),
            CyinsCoverageKind::None => {
                return Err(Failure(CyinsStatus::InvalidArgument, "sweep family must be LINEAR or THRESHOLD".into()))
            }
        };
        let options = SweepOptions {
            threads: (threads > 0).then_some(threads),
            ..SweepOptions::default()
        };
        let rows = sweep(model, family, &grid, &options)?;
        std::fs::write(path, sweep_csv(model, &rows, &[], |_, _| vec![]))
            .map_err(|e| Failure(CyinsStatus::IoError, format!("cannot write {path}: {e}")))
    })
}
