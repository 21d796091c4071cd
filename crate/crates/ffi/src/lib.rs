//! C ABI over the `ctcsim` engine.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every call returns a [`CtcsimStatus`]; on
//! failure, [`ctcsim_last_error_message`] describes the most recent error on
//! the calling thread. Money crosses the boundary as whole cents, children as
//! hundredths (169 means 1.69 children).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ctcsim::classifier::{ReliefCategory, Scenario};
use ctcsim::engine::{Engine, EngineError, EngineOptions};
use ctcsim::money::{Amount, Headcount, Money};
use ctcsim::params::{load_params, ParamSet, ParamsError, ParentalGroup};
use ctcsim::population::{load_children, load_population};
use ctcsim::taxmath::{HouseholdProfile, LiabilityMode, TaxMathError, TaxModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtcsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Validation = 4,
    /// The requested benefit cannot be reached at any income.
    Unreachable = 5,
    Internal = 99,
}

/// Values accepted by `group` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtcsimGroup {
    Married = 0,
    SingleFather = 1,
    SingleMother = 2,
}

/// Values accepted by `scenario` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtcsimScenario {
    S1 = 1,
    S2 = 2,
}

/// Values accepted by `liability` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtcsimLiability {
    Exact = 0,
    Table = 1,
}

/// Parameter set for every available year.
pub struct CtcsimParams(ParamSet);

/// Parameters plus population data.
pub struct CtcsimEngine(Engine);

/// Income thresholds in cents.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CtcsimThresholds {
    pub refund_floor: i64,
    pub full_actc: i64,
    pub full_ctc: i64,
    pub full_combined: i64,
    pub phaseout_start: i64,
    pub total_phaseout: i64,
}

/// Benefit at one income, rounded to cents.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CtcsimBenefit {
    pub tax: i64,
    pub credit: i64,
    pub refund: i64,
    pub total: i64,
}

/// Parents per relief category, lowest income category first.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CtcsimEstimate {
    pub counts: [u64; 6],
    pub proportions: [f64; 6],
    pub total: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

struct Failure(CtcsimStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(CtcsimStatus::NullArgument, format!("{what} is null"))
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure(CtcsimStatus::InvalidArgument, msg.into())
    }
}

impl From<ParamsError> for Failure {
    fn from(e: ParamsError) -> Self {
        EngineError::from(e).into()
    }
}

impl From<TaxMathError> for Failure {
    fn from(e: TaxMathError) -> Self {
        let status = match e {
            TaxMathError::Unreachable { .. } => CtcsimStatus::Unreachable,
            TaxMathError::InvalidTarget { .. } => CtcsimStatus::InvalidArgument,
            _ => CtcsimStatus::Validation,
        };
        Failure(status, e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let status = if e.is_io() {
            CtcsimStatus::Io
        } else {
            match e {
                EngineError::TaxMath(t) => return t.into(),
                _ => CtcsimStatus::Validation,
            }
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CtcsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CtcsimStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            CtcsimStatus::Internal
        }
    }
}

fn group(raw: u32) -> Result<ParentalGroup, Failure> {
    match raw {
        0 => Ok(ParentalGroup::Married),
        1 => Ok(ParentalGroup::SingleFather),
        2 => Ok(ParentalGroup::SingleMother),
        _ => Err(Failure::invalid(format!("unknown group {raw}"))),
    }
}

fn scenario(raw: u32) -> Result<Scenario, Failure> {
    match raw {
        1 => Ok(Scenario::S1),
        2 => Ok(Scenario::S2),
        _ => Err(Failure::invalid(format!("unknown scenario {raw}"))),
    }
}

fn liability(raw: u32) -> Result<LiabilityMode, Failure> {
    match raw {
        0 => Ok(LiabilityMode::Exact),
        1 => Ok(LiabilityMode::Table),
        _ => Err(Failure::invalid(format!("unknown liability mode {raw}"))),
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::invalid(format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or point to a live value of `T`.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

/// # Safety
/// `p` must be null or valid for writing a `T`.
unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    p.write(value);
    Ok(())
}

fn cents(a: Amount) -> i64 {
    a.round_cents().cents()
}

fn with_model<R>(
    params: &CtcsimParams,
    year: i32,
    group_raw: u32,
    children_hundredths: u32,
    liability_raw: u32,
    f: impl FnOnce(&TaxModel<'_>) -> Result<R, Failure>,
) -> Result<R, Failure> {
    let p = params.0.get(year)?;
    let profile = HouseholdProfile::new(
        group(group_raw)?,
        Headcount::from_hundredths(children_hundredths),
    );
    f(&TaxModel::new(p, profile, liability(liability_raw)?))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ctcsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ctcsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a JSON parameter file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_params_load(
    path: *const c_char,
    out: *mut *mut CtcsimParams,
) -> CtcsimStatus {
    guard(|| {
        let path = text(path, "path")?;
        let set = load_params(Path::new(path))?;
        write_out(out, Box::into_raw(Box::new(CtcsimParams(set))), "out")
    })
}

/// Parses parameters from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_params_from_json(
    json: *const c_char,
    out: *mut *mut CtcsimParams,
) -> CtcsimStatus {
    guard(|| {
        let set = ParamSet::from_json_str(text(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(CtcsimParams(set))), "out")
    })
}

/// # Safety
/// `params` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_params_free(params: *mut CtcsimParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Income thresholds for one household.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_thresholds(
    params: *const CtcsimParams,
    year: i32,
    group: u32,
    children_hundredths: u32,
    liability: u32,
    out: *mut CtcsimThresholds,
) -> CtcsimStatus {
    guard(|| {
        let params = borrow(params, "params")?;
        let t = with_model(params, year, group, children_hundredths, liability, |m| {
            Ok(m.thresholds()?)
        })?;
        let value = CtcsimThresholds {
            refund_floor: t.t_refund_floor.cents(),
            full_actc: t.t_full_actc.cents(),
            full_ctc: t.t_full_ctc.cents(),
            full_combined: t.t_full_combined.cents(),
            phaseout_start: t.t_phaseout_start.cents(),
            total_phaseout: t.t_total_phaseout.cents(),
        };
        write_out(out, value, "out")
    })
}

/// Tax, credit and refund at `income_cents`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_benefit(
    params: *const CtcsimParams,
    year: i32,
    group: u32,
    children_hundredths: u32,
    liability: u32,
    income_cents: i64,
    out: *mut CtcsimBenefit,
) -> CtcsimStatus {
    guard(|| {
        let params = borrow(params, "params")?;
        let b = with_model(params, year, group, children_hundredths, liability, |m| {
            Ok(m.benefit(Money::from_cents(income_cents).to_amount()))
        })?;
        let value = CtcsimBenefit {
            tax: cents(b.tax),
            credit: cents(b.credit),
            refund: cents(b.refund),
            total: cents(b.total),
        };
        write_out(out, value, "out")
    })
}

/// Lowest income, in cents, whose total benefit reaches `target_cents`.
///
/// # Safety
/// `params` must be a live handle and `out_income_cents` writable.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_invert_benefit(
    params: *const CtcsimParams,
    year: i32,
    group: u32,
    children_hundredths: u32,
    liability: u32,
    target_cents: i64,
    out_income_cents: *mut i64,
) -> CtcsimStatus {
    guard(|| {
        let params = borrow(params, "params")?;
        let income = with_model(params, year, group, children_hundredths, liability, |m| {
            Ok(m.invert_benefit(Money::from_cents(target_cents).to_amount())?)
        })?;
        write_out(out_income_cents, income.cents(), "out_income_cents")
    })
}

/// Loads parameters and population data. `children_path` may be null, in
/// which case only one-child scenarios can be classified.
///
/// # Safety
/// Paths must be NUL-terminated strings (`children_path` may be null) and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_engine_load(
    params_path: *const c_char,
    population_path: *const c_char,
    children_path: *const c_char,
    liability: u32,
    out: *mut *mut CtcsimEngine,
) -> CtcsimStatus {
    guard(|| {
        let params = load_params(Path::new(text(params_path, "params_path")?))?;
        let mut pop = load_population(Path::new(text(population_path, "population_path")?))
            .map_err(EngineError::from)?;
        if !children_path.is_null() {
            let children = load_children(Path::new(text(children_path, "children_path")?))
                .map_err(EngineError::from)?;
            pop = pop.with_children(children).map_err(EngineError::from)?;
        }
        let options = EngineOptions {
            liability: self::liability(liability)?,
            ..EngineOptions::default()
        };
        write_out(
            out,
            Box::into_raw(Box::new(CtcsimEngine(Engine::new(params, pop, options)))),
            "out",
        )
    })
}

/// # Safety
/// `engine` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_engine_free(engine: *mut CtcsimEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Relief category counts for one year and group under its own rules.
///
/// # Safety
/// `engine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctcsim_classify(
    engine: *const CtcsimEngine,
    year: i32,
    group: u32,
    scenario: u32,
    out: *mut CtcsimEstimate,
) -> CtcsimStatus {
    guard(|| {
        let engine = &borrow(engine, "engine")?.0;
        let est = engine.classify(year, self::group(group)?, self::scenario(scenario)?)?;
        let mut value = CtcsimEstimate {
            total: est.total,
            ..CtcsimEstimate::default()
        };
        for c in ReliefCategory::ALL {
            value.counts[c.index()] = est.count(c);
            value.proportions[c.index()] = est.proportion(c);
        }
        write_out(out, value, "out")
    })
}
