//! C ABI over the epitrace core.
//!
//! Objects cross the boundary as opaque handles (`EtGrid`, `EtDomain`) that the caller
//! releases with the matching `*_free`. Every fallible call returns an `EtStatus`; on a
//! non-zero status `et_last_error` holds a message for the calling thread. Panics are
//! caught at the boundary and reported as `ET_STATUS_PANIC`.

use epitrace::bblcheck::bbl_gap;
use epitrace::cli::{run_config, ExperimentConfig};
use epitrace::hopflax::hopflax_apply;
use epitrace::quad::QuadSpec;
use epitrace::sharpconst::assemble_constants;
use epitrace::transforms::legendre_nd;
use epitrace::{BblParams, DomainSpec, EpigraphDomain, Error, ExtGridFn, GridSpec, NormSpec};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Hypothesis = 4,
    NotNormalizable = 5,
    DomainRejected = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

/// A grid function with values in ℝ ∪ {+∞}.
pub struct EtGrid(ExtGridFn);

/// An epigraph domain {x_n ≥ φ(x₁)}.
pub struct EtDomain(EpigraphDomain);

/// Result of a discrete gap evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EtGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub error_estimate: f64,
}

/// Sharp constants for one (n, p, a) on one domain, Euclidean norm.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EtConstants {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    pub q_trace: f64,
    pub d_npa: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EtStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::SpacingMismatch { .. } => EtStatus::DimensionMismatch,
        Error::InvalidSample { .. } | Error::InvalidArgument(_) => EtStatus::InvalidArgument,
        Error::Hypothesis(_) => EtStatus::Hypothesis,
        Error::NotNormalizable(_) => EtStatus::NotNormalizable,
        Error::DomainRejected(_) => EtStatus::DomainRejected,
        Error::Parse(_) => EtStatus::Parse,
        Error::Io(_) => EtStatus::Io,
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (EtStatus, String)>) -> EtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EtStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            EtStatus::Panic
        }
    }
}

fn core<T>(r: epitrace::Result<T>) -> Result<T, (EtStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (EtStatus, String) {
    (EtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (EtStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (EtStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<T>(p: *mut T, v: T, what: &str) -> Result<(), (EtStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EtStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (EtStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn et_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn et_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a grid on the box [lo, hi] with `res` nodes per axis (row-major values, last
/// axis fastest). Values may be +INFINITY; NaN and −∞ are rejected.
///
/// # Safety
/// `lo`, `hi`, `res` point to `dim` elements, `values` to `len` elements, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_grid_new(
    dim: usize,
    lo: *const f64,
    hi: *const f64,
    res: *const usize,
    values: *const f64,
    len: usize,
    out_grid: *mut *mut EtGrid,
) -> EtStatus {
    guard(|| {
        let spec = core(GridSpec::new(slice(lo, dim, "lo")?.to_vec(), slice(hi, dim, "hi")?.to_vec(), slice(res, dim, "res")?.to_vec()))?;
        let f = core(ExtGridFn::new(spec, slice(values, len, "values")?.to_vec()))?;
        out(out_grid, Box::into_raw(Box::new(EtGrid(f))), "out_grid")
    })
}

/// # Safety
/// `grid` is NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn et_grid_free(grid: *mut EtGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes, or 0 for NULL.
///
/// # Safety
/// `grid` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn et_grid_len(grid: *const EtGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.values().len())
}

/// Copies the node values into `buf`, which must hold `et_grid_len` doubles.
///
/// # Safety
/// `grid` is a live handle and `buf` has room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn et_grid_values(grid: *const EtGrid, buf: *mut f64, len: usize) -> EtStatus {
    guard(|| {
        let g = handle(grid, "grid")?;
        let v = g.0.values();
        if len < v.len() {
            return Err((EtStatus::InvalidArgument, format!("buffer holds {len} values, grid has {}", v.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Discrete Legendre transform on the dual box [dual_lo, dual_hi] with `dual_res` nodes.
///
/// # Safety
/// `grid` is a live handle; the dual arrays have one entry per dimension.
#[no_mangle]
pub unsafe extern "C" fn et_legendre(
    grid: *const EtGrid,
    dual_lo: *const f64,
    dual_hi: *const f64,
    dual_res: *const usize,
    out_grid: *mut *mut EtGrid,
) -> EtStatus {
    guard(|| {
        let g = handle(grid, "grid")?;
        let n = g.0.dim();
        let lo = slice(dual_lo, n, "dual_lo")?;
        let hi = slice(dual_hi, n, "dual_hi")?;
        let bx: Vec<[f64; 2]> = lo.iter().zip(hi).map(|(a, b)| [*a, *b]).collect();
        let r = core(legendre_nd(&g.0, &bx, slice(dual_res, n, "dual_res")?))?;
        out(out_grid, Box::into_raw(Box::new(EtGrid(r.values))), "out_grid")
    })
}

/// Hopf–Lax operator Q_h^W(g) on the grid of g.
///
/// # Safety
/// `g` and `w` are live handles.
#[no_mangle]
pub unsafe extern "C" fn et_hopflax(g: *const EtGrid, w: *const EtGrid, h: f64, out_grid: *mut *mut EtGrid) -> EtStatus {
    guard(|| {
        let r = core(hopflax_apply(&handle(g, "g")?.0, &handle(w, "w")?.0, h))?;
        out(out_grid, Box::into_raw(Box::new(EtGrid(r.values))), "out_grid")
    })
}

/// Domain from a kind name (`halfspace`, `cone`, `paraboloid`, `affine_max`) and its
/// parameters, as in the config format.
///
/// # Safety
/// `kind` is a NUL-terminated string and `params` points to `nparams` doubles.
#[no_mangle]
pub unsafe extern "C" fn et_domain_new(
    kind: *const c_char,
    n: usize,
    params: *const f64,
    nparams: usize,
    out_domain: *mut *mut EtDomain,
) -> EtStatus {
    guard(|| {
        let spec = DomainSpec { kind: text(kind, "kind")?.to_string(), params: slice(params, nparams, "params")?.to_vec() };
        let d = core(EpigraphDomain::from_spec(&spec, n))?;
        out(out_domain, Box::into_raw(Box::new(EtDomain(d))), "out_domain")
    })
}

/// # Safety
/// `domain` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn et_domain_free(domain: *mut EtDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Whether x lies in Ω + h·e.
///
/// # Safety
/// `domain` is a live handle and `x` has `len` entries.
#[no_mangle]
pub unsafe extern "C" fn et_domain_contains(domain: *const EtDomain, x: *const f64, len: usize, h: f64, inside: *mut bool) -> EtStatus {
    guard(|| {
        let v = core(handle(domain, "domain")?.0.contains(slice(x, len, "x")?, h))?;
        out(inside, v, "inside")
    })
}

/// Whether x lies in B_h, the domain of Q_h on a general convex epigraph.
///
/// # Safety
/// `domain` is a live handle and `x` has `len` entries.
#[no_mangle]
pub unsafe extern "C" fn et_domain_bh_membership(domain: *const EtDomain, x: *const f64, len: usize, h: f64, inside: *mut bool) -> EtStatus {
    guard(|| {
        let v = core(handle(domain, "domain")?.0.bh_membership(slice(x, len, "x")?, h))?;
        out(inside, v, "inside")
    })
}

/// Discrete gap for g and W on grids with odd resolutions, without a tail bound.
///
/// # Safety
/// `g` and `w` are live handles and `result` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_bbl_gap(g: *const EtGrid, w: *const EtGrid, n: usize, a: f64, p: f64, h: f64, result: *mut EtGap) -> EtStatus {
    guard(|| {
        let params = core(BblParams::new(n, a, p).and_then(|b| b.with_h(h)))?;
        let r = core(bbl_gap(&handle(g, "g")?.0, &handle(w, "w")?.0, &params, None))?;
        out(result, EtGap { lhs: r.lhs, rhs: r.rhs, gap: r.gap, error_estimate: r.quadrature_error_estimate }, "result")
    })
}

/// Sharp constants on `domain` in the Euclidean norm.
///
/// # Safety
/// `domain` is a live handle and `result` is writable.
#[no_mangle]
pub unsafe extern "C" fn et_sharp_constants(domain: *const EtDomain, a: f64, p: f64, result: *mut EtConstants) -> EtStatus {
    guard(|| {
        let d = &handle(domain, "domain")?.0;
        let params = core(BblParams::new(d.dim(), a, p))?;
        let k = core(assemble_constants(&params, d, &NormSpec::Euclidean, &QuadSpec::default()))?;
        let c = EtConstants { c: k.c, a: k.a_const, b: k.b, d: k.d, u: k.u, v: k.v, theta: k.theta, q_trace: k.q_trace, d_npa: k.d_npa };
        out(result, c, "result")
    })
}

/// Parses and runs a JSON experiment config given as text. The report is returned as a
/// JSON string to release with `et_string_free`; `passed` receives the overall outcome.
///
/// # Safety
/// `config_json` is a NUL-terminated string; the out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn et_run_config(config_json: *const c_char, report_json: *mut *mut c_char, passed: *mut bool) -> EtStatus {
    guard(|| {
        let cfg = core(ExperimentConfig::parse(text(config_json, "config_json")?, "<ffi>"))?;
        let (report, _) = run_config(&cfg);
        let json = serde_json::to_string(&report).map_err(|e| (EtStatus::Io, e.to_string()))?;
        let c = CString::new(json).map_err(|e| (EtStatus::Io, e.to_string()))?;
        out(passed, report.passed, "passed")?;
        out(report_json, c.into_raw(), "report_json")
    })
}

/// # Safety
/// `s` is NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn et_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
