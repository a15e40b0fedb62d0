//! C ABI over the certification and fitting library. All functions are
//! panic-safe, return a `GlrankStatus` code, and pass results through out
//! parameters. Handles are opaque; every `*_new`/`*_parse` has a matching
//! `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use glrank::certify::{
    check_gaussian, check_pseudo, estimate_weak_ranks, GaussianOutcome, RankFactor,
};
use glrank::estim::{fit, FitOptions, FitStatus, Objective, ObjectiveKind};
use glrank::graph::{self, Graph, GraphError};
use glrank::symmat::SymMatrix;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlrankStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    BudgetExceeded = 4,
    NumericError = 5,
    Panic = 6,
}

/// Existence outcome for the numeric Gaussian check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlrankGaussianOutcome {
    Exists = 0,
    NotExists = 1,
    Inconclusive = 2,
}

/// Fit termination status.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlrankFitStatus {
    Converged = 0,
    Diverged = 1,
    Maxiter = 2,
}

/// Estimator objective selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlrankMethod {
    Concord = 0,
    Conspace = 1,
    Gaussian = 2,
}

/// Randomized rank bound estimates; the chain is
/// kappa*+1 <= gamma <= rho <= l <= delta+1.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GlrankRankBounds {
    pub kappa_star_plus1: usize,
    pub gaussian_rank_estimate: usize,
    pub weak_rank_estimate: usize,
    pub gcr: usize,
    pub degeneracy_plus1: usize,
    pub rbar: usize,
}

/// Opaque graph handle.
pub struct GlrankGraph {
    inner: Graph,
}

/// Opaque existence verdict handle (exact pseudo-likelihood check).
pub struct GlrankVerdict {
    exists: bool,
    unique: bool,
    kernel_dim: usize,
    zero_diag_dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: GlrankStatus, msg: impl Into<String>) -> GlrankStatus {
    set_error(msg);
    status
}

fn graph_error_status(e: &GraphError) -> GlrankStatus {
    match e {
        GraphError::BudgetExceeded { .. } | GraphError::RetryBudgetExhausted(_) => {
            GlrankStatus::BudgetExceeded
        }
        _ => GlrankStatus::ParseError,
    }
}

fn guarded(f: impl FnOnce() -> GlrankStatus) -> GlrankStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(GlrankStatus::Panic, "internal panic"),
    }
}

/// Copy the last error message for this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null with `len` 0.
#[no_mangle]
pub unsafe extern "C" fn glrank_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parse an edge-list graph (`p <count>` then `e <i> <j>` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glrank_graph_parse(
    text: *const c_char,
    out: *mut *mut GlrankGraph,
) -> GlrankStatus {
    if text.is_null() || out.is_null() {
        return fail(GlrankStatus::NullPointer, "null argument");
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(_) => return fail(GlrankStatus::ParseError, "graph text is not UTF-8"),
    };
    guarded(|| match graph::parse_edge_list(text) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(GlrankGraph { inner: g }));
            GlrankStatus::Ok
        }
        Err(e) => fail(graph_error_status(&e), e.to_string()),
    })
}

/// Free a graph handle. Null is a no-op.
///
/// # Safety
/// `g` must come from `glrank_graph_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn glrank_graph_free(g: *mut GlrankGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count of a graph handle; 0 on null.
///
/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn glrank_graph_vertex_count(g: *const GlrankGraph) -> usize {
    if g.is_null() {
        0
    } else {
        (*g).inner.p()
    }
}

unsafe fn sym_from_raw(p: usize, a: *const c_double) -> Result<SymMatrix, GlrankStatus> {
    if a.is_null() {
        set_error("null matrix pointer");
        return Err(GlrankStatus::NullPointer);
    }
    let data = std::slice::from_raw_parts(a, p * p);
    let mut m = SymMatrix::zeros(p);
    for i in 0..p {
        for j in i..p {
            let x = data[i * p + j];
            let y = data[j * p + i];
            if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                set_error(format!("matrix not symmetric at ({i}, {j})"));
                return Err(GlrankStatus::InvalidArgument);
            }
            m.set(i, j, x);
        }
    }
    Ok(m)
}

/// Exact pseudo-likelihood existence check of a dense row-major p*p
/// symmetric PSD matrix against the graph's pattern.
///
/// # Safety
/// `a` must point to `p*p` doubles for the graph's `p`; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glrank_certify_pseudo(
    g: *const GlrankGraph,
    a: *const c_double,
    out: *mut *mut GlrankVerdict,
) -> GlrankStatus {
    if g.is_null() || out.is_null() {
        return fail(GlrankStatus::NullPointer, "null argument");
    }
    let graph = &(*g).inner;
    let s = match sym_from_raw(graph.p(), a) {
        Ok(s) => s,
        Err(st) => return st,
    };
    guarded(|| {
        let v = check_pseudo(graph, &RankFactor::from_sym(&s));
        *out = Box::into_raw(Box::new(GlrankVerdict {
            exists: v.exists,
            unique: v.unique,
            kernel_dim: v.kernel_dim,
            zero_diag_dim: v.zero_diag_dim,
        }));
        GlrankStatus::Ok
    })
}

/// Free a verdict handle. Null is a no-op.
///
/// # Safety
/// `v` must come from `glrank_certify_pseudo` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn glrank_verdict_free(v: *mut GlrankVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Verdict accessors; all return 0 on a null handle.
///
/// # Safety
/// `v` must be a live verdict handle or null.
#[no_mangle]
pub unsafe extern "C" fn glrank_verdict_exists(v: *const GlrankVerdict) -> c_int {
    (!v.is_null() && (*v).exists) as c_int
}

/// # Safety
/// `v` must be a live verdict handle or null.
#[no_mangle]
pub unsafe extern "C" fn glrank_verdict_unique(v: *const GlrankVerdict) -> c_int {
    (!v.is_null() && (*v).unique) as c_int
}

/// # Safety
/// `v` must be a live verdict handle or null.
#[no_mangle]
pub unsafe extern "C" fn glrank_verdict_kernel_dim(v: *const GlrankVerdict) -> usize {
    if v.is_null() {
        0
    } else {
        (*v).kernel_dim
    }
}

/// # Safety
/// `v` must be a live verdict handle or null.
#[no_mangle]
pub unsafe extern "C" fn glrank_verdict_zero_diag_dim(v: *const GlrankVerdict) -> usize {
    if v.is_null() {
        0
    } else {
        (*v).zero_diag_dim
    }
}

/// Numeric Gaussian existence check (alternating projections).
///
/// # Safety
/// `a` must point to `p*p` doubles; `outcome` and `residual` writable.
#[no_mangle]
pub unsafe extern "C" fn glrank_check_gaussian(
    g: *const GlrankGraph,
    a: *const c_double,
    tol: c_double,
    max_iter: usize,
    outcome: *mut GlrankGaussianOutcome,
    residual: *mut c_double,
) -> GlrankStatus {
    if g.is_null() || outcome.is_null() || residual.is_null() {
        return fail(GlrankStatus::NullPointer, "null argument");
    }
    let graph = &(*g).inner;
    let s = match sym_from_raw(graph.p(), a) {
        Ok(s) => s,
        Err(st) => return st,
    };
    guarded(|| {
        let v = check_gaussian(graph, &RankFactor::from_sym(&s), tol, max_iter);
        *outcome = match v.outcome {
            GaussianOutcome::Exists => GlrankGaussianOutcome::Exists,
            GaussianOutcome::NotExists => GlrankGaussianOutcome::NotExists,
            GaussianOutcome::Inconclusive => GlrankGaussianOutcome::Inconclusive,
        };
        *residual = v.residual;
        GlrankStatus::Ok
    })
}

/// Fit an estimator; writes the fitted matrix into `omega` (row-major
/// p*p) and the termination data into the out parameters.
///
/// # Safety
/// `a` and `omega` must point to `p*p` doubles; the scalar out
/// parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn glrank_fit(
    g: *const GlrankGraph,
    a: *const c_double,
    method: GlrankMethod,
    tol: c_double,
    max_iter: usize,
    omega: *mut c_double,
    status: *mut GlrankFitStatus,
    objective: *mut c_double,
    iterations: *mut usize,
) -> GlrankStatus {
    if g.is_null() || omega.is_null() || status.is_null() || objective.is_null() || iterations.is_null() {
        return fail(GlrankStatus::NullPointer, "null argument");
    }
    let graph = &(*g).inner;
    let p = graph.p();
    let s = match sym_from_raw(p, a) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let kind = match method {
        GlrankMethod::Concord => ObjectiveKind::Concord,
        GlrankMethod::Conspace => ObjectiveKind::Conspace,
        GlrankMethod::Gaussian => ObjectiveKind::Gaussian,
    };
    guarded(|| {
        let obj = match Objective::new(kind, s) {
            Ok(o) => o,
            Err(e) => return fail(GlrankStatus::InvalidArgument, e.to_string()),
        };
        let opts = FitOptions {
            tol,
            max_iter,
            ..FitOptions::default()
        };
        match fit(&obj, graph, &opts) {
            Ok(res) => {
                let out = std::slice::from_raw_parts_mut(omega, p * p);
                for i in 0..p {
                    for j in 0..p {
                        out[i * p + j] = res.omega.get(i, j);
                    }
                }
                *status = match res.status {
                    FitStatus::Converged => GlrankFitStatus::Converged,
                    FitStatus::Diverged => GlrankFitStatus::Diverged,
                    FitStatus::Maxiter => GlrankFitStatus::Maxiter,
                };
                *objective = res.objective_value;
                *iterations = res.iterations;
                GlrankStatus::Ok
            }
            Err(e) => fail(GlrankStatus::NumericError, e.to_string()),
        }
    })
}

/// Randomized weak rank estimates with the exact bound endpoints.
///
/// # Safety
/// `out` must point to a writable `GlrankRankBounds`.
#[no_mangle]
pub unsafe extern "C" fn glrank_estimate_weak_ranks(
    g: *const GlrankGraph,
    trials: usize,
    seed: u64,
    out: *mut GlrankRankBounds,
) -> GlrankStatus {
    if g.is_null() || out.is_null() {
        return fail(GlrankStatus::NullPointer, "null argument");
    }
    if trials == 0 {
        return fail(GlrankStatus::InvalidArgument, "trials must be >= 1");
    }
    let graph = &(*g).inner;
    guarded(|| match estimate_weak_ranks(graph, trials, seed) {
        Ok(b) => {
            *out = GlrankRankBounds {
                kappa_star_plus1: b.kappa_star_plus1,
                gaussian_rank_estimate: b.gaussian_rank_estimate,
                weak_rank_estimate: b.weak_rank_estimate,
                gcr: b.gcr,
                degeneracy_plus1: b.degeneracy_plus1,
                rbar: b.rbar,
            };
            GlrankStatus::Ok
        }
        Err(e) => fail(GlrankStatus::BudgetExceeded, e.to_string()),
    })
}
