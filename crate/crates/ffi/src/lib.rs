//! C ABI for `qoverflow`.
//!
//! Objects cross the boundary as opaque handles created by `qo_*_new` or
//! `qo_build_*`/`qo_solve_*` and released with the matching `qo_*_free`.
//! Every fallible call returns a `QoStatus`; on failure the message is
//! available from `qo_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qoverflow::approx::{build_h_a0, build_h_ak, ApproximationResult};
use qoverflow::grid::{self, GridSolution, Method};
use qoverflow::simulate::{self, McEstimate};
use qoverflow::surface::betas_of_alpha;
use qoverflow::{Error, LatticePoint, QueueParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Assumption = 3,
    Numerical = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QoMethod {
    Auto = 0,
    GaussSeidel = 1,
    Direct = 2,
}

/// Opaque rate parameters.
pub struct QoParams(QueueParams);

/// Opaque fitted approximation.
pub struct QoApprox(ApproximationResult);

/// Opaque lattice solution on `A_n`.
pub struct QoGrid(GridSolution);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QoAssumptions {
    pub rho1: f64,
    pub rho2: f64,
    pub r: f64,
    pub stable: bool,
    pub ordered: bool,
    pub distinct_utilizations: bool,
    pub conjugate_inside: bool,
    pub geometric_case: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QoComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QoRootPair {
    pub beta1: QoComplex,
    pub beta2: QoComplex,
    pub discriminant: QoComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QoMcEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub hits: u64,
    pub seed: u64,
    pub truncated_paths: u64,
}

impl From<McEstimate> for QoMcEstimate {
    fn from(e: McEstimate) -> Self {
        Self {
            mean: e.mean,
            half_width_95: e.half_width_95,
            trials: e.trials,
            hits: e.hits,
            seed: e.seed,
            truncated_paths: e.truncated_paths,
        }
    }
}

impl From<Complex64> for QoComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QoStatus {
    match e {
        Error::Assumption { .. } => QoStatus::Assumption,
        Error::InvalidRate { .. }
        | Error::NotNormalized { .. }
        | Error::Domain(_)
        | Error::InvalidArgument(_)
        | Error::Config(_) => QoStatus::InvalidArgument,
        _ => QoStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into a status and last-error message.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> QoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QoStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            QoStatus::Panic
        }
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return QoStatus::NullPointer;
            }
        }
    };
}

macro_rules! out {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return QoStatus::NullPointer;
            }
        }
    };
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn qo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates parameters; the rates must be positive and sum to 1.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qo_params_new(
    lambda1: f64,
    lambda2: f64,
    mu1: f64,
    mu2: f64,
    out: *mut *mut QoParams,
) -> QoStatus {
    let slot = out!(out);
    *slot = ptr::null_mut();
    guard(|| {
        let p = QueueParams::new(lambda1, lambda2, mu1, mu2)?;
        *slot = Box::into_raw(Box::new(QoParams(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from `qo_params_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qo_params_free(p: *mut QoParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Fills `out` with the derived rates and assumption flags.
///
/// Returns `QO_STATUS_ASSUMPTION` when a flag required for the harmonic
/// construction fails; `out` is filled either way.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_params_validate(p: *const QoParams, out: *mut QoAssumptions) -> QoStatus {
    let p = deref!(p);
    let out = out!(out);
    guard(|| {
        let d = p.0.rates();
        let rep = p.0.validate();
        *out = QoAssumptions {
            rho1: d.rho1,
            rho2: d.rho2,
            r: d.r,
            stable: rep.stable,
            ordered: rep.ordered,
            distinct_utilizations: rep.distinct_utilizations,
            conjugate_inside: rep.conjugate_inside,
            geometric_case: rep.geometric_case,
        };
        rep.require_harmonic()
    })
}

/// Both roots in `beta` of the characteristic equation at `alpha`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_betas_of_alpha(
    p: *const QoParams,
    alpha_re: f64,
    alpha_im: f64,
    out: *mut QoRootPair,
) -> QoStatus {
    let p = deref!(p);
    let out = out!(out);
    guard(|| {
        let roots = betas_of_alpha(&p.0, Complex64::new(alpha_re, alpha_im))?;
        *out = QoRootPair {
            beta1: roots.beta1.into(),
            beta2: roots.beta2.into(),
            discriminant: roots.discriminant.into(),
        };
        Ok(())
    })
}

/// Builds `h^{a,0}`; `c8` (may be null) receives the upper sandwich constant.
///
/// # Safety
/// `p` and `out` must be valid; `c8` may be null.
#[no_mangle]
pub unsafe extern "C" fn qo_build_h_a0(p: *const QoParams, out: *mut *mut QoApprox, c8: *mut f64) -> QoStatus {
    let p = deref!(p);
    let slot = out!(out);
    *slot = ptr::null_mut();
    guard(|| {
        let h = build_h_a0(&p.0)?;
        if let Some(c) = c8.as_mut() {
            *c = h.c8;
        }
        *slot = Box::into_raw(Box::new(QoApprox(h.approximation)));
        Ok(())
    })
}

/// Builds `h^{a,K}` with `K` extra alpha points on a circle of `radius`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_build_h_ak(p: *const QoParams, k: usize, radius: f64, out: *mut *mut QoApprox) -> QoStatus {
    let p = deref!(p);
    let slot = out!(out);
    *slot = ptr::null_mut();
    guard(|| {
        let fit = build_h_ak(&p.0, k, radius)?;
        *slot = Box::into_raw(Box::new(QoApprox(fit)));
        Ok(())
    })
}

/// Evaluates the approximation at the Y-picture point `(y1, y2)`, `y2 >= 0`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_approx_eval(a: *const QoApprox, y1: i64, y2: i64, out: *mut f64) -> QoStatus {
    let a = deref!(a);
    let out = out!(out);
    guard(|| {
        *out = a.0.value(LatticePoint::y(y1, y2)?);
        Ok(())
    })
}

/// The certificate `c*` and the diagonal index where it is attained.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_approx_cstar(a: *const QoApprox, cstar: *mut f64, argmax: *mut i64) -> QoStatus {
    let a = deref!(a);
    let cstar = out!(cstar);
    let argmax = out!(argmax);
    *cstar = a.0.cstar;
    *argmax = a.0.argmax_diagonal;
    QoStatus::Ok
}

/// Number of fitted coefficients; `c_0` multiplies `h_rho1`.
///
/// # Safety
/// `a` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qo_approx_coefficient_count(a: *const QoApprox) -> usize {
    a.as_ref().map_or(0, |a| a.0.coefficients.len())
}

/// Coefficient `index`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_approx_coefficient(a: *const QoApprox, index: usize, out: *mut QoComplex) -> QoStatus {
    let a = deref!(a);
    let out = out!(out);
    match a.0.coefficients.get(index) {
        Some(c) => {
            *out = (*c).into();
            QoStatus::Ok
        }
        None => {
            set_error("coefficient index out of range");
            QoStatus::InvalidArgument
        }
    }
}

/// # Safety
/// `a` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qo_approx_free(a: *mut QoApprox) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Solves `P_x(tau_n < tau_0)` on `A_n`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_solve_pn(p: *const QoParams, n: usize, method: QoMethod, out: *mut *mut QoGrid) -> QoStatus {
    let p = deref!(p);
    let slot = out!(out);
    *slot = ptr::null_mut();
    let method = match method {
        QoMethod::Auto => Method::Auto,
        QoMethod::GaussSeidel => Method::GaussSeidel,
        QoMethod::Direct => Method::Direct,
    };
    guard(|| {
        let sol = grid::solve_pn(&p.0, n, method)?;
        *slot = Box::into_raw(Box::new(QoGrid(sol)));
        Ok(())
    })
}

/// Value at `(x1, x2)` in `A_n`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_grid_value(g: *const QoGrid, x1: i64, x2: i64, out: *mut f64) -> QoStatus {
    let g = deref!(g);
    let out = out!(out);
    guard(|| {
        *out = g.0.value_at(LatticePoint::x(x1, x2)?)?;
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qo_grid_free(g: *mut QoGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// `P_y(tau < inf)` from the truncated wedge, converged to `rtol`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_solve_py_inf(p: *const QoParams, y1: i64, y2: i64, rtol: f64, out: *mut f64) -> QoStatus {
    let p = deref!(p);
    let out = out!(out);
    guard(|| {
        *out = grid::solve_py_inf(&p.0, LatticePoint::y(y1, y2)?, rtol)?.values[0];
        Ok(())
    })
}

/// Monte Carlo estimate of `P_x(tau_n < tau_0)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_mc_pn(
    p: *const QoParams,
    x1: i64,
    x2: i64,
    n: i64,
    trials: u64,
    seed: u64,
    out: *mut QoMcEstimate,
) -> QoStatus {
    let p = deref!(p);
    let out = out!(out);
    guard(|| {
        *out = simulate::mc_pn(&p.0, LatticePoint::x(x1, x2)?, n, trials, seed)?.into();
        Ok(())
    })
}

/// Monte Carlo estimate of `P_y(tau < inf)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qo_mc_py_inf(
    p: *const QoParams,
    y1: i64,
    y2: i64,
    trials: u64,
    max_steps: u64,
    seed: u64,
    out: *mut QoMcEstimate,
) -> QoStatus {
    let p = deref!(p);
    let out = out!(out);
    guard(|| {
        *out = simulate::mc_py_inf(&p.0, LatticePoint::y(y1, y2)?, trials, max_steps, seed)?.into();
        Ok(())
    })
}
