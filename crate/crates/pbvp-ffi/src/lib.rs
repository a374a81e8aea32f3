//! C ABI for the periodic boundary value problem solver.
//!
//! Conventions:
//!
//! - Handles (`PbvpConfig`, `PbvpLinearSolution`, `PbvpIteration`) are
//!   opaque; create them through the `pbvp_*` constructors and release
//!   them with the matching `*_free`. A null handle is always safe to
//!   free.
//! - Every fallible call returns a [`PbvpStatus`]. On any status other
//!   than `PBVP_STATUS_OK` (and `PBVP_STATUS_NO_CONVERGENCE`, which still
//!   yields a usable iteration handle), output pointers are left null and
//!   [`pbvp_last_error_message`] describes the failure. The message
//!   pointer is owned by a thread-local slot and is valid until the next
//!   failing call on the same thread.
//! - Array getters copy into caller-provided buffers; query the length
//!   with the corresponding `*_num_nodes` first.

use pbvp::bracket::{BracketPair, NonlinearPbvp};
use pbvp::cli::exit_code;
use pbvp::compare::{
    check_nonnegativity_budget, check_nonpositivity_boundary, check_nonpositivity_budget,
    check_nonpositivity_uniform, Candidate, ComparisonInstance, ConclusionStatus, CriterionId,
    OmegaSpec,
};
use pbvp::config::ProblemConfig;
use pbvp::expr::Field1;
use pbvp::linsolve::{solve, LinearPbvp, LinearSolution, Sigma};
use pbvp::monotone::{iterate, IterationConfig, IterationHistory};
use pbvp::{Error, Grid, GridFunction, Tolerance};
use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::path::Path;
use std::ptr;

/// Outcome of an FFI call. The numeric values match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbvpStatus {
    Ok = 0,
    /// verify: hypotheses failed, criterion not applicable
    HypothesesNotMet = 1,
    Config = 2,
    Numeric = 3,
    Anomaly = 4,
    NoConvergence = 5,
    Bracket = 6,
    /// null pointer, bad UTF-8, undersized buffer
    InvalidArgument = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> PbvpStatus {
    set_error(err);
    match exit_code_for(err) {
        exit_code::CONFIG => PbvpStatus::Config,
        exit_code::BRACKET => PbvpStatus::Bracket,
        exit_code::ANOMALY => PbvpStatus::Anomaly,
        exit_code::NOT_CONVERGED => PbvpStatus::NoConvergence,
        _ => PbvpStatus::Numeric,
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parameter(_) | Error::Parse(_) | Error::Expression(_) => {
            exit_code::CONFIG
        }
        Error::Bracket(_) => exit_code::BRACKET,
        Error::Anomaly(_) => exit_code::ANOMALY,
        Error::NoConvergence { .. } => exit_code::NOT_CONVERGED,
        _ => exit_code::NUMERIC,
    }
}

fn invalid(msg: &str) -> PbvpStatus {
    set_error(msg);
    PbvpStatus::InvalidArgument
}

unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, PbvpStatus> {
    if ptr.is_null() {
        return Err(invalid(&format!("{what}: null pointer")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(&format!("{what}: invalid UTF-8")))
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn pbvp_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. Never null; empty
/// before the first failure. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn pbvp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// A parsed problem definition (see the config format in the README).
pub struct PbvpConfig(ProblemConfig);

/// Parse a config from JSON text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn pbvp_config_parse(
    text: *const c_char,
    out: *mut *mut PbvpConfig,
) -> PbvpStatus {
    if out.is_null() {
        return invalid("out: null pointer");
    }
    *out = ptr::null_mut();
    let text = match required_str(text, "text") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match ProblemConfig::from_str(text) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(PbvpConfig(cfg)));
            PbvpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Read and parse a config file.
///
/// # Safety
/// As [`pbvp_config_parse`], with `path` a NUL-terminated file path.
#[no_mangle]
pub unsafe extern "C" fn pbvp_config_read(
    path: *const c_char,
    out: *mut *mut PbvpConfig,
) -> PbvpStatus {
    if out.is_null() {
        return invalid("out: null pointer");
    }
    *out = ptr::null_mut();
    let path = match required_str(path, "path") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match ProblemConfig::from_path(Path::new(path)) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(PbvpConfig(cfg)));
            PbvpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `cfg` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn pbvp_config_free(cfg: *mut PbvpConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

fn resolve_grid(cfg: &ProblemConfig, n_override: usize) -> Result<Grid, Error> {
    if n_override > 0 {
        Grid::new(n_override)
    } else {
        cfg.resolve_grid(None)
    }
}

/// Solution of the linear problem plus its diagnostics.
pub struct PbvpLinearSolution {
    grid: Grid,
    sol: LinearSolution,
}

/// Solve the `linear` section of a config. `n_override = 0` keeps the
/// config's grid.
///
/// # Safety
/// `cfg` must be a live config handle; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn pbvp_solve_linear(
    cfg: *const PbvpConfig,
    n_override: usize,
    out: *mut *mut PbvpLinearSolution,
) -> PbvpStatus {
    if out.is_null() {
        return invalid("out: null pointer");
    }
    *out = ptr::null_mut();
    let Some(config) = cfg.as_ref() else {
        return invalid("cfg: null pointer");
    };
    let Some(lin) = config.0.linear.as_ref() else {
        set_error("linear: section required by pbvp_solve_linear");
        return PbvpStatus::Config;
    };
    let result = resolve_grid(&config.0, n_override).and_then(|grid| {
        let p = LinearPbvp::new(lin.m, Sigma::Field(lin.sigma.clone()), lin.mu, lin.lambda)?;
        Ok((grid, solve(&p, grid)?))
    });
    match result {
        Ok((grid, sol)) => {
            *out = Box::into_raw(Box::new(PbvpLinearSolution { grid, sol }));
            PbvpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Number of grid nodes (`n + 1`).
///
/// # Safety
/// `sol` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_num_nodes(sol: *const PbvpLinearSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.grid.num_nodes())
}

/// # Safety
/// `sol` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_c1(sol: *const PbvpLinearSolution) -> c_double {
    sol.as_ref().map_or(f64::NAN, |s| s.sol.c1)
}

/// # Safety
/// `sol` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_c2(sol: *const PbvpLinearSolution) -> c_double {
    sol.as_ref().map_or(f64::NAN, |s| s.sol.c2)
}

/// `u'(0)`.
///
/// # Safety
/// `sol` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_du0(sol: *const PbvpLinearSolution) -> c_double {
    sol.as_ref().map_or(f64::NAN, |s| s.sol.du0)
}

/// `u'(2pi)`.
///
/// # Safety
/// `sol` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_du2pi(sol: *const PbvpLinearSolution) -> c_double {
    sol.as_ref().map_or(f64::NAN, |s| s.sol.du2pi)
}

unsafe fn copy_values(
    values: &[f64],
    buf: *mut c_double,
    len: usize,
    what: &str,
) -> PbvpStatus {
    if buf.is_null() {
        return invalid(&format!("{what}: null buffer"));
    }
    if len < values.len() {
        return invalid(&format!(
            "{what}: buffer holds {len} values, need {}",
            values.len()
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    PbvpStatus::Ok
}

/// Copy the grid nodes `t_i` into `buf` (capacity `len`).
///
/// # Safety
/// `sol` must be a live solution handle; `buf` must point at `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_copy_nodes(
    sol: *const PbvpLinearSolution,
    buf: *mut c_double,
    len: usize,
) -> PbvpStatus {
    let Some(s) = sol.as_ref() else {
        return invalid("sol: null pointer");
    };
    let nodes: Vec<f64> = s.grid.nodes().collect();
    copy_values(&nodes, buf, len, "nodes")
}

/// Copy the solution values `u(t_i)` into `buf` (capacity `len`).
///
/// # Safety
/// As [`pbvp_linear_solution_copy_nodes`].
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_copy_values(
    sol: *const PbvpLinearSolution,
    buf: *mut c_double,
    len: usize,
) -> PbvpStatus {
    let Some(s) = sol.as_ref() else {
        return invalid("sol: null pointer");
    };
    copy_values(s.sol.u.values(), buf, len, "values")
}

/// # Safety
/// `sol` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn pbvp_linear_solution_free(sol: *mut PbvpLinearSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Result of the monotone iteration.
pub struct PbvpIteration {
    grid: Grid,
    hist: IterationHistory,
}

/// Run the monotone iteration for a config with `problem` and `bracket`
/// sections. Returns `PBVP_STATUS_OK` on convergence and
/// `PBVP_STATUS_NO_CONVERGENCE` (with a usable handle) when the iteration
/// budget ran out; `force != 0` overrides failing bracket validation.
///
/// # Safety
/// `cfg` must be a live config handle; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iterate(
    cfg: *const PbvpConfig,
    n_override: usize,
    force: c_int,
    out: *mut *mut PbvpIteration,
) -> PbvpStatus {
    if out.is_null() {
        return invalid("out: null pointer");
    }
    *out = ptr::null_mut();
    let Some(config) = cfg.as_ref() else {
        return invalid("cfg: null pointer");
    };
    let Some(problem) = config.0.problem.as_ref() else {
        set_error("problem: section required by pbvp_iterate");
        return PbvpStatus::Config;
    };
    let Some(bracket) = config.0.bracket.as_ref() else {
        set_error("bracket: section required by pbvp_iterate");
        return PbvpStatus::Config;
    };
    let result = (|| -> Result<(Grid, IterationHistory), Error> {
        let grid = resolve_grid(&config.0, n_override)?;
        let tol = Tolerance::new(config.0.numerics.abs_tol, config.0.numerics.rel_tol)?;
        let prob = NonlinearPbvp::new(problem.f.clone(), problem.m)?;
        let pair = BracketPair::new(bracket.alpha.clone(), bracket.beta.clone(), grid, tol)?;
        let mut icfg = IterationConfig::new(grid);
        icfg.tol = tol;
        icfg.max_iter = config.0.numerics.max_iter;
        icfg.force = force != 0;
        Ok((grid, iterate(&pair, &prob, &icfg)?))
    })();
    match result {
        Ok((grid, hist)) => {
            let converged = hist.converged;
            *out = Box::into_raw(Box::new(PbvpIteration { grid, hist }));
            if converged {
                PbvpStatus::Ok
            } else {
                set_error("iteration budget exhausted before the sup-norm test passed");
                PbvpStatus::NoConvergence
            }
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `it` must be a live iteration handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_converged(it: *const PbvpIteration) -> c_int {
    it.as_ref().map_or(0, |i| i.hist.converged as c_int)
}

/// Number of steps that moved an iterate.
///
/// # Safety
/// `it` must be a live iteration handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_iterations(it: *const PbvpIteration) -> usize {
    it.as_ref().map_or(0, |i| i.hist.iterations())
}

/// Zero when bracket validation was overridden and failed.
///
/// # Safety
/// `it` must be a live iteration handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_hypotheses_met(it: *const PbvpIteration) -> c_int {
    it.as_ref().map_or(0, |i| i.hist.hypotheses_met as c_int)
}

/// # Safety
/// `it` must be a live iteration handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_num_nodes(it: *const PbvpIteration) -> usize {
    it.as_ref().map_or(0, |i| i.grid.num_nodes())
}

/// `sup(psi - phi)`, the width between the extremal solutions.
///
/// # Safety
/// `it` must be a live iteration handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_gap(it: *const PbvpIteration) -> c_double {
    it.as_ref()
        .and_then(|i| i.hist.gap().ok())
        .unwrap_or(f64::NAN)
}

/// Largest monotone-chain violation observed.
///
/// # Safety
/// `it` must be a live iteration handle.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_chain_violation(it: *const PbvpIteration) -> c_double {
    it.as_ref().map_or(f64::NAN, |i| i.hist.chain_violation)
}

unsafe fn copy_grid_function(
    g: Option<&GridFunction>,
    buf: *mut c_double,
    len: usize,
    what: &str,
) -> PbvpStatus {
    match g {
        Some(g) => copy_values(g.values(), buf, len, what),
        None => invalid(&format!("{what}: null handle")),
    }
}

/// Copy the minimal solution `phi` into `buf`.
///
/// # Safety
/// `it` must be a live iteration handle; `buf` as in the other copies.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_copy_phi(
    it: *const PbvpIteration,
    buf: *mut c_double,
    len: usize,
) -> PbvpStatus {
    copy_grid_function(it.as_ref().map(|i| i.hist.phi()), buf, len, "phi")
}

/// Copy the maximal solution `psi` into `buf`.
///
/// # Safety
/// As [`pbvp_iteration_copy_phi`].
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_copy_psi(
    it: *const PbvpIteration,
    buf: *mut c_double,
    len: usize,
) -> PbvpStatus {
    copy_grid_function(it.as_ref().map(|i| i.hist.psi()), buf, len, "psi")
}

/// # Safety
/// `it` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn pbvp_iteration_free(it: *mut PbvpIteration) {
    if !it.is_null() {
        drop(Box::from_raw(it));
    }
}

/// Check one of the sign-comparison criteria (`"2.1"`, `"2.2"`, `"2.3"`,
/// `"2.4"`) for the candidate expression `u_expr`. `omega_expr` may be
/// null for `2.2`; for `2.3` it must evaluate to a nonnegative constant.
/// `n = 0` picks the default grid.
///
/// Returns `PBVP_STATUS_OK` when the hypotheses pass and the conclusion
/// holds, `PBVP_STATUS_HYPOTHESES_NOT_MET` when the criterion is not
/// applicable, `PBVP_STATUS_ANOMALY` when hypotheses pass but the
/// conclusion fails. `out_extremum` (nullable) receives the extremal
/// value of `u` that the conclusion constrains.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_extremum` must be null
/// or a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn pbvp_verify(
    criterion: *const c_char,
    u_expr: *const c_char,
    omega_expr: *const c_char,
    m: c_double,
    n: usize,
    out_extremum: *mut c_double,
) -> PbvpStatus {
    let criterion = match required_str(criterion, "criterion") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let u_src = match required_str(u_expr, "u_expr") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let omega_src = if omega_expr.is_null() {
        None
    } else {
        match required_str(omega_expr, "omega_expr") {
            Ok(s) => Some(s),
            Err(status) => return status,
        }
    };

    let result = (|| -> Result<pbvp::compare::ComparisonReport, Error> {
        let id: CriterionId = criterion.parse()?;
        let grid = if n > 0 {
            Grid::new(n)?
        } else {
            Grid::new(pbvp::grid::DEFAULT_SOLVE_N)?
        };
        let tol = Tolerance::default();
        let u = Candidate::parse(u_src)?;
        let omega = |src: Option<&str>| -> Result<Field1, Error> {
            src.map(Field1::parse).transpose()?.ok_or_else(|| {
                Error::Parameter("omega_expr is required for this criterion".into())
            })
        };
        Ok(match id {
            CriterionId::NonpositivityBudget => {
                let inst =
                    ComparisonInstance::new(u, OmegaSpec::Expr(omega(omega_src)?), m)?;
                check_nonpositivity_budget(&inst, grid, tol)?
            }
            CriterionId::NonpositivityBoundary => {
                check_nonpositivity_boundary(&u, m, grid, tol)?
            }
            CriterionId::NonpositivityUniform => {
                let field = omega(omega_src)?;
                if !field.expr().is_constant() {
                    return Err(Error::Parameter(
                        "criterion 2.3 needs a constant omega".into(),
                    ));
                }
                check_nonpositivity_uniform(&u, field.eval(0.0)?, m, grid, tol)?
            }
            CriterionId::NonnegativityBudget => {
                let inst =
                    ComparisonInstance::new(u, OmegaSpec::Expr(omega(omega_src)?), m)?;
                check_nonnegativity_budget(&inst, grid, tol)?
            }
        })
    })();
    match result {
        Ok(report) => {
            if !out_extremum.is_null() {
                *out_extremum = report.worst_node.1;
            }
            match report.conclusion {
                ConclusionStatus::Holds => PbvpStatus::Ok,
                ConclusionStatus::NotApplicable => {
                    set_error("hypotheses not satisfied; criterion not applicable");
                    PbvpStatus::HypothesesNotMet
                }
                ConclusionStatus::Anomaly => {
                    set_error("hypotheses hold but the conclusion fails");
                    PbvpStatus::Anomaly
                }
            }
        }
        Err(e) => status_of(&e),
    }
}
