//! Executable sign-comparison criteria.
//!
//! Each check verifies a set of hypotheses about a candidate function `u`
//! and then tests the conclusion they force:
//!
//! - [`check_nonpositivity_budget`] (criterion `2.1`): if there is a weight
//!   `omega >= 0` with `-u'' + M^2 u + omega <= 0` on `[0, 2pi]` and the
//!   weighted integral of `omega` covers the boundary-jump budget
//!   `mu M (e^{2piM} - 1) - lambda (e^{2piM} + 1)`, then `u <= 0`.
//! - [`check_nonpositivity_boundary`] (criterion `2.2`): if
//!   `-u'' + M^2 u <= 0` and
//!   `u(0) - u(2pi) <= (u'(0) - u'(2pi)) / (M tanh(pi M))`, then `u <= 0`.
//! - [`check_nonpositivity_uniform`] (criterion `2.3`): a constant slack
//!   `omega >= 0` with `-u'' + M^2 u <= -omega`, a *strictly* positive
//!   boundary expression, and `omega >= M^2/2 * [mu - lambda/(M tanh(pi M))]`
//!   force `u <= 0`.
//! - [`check_nonnegativity_budget`] (criterion `2.4`): the mirror image of
//!   `2.1` with `omega <= 0` and the reversed budget, forcing `u >= 0`.
//!
//! A report never asserts that the underlying mathematics is true: it
//! records hypothesis satisfaction and conclusion satisfaction separately.
//! Hypotheses passing while the conclusion fails is flagged as ANOMALY and
//! treated as a tripwire for the whole tower above this module.

use crate::error::{Error, Result};
use crate::expr::{central_derivative, central_second_derivative, Field1};
use crate::grid::{Grid, GridFunction, Tolerance, TWO_PI};
use crate::linsolve::validate_m;
use crate::quad::simpson;
use std::fmt;
use std::str::FromStr;

/// The function under test: an expression (with symbolic derivatives) or
/// sampled values with the endpoint derivatives supplied by the caller.
#[derive(Clone, Debug)]
pub enum Candidate {
    Expr(Field1),
    Sampled {
        u: GridFunction,
        du0: f64,
        du2pi: f64,
    },
}

impl Candidate {
    pub fn parse(source: &str) -> Result<Self> {
        Ok(Candidate::Expr(Field1::parse(source)?))
    }
}

/// The weight `omega` of the budget criteria.
#[derive(Clone, Debug)]
pub enum OmegaSpec {
    Expr(Field1),
    Sampled(GridFunction),
    Constant(f64),
}

impl OmegaSpec {
    fn sample(&self, grid: Grid) -> Result<GridFunction> {
        match self {
            OmegaSpec::Expr(f) => f.sample(grid),
            OmegaSpec::Sampled(g) => {
                if g.grid() != grid {
                    return Err(Error::GridMismatch(g.grid().n(), grid.n()));
                }
                Ok(g.clone())
            }
            OmegaSpec::Constant(c) => GridFunction::constant(grid, *c),
        }
    }
}

/// A candidate together with its weight and shift constant. The boundary
/// jumps `mu`, `lambda` are *recomputed* from `u` at construction; they are
/// not independent inputs.
#[derive(Clone, Debug)]
pub struct ComparisonInstance {
    pub u: Candidate,
    pub omega: OmegaSpec,
    pub m: f64,
    mu: f64,
    lambda: f64,
}

impl ComparisonInstance {
    pub fn new(u: Candidate, omega: OmegaSpec, m: f64) -> Result<Self> {
        validate_m(m)?;
        let (mu, lambda) = jumps_of(&u)?;
        Ok(Self {
            u,
            omega,
            m,
            mu,
            lambda,
        })
    }

    /// As [`new`](Self::new), additionally checking that externally stated
    /// jumps match the ones recomputed from `u` to 1e-9.
    pub fn with_declared_jumps(
        u: Candidate,
        omega: OmegaSpec,
        m: f64,
        mu: f64,
        lambda: f64,
    ) -> Result<Self> {
        let inst = Self::new(u, omega, m)?;
        if (inst.mu - mu).abs() > 1e-9 * (1.0 + mu.abs()) {
            return Err(Error::Parameter(format!(
                "declared mu = {mu} but u(0) - u(2pi) = {}",
                inst.mu
            )));
        }
        if (inst.lambda - lambda).abs() > 1e-9 * (1.0 + lambda.abs()) {
            return Err(Error::Parameter(format!(
                "declared lambda = {lambda} but u'(0) - u'(2pi) = {}",
                inst.lambda
            )));
        }
        Ok(inst)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

fn jumps_of(u: &Candidate) -> Result<(f64, f64)> {
    match u {
        Candidate::Expr(f) => {
            let (d0, d2pi) = match f.derivative() {
                Ok(df) => (df.eval(0.0)?, df.eval(TWO_PI)?),
                Err(Error::Diff(_)) => (
                    central_derivative(|x| f.eval(x), 0.0)?,
                    central_derivative(|x| f.eval(x), TWO_PI)?,
                ),
                Err(e) => return Err(e),
            };
            Ok((f.eval(0.0)? - f.eval(TWO_PI)?, d0 - d2pi))
        }
        Candidate::Sampled { u, du0, du2pi } => {
            let n = u.grid().n();
            Ok((u.value(0) - u.value(n), du0 - du2pi))
        }
    }
}

/// One hypothesis with its margin (nonnegative margin = satisfied).
#[derive(Clone, Debug)]
pub struct HypothesisCheck {
    pub label: String,
    pub passed: bool,
    pub margin: f64,
    /// True when the margin used finite differences instead of symbolic
    /// derivatives (expression fallback or grid-sampled input).
    pub approximate: bool,
}

/// Conclusion status. The conclusion is only evaluated when every
/// hypothesis passes; otherwise the criterion is simply not applicable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConclusionStatus {
    Holds,
    /// Hypotheses pass but the conclusion fails numerically. Given a sound
    /// implementation this must never happen.
    Anomaly,
    NotApplicable,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub hypotheses: Vec<HypothesisCheck>,
    pub conclusion: ConclusionStatus,
    /// `(t, u(t))` at the node closest to violating the conclusion.
    pub worst_node: (f64, f64),
}

impl ComparisonReport {
    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.passed)
    }

    pub fn is_anomaly(&self) -> bool {
        self.conclusion == ConclusionStatus::Anomaly
    }
}

/// Which of the four criteria to run; the canonical identifiers accepted on
/// the command line are `2.1`, `2.2`, `2.3`, `2.4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriterionId {
    NonpositivityBudget,
    NonpositivityBoundary,
    NonpositivityUniform,
    NonnegativityBudget,
}

impl FromStr for CriterionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2.1" => Ok(Self::NonpositivityBudget),
            "2.2" => Ok(Self::NonpositivityBoundary),
            "2.3" => Ok(Self::NonpositivityUniform),
            "2.4" => Ok(Self::NonnegativityBudget),
            other => Err(Error::Parameter(format!(
                "unknown criterion `{other}`; expected one of 2.1, 2.2, 2.3, 2.4"
            ))),
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::NonpositivityBudget => "2.1",
            Self::NonpositivityBoundary => "2.2",
            Self::NonpositivityUniform => "2.3",
            Self::NonnegativityBudget => "2.4",
        };
        f.write_str(s)
    }
}

/// Candidate values plus second derivative at the nodes.
struct SampledCandidate {
    u: GridFunction,
    /// second derivative; `None` at the endpoints when only interior FD
    /// differences are available
    upp: Vec<Option<f64>>,
    approximate: bool,
}

fn sample_candidate(c: &Candidate, grid: Grid) -> Result<SampledCandidate> {
    match c {
        Candidate::Expr(f) => {
            let u = f.sample(grid)?;
            match f.derivative().and_then(|d| d.derivative()) {
                Ok(d2) => {
                    let s = d2.sample(grid)?;
                    Ok(SampledCandidate {
                        u,
                        upp: s.values().iter().map(|&v| Some(v)).collect(),
                        approximate: false,
                    })
                }
                Err(Error::Diff(_)) => {
                    let upp = grid
                        .nodes()
                        .map(|t| central_second_derivative(|x| f.eval(x), t).map(Some))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(SampledCandidate {
                        u,
                        upp,
                        approximate: true,
                    })
                }
                Err(e) => Err(e),
            }
        }
        Candidate::Sampled { u, .. } => {
            if u.grid() != grid {
                return Err(Error::GridMismatch(u.grid().n(), grid.n()));
            }
            let n = grid.n();
            let h2 = grid.h() * grid.h();
            let v = u.values();
            let mut upp = vec![None; n + 1];
            for i in 1..n {
                upp[i] = Some((v[i - 1] - 2.0 * v[i] + v[i + 1]) / h2);
            }
            Ok(SampledCandidate {
                u: u.clone(),
                upp,
                approximate: true, // O(h^2) second differences
            })
        }
    }
}

/// min over checked nodes of `sign * (u'' - M^2 u - omega)`; with
/// `sign = +1` this is the margin of `-u'' + M^2 u + omega <= 0`, with
/// `sign = -1` the margin of `-u'' + M^2 u + omega >= 0`.
///
/// The returned scale is built from the operand magnitudes, not the
/// (possibly fully cancelled) result, so that roundoff in `u'' - M^2 u`
/// for exponentially large candidates is not misread as a failure.
fn shifted_operator_margin(
    sc: &SampledCandidate,
    omega: &GridFunction,
    m: f64,
    sign: f64,
) -> (f64, f64) {
    let mut margin = f64::INFINITY;
    let mut scale = 0.0f64;
    for (i, upp) in sc.upp.iter().enumerate() {
        if let Some(upp) = upp {
            let value = -upp + m * m * sc.u.value(i) + omega.value(i);
            margin = margin.min(-sign * value);
            scale = scale.max(upp.abs() + m * m * sc.u.value(i).abs() + omega.value(i).abs());
        }
    }
    (margin, 1.0 + scale)
}

/// `int_0^{2pi} (e^{Ms} + e^{-M(s-2pi)}) omega(s) ds`.
fn weighted_omega_integral(omega: &GridFunction, m: f64) -> Result<f64> {
    let weighted = GridFunction::try_sample(omega.grid(), |t| {
        Ok((m * t).exp() + (-m * (t - TWO_PI)).exp())
    })?
    .zip_with(omega, |w, o| w * o)?;
    Ok(simpson(&weighted))
}

/// Boundary-jump budget `mu M (e^{2piM} - 1) - lambda (e^{2piM} + 1)`.
fn jump_budget(m: f64, mu: f64, lambda: f64) -> f64 {
    let grow_m1 = (TWO_PI * m).exp_m1();
    mu * m * grow_m1 - lambda * (grow_m1 + 2.0)
}

fn conclude_nonpositive(u: &GridFunction, all_pass: bool, tol: Tolerance) -> (ConclusionStatus, (f64, f64)) {
    let (max, idx) = u.max_with_index();
    let worst = (u.grid().node(idx), max);
    if !all_pass {
        (ConclusionStatus::NotApplicable, worst)
    } else if max <= tol.abs {
        (ConclusionStatus::Holds, worst)
    } else {
        (ConclusionStatus::Anomaly, worst)
    }
}

fn conclude_nonnegative(u: &GridFunction, all_pass: bool, tol: Tolerance) -> (ConclusionStatus, (f64, f64)) {
    let (min, idx) = u.min_with_index();
    let worst = (u.grid().node(idx), min);
    if !all_pass {
        (ConclusionStatus::NotApplicable, worst)
    } else if min >= -tol.abs {
        (ConclusionStatus::Holds, worst)
    } else {
        (ConclusionStatus::Anomaly, worst)
    }
}

/// Criterion `2.1`: weighted nonpositivity with an integral budget.
pub fn check_nonpositivity_budget(
    inst: &ComparisonInstance,
    grid: Grid,
    tol: Tolerance,
) -> Result<ComparisonReport> {
    let sc = sample_candidate(&inst.u, grid)?;
    let omega = inst.omega.sample(grid)?;

    let (omega_min, omega_idx) = omega.min_with_index();
    let h_omega = HypothesisCheck {
        label: "omega >= 0 on [0,2pi]".into(),
        passed: omega_min >= -tol.abs * (1.0 + omega.sup_norm()),
        margin: omega_min,
        approximate: false,
    };
    let _ = omega_idx;

    let (margin, scale) = shifted_operator_margin(&sc, &omega, inst.m, 1.0);
    let h_diff = HypothesisCheck {
        label: "-u'' + M^2 u + omega <= 0".into(),
        passed: margin >= -tol.abs * scale,
        margin,
        approximate: sc.approximate,
    };

    let lhs = weighted_omega_integral(&omega, inst.m)?;
    let rhs = jump_budget(inst.m, inst.mu, inst.lambda);
    let budget_margin = lhs - rhs;
    let h_budget = HypothesisCheck {
        label: "integral budget covers the boundary jumps".into(),
        passed: budget_margin >= -tol.abs * (1.0 + lhs.abs() + rhs.abs()),
        margin: budget_margin,
        approximate: false,
    };

    let all = h_omega.passed && h_diff.passed && h_budget.passed;
    let (conclusion, worst_node) = conclude_nonpositive(&sc.u, all, tol);
    Ok(ComparisonReport {
        hypotheses: vec![h_omega, h_diff, h_budget],
        conclusion,
        worst_node,
    })
}

/// Criterion `2.2`: nonpositivity from the homogeneous inequality and the
/// `tanh` boundary comparison.
pub fn check_nonpositivity_boundary(
    u: &Candidate,
    m: f64,
    grid: Grid,
    tol: Tolerance,
) -> Result<ComparisonReport> {
    validate_m(m)?;
    let sc = sample_candidate(u, grid)?;
    let (mu, lambda) = jumps_of(u)?;
    let zero = GridFunction::zeros(grid);

    let (margin, scale) = shifted_operator_margin(&sc, &zero, m, 1.0);
    let h_diff = HypothesisCheck {
        label: "-u'' + M^2 u <= 0".into(),
        passed: margin >= -tol.abs * scale,
        margin,
        approximate: sc.approximate,
    };

    let bound = lambda / (m * (std::f64::consts::PI * m).tanh());
    let boundary_margin = bound - mu;
    let h_boundary = HypothesisCheck {
        label: "u(0)-u(2pi) <= (u'(0)-u'(2pi))/(M tanh(pi M))".into(),
        passed: boundary_margin >= -tol.abs * (1.0 + mu.abs() + bound.abs()),
        margin: boundary_margin,
        approximate: false,
    };

    let all = h_diff.passed && h_boundary.passed;
    let (conclusion, worst_node) = conclude_nonpositive(&sc.u, all, tol);
    Ok(ComparisonReport {
        hypotheses: vec![h_diff, h_boundary],
        conclusion,
        worst_node,
    })
}

/// Criterion `2.3`: nonpositivity from a constant slack `omega` and a
/// strictly positive boundary expression. The strict inequality is
/// compared exactly (no tolerance); a tie reports "not applicable" rather
/// than guessing.
pub fn check_nonpositivity_uniform(
    u: &Candidate,
    omega: f64,
    m: f64,
    grid: Grid,
    tol: Tolerance,
) -> Result<ComparisonReport> {
    validate_m(m)?;
    if !(omega >= 0.0) {
        return Err(Error::Parameter(format!(
            "omega must be a nonnegative constant, got {omega}"
        )));
    }
    let sc = sample_candidate(u, grid)?;
    let (mu, lambda) = jumps_of(u)?;
    let omega_fn = GridFunction::constant(grid, omega)?;

    let (margin, scale) = shifted_operator_margin(&sc, &omega_fn, m, 1.0);
    let h_diff = HypothesisCheck {
        label: "-u'' + M^2 u <= -omega".into(),
        passed: margin >= -tol.abs * scale,
        margin,
        approximate: sc.approximate,
    };

    let bound = lambda / (m * (std::f64::consts::PI * m).tanh());
    let strict_margin = mu - bound;
    let h_strict = HypothesisCheck {
        label: "u(0)-u(2pi) > (u'(0)-u'(2pi))/(M tanh(pi M))".into(),
        passed: strict_margin > 0.0,
        margin: strict_margin,
        approximate: false,
    };

    let slack_rhs = 0.5 * m * m * (mu - bound);
    let slack_margin = omega - slack_rhs;
    let h_slack = HypothesisCheck {
        label: "omega >= M^2/2 [u(0)-u(2pi) - (u'(0)-u'(2pi))/(M tanh(pi M))]".into(),
        passed: slack_margin >= -tol.abs * (1.0 + omega + slack_rhs.abs()),
        margin: slack_margin,
        approximate: false,
    };

    let all = h_diff.passed && h_strict.passed && h_slack.passed;
    let (conclusion, worst_node) = conclude_nonpositive(&sc.u, all, tol);
    Ok(ComparisonReport {
        hypotheses: vec![h_diff, h_strict, h_slack],
        conclusion,
        worst_node,
    })
}

/// Criterion `2.4`: the mirror image of `2.1`, forcing `u >= 0`.
pub fn check_nonnegativity_budget(
    inst: &ComparisonInstance,
    grid: Grid,
    tol: Tolerance,
) -> Result<ComparisonReport> {
    let sc = sample_candidate(&inst.u, grid)?;
    let omega = inst.omega.sample(grid)?;

    let (omega_max, _) = omega.max_with_index();
    let h_omega = HypothesisCheck {
        label: "omega <= 0 on [0,2pi]".into(),
        passed: -omega_max >= -tol.abs * (1.0 + omega.sup_norm()),
        margin: -omega_max,
        approximate: false,
    };

    let (margin, scale) = shifted_operator_margin(&sc, &omega, inst.m, -1.0);
    let h_diff = HypothesisCheck {
        label: "-u'' + M^2 u + omega >= 0".into(),
        passed: margin >= -tol.abs * scale,
        margin,
        approximate: sc.approximate,
    };

    let lhs = weighted_omega_integral(&omega, inst.m)?;
    let rhs = jump_budget(inst.m, inst.mu, inst.lambda);
    let budget_margin = rhs - lhs;
    let h_budget = HypothesisCheck {
        label: "integral budget covers the boundary jumps (reversed)".into(),
        passed: budget_margin >= -tol.abs * (1.0 + lhs.abs() + rhs.abs()),
        margin: budget_margin,
        approximate: false,
    };

    let all = h_omega.passed && h_diff.passed && h_budget.passed;
    let (conclusion, worst_node) = conclude_nonnegative(&sc.u, all, tol);
    Ok(ComparisonReport {
        hypotheses: vec![h_omega, h_diff, h_budget],
        conclusion,
        worst_node,
    })
}
