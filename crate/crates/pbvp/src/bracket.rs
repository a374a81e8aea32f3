//! Validation of candidate lower/upper solutions.
//!
//! A lower solution `alpha` must satisfy, on `[0, 2pi]`,
//!
//! ```text
//! -alpha'' <= f(t, alpha),   alpha(0) - alpha(2pi) < 0,   alpha'(0) - alpha'(2pi) >= 0
//! ```
//!
//! and an upper solution `beta` the mirror inequalities. The boundary-value
//! inequalities are *strict*: the pair is allowed (in fact required) to
//! violate periodicity, which is precisely what makes the method here more
//! general than the classical periodic bracket. Strict inequalities are
//! compared exactly in floating point; equality is a reported failure, with
//! the classical case handled downstream by an explicit override.
//!
//! The one-sided Lipschitz condition
//! `f(t,u) - f(t,v) >= -M^2 (u - v)` for `alpha <= v <= u <= beta`
//! is checked by stratified sampling. That is a confidence check, not a
//! proof, and the report says so.

use crate::error::{Error, Result};
use crate::expr::{central_derivative, central_second_derivative, Field1, Field2};
use crate::grid::{leq_pointwise, Grid, GridFunction, Tolerance};
use crate::linsolve::validate_m;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The data `(f, M)` of the nonlinear problem `-u'' = f(t, u)` with
/// periodic boundary conditions; `M` is the one-sided Lipschitz constant.
#[derive(Clone, Debug)]
pub struct NonlinearPbvp {
    pub f: Field2,
    pub m: f64,
}

impl NonlinearPbvp {
    pub fn new(f: Field2, m: f64) -> Result<Self> {
        validate_m(m)?;
        Ok(Self { f, m })
    }
}

/// A validated pair `alpha <= beta` of candidate lower/upper solutions.
///
/// The ordering is enforced at construction: everything downstream assumes
/// it, so a violating pair is rejected here rather than at verification
/// time.
#[derive(Clone, Debug)]
pub struct BracketPair {
    alpha: Field1,
    beta: Field1,
}

impl BracketPair {
    pub fn new(alpha: Field1, beta: Field1, grid: Grid, tol: Tolerance) -> Result<Self> {
        let a = alpha.sample(grid)?;
        let b = beta.sample(grid)?;
        let rep = leq_pointwise(&a, &b, tol)?;
        if !rep.holds {
            return Err(Error::Bracket(format!(
                "alpha <= beta on [0,2pi] fails at t = {:.6} by {:.3e}",
                rep.worst_t, rep.worst_excess
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &Field1 {
        &self.alpha
    }

    pub fn beta(&self) -> &Field1 {
        &self.beta
    }
}

/// One verified inequality with its margin. For non-strict clauses the
/// margin may be as small as `-tol.abs`; strict clauses require margin > 0
/// exactly. `approximate` marks margins obtained through the finite
/// difference fallback rather than symbolic derivatives.
#[derive(Clone, Debug)]
pub struct ClauseCheck {
    pub label: String,
    pub passed: bool,
    pub margin: f64,
    pub strict: bool,
    pub approximate: bool,
}

/// Result of validating one side of the bracket.
#[derive(Clone, Debug)]
pub struct BracketReport {
    pub clauses: Vec<ClauseCheck>,
}

impl BracketReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ClauseCheck> {
        self.clauses.iter().find(|c| !c.passed)
    }
}

/// Derivatives of a candidate at the grid nodes, symbolic when possible.
struct SampledDerivatives {
    second: GridFunction,
    d0: f64,
    d2pi: f64,
    approximate: bool,
}

fn sample_derivatives(field: &Field1, grid: Grid) -> Result<SampledDerivatives> {
    match field.derivative().and_then(|d1| Ok((d1.clone(), d1.derivative()?))) {
        Ok((d1, d2)) => Ok(SampledDerivatives {
            second: d2.sample(grid)?,
            d0: d1.eval(0.0)?,
            d2pi: d1.eval(crate::grid::TWO_PI)?,
            approximate: false,
        }),
        Err(Error::Diff(_)) => {
            // documented fallback: central finite differences, marked approximate
            let second = GridFunction::try_sample(grid, |t| {
                central_second_derivative(|x| field.eval(x), t)
            })?;
            Ok(SampledDerivatives {
                second,
                d0: central_derivative(|x| field.eval(x), 0.0)?,
                d2pi: central_derivative(|x| field.eval(x), crate::grid::TWO_PI)?,
                approximate: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn differential_clause(
    label: String,
    field: &Field1,
    prob: &NonlinearPbvp,
    grid: Grid,
    tol: Tolerance,
    // lower: margin_i = f(t_i, alpha_i) + alpha''_i; upper: -beta''_i - f(t_i, beta_i)
    lower: bool,
) -> Result<(ClauseCheck, f64, f64)> {
    let values = field.sample(grid)?;
    let der = sample_derivatives(field, grid)?;
    let mut margin = f64::INFINITY;
    for (i, t) in grid.nodes().enumerate() {
        let fv = prob.f.eval(t, values.value(i))?;
        let m = if lower {
            fv + der.second.value(i)
        } else {
            -der.second.value(i) - fv
        };
        if m < margin {
            margin = m;
        }
    }
    Ok((
        ClauseCheck {
            label,
            passed: margin >= -tol.abs,
            margin,
            strict: false,
            approximate: der.approximate,
        },
        der.d0,
        der.d2pi,
    ))
}

/// Check the three lower-solution inequalities; margins are reported even
/// when a clause fails.
pub fn verify_lower(
    alpha: &Field1,
    prob: &NonlinearPbvp,
    grid: Grid,
    tol: Tolerance,
) -> Result<BracketReport> {
    let (diff_clause, d0, d2pi) = differential_clause(
        "-alpha'' <= f(t,alpha)".into(),
        alpha,
        prob,
        grid,
        tol,
        true,
    )?;
    let approximate = diff_clause.approximate;
    let value_jump = alpha.eval(0.0)? - alpha.eval(crate::grid::TWO_PI)?;
    let deriv_jump = d0 - d2pi;
    Ok(BracketReport {
        clauses: vec![
            diff_clause,
            ClauseCheck {
                label: "alpha(0)-alpha(2pi) < 0".into(),
                passed: value_jump < 0.0,
                margin: -value_jump,
                strict: true,
                approximate: false,
            },
            ClauseCheck {
                label: "alpha'(0)-alpha'(2pi) >= 0".into(),
                passed: deriv_jump >= -tol.abs,
                margin: deriv_jump,
                strict: false,
                approximate,
            },
        ],
    })
}

/// Mirror of [`verify_lower`] for the upper solution.
pub fn verify_upper(
    beta: &Field1,
    prob: &NonlinearPbvp,
    grid: Grid,
    tol: Tolerance,
) -> Result<BracketReport> {
    let (diff_clause, d0, d2pi) = differential_clause(
        "-beta'' >= f(t,beta)".into(),
        beta,
        prob,
        grid,
        tol,
        false,
    )?;
    let approximate = diff_clause.approximate;
    let value_jump = beta.eval(0.0)? - beta.eval(crate::grid::TWO_PI)?;
    let deriv_jump = d0 - d2pi;
    Ok(BracketReport {
        clauses: vec![
            diff_clause,
            ClauseCheck {
                label: "beta(0)-beta(2pi) > 0".into(),
                passed: value_jump > 0.0,
                margin: value_jump,
                strict: true,
                approximate: false,
            },
            ClauseCheck {
                label: "beta'(0)-beta'(2pi) <= 0".into(),
                passed: deriv_jump <= tol.abs,
                margin: -deriv_jump,
                strict: false,
                approximate,
            },
        ],
    })
}

/// Sampling check of the one-sided Lipschitz condition.
#[derive(Clone, Debug)]
pub struct LipschitzReport {
    pub passed: bool,
    /// Worst value of `f(t,u) - f(t,v) + M^2 (u - v)` over all sampled
    /// ordered pairs; negative means the condition failed there.
    pub worst_margin: f64,
    pub worst_t: f64,
    pub worst_pair: (f64, f64),
    pub samples_per_node: usize,
    /// Always true: this is a stratified sampling check, not a proof.
    pub sampled: bool,
}

/// At each node draw `samples` ordered pairs `v <= u` in
/// `[alpha(t), beta(t)]` (one coordinate stratified, one uniform) and check
/// `f(t,u) - f(t,v) + M^2 (u - v) >= -tol.abs`. Deterministic: the
/// generator seed is fixed, and worst-margin ties resolve to the smallest
/// node index.
pub fn verify_one_sided_lipschitz(
    prob: &NonlinearPbvp,
    pair: &BracketPair,
    grid: Grid,
    samples: usize,
    tol: Tolerance,
) -> Result<LipschitzReport> {
    if samples < 2 {
        return Err(Error::Parameter(format!(
            "lipschitz check needs at least 2 samples per node, got {samples}"
        )));
    }
    let a = pair.alpha.sample(grid)?;
    let b = pair.beta.sample(grid)?;
    let m2 = prob.m * prob.m;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0517_CAFE);
    let mut worst = f64::INFINITY;
    let mut worst_t = 0.0;
    let mut worst_pair = (0.0, 0.0);
    for (i, t) in grid.nodes().enumerate() {
        let (lo, hi) = (a.value(i), b.value(i));
        let width = hi - lo;
        for k in 0..samples {
            let x1 = lo + width * ((k as f64 + rng.gen::<f64>()) / samples as f64);
            let x2 = lo + width * rng.gen::<f64>();
            let (v, u) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            let margin = prob.f.eval(t, u)? - prob.f.eval(t, v)? + m2 * (u - v);
            if margin < worst {
                worst = margin;
                worst_t = t;
                worst_pair = (v, u);
            }
        }
    }
    Ok(LipschitzReport {
        passed: worst >= -tol.abs,
        worst_margin: worst,
        worst_t,
        worst_pair,
        samples_per_node: samples,
        sampled: true,
    })
}
