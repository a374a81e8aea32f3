//! A small expression language for problem definitions: right-hand sides
//! `f(t, u)`, forcing terms `sigma(t)`, and candidate lower/upper solutions
//! `alpha(t)`, `beta(t)`, with exact symbolic differentiation where the
//! expression is smooth.
//!
//! Grammar (no implicit multiplication, `^` right-associative, unary minus
//! binds between `^` and `*`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' factor)?
//! atom   := number | 'pi' | 'e' | 't' | 'u'
//!         | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```

mod diff;
mod parse;

pub use parse::ParseError;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use std::fmt;

/// Free variables: the independent variable `t` and the unknown `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    T,
    U,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::U => "u",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Single-argument functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    pub(crate) fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
        }
    }
}

/// Two-argument extrema, needed for the truncation operator
/// `p(t, u) = min(beta(t), max(u, alpha(t)))`. Evaluation only; `diff`
/// rejects them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    pub(crate) fn name(self) -> &'static str {
        match self {
            Extremum::Min => "min",
            Extremum::Max => "max",
        }
    }
}

/// Abstract syntax tree of an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(f64),
    Pi,
    E,
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    MinMax(Extremum, Box<Expr>, Box<Expr>),
}

/// Evaluation failure; carries the offending subexpression.
#[derive(Clone, Debug, thiserror::Error)]
#[error("evaluating `{expr}` at {point}: {reason}")]
pub struct EvalError {
    pub expr: String,
    pub point: String,
    pub reason: String,
}

/// Differentiation failure; carries the non-differentiable node.
#[derive(Clone, Debug, thiserror::Error)]
#[error("cannot differentiate `{node}`: {reason}")]
pub struct DiffError {
    pub node: String,
    pub reason: String,
}

impl Expr {
    pub fn parse(source: &str) -> std::result::Result<Self, ParseError> {
        parse::parse(source)
    }

    pub fn number(x: f64) -> Self {
        Expr::Number(x)
    }

    pub fn uses_var(&self, v: Var) -> bool {
        match self {
            Expr::Number(_) | Expr::Pi | Expr::E => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) => e.uses_var(v),
            Expr::Bin(_, a, b) | Expr::MinMax(_, a, b) => a.uses_var(v) || b.uses_var(v),
            Expr::Call(_, a) => a.uses_var(v),
        }
    }

    /// True when the expression contains no variable at all.
    pub fn is_constant(&self) -> bool {
        !self.uses_var(Var::T) && !self.uses_var(Var::U)
    }

    /// IEEE double evaluation. `u` must be supplied iff the expression
    /// mentions `u`; non-finite intermediate results are errors.
    pub fn eval(&self, t: f64, u: Option<f64>) -> std::result::Result<f64, EvalError> {
        let fail = |e: &Expr, reason: &str| {
            let point = match u {
                Some(u) => format!("t = {t}, u = {u}"),
                None => format!("t = {t}"),
            };
            Err(EvalError {
                expr: e.to_string(),
                point,
                reason: reason.to_string(),
            })
        };
        let v = match self {
            Expr::Number(x) => *x,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::U) => match u {
                Some(u) => u,
                None => return fail(self, "expression mentions u but no u was supplied"),
            },
            Expr::Neg(e) => -e.eval(t, u)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(t, u)?;
                let y = b.eval(t, u)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return fail(self, "division by zero");
                        }
                        x / y
                    }
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(t, u)?;
                if *f == Func::Log && x <= 0.0 {
                    return fail(self, "log of a non-positive argument");
                }
                f.apply(x)
            }
            Expr::MinMax(m, a, b) => {
                let x = a.eval(t, u)?;
                let y = b.eval(t, u)?;
                match m {
                    Extremum::Min => x.min(y),
                    Extremum::Max => x.max(y),
                }
            }
        };
        if !v.is_finite() {
            return fail(self, "non-finite result");
        }
        Ok(v)
    }

    /// Exact symbolic derivative with respect to `v`, lightly simplified.
    ///
    /// Fails on `abs`/`min`/`max` anywhere in the tree and on `^` with a
    /// non-constant exponent; callers fall back to finite differences and
    /// mark the result approximate.
    pub fn diff(&self, v: Var) -> std::result::Result<Self, DiffError> {
        diff::diff(self, v)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Number(x) if *x < 0.0 => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, need: bool) -> fmt::Result {
            if need {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Number(x) => write!(f, "{x}"),
            Expr::Pi => write!(f, "pi"),
            Expr::E => write!(f, "e"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(e) => {
                write!(f, "-")?;
                paren(f, e, e.precedence() < 3)
            }
            Expr::Bin(op, a, b) => {
                // additive operators get breathing room, the tighter ones don't
                let (sym, prec) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // right-associative; the base must be an atom
                    paren(f, a, a.precedence() <= 4)?;
                    write!(f, "{sym}")?;
                    paren(f, b, b.precedence() < 3)
                } else {
                    paren(f, a, a.precedence() < prec)?;
                    write!(f, "{sym}")?;
                    // left-associative: a - b + c prints as-is, a - (b + c) keeps parens
                    paren(f, b, b.precedence() <= prec)
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::MinMax(m, a, b) => write!(f, "{}({a}, {b})", m.name()),
        }
    }
}

/// An expression over `t` only: forcing terms, weights, candidate solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1 {
    expr: Expr,
}

impl Field1 {
    pub fn new(expr: Expr) -> Result<Self> {
        if expr.uses_var(Var::U) {
            return Err(Error::Expression(format!(
                "`{expr}` mentions u; expected a function of t alone"
            )));
        }
        Ok(Self { expr })
    }

    pub fn parse(source: &str) -> Result<Self> {
        Ok(Self::new(Expr::parse(source)?)?)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            expr: Expr::Number(c),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.expr.eval(t, None)?)
    }

    pub fn sample(&self, grid: Grid) -> Result<GridFunction> {
        GridFunction::try_sample(grid, |t| self.eval(t))
    }

    /// Symbolic `d/dt`.
    pub fn derivative(&self) -> Result<Self> {
        Ok(Self {
            expr: self.expr.diff(Var::T)?,
        })
    }
}

impl fmt::Display for Field1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// An expression over `t` and `u`: right-hand sides `f(t, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2 {
    expr: Expr,
}

impl Field2 {
    pub fn new(expr: Expr) -> Self {
        Self { expr }
    }

    pub fn parse(source: &str) -> Result<Self> {
        Ok(Self::new(Expr::parse(source)?))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, t: f64, u: f64) -> Result<f64> {
        Ok(self.expr.eval(t, Some(u))?)
    }

    /// Symbolic `d/du`, used by the Newton verifier's Jacobian.
    pub fn partial_u(&self) -> Result<Self> {
        Ok(Self {
            expr: self.expr.diff(Var::U)?,
        })
    }
}

impl fmt::Display for Field2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// Step for 5-point central first derivatives (the documented fallback when
/// symbolic differentiation is unavailable).
pub(crate) const FD_STEP: f64 = 1e-5;

/// 5-point central first derivative, `O(h^4)` truncation.
pub(crate) fn central_derivative(f: impl Fn(f64) -> Result<f64>, x: f64) -> Result<f64> {
    let h = FD_STEP;
    Ok((-f(x + 2.0 * h)? + 8.0 * f(x + h)? - 8.0 * f(x - h)? + f(x - 2.0 * h)?) / (12.0 * h))
}

/// 5-point central second derivative. A larger step than [`FD_STEP`]
/// balances roundoff in the `1/h^2` scaling.
pub(crate) fn central_second_derivative(f: impl Fn(f64) -> Result<f64>, x: f64) -> Result<f64> {
    let h = 6e-4;
    Ok(
        (-f(x + 2.0 * h)? + 16.0 * f(x + h)? - 30.0 * f(x)? + 16.0 * f(x - h)?
            - f(x - 2.0 * h)?)
            / (12.0 * h * h),
    )
}
