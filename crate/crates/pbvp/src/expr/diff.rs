//! Symbolic differentiation with light simplification (constant folding,
//! `0 * x -> 0`, `1 * x -> x`). Nothing beyond that: this is not a CAS.

use super::{BinOp, DiffError, Expr, Func, Var};

fn num(x: f64) -> Expr {
    Expr::Number(x)
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Number(x) if *x == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Number(x) if *x == 1.0)
}

fn is_minus_one(e: &Expr) -> bool {
    matches!(e, Expr::Number(x) if *x == -1.0)
}

fn as_number(e: &Expr) -> Option<f64> {
    match e {
        Expr::Number(x) => Some(*x),
        Expr::Neg(inner) => as_number(inner).map(|x| -x),
        _ => None,
    }
}

pub(super) fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    if let (Some(x), Some(y)) = (as_number(&a), as_number(&b)) {
        return num(x + y);
    }
    Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
}

pub(super) fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return neg(b);
    }
    if let (Some(x), Some(y)) = (as_number(&a), as_number(&b)) {
        return num(x - y);
    }
    Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))
}

pub(super) fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        return num(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    if is_minus_one(&a) {
        return neg(b);
    }
    if is_minus_one(&b) {
        return neg(a);
    }
    if let (Some(x), Some(y)) = (as_number(&a), as_number(&b)) {
        let p = x * y;
        if p.is_finite() {
            return num(p);
        }
    }
    Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))
}

pub(super) fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) && !is_zero(&b) {
        return num(0.0);
    }
    if is_one(&b) {
        return a;
    }
    if let (Some(x), Some(y)) = (as_number(&a), as_number(&b)) {
        if y != 0.0 {
            let q = x / y;
            if q.is_finite() {
                return num(q);
            }
        }
    }
    Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
}

pub(super) fn neg(a: Expr) -> Expr {
    if let Some(x) = as_number(&a) {
        return num(-x);
    }
    if let Expr::Neg(inner) = a {
        return *inner;
    }
    Expr::Neg(Box::new(a))
}

pub(super) fn pow(a: Expr, b: Expr) -> Expr {
    if let Some(y) = as_number(&b) {
        if y == 0.0 {
            return num(1.0);
        }
        if y == 1.0 {
            return a;
        }
        if let Some(x) = as_number(&a) {
            let p = x.powf(y);
            if p.is_finite() {
                return num(p);
            }
        }
    }
    Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

pub(super) fn diff(e: &Expr, v: Var) -> Result<Expr, DiffError> {
    Ok(match e {
        Expr::Number(_) | Expr::Pi | Expr::E => num(0.0),
        Expr::Var(w) => num(if *w == v { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(diff(a, v)?),
        Expr::Bin(BinOp::Add, a, b) => add(diff(a, v)?, diff(b, v)?),
        Expr::Bin(BinOp::Sub, a, b) => sub(diff(a, v)?, diff(b, v)?),
        Expr::Bin(BinOp::Mul, a, b) => add(
            mul(diff(a, v)?, (**b).clone()),
            mul((**a).clone(), diff(b, v)?),
        ),
        Expr::Bin(BinOp::Div, a, b) => div(
            sub(
                mul(diff(a, v)?, (**b).clone()),
                mul((**a).clone(), diff(b, v)?),
            ),
            pow((**b).clone(), num(2.0)),
        ),
        Expr::Bin(BinOp::Pow, base, exponent) => {
            if !exponent.is_constant() {
                return Err(DiffError {
                    node: e.to_string(),
                    reason: "the exponent is not a constant".into(),
                });
            }
            if base.is_constant() {
                return Ok(num(0.0));
            }
            // d/dv base^c = c * base^(c-1) * base'
            let c = (**exponent).clone();
            let cm1 = match as_number(&c) {
                Some(x) => num(x - 1.0),
                None => sub(c.clone(), num(1.0)),
            };
            mul(mul(c, pow((**base).clone(), cm1)), diff(base, v)?)
        }
        Expr::Call(f, a) => {
            let da = diff(a, v)?;
            let outer = match f {
                Func::Sin => Expr::Call(Func::Cos, a.clone()),
                Func::Cos => neg(Expr::Call(Func::Sin, a.clone())),
                Func::Exp => Expr::Call(Func::Exp, a.clone()),
                Func::Log => return Ok(div(da, (**a).clone())),
                Func::Sinh => Expr::Call(Func::Cosh, a.clone()),
                Func::Cosh => Expr::Call(Func::Sinh, a.clone()),
                Func::Tanh => sub(
                    num(1.0),
                    pow(Expr::Call(Func::Tanh, a.clone()), num(2.0)),
                ),
                Func::Abs => {
                    return Err(DiffError {
                        node: e.to_string(),
                        reason: "abs is not differentiable".into(),
                    })
                }
            };
            mul(outer, da)
        }
        Expr::MinMax(m, ..) => {
            return Err(DiffError {
                node: e.to_string(),
                reason: format!("{} is not differentiable", m.name()),
            })
        }
    })
}
