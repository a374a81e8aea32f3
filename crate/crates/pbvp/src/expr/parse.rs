//! Recursive-descent parser with byte-accurate error offsets.

use super::{BinOp, Expr, Extremum, Func, Var};

/// Syntax error with the byte offset of the offending token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number `{x}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            b'^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                if i < b.len() && b[i] == b'.' {
                    i += 1;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // scientific suffix only when followed by digits; otherwise the
                // `e` is left to be lexed as the constant and rejected later
                // (no implicit multiplication)
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut j = i + 1;
                    if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                        j += 1;
                    }
                    if j < b.len() && b[j].is_ascii_digit() {
                        while j < b.len() && b[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::new(start, format!("bad number `{text}`")))?;
                toks.push((start, Tok::Num(value)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(ParseError::new(
                    i,
                    format!("unexpected character `{}`", &src[i..i + c.utf8_len()]),
                ))
            }
        }
    }
    toks.push((src.len(), Tok::Eof));
    Ok(toks)
}

trait Utf8Len {
    fn utf8_len(self) -> usize;
}

impl Utf8Len for u8 {
    fn utf8_len(self) -> usize {
        match self {
            0x00..=0x7f => 1,
            0xc0..=0xdf => 2,
            0xe0..=0xef => 3,
            _ => 4,
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(
                self.offset(),
                format!("expected {what}, found {}", self.peek().describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.term()?;
            acc = Expr::Bin(op, Box::new(acc), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.factor()?;
            acc = Expr::Bin(op, Box::new(acc), Box::new(rhs));
        }
    }

    // factor := '-' factor | atom ('^' factor)?
    // `^` binds tighter than unary minus, so -t^2 is -(t^2).
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (offset, tok) = self.bump();
        match tok {
            Tok::Num(x) => Ok(Expr::Number(x)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(offset, &name),
            other => Err(ParseError::new(
                offset,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }

    fn ident(&mut self, offset: usize, name: &str) -> Result<Expr, ParseError> {
        match name {
            "pi" => return Ok(Expr::Pi),
            "e" => return Ok(Expr::E),
            "t" => return Ok(Expr::Var(Var::T)),
            "u" => return Ok(Expr::Var(Var::U)),
            _ => {}
        }
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            "tanh" => Some(Func::Tanh),
            "abs" => Some(Func::Abs),
            _ => None,
        };
        let extremum = match name {
            "min" => Some(Extremum::Min),
            "max" => Some(Extremum::Max),
            _ => None,
        };
        if func.is_none() && extremum.is_none() {
            return Err(ParseError::new(
                offset,
                format!("unknown identifier `{name}`"),
            ));
        }
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        let arity = if func.is_some() { 1 } else { 2 };
        if args.len() != arity {
            return Err(ParseError::new(
                offset,
                format!("{name} takes {arity} argument(s), got {}", args.len()),
            ));
        }
        if let Some(f) = func {
            let a = args.pop().unwrap();
            Ok(Expr::Call(f, Box::new(a)))
        } else {
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            Ok(Expr::MinMax(extremum.unwrap(), Box::new(a), Box::new(b)))
        }
    }
}

pub(super) fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(
            p.offset(),
            format!("expected an operator or end of input, found {}", p.peek().describe()),
        ));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_zero() {
        assert_eq!(parse("0").unwrap(), Expr::Number(0.0));
    }

    #[test]
    fn two_top_level_additions() {
        let e = parse("-u^3 + cos(t) + cos(t)^3").unwrap();
        // left-associative: ((-u^3 + cos t) + cos^3 t)
        let Expr::Bin(BinOp::Add, l, _) = &e else {
            panic!("expected top-level addition, got {e:?}")
        };
        assert!(matches!(**l, Expr::Bin(BinOp::Add, ..)));
    }

    #[test]
    fn unary_minus_under_power() {
        // -u^3 must parse as -(u^3)
        let e = parse("-u^3").unwrap();
        assert!(matches!(e, Expr::Neg(ref inner)
            if matches!(**inner, Expr::Bin(BinOp::Pow, ..))));
    }

    #[test]
    fn error_offsets() {
        let cases: &[(&str, usize)] = &[
            ("sin(t", 5),       // unbalanced paren, reported at end of input
            ("2t", 1),          // no implicit multiplication
            (")", 0),
            ("1 +", 3),
            ("foo(1)", 0),      // unknown identifier
            ("min(t)", 0),      // wrong arity, reported at the call site
            ("t * * 2", 4),
            ("1 $ 2", 2),       // unexpected character
            ("exp()", 4),       // empty argument
            ("max(1, 2, 3)", 0),
        ];
        for (src, want) in cases {
            let err = parse(src).unwrap_err();
            assert_eq!(err.offset, *want, "source `{src}`: {}", err.message);
        }
    }

    #[test]
    fn scientific_notation_vs_euler_constant() {
        assert_eq!(parse("2e3").unwrap(), Expr::Number(2000.0));
        assert_eq!(parse("1.5E-2").unwrap(), Expr::Number(0.015));
        // `2e` is a number followed by the constant e: implicit multiplication, rejected
        assert_eq!(parse("2e").unwrap_err().offset, 1);
        // bare `e` is Euler's number
        assert_eq!(parse("e").unwrap(), Expr::E);
    }

    #[test]
    fn whitespace_does_not_shift_offsets() {
        let err = parse("sin (t").unwrap_err();
        assert_eq!(err.offset, 6);
    }
}
