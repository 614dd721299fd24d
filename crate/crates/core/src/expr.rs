//! Expression trees for chart entries a_ij(x), b_i(x).
//!
//! The language is deliberately small: numeric literals, coordinates
//! `x1..xN`, arithmetic `+ - * / ^`, and the unary functions sqrt, sin,
//! cos, exp, log. Parsing is recursive descent; `^` binds tighter than
//! unary minus and associates to the right.

use crate::autodiff::Real;
use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based coordinate index; `x1` parses to `Coord(0)`.
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

impl Expr {
    /// Largest coordinate index mentioned, as a 1-based count (0 if none).
    pub fn max_coord(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Coord(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.max_coord().max(b.max_coord()),
            Expr::Neg(a) | Expr::Sqrt(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a)
            | Expr::Log(a) => a.max_coord(),
        }
    }

    /// Evaluate at a point whose coordinates may be jet scalars.
    ///
    /// Domain violations (square root of a negative, log of a non-positive,
    /// division by zero) are hard errors on the primal part.
    pub fn eval<S: Real>(&self, x: &[S]) -> Result<S> {
        match self {
            Expr::Const(c) => Ok(S::from_f64(*c)),
            Expr::Coord(i) => x.get(*i).cloned().ok_or_else(|| {
                Error::Eval(format!(
                    "coordinate x{} used on a chart of dimension {}",
                    i + 1,
                    x.len()
                ))
            }),
            Expr::Add(a, b) => Ok(a.eval(x)? + b.eval(x)?),
            Expr::Sub(a, b) => Ok(a.eval(x)? - b.eval(x)?),
            Expr::Mul(a, b) => Ok(a.eval(x)? * b.eval(x)?),
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den.re() == 0.0 {
                    return Err(Error::Eval("division by zero".into()));
                }
                Ok(a.eval(x)? / den)
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                if let Expr::Const(p) = **b {
                    if p.fract() == 0.0 && p.abs() <= 16.0 {
                        let k = p as i32;
                        if k < 0 && base.re() == 0.0 {
                            return Err(Error::Eval("zero raised to a negative power".into()));
                        }
                        return Ok(base.powi(k));
                    }
                    if base.re() <= 0.0 {
                        return Err(Error::Eval(format!(
                            "non-integer power of a non-positive base {}",
                            base.re()
                        )));
                    }
                    return Ok(base.powf(p));
                }
                if base.re() <= 0.0 {
                    return Err(Error::Eval(format!(
                        "variable power of a non-positive base {}",
                        base.re()
                    )));
                }
                let expo = b.eval(x)?;
                Ok((base.ln() * expo).exp())
            }
            Expr::Neg(a) => Ok(-a.eval(x)?),
            Expr::Sqrt(a) => {
                let v = a.eval(x)?;
                if v.re() < 0.0 {
                    return Err(Error::Eval(format!(
                        "square root of negative value {}",
                        v.re()
                    )));
                }
                Ok(v.sqrt())
            }
            Expr::Sin(a) => Ok(a.eval(x)?.sin()),
            Expr::Cos(a) => Ok(a.eval(x)?.cos()),
            Expr::Exp(a) => Ok(a.eval(x)?.exp()),
            Expr::Log(a) => {
                let v = a.eval(x)?;
                if v.re() <= 0.0 {
                    return Err(Error::Eval(format!(
                        "log of non-positive value {}",
                        v.re()
                    )));
                }
                Ok(v.ln())
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        // Parenthesization mirrors the parser exactly so printed text
        // reparses to the same tree: left-associative binaries wrap an
        // equal-precedence right child, the right-associative power wraps
        // an equal-precedence left child.
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Add(a, b) => {
                child(f, a, a.prec() < 1)?;
                write!(f, " + ")?;
                child(f, b, b.prec() <= 1)
            }
            Expr::Sub(a, b) => {
                child(f, a, a.prec() < 1)?;
                write!(f, " - ")?;
                child(f, b, b.prec() <= 1)
            }
            Expr::Mul(a, b) => {
                child(f, a, a.prec() < 2)?;
                write!(f, " * ")?;
                child(f, b, b.prec() <= 2)
            }
            Expr::Div(a, b) => {
                child(f, a, a.prec() < 2)?;
                write!(f, " / ")?;
                child(f, b, b.prec() <= 2)
            }
            Expr::Pow(a, b) => {
                // A negative literal base must keep its parentheses, else
                // "-3^2" would reparse as -(3^2).
                let neg_literal = matches!(**a, Expr::Const(c) if c < 0.0);
                child(f, a, a.prec() <= 4 || neg_literal)?;
                write!(f, "^")?;
                child(f, b, b.prec() < 4)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                child(f, a, a.prec() < 3)
            }
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
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
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                break;
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(start),
                other => {
                    return Err(Error::Parse {
                        position: start,
                        message: format!("unexpected character '{}'", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
        Ok(out)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. "2e" followed by "xp(...)").
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map(Tok::Num).map_err(|_| Error::Parse {
            position: start,
            message: format!("malformed number '{text}'"),
        })
    }

    fn ident(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(
            std::str::from_utf8(&self.src[start..self.pos])
                .expect("ascii slice")
                .to_string(),
        )
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.cursor).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks
            .get(self.cursor)
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.cursor).map(|(t, _)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(_) => {
                self.cursor -= 1;
                Err(Error::Parse {
                    position: self.pos(),
                    message: format!("expected {what}"),
                })
            }
            None => Err(Error::Parse {
                position: self.end,
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn add_sub(&mut self) -> Result<Expr> {
        let mut lhs = self.mul_div()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(lhs.into(), self.mul_div()?.into());
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(lhs.into(), self.mul_div()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn mul_div(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(lhs.into(), self.unary()?.into());
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(lhs.into(), self.unary()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.unary()?;
            // Fold a negated literal so "-3" and "3" print symmetrically.
            if let Expr::Const(c) = inner {
                return Ok(Expr::Const(-c));
            }
            return Ok(Expr::Neg(inner.into()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            // Right-associative, and the exponent may carry a sign: 2^-3.
            let expo = self.unary()?;
            return Ok(Expr::Pow(base.into(), expo.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let position = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::Ident(name)) => self.ident_tail(&name, position),
            Some(Tok::LParen) => {
                let inner = self.add_sub()?;
                self.expect(Tok::RParen, "closing ')'")?;
                Ok(inner)
            }
            Some(_) => Err(Error::Parse {
                position,
                message: "expected a number, coordinate, function, or '('".into(),
            }),
            None => Err(Error::Parse {
                position: self.end,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn ident_tail(&mut self, name: &str, position: usize) -> Result<Expr> {
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let idx: usize = rest.parse().map_err(|_| Error::Parse {
                    position,
                    message: format!("coordinate index out of range in '{name}'"),
                })?;
                if idx == 0 {
                    return Err(Error::Parse {
                        position,
                        message: "coordinates are numbered from x1".into(),
                    });
                }
                return Ok(Expr::Coord(idx - 1));
            }
        }
        let func: fn(Box<Expr>) -> Expr = match name {
            "sqrt" => Expr::Sqrt,
            "sin" => Expr::Sin,
            "cos" => Expr::Cos,
            "exp" => Expr::Exp,
            "log" => Expr::Log,
            _ => {
                return Err(Error::Parse {
                    position,
                    message: format!("unknown identifier '{name}'"),
                })
            }
        };
        self.expect(Tok::LParen, &format!("'(' after {name}"))?;
        let arg = self.add_sub()?;
        self.expect(Tok::RParen, "closing ')'")?;
        Ok(func(arg.into()))
    }
}

/// Parse a single expression; trailing input is an error.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut parser = Parser {
        toks,
        cursor: 0,
        end: text.len(),
    };
    let expr = parser.add_sub()?;
    if parser.cursor != parser.toks.len() {
        return Err(Error::Parse {
            position: parser.pos(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn parses_the_documented_example() {
        let e = p("x1^2 + sin(x2)");
        assert_eq!(
            e,
            Expr::Add(
                Expr::Pow(Expr::Coord(0).into(), Expr::Const(2.0).into()).into(),
                Expr::Sin(Expr::Coord(1).into()).into()
            )
        );
    }

    #[test]
    fn reports_error_position_at_end_of_input() {
        let err = parse_expr("x1 +").unwrap_err();
        match err {
            Error::Parse { position, .. } => assert_eq!(position, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_identifier() {
        assert!(parse_expr("tan(x1)").is_err());
        assert!(parse_expr("y1").is_err());
        assert!(parse_expr("x0").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("1 + 2 * 3").eval::<f64>(&[]).unwrap(), 7.0);
        // Non-literal exponent goes through exp(log), hence the epsilon.
        assert_relative_eq!(
            p("2 ^ 3 ^ 2").eval::<f64>(&[]).unwrap(),
            512.0,
            epsilon = 1e-10
        );
        assert_eq!(p("8 - 3 - 2").eval::<f64>(&[]).unwrap(), 3.0);
        assert_eq!(p("-2^2").eval::<f64>(&[]).unwrap(), -4.0);
        assert_eq!(p("(-2)^2").eval::<f64>(&[]).unwrap(), 4.0);
        assert_eq!(p("2^-2").eval::<f64>(&[]).unwrap(), 0.25);
    }

    #[test]
    fn eval_matches_reference_values() {
        let x = [0.3, -0.7];
        let e = p("sqrt(1 + x1^2) * cos(x2) - exp(x1) / (2 + x2)");
        let want = (1.0 + 0.3f64 * 0.3).sqrt() * (-0.7f64).cos() - (0.3f64).exp() / (2.0 - 0.7);
        assert_relative_eq!(e.eval::<f64>(&x).unwrap(), want, epsilon = 1e-15);
    }

    #[test]
    fn domain_violations_are_hard_errors() {
        assert!(p("sqrt(0 - 1)").eval::<f64>(&[]).is_err());
        assert!(p("log(0)").eval::<f64>(&[]).is_err());
        assert!(p("1 / (x1 - x1)").eval::<f64>(&[0.5]).is_err());
        assert!(p("x3").eval::<f64>(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn printed_form_reparses_identically() {
        for s in [
            "x1^2 + sin(x2)",
            "1 + 2 * 3 - 4 / 5",
            "-(x1 + x2) * sqrt(x1)",
            "2^3^2",
            "(1 + x1)^(2 - x2)",
            "x1 - (x2 - 1)",
            "x1 / (x2 / 2)",
            "-x1^2",
            "(-x1)^2",
            "2^-3",
            "log(exp(cos(x1)))",
            "1.5e-3 * x1 + 2.25",
        ] {
            let once = p(s);
            let twice = p(&once.to_string());
            assert_eq!(once, twice, "round trip failed for {s:?}");
        }
    }

    #[test]
    fn max_coord_counts_dimension() {
        assert_eq!(p("x1 + x3 * x2").max_coord(), 3);
        assert_eq!(p("1 + 2").max_coord(), 0);
    }
}
