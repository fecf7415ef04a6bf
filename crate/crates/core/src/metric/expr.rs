//! Expression language for user-defined metrics and base functions.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | base ('^' integer)?
//! base   := number | var | fn '(' expr ')' | '(' expr ')'
//! var    := 'x' digit+ | 'y' digit+
//! fn     := 'sqrt' | 'exp' | 'log' | 'sin' | 'cos'
//! ```
//!
//! Unary minus and signed exponents are accepted on top of the grammar above.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use crate::jet::{JetError, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

/// A chart variable: `X(i)` is `x^(i+1)`, `Y(i)` is `y^(i+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

/// Expression tree over the chart variables.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricExpr {
    Num(f64),
    Var(Var),
    Neg(Box<MetricExpr>),
    Add(Box<MetricExpr>, Box<MetricExpr>),
    Sub(Box<MetricExpr>, Box<MetricExpr>),
    Mul(Box<MetricExpr>, Box<MetricExpr>),
    Div(Box<MetricExpr>, Box<MetricExpr>),
    Pow(Box<MetricExpr>, i32),
    Call(Func, Box<MetricExpr>),
}

impl MetricExpr {
    /// Parses `source`, accepting variables `x1..xn` and `y1..yn`.
    pub fn parse(source: &str, dim: usize) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            dim,
            allow_y: true,
        };
        p.parse_all()
    }

    /// Parses an expression of the base point only (`x1..xn`).
    pub fn parse_base(source: &str, dim: usize) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            dim,
            allow_y: false,
        };
        p.parse_all()
    }

    /// Evaluates the tree on any [`Scalar`]. `x` and `y` must cover the
    /// declared dimension; base-only expressions may pass an empty `y`.
    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, JetError> {
        let like = x.first().or(y.first()).expect("at least one variable");
        self.eval_with(like, x, y)
    }

    fn eval_with<S: Scalar>(&self, like: &S, x: &[S], y: &[S]) -> Result<S, JetError> {
        Ok(match self {
            MetricExpr::Num(c) => like.lift(*c),
            MetricExpr::Var(Var::X(i)) => x[*i].clone(),
            MetricExpr::Var(Var::Y(i)) => y[*i].clone(),
            MetricExpr::Neg(a) => a.eval_with(like, x, y)?.neg(),
            MetricExpr::Add(a, b) => {
                if let MetricExpr::Num(c) = **b {
                    return Ok(a.eval_with(like, x, y)?.add_const(c));
                }
                a.eval_with(like, x, y)?.add(&b.eval_with(like, x, y)?)
            }
            MetricExpr::Sub(a, b) => {
                if let MetricExpr::Num(c) = **a {
                    return Ok(b.eval_with(like, x, y)?.neg().add_const(c));
                }
                a.eval_with(like, x, y)?.sub(&b.eval_with(like, x, y)?)
            }
            MetricExpr::Mul(a, b) => {
                if let MetricExpr::Num(c) = **a {
                    return Ok(b.eval_with(like, x, y)?.scale(c));
                }
                if let MetricExpr::Num(c) = **b {
                    return Ok(a.eval_with(like, x, y)?.scale(c));
                }
                a.eval_with(like, x, y)?.mul(&b.eval_with(like, x, y)?)
            }
            MetricExpr::Div(a, b) => {
                if let MetricExpr::Num(c) = **b {
                    if c == 0.0 {
                        return Err(JetError::DivisionByZero);
                    }
                    return Ok(a.eval_with(like, x, y)?.scale(1.0 / c));
                }
                a.eval_with(like, x, y)?.div(&b.eval_with(like, x, y)?)?
            }
            MetricExpr::Pow(a, e) => a.eval_with(like, x, y)?.powi(*e)?,
            MetricExpr::Call(f, a) => {
                let v = a.eval_with(like, x, y)?;
                match f {
                    Func::Sqrt => v.sqrt()?,
                    Func::Exp => v.exp(),
                    Func::Log => v.ln()?,
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        })
    }

    /// Whether the expression mentions any `y` variable.
    pub fn depends_on_y(&self) -> bool {
        match self {
            MetricExpr::Num(_) | MetricExpr::Var(Var::X(_)) => false,
            MetricExpr::Var(Var::Y(_)) => true,
            MetricExpr::Neg(a) | MetricExpr::Pow(a, _) | MetricExpr::Call(_, a) => a.depends_on_y(),
            MetricExpr::Add(a, b)
            | MetricExpr::Sub(a, b)
            | MetricExpr::Mul(a, b)
            | MetricExpr::Div(a, b) => a.depends_on_y() || b.depends_on_y(),
        }
    }

    /// Whether the expression mentions any `x` variable.
    pub fn depends_on_x(&self) -> bool {
        match self {
            MetricExpr::Num(_) | MetricExpr::Var(Var::Y(_)) => false,
            MetricExpr::Var(Var::X(_)) => true,
            MetricExpr::Neg(a) | MetricExpr::Pow(a, _) | MetricExpr::Call(_, a) => a.depends_on_x(),
            MetricExpr::Add(a, b)
            | MetricExpr::Sub(a, b)
            | MetricExpr::Mul(a, b)
            | MetricExpr::Div(a, b) => a.depends_on_x() || b.depends_on_x(),
        }
    }
}

impl fmt::Display for MetricExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricExpr::Num(c) => write!(f, "{c}"),
            MetricExpr::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            MetricExpr::Var(Var::Y(i)) => write!(f, "y{}", i + 1),
            MetricExpr::Neg(a) => write!(f, "(-{a})"),
            MetricExpr::Add(a, b) => write!(f, "({a} + {b})"),
            MetricExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            MetricExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            MetricExpr::Div(a, b) => write!(f, "({a} / {b})"),
            MetricExpr::Pow(a, e) => write!(f, "({a}^{e})"),
            MetricExpr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl core::str::FromStr for Func {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Func::from_name(s).ok_or(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
    allow_y: bool,
}

impl Parser<'_> {
    fn parse_all(&mut self) -> Result<MetricExpr, ParseError> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.syntax(format!("unexpected `{}`", self.src[self.pos] as char)));
        }
        Ok(e)
    }

    fn syntax(&self, message: String) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<MetricExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = MetricExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = MetricExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<MetricExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = MetricExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = MetricExpr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<MetricExpr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(MetricExpr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.integer()?;
            return Ok(MetricExpr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<i32>().map_err(|_| ParseError::Syntax {
            position: start,
            message: "expected an integer exponent".to_string(),
        })
    }

    fn base(&mut self) -> Result<MetricExpr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
            None => Err(self.syntax("unexpected end of input".to_string())),
        }
    }

    fn number(&mut self) -> Result<MetricExpr, ParseError> {
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        self.pos = i;
        let text = core::str::from_utf8(&bytes[start..i]).unwrap_or("");
        text.parse::<f64>()
            .map(MetricExpr::Num)
            .map_err(|_| ParseError::Syntax {
                position: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn identifier(&mut self) -> Result<MetricExpr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if let Some(func) = Func::from_name(name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(MetricExpr::Call(func, Box::new(arg)));
        }
        let unknown = || ParseError::UnknownIdentifier {
            name: name.to_string(),
            position: start,
        };
        let (head, digits) = name.split_at(1);
        let k: usize = digits.parse().map_err(|_| unknown())?;
        if k == 0 || k > self.dim {
            return Err(unknown());
        }
        match head {
            "x" => Ok(MetricExpr::Var(Var::X(k - 1))),
            "y" if self.allow_y => Ok(MetricExpr::Var(Var::Y(k - 1))),
            _ => Err(unknown()),
        }
    }
}
