//! Arithmetic expressions over `x1..xn`, `y1..ym`.
//!
//! Grammar, from loosest to tightest binding:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! so `^` is right-associative and binds tighter than unary minus
//! (`-x1^2` is `-(x1^2)`), while `x1^-2` still parses.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::map::{BoxDomain, DifferentiableMap, MapError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Atan,
}

impl Func {
    pub const ALL: [Func; 8] =
        [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Log, Func::Sqrt, Func::Abs, Func::Atan];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Atan => "atan",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Variable reference; indices are zero-based internally, printed one-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Fully parenthesized rendering that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            Expr::Var(Var::Y(i)) => write!(f, "y{}", i + 1),
            Expr::Neg(e) => write!(f, "(-({e}))"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the source.
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: expected {}, found {}", self.offset, self.expected, self.found)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    DivisionByZero,
    /// `log`, `sqrt` or `^` applied outside its real domain.
    Domain { op: &'static str, arg: f64 },
    NonFinite { op: &'static str },
    MissingVariable(Var),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DivisionByZero => f.write_str("division by zero"),
            Self::Domain { op, arg } => write!(f, "{op} undefined at {arg}"),
            Self::NonFinite { op } => write!(f, "{op} produced a non-finite value"),
            Self::MissingVariable(Var::X(i)) => write!(f, "variable x{} not supplied", i + 1),
            Self::MissingVariable(Var::Y(i)) => write!(f, "variable y{} not supplied", i + 1),
        }
    }
}

impl core::error::Error for EvalError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".to_string(),
            Tok::RParen => "')'".to_string(),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                toks.push((i, Tok::Op(c as char)));
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
            b'0'..=b'9' | b'.' => {
                let start = i;
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
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: "a number".to_string(),
                    found: format!("'{text}'"),
                })?;
                toks.push((start, Tok::Num(value)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: i,
                    expected: "an expression".to_string(),
                    found: format!("'{ch}'"),
                });
            }
        }
    }
    toks.push((src.len(), Tok::End));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    n: usize,
    m: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError { offset: self.offset(), expected: expected.to_string(), found: self.peek().describe() }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.error(&format!("'(' after function name '{name}'")));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                self.variable(&name).ok_or_else(|| ParseError {
                    offset,
                    expected: self.valid_names(),
                    found: format!("unknown identifier '{name}'"),
                })
            }
            _ => Err(self.error("a number, variable, function call or '('")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error("')'"))
        }
    }

    fn variable(&self, name: &str) -> Option<Expr> {
        let (kind, digits) = name.split_at(1);
        if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        match kind {
            "x" if k <= self.n => Some(Expr::Var(Var::X(k - 1))),
            "y" if k <= self.m => Some(Expr::Var(Var::Y(k - 1))),
            _ => None,
        }
    }

    fn valid_names(&self) -> String {
        let mut names: Vec<String> = Vec::new();
        names.extend((1..=self.n).map(|k| format!("x{k}")));
        names.extend((1..=self.m).map(|k| format!("y{k}")));
        names.extend(Func::ALL.iter().map(|f| format!("{}(..)", f.name())));
        format!("one of {}", names.join(", "))
    }
}

/// Parses `src` against `n` x-variables and `m` y-variables.
pub fn parse(src: &str, n: usize, m: usize) -> Result<Expr, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError { offset: 0, expected: "an expression".to_string(), found: "empty input".to_string() });
    }
    let mut p = Parser { toks: tokenize(src)?, pos: 0, n, m };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

fn finite(v: f64, op: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() { Ok(v) } else { Err(EvalError::NonFinite { op }) }
}

/// Evaluates `e` in IEEE double precision. Real-domain violations are errors
/// rather than NaN.
pub fn eval_expr(e: &Expr, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Var(v @ Var::X(i)) => x.get(*i).copied().ok_or(EvalError::MissingVariable(*v)),
        Expr::Var(v @ Var::Y(i)) => y.get(*i).copied().ok_or(EvalError::MissingVariable(*v)),
        Expr::Neg(a) => Ok(-eval_expr(a, x, y)?),
        Expr::Bin(op, a, b) => {
            let a = eval_expr(a, x, y)?;
            let b = eval_expr(b, x, y)?;
            match op {
                BinOp::Add => finite(a + b, "+"),
                BinOp::Sub => finite(a - b, "-"),
                BinOp::Mul => finite(a * b, "*"),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a / b, "/")
                    }
                }
                BinOp::Pow => pow(a, b),
            }
        }
        Expr::Call(func, a) => {
            let v = eval_expr(a, x, y)?;
            match func {
                Func::Sin => Ok(Float::sin(v)),
                Func::Cos => Ok(Float::cos(v)),
                Func::Tan => finite(Float::tan(v), "tan"),
                Func::Exp => finite(Float::exp(v), "exp"),
                Func::Log => {
                    if v <= 0.0 {
                        Err(EvalError::Domain { op: "log", arg: v })
                    } else {
                        Ok(Float::ln(v))
                    }
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        Err(EvalError::Domain { op: "sqrt", arg: v })
                    } else {
                        Ok(Float::sqrt(v))
                    }
                }
                Func::Abs => Ok(v.abs()),
                Func::Atan => Ok(Float::atan(v)),
            }
        }
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    let integral = Float::fract(exponent) == 0.0;
    if base < 0.0 && !integral {
        return Err(EvalError::Domain { op: "^", arg: base });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    let v = if integral && exponent.abs() <= i32::MAX as f64 {
        Float::powi(base, exponent as i32)
    } else {
        Float::powf(base, exponent)
    };
    finite(v, "^")
}

/// Map whose components are parsed expressions. Jacobians come from finite
/// differences only.
///
/// With `m == 0` the expressions define a pure map `R^n -> R^n` in
/// `x1..xn`, so exactly `n` of them are required; otherwise `m` are.
pub fn expression_map(
    sources: &[&str],
    n: usize,
    m: usize,
    domain: BoxDomain,
) -> Result<DifferentiableMap, ExprMapError> {
    let expected = if m == 0 { n } else { m };
    if sources.len() != expected {
        return Err(ExprMapError::Count { expected, found: sources.len() });
    }
    let exprs = sources
        .iter()
        .enumerate()
        .map(|(i, s)| parse(s, n, m).map_err(|e| ExprMapError::Parse { component: i, error: e }))
        .collect::<Result<Vec<_>, _>>()?;
    let eval = move |x: &[f64], y: &[f64]| -> Result<Vec<f64>, MapError> {
        exprs
            .iter()
            .map(|e| eval_expr(e, x, y).map_err(|err| MapError::Evaluation(err.to_string())))
            .collect()
    };
    let map = if m == 0 {
        DifferentiableMap::pure(n, domain, move |x| eval(x, &[]))
    } else {
        DifferentiableMap::implicit(n, m, domain, eval)
    };
    map.map_err(ExprMapError::Map)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprMapError {
    Count { expected: usize, found: usize },
    Parse { component: usize, error: ParseError },
    Map(MapError),
}

impl fmt::Display for ExprMapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Count { expected, found } => write!(f, "expected {expected} expressions, got {found}"),
            Self::Parse { component, error } => write!(f, "expression {}: {error}", component + 1),
            Self::Map(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ExprMapError {}
