//! A small expression language for the holomorphic data of a surface.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := int | '-' int | '(' '-'? int ')'
//! primary  := number | 'pi' | 'e' | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `u`, `v`, `s` and `t`. Multiplication is always explicit.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::jets::{Jet, JetError, Kernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    U,
    V,
    S,
    T,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::V => "v",
            Var::S => "s",
            Var::T => "t",
        }
    }

    fn from_name(name: &str) -> Option<Var> {
        match name {
            "u" => Some(Var::U),
            "v" => Some(Var::V),
            "s" => Some(Var::S),
            "t" => Some(Var::T),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Named(NamedConst),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Kernel, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownFunction(String),
    UnknownIdentifier(String),
    NonIntegerExponent,
    ChainedExponent,
    InvalidNumber(String),
    InvalidCharacter(char),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected `{t}`"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnknownFunction(n) => write!(f, "unknown function `{n}`"),
            ParseErrorKind::UnknownIdentifier(n) => write!(f, "unknown identifier `{n}`"),
            ParseErrorKind::NonIntegerExponent => f.write_str("exponent must be an integer literal"),
            ParseErrorKind::ChainedExponent => {
                f.write_str("chained `^` is ambiguous, parenthesize the base")
            }
            ParseErrorKind::InvalidNumber(t) => write!(f, "malformed number `{t}`"),
            ParseErrorKind::InvalidCharacter(c) => write!(f, "invalid character `{c}`"),
        }
    }
}

/// A jet failure together with the subexpression where it occurred.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{source} in `{subtree}`")]
pub struct EvalError {
    pub subtree: String,
    pub source: JetError,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset} (expected {})", expected.join(" | "))]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::End => String::new(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent only when digits follow, so `2e` stays `2` then `e`
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                out.push((start, Tok::Num(src[start..i].to_string())));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: i,
                    kind: ParseErrorKind::InvalidCharacter(ch),
                    expected: vec![],
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

const EXPECT_OPERAND: &[&str] = &["number", "identifier", "(", "-"];
const EXPECT_OPERATOR: &[&str] = &["+", "-", "*", "/", "^", ")", "end of input"];

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

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &[&'static str]) -> ParseError {
        let kind = match self.peek() {
            Tok::End => ParseErrorKind::UnexpectedEnd,
            t => ParseErrorKind::UnexpectedToken(t.text()),
        };
        ParseError {
            offset: self.offset(),
            kind,
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let n = self.exponent()?;
        if *self.peek() == Tok::Caret {
            return Err(ParseError {
                offset: self.offset(),
                kind: ParseErrorKind::ChainedExponent,
                expected: vec!["+", "-", "*", "/", ")", "end of input"],
            });
        }
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parens = *self.peek() == Tok::LParen;
        if parens {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let offset = self.offset();
        let n = match self.peek().clone() {
            Tok::Num(text) => {
                if !text.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(ParseError {
                        offset,
                        kind: ParseErrorKind::NonIntegerExponent,
                        expected: vec!["integer"],
                    });
                }
                self.bump();
                text.parse::<i32>().map_err(|_| ParseError {
                    offset,
                    kind: ParseErrorKind::InvalidNumber(text.clone()),
                    expected: vec!["integer"],
                })?
            }
            Tok::End => return Err(self.fail(&["integer"])),
            _ => {
                return Err(ParseError {
                    offset,
                    kind: ParseErrorKind::NonIntegerExponent,
                    expected: vec!["integer"],
                })
            }
        };
        if parens {
            if *self.peek() != Tok::RParen {
                return Err(self.fail(&[")"]));
            }
            self.bump();
        }
        Ok(if negative { -n } else { n })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(text) => {
                self.bump();
                let value = text.parse::<f64>().ok().filter(|v| v.is_finite());
                value.map(Expr::Const).ok_or(ParseError {
                    offset,
                    kind: ParseErrorKind::InvalidNumber(text),
                    expected: vec!["number"],
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.fail(&["+", "-", "*", "/", "^", ")"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let kernel = Kernel::from_name(&name).ok_or(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                        expected: Kernel::NAMED.iter().map(|k| k.name()).collect(),
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return Err(self.fail(&["+", "-", "*", "/", "^", ")"]));
                    }
                    self.bump();
                    return Ok(Expr::Call(kernel, Box::new(arg)));
                }
                if Kernel::from_name(&name).is_some() {
                    return Err(self.fail(&["("]));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Named(NamedConst::Pi)),
                    "e" => Ok(Expr::Named(NamedConst::E)),
                    _ => match Var::from_name(&name) {
                        Some(v) => Ok(Expr::Var(v)),
                        None => Err(ParseError {
                            offset,
                            kind: ParseErrorKind::UnknownIdentifier(name),
                            expected: vec!["u", "v", "s", "t", "pi", "e", "function call"],
                        }),
                    },
                }
            }
            _ => Err(self.fail(EXPECT_OPERAND)),
        }
    }
}

/// Parse an expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.fail(EXPECT_OPERATOR));
    }
    Ok(e)
}

// Binding strength when printing.
const P_ADD: u8 = 1;
const P_MUL: u8 = 2;
const P_NEG: u8 = 3;
const P_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => P_ADD,
            Expr::Mul(..) | Expr::Div(..) => P_MUL,
            Expr::Neg(_) => P_NEG,
            Expr::Const(c) if c.is_sign_negative() => P_NEG,
            Expr::Pow(..) => 4,
            _ => P_ATOM,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Const(c) => write_number(f, *c),
            Expr::Named(NamedConst::Pi) => f.write_str("pi"),
            Expr::Named(NamedConst::E) => f.write_str("e"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, P_NEG)
            }
            Expr::Add(a, b) => {
                a.write_at(f, P_ADD)?;
                f.write_str(" + ")?;
                b.write_at(f, P_MUL)
            }
            Expr::Sub(a, b) => {
                a.write_at(f, P_ADD)?;
                f.write_str(" - ")?;
                b.write_at(f, P_MUL)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, P_MUL)?;
                f.write_str("*")?;
                b.write_at(f, P_NEG)
            }
            Expr::Div(a, b) => {
                a.write_at(f, P_MUL)?;
                f.write_str("/")?;
                b.write_at(f, P_NEG)
            }
            Expr::Pow(a, n) => {
                a.write_at(f, P_ATOM)?;
                if *n < 0 {
                    write!(f, "^(-{})", n.unsigned_abs())
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Call(k, a) => {
                write!(f, "{}(", k.name())?;
                a.write_at(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    let a = c.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        write!(f, "{c:e}")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// Constructors with light constant folding, used by `derivative`.
fn c(x: f64) -> Expr {
    Expr::Const(x)
}

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

fn s_neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => c(-x),
        Expr::Neg(inner) => *inner,
        other => -other,
    }
}

fn s_add(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => c(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => match b {
            Expr::Neg(inner) => s_sub(a, *inner),
            b => a + b,
        },
    }
}

fn s_sub(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => c(x - y),
        (Some(x), _) if x == 0.0 => s_neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => a - b,
    }
}

fn s_mul(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => c(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => c(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => s_neg(b),
        (_, Some(y)) if y == -1.0 => s_neg(a),
        _ => a * b,
    }
}

fn s_div(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), _) if x == 0.0 => c(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => a / b,
    }
}

fn s_pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => c(1.0),
        1 => a,
        _ => Expr::Pow(Box::new(a), n),
    }
}

fn call(k: Kernel, a: &Expr) -> Expr {
    Expr::Call(k, Box::new(a.clone()))
}

impl Expr {
    pub fn constant(x: f64) -> Expr {
        Expr::Const(x)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    /// Variables that occur in the expression.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Const(_) | Expr::Named(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Rename every variable to `v`.
    pub fn rename(&self, v: Var) -> Expr {
        self.map_vars(&|_| Expr::Var(v))
    }

    /// Substitute `x -> scale * x + shift` for every variable.
    pub fn affine_substitute(&self, scale: f64, shift: f64) -> Expr {
        self.map_vars(&|v| s_add(s_mul(c(scale), Expr::Var(v)), c(shift)))
    }

    fn map_vars(&self, f: &dyn Fn(Var) -> Expr) -> Expr {
        let b = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Var(v) => f(*v),
            Expr::Const(_) | Expr::Named(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Pow(a, n) => Expr::Pow(b(a), *n),
            Expr::Call(k, a) => Expr::Call(*k, b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
        }
    }

    /// Symbolic derivative with respect to the (single) variable.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Named(_) => c(0.0),
            Expr::Var(_) => c(1.0),
            Expr::Neg(a) => s_neg(a.derivative()),
            Expr::Add(a, b) => s_add(a.derivative(), b.derivative()),
            Expr::Sub(a, b) => s_sub(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => s_add(
                s_mul(a.derivative(), (**b).clone()),
                s_mul((**a).clone(), b.derivative()),
            ),
            Expr::Div(a, b) => {
                let num = s_sub(
                    s_mul(a.derivative(), (**b).clone()),
                    s_mul((**a).clone(), b.derivative()),
                );
                s_div(num, s_pow((**b).clone(), 2))
            }
            Expr::Pow(a, n) => s_mul(
                s_mul(c(*n as f64), s_pow((**a).clone(), n - 1)),
                a.derivative(),
            ),
            Expr::Call(k, a) => {
                let sq = || s_pow((**a).clone(), 2);
                let outer = match k {
                    Kernel::Sin => call(Kernel::Cos, a),
                    Kernel::Cos => s_neg(call(Kernel::Sin, a)),
                    Kernel::Tan => s_add(c(1.0), s_pow(call(Kernel::Tan, a), 2)),
                    Kernel::Sinh => call(Kernel::Cosh, a),
                    Kernel::Cosh => call(Kernel::Sinh, a),
                    Kernel::Tanh => s_sub(c(1.0), s_pow(call(Kernel::Tanh, a), 2)),
                    Kernel::Exp => call(Kernel::Exp, a),
                    Kernel::Log => s_div(c(1.0), (**a).clone()),
                    Kernel::Sqrt => s_div(c(0.5), call(Kernel::Sqrt, a)),
                    Kernel::Asinh => s_div(
                        c(1.0),
                        Expr::Call(Kernel::Sqrt, Box::new(s_add(c(1.0), sq()))),
                    ),
                    Kernel::Atan => s_div(c(1.0), s_add(c(1.0), sq())),
                    Kernel::Powi(n) => s_mul(c(*n as f64), s_pow((**a).clone(), n - 1)),
                };
                s_mul(outer, a.derivative())
            }
        }
    }

    /// Taylor jet of the expression at `x0`, treating every variable as the
    /// same coordinate.
    pub fn eval_jet(&self, x0: f64, order: usize) -> Result<Jet, EvalError> {
        self.eval_with(&Jet::variable(x0, order))
    }

    /// Compose the expression with an inner jet: every variable is replaced by
    /// `input`.
    pub fn eval_with(&self, input: &Jet) -> Result<Jet, EvalError> {
        let k = input.order();
        let base = input.base();
        let here = |e: JetError| EvalError {
            subtree: self.to_string(),
            source: e,
        };
        Ok(match self {
            Expr::Const(x) => Jet::constant(base, *x, k),
            Expr::Named(n) => Jet::constant(base, n.value(), k),
            Expr::Var(_) => input.clone(),
            Expr::Neg(a) => a.eval_with(input)?.neg(),
            Expr::Add(a, b) => {
                let (x, y) = common(a.eval_with(input)?, b.eval_with(input)?);
                x.add(&y).map_err(here)?
            }
            Expr::Sub(a, b) => {
                let (x, y) = common(a.eval_with(input)?, b.eval_with(input)?);
                x.sub(&y).map_err(here)?
            }
            Expr::Mul(a, b) => match (&**a, &**b) {
                (Expr::Const(x), _) => b.eval_with(input)?.scale(*x),
                (_, Expr::Const(y)) => a.eval_with(input)?.scale(*y),
                _ => {
                    let (x, y) = common(a.eval_with(input)?, b.eval_with(input)?);
                    x.mul(&y).map_err(here)?
                }
            },
            Expr::Div(a, b) => {
                let (num, den) = common(a.eval_with(input)?, b.eval_with(input)?);
                num.div(&den).map_err(here)?
            }
            Expr::Pow(a, n) => a.eval_with(input)?.powi(*n).map_err(here)?,
            Expr::Call(kernel, a) => a.eval_with(input)?.compose(*kernel).map_err(here)?,
        })
    }

    /// Plain value at `x`; the order-0 case of [`Expr::eval_jet`].
    pub fn eval_value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval_jet(x, 0)?.value())
    }
}

/// Truncate two jets to their common order. Quotient cancellation can leave
/// one operand shorter than the other.
fn common(a: Jet, b: Jet) -> (Jet, Jet) {
    let k = a.order().min(b.order());
    (a.truncate(k), b.truncate(k))
}
