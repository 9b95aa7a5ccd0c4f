//! Radial functions `r(φ, θ)` written as small arithmetic expressions.
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = atom [ "^" exponent ] ;
//! exponent = [ "-" ] integer | "(" [ "-" ] integer ")" ;
//! atom     = number | "pi" | variable | func "(" expr ")" | "(" expr ")" ;
//! variable = "phi" | "theta" | "φ" | "θ" ;
//! func     = "sin" | "cos" | "abs" ;
//! ```
//!
//! `φ` is the polar angle from `+z`, `θ` the azimuth. Evaluation is generic
//! over [`Scalar`], which gives forward-mode derivatives through [`Dual2`].

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Phi,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadialExpr {
    Const(f64),
    Var(Var),
    Neg(Box<RadialExpr>),
    Add(Box<RadialExpr>, Box<RadialExpr>),
    Sub(Box<RadialExpr>, Box<RadialExpr>),
    Mul(Box<RadialExpr>, Box<RadialExpr>),
    Div(Box<RadialExpr>, Box<RadialExpr>),
    Pow(Box<RadialExpr>, i32),
    Call(Func, Box<RadialExpr>),
}

/// Arithmetic needed to evaluate a [`RadialExpr`].
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn sin(self) -> Self {
        Float::sin(self)
    }
    fn cos(self) -> Self {
        Float::cos(self)
    }
    fn abs(self) -> Self {
        Float::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        Float::powi(self, n)
    }
}

/// Value with partial derivatives in `(φ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d: [f64; 2],
}

impl Dual2 {
    pub fn var(v: f64, slot: usize) -> Self {
        let mut d = [0.0; 2];
        d[slot] = 1.0;
        Self { v, d }
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        Self { v, d: [self.d[0] * dv, self.d[1] * dv] }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]] }
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1]] }
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]] }
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        Self { v, d: [(self.d[0] - v * o.d[0]) * inv, (self.d[1] - v * o.d[1]) * inv] }
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: [-self.d[0], -self.d[1]] }
    }
}

impl Scalar for Dual2 {
    fn constant(c: f64) -> Self {
        Self { v: c, d: [0.0; 2] }
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s)
    }
    fn abs(self) -> Self {
        // derivative taken as 0 at the kink
        let sign = if self.v > 0.0 {
            1.0
        } else if self.v < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.v.abs(), sign)
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        self.chain(Float::powi(self.v, n), n as f64 * Float::powi(self.v, n - 1))
    }
}

impl RadialExpr {
    pub fn eval<S: Scalar>(&self, phi: S, theta: S) -> S {
        match self {
            RadialExpr::Const(c) => S::constant(*c),
            RadialExpr::Var(Var::Phi) => phi,
            RadialExpr::Var(Var::Theta) => theta,
            RadialExpr::Neg(a) => -a.eval(phi, theta),
            RadialExpr::Add(a, b) => a.eval(phi, theta) + b.eval(phi, theta),
            RadialExpr::Sub(a, b) => a.eval(phi, theta) - b.eval(phi, theta),
            RadialExpr::Mul(a, b) => a.eval(phi, theta) * b.eval(phi, theta),
            RadialExpr::Div(a, b) => a.eval(phi, theta) / b.eval(phi, theta),
            RadialExpr::Pow(a, n) => a.eval(phi, theta).powi(*n),
            RadialExpr::Call(f, a) => {
                let x = a.eval(phi, theta);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Abs => x.abs(),
                }
            }
        }
    }

    pub fn value(&self, phi: f64, theta: f64) -> f64 {
        self.eval(phi, theta)
    }

    /// `(r, ∂r/∂φ, ∂r/∂θ)`.
    pub fn jet(&self, phi: f64, theta: f64) -> (f64, f64, f64) {
        let r = self.eval(Dual2::var(phi, 0), Dual2::var(theta, 1));
        (r.v, r.d[0], r.d[1])
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            RadialExpr::Const(_) => false,
            RadialExpr::Var(v) => *v == var,
            RadialExpr::Neg(a) | RadialExpr::Pow(a, _) | RadialExpr::Call(_, a) => a.uses(var),
            RadialExpr::Add(a, b) | RadialExpr::Sub(a, b) | RadialExpr::Mul(a, b) | RadialExpr::Div(a, b) => {
                a.uses(var) || b.uses(var)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            RadialExpr::Add(..) | RadialExpr::Sub(..) => 1,
            RadialExpr::Mul(..) | RadialExpr::Div(..) => 2,
            RadialExpr::Neg(_) => 3,
            RadialExpr::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
            RadialExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.precedence();
        if p < min {
            f.write_str("(")?;
        }
        match self {
            RadialExpr::Const(c) => write!(f, "{c:?}")?,
            RadialExpr::Var(Var::Phi) => f.write_str("phi")?,
            RadialExpr::Var(Var::Theta) => f.write_str("theta")?,
            RadialExpr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_prec(f, 3)?;
            }
            RadialExpr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" + ")?;
                b.fmt_prec(f, 2)?;
            }
            RadialExpr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" - ")?;
                b.fmt_prec(f, 2)?;
            }
            RadialExpr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str("*")?;
                b.fmt_prec(f, 3)?;
            }
            RadialExpr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str("/")?;
                b.fmt_prec(f, 3)?;
            }
            RadialExpr::Pow(a, n) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{n}")?;
            }
            RadialExpr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if p < min {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for RadialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl core::str::FromStr for RadialExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_radial(s)
    }
}

impl Serialize for RadialExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RadialExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_radial(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
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
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '·' | '×' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut end = pos;
            let mut seen_exp = false;
            let mut prev = ' ';
            while let Some(&(p, ch)) = chars.peek() {
                let ok = ch.is_ascii_digit()
                    || ch == '.'
                    || (!seen_exp && (ch == 'e' || ch == 'E'))
                    || ((ch == '+' || ch == '-') && (prev == 'e' || prev == 'E'));
                if !ok {
                    break;
                }
                if ch == 'e' || ch == 'E' {
                    seen_exp = true;
                }
                prev = ch;
                end = p + ch.len_utf8();
                chars.next();
            }
            let text = &src[pos..end];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                position: pos,
                message: alloc::format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(value), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = pos;
            while let Some(&(p, ch)) = chars.peek() {
                if !(ch.is_alphanumeric() || ch == '_') {
                    break;
                }
                end = p + ch.len_utf8();
                chars.next();
            }
            out.push((Tok::Ident(src[pos..end].to_string()), pos));
            continue;
        }
        return Err(ParseError::Syntax { position: pos, message: alloc::format!("unexpected character `{c}`") });
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { position: self.pos(), message: message.to_string() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&alloc::format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<RadialExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = RadialExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = RadialExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<RadialExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = RadialExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = RadialExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<RadialExpr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(RadialExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<RadialExpr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let parens = *self.peek() == Tok::LParen;
        if parens {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let n = match self.peek() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => *v as i32,
            _ => return self.error("exponent must be an integer"),
        };
        self.bump();
        if parens {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        Ok(RadialExpr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<RadialExpr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(RadialExpr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "phi" | "φ" => return Ok(RadialExpr::Var(Var::Phi)),
                    "theta" | "θ" => return Ok(RadialExpr::Var(Var::Theta)),
                    "pi" | "π" => return Ok(RadialExpr::Const(core::f64::consts::PI)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "abs" => Func::Abs,
                    _ => return Err(ParseError::UnknownIdentifier { name, position: pos }),
                };
                self.expect(Tok::LParen, "`(` after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(RadialExpr::Call(func, Box::new(arg)))
            }
            Tok::End => Err(ParseError::Syntax { position: pos, message: "unexpected end of input".to_string() }),
            _ => Err(ParseError::Syntax { position: pos, message: "expected a number, variable or `(`".to_string() }),
        }
    }
}

/// Parses a radial function in the grammar documented on this module.
pub fn parse_radial(src: &str) -> Result<RadialExpr, ParseError> {
    let mut p = Parser { toks: tokenize(src)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}
