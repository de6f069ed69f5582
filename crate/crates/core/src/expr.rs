//! A small expression language for scalar functions of one variable.
//!
//! Grammar (whitespace is ignored between tokens):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-')? power
//! power  := atom ('^' number)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `ident` is the free variable `x`, a named parameter, or one of the
//! built-in functions `sqrt`, `exp`, `log`, `sin`, `cos`, `tanh`.  Exponents
//! are numeric literals; integer exponents work for any base, while
//! fractional ones require a positive base at evaluation time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::jet::Jet;
use crate::EvalError;

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tanh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Number(f64),
    /// The free variable `x`.
    Var,
    /// A named parameter, bound at evaluation time.
    Param(String),
    Neg(Box<ExprAst>),
    Bin(BinOp, Box<ExprAst>, Box<ExprAst>),
    /// Power with a constant exponent.
    Pow(Box<ExprAst>, f64),
    Call(Func, Box<ExprAst>),
}

/// Parameter bindings for evaluation.
pub type Bindings = BTreeMap<String, f64>;

/// Syntax or name error, with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    BadNumber,
    /// An identifier called like a function but not in the built-in set.
    UnknownFunction(String),
    /// A built-in function name used without arguments.
    MissingArgument(&'static str),
    /// The `^` operator requires a numeric literal exponent.
    NonNumericExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::BadNumber => write!(f, "malformed number"),
            ParseErrorKind::UnknownFunction(name) => write!(f, "unknown function `{name}`"),
            ParseErrorKind::MissingArgument(name) => {
                write!(f, "function `{name}` needs an argument list")
            }
            ParseErrorKind::NonNumericExponent => write!(f, "exponent must be a numeric literal"),
        }
    }
}

/// Parse an expression in the variable `x`.
pub fn parse_expr(text: &str) -> Result<ExprAst, ParseError> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.err_here(ParseErrorKind::UnexpectedChar(p.peek_char())));
    }
    Ok(ast)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.pos, kind }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        self.bytes[self.pos] as char
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = ExprAst::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = ExprAst::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                lhs = ExprAst::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                lhs = ExprAst::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<ExprAst, ParseError> {
        if self.eat(b'-') {
            let inner = self.power()?;
            Ok(ExprAst::Neg(Box::new(inner)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let start = self.pos;
            let value = self.number().map_err(|mut e| {
                e.offset = start;
                e.kind = ParseErrorKind::NonNumericExponent;
                e
            })?;
            let value = if neg { -value } else { value };
            Ok(ExprAst::Pow(Box::new(base), value))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        match self.peek() {
            None => Err(self.err_here(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(match self.peek() {
                        None => self.err_here(ParseErrorKind::UnexpectedEnd),
                        Some(_) => self.err_here(ParseErrorKind::UnexpectedChar(self.peek_char())),
                    });
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.number()?;
                self.skip_ws();
                Ok(ExprAst::Number(v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_owned();
                self.skip_ws();
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    self.skip_ws();
                    let func = Func::from_name(&name).ok_or(ParseError {
                        offset: start,
                        kind: ParseErrorKind::UnknownFunction(name),
                    })?;
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(match self.peek() {
                            None => self.err_here(ParseErrorKind::UnexpectedEnd),
                            Some(_) => {
                                self.err_here(ParseErrorKind::UnexpectedChar(self.peek_char()))
                            }
                        });
                    }
                    Ok(ExprAst::Call(func, Box::new(arg)))
                } else if name == "x" {
                    Ok(ExprAst::Var)
                } else if let Some(func) = Func::from_name(&name) {
                    Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::MissingArgument(func.name()),
                    })
                } else {
                    Ok(ExprAst::Param(name))
                }
            }
            Some(_) => Err(self.err_here(ParseErrorKind::UnexpectedChar(self.peek_char()))),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // `1.5e` followed by a non-digit: the `e` was not an exponent.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let parsed: Result<f64, _> = text.parse();
        match parsed {
            Ok(v) if v.is_finite() => {
                self.skip_ws();
                Ok(v)
            }
            _ => Err(ParseError { offset: start, kind: ParseErrorKind::BadNumber }),
        }
    }
}

impl ExprAst {
    /// Names of all parameters appearing in the expression.
    pub fn params(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ExprAst::Number(_) | ExprAst::Var => {}
            ExprAst::Param(name) => {
                out.insert(name.as_str());
            }
            ExprAst::Neg(inner) | ExprAst::Pow(inner, _) | ExprAst::Call(_, inner) => {
                inner.collect_params(out)
            }
            ExprAst::Bin(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Evaluate at the jet `x` (use [`Jet::variable`] for derivatives, or
    /// [`Jet::constant`] wrapped in order 0 for a plain value).
    pub fn eval_jet(&self, x: &Jet, params: &Bindings) -> Result<Jet, EvalError> {
        let order = x.order();
        match self {
            ExprAst::Number(v) => Ok(Jet::constant(*v, order)),
            ExprAst::Var => Ok(x.clone()),
            ExprAst::Param(name) => params
                .get(name)
                .map(|v| Jet::constant(*v, order))
                .ok_or_else(|| EvalError::UnboundParam(name.clone())),
            ExprAst::Neg(inner) => Ok(inner.eval_jet(x, params)?.neg()),
            ExprAst::Bin(op, a, b) => {
                let a = a.eval_jet(x, params)?;
                let b = b.eval_jet(x, params)?;
                match op {
                    BinOp::Add => Ok(a.add(&b)),
                    BinOp::Sub => Ok(a.sub(&b)),
                    BinOp::Mul => Ok(a.mul(&b)),
                    BinOp::Div => a.div(&b),
                }
            }
            ExprAst::Pow(base, e) => {
                let base = base.eval_jet(x, params)?;
                if *e == e.trunc() && e.abs() <= i64::MAX as f64 {
                    base.powi(*e as i64)
                } else {
                    base.powf(*e)
                }
            }
            ExprAst::Call(func, arg) => {
                let arg = arg.eval_jet(x, params)?;
                match func {
                    Func::Sqrt => arg.sqrt(),
                    Func::Exp => Ok(arg.exp()),
                    Func::Log => arg.ln(),
                    Func::Sin => Ok(arg.sin()),
                    Func::Cos => Ok(arg.cos()),
                    Func::Tanh => Ok(arg.tanh()),
                }
            }
        }
    }

    /// Plain evaluation.
    pub fn eval(&self, x: f64, params: &Bindings) -> Result<f64, EvalError> {
        Ok(self.eval_jet(&Jet::variable(x, 0), params)?.value())
    }

    /// Coefficients of the expression as an exact polynomial in `x`, lowest
    /// power first, if it is one (after substituting parameter values).
    /// Division is only folded when the divisor is constant.
    pub fn to_polynomial(&self, params: &Bindings) -> Option<Vec<f64>> {
        const MAX_DEG: usize = 64;
        fn trim(mut v: Vec<f64>) -> Vec<f64> {
            while v.len() > 1 && *v.last().unwrap() == 0.0 {
                v.pop();
            }
            v
        }
        match self {
            ExprAst::Number(v) => Some(vec![*v]),
            ExprAst::Var => Some(vec![0.0, 1.0]),
            ExprAst::Param(name) => params.get(name).map(|v| vec![*v]),
            ExprAst::Neg(inner) => {
                Some(inner.to_polynomial(params)?.into_iter().map(|c| -c).collect())
            }
            ExprAst::Bin(op, a, b) => {
                let a = a.to_polynomial(params)?;
                let b = b.to_polynomial(params)?;
                match op {
                    BinOp::Add | BinOp::Sub => {
                        let n = a.len().max(b.len());
                        let sign = if matches!(op, BinOp::Add) { 1.0 } else { -1.0 };
                        let mut out = vec![0.0; n];
                        for (k, slot) in out.iter_mut().enumerate() {
                            *slot = a.get(k).copied().unwrap_or(0.0)
                                + sign * b.get(k).copied().unwrap_or(0.0);
                        }
                        Some(trim(out))
                    }
                    BinOp::Mul => {
                        if a.len() + b.len() > MAX_DEG + 2 {
                            return None;
                        }
                        let mut out = vec![0.0; a.len() + b.len() - 1];
                        for (i, ai) in a.iter().enumerate() {
                            for (j, bj) in b.iter().enumerate() {
                                out[i + j] += ai * bj;
                            }
                        }
                        Some(trim(out))
                    }
                    BinOp::Div => {
                        if b.len() == 1 && b[0] != 0.0 {
                            Some(a.into_iter().map(|c| c / b[0]).collect())
                        } else {
                            None
                        }
                    }
                }
            }
            ExprAst::Pow(base, e) => {
                if *e != e.trunc() || *e < 0.0 || *e > MAX_DEG as f64 {
                    return None;
                }
                let base = base.to_polynomial(params)?;
                let mut out = vec![1.0];
                for _ in 0..(*e as usize) {
                    if out.len() + base.len() > MAX_DEG + 2 {
                        return None;
                    }
                    let mut next = vec![0.0; out.len() + base.len() - 1];
                    for (i, ai) in out.iter().enumerate() {
                        for (j, bj) in base.iter().enumerate() {
                            next[i + j] += ai * bj;
                        }
                    }
                    out = next;
                }
                Some(trim(out))
            }
            ExprAst::Call(_, _) => None,
        }
    }
}

/// Fully parenthesized printing; `parse_expr` accepts the output and the
/// reparsed tree evaluates identically. Negative literals print as `(-v)`
/// because the grammar has no signed numbers: the lexer reads unsigned
/// digits and `factor` supplies negation, so a bare `-3.0` would reparse
/// as a unary minus and `(--3.0)` would not parse at all.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Number(v) if v.is_sign_negative() => write!(f, "(-{:?})", -v),
            ExprAst::Number(v) => write!(f, "{v:?}"),
            ExprAst::Var => write!(f, "x"),
            ExprAst::Param(name) => write!(f, "{name}"),
            ExprAst::Neg(inner) => write!(f, "(-{inner})"),
            ExprAst::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a}{sym}{b})")
            }
            ExprAst::Pow(base, e) => write!(f, "({base}^{e:?})"),
            ExprAst::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
