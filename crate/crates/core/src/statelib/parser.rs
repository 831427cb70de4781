//! Recursive-descent parser for state expressions.
//!
//! ```text
//! expr    := sign? term (sign term)*
//! term    := (coef '*'?)* (atom | '(' expr ')')
//! coef    := number 'i'? | 'i' | '(' signed-number (sign number 'i')? ')'
//! atom    := '|' digit+ '>' | 'ghz' | 'bell' [123] '(' angle ')'
//! angle   := sign? aterm (sign aterm)*
//! aterm   := afactor (('*' | '/') afactor)*
//! afactor := number | 'pi' | '(' angle ')' | '-' afactor
//! ```
//!
//! A coefficient in front of a parenthesized group is distributed over its
//! terms, so the resulting AST is always a flat list of terms.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Atom, StateExpr, Term};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    Expected(&'static str),
    InvalidNumber,
    UnknownAtom(String),
    KetLength { expected: usize, got: usize },
    KetDigit { digit: usize, dim: usize },
    Empty,
}

/// Syntax error with a 0-based character position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{} at position {position}", describe(.kind))]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedChar(c) => alloc::format!("unexpected character '{c}'"),
        ParseErrorKind::UnexpectedEnd => "unexpected end of input".to_string(),
        ParseErrorKind::Expected(what) => alloc::format!("expected {what}"),
        ParseErrorKind::InvalidNumber => "invalid number".to_string(),
        ParseErrorKind::UnknownAtom(name) => alloc::format!("unknown atom '{name}'"),
        ParseErrorKind::KetLength { expected, got } => {
            alloc::format!("ket has {got} digits, expected {expected}")
        }
        ParseErrorKind::KetDigit { digit, dim } => {
            alloc::format!("ket digit {digit} out of range for dimension {dim}")
        }
        ParseErrorKind::Empty => "empty expression".to_string(),
    }
}

/// Per-subsystem dimensions in ket print order, used to validate kets while
/// parsing.
pub(super) struct KetShape<'a> {
    pub print_order_dims: &'a [usize],
}

pub(super) struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    shape: Option<KetShape<'a>>,
    ket_len: Option<usize>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    pub(super) fn new(text: &str, shape: Option<KetShape<'a>>) -> Self {
        Self {
            chars: text.chars().collect(),
            pos: 0,
            shape,
            ket_len: None,
        }
    }

    fn error<T>(&self, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError {
            position: self.pos,
            kind,
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.unexpected(what)
        }
    }

    fn unexpected<T>(&self, what: &'static str) -> PResult<T> {
        match self.peek() {
            None => self.error(ParseErrorKind::UnexpectedEnd),
            Some(_) => self.error(ParseErrorKind::Expected(what)),
        }
    }

    pub(super) fn parse(mut self) -> PResult<StateExpr> {
        self.skip_ws();
        if self.peek().is_none() {
            return self.error(ParseErrorKind::Empty);
        }
        let terms = self.expr()?;
        self.skip_ws();
        if let Some(c) = self.peek() {
            return self.error(ParseErrorKind::UnexpectedChar(c));
        }
        Ok(StateExpr { terms })
    }

    fn sign(&mut self) -> Option<f64> {
        if self.eat('+') {
            Some(1.0)
        } else if self.eat('-') {
            Some(-1.0)
        } else {
            None
        }
    }

    fn expr(&mut self) -> PResult<Vec<Term>> {
        let mut terms = Vec::new();
        let mut sign = self.sign().unwrap_or(1.0);
        loop {
            for mut term in self.term()? {
                if sign < 0.0 {
                    term.coefficient = -term.coefficient;
                }
                terms.push(term);
            }
            match self.sign() {
                Some(s) => sign = s,
                None => return Ok(terms),
            }
        }
    }

    fn term(&mut self) -> PResult<Vec<Term>> {
        let mut coefficient: Option<C64> = None;
        let times = |c: C64, acc: &mut Option<C64>| {
            *acc = Some(match *acc {
                Some(prev) => prev * c,
                None => c,
            });
        };
        loop {
            self.skip_ws();
            let start = self.pos;
            if let Some(c) = self.coefficient()? {
                times(c, &mut coefficient);
                self.eat('*');
                continue;
            }
            self.pos = start;
            if self.peek() == Some('(') {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')', "')'")?;
                return Ok(inner
                    .into_iter()
                    .map(|mut t| {
                        if let Some(c) = coefficient {
                            t.coefficient = c * t.coefficient;
                        }
                        t
                    })
                    .collect());
            }
            let atom = self.atom()?;
            return Ok(alloc::vec![Term {
                coefficient: coefficient.unwrap_or(C64::new(1.0, 0.0)),
                atom,
            }]);
        }
    }

    /// A coefficient factor, or `None` (position unspecified) if the input
    /// at this point is not one.
    fn coefficient(&mut self) -> PResult<Option<C64>> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let value = self.number()?;
                if self.peek() == Some('i') && !self.peek_at(1).is_some_and(|c| c.is_alphanumeric()) {
                    self.pos += 1;
                    return Ok(Some(C64::new(0.0, value)));
                }
                Ok(Some(C64::new(value, 0.0)))
            }
            Some('i') if !self.peek_at(1).is_some_and(|c| c.is_alphanumeric()) => {
                self.pos += 1;
                Ok(Some(C64::new(0.0, 1.0)))
            }
            Some('(') => {
                let start = self.pos;
                self.pos += 1;
                match self.complex_literal() {
                    Some(c) => Ok(Some(c)),
                    None => {
                        self.pos = start;
                        Ok(None)
                    }
                }
            }
            _ => Ok(None),
        }
    }

    /// `signed-number (sign number 'i')? ')'` or `signed-number 'i' ')'`,
    /// after the opening parenthesis.
    fn complex_literal(&mut self) -> Option<C64> {
        let sign = self.sign().unwrap_or(1.0);
        self.skip_ws();
        let first = sign * self.number().ok()?;
        if self.peek() == Some('i') {
            self.pos += 1;
            return self.eat(')').then_some(C64::new(0.0, first));
        }
        if self.eat(')') {
            return Some(C64::new(first, 0.0));
        }
        let sign = self.sign()?;
        self.skip_ws();
        let second = sign * self.number().ok()?;
        if self.peek() != Some('i') {
            return None;
        }
        self.pos += 1;
        self.eat(')').then_some(C64::new(first, second))
    }

    fn number(&mut self) -> PResult<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.peek() == Some('.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return self.error(ParseErrorKind::InvalidNumber);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>().map_err(|_| ParseError {
            position: start,
            kind: ParseErrorKind::InvalidNumber,
        })
    }

    fn identifier(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn atom(&mut self) -> PResult<Atom> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('|') => self.ket(),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.identifier();
                match name.as_str() {
                    "ghz" => Ok(Atom::Ghz),
                    "bell1" | "bell2" | "bell3" => {
                        let index = (name.as_bytes()[4] - b'0') as usize;
                        self.expect('(', "'(' after bell index")?;
                        let angle = self.angle()?;
                        self.expect(')', "')' closing angle")?;
                        Ok(Atom::Bell { index, angle })
                    }
                    _ => Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::UnknownAtom(name),
                    }),
                }
            }
            Some(c) => self.error(ParseErrorKind::UnexpectedChar(c)),
            None => self.error(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn ket(&mut self) -> PResult<Atom> {
        let start = self.pos;
        self.pos += 1;
        let mut digits = Vec::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            digits.push(c as usize - '0' as usize);
            self.pos += 1;
        }
        if digits.is_empty() {
            return self.unexpected("ket digits");
        }
        if self.peek() != Some('>') {
            return self.unexpected("'>' closing ket");
        }
        self.pos += 1;
        let fail = |kind| Err(ParseError { position: start, kind });
        if let Some(shape) = &self.shape {
            let dims = shape.print_order_dims;
            if digits.len() != dims.len() {
                return fail(ParseErrorKind::KetLength {
                    expected: dims.len(),
                    got: digits.len(),
                });
            }
            if let Some((&digit, &dim)) = digits.iter().zip(dims).find(|(d, n)| d >= n) {
                return fail(ParseErrorKind::KetDigit { digit, dim });
            }
        }
        match self.ket_len {
            Some(len) if len != digits.len() => {
                return fail(ParseErrorKind::KetLength {
                    expected: len,
                    got: digits.len(),
                })
            }
            _ => self.ket_len = Some(digits.len()),
        }
        Ok(Atom::Ket(digits))
    }

    fn angle(&mut self) -> PResult<f64> {
        let mut value = self.sign().unwrap_or(1.0) * self.angle_term()?;
        while let Some(s) = self.sign() {
            value += s * self.angle_term()?;
        }
        Ok(value)
    }

    fn angle_term(&mut self) -> PResult<f64> {
        let mut value = self.angle_factor()?;
        loop {
            if self.eat('*') {
                value *= self.angle_factor()?;
            } else if self.eat('/') {
                value /= self.angle_factor()?;
            } else {
                return Ok(value);
            }
        }
    }

    fn angle_factor(&mut self) -> PResult<f64> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.angle_factor()?)
            }
            Some('(') => {
                self.pos += 1;
                let v = self.angle()?;
                self.expect(')', "')'")?;
                Ok(v)
            }
            Some('p') if self.peek_at(1) == Some('i') => {
                self.pos += 2;
                Ok(PI)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            _ => self.unexpected("angle"),
        }
    }
}
