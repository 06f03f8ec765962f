//! Text form of expressions.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := number ['i'] | 'i' | 'x' index | 'dx' index | '(' expr ')'
//! ```
//!
//! Whitespace is ignored between tokens. The printer emits the same grammar.

use std::fmt;

use num_complex::Complex;
use thiserror::Error;

use super::{Generator, NCExpression, NCWord};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

type Expr = NCExpression<f64>;

impl<'a> Parser<'a> {
    fn err<R>(&self, msg: impl Into<String>) -> Result<R, ParseError> {
        Err(ParseError { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut negate = false;
        if self.eat('-') {
            negate = true;
        } else {
            self.eat('+');
        }
        let mut acc = Expr::zero();
        loop {
            let t = self.term()?;
            acc = if negate { acc.sub(&t) } else { acc.add(&t) };
            if self.eat('+') {
                negate = false;
            } else if self.eat('-') {
                negate = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some('x') => {
                self.pos += 1;
                Ok(Expr::word(&[Generator::x(self.index()?)]))
            }
            Some('d') => {
                self.pos += 1;
                if !self.src[self.pos..].starts_with('x') {
                    return self.err("expected 'x' after 'd'");
                }
                self.pos += 1;
                Ok(Expr::word(&[Generator::dx(self.index()?)]))
            }
            Some('i') => {
                self.pos += 1;
                Ok(Expr::scalar(Complex::new(0.0, 1.0)))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let value = self.number()?;
                if self.src[self.pos..].starts_with('i') {
                    self.pos += 1;
                    Ok(Expr::scalar(Complex::new(0.0, value)))
                } else {
                    Ok(Expr::scalar(Complex::new(value, 0.0)))
                }
            }
            Some(c) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        let digits = self.src[self.pos..].chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            return self.err("expected generator index");
        }
        let s = &self.src[self.pos..self.pos + digits];
        let v = s.parse().or_else(|_| self.err("index out of range"))?;
        self.pos += digits;
        Ok(v)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        // optional exponent: e[+-]digits
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        match self.src[start..end].parse::<f64>() {
            Ok(v) => {
                self.pos = end;
                Ok(v)
            }
            Err(_) => self.err(format!("bad number '{}'", &self.src[start..end])),
        }
    }
}

/// Parse the text form into a double-precision expression.
pub fn parse_expression(src: &str) -> Result<NCExpression<f64>, ParseError> {
    let mut p = Parser { src, pos: 0 };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

fn write_word(w: &NCWord, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (k, g) in w.0.iter().enumerate() {
        if k > 0 {
            f.write_str("*")?;
        }
        write!(f, "{g}")?;
    }
    Ok(())
}

pub(super) fn write_expression<T: Scalar>(
    e: &NCExpression<T>,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    if e.is_zero() {
        return f.write_str("0");
    }
    for (k, (word, c)) in e.terms().enumerate() {
        let (re0, im0) = (c.re.is_zero(), c.im.is_zero());
        // pull a leading minus out of purely real or purely imaginary values
        let negative = (im0 && c.re.is_negative()) || (re0 && c.im.is_negative());
        let mag = if negative { -c.clone() } else { c.clone() };
        match (k, negative) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        let unit = im0 && mag.re.is_one();
        if unit && !word.is_empty() {
            write_word(word, f)?;
            continue;
        }
        if im0 {
            write!(f, "{}", mag.re)?;
        } else if re0 {
            write!(f, "{}i", mag.im)?;
        } else if mag.im.is_negative() {
            write!(f, "({} - {}i)", mag.re, -mag.im.clone())?;
        } else {
            write!(f, "({} + {}i)", mag.re, mag.im)?;
        }
        if !word.is_empty() {
            f.write_str("*")?;
            write_word(word, f)?;
        }
    }
    Ok(())
}
