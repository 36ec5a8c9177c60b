//! Textual serialization of exact expressions.
//!
//! The canonical form is fully parenthesized with integer coefficients,
//! e.g. `((m+2))/(2)` or `((4-m)*g)/(12)`, and round-trips bit-exactly
//! through [`parse_expr`]. The parser accepts general +,-,*,/,^ arithmetic
//! over the symbols z, z1, z2, m, g.

use super::expr::{ExactError, ExactResult, RatExpr};
use super::mpoly::{MPoly, Var, NVARS};
use num_bigint::BigInt;
use num_traits::{One, Signed};
use std::fmt;

pub fn format_poly(p: &MPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (mo, c)) in p.terms.iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push(if neg { '-' } else { '+' });
        }
        let mut factors: Vec<String> = Vec::new();
        if !abs.is_one() || mo.iter().all(|&e| e == 0) {
            factors.push(abs.to_string());
        }
        for (vi, &e) in mo.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = [Var::Z1, Var::Z2, Var::Z, Var::M][vi].name();
            if e == 1 {
                factors.push(name.to_string());
            } else {
                factors.push(format!("{}^{}", name, e));
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

impl fmt::Display for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = if self.n1.is_zero() {
            format!("({})", format_poly(&self.n0))
        } else if self.n0.is_zero() {
            format!("({})*g", format_poly(&self.n1))
        } else {
            format!("({})+({})*g", format_poly(&self.n0), format_poly(&self.n1))
        };
        write!(f, "({})/({})", num, format_poly(&self.den))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src: src.as_bytes(), pos: 0 }
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

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expect(&mut self, c: u8) -> ExactResult<()> {
        match self.bump() {
            Some(x) if x == c => Ok(()),
            other => Err(ExactError::Parse(format!(
                "expected '{}' at byte {}, found {:?}",
                c as char,
                self.pos,
                other.map(|b| b as char)
            ))),
        }
    }

    fn parse_sum(&mut self) -> ExactResult<RatExpr> {
        let mut acc = self.parse_product()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    acc = acc.add(&self.parse_product()?);
                }
                Some(b'-') => {
                    self.bump();
                    acc = acc.sub(&self.parse_product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_product(&mut self) -> ExactResult<RatExpr> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    acc = acc.try_mul(&self.parse_unary()?)?;
                }
                Some(b'/') => {
                    self.bump();
                    acc = acc.div(&self.parse_unary()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> ExactResult<RatExpr> {
        match self.peek() {
            Some(b'-') => {
                self.bump();
                Ok(self.parse_unary()?.neg())
            }
            Some(b'+') => {
                self.bump();
                self.parse_unary()
            }
            _ => self.parse_power(),
        }
    }

    fn parse_power(&mut self) -> ExactResult<RatExpr> {
        let base = self.parse_atom()?;
        if self.peek() == Some(b'^') {
            self.bump();
            let neg = if self.peek() == Some(b'-') {
                self.bump();
                true
            } else {
                false
            };
            let e = self.parse_integer()?;
            let e: i64 = e.try_into().map_err(|_| ExactError::Parse("exponent too large".into()))?;
            return base.pow_i64(if neg { -e } else { e });
        }
        Ok(base)
    }

    fn parse_integer(&mut self) -> ExactResult<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ExactError::Parse(format!("expected integer at byte {}", start)));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse::<BigInt>().map_err(|e| ExactError::Parse(e.to_string()))
    }

    fn parse_atom(&mut self) -> ExactResult<RatExpr> {
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.parse_sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(RatExpr::from_poly(MPoly::constant(self.parse_integer()?))),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "z" => Ok(RatExpr::var(Var::Z)),
                    "z1" => Ok(RatExpr::var(Var::Z1)),
                    "z2" => Ok(RatExpr::var(Var::Z2)),
                    "m" => Ok(RatExpr::var(Var::M)),
                    "g" => Ok(RatExpr::gamma()),
                    other => Err(ExactError::Parse(format!("unknown symbol '{}'", other))),
                }
            }
            other => Err(ExactError::Parse(format!(
                "unexpected {:?} at byte {}",
                other.map(|b| b as char),
                self.pos
            ))),
        }
    }
}

pub fn parse_expr(src: &str) -> ExactResult<RatExpr> {
    let mut p = Parser::new(src);
    let e = p.parse_sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ExactError::Parse(format!("trailing input at byte {}", p.pos)));
    }
    Ok(e)
}

pub(crate) const _NVARS_CHECK: usize = NVARS;
