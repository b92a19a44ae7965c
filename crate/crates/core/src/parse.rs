//! Text syntax for polynomials and generator lists.
//!
//! Grammar: sums and differences of products; a factor is an integer, a
//! variable, or a parenthesized expression, optionally followed by `^k`.
//! `*` is optional between factors, so `3y^3` and `2x(x+y)` parse.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::ring::PolyRing;

pub fn parse_polynomial(ring: &PolyRing, text: &str) -> Result<Polynomial> {
    let mut p = Parser {
        ring,
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let f = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

/// Splits a generator list such as `x^2, y*(x+y)` at top-level commas.
/// Surrounding parentheses around the whole list are accepted.
pub fn parse_generators(ring: &PolyRing, text: &str) -> Result<Vec<Polynomial>> {
    let trimmed = strip_outer_parens(text.trim());
    if trimmed.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top_level(trimmed)?
        .into_iter()
        .map(|part| parse_polynomial(ring, part))
        .collect()
}

/// Removes one pair of parentheses enclosing the entire string, if present.
pub fn strip_outer_parens(text: &str) -> &str {
    let t = text.trim();
    if !(t.starts_with('(') && t.ends_with(')')) {
        return t;
    }
    let mut depth = 0i32;
    for (i, c) in t.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i + 1 != t.len() {
                    return t;
                }
            }
            _ => {}
        }
    }
    &t[1..t.len() - 1]
}

pub fn split_top_level(text: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced parentheses in `{text}`")));
                }
            }
            ',' if depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in `{text}`")));
    }
    parts.push(text[start..].trim());
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("empty entry in list `{text}`")));
    }
    Ok(parts)
}

struct Parser<'a> {
    ring: &'a PolyRing,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        let text = String::from_utf8_lossy(self.src);
        Error::Parse(format!("{msg} at offset {} in `{text}`", self.pos))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let fp = self.ring.field();
        let n = self.ring.nvars();
        let mut acc = Polynomial::zero(n);
        let mut first = true;
        loop {
            self.skip_ws();
            let mut negate = false;
            match self.peek() {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    negate = true;
                    self.pos += 1;
                }
                _ if first => {}
                _ => break,
            }
            first = false;
            let t = self.term()?;
            acc = if negate { acc.sub(&t, fp) } else { acc.add(&t, fp) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let fp = self.ring.field();
        let mut acc = self.power()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.power()?;
                    acc = acc.mul(&f, fp);
                }
                Some(c) if c == b'(' || c.is_ascii_alphanumeric() || c == b'_' => {
                    let f = self.power()?;
                    acc = acc.mul(&f, fp);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error("expected exponent"));
            }
            let k: BigUint = digits.parse().map_err(|_| self.error("bad exponent"))?;
            return base.pow(&k, self.ring.field());
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        let n = self.ring.nvars();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                let a = self.power()?;
                Ok(a.neg(self.ring.field()))
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits();
                let c = self.ring.field().from_decimal(&d)?;
                Ok(Polynomial::constant(n, c))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if let Some(i) = self.ring.var_index(name) {
                    return Ok(self.ring.var(i));
                }
                // Allow juxtaposed single-letter variables such as `xy`.
                let mut acc = Polynomial::one(n);
                for ch in name.chars() {
                    let Some(i) = self.ring.var_index(ch.encode_utf8(&mut [0; 4])) else {
                        self.pos = start;
                        return Err(self.error(&format!("unknown variable `{name}`")));
                    };
                    acc = acc.mul(&self.ring.var(i), self.ring.field());
                }
                Ok(acc)
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}
