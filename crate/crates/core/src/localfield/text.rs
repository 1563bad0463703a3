//! Text form of field elements: `ϖ^v * (d0 + d1ϖ + d2ϖ^2)`.
//!
//! The parser also accepts arithmetic expressions over integers and `ϖ`
//! (spelled `pi` or `ϖ`), e.g. `1 + pi^2`, `-1`, `3*pi^-1`.

use crate::error::{Error, Result};

use super::{Elem, LocalFieldCtx};

impl LocalFieldCtx {
    pub fn format(&self, x: &Elem) -> String {
        if x.is_exact_zero() {
            return "0".into();
        }
        if x.is_zero() {
            return format!("O(ϖ^{})", x.val);
        }
        let digits = self.unit_digits(x);
        let mut terms = Vec::with_capacity(digits.len());
        for (j, d) in digits.iter().enumerate() {
            terms.push(match j {
                0 => format!("{d}"),
                1 => format!("{d}ϖ"),
                _ => format!("{d}ϖ^{j}"),
            });
        }
        format!("ϖ^{} * ({})", x.val, terms.join(" + "))
    }

    pub fn parse(&self, s: &str) -> Result<Elem> {
        let toks = lex(s)?;
        let mut p = Parser { toks, pos: 0, ctx: self };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in {s:?}")));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Pi,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => {}
            '+' => out.push(Tok::Plus),
            '-' => out.push(Tok::Minus),
            '*' => out.push(Tok::Star),
            '/' => out.push(Tok::Slash),
            '^' => out.push(Tok::Caret),
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            'ϖ' => out.push(Tok::Pi),
            'p' if chars.get(i + 1) == Some(&'i') => {
                out.push(Tok::Pi);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..=i].iter().collect();
                out.push(Tok::Int(
                    text.parse().map_err(|_| Error::Parse(format!("bad integer {text}")))?,
                ));
            }
            _ => return Err(Error::Parse(format!("unexpected character {c:?}"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ctx: &'a LocalFieldCtx,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Elem> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                let t = self.term()?;
                acc = self.ctx.add(&acc, &t);
            } else if self.eat(&Tok::Minus) {
                let t = self.term()?;
                acc = self.ctx.sub(&acc, &t);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Elem> {
        let mut acc = self.power()?;
        loop {
            if self.eat(&Tok::Star) {
                let f = self.power()?;
                acc = self.ctx.mul(&acc, &f);
            } else if self.eat(&Tok::Slash) {
                let f = self.power()?;
                acc = self.ctx.div(&acc, &f)?;
            } else if matches!(self.peek(), Some(Tok::Pi) | Some(Tok::LParen)) {
                // juxtaposition, as in `3ϖ^2`
                let f = self.power()?;
                acc = self.ctx.mul(&acc, &f);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Elem> {
        let base = self.unary()?;
        if self.eat(&Tok::Caret) {
            let neg = self.eat(&Tok::Minus);
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Int(k)) => {
                    self.pos += 1;
                    return self.ctx.pow(&base, if neg { -k } else { k });
                }
                _ => return Err(Error::Parse("expected integer exponent".into())),
            }
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Elem> {
        if self.eat(&Tok::Minus) {
            let v = self.unary()?;
            return Ok(self.ctx.neg(&v));
        }
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(self.ctx.from_int(n))
            }
            Some(Tok::Pi) => {
                self.pos += 1;
                Ok(self.ctx.pi())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(Error::Parse("missing )".into()));
                }
                Ok(v)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}
