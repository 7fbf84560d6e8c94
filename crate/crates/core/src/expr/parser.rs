//! Recursive-descent parser for map definitions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? INT | '(' '-'? INT ')'
//! atom    := NUMBER | 'x' | 'l' INT | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := 'tan' | 'sin' | 'cos' | 'exp'
//! NUMBER  := (DIGITS ('.' DIGITS?)? | '.' DIGITS) (('e' | 'E') ('+' | '-')? DIGITS)?
//! ```
//!
//! Numbers are read as exact rationals, so `0.5` is `1/2`.

use num_bigint::BigInt;
use num_traits::One;

use super::ast::{Expr, Func};
use super::ExprError;
use crate::numeric::Rational;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(char),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::Eof, start));
        };
        if c.is_ascii_digit() || (c == b'.' && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit)) {
            return self.number().map(|n| (Tok::Num(n), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok((Tok::Ident(name), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        Err(ExprError::Syntax {
            pos: start,
            expected: "number, identifier, operator or parenthesis".into(),
            found: format!("'{}'", c as char),
        })
    }

    fn number(&mut self) -> Result<Rational, ExprError> {
        let int_part = self.digits();
        let mut frac_part = "";
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac_part = self.digits();
        }
        let mut exp: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            let mut neg = false;
            if let Some(&s) = self.src.get(self.pos) {
                if s == b'+' || s == b'-' {
                    neg = s == b'-';
                    self.pos += 1;
                }
            }
            let d = self.digits();
            if d.is_empty() {
                // not an exponent after all
                self.pos = save;
            } else {
                exp = d.parse::<i64>().map_err(|_| ExprError::Syntax {
                    pos: save,
                    expected: "exponent that fits in 64 bits".into(),
                    found: d.to_string(),
                })?;
                if neg {
                    exp = -exp;
                }
            }
        }
        let mantissa: BigInt = format!("{}{}", if int_part.is_empty() { "0" } else { int_part }, frac_part)
            .parse()
            .unwrap();
        let shift = exp - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let pow = num_traits::pow(ten, shift.unsigned_abs() as usize);
        Ok(if shift >= 0 {
            Rational::from_integer(mantissa * pow)
        } else {
            Rational::new(mantissa, pow)
        })
    }
}

pub(super) struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    mu: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number {n}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Eof => "end of input".into(),
    }
}

impl<'a> Parser<'a> {
    pub(super) fn new(text: &'a str, mu: usize) -> Result<Self, ExprError> {
        let mut lexer = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let (tok, tok_pos) = lexer.next()?;
        Ok(Parser {
            lexer,
            tok,
            tok_pos,
            mu,
        })
    }

    fn bump(&mut self) -> Result<Tok, ExprError> {
        let (next, pos) = self.lexer.next()?;
        self.tok_pos = pos;
        Ok(std::mem::replace(&mut self.tok, next))
    }

    fn error(&self, expected: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.tok_pos,
            expected: expected.into(),
            found: describe(&self.tok),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.tok == Tok::Sym(c) {
            self.bump()?;
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    pub(super) fn parse_all(mut self) -> Result<Expr, ExprError> {
        if self.tok == Tok::Eof {
            return Err(ExprError::Empty);
        }
        let e = self.expr()?;
        if self.tok != Tok::Eof {
            return Err(self.error("operator or end of input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Sym('+') => {
                    self.bump()?;
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump()?;
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Sym('*') => {
                    self.bump()?;
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump()?;
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump()?;
        let exponent = if self.tok == Tok::Sym('(') {
            self.bump()?;
            let n = self.signed_int()?;
            self.expect(')')?;
            n
        } else {
            self.signed_int()?
        };
        if self.tok == Tok::Sym('^') {
            return Err(self.error("operator (chained powers need parentheses)"));
        }
        Ok(Expr::pow(base, exponent))
    }

    fn signed_int(&mut self) -> Result<i32, ExprError> {
        let neg = if self.tok == Tok::Sym('-') {
            self.bump()?;
            true
        } else {
            false
        };
        let Tok::Num(n) = &self.tok else {
            return Err(self.error("integer exponent"));
        };
        if !n.denom().is_one() {
            return Err(self.error("integer exponent"));
        }
        let v: i32 = n
            .numer()
            .try_into()
            .map_err(|_| self.error("exponent within 32-bit range"))?;
        self.bump()?;
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.tok_pos;
        match self.bump()? {
            Tok::Num(n) => Ok(Expr::Const(n)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, pos),
            other => {
                self.tok = other;
                self.tok_pos = pos;
                Err(self.error("number, 'x', parameter, function or '('"))
            }
        }
    }

    fn identifier(&mut self, name: String, pos: usize) -> Result<Expr, ExprError> {
        if name == "x" {
            return Ok(Expr::X);
        }
        if let Some(func) = Func::from_name(&name) {
            self.expect('(')?;
            let arg = self.expr()?;
            self.expect(')')?;
            return Ok(Expr::call(func, arg));
        }
        if let Some(digits) = name.strip_prefix('l') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.mu {
                    return Err(ExprError::ParamIndexOutOfRange {
                        index,
                        mu: self.mu,
                        pos,
                    });
                }
                return Ok(Expr::Param(index));
            }
        }
        Err(ExprError::UnknownIdentifier { name, pos })
    }
}
