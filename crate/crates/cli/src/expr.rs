//! Pointwise nonlinearities written as small algebraic expressions in `u`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | number 'i' | 'i' | 'u' | '|' expr '|'
//!         | func '(' expr ')' | '(' expr ')'
//! func   := conj | re | im | abs
//! ```
//!
//! `u - u^3`, `i*|u|^2*u` and `u - (1 + 1.5i)*u*|u|^2` are all valid.

use std::fmt;

use anyhow::{anyhow, bail, Result};
use dfsphere::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    U,
    Const(C64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Conj,
    Re,
    Im,
    Abs,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            bail!("unexpected {} in expression '{src}'", p.tokens[p.pos]);
        }
        Ok(e)
    }

    pub fn eval(&self, u: C64) -> C64 {
        match self {
            Expr::U => u,
            Expr::Const(c) => *c,
            Expr::Neg(a) => -a.eval(u),
            Expr::Add(a, b) => a.eval(u) + b.eval(u),
            Expr::Sub(a, b) => a.eval(u) - b.eval(u),
            Expr::Mul(a, b) => a.eval(u) * b.eval(u),
            Expr::Div(a, b) => a.eval(u) / b.eval(u),
            Expr::Pow(a, b) => {
                let (base, exp) = (a.eval(u), b.eval(u));
                // integer powers stay exact at u = 0 and on the real line
                if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= i32::MAX as f64 {
                    base.powi(exp.re as i32)
                } else {
                    base.powc(exp)
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(u);
                match f {
                    Func::Conj => v.conj(),
                    Func::Re => C64::new(v.re, 0.0),
                    Func::Im => C64::new(v.im, 0.0),
                    Func::Abs => C64::new(v.norm(), 0.0),
                }
            }
        }
    }

    pub fn mentions_u(&self) -> bool {
        match self {
            Expr::U => true,
            Expr::Const(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.mentions_u(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.mentions_u() || b.mentions_u(),
        }
    }

    /// True when the expression is identically zero by construction.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == C64::new(0.0, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(x) => write!(f, "'{x}'"),
            Token::Imag(x) => write!(f, "'{x}i'"),
            Token::Ident(s) => write!(f, "'{s}'"),
            Token::Op(c) => write!(f, "'{c}'"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let x: f64 = text.parse().map_err(|_| anyhow!("bad number '{text}'"))?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars
                    .get(i + 1)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
            if imaginary {
                i += 1;
                out.push(Token::Imag(x));
            } else {
                out.push(Token::Num(x));
            }
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()|".contains(ch) {
            out.push(Token::Op(ch));
            i += 1;
        } else {
            bail!("unexpected character '{ch}' in expression '{src}'");
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(anyhow!("expected '{op}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(lhs.into(), rhs.into())
            } else {
                Expr::Sub(lhs.into(), rhs.into())
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(lhs.into(), rhs.into())
            } else {
                Expr::Div(lhs.into(), rhs.into())
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(self.unary()?.into()));
        }
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(base.into(), exp.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| anyhow!("expression ends early"))?;
        self.pos += 1;
        match tok {
            Token::Num(x) => Ok(Expr::Const(C64::new(x, 0.0))),
            Token::Imag(x) => Ok(Expr::Const(C64::new(0.0, x))),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Op('|') => {
                let e = self.expr()?;
                self.expect('|')?;
                Ok(Expr::Call(Func::Abs, e.into()))
            }
            Token::Ident(name) => match name.as_str() {
                "u" => Ok(Expr::U),
                "i" => Ok(Expr::Const(C64::new(0.0, 1.0))),
                "conj" | "re" | "im" | "abs" | "real" | "imag" => {
                    let f = match name.as_str() {
                        "conj" => Func::Conj,
                        "re" | "real" => Func::Re,
                        "im" | "imag" => Func::Im,
                        _ => Func::Abs,
                    };
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::Call(f, e.into()))
                }
                other => Err(anyhow!("unknown name '{other}'")),
            },
            other => Err(anyhow!("unexpected {other}")),
        }
    }
}
