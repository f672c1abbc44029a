//! A small arithmetic expression language for SCM mechanisms.
//!
//! Supports numbers, identifiers, `+ - * / ^`, comparisons (`< <= > >= == !=`,
//! yielding 1 or 0), logical `&& || !` (nonzero is true) and the functions
//! `if(c, a, b)`, `min`, `max`, `abs`, `exp`, `ln`, `sqrt`, `floor`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    If,
    Min,
    Max,
    Abs,
    Exp,
    Ln,
    Sqrt,
    Floor,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "if" => (Func::If, 3),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "abs" => (Func::Abs, 1),
            "exp" => (Func::Exp, 1),
            "ln" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "floor" => (Func::Floor, 1),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    const OPS: [&str; 16] = [
        "<=", ">=", "==", "!=", "&&", "||", "+", "-", "*", "/", "^", "<", ">", "!", "(", ")",
    ];
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
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
            let text = &src[start..i];
            let v = text
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{text}` in `{src}`")))?;
            out.push(Token::Num(v));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token::Ident(src[start..i].to_string()));
            continue;
        }
        if c == ',' {
            out.push(Token::Comma);
            i += 1;
            continue;
        }
        for op in OPS {
            if src[i..].starts_with(op) {
                out.push(match op {
                    "(" => Token::LParen,
                    ")" => Token::RParen,
                    _ => Token::Op(op),
                });
                i += op.len();
                continue 'outer;
            }
        }
        return Err(Error::Parse(format!(
            "unexpected character `{c}` in `{src}`"
        )));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
    src: &'a str,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<&'static str> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(op)) => Some(op),
            _ => None,
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} in `{}`", self.src))
    }

    fn binary(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Expr>,
        chain: bool,
    ) -> Result<Expr> {
        let mut lhs = next(self)?;
        while let Some(op) = self.peek_op() {
            let Some(&(_, bin)) = ops.iter().find(|(s, _)| *s == op) else {
                break;
            };
            self.pos += 1;
            let rhs = next(self)?;
            lhs = Expr::Bin(bin, Box::new(lhs), Box::new(rhs));
            if !chain {
                break;
            }
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr> {
        self.binary(&[("||", BinOp::Or)], Self::and, true)
    }

    fn and(&mut self) -> Result<Expr> {
        self.binary(&[("&&", BinOp::And)], Self::cmp, true)
    }

    fn cmp(&mut self) -> Result<Expr> {
        self.binary(
            &[
                ("<", BinOp::Lt),
                ("<=", BinOp::Le),
                (">", BinOp::Gt),
                (">=", BinOp::Ge),
                ("==", BinOp::Eq),
                ("!=", BinOp::Ne),
            ],
            Self::add,
            false,
        )
    }

    fn add(&mut self) -> Result<Expr> {
        self.binary(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::mul, true)
    }

    fn mul(&mut self) -> Result<Expr> {
        self.binary(&[("*", BinOp::Mul), ("/", BinOp::Div)], Self::unary, true)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek_op() {
            Some("-") => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some("!") => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            _ => self.pow(),
        }
    }

    fn pow(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some("^") {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.or()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                if self.tokens.get(self.pos) == Some(&Token::LParen) {
                    let (func, arity) = Func::lookup(&name)
                        .ok_or_else(|| self.err(&format!("unknown function `{name}`")))?;
                    self.pos += 1;
                    let mut args = vec![self.or()?];
                    while self.tokens.get(self.pos) == Some(&Token::Comma) {
                        self.pos += 1;
                        args.push(self.or()?);
                    }
                    self.expect(Token::RParen)?;
                    if args.len() != arity {
                        return Err(self.err(&format!(
                            "`{name}` takes {arity} arguments, got {}",
                            args.len()
                        )));
                    }
                    return Ok(Expr::Call(func, args));
                }
                (self.resolve)(&name)
                    .map(Expr::Var)
                    .ok_or_else(|| self.err(&format!("unknown identifier `{name}`")))
            }
            _ => Err(self.err("expected a value")),
        }
    }

    fn expect(&mut self, tok: Token) -> Result<()> {
        if self.tokens.get(self.pos) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {tok:?}")))
        }
    }
}

impl Expr {
    /// Parses `src`, resolving identifiers to environment slots.
    pub fn parse(src: &str, resolve: &dyn Fn(&str) -> Option<usize>) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            resolve,
            src,
        };
        let e = p.or()?;
        if p.pos != p.tokens.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// Identifiers appearing anywhere in `src`, excluding function names.
    pub fn identifiers(src: &str) -> Result<BTreeSet<String>> {
        let tokens = tokenize(src)?;
        Ok(tokens
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                Token::Ident(name) if tokens.get(i + 1) != Some(&Token::LParen) => {
                    Some(name.clone())
                }
                _ => None,
            })
            .collect())
    }

    pub fn eval(&self, env: &[f64]) -> f64 {
        let truth = |v: f64| v != 0.0;
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => env[*i],
            Expr::Neg(e) => -e.eval(env),
            Expr::Not(e) => flag(!truth(e.eval(env))),
            Expr::Bin(op, a, b) => {
                let a = a.eval(env);
                match op {
                    BinOp::And => return flag(truth(a) && truth(b.eval(env))),
                    BinOp::Or => return flag(truth(a) || truth(b.eval(env))),
                    _ => {}
                }
                let b = b.eval(env);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                    BinOp::Lt => flag(a < b),
                    BinOp::Le => flag(a <= b),
                    BinOp::Gt => flag(a > b),
                    BinOp::Ge => flag(a >= b),
                    BinOp::Eq => flag(a == b),
                    BinOp::Ne => flag(a != b),
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            Expr::Call(f, args) => {
                let v = |i: usize| args[i].eval(env);
                match f {
                    Func::If => {
                        if truth(v(0)) {
                            v(1)
                        } else {
                            v(2)
                        }
                    }
                    Func::Min => v(0).min(v(1)),
                    Func::Max => v(0).max(v(1)),
                    Func::Abs => v(0).abs(),
                    Func::Exp => v(0).exp(),
                    Func::Ln => v(0).ln(),
                    Func::Sqrt => v(0).sqrt(),
                    Func::Floor => v(0).floor(),
                }
            }
        }
    }
}
