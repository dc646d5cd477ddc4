//! The immersion expression language.
//!
//! Charts are declared as one scalar expression per ambient coordinate over
//! named parameters, e.g. `cosh(u)*cos(v)/c`. The grammar is the usual
//! calculator one: `^` (right associative) binds tightest, then unary
//! minus, then `*` `/`, then `+` `-`; functions apply with parentheses.
//! Identifiers resolve against the chart's variable list, the builtin
//! constants `pi` and `e`, and the chart's named parameters; anything else
//! is rejected at parse time.

use crate::error::{GeomError, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
}

impl UnaryOp {
    pub fn name(&self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
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
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based index into the chart's variable list.
    Var(usize),
    /// `pi`, `e`, or a chart parameter name.
    Const(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Value of a named constant, `None` if it is not defined in `params`.
pub fn const_value(name: &str, params: &BTreeMap<String, f64>) -> Option<f64> {
    match name {
        "pi" => Some(std::f64::consts::PI),
        "e" => Some(std::f64::consts::E),
        _ => params.get(name).copied(),
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
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token with its starting byte offset; `None` at end of input.
    fn next(&mut self) -> Result<Option<(Tok, usize)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len() && (self.src[end].is_ascii_digit() || self.src[end] == b'.') {
                    end += 1;
                }
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut probe = end + 1;
                    if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                        probe += 1;
                    }
                    if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                        end = probe;
                        while end < self.src.len() && self.src[end].is_ascii_digit() {
                            end += 1;
                        }
                    }
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap();
                let value: f64 = text.parse().map_err(|_| GeomError::Syntax {
                    offset: start,
                    expected: "a numeric literal".into(),
                })?;
                self.pos = end;
                return Ok(Some((Tok::Num(value), start)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
                self.pos = end;
                return Ok(Some((Tok::Ident(text), start)));
            }
            other => {
                return Err(GeomError::Syntax {
                    offset: start,
                    expected: format!("a token (found byte {:?})", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    cursor: usize,
    end: usize,
    vars: &'a [String],
    consts: &'a BTreeMap<String, f64>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.cursor).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.cursor).map(|(t, _)| t.clone());
        self.cursor += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.cursor += 1;
            Ok(())
        } else {
            Err(GeomError::Syntax { offset: self.offset(), expected: what.into() })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.cursor += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.cursor += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // unary minus binds looser than ^, so -u^2 is -(u^2)
    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.cursor += 1;
            let inner = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.cursor += 1;
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let op = UnaryOp::from_name(&name)
                        .ok_or_else(|| GeomError::UnknownIdentifier(name.clone()))?;
                    self.cursor += 1;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Unary(op, Box::new(arg)));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                if const_value(&name, self.consts).is_some() {
                    return Ok(Expr::Const(name));
                }
                Err(GeomError::UnknownIdentifier(name))
            }
            _ => Err(GeomError::Syntax {
                offset,
                expected: "a number, identifier, function call or `(`".into(),
            }),
        }
    }
}

/// Parse `src` against the declared variable names and constant table.
pub fn parse(src: &str, vars: &[String], consts: &BTreeMap<String, f64>) -> Result<Expr> {
    let mut lexer = Lexer::new(src);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next()? {
        tokens.push(t);
    }
    let mut parser = Parser { tokens, cursor: 0, end: src.len(), vars, consts };
    let expr = parser.expr()?;
    if parser.cursor != parser.tokens.len() {
        return Err(GeomError::Syntax { offset: parser.offset(), expected: "end of input".into() });
    }
    Ok(expr)
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Unary(UnaryOp::Neg, _) => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn print_into(e: &Expr, vars: &[String], out: &mut String) {
    let paren = |child: &Expr, needed: u8, out: &mut String| {
        if precedence(child) < needed {
            out.push('(');
            print_into(child, vars, out);
            out.push(')');
        } else {
            print_into(child, vars, out);
        }
    };
    match e {
        Expr::Num(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var(i) => out.push_str(&vars[*i]),
        Expr::Const(name) => out.push_str(name),
        Expr::Unary(UnaryOp::Neg, inner) => {
            out.push('-');
            // parenthesize a nested leading minus for readability
            if matches!(**inner, Expr::Unary(UnaryOp::Neg, _)) {
                out.push('(');
                print_into(inner, vars, out);
                out.push(')');
            } else {
                paren(inner, 3, out);
            }
        }
        Expr::Unary(op, inner) => {
            out.push_str(op.name());
            out.push('(');
            print_into(inner, vars, out);
            out.push(')');
        }
        Expr::Binary(op, l, r) => match op {
            // left-associative: an equal-precedence right child must keep
            // its parentheses or reparsing would rotate the tree
            BinOp::Add => {
                paren(l, 1, out);
                out.push('+');
                paren(r, 2, out);
            }
            BinOp::Sub => {
                paren(l, 1, out);
                out.push('-');
                paren(r, 2, out);
            }
            BinOp::Mul => {
                paren(l, 2, out);
                out.push('*');
                paren(r, 3, out);
            }
            BinOp::Div => {
                paren(l, 2, out);
                out.push('/');
                paren(r, 3, out);
            }
            BinOp::Pow => {
                paren(l, 5, out);
                out.push('^');
                paren(r, 5, out);
            }
        },
    }
}

/// Render the expression so that reparsing yields a structurally equal AST.
pub fn print(e: &Expr, vars: &[String]) -> String {
    let mut out = String::new();
    print_into(e, vars, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> (Vec<String>, BTreeMap<String, f64>) {
        let vars = vec!["u1".to_string(), "u2".to_string()];
        let mut consts = BTreeMap::new();
        consts.insert("c".to_string(), 0.5);
        (vars, consts)
    }

    #[test]
    fn sum_of_squares() {
        let (vars, consts) = ctx();
        let e = parse("u1^2 + u2^2", &vars, &consts).unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Binary(
                    BinOp::Pow,
                    Box::new(Expr::Var(0)),
                    Box::new(Expr::Num(2.0))
                )),
                Box::new(Expr::Binary(
                    BinOp::Pow,
                    Box::new(Expr::Var(1)),
                    Box::new(Expr::Num(2.0))
                )),
            )
        );
    }

    #[test]
    fn variables_resolve_by_declaration_order() {
        let vars = vec!["u".to_string(), "v".to_string()];
        let consts = BTreeMap::new();
        let e = parse("v*cos(u)", &vars, &consts).unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Mul,
                Box::new(Expr::Var(1)),
                Box::new(Expr::Unary(UnaryOp::Cos, Box::new(Expr::Var(0)))),
            )
        );
    }

    #[test]
    fn unclosed_call_reports_byte_offset() {
        let (vars, consts) = ctx();
        let err = parse("cosh(u1", &vars, &consts).unwrap_err();
        match err {
            GeomError::Syntax { offset, .. } => assert_eq!(offset, 7),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        let (vars, consts) = ctx();
        assert!(matches!(
            parse("u1 + q", &vars, &consts),
            Err(GeomError::UnknownIdentifier(name)) if name == "q"
        ));
    }

    #[test]
    fn caret_is_right_associative_and_tighter_than_unary_minus() {
        let (vars, consts) = ctx();
        let e = parse("2^3^2", &vars, &consts).unwrap();
        let printed = print(&e, &vars);
        assert_eq!(parse(&printed, &vars, &consts).unwrap(), e);
        if let Expr::Binary(BinOp::Pow, _, r) = &e {
            assert!(matches!(**r, Expr::Binary(BinOp::Pow, ..)));
        } else {
            panic!("expected pow");
        }

        let e = parse("-u1^2", &vars, &consts).unwrap();
        assert!(matches!(e, Expr::Unary(UnaryOp::Neg, _)));
    }

    #[test]
    fn print_parse_round_trip() {
        let (vars, consts) = ctx();
        for src in [
            "u1^2 + u2^2",
            "-u1^2",
            "u1^-2",
            "1/(1+u1)",
            "sin(u1)*u2 - cosh(u2)/c",
            "2^3^2",
            "-(u1+u2)*pi",
            "u1-(u2-1)",
            "u1/(u2/2)",
            "u1*(u2/2)",
            "u1+(u2+1)",
            "(u1^2)^3",
            "sqrt(1+u1^2)",
        ] {
            let e = parse(src, &vars, &consts).unwrap();
            let printed = print(&e, &vars);
            let back = parse(&printed, &vars, &consts).unwrap();
            assert_eq!(back, e, "round trip failed for `{src}` -> `{printed}`");
        }
    }
}
