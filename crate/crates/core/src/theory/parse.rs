//! Predicate text syntax.
//!
//! ```text
//! pred    := and ("||" and)*
//! and     := unary ("&&" unary)*
//! unary   := "!" unary | "(" pred ")" | "true" | "false" | "@" INT | atom
//! atom    := VAR "in" "{" SYM ("," SYM)* "}" | term OP term
//! term    := VAR | NUMBER | "min" "(" VAR "," VAR ")"
//! VAR     := "x0" | "x-" INT
//! OP      := "<" | "<=" | "=" | "==" | "!=" | ">" | ">="
//! ```
//!
//! Symbols are bare identifiers, digit strings or double-quoted strings.

use std::collections::BTreeSet;

use super::letter::Symbol;
use super::predicate::{Atom, CmpOp, Predicate, Term};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    And,
    Or,
    Not,
    Op(CmpOp),
    Var(usize, String),
    Num(String),
    Ident(String),
    Str(String),
    Track(usize),
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    end: usize,
}

impl<'a> Lexer<'a> {
    fn peek_char(&self) -> Option<char> {
        self.text[self.pos..self.end].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.text[self.pos..self.end].chars().nth(offset)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn err(&self, at: usize, message: impl Into<String>) -> Error {
        Error::syntax(self.text, at, message)
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok(None);
        };
        let two = |l: &mut Self, tok: Tok| {
            l.pos += 2;
            Ok(Some((start, tok)))
        };
        let one = |l: &mut Self, tok: Tok| {
            l.pos += 1;
            Ok(Some((start, tok)))
        };
        let next = self.peek_at(1);
        match c {
            '(' => one(self, Tok::LParen),
            ')' => one(self, Tok::RParen),
            '{' => one(self, Tok::LBrace),
            '}' => one(self, Tok::RBrace),
            ',' => one(self, Tok::Comma),
            '&' if next == Some('&') => two(self, Tok::And),
            '|' if next == Some('|') => two(self, Tok::Or),
            '!' if next == Some('=') => two(self, Tok::Op(CmpOp::Ne)),
            '!' => one(self, Tok::Not),
            '<' if next == Some('=') => two(self, Tok::Op(CmpOp::Le)),
            '<' => one(self, Tok::Op(CmpOp::Lt)),
            '>' if next == Some('=') => two(self, Tok::Op(CmpOp::Ge)),
            '>' => one(self, Tok::Op(CmpOp::Gt)),
            '=' if next == Some('=') => two(self, Tok::Op(CmpOp::Eq)),
            '=' => one(self, Tok::Op(CmpOp::Eq)),
            '@' => {
                self.pos += 1;
                let digits = self.take_while(|c| c.is_ascii_digit());
                let index = digits
                    .parse()
                    .map_err(|_| self.err(start, "expected track index after '@'"))?;
                Ok(Some((start, Tok::Track(index))))
            }
            '"' => {
                self.pos += 1;
                let mut out = String::new();
                loop {
                    match self.peek_char() {
                        None => return Err(self.err(start, "unterminated string")),
                        Some('"') => {
                            self.pos += 1;
                            break;
                        }
                        Some('\\') => {
                            self.pos += 1;
                            let Some(e) = self.peek_char() else {
                                return Err(self.err(start, "unterminated string"));
                            };
                            self.pos += e.len_utf8();
                            out.push(e);
                        }
                        Some(o) => {
                            self.pos += o.len_utf8();
                            out.push(o);
                        }
                    }
                }
                Ok(Some((start, Tok::Str(out))))
            }
            'x' if next == Some('-') && self.peek_at(2).is_some_and(|c| c.is_ascii_digit()) => {
                self.pos += 2;
                let digits = self.take_while(|c| c.is_ascii_digit());
                let j = digits
                    .parse()
                    .map_err(|_| self.err(start, "lookback index too large"))?;
                Ok(Some((start, Tok::Var(j, self.text[start..self.pos].to_string()))))
            }
            c if c.is_ascii_digit()
                || ((c == '-' || c == '.') && next.is_some_and(|d| d.is_ascii_digit())) =>
            {
                self.pos += c.len_utf8();
                self.take_while(|c| c.is_ascii_digit() || c == '.');
                if self.peek_char() == Some('/') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                    self.pos += 1;
                    self.take_while(|c| c.is_ascii_digit());
                }
                Ok(Some((start, Tok::Num(self.text[start..self.pos].to_string()))))
            }
            c if c.is_alphabetic() || c == '_' => {
                let ident = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if ident == "x0" {
                    return Ok(Some((start, Tok::Var(0, ident.to_string()))));
                }
                Ok(Some((start, Tok::Ident(ident.to_string()))))
            }
            other => Err(self.err(start, format!("unexpected character '{other}'"))),
        }
    }
}

struct Parser<'a, S> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
    _scalar: std::marker::PhantomData<S>,
}

impl<'a, S: Scalar> Parser<'a, S> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(_, t)| t.clone());
        self.i += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::syntax(self.text, self.here(), message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn or(&mut self) -> Result<Predicate<S>> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.i += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Predicate::Or(parts) })
    }

    fn and(&mut self) -> Result<Predicate<S>> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.i += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Predicate::And(parts) })
    }

    fn unary(&mut self) -> Result<Predicate<S>> {
        match self.peek() {
            Some(Tok::Not) => {
                self.i += 1;
                Ok(Predicate::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let inner = self.or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(id)) if id == "true" => {
                self.i += 1;
                Ok(Predicate::True)
            }
            Some(Tok::Ident(id)) if id == "false" => {
                self.i += 1;
                Ok(Predicate::False)
            }
            Some(Tok::Track(t)) => {
                let t = *t;
                self.i += 1;
                Ok(Predicate::Atom(Atom::Track(t)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Predicate<S>> {
        if let (Some(Tok::Var(j, _)), Some((_, Tok::Ident(kw)))) = (self.peek(), self.toks.get(self.i + 1)) {
            if kw == "in" {
                let var = *j;
                self.i += 2;
                self.expect(Tok::LBrace, "'{' after 'in'")?;
                let mut set = BTreeSet::new();
                if self.peek() != Some(&Tok::RBrace) {
                    loop {
                        let sym = match self.bump() {
                            Some(Tok::Ident(s)) | Some(Tok::Str(s)) | Some(Tok::Num(s)) => s,
                            Some(Tok::Var(_, s)) => s,
                            _ => {
                                self.i -= 1;
                                return Err(self.err("expected a symbol"));
                            }
                        };
                        set.insert(Symbol::from(sym));
                        match self.bump() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::RBrace) => break,
                            _ => {
                                self.i -= 1;
                                return Err(self.err("expected ',' or '}'"));
                            }
                        }
                    }
                } else {
                    self.i += 1;
                }
                return Ok(Predicate::Atom(Atom::Member { var, set }));
            }
        }
        let lhs = self.term()?;
        let op = match self.bump() {
            Some(Tok::Op(op)) => op,
            _ => {
                self.i -= 1;
                return Err(self.err("expected a comparison operator"));
            }
        };
        let rhs = self.term()?;
        Ok(Predicate::Atom(Atom::Cmp { lhs, op, rhs }))
    }

    fn var(&mut self) -> Result<usize> {
        match self.bump() {
            Some(Tok::Var(j, _)) => Ok(j),
            _ => {
                self.i -= 1;
                Err(self.err("expected a lookback variable"))
            }
        }
    }

    fn term(&mut self) -> Result<Term<S>> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Var(j, _)) => Ok(Term::Var(j)),
            Some(Tok::Num(text)) => S::parse_exact(&text)
                .map(Term::Const)
                .ok_or_else(|| Error::syntax(self.text, at, format!("invalid number '{text}'"))),
            Some(Tok::Ident(id)) if id == "min" => {
                self.expect(Tok::LParen, "'(' after 'min'")?;
                let a = self.var()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.var()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Term::Min { from: a.max(b), to: a.min(b) })
            }
            _ => {
                self.i -= 1;
                Err(self.err("expected a variable, number or min(..)"))
            }
        }
    }
}

/// Parses the predicate in `text[start..end]`; error positions refer to
/// the whole of `text`.
pub(crate) fn parse_predicate_span<S: Scalar>(text: &str, start: usize, end: usize) -> Result<Predicate<S>> {
    let mut lexer = Lexer { text, pos: start, end };
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser { text, toks, i: 0, end, _scalar: std::marker::PhantomData };
    if parser.peek().is_none() {
        return Err(parser.err("empty predicate"));
    }
    let p = parser.or()?;
    if parser.peek().is_some() {
        return Err(parser.err("unexpected token after predicate"));
    }
    Ok(p)
}

/// Parses predicate text without theory checks.
pub fn parse_predicate_text<S: Scalar>(text: &str) -> Result<Predicate<S>> {
    parse_predicate_span(text, 0, text.len())
}

/// Offset of the `]` closing the `[` at `open`, skipping quoted symbols.
pub(crate) fn closing_bracket(text: &str, open: usize) -> Option<usize> {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in text[open + 1..].char_indices() {
        if in_str {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            ']' => return Some(open + 1 + i),
            '[' => return None,
            _ => {}
        }
    }
    None
}
