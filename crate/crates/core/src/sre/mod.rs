//! Symbolic regular expressions over lookback predicates.
//!
//! ```text
//! sre     := concat ("+" concat)*
//! concat  := postfix ("." postfix)*
//! postfix := primary "*"*
//! primary := "[" predicate "]" | "(" sre ")"
//! ```
//!
//! `[φ]` denotes the words of length `k+1` satisfying `φ`, `.` is
//! concatenation overlapping on `k` letters and `R*` includes every word of
//! length `k`.

use std::fmt;

use crate::error::{Error, Result};
use crate::ksla::Ksla;
use crate::scalar::Scalar;
use crate::theory::{closing_bracket, parse_predicate_span, Letter, Predicate, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SreNode<S> {
    Pred(Predicate<S>),
    Union(Box<SreNode<S>>, Box<SreNode<S>>),
    Concat(Box<SreNode<S>>, Box<SreNode<S>>),
    Star(Box<SreNode<S>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sre<S> {
    theory: Theory<S>,
    node: SreNode<S>,
}

impl<S: Scalar> SreNode<S> {
    pub fn pred(p: Predicate<S>) -> Self {
        SreNode::Pred(p)
    }

    pub fn union(self, other: Self) -> Self {
        SreNode::Union(Box::new(self), Box::new(other))
    }

    pub fn concat(self, other: Self) -> Self {
        SreNode::Concat(Box::new(self), Box::new(other))
    }

    pub fn star(self) -> Self {
        SreNode::Star(Box::new(self))
    }

    fn predicates<'a>(&'a self, out: &mut Vec<&'a Predicate<S>>) {
        match self {
            SreNode::Pred(p) => out.push(p),
            SreNode::Union(a, b) | SreNode::Concat(a, b) => {
                a.predicates(out);
                b.predicates(out);
            }
            SreNode::Star(a) => a.predicates(out),
        }
    }

    fn member(&self, w: &[Letter<S>], k: usize) -> bool {
        let n = w.len();
        match self {
            SreNode::Pred(p) => n == k + 1 && p.eval_block(w, 0),
            SreNode::Union(a, b) => a.member(w, k) || b.member(w, k),
            SreNode::Concat(a, b) => n > k && (0..n - k).any(|m| a.member(&w[..m + k], k) && b.member(&w[m..], k)),
            SreNode::Star(r) => self.star_member(r, w, k),
        }
    }

    fn star_member(&self, r: &SreNode<S>, w: &[Letter<S>], k: usize) -> bool {
        let n = w.len();
        if n <= k {
            return n == k;
        }
        (0..n - k).any(|m| r.member(&w[m..], k) && self.star_member(r, &w[..m + k], k))
    }

    fn compile(&self, theory: &Theory<S>) -> Result<Ksla<S>> {
        match self {
            SreNode::Pred(p) => {
                let mut a = Ksla::new(theory.clone(), 2, 0);
                a.set_final(1, true);
                a.add_transition(0, 1, p.clone())?;
                Ok(a)
            }
            SreNode::Union(x, y) => x.compile(theory)?.union(&y.compile(theory)?),
            SreNode::Concat(x, y) => x.compile(theory)?.concat_k(&y.compile(theory)?),
            SreNode::Star(x) => x.compile(theory)?.star(),
        }
    }
}

impl<S: Scalar> Sre<S> {
    pub fn new(theory: Theory<S>, node: SreNode<S>) -> Result<Self> {
        let mut preds = Vec::new();
        node.predicates(&mut preds);
        preds.into_iter().try_for_each(|p| theory.validate(p))?;
        Ok(Sre { theory, node })
    }

    pub fn parse(text: &str, theory: &Theory<S>) -> Result<Self> {
        let mut p = Parser { text, pos: 0 };
        p.skip_ws();
        let node = p.union()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(Error::syntax(text, p.pos, "unexpected input after expression"));
        }
        let mut preds = Vec::new();
        node.predicates(&mut preds);
        preds.into_iter().try_for_each(|q| theory.validate(q))?;
        Ok(Sre { theory: theory.clone(), node })
    }

    pub fn theory(&self) -> &Theory<S> {
        &self.theory
    }

    pub fn node(&self) -> &SreNode<S> {
        &self.node
    }

    /// Direct denotational membership test, independent of compilation.
    pub fn membership(&self, w: &[Letter<S>]) -> bool {
        self.node.member(w, self.theory.lookback())
    }

    /// Compiles to a (generally nondeterministic) k-SLA.
    pub fn compile(&self) -> Result<Ksla<S>> {
        self.node.compile(&self.theory)
    }
}

pub fn parse_sre<S: Scalar>(text: &str, theory: &Theory<S>) -> Result<Sre<S>> {
    Sre::parse(text, theory)
}

pub fn sre_membership<S: Scalar>(r: &Sre<S>, w: &[Letter<S>]) -> bool {
    r.membership(w)
}

pub fn compile_sre<S: Scalar>(r: &Sre<S>) -> Result<Ksla<S>> {
    r.compile()
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn union<S: Scalar>(&mut self) -> Result<SreNode<S>> {
        let mut node = self.concat()?;
        while self.eat('+') {
            node = node.union(self.concat()?);
        }
        Ok(node)
    }

    fn concat<S: Scalar>(&mut self) -> Result<SreNode<S>> {
        let mut node = self.postfix()?;
        while self.eat('.') {
            node = node.concat(self.postfix()?);
        }
        Ok(node)
    }

    fn postfix<S: Scalar>(&mut self) -> Result<SreNode<S>> {
        let mut node = self.primary()?;
        while self.eat('*') {
            node = node.star();
        }
        Ok(node)
    }

    fn primary<S: Scalar>(&mut self) -> Result<SreNode<S>> {
        self.skip_ws();
        let start = self.pos;
        if self.eat('[') {
            let close = closing_bracket(self.text, start)
                .ok_or_else(|| Error::syntax(self.text, start, "unclosed '['"))?;
            let p = parse_predicate_span(self.text, start + 1, close)?;
            self.pos = close + 1;
            Ok(SreNode::Pred(p))
        } else if self.eat('(') {
            let node = self.union()?;
            if !self.eat(')') {
                return Err(Error::syntax(self.text, self.pos, "expected ')'"));
            }
            Ok(node)
        } else {
            Err(Error::syntax(self.text, start, "expected '[' or '('"))
        }
    }
}

impl<S: Scalar> fmt::Display for SreNode<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SreNode::Pred(p) => write!(f, "[{p}]"),
            SreNode::Union(a, b) => {
                write!(f, "{a} + ")?;
                match b.as_ref() {
                    SreNode::Union(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            SreNode::Concat(a, b) => {
                match a.as_ref() {
                    SreNode::Union(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " . ")?;
                match b.as_ref() {
                    SreNode::Union(..) | SreNode::Concat(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            SreNode::Star(a) => match a.as_ref() {
                SreNode::Pred(_) | SreNode::Star(_) => write!(f, "{a}*"),
                _ => write!(f, "({a})*"),
            },
        }
    }
}

impl<S: Scalar> fmt::Display for Sre<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.node)
    }
}
