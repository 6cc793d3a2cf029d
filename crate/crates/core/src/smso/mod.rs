//! Guarded window formulas.
//!
//! ```text
//! formula := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary
//!          | ("exists" | "forall") VAR "<=" "xe" "." formula
//!          | "(" formula ")"
//!          | "[" predicate "]" "(" var ")"
//!          | SETVAR "(" var ")"
//!          | var ("<" | "<=" | "=" | ">" | ">=") var
//! ```
//!
//! First-order variables start with a lowercase letter, set variables with
//! an uppercase one. `xb` and `xe` are the free window bounds; every
//! quantifier is bounded by `xe` and quantifier bodies extend as far to the
//! right as possible.

mod compile;
mod eval;
mod expr;

use std::collections::BTreeSet;
use std::fmt;

pub use compile::compile_formula_to_pairs;
pub use eval::{eval_formula, windows_bruteforce, Assignment};
pub use expr::{WindowExpression, WindowPair};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{closing_bracket, parse_predicate_span, Predicate, Theory};

pub const BEGIN: &str = "xb";
pub const END: &str = "xe";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula<S> {
    /// `[φ](x)`: the lookback block ending at `x` satisfies `φ`.
    PredAt(Predicate<S>, String),
    Less(String, String),
    /// `X(x)`
    In(String, String),
    Not(Box<Formula<S>>),
    And(Box<Formula<S>>, Box<Formula<S>>),
    Or(Box<Formula<S>>, Box<Formula<S>>),
    /// `exists x <= xe . body`
    ExistsFirst(String, Box<Formula<S>>),
    /// `exists X <= xe . body`, i.e. `X ⊆ [0, xe]`.
    ExistsSecond(String, Box<Formula<S>>),
}

impl<S: Scalar> Formula<S> {
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    fn predicates<'a>(&'a self, out: &mut Vec<&'a Predicate<S>>) {
        match self {
            Formula::PredAt(p, _) => out.push(p),
            Formula::Less(..) | Formula::In(..) => {}
            Formula::Not(f) | Formula::ExistsFirst(_, f) | Formula::ExistsSecond(_, f) => f.predicates(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.predicates(out);
                b.predicates(out);
            }
        }
    }

    /// Checks scoping: every variable is `xb`, `xe` or bound by an
    /// enclosing quantifier of the right order.
    fn check_scope(&self, first: &mut Vec<String>, second: &mut Vec<String>) -> Result<()> {
        let fo = |v: &String, first: &Vec<String>| {
            if v == BEGIN || v == END || first.contains(v) {
                Ok(())
            } else {
                Err(Error::Scope(format!("first-order variable '{v}' is not bound")))
            }
        };
        match self {
            Formula::PredAt(_, x) => fo(x, first),
            Formula::Less(x, y) => fo(x, first).and_then(|_| fo(y, first)),
            Formula::In(set, x) => {
                fo(x, first)?;
                if second.contains(set) {
                    Ok(())
                } else {
                    Err(Error::Scope(format!("set variable '{set}' is not bound")))
                }
            }
            Formula::Not(f) => f.check_scope(first, second),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.check_scope(first, second)?;
                b.check_scope(first, second)
            }
            Formula::ExistsFirst(v, body) => {
                if v == BEGIN || v == END {
                    return Err(Error::Fragment(format!("the window bound '{v}' cannot be quantified")));
                }
                first.push(v.clone());
                let r = body.check_scope(first, second);
                first.pop();
                r
            }
            Formula::ExistsSecond(v, body) => {
                second.push(v.clone());
                let r = body.check_scope(first, second);
                second.pop();
                r
            }
        }
    }

    /// Validates scoping and every embedded predicate against `theory`.
    pub fn validate(&self, theory: &Theory<S>) -> Result<()> {
        self.check_scope(&mut Vec::new(), &mut Vec::new())?;
        let mut preds = Vec::new();
        self.predicates(&mut preds);
        preds.into_iter().try_for_each(|p| theory.validate(p))
    }

    pub(crate) fn free_first(&self) -> BTreeSet<String> {
        match self {
            Formula::PredAt(_, x) | Formula::In(_, x) => [x.clone()].into(),
            Formula::Less(x, y) => [x.clone(), y.clone()].into(),
            Formula::Not(f) | Formula::ExistsSecond(_, f) => f.free_first(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let mut s = a.free_first();
                s.extend(b.free_first());
                s
            }
            Formula::ExistsFirst(v, f) => {
                let mut s = f.free_first();
                s.remove(v);
                s
            }
        }
    }
}

/// A formula together with the theory its predicates belong to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedFormula<S> {
    theory: Theory<S>,
    formula: Formula<S>,
}

impl<S: Scalar> GuardedFormula<S> {
    pub fn new(theory: Theory<S>, formula: Formula<S>) -> Result<Self> {
        formula.validate(&theory)?;
        Ok(GuardedFormula { theory, formula })
    }

    pub fn parse(text: &str, theory: &Theory<S>) -> Result<Self> {
        let mut p = Parser { text, pos: 0 };
        let formula = p.formula()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(Error::syntax(text, p.pos, "unexpected input after formula"));
        }
        Self::new(theory.clone(), formula)
    }

    pub fn theory(&self) -> &Theory<S> {
        &self.theory
    }

    pub fn formula(&self) -> &Formula<S> {
        &self.formula
    }
}

pub fn parse_formula<S: Scalar>(text: &str, theory: &Theory<S>) -> Result<GuardedFormula<S>> {
    GuardedFormula::parse(text, theory)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::syntax(self.text, self.pos, message)
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{token}'")))
        }
    }

    fn peek_ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let first = rest.chars().next()?;
        if !(first.is_alphabetic() || first == '_') {
            return None;
        }
        let end = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        Some(&rest[..end])
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek_ident() {
            Some(id) => {
                self.pos += id.len();
                Ok(id.to_string())
            }
            None => Err(self.err("expected a variable")),
        }
    }

    fn first_var(&mut self) -> Result<String> {
        let at = self.pos;
        let v = self.ident()?;
        if v.starts_with(|c: char| c.is_uppercase()) {
            return Err(Error::syntax(self.text, at, format!("'{v}' is a set variable, expected a position")));
        }
        Ok(v)
    }

    fn formula<S: Scalar>(&mut self) -> Result<Formula<S>> {
        let mut f = self.and()?;
        while self.eat("|") {
            f = f.or(self.and()?);
        }
        Ok(f)
    }

    fn and<S: Scalar>(&mut self) -> Result<Formula<S>> {
        let mut f = self.unary()?;
        while self.eat("&") {
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary<S: Scalar>(&mut self) -> Result<Formula<S>> {
        self.skip_ws();
        if self.eat("!") {
            return Ok(self.unary()?.not());
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.rest().starts_with('[') {
            let open = self.pos;
            let close = closing_bracket(self.text, open).ok_or_else(|| self.err("unclosed '['"))?;
            let p = parse_predicate_span(self.text, open + 1, close)?;
            self.pos = close + 1;
            self.expect("(")?;
            let x = self.first_var()?;
            self.expect(")")?;
            return Ok(Formula::PredAt(p, x));
        }
        let Some(word) = self.peek_ident() else {
            return Err(self.err("expected a formula"));
        };
        if word == "exists" || word == "forall" {
            return self.quantifier(word == "forall");
        }
        let at = self.pos;
        let name = self.ident()?;
        if name.starts_with(|c: char| c.is_uppercase()) {
            self.expect("(")?;
            let x = self.first_var()?;
            self.expect(")")?;
            return Ok(Formula::In(name, x));
        }
        let op = ["<=", ">=", "<", ">", "="]
            .into_iter()
            .find(|op| self.eat(op))
            .ok_or_else(|| Error::syntax(self.text, at, format!("expected a comparison after '{name}'")))?;
        let other = self.first_var()?;
        let lt = |a: &str, b: &str| Formula::Less(a.to_string(), b.to_string());
        Ok(match op {
            "<" => lt(&name, &other),
            ">" => lt(&other, &name),
            "<=" => lt(&other, &name).not(),
            ">=" => lt(&name, &other).not(),
            _ => lt(&name, &other).not().and(lt(&other, &name).not()),
        })
    }

    fn quantifier<S: Scalar>(&mut self, universal: bool) -> Result<Formula<S>> {
        let keyword_at = self.pos;
        self.ident()?;
        let var = self.ident()?;
        if !self.eat("<=") {
            return Err(Error::Fragment(format!(
                "quantifier over '{var}' at offset {keyword_at} must be guarded by '<= xe'"
            )));
        }
        let bound = self.ident()?;
        if bound != END {
            return Err(Error::Fragment(format!("quantifier over '{var}' must be bounded by '{END}', not '{bound}'")));
        }
        self.expect(".")?;
        let body = self.formula()?;
        let second = var.starts_with(|c: char| c.is_uppercase());
        let body = if universal { body.not() } else { body };
        let q = if second {
            Formula::ExistsSecond(var, Box::new(body))
        } else {
            Formula::ExistsFirst(var, Box::new(body))
        };
        Ok(if universal { q.not() } else { q })
    }
}

impl<S: Scalar> fmt::Display for Formula<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, g: &Formula<S>| match g {
            Formula::Or(..) | Formula::And(..) | Formula::ExistsFirst(..) | Formula::ExistsSecond(..) => {
                write!(f, "({g})")
            }
            _ => write!(f, "{g}"),
        };
        match self {
            Formula::PredAt(p, x) => write!(f, "[{p}]({x})"),
            Formula::Less(x, y) => write!(f, "{x} < {y}"),
            Formula::In(set, x) => write!(f, "{set}({x})"),
            Formula::Not(g) => {
                write!(f, "!")?;
                wrap(f, g)
            }
            Formula::And(a, b) => {
                match a.as_ref() {
                    Formula::Or(..) | Formula::ExistsFirst(..) | Formula::ExistsSecond(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " & ")?;
                wrap(f, b)
            }
            Formula::Or(a, b) => {
                match a.as_ref() {
                    Formula::ExistsFirst(..) | Formula::ExistsSecond(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " | ")?;
                match b.as_ref() {
                    Formula::Or(..) | Formula::ExistsFirst(..) | Formula::ExistsSecond(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            Formula::ExistsFirst(x, body) | Formula::ExistsSecond(x, body) => {
                write!(f, "exists {x} <= {END} . {body}")
            }
        }
    }
}

impl<S: Scalar> fmt::Display for GuardedFormula<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)
    }
}

#[cfg(test)]
mod tests;
