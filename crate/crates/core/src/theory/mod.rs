//! Alphabet theories: predicates over the lookback variables
//! `x_{-k} .. x_0`, their evaluation and satisfiability.

mod letter;
mod normal;
pub(crate) mod order;
mod parse;
mod predicate;

use std::fmt;
use std::marker::PhantomData;

pub use letter::{num_word, word, word_text, Letter, Symbol};
pub(crate) use normal::Cube;
pub use parse::parse_predicate_text;
pub(crate) use parse::{closing_bracket, parse_predicate_span};
pub use predicate::{Atom, CmpOp, Predicate, Term};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default ceiling on the number of cubes a DNF may reach.
pub const DEFAULT_BUDGET: usize = 1 << 16;

/// Largest finite alphabet supported by the cube solver.
pub const MAX_ALPHABET: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
}

impl Alphabet {
    pub fn new<I>(symbols: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<Symbol>,
    {
        let mut out: Vec<Symbol> = Vec::new();
        for s in symbols {
            let s = s.into();
            if out.contains(&s) {
                return Err(Error::MalformedPredicate(format!("duplicate symbol '{s}' in alphabet")));
            }
            out.push(s);
        }
        if out.is_empty() {
            return Err(Error::MalformedPredicate("empty alphabet".into()));
        }
        if out.len() > MAX_ALPHABET {
            return Err(Error::Resource(format!("alphabets are limited to {MAX_ALPHABET} symbols")));
        }
        Ok(Alphabet { symbols: out })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, s: &Symbol) -> Option<usize> {
        self.symbols.iter().position(|x| x == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TheoryKind {
    Finite(Alphabet),
    DenseOrder,
    /// Evaluation-only atoms, including `min(..)` window comparisons.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub can_decide_sat: bool,
    pub can_enumerate: bool,
    pub has_completion_property: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
    Not,
}

/// Letters bound to `x_{-k} .. x_0` plus the boolean tracks of the current
/// letter in an extended theory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LookbackValuation<S> {
    block: Vec<Letter<S>>,
    tracks: u64,
}

impl<S: Clone> LookbackValuation<S> {
    /// `v(w)(x_{-j}) = w[k-j]` for a word of length `k+1`.
    pub fn from_word(word: &[Letter<S>]) -> Self {
        LookbackValuation { block: word.to_vec(), tracks: 0 }
    }

    pub fn with_tracks(mut self, tracks: u64) -> Self {
        self.tracks = tracks;
        self
    }

    /// Value of `x_{-j}`.
    pub fn get(&self, j: usize) -> Option<&Letter<S>> {
        self.block.len().checked_sub(j + 1).map(|i| &self.block[i])
    }

    pub fn block(&self) -> &[Letter<S>] {
        &self.block
    }

    pub fn tracks(&self) -> u64 {
        self.tracks
    }
}

pub struct Theory<S> {
    kind: TheoryKind,
    lookback: usize,
    tracks: usize,
    budget: usize,
    _scalar: PhantomData<fn() -> S>,
}

impl<S> Clone for Theory<S> {
    fn clone(&self) -> Self {
        Theory {
            kind: self.kind.clone(),
            lookback: self.lookback,
            tracks: self.tracks,
            budget: self.budget,
            _scalar: PhantomData,
        }
    }
}

impl<S> fmt::Debug for Theory<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Theory")
            .field("kind", &self.kind)
            .field("lookback", &self.lookback)
            .field("tracks", &self.tracks)
            .finish()
    }
}

/// Theories are equal when they accept the same atoms; the DNF budget is a
/// tuning knob and does not take part.
impl<S> PartialEq for Theory<S> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.lookback == other.lookback && self.tracks == other.tracks
    }
}

impl<S> Eq for Theory<S> {}

impl<S> Theory<S> {
    fn with_kind(kind: TheoryKind, lookback: usize) -> Self {
        Theory { kind, lookback, tracks: 0, budget: DEFAULT_BUDGET, _scalar: PhantomData }
    }

    pub fn finite(alphabet: Alphabet, lookback: usize) -> Self {
        Self::with_kind(TheoryKind::Finite(alphabet), lookback)
    }

    pub fn dense_order(lookback: usize) -> Self {
        Self::with_kind(TheoryKind::DenseOrder, lookback)
    }

    pub fn custom(lookback: usize) -> Self {
        Self::with_kind(TheoryKind::Custom, lookback)
    }

    pub fn kind(&self) -> &TheoryKind {
        &self.kind
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn tracks(&self) -> usize {
        self.tracks
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// The same theory extended with `tracks` boolean variables attached to
    /// the current letter.
    pub fn with_tracks(&self, tracks: usize) -> Self {
        let mut t = self.clone();
        t.tracks = tracks;
        t
    }

    pub fn alphabet(&self) -> Option<&Alphabet> {
        match &self.kind {
            TheoryKind::Finite(a) => Some(a),
            _ => None,
        }
    }

    pub fn capabilities(&self) -> Capabilities {
        match self.kind {
            TheoryKind::Finite(_) => Capabilities {
                can_decide_sat: true,
                can_enumerate: true,
                has_completion_property: true,
            },
            TheoryKind::DenseOrder => Capabilities {
                can_decide_sat: true,
                can_enumerate: false,
                has_completion_property: true,
            },
            TheoryKind::Custom => Capabilities {
                can_decide_sat: false,
                can_enumerate: false,
                has_completion_property: false,
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self.kind, TheoryKind::Finite(_))
    }

    pub(crate) fn require_sat(&self, what: &str) -> Result<()> {
        if self.capabilities().can_decide_sat {
            Ok(())
        } else {
            Err(Error::CapabilityMissing(format!("{what} needs a theory with decidable satisfiability")))
        }
    }

    pub(crate) fn same_as(&self, other: &Self, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::TheoryMismatch(format!(
                "{what}: {:?}/k={} vs {:?}/k={}",
                self.kind, self.lookback, other.kind, other.lookback
            )))
        }
    }
}

impl<S: Scalar> Theory<S> {
    /// Each letter of a finite alphabet exactly once, in declaration order.
    pub fn enumerate_letters(&self) -> Result<Vec<Letter<S>>> {
        match &self.kind {
            TheoryKind::Finite(a) => Ok(a.symbols.iter().cloned().map(Letter::Sym).collect()),
            _ => Err(Error::CapabilityMissing("letters of an infinite domain cannot be enumerated".into())),
        }
    }

    /// Every word over the alphabet of length at most `max_len`, shortest
    /// first.
    pub fn words_up_to(&self, max_len: usize) -> Result<Vec<Vec<Letter<S>>>> {
        let letters = self.enumerate_letters()?;
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            layer = layer
                .iter()
                .flat_map(|w: &Vec<Letter<S>>| {
                    letters.iter().map(move |l| {
                        let mut w = w.clone();
                        w.push(l.clone());
                        w
                    })
                })
                .collect();
            out.extend(layer.iter().cloned());
        }
        Ok(out)
    }

    pub fn check_letter(&self, letter: &Letter<S>) -> Result<()> {
        match (&self.kind, letter) {
            (TheoryKind::Finite(a), Letter::Sym(s)) if a.index_of(s).is_some() => Ok(()),
            (TheoryKind::DenseOrder, Letter::Num(_)) => Ok(()),
            (TheoryKind::Custom, _) => Ok(()),
            _ => Err(Error::InputType(format!("'{letter}' is not a letter of this theory"))),
        }
    }

    fn check_atom(&self, atom: &Atom<S>) -> Result<()> {
        if let Some(j) = atom.max_var() {
            if j > self.lookback {
                return Err(Error::MalformedPredicate(format!(
                    "x-{j} is outside the lookback window x-{}..x0 in '{atom}'",
                    self.lookback
                )));
            }
        }
        let ok = match (&self.kind, atom) {
            (_, Atom::Track(t)) => *t < self.tracks,
            (TheoryKind::Finite(a), Atom::Member { set, .. }) => {
                if let Some(s) = set.iter().find(|s| a.index_of(s).is_none()) {
                    return Err(Error::MalformedPredicate(format!("symbol '{s}' is not in the alphabet")));
                }
                true
            }
            (TheoryKind::Finite(_), Atom::Cmp { lhs: Term::Var(_), op, rhs: Term::Var(_) }) => !op.is_order(),
            (TheoryKind::Finite(_), Atom::Cmp { .. }) => false,
            (TheoryKind::DenseOrder, Atom::Member { .. }) => false,
            (TheoryKind::DenseOrder, Atom::Cmp { lhs, rhs, .. }) => {
                !matches!(lhs, Term::Min { .. }) && !matches!(rhs, Term::Min { .. })
            }
            (TheoryKind::Custom, _) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedPredicate(format!("atom '{atom}' is not supported by this theory")))
        }
    }

    /// Checks that every atom belongs to the theory and stays inside the
    /// lookback window.
    pub fn validate(&self, p: &Predicate<S>) -> Result<()> {
        let mut atoms = Vec::new();
        p.atoms(&mut atoms);
        atoms.into_iter().try_for_each(|a| self.check_atom(a))
    }

    /// Parses predicate text and validates it against the theory.
    pub fn parse(&self, text: &str) -> Result<Predicate<S>> {
        let p = parse_predicate_text(text)?;
        self.validate(&p)?;
        Ok(p)
    }

    pub fn eval(&self, p: &Predicate<S>, v: &LookbackValuation<S>) -> Result<bool> {
        if v.block.len() != self.lookback + 1 {
            return Err(Error::MalformedPredicate(format!(
                "valuation binds {} variables, the theory has {}",
                v.block.len(),
                self.lookback + 1
            )));
        }
        self.validate(p)?;
        v.block.iter().try_for_each(|l| self.check_letter(l))?;
        Ok(p.eval_block(&v.block, v.tracks))
    }

    /// Decides satisfiability, returning a witness valuation when satisfiable.
    pub fn is_satisfiable(&self, p: &Predicate<S>) -> Result<(bool, Option<LookbackValuation<S>>)> {
        self.require_sat("satisfiability checking")?;
        self.validate(p)?;
        for cube in self.dnf(p)? {
            if let Some((_, Some((block, tracks)))) = self.solve_cube(cube) {
                return Ok((true, Some(LookbackValuation { block, tracks })));
            }
        }
        Ok((false, None))
    }

    /// Satisfiability without a witness, for sat-capable theories.
    pub fn sat(&self, p: &Predicate<S>) -> Result<bool> {
        self.require_sat("satisfiability checking")?;
        Ok(!self.dnf(p)?.is_empty())
    }

    /// Sound but possibly incomplete unsatisfiability test that works for
    /// every theory: exact for decidable ones, propositional for custom ones.
    pub fn definitely_unsat(&self, p: &Predicate<S>) -> Result<bool> {
        Ok(self.dnf(p)?.is_empty())
    }

    /// Equivalent predicate in simplified disjunctive normal form; `False`
    /// when unsatisfiable for decidable theories.
    pub fn simplify(&self, p: &Predicate<S>) -> Result<Predicate<S>> {
        Ok(Self::dnf_to_predicate(&self.dnf(p)?))
    }

    pub fn combine(&self, op: BoolOp, args: Vec<Predicate<S>>) -> Result<Predicate<S>> {
        for a in &args {
            self.validate(a).map_err(|e| Error::TheoryMismatch(e.to_string()))?;
        }
        match (op, args.len()) {
            (BoolOp::Not, 1) => Ok(args.into_iter().next().unwrap().negate()),
            (BoolOp::And, n) if n >= 1 => Ok(Predicate::all(args)),
            (BoolOp::Or, n) if n >= 1 => Ok(Predicate::any(args)),
            (op, n) => Err(Error::MalformedPredicate(format!("{op:?} does not take {n} arguments"))),
        }
    }
}

#[cfg(test)]
mod tests;
