use std::collections::BTreeSet;
use std::fmt;

use super::letter::{Letter, Symbol};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator that holds for `(rhs, lhs)` whenever `self` holds for
    /// `(lhs, rhs)`.
    pub fn flip(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn is_order(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub(crate) fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Operand of a comparison atom. Lookback variable `x_{-j}` is `Var(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term<S> {
    Var(usize),
    Const(S),
    /// Minimum of the numeric letters `x_{-from} .. x_{-to}` (`from >= to`).
    /// Only custom (evaluation-only) theories accept it.
    Min { from: usize, to: usize },
}

impl<S> Term<S> {
    pub(crate) fn max_var(&self) -> Option<usize> {
        match self {
            Term::Var(j) => Some(*j),
            Term::Const(_) => None,
            Term::Min { from, .. } => Some(*from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom<S> {
    /// `x_{-var} in {..}`
    Member { var: usize, set: BTreeSet<Symbol> },
    Cmp { lhs: Term<S>, op: CmpOp, rhs: Term<S> },
    /// Boolean track of an extended theory, read at the current position.
    Track(usize),
}

impl<S> Atom<S> {
    pub(crate) fn max_var(&self) -> Option<usize> {
        match self {
            Atom::Member { var, .. } => Some(*var),
            Atom::Cmp { lhs, rhs, .. } => match (lhs.max_var(), rhs.max_var()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            Atom::Track(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate<S> {
    True,
    False,
    Atom(Atom<S>),
    Not(Box<Predicate<S>>),
    And(Vec<Predicate<S>>),
    Or(Vec<Predicate<S>>),
}

impl<S: Clone> Predicate<S> {
    pub fn atom(atom: Atom<S>) -> Self {
        Predicate::Atom(atom)
    }

    pub fn member<I>(var: usize, symbols: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<Symbol>,
    {
        Predicate::Atom(Atom::Member {
            var,
            set: symbols.into_iter().map(Into::into).collect(),
        })
    }

    pub fn cmp(lhs: Term<S>, op: CmpOp, rhs: Term<S>) -> Self {
        Predicate::Atom(Atom::Cmp { lhs, op, rhs })
    }

    pub fn track(index: usize) -> Self {
        Predicate::Atom(Atom::Track(index))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Predicate::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Predicate::False)
    }

    /// Negation with constant folding and double-negation removal.
    pub fn negate(self) -> Self {
        match self {
            Predicate::True => Predicate::False,
            Predicate::False => Predicate::True,
            Predicate::Not(inner) => *inner,
            other => Predicate::Not(Box::new(other)),
        }
    }

    /// Conjunction with constant folding and flattening.
    pub fn and(self, other: Self) -> Self {
        Self::all([self, other])
    }

    pub fn or(self, other: Self) -> Self {
        Self::any([self, other])
    }

    pub fn all(parts: impl IntoIterator<Item = Self>) -> Self {
        let mut out = Vec::new();
        for part in parts {
            match part {
                Predicate::True => {}
                Predicate::False => return Predicate::False,
                Predicate::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Predicate::True,
            1 => out.pop().unwrap(),
            _ => Predicate::And(out),
        }
    }

    pub fn any(parts: impl IntoIterator<Item = Self>) -> Self {
        let mut out = Vec::new();
        for part in parts {
            match part {
                Predicate::False => {}
                Predicate::True => return Predicate::True,
                Predicate::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Predicate::False,
            1 => out.pop().unwrap(),
            _ => Predicate::Or(out),
        }
    }

    pub(crate) fn atoms<'a>(&'a self, out: &mut Vec<&'a Atom<S>>) {
        match self {
            Predicate::True | Predicate::False => {}
            Predicate::Atom(a) => out.push(a),
            Predicate::Not(p) => p.atoms(out),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.atoms(out)),
        }
    }

    pub fn atom_count(&self) -> usize {
        let mut atoms = Vec::new();
        self.atoms(&mut atoms);
        atoms.len()
    }

    pub fn mentions_track(&self, track: usize) -> bool {
        let mut atoms = Vec::new();
        self.atoms(&mut atoms);
        atoms.iter().any(|a| matches!(a, Atom::Track(t) if *t == track))
    }

    /// Replaces every occurrence of track `index` by a constant.
    pub fn assign_track(&self, index: usize, value: bool) -> Self {
        match self {
            Predicate::Atom(Atom::Track(t)) if *t == index => {
                if value {
                    Predicate::True
                } else {
                    Predicate::False
                }
            }
            Predicate::True | Predicate::False | Predicate::Atom(_) => self.clone(),
            Predicate::Not(p) => p.assign_track(index, value).negate(),
            Predicate::And(ps) => Self::all(ps.iter().map(|p| p.assign_track(index, value))),
            Predicate::Or(ps) => Self::any(ps.iter().map(|p| p.assign_track(index, value))),
        }
    }

    /// Renames every lookback variable `x_{-j}` to `x_{-(j+by)}`, placing
    /// the predicate `by` positions earlier inside a longer block.
    pub fn shift_vars(&self, by: usize) -> Self {
        let term = |t: &Term<S>| match t {
            Term::Var(j) => Term::Var(j + by),
            Term::Const(c) => Term::Const(c.clone()),
            Term::Min { from, to } => Term::Min { from: from + by, to: to + by },
        };
        match self {
            Predicate::True | Predicate::False | Predicate::Atom(Atom::Track(_)) => self.clone(),
            Predicate::Atom(Atom::Member { var, set }) => {
                Predicate::Atom(Atom::Member { var: var + by, set: set.clone() })
            }
            Predicate::Atom(Atom::Cmp { lhs, op, rhs }) => {
                Predicate::Atom(Atom::Cmp { lhs: term(lhs), op: *op, rhs: term(rhs) })
            }
            Predicate::Not(p) => Predicate::Not(Box::new(p.shift_vars(by))),
            Predicate::And(ps) => Predicate::And(ps.iter().map(|p| p.shift_vars(by)).collect()),
            Predicate::Or(ps) => Predicate::Or(ps.iter().map(|p| p.shift_vars(by)).collect()),
        }
    }

    /// Existentially erases a track: `g[t:=1] || g[t:=0]`.
    pub fn project_track(&self, index: usize) -> Self {
        if !self.mentions_track(index) {
            return self.clone();
        }
        self.assign_track(index, true).or(self.assign_track(index, false))
    }
}

impl<S: Scalar> Predicate<S> {
    /// Evaluates against a block of `k+1` letters (`block[k-j]` is `x_{-j}`)
    /// whose current letter carries the given track bits. Variables are
    /// assumed in range; use [`super::Theory::eval`] for checked evaluation.
    pub fn eval_block(&self, block: &[Letter<S>], tracks: u64) -> bool {
        match self {
            Predicate::True => true,
            Predicate::False => false,
            Predicate::Atom(a) => eval_atom(a, block, tracks),
            Predicate::Not(p) => !p.eval_block(block, tracks),
            Predicate::And(ps) => ps.iter().all(|p| p.eval_block(block, tracks)),
            Predicate::Or(ps) => ps.iter().any(|p| p.eval_block(block, tracks)),
        }
    }
}

fn lookup<S>(block: &[Letter<S>], j: usize) -> &Letter<S> {
    &block[block.len() - 1 - j]
}

enum Value<'a, S> {
    Letter(&'a Letter<S>),
    Num(S),
    Missing,
}

fn eval_term<'a, S: Scalar>(term: &'a Term<S>, block: &'a [Letter<S>]) -> Value<'a, S> {
    match term {
        Term::Var(j) => Value::Letter(lookup(block, *j)),
        Term::Const(c) => Value::Num(c.clone()),
        Term::Min { from, to } => {
            let mut best: Option<&S> = None;
            for j in (*to..=*from).rev() {
                match lookup(block, j) {
                    Letter::Num(v) => {
                        if best.is_none_or(|b| v < b) {
                            best = Some(v);
                        }
                    }
                    Letter::Sym(_) => return Value::Missing,
                }
            }
            best.cloned().map_or(Value::Missing, Value::Num)
        }
    }
}

fn eval_atom<S: Scalar>(atom: &Atom<S>, block: &[Letter<S>], tracks: u64) -> bool {
    match atom {
        Atom::Member { var, set } => match lookup(block, *var) {
            Letter::Sym(s) => set.contains(s),
            Letter::Num(_) => false,
        },
        Atom::Track(t) => *t < 64 && tracks >> t & 1 == 1,
        Atom::Cmp { lhs, op, rhs } => {
            let l = eval_term(lhs, block);
            let r = eval_term(rhs, block);
            let ord = match (&l, &r) {
                (Value::Letter(Letter::Sym(a)), Value::Letter(Letter::Sym(b))) => a.cmp(b),
                (Value::Letter(Letter::Num(a)), Value::Letter(Letter::Num(b))) => a.cmp(b),
                (Value::Letter(Letter::Num(a)), Value::Num(b)) => a.cmp(b),
                (Value::Num(a), Value::Letter(Letter::Num(b))) => a.cmp(b),
                (Value::Num(a), Value::Num(b)) => a.cmp(b),
                // Incomparable operands only satisfy disequality.
                _ => return *op == CmpOp::Ne,
            };
            op.holds(ord)
        }
    }
}

fn fmt_var(f: &mut fmt::Formatter<'_>, j: usize) -> fmt::Result {
    if j == 0 {
        write!(f, "x0")
    } else {
        write!(f, "x-{j}")
    }
}

impl<S: Scalar> fmt::Display for Term<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(j) => fmt_var(f, *j),
            Term::Const(c) => write!(f, "{}", c.to_exact_string()),
            Term::Min { from, to } => {
                write!(f, "min(")?;
                fmt_var(f, *from)?;
                write!(f, ",")?;
                fmt_var(f, *to)?;
                write!(f, ")")
            }
        }
    }
}

impl<S: Scalar> fmt::Display for Atom<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Member { var, set } => {
                fmt_var(f, *var)?;
                write!(f, " in{{")?;
                for (i, s) in set.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", s.quoted())?;
                }
                write!(f, "}}")
            }
            Atom::Cmp { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Atom::Track(t) => write!(f, "@{t}"),
        }
    }
}

impl<S: Scalar> fmt::Display for Predicate<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::True => write!(f, "true"),
            Predicate::False => write!(f, "false"),
            Predicate::Atom(a) => write!(f, "{a}"),
            Predicate::Not(p) => match p.as_ref() {
                Predicate::And(_) | Predicate::Or(_) => write!(f, "!({p})"),
                Predicate::Atom(Atom::Cmp { .. }) | Predicate::Atom(Atom::Member { .. }) => {
                    write!(f, "!({p})")
                }
                _ => write!(f, "!{p}"),
            },
            Predicate::And(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, " && ")?;
                    }
                    match p {
                        Predicate::And(_) | Predicate::Or(_) => write!(f, "({p})")?,
                        _ => write!(f, "{p}")?,
                    }
                }
                Ok(())
            }
            Predicate::Or(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, " || ")?;
                    }
                    match p {
                        Predicate::Or(_) => write!(f, "({p})")?,
                        _ => write!(f, "{p}")?,
                    }
                }
                Ok(())
            }
        }
    }
}
