//! Compilation of guarded formulas into window expressions.
//!
//! Variables become tracks of an extended theory: `xb` is track 0, `xe`
//! track 1 and every binder gets a track of its own. A formula is compiled
//! bottom-up into an automaton over the extended letters, first-order
//! tracks being constrained to singletons where the variable is bound.
//! The resulting automaton is then split at the transitions carrying the
//! `xb` and `xe` marks.

use std::collections::BTreeSet;

use super::{Formula, GuardedFormula, WindowExpression, WindowPair, BEGIN, END};
use crate::error::{Error, Result};
use crate::ksla::Ksla;
use crate::scalar::Scalar;
use crate::theory::{Predicate, Theory};

const B: usize = 0;
const E: usize = 1;
const MAX_TRACKS: usize = 64;
/// Intermediate automata branch on every track, so they get a far higher
/// ceiling than user automata.
const COMPILE_OUT_DEGREE: usize = 1 << 12;

fn binders<S>(f: &Formula<S>) -> usize {
    match f {
        Formula::PredAt(..) | Formula::Less(..) | Formula::In(..) => 0,
        Formula::Not(g) => binders(g),
        Formula::And(a, b) | Formula::Or(a, b) => binders(a) + binders(b),
        Formula::ExistsFirst(_, g) | Formula::ExistsSecond(_, g) => 1 + binders(g),
    }
}

fn on<S: Scalar>(t: usize) -> Predicate<S> {
    Predicate::track(t)
}

fn off<S: Scalar>(t: usize) -> Predicate<S> {
    Predicate::track(t).negate()
}

struct Compiler<'a, S> {
    theory: Theory<S>,
    next_track: usize,
    first: Vec<(&'a str, usize)>,
    second: Vec<(&'a str, usize)>,
}

impl<'a, S: Scalar> Compiler<'a, S> {
    fn tidy(&self, a: Ksla<S>) -> Result<Ksla<S>> {
        Ok(a.determinize_with(COMPILE_OUT_DEGREE)?.trim())
    }

    fn build(&self, states: usize, finals: &[usize], edges: Vec<(usize, usize, Predicate<S>)>) -> Result<Ksla<S>> {
        let mut a = Ksla::new(self.theory.clone(), states, 0);
        for &f in finals {
            a.set_final(f, true);
        }
        for (from, to, g) in edges {
            a.add_transition(from, to, g)?;
        }
        a.certify_deterministic()?;
        Ok(a)
    }

    /// Track `t` is set at exactly one position.
    fn singleton(&self, t: usize) -> Result<Ksla<S>> {
        self.build(2, &[1], vec![(0, 0, off(t)), (0, 1, on(t)), (1, 1, off(t))])
    }

    /// The single mark on `t` is read by a block satisfying `g`.
    fn marked(&self, t: usize, g: Predicate<S>) -> Result<Ksla<S>> {
        self.build(2, &[1], vec![(0, 0, off(t)), (0, 1, on(t).and(g)), (1, 1, off(t))])
    }

    fn less(&self, x: usize, y: usize) -> Result<Ksla<S>> {
        if x == y {
            return Ok(Ksla::empty(self.theory.clone()));
        }
        let none = off(x).and(off(y));
        self.build(
            3,
            &[2],
            vec![
                (0, 0, none.clone()),
                (0, 1, on(x).and(off(y))),
                (1, 1, none.clone()),
                (1, 2, off(x).and(on(y))),
                (2, 2, none),
            ],
        )
    }

    /// The mark on `x` is at or before the mark on `xe`.
    fn at_most_end(&self, x: usize) -> Result<Ksla<S>> {
        if x == E {
            return self.singleton(E);
        }
        let none = off(x).and(off(E));
        self.build(
            3,
            &[2],
            vec![
                (0, 0, none.clone()),
                (0, 1, on(x).and(off(E))),
                (0, 2, on(x).and(on(E))),
                (1, 1, none.clone()),
                (1, 2, off(x).and(on(E))),
                (2, 2, none),
            ],
        )
    }

    /// Set track `set` is only marked at or before the mark on `xe`.
    fn subset_of_prefix(&self, set: usize) -> Result<Ksla<S>> {
        self.build(2, &[1], vec![(0, 0, off(E)), (0, 1, on(E)), (1, 1, off(set).and(off(E)))])
    }

    fn lookup(&self, name: &str) -> usize {
        match name {
            BEGIN => B,
            END => E,
            _ => self.first.iter().rev().find(|(n, _)| *n == name).expect("scope checked").1,
        }
    }

    fn lookup_set(&self, name: &str) -> usize {
        self.second.iter().rev().find(|(n, _)| *n == name).expect("scope checked").1
    }

    fn fresh(&mut self) -> usize {
        let t = self.next_track;
        self.next_track += 1;
        t
    }

    fn compile(&mut self, f: &'a Formula<S>) -> Result<Ksla<S>> {
        match f {
            Formula::PredAt(p, x) => self.marked(self.lookup(x), p.clone()),
            Formula::Less(x, y) => self.less(self.lookup(x), self.lookup(y)),
            Formula::In(set, x) => {
                let (s, t) = (self.lookup_set(set), self.lookup(x));
                self.build(2, &[1], vec![(0, 0, off(t)), (0, 1, on(t).and(on(s))), (1, 1, off(t))])
            }
            Formula::Not(g) => Ok(self.compile(g)?.complement()?.trim()),
            Formula::And(a, b) => {
                let (a, b) = (self.compile(a)?, self.compile(b)?);
                Ok(a.product_intersect(&b)?.trim())
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.compile(a)?, self.compile(b)?);
                self.tidy(a.union(&b)?)
            }
            Formula::ExistsFirst(x, body) => {
                let t = self.fresh();
                self.first.push((x, t));
                let inner = self.compile(body);
                self.first.pop();
                let a = inner?
                    .product_intersect(&self.singleton(t)?)?
                    .product_intersect(&self.at_most_end(t)?)?;
                self.tidy(a.project_track(t)?)
            }
            Formula::ExistsSecond(set, body) => {
                let t = self.fresh();
                self.second.push((set, t));
                let inner = self.compile(body);
                self.second.pop();
                let a = inner?.product_intersect(&self.subset_of_prefix(t)?)?;
                self.tidy(a.project_track(t)?)
            }
        }
    }
}

/// Deterministic automaton over the theory extended with the `xb` (track 0)
/// and `xe` (track 1) marks, accepting a marked prefix `w[..=i_e]` iff the
/// formula holds for the window `(i_b, i_e)`.
pub(crate) fn marked_automaton<S: Scalar>(formula: &GuardedFormula<S>) -> Result<Ksla<S>> {
    let base = formula.theory();
    if base.tracks() != 0 {
        return Err(Error::Precondition("formulas are compiled over untracked theories".into()));
    }
    base.require_sat("formula compilation")?;
    let tracks = 2 + binders(formula.formula());
    if tracks > MAX_TRACKS {
        return Err(Error::Resource(format!("formula needs {tracks} tracks, at most {MAX_TRACKS} are supported")));
    }
    let mut c = Compiler { theory: base.with_tracks(tracks), next_track: 2, first: Vec::new(), second: Vec::new() };
    let body = c.compile(formula.formula())?;
    let frame = c
        .singleton(B)?
        .product_intersect(&c.at_most_end(B)?)?
        .product_intersect(&c.singleton(E)?)?;
    c.tidy(frame.product_intersect(&body)?)
}

fn restrict<S: Scalar>(g: &Predicate<S>, b: bool, e: bool) -> Predicate<S> {
    g.assign_track(B, b).assign_track(E, e)
}

fn finish<S: Scalar>(a: Ksla<S>, base: &Theory<S>) -> Result<Option<Ksla<S>>> {
    let a = a.with_theory(base.clone())?.determinize_with(COMPILE_OUT_DEGREE)?.trim();
    let reachable = a.reachable_states();
    Ok(reachable.iter().any(|&q| a.is_final(q)).then_some(a))
}

/// Splits the marked automaton into one pair per state `q` that has a
/// transition able to read the `xb` mark: the prefix automaton runs the
/// unmarked part up to `q`, the window automaton starts with the marked
/// transitions out of `q` and ends with a transition reading `xe`.
pub(crate) fn compile_pairs<S: Scalar>(formula: &GuardedFormula<S>) -> Result<WindowExpression<S>> {
    let base = formula.theory().clone();
    let m = marked_automaton(formula)?;
    let n = m.num_states();
    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    for q in 0..n {
        if m.transitions(q).is_empty() {
            continue;
        }
        let mut prefix = Ksla::new(m.theory().clone(), n, m.initial());
        prefix.set_final(q, true);
        for r in 0..n {
            for (t, g) in m.transitions(r) {
                let g = restrict(g, false, false);
                if !g.is_false() {
                    prefix.add_transition(r, *t, g)?;
                }
            }
        }
        let Some(prefix) = finish(prefix, &base)? else { continue };

        let (start, end) = (n, n + 1);
        let mut window = Ksla::new(m.theory().clone(), n + 2, start);
        window.set_final(end, true);
        let mut add = |from: usize, to: usize, g: Predicate<S>| -> Result<()> {
            if g.is_false() {
                Ok(())
            } else {
                window.add_transition(from, to, g)
            }
        };
        for (t, g) in m.transitions(q) {
            add(start, *t, restrict(g, true, false))?;
            if m.is_final(*t) {
                add(start, end, restrict(g, true, true))?;
            }
        }
        for r in 0..n {
            for (t, g) in m.transitions(r) {
                add(r, *t, restrict(g, false, false))?;
                if m.is_final(*t) {
                    add(r, end, restrict(g, false, true))?;
                }
            }
        }
        let Some(window) = finish(window, &base)? else { continue };
        let key = (prefix.to_json_string(), window.to_json_string());
        if seen.insert(key) {
            pairs.push(WindowPair { prefix, window });
        }
    }
    WindowExpression::new(base, pairs)
}

impl<S: Scalar> GuardedFormula<S> {
    /// Compiles the formula into an equivalent window expression.
    pub fn compile(&self) -> Result<WindowExpression<S>> {
        compile_pairs(self)
    }

    /// The automaton over marked words that the window expression is
    /// split from; track 0 marks `xb` and track 1 marks `xe`.
    pub fn marked_automaton(&self) -> Result<Ksla<S>> {
        marked_automaton(self)
    }
}

pub fn compile_formula_to_pairs<S: Scalar>(formula: &GuardedFormula<S>) -> Result<WindowExpression<S>> {
    compile_pairs(formula)
}
