//! Bounded-memory analysis of window expressions on streams conforming to
//! an input specifier.
//!
//! A pair `(PA, WA)` needs unbounded memory on conforming streams iff there
//! are words `w1, w2, w3` and a live window state `q` such that `S` and
//! `PA` loop on `w2` and `w3` at an accepting state reached by `w1`, `WA`
//! reaches `q` from its initial state on `w2` and loops at `q` on `w2` and
//! `w3`, and all three runs take the same transitions on the first `k`
//! letters of `w2` and of `w3`.

mod finite;
mod simulate;
mod symbolic;

use serde_json::{json, Value};

pub use finite::{check_bounded_finite, exact_bounds};
pub use simulate::{simulate_max_usage, SimulationReport};
pub use symbolic::check_bounded_symbolic;

use crate::error::{Error, Result};
use crate::ksla::Ksla;
use crate::scalar::Scalar;
use crate::sre::{Sre, SreNode};
use crate::theory::{Letter, Predicate, Theory};

/// A deterministic automaton whose final states are closed under
/// predecessors: once a stream leaves the accepting zone it never returns.
/// A stream conforms while its run stays in the accepting zone.
#[derive(Debug, Clone)]
pub struct InputSpecifier<S> {
    automaton: Ksla<S>,
}

impl<S: Scalar> InputSpecifier<S> {
    /// Accepts every stream.
    pub fn universal(theory: Theory<S>) -> Self {
        InputSpecifier { automaton: Ksla::universal(theory) }
    }

    pub fn automaton(&self) -> &Ksla<S> {
        &self.automaton
    }

    pub fn theory(&self) -> &Theory<S> {
        self.automaton.theory()
    }

    /// Whether every prefix of `w` stays in the accepting zone.
    pub fn conforms(&self, w: &[Letter<S>]) -> bool {
        let a = &self.automaton;
        let k = a.lookback();
        let mut q = a.initial();
        if !a.is_final(q) {
            return false;
        }
        for i in k..w.len() {
            match a.step(q, &w[i - k..=i], 0) {
                Some(r) if a.is_final(r) => q = r,
                _ => return false,
            }
        }
        true
    }
}

/// Specifier rejecting every stream that has a factor in the language of
/// `forbidden`: the stream leaves the accepting zone as soon as such a
/// factor has been read.
pub fn avoiding_factor<S: Scalar>(forbidden: &Sre<S>) -> Result<InputSpecifier<S>> {
    let theory = forbidden.theory().clone();
    let anything = Sre::new(theory.clone(), SreNode::pred(Predicate::True).star())?;
    let suffix = Sre::new(theory.clone(), anything.node().clone().concat(forbidden.node().clone()))?;
    let seen = suffix.compile()?.determinize()?.complete()?;
    let trap = seen.num_states();
    let mut out = Ksla::new(theory, trap + 1, seen.initial());
    out.add_transition(trap, trap, Predicate::True)?;
    for q in 0..trap {
        if seen.is_final(q) {
            out.add_transition(q, trap, Predicate::True)?;
            continue;
        }
        out.set_final(q, true);
        for (t, g) in seen.transitions(q) {
            out.add_transition(q, *t, g.clone())?;
        }
    }
    validate_input_specifier(&out.trim_unreachable())
}

/// Checks the zone structure: no satisfiable transition leads from a
/// non-final state to a final one, which makes finals closed under
/// predecessors and the rejecting zone absorbing.
pub fn validate_input_specifier<S: Scalar>(a: &Ksla<S>) -> Result<InputSpecifier<S>> {
    let mut a = a.clone();
    if !a.certify_deterministic()? {
        return Err(Error::Precondition("an input specifier must be deterministic".into()));
    }
    let can_check = a.theory().capabilities().can_decide_sat;
    for q in 0..a.num_states() {
        if a.is_final(q) {
            continue;
        }
        for (t, g) in a.transitions(q) {
            if !a.is_final(*t) {
                continue;
            }
            let satisfiable = if can_check { a.theory().sat(g)? } else { !a.theory().definitely_unsat(g)? };
            if satisfiable {
                return Err(Error::ZoneViolation(format!(
                    "transition q{q} -> q{t} [{g}] leaves the rejecting zone for an accepting state"
                )));
            }
        }
    }
    Ok(InputSpecifier { automaton: a })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness<S> {
    pub w1: Vec<Letter<S>>,
    pub w2: Vec<Letter<S>>,
    pub w3: Vec<Letter<S>>,
    /// The window automaton state that keeps accumulating starts.
    pub state: usize,
}

/// Largest number of simultaneously tracked starts and of live panes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub indices: usize,
    pub panes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<S> {
    /// The bounds are omitted when the exact computation gave up.
    Bounded(Option<Bounds>),
    Unbounded(Witness<S>),
    Unknown(String),
}

fn word_json<S: Scalar>(w: &[Letter<S>]) -> Value {
    Value::Array(w.iter().map(Letter::to_json).collect())
}

impl<S: Scalar> Verdict<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Bounded(_) => "bounded",
            Verdict::Unbounded(_) => "unbounded",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut out = json!({ "verdict": self.name() });
        match self {
            Verdict::Bounded(Some(b)) => {
                out["bounds"] = json!({ "indices": b.indices, "panes": b.panes });
            }
            Verdict::Bounded(None) => {
                out["reason"] = json!("bounds exceed the exploration limit");
            }
            Verdict::Unbounded(w) => {
                out["witness"] = json!({
                    "w1": word_json(&w.w1),
                    "w2": word_json(&w.w2),
                    "w3": word_json(&w.w3),
                    "state": format!("q{}", w.state),
                });
            }
            Verdict::Unknown(reason) => out["reason"] = json!(reason),
        }
        out
    }
}

/// States after each prefix `w[..i]`, `i` from `from` to `w.len()`, of a
/// deterministic run that is in state `q` after `w[..from]`.
fn trace<S: Scalar>(a: &Ksla<S>, q: usize, w: &[Letter<S>], from: usize) -> Option<Vec<usize>> {
    let k = a.lookback();
    let mut states = vec![q];
    let mut cur = q;
    for i in from.max(k)..w.len() {
        cur = a.step(cur, &w[i - k..=i], 0)?;
        states.push(cur);
    }
    Some(states)
}

/// Transitions taken on the first `k` letters after `at` (as state pairs).
fn first_moves(states: &[usize], at: usize, k: usize, len: usize) -> Vec<(usize, usize)> {
    (at..at + k.min(len)).map(|i| (states[i], states[i + 1])).collect()
}

/// Checks the five unboundedness conditions by running the automata.
pub fn verify_witness<S: Scalar>(
    pa: &Ksla<S>,
    wa: &Ksla<S>,
    spec: &Ksla<S>,
    w1: &[Letter<S>],
    w2: &[Letter<S>],
    w3: &[Letter<S>],
    q: usize,
) -> bool {
    let k = wa.lookback();
    let theory = wa.theory();
    if pa.lookback() != k || spec.lookback() != k || w1.len() < k || w2.is_empty() || w3.is_empty() {
        return false;
    }
    if q >= wa.num_states() || w1.iter().chain(w2).chain(w3).any(|l| theory.check_letter(l).is_err()) {
        return false;
    }
    if wa.dead_states().contains(&q) {
        return false;
    }
    let whole: Vec<Letter<S>> = w1.iter().chain(w2).chain(w3).cloned().collect();
    let (m, n) = (w1.len() - k, w1.len() + w2.len() - k);
    let looping = |a: &Ksla<S>| -> Option<Vec<usize>> {
        let st = trace(a, a.initial(), &whole, k)?;
        let s = st[m];
        (a.is_final(s) && st[n] == s && st[st.len() - 1] == s).then_some(st)
    };
    let (Some(s_run), Some(p_run)) = (looping(spec), looping(pa)) else {
        return false;
    };

    let tail = &w1[w1.len() - k..];
    let seeded: Vec<Letter<S>> = tail.iter().chain(w2).chain(w3).cloned().collect();
    let mid = k + w2.len();
    let Some(from_init) = trace(wa, wa.initial(), &seeded[..mid], k) else {
        return false;
    };
    let Some(q_run) = trace(wa, q, &seeded, k) else {
        return false;
    };
    if from_init[w2.len()] != q || q_run[w2.len()] != q || q_run[q_run.len() - 1] != q {
        return false;
    }
    let same_start = |run: &[usize], a: usize, b: usize| {
        first_moves(run, a, k, w2.len()) == first_moves(run, b, k, w3.len())
    };
    same_start(&s_run, m, n) && same_start(&p_run, m, n) && same_start(&q_run, 0, w2.len())
}

/// Window states from which no final state is reachable.
fn live_states<S: Scalar>(wa: &Ksla<S>) -> Vec<usize> {
    let dead = wa.dead_states();
    (0..wa.num_states()).filter(|q| !dead.contains(q)).collect()
}

fn check_inputs<S: Scalar>(pa: &Ksla<S>, wa: &Ksla<S>, spec: &InputSpecifier<S>) -> Result<()> {
    pa.theory().same_as(wa.theory(), "boundedness check")?;
    pa.theory().same_as(spec.theory(), "boundedness check")?;
    if !pa.is_deterministic() || !wa.is_deterministic() {
        return Err(Error::Precondition("boundedness checks need deterministic automata".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
