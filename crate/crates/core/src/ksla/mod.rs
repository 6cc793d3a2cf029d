//! k-lookback symbolic automata.
//!
//! A transition taken at position `i` reads the block `w[i-k..=i]`, so a
//! run over a word of length `n >= k` visits `n-k+1` states. Words shorter
//! than `k` are rejected; a word of length exactly `k` is accepted iff the
//! initial state is final.

mod expand;
mod json;
mod ops;

use std::collections::BTreeSet;

pub use expand::{Expanded, ExpandedState};
pub use json::{theory_from_json, theory_to_json};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{Letter, Predicate, Theory};

/// Default ceiling on the number of distinct targets leaving one subset
/// state during determinization.
pub const DEFAULT_OUT_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub states: Vec<usize>,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct Ksla<S> {
    theory: Theory<S>,
    initial: usize,
    finals: Vec<bool>,
    /// Sparse guard matrix: at most one edge per (source, target).
    edges: Vec<Vec<(usize, Predicate<S>)>>,
    deterministic: bool,
}

impl<S: Scalar> Ksla<S> {
    /// An automaton with `states` states and no transitions.
    pub fn new(theory: Theory<S>, states: usize, initial: usize) -> Self {
        assert!(initial < states.max(1), "initial state out of range");
        let states = states.max(1);
        Ksla {
            theory,
            initial,
            finals: vec![false; states],
            edges: vec![Vec::new(); states],
            deterministic: true,
        }
    }

    /// The automaton accepting every word of length at least `k`.
    pub fn universal(theory: Theory<S>) -> Self {
        let mut a = Ksla::new(theory, 1, 0);
        a.set_final(0, true);
        a.add_transition(0, 0, Predicate::True).expect("true is valid everywhere");
        a
    }

    /// The automaton accepting nothing.
    pub fn empty(theory: Theory<S>) -> Self {
        Ksla::new(theory, 1, 0)
    }

    pub fn theory(&self) -> &Theory<S> {
        &self.theory
    }

    pub fn lookback(&self) -> usize {
        self.theory.lookback()
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        self.finals.iter().enumerate().filter(|(_, f)| **f).map(|(q, _)| q)
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Outgoing edges of `q` as `(target, guard)`.
    pub fn transitions(&self, q: usize) -> &[(usize, Predicate<S>)] {
        &self.edges[q]
    }

    /// Guard from `q` to `r`; `False` when there is no edge.
    pub fn guard(&self, q: usize, r: usize) -> Predicate<S> {
        self.edges[q]
            .iter()
            .find(|(t, _)| *t == r)
            .map_or(Predicate::False, |(_, g)| g.clone())
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn add_state(&mut self, is_final: bool) -> usize {
        self.finals.push(is_final);
        self.edges.push(Vec::new());
        self.finals.len() - 1
    }

    pub fn set_final(&mut self, q: usize, is_final: bool) {
        self.finals[q] = is_final;
    }

    pub fn set_initial(&mut self, q: usize) {
        assert!(q < self.num_states());
        self.initial = q;
    }

    /// Adds `guard` to the edge `from -> to`, disjoining with an existing
    /// guard. Clears the determinism certificate once a state has edges to
    /// two different targets.
    pub fn add_transition(&mut self, from: usize, to: usize, guard: Predicate<S>) -> Result<()> {
        if from >= self.num_states() || to >= self.num_states() {
            return Err(Error::Precondition(format!("transition {from} -> {to} references a missing state")));
        }
        if guard.is_false() {
            return Ok(());
        }
        self.theory.validate(&guard)?;
        let out = &mut self.edges[from];
        if out.iter().any(|(t, _)| *t != to) {
            self.deterministic = false;
        }
        match out.iter_mut().find(|(t, _)| *t == to) {
            Some((_, g)) => *g = std::mem::replace(g, Predicate::False).or(guard),
            None => out.push((to, guard)),
        }
        Ok(())
    }

    pub(crate) fn sort_edges(&mut self) {
        for out in &mut self.edges {
            out.sort_by(|a, b| a.0.cmp(&b.0));
        }
    }

    /// Successors of `q` on a block of `k+1` letters.
    pub fn successors<'a>(&'a self, q: usize, block: &'a [Letter<S>], tracks: u64) -> impl Iterator<Item = usize> + 'a {
        self.edges[q]
            .iter()
            .filter(move |(_, g)| g.eval_block(block, tracks))
            .map(|(t, _)| *t)
    }

    /// First successor of `q` on the block; the only one when deterministic.
    pub fn step(&self, q: usize, block: &[Letter<S>], tracks: u64) -> Option<usize> {
        self.successors(q, block, tracks).next()
    }

    fn check_word(&self, w: &[Letter<S>]) -> Result<()> {
        w.iter().try_for_each(|l| self.theory.check_letter(l))
    }

    /// Acceptance with a run trace for deterministic automata.
    pub fn run_accepts(&self, w: &[Letter<S>]) -> Result<(bool, Option<RunTrace>)> {
        self.check_word(w)?;
        if !self.deterministic {
            return Ok((self.accepts(w), None));
        }
        let k = self.lookback();
        if w.len() < k {
            return Ok((false, None));
        }
        let mut states = vec![self.initial];
        let mut q = self.initial;
        for i in k..w.len() {
            match self.step(q, &w[i - k..=i], 0) {
                Some(r) => {
                    q = r;
                    states.push(r);
                }
                None => return Ok((false, Some(RunTrace { states, accepted: false }))),
            }
        }
        let accepted = self.finals[q];
        Ok((accepted, Some(RunTrace { states, accepted })))
    }

    /// Acceptance by subset simulation; letters are not checked.
    pub fn accepts(&self, w: &[Letter<S>]) -> bool {
        self.accepts_tracked(w, &[])
    }

    /// Acceptance of a word over the extended alphabet; `tracks[i]` are
    /// the track bits of letter `i` (missing entries read as zero).
    pub fn accepts_tracked(&self, w: &[Letter<S>], tracks: &[u64]) -> bool {
        let k = self.lookback();
        if w.len() < k {
            return false;
        }
        let mut current: BTreeSet<usize> = [self.initial].into();
        for i in k..w.len() {
            let bits = tracks.get(i).copied().unwrap_or(0);
            let block = &w[i - k..=i];
            current = current.iter().flat_map(|&q| self.successors(q, block, bits)).collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|&q| self.finals[q])
    }

    /// States from which no final state is reachable along stored edges.
    pub fn dead_states(&self) -> BTreeSet<usize> {
        let n = self.num_states();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (q, out) in self.edges.iter().enumerate() {
            for (t, g) in out {
                if !g.is_false() {
                    preds[*t].push(q);
                }
            }
        }
        let mut live = vec![false; n];
        let mut stack: Vec<usize> = self.finals().collect();
        for &q in &stack {
            live[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &preds[q] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        (0..n).filter(|q| !live[*q]).collect()
    }

    /// States reachable from the initial state along stored edges.
    pub fn reachable_states(&self) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = [self.initial].into();
        let mut stack = vec![self.initial];
        while let Some(q) = stack.pop() {
            for (t, _) in &self.edges[q] {
                if seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// Sets the determinism flag if every pair of guards leaving a state is
    /// unsatisfiable together; returns whether it holds. Custom theories
    /// can only certify syntactically disjoint guards.
    pub fn certify_deterministic(&mut self) -> Result<bool> {
        let mut ok = true;
        'outer: for out in &self.edges {
            for (i, (_, g1)) in out.iter().enumerate() {
                for (_, g2) in &out[i + 1..] {
                    if !self.theory.definitely_unsat(&g1.clone().and(g2.clone()))? {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        self.deterministic = ok;
        Ok(ok)
    }

    /// Whether every stored guard is satisfiable.
    pub fn is_clean(&self) -> Result<bool> {
        self.theory.require_sat("cleanliness checking")?;
        for out in &self.edges {
            for (_, g) in out {
                if !self.theory.sat(g)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
