//! Lookback expansion of a finite-alphabet automaton into a classic
//! automaton over single letters whose states carry the last `k` letters.

use std::collections::{BTreeMap, VecDeque};

use super::Ksla;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{Letter, TheoryKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpandedState {
    /// Automaton state; `None` while the first `k` letters are read.
    pub state: Option<usize>,
    /// Alphabet indices of the most recent letters (at most `k`).
    pub context: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Expanded {
    letters: usize,
    states: Vec<ExpandedState>,
    initial: usize,
    finals: Vec<bool>,
    delta: Vec<Vec<Vec<usize>>>,
}

impl Expanded {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_letters(&self) -> usize {
        self.letters
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals[s]
    }

    pub fn state(&self, s: usize) -> &ExpandedState {
        &self.states[s]
    }

    pub fn index_of(&self, state: &ExpandedState) -> Option<usize> {
        self.states.iter().position(|x| x == state)
    }

    pub fn successors(&self, s: usize, letter: usize) -> &[usize] {
        &self.delta[s][letter]
    }

    pub fn step(&self, s: usize, letter: usize) -> Option<usize> {
        self.delta[s][letter].first().copied()
    }

    pub fn is_deterministic(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(|t| t.len() <= 1))
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut current = vec![self.initial];
        for &a in word {
            let mut next: Vec<usize> = current.iter().flat_map(|&s| self.delta[s][a].iter().copied()).collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        current.iter().any(|&s| self.finals[s])
    }
}

impl<S: Scalar> Ksla<S> {
    /// Expands a finite-alphabet automaton; only states reachable from the
    /// initial configuration are built.
    pub fn expand_finite(&self) -> Result<Expanded> {
        let TheoryKind::Finite(alphabet) = self.theory.kind() else {
            return Err(Error::CapabilityMissing("lookback expansion needs a finite alphabet".into()));
        };
        if self.theory.tracks() > 0 {
            return Err(Error::Precondition("expansion of track-extended automata is not supported".into()));
        }
        let k = self.lookback();
        let symbols: Vec<Letter<S>> = alphabet.symbols().iter().cloned().map(Letter::Sym).collect();
        let n = symbols.len();
        let mut out = Expanded { letters: n, states: Vec::new(), initial: 0, finals: Vec::new(), delta: Vec::new() };
        let mut index: BTreeMap<ExpandedState, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let mut intern = |st: ExpandedState, out: &mut Expanded, queue: &mut VecDeque<usize>| -> usize {
            if let Some(&i) = index.get(&st) {
                return i;
            }
            let i = out.states.len();
            out.finals.push(st.state.is_some_and(|q| self.finals[q]));
            out.states.push(st.clone());
            out.delta.push(vec![Vec::new(); n]);
            index.insert(st, i);
            queue.push_back(i);
            i
        };
        let start = ExpandedState { state: (k == 0).then_some(self.initial), context: Vec::new() };
        out.initial = intern(start, &mut out, &mut queue);
        let mut block: Vec<Letter<S>> = Vec::with_capacity(k + 1);
        while let Some(s) = queue.pop_front() {
            let st = out.states[s].clone();
            for a in 0..n {
                let mut ctx = st.context.clone();
                ctx.push(a);
                let targets: Vec<usize> = match st.state {
                    None => {
                        let state = (ctx.len() == k).then_some(self.initial);
                        vec![intern(ExpandedState { state, context: ctx }, &mut out, &mut queue)]
                    }
                    Some(q) => {
                        block.clear();
                        block.extend(ctx.iter().map(|&i| symbols[i].clone()));
                        let next_ctx = ctx[1..].to_vec();
                        let succ: Vec<usize> = self.successors(q, &block, 0).collect();
                        succ.into_iter()
                            .map(|r| {
                                intern(ExpandedState { state: Some(r), context: next_ctx.clone() }, &mut out, &mut queue)
                            })
                            .collect()
                    }
                };
                out.delta[s][a] = targets;
            }
        }
        Ok(out)
    }
}
