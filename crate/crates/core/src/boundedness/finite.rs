//! Exact decision for finite alphabets over lookback expansions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use super::{check_inputs, live_states, verify_witness, Bounds, InputSpecifier, Verdict, Witness};
use crate::error::Result;
use crate::ksla::{Expanded, ExpandedState, Ksla};
use crate::processor::exhausted_states;
use crate::scalar::Scalar;
use crate::theory::{Letter, TheoryKind};

/// Configurations explored when computing exact bounds.
const CONFIG_LIMIT: usize = 200_000;

struct Setup<'a, S> {
    pa: &'a Ksla<S>,
    spec: &'a Ksla<S>,
    letters: Vec<Letter<S>>,
    s_exp: Expanded,
    p_exp: Expanded,
}

impl<'a, S: Scalar> Setup<'a, S> {
    fn new(pa: &'a Ksla<S>, wa: &'a Ksla<S>, spec: &'a InputSpecifier<S>) -> Result<Self> {
        let letters = wa.theory().enumerate_letters()?;
        Ok(Setup {
            pa,
            spec: spec.automaton(),
            letters,
            s_exp: spec.automaton().expand_finite()?,
            p_exp: pa.expand_finite()?,
        })
    }

    /// Whether the specifier is still in its accepting zone.
    fn conforming(&self, s: usize) -> bool {
        match self.s_exp.state(s).state {
            None => self.spec.is_final(self.spec.initial()),
            Some(q) => self.spec.is_final(q),
        }
    }

    fn prefix_final(&self, p: usize) -> bool {
        self.p_exp.state(p).state.is_some_and(|q| self.pa.is_final(q))
    }

    fn word(&self, idx: &[usize]) -> Vec<Letter<S>> {
        idx.iter().map(|&i| self.letters[i].clone()).collect()
    }

    fn block(&self, s: usize, a: usize) -> Vec<Letter<S>> {
        let mut b = self.word(&self.s_exp.state(s).context);
        b.push(self.letters[a].clone());
        b
    }
}

fn path_to<T: Copy + Eq + std::hash::Hash>(parent: &HashMap<T, (T, usize)>, mut node: T, root: T) -> Vec<usize> {
    let mut letters = Vec::new();
    while node != root {
        let (prev, a) = parent[&node];
        letters.push(a);
        node = prev;
    }
    letters.reverse();
    letters
}

/// Decides whether tracked starts stay bounded on conforming streams.
/// Unbounded verdicts carry a witness with `w3 = w2`; bounded ones carry
/// the exact maxima reached by the processor.
pub fn check_bounded_finite<S: Scalar>(pa: &Ksla<S>, wa: &Ksla<S>, spec: &InputSpecifier<S>) -> Result<Verdict<S>> {
    if !matches!(wa.theory().kind(), TheoryKind::Finite(_)) {
        return Ok(Verdict::Unknown("theory not finitely enumerable".into()));
    }
    check_inputs(pa, wa, spec)?;
    let setup = Setup::new(pa, wa, spec)?;
    let w_exp = wa.expand_finite()?;
    let live: BTreeSet<usize> = live_states(wa).into_iter().collect();
    let n = setup.letters.len();

    // Accepting-zone pairs reachable after at least k letters with PA final.
    let root = (setup.s_exp.initial(), setup.p_exp.initial());
    let mut parent: HashMap<(usize, usize), ((usize, usize), usize)> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([root]);
    let mut seen = HashSet::from([root]);
    if !setup.conforming(root.0) {
        queue.clear();
    }
    while let Some((s, p)) = queue.pop_front() {
        order.push((s, p));
        for a in 0..n {
            let (Some(s2), Some(p2)) = (setup.s_exp.step(s, a), setup.p_exp.step(p, a)) else { continue };
            if setup.conforming(s2) && seen.insert((s2, p2)) {
                parent.insert((s2, p2), ((s, p), a));
                queue.push_back((s2, p2));
            }
        }
    }

    for &(s, p) in &order {
        if !setup.prefix_final(p) {
            continue;
        }
        let context = setup.s_exp.state(s).context.clone();
        let Some(start) = w_exp.index_of(&ExpandedState { state: Some(wa.initial()), context: context.clone() })
        else {
            continue;
        };
        for qe in 0..w_exp.num_states() {
            let st = w_exp.state(qe);
            let Some(q) = st.state else { continue };
            if !live.contains(&q) || st.context != context {
                continue;
            }
            if let Some(w2) = find_cycle(&setup, &w_exp, (s, p, start, qe)) {
                let w1 = setup.word(&path_to(&parent, (s, p), root));
                let w2 = setup.word(&w2);
                debug_assert!(verify_witness(pa, wa, setup.spec, &w1, &w2, &w2, q));
                return Ok(Verdict::Unbounded(Witness { w1, w3: w2.clone(), w2, state: q }));
            }
        }
    }
    Ok(Verdict::Bounded(exact_bounds(pa, wa, spec)?))
}

/// Nonempty word leading the four-way product from `(s, p, start, q)` to
/// `(s, p, q, q)` while the specifier stays accepting.
fn find_cycle<S: Scalar>(setup: &Setup<S>, w_exp: &Expanded, from: (usize, usize, usize, usize)) -> Option<Vec<usize>> {
    let (s, p, _, q) = from;
    let goal = (s, p, q, q);
    let mut parent: HashMap<(usize, usize, usize, usize), ((usize, usize, usize, usize), usize)> = HashMap::new();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([from]);
    while let Some(node @ (s1, p1, a1, b1)) = queue.pop_front() {
        for a in 0..setup.letters.len() {
            let next = (
                setup.s_exp.step(s1, a),
                setup.p_exp.step(p1, a),
                w_exp.step(a1, a),
                w_exp.step(b1, a),
            );
            let (Some(s2), Some(p2), Some(a2), Some(b2)) = next else { continue };
            if !setup.conforming(s2) {
                continue;
            }
            let next = (s2, p2, a2, b2);
            if next == goal {
                let mut word = path_to(&parent, node, from);
                word.push(a);
                return Some(word);
            }
            if next != from && seen.insert(next) {
                parent.insert(next, (node, a));
                queue.push_back(next);
            }
        }
    }
    None
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    s: usize,
    p: Option<usize>,
    copies: BTreeMap<usize, usize>,
}

/// Maxima of tracked starts and panes over all conforming streams, found by
/// exploring the processor's abstract configurations (specifier and prefix
/// state plus the number of starts per window state). `None` when the
/// configurations exceed the exploration limit.
pub fn exact_bounds<S: Scalar>(pa: &Ksla<S>, wa: &Ksla<S>, spec: &InputSpecifier<S>) -> Result<Option<Bounds>> {
    check_inputs(pa, wa, spec)?;
    let setup = Setup::new(pa, wa, spec)?;
    let exhausted = exhausted_states(wa);
    let root = Config { s: setup.s_exp.initial(), p: Some(setup.p_exp.initial()), copies: BTreeMap::new() };
    let mut best = 0usize;
    if !setup.conforming(root.s) {
        return Ok(Some(Bounds { indices: 0, panes: 1 }));
    }
    let mut seen = HashSet::from([root.clone()]);
    let mut queue = VecDeque::from([root]);
    while let Some(c) = queue.pop_front() {
        for a in 0..setup.letters.len() {
            let Some(s2) = setup.s_exp.step(c.s, a) else { continue };
            if !setup.conforming(s2) {
                continue;
            }
            let mut copies = c.copies.clone();
            if c.p.is_some_and(|p| setup.prefix_final(p)) && !exhausted.contains(&wa.initial()) {
                *copies.entry(wa.initial()).or_default() += 1;
            }
            let mut next: BTreeMap<usize, usize> = BTreeMap::new();
            if !copies.is_empty() {
                let block = setup.block(c.s, a);
                for (q, count) in copies {
                    if let Some(r) = wa.step(q, &block, 0) {
                        if !exhausted.contains(&r) {
                            *next.entry(r).or_default() += count;
                        }
                    }
                }
            }
            best = best.max(next.values().sum());
            let config = Config { s: s2, p: c.p.and_then(|p| setup.p_exp.step(p, a)), copies: next };
            if seen.insert(config.clone()) {
                if seen.len() > CONFIG_LIMIT {
                    return Ok(None);
                }
                queue.push_back(config);
            }
        }
    }
    Ok(Some(Bounds { indices: best, panes: best.max(1) }))
}
