//! Online window extraction with pane-based aggregation.
//!
//! Each call to [`Processor::step`] reads the letter at position `x`:
//!
//! 1. when some prefix automaton accepts `w[..x]`, `x` is tracked as a
//!    window start under the window automaton's initial state and a pane
//!    boundary is placed before `x`; a boundary is also placed after the
//!    previous step's emissions;
//! 2. the item joins the open pane;
//! 3. prefix states and tracked starts advance on the block `w[x-k..=x]`,
//!    starts reaching the same state being merged;
//! 4. every start tracked under a final window state is emitted as the
//!    window `(start, x)`, aggregating the panes from `start` on;
//! 5. starts under states that can no longer reach a final state are
//!    dropped, panes before the smallest tracked start are discarded and
//!    panes not beginning at a tracked start are merged into their
//!    predecessor.
//!
//! A window's aggregated content is `w[start..=end]`; the `k` letters of
//! lookback before `start` are only seen by guards.

mod aggregate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

pub use aggregate::{AggValue, Aggregator, Collect, Count, NumericAcc, NumericAgg, NumericOp};

use crate::error::{Error, Result};
use crate::ksla::Ksla;
use crate::scalar::Scalar;
use crate::smso::WindowExpression;
use crate::theory::Letter;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutput<O> {
    pub pair: usize,
    pub start: usize,
    pub end: usize,
    pub aggregate: O,
}

/// A run of consecutive positions and the aggregate of their items. The
/// open pane (the last one) has no end yet.
#[derive(Debug, Clone)]
pub struct Pane<A> {
    pub start: usize,
    pub end: Option<usize>,
    pub acc: A,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaneReport {
    /// Letters read so far.
    pub position: usize,
    /// Tracked window starts over all pairs.
    pub indices: usize,
    pub panes: usize,
    /// Per pair, the number of starts tracked under each window state.
    pub per_state: Vec<BTreeMap<usize, usize>>,
    /// `(start, end)` of every live pane; the open pane has no end.
    pub pane_bounds: Vec<(usize, Option<usize>)>,
}

/// Largest number of tracked starts and panes seen after any step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Usage {
    pub indices: usize,
    pub panes: usize,
}

#[derive(Debug, Clone)]
struct PairState {
    prefix: Option<usize>,
    starts: BTreeMap<usize, BTreeSet<usize>>,
    /// Window states from which no final state is reachable in one or more
    /// steps.
    exhausted: BTreeSet<usize>,
}

/// Independent per-start simulation used to check the merged state.
#[derive(Debug, Clone, Default)]
struct Shadow {
    prefix: Vec<BTreeSet<usize>>,
    exhausted: Vec<BTreeSet<usize>>,
    copies: Vec<Vec<(usize, BTreeSet<usize>)>>,
}

pub(crate) fn exhausted_states<S: Scalar>(a: &Ksla<S>) -> BTreeSet<usize> {
    let n = a.num_states();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..n {
        for (t, _) in a.transitions(q) {
            preds[*t].push(q);
        }
    }
    let mut productive = vec![false; n];
    let mut stack = Vec::new();
    for f in a.finals() {
        for &p in &preds[f] {
            if !productive[p] {
                productive[p] = true;
                stack.push(p);
            }
        }
    }
    while let Some(q) = stack.pop() {
        for &p in &preds[q] {
            if !productive[p] {
                productive[p] = true;
                stack.push(p);
            }
        }
    }
    (0..n).filter(|q| !productive[*q]).collect()
}

#[derive(Clone)]
pub struct Processor<S, A: Aggregator> {
    expr: Arc<WindowExpression<S>>,
    agg: A,
    block: VecDeque<Letter<S>>,
    pos: usize,
    pairs: Vec<PairState>,
    panes: VecDeque<Pane<A::Acc>>,
    pending_rotate: bool,
    peak: Usage,
    shadow: Option<Shadow>,
}

impl<S: Scalar, A: Aggregator> Processor<S, A> {
    /// Every automaton of `expr` must be deterministic and, when the theory
    /// decides satisfiability, clean.
    pub fn new(expr: impl Into<Arc<WindowExpression<S>>>, agg: A) -> Result<Self> {
        let expr = expr.into();
        let can_check = expr.theory().capabilities().can_decide_sat;
        for (i, p) in expr.pairs().iter().enumerate() {
            for a in [&p.prefix, &p.window] {
                if !a.is_deterministic() {
                    return Err(Error::Precondition(format!("pair {i} holds a nondeterministic automaton")));
                }
                if can_check && !a.is_clean()? {
                    return Err(Error::Precondition(format!("pair {i} holds an automaton with unsatisfiable guards")));
                }
            }
        }
        let pairs = expr
            .pairs()
            .iter()
            .map(|p| PairState {
                prefix: Some(p.prefix.initial()),
                starts: BTreeMap::new(),
                exhausted: exhausted_states(&p.window),
            })
            .collect();
        let panes = VecDeque::from([Pane { start: 0, end: None, acc: agg.empty() }]);
        Ok(Processor {
            expr,
            agg,
            block: VecDeque::new(),
            pos: 0,
            pairs,
            panes,
            pending_rotate: false,
            peak: Usage { indices: 0, panes: 1 },
            shadow: None,
        })
    }

    /// Checks the main-loop invariants against a per-start simulation after
    /// every step; violations surface as [`Error::Invariant`].
    pub fn with_debug_invariants(mut self) -> Self {
        let n = self.pairs.len();
        let prefix = self.expr.pairs().iter().map(|p| [p.prefix.initial()].into()).collect();
        let exhausted = self.expr.pairs().iter().map(|p| exhausted_states(&p.window)).collect();
        self.shadow = Some(Shadow { prefix, exhausted, copies: vec![Vec::new(); n] });
        self
    }

    pub fn expression(&self) -> &WindowExpression<S> {
        &self.expr
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn peak_usage(&self) -> Usage {
        self.peak
    }

    pub fn tracked_indices(&self) -> usize {
        self.pairs.iter().flat_map(|p| p.starts.values()).map(BTreeSet::len).sum()
    }

    pub fn panes(&self) -> impl Iterator<Item = &Pane<A::Acc>> {
        self.panes.iter()
    }

    fn live_starts(&self) -> BTreeSet<usize> {
        self.pairs.iter().flat_map(|p| p.starts.values().flatten().copied()).collect()
    }

    fn rotate(&mut self) {
        let open = self.panes.back_mut().expect("one open pane");
        if open.start < self.pos {
            open.end = Some(self.pos - 1);
            let acc = self.agg.empty();
            self.panes.push_back(Pane { start: self.pos, end: None, acc });
        }
    }

    /// Reads one letter with its aggregation item and returns the windows
    /// ending at it, ordered by pair and start.
    pub fn step(&mut self, letter: Letter<S>, item: &A::Item) -> Result<Vec<WindowOutput<A::Output>>> {
        self.expr.theory().check_letter(&letter)?;
        let k = self.expr.lookback();
        let x = self.pos;
        let expr = Arc::clone(&self.expr);

        let mut opened = false;
        if x >= k {
            for (pair, st) in expr.pairs().iter().zip(&mut self.pairs) {
                if st.prefix.is_some_and(|q| pair.prefix.is_final(q)) {
                    let init = pair.window.initial();
                    if !st.exhausted.contains(&init) {
                        st.starts.entry(init).or_default().insert(x);
                        opened = true;
                    }
                }
            }
        }
        if opened || self.pending_rotate {
            self.rotate();
            self.pending_rotate = false;
        }
        let open = self.panes.back_mut().expect("one open pane");
        self.agg.add(&mut open.acc, item);

        self.block.push_back(letter);
        if self.block.len() > k + 1 {
            self.block.pop_front();
        }
        let mut out = Vec::new();
        if x >= k {
            let block: Vec<Letter<S>> = self.block.iter().cloned().collect();
            for (pair, st) in expr.pairs().iter().zip(&mut self.pairs) {
                st.prefix = st.prefix.and_then(|q| pair.prefix.step(q, &block, 0));
                let mut next: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
                for (q, starts) in std::mem::take(&mut st.starts) {
                    if let Some(r) = pair.window.step(q, &block, 0) {
                        next.entry(r).or_default().extend(starts);
                    }
                }
                st.starts = next;
            }
            if let Some(shadow) = &mut self.shadow {
                shadow.advance(&expr, &block, x);
            }
            out = self.emit(x);
            if !out.is_empty() {
                self.pending_rotate = true;
            }
            for st in &mut self.pairs {
                let exhausted = &st.exhausted;
                st.starts.retain(|q, s| !s.is_empty() && !exhausted.contains(q));
            }
        }
        self.pos += 1;
        self.collect_panes();
        if self.shadow.is_some() {
            self.check_invariants()?;
        }
        let now = Usage { indices: self.tracked_indices(), panes: self.panes.len() };
        self.peak.indices = self.peak.indices.max(now.indices);
        self.peak.panes = self.peak.panes.max(now.panes);
        Ok(out)
    }

    fn emit(&self, end: usize) -> Vec<WindowOutput<A::Output>> {
        let mut wanted: Vec<(usize, usize)> = Vec::new();
        for (j, (pair, st)) in self.expr.pairs().iter().zip(&self.pairs).enumerate() {
            for (q, starts) in &st.starts {
                if pair.window.is_final(*q) {
                    wanted.extend(starts.iter().map(|&s| (j, s)));
                }
            }
        }
        if wanted.is_empty() {
            return Vec::new();
        }
        wanted.sort_unstable();
        let mut suffix: BTreeMap<usize, A::Acc> = BTreeMap::new();
        let mut acc = self.agg.empty();
        for pane in self.panes.iter().rev() {
            acc = self.agg.combine(&pane.acc, &acc);
            suffix.insert(pane.start, acc.clone());
        }
        wanted
            .into_iter()
            .map(|(pair, start)| WindowOutput {
                pair,
                start,
                end,
                aggregate: self.agg.finalize(suffix.get(&start).expect("a pane begins at every tracked start")),
            })
            .collect()
    }

    fn collect_panes(&mut self) {
        let live = self.live_starts();
        let Some(&min) = live.first() else {
            self.panes.clear();
            self.panes.push_back(Pane { start: self.pos, end: None, acc: self.agg.empty() });
            self.pending_rotate = false;
            return;
        };
        while self.panes.front().is_some_and(|p| p.end.is_some_and(|e| e < min)) {
            self.panes.pop_front();
        }
        let mut merged: VecDeque<Pane<A::Acc>> = VecDeque::with_capacity(self.panes.len());
        for pane in self.panes.drain(..) {
            match merged.back_mut() {
                Some(prev) if !live.contains(&pane.start) => {
                    prev.acc = self.agg.combine(&prev.acc, &pane.acc);
                    prev.end = pane.end;
                }
                _ => merged.push_back(pane),
            }
        }
        self.panes = merged;
    }

    pub fn pane_report(&self) -> PaneReport {
        PaneReport {
            position: self.pos,
            indices: self.tracked_indices(),
            panes: self.panes.len(),
            per_state: self
                .pairs
                .iter()
                .map(|st| st.starts.iter().map(|(q, s)| (*q, s.len())).collect())
                .collect(),
            pane_bounds: self.panes.iter().map(|p| (p.start, p.end)).collect(),
        }
    }

    fn check_invariants(&self) -> Result<()> {
        let shadow = self.shadow.as_ref().expect("debug mode");
        let fail = |m: String| Err(Error::Invariant(format!("after position {}: {m}", self.pos as i64 - 1)));
        for (j, (pair, st)) in self.expr.pairs().iter().zip(&self.pairs).enumerate() {
            let expected: BTreeSet<usize> = shadow.prefix[j].clone();
            let actual: BTreeSet<usize> = st.prefix.into_iter().collect();
            if expected != actual {
                return fail(format!("pair {j}: prefix state {actual:?}, simulation gives {expected:?}"));
            }
            let mut regrouped: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for (start, states) in &shadow.copies[j] {
                for q in states.iter().filter(|q| !st.exhausted.contains(q)) {
                    regrouped.entry(*q).or_default().insert(*start);
                }
            }
            if regrouped != st.starts {
                return fail(format!("pair {j}: tracked starts {:?}, simulation gives {regrouped:?}", st.starts));
            }
            let dead = pair.window.dead_states();
            if let Some(q) = st.starts.keys().find(|q| dead.contains(q)) {
                return fail(format!("pair {j}: dead window state {q} still tracked"));
            }
        }
        let live = self.live_starts();
        let mut expected_start = None;
        for (i, pane) in self.panes.iter().enumerate() {
            let last = i + 1 == self.panes.len();
            if last != pane.end.is_none() {
                return fail("exactly the last pane must be open".into());
            }
            if let Some(s) = expected_start {
                if pane.start != s {
                    return fail(format!("pane starting at {} does not follow its predecessor", pane.start));
                }
            }
            if i > 0 && !live.contains(&pane.start) {
                return fail(format!("pane boundary at {} is not a tracked start", pane.start));
            }
            expected_start = pane.end.map(|e| e + 1);
        }
        if let Some(min) = live.first() {
            if self.panes.front().map(|p| p.start) != Some(*min) {
                return fail(format!("first pane does not begin at the smallest tracked start {min}"));
            }
        }
        Ok(())
    }
}

impl Shadow {
    fn advance<S: Scalar>(&mut self, expr: &WindowExpression<S>, block: &[Letter<S>], x: usize) {
        for (j, pair) in expr.pairs().iter().enumerate() {
            if self.prefix[j].iter().any(|&q| pair.prefix.is_final(q)) {
                self.copies[j].push((x, [pair.window.initial()].into()));
            }
            self.prefix[j] = self.prefix[j].iter().flat_map(|&q| pair.prefix.successors(q, block, 0)).collect();
            for (_, states) in &mut self.copies[j] {
                *states = states.iter().flat_map(|&q| pair.window.successors(q, block, 0)).collect();
            }
            let exhausted = &self.exhausted[j];
            self.copies[j].retain(|(_, s)| s.iter().any(|q| !exhausted.contains(q)));
        }
    }
}

/// Runs a fresh processor over `(letter, item)` records and returns all
/// windows, ordered by end, pair and start.
pub fn run_stream<S, A, I>(expr: impl Into<Arc<WindowExpression<S>>>, agg: A, stream: I) -> Result<Vec<WindowOutput<A::Output>>>
where
    S: Scalar,
    A: Aggregator,
    I: IntoIterator<Item = (Letter<S>, A::Item)>,
{
    let mut p = Processor::new(expr, agg)?;
    let mut out = Vec::new();
    for (letter, item) in stream {
        out.extend(p.step(letter, &item)?);
    }
    Ok(out)
}

/// [`run_stream`] where each letter is its own aggregation item.
pub fn run_word<S, A>(expr: impl Into<Arc<WindowExpression<S>>>, agg: A, w: &[Letter<S>]) -> Result<Vec<WindowOutput<A::Output>>>
where
    S: Scalar,
    A: Aggregator<Item = Letter<S>>,
{
    run_stream(expr, agg, w.iter().map(|l| (l.clone(), l.clone())))
}

/// Every `(pair, i_b, i_e)` recognized by definition; the oracle for
/// [`run_stream`].
pub fn windows_oracle<S: Scalar>(expr: &WindowExpression<S>, w: &[Letter<S>]) -> BTreeSet<(usize, usize, usize)> {
    expr.recognized(w)
}
