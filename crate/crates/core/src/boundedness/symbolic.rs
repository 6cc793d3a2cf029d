//! Bounded witness search for decidable theories with infinite domains.
//!
//! Every transition guard is moved into one frame over the whole candidate
//! word `w1 w2 w3`, so a choice of runs is feasible iff the conjunction of
//! its shifted guards is satisfiable. Soundness of an unbounded verdict
//! rests on the completion property of the theory.

use super::{check_bounded_finite, check_inputs, live_states, verify_witness, InputSpecifier, Verdict, Witness};
use crate::error::{Error, Result};
use crate::ksla::Ksla;
use crate::scalar::Scalar;
use crate::theory::{Predicate, Theory, TheoryKind};

/// Search nodes explored before giving up.
const NODE_LIMIT: usize = 500_000;

const S: usize = 0;
const P: usize = 1;
/// Window automaton from its initial state over `w2`.
const A: usize = 2;
/// Window automaton from `q` over `w2`.
const B: usize = 3;
/// Window automaton from `q` over `w3`.
const C: usize = 4;

struct Search<'a, Sc: Scalar> {
    autos: [&'a Ksla<Sc>; 5],
    frame: Theory<Sc>,
    k: usize,
    l1: usize,
    l2: usize,
    q: usize,
    nodes: usize,
    /// Edge index taken by each run at each position.
    hist: [Vec<Option<usize>>; 5],
    anchor: (usize, usize),
}

enum Found<Sc> {
    Witness(Predicate<Sc>),
    Exhausted,
}

impl<Sc: Scalar> Search<'_, Sc> {
    fn len(&self) -> usize {
        self.l1 + 2 * self.l2
    }

    fn run(&mut self, i: usize, mut st: [usize; 5], cur: Predicate<Sc>) -> Result<Option<Found<Sc>>> {
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            return Ok(Some(Found::Exhausted));
        }
        let (l1, l2, q) = (self.l1, self.l2, self.q);
        if i == l1 {
            if !self.autos[S].is_final(st[S]) || !self.autos[P].is_final(st[P]) {
                return Ok(None);
            }
            self.anchor = (st[S], st[P]);
            st[A] = self.autos[A].initial();
            st[B] = q;
        }
        if i == l1 + l2 {
            if (st[S], st[P]) != self.anchor || st[A] != q || st[B] != q {
                return Ok(None);
            }
            st[C] = q;
        }
        if i == self.len() {
            let done = (st[S], st[P]) == self.anchor && st[C] == q;
            return Ok(done.then_some(Found::Witness(cur)));
        }

        let mut active = vec![S, P];
        if (l1..l1 + l2).contains(&i) {
            active.extend([A, B]);
        } else if i >= l1 + l2 {
            active.push(C);
        }
        // On the first k letters of w3 the runs repeat their moves on w2.
        let forced = |r: usize, hist: &[Vec<Option<usize>>; 5]| -> Option<usize> {
            let j = i.checked_sub(l1 + l2).filter(|j| *j < self.k)?;
            let src = if r == C { B } else { r };
            hist[src][l1 + j]
        };
        let choices: Vec<Vec<usize>> = active
            .iter()
            .map(|&r| match forced(r, &self.hist) {
                Some(e) => vec![e],
                None => (0..self.autos[r].transitions(st[r]).len()).collect(),
            })
            .collect();
        let shift = self.len() - 1 - i;
        let mut pick = vec![0; active.len()];
        if choices.iter().any(Vec::is_empty) {
            return Ok(None);
        }
        loop {
            let mut next = st;
            let mut parts = vec![cur.clone()];
            for (slot, &r) in active.iter().enumerate() {
                let e = choices[slot][pick[slot]];
                let (t, g) = &self.autos[r].transitions(st[r])[e];
                next[r] = *t;
                parts.push(g.shift_vars(shift));
                self.hist[r][i] = Some(e);
            }
            let conj = self.frame.simplify(&Predicate::all(parts))?;
            if !conj.is_false() {
                if let Some(found) = self.run(i + 1, next, conj)? {
                    return Ok(Some(found));
                }
            }
            for &r in &active {
                self.hist[r][i] = None;
            }
            // Advance the mixed-radix counter over edge choices.
            let mut slot = 0;
            loop {
                if slot == pick.len() {
                    return Ok(None);
                }
                pick[slot] += 1;
                if pick[slot] < choices[slot].len() {
                    break;
                }
                pick[slot] = 0;
                slot += 1;
            }
        }
    }
}

/// Looks for a witness with `k <= |w1| <= budget` and `1 <= |w2| = |w3| <=
/// budget`, shortest total length first. Finite alphabets are delegated to
/// the exact checker. Without a witness in range the verdict is unknown.
pub fn check_bounded_symbolic<Sc: Scalar>(
    pa: &Ksla<Sc>,
    wa: &Ksla<Sc>,
    spec: &InputSpecifier<Sc>,
    budget: usize,
) -> Result<Verdict<Sc>> {
    if matches!(wa.theory().kind(), TheoryKind::Finite(_)) {
        return check_bounded_finite(pa, wa, spec);
    }
    check_inputs(pa, wa, spec)?;
    let caps = wa.theory().capabilities();
    if !caps.has_completion_property || !caps.can_decide_sat {
        return Ok(Verdict::Unknown("completion property required for soundness of Unbounded".into()));
    }
    if budget == 0 {
        return Ok(Verdict::Unknown("search budget is zero".into()));
    }
    let k = wa.lookback();
    let mut shapes: Vec<(usize, usize)> =
        (k..=budget).flat_map(|l1| (1..=budget).map(move |l2| (l1, l2))).collect();
    shapes.sort_by_key(|&(l1, l2)| (l1 + l2, l1));
    let live = live_states(wa);
    let mut gave_up = false;
    for (l1, l2) in shapes {
        let n = l1 + 2 * l2;
        let frame = Theory::dense_order(n - 1).with_budget(wa.theory().budget());
        for &q in &live {
            let mut search = Search {
                autos: [spec.automaton(), pa, wa, wa, wa],
                frame: frame.clone(),
                k,
                l1,
                l2,
                q,
                nodes: 0,
                hist: std::array::from_fn(|_| vec![None; n]),
                anchor: (0, 0),
            };
            let init = [spec.automaton().initial(), pa.initial(), wa.initial(), q, q];
            let found = match search.run(k, init, Predicate::True) {
                Ok(found) => found,
                Err(Error::Resource(_)) => Some(Found::Exhausted),
                Err(e) => return Err(e),
            };
            match found {
                None => {}
                Some(Found::Exhausted) => gave_up = true,
                Some(Found::Witness(constraint)) => {
                    let (_, Some(model)) = frame.is_satisfiable(&constraint)? else { continue };
                    let word = model.block().to_vec();
                    let (w1, rest) = word.split_at(l1);
                    let (w2, w3) = rest.split_at(l2);
                    if verify_witness(pa, wa, spec.automaton(), w1, w2, w3, q) {
                        return Ok(Verdict::Unbounded(Witness {
                            w1: w1.to_vec(),
                            w2: w2.to_vec(),
                            w3: w3.to_vec(),
                            state: q,
                        }));
                    }
                }
            }
        }
    }
    let reason = if gave_up {
        format!("search limits reached without a witness of length at most {budget}")
    } else {
        format!("no witness with |w1|, |w2| at most {budget}")
    };
    Ok(Verdict::Unknown(reason))
}
