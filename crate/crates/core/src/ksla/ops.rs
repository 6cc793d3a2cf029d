//! Closure constructions: determinization, completion, complement,
//! product, union, k-concatenation, star, trimming and track projection.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Ksla, DEFAULT_OUT_DEGREE};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{Cube, Predicate, Theory};

impl<S: Scalar> Ksla<S> {
    fn blank(theory: Theory<S>) -> Self {
        let mut a = Ksla::new(theory, 1, 0);
        a.finals.clear();
        a.edges.clear();
        a
    }

    fn is_unsat(&self, g: &Predicate<S>) -> Result<bool> {
        self.theory.definitely_unsat(g)
    }

    /// Subset construction over satisfiable minterms of each subset's
    /// out-guards. The result is deterministic and clean.
    pub fn determinize(&self) -> Result<Ksla<S>> {
        self.determinize_with(DEFAULT_OUT_DEGREE)
    }

    pub fn determinize_with(&self, max_out_degree: usize) -> Result<Ksla<S>> {
        self.theory.require_sat("determinization")?;
        let theory = &self.theory;
        let mut out = Ksla::blank(theory.clone());
        let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let start: BTreeSet<usize> = [self.initial].into();
        index.insert(start.clone(), out.add_state(self.finals[self.initial]));
        queue.push_back(start);
        while let Some(subset) = queue.pop_front() {
            let from = index[&subset];
            let mut by_target: BTreeMap<usize, Predicate<S>> = BTreeMap::new();
            for &q in &subset {
                for (t, g) in &self.edges[q] {
                    let entry = by_target.entry(*t).or_insert(Predicate::False);
                    *entry = std::mem::replace(entry, Predicate::False).or(g.clone());
                }
            }
            if by_target.len() > max_out_degree {
                return Err(Error::Resource(format!(
                    "subset state with {} distinct targets exceeds the out-degree ceiling {max_out_degree}",
                    by_target.len()
                )));
            }
            let mut regions: Vec<(Vec<Cube<S>>, BTreeSet<usize>)> = vec![(vec![Vec::new()], BTreeSet::new())];
            for (t, g) in &by_target {
                let pos = theory.dnf(g)?;
                if pos.is_empty() {
                    continue;
                }
                let neg = theory.dnf(&g.clone().negate())?;
                let mut next = Vec::with_capacity(regions.len() * 2);
                for (r, set) in regions {
                    let inside = theory.dnf_and(&r, &pos)?;
                    if !inside.is_empty() {
                        let mut with = set.clone();
                        with.insert(*t);
                        next.push((inside, with));
                    }
                    let outside = theory.dnf_and(&r, &neg)?;
                    if !outside.is_empty() {
                        next.push((outside, set));
                    }
                }
                regions = next;
            }
            let mut grouped: BTreeMap<BTreeSet<usize>, Vec<Cube<S>>> = BTreeMap::new();
            for (cubes, set) in regions {
                if !set.is_empty() {
                    grouped.entry(set).or_default().extend(cubes);
                }
            }
            for (set, cubes) in grouped {
                let to = match index.get(&set) {
                    Some(&i) => i,
                    None => {
                        let i = out.add_state(set.iter().any(|&q| self.finals[q]));
                        index.insert(set.clone(), i);
                        queue.push_back(set);
                        i
                    }
                };
                out.edges[from].push((to, Theory::dnf_to_predicate(&cubes)));
            }
        }
        out.deterministic = true;
        Ok(out)
    }

    /// Adds a non-accepting trap state receiving every block no guard
    /// covers. Determinizes first when needed.
    pub fn complete(&self) -> Result<Ksla<S>> {
        let mut a = if self.deterministic { self.clone() } else { self.determinize()? };
        let mut trap = None;
        for q in 0..a.num_states() {
            let covered = Predicate::any(a.edges[q].iter().map(|(_, g)| g.clone()));
            let missing = a.theory.simplify(&covered.negate())?;
            if missing.is_false() {
                continue;
            }
            let t = *trap.get_or_insert_with(|| {
                let t = a.add_state(false);
                a.edges[t].push((t, Predicate::True));
                t
            });
            a.edges[q].push((t, missing));
        }
        a.deterministic = true;
        Ok(a)
    }

    /// Complement relative to words of length at least `k`; a length-`k`
    /// word is accepted iff the input's initial state is non-final.
    pub fn complement(&self) -> Result<Ksla<S>> {
        let mut a = self.complete()?;
        for f in &mut a.finals {
            *f = !*f;
        }
        Ok(a)
    }

    /// Synchronous product; accepts the intersection of both languages.
    pub fn product_intersect(&self, other: &Ksla<S>) -> Result<Ksla<S>> {
        self.theory.same_as(&other.theory, "intersection")?;
        let mut out = Ksla::blank(self.theory.clone());
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let start = (self.initial, other.initial);
        index.insert(start, out.add_state(self.finals[start.0] && other.finals[start.1]));
        queue.push_back(start);
        while let Some((p, q)) = queue.pop_front() {
            let from = index[&(p, q)];
            for (tp, gp) in &self.edges[p] {
                for (tq, gq) in &other.edges[q] {
                    let g = self.theory.simplify(&gp.clone().and(gq.clone()))?;
                    if g.is_false() {
                        continue;
                    }
                    let key = (*tp, *tq);
                    let to = match index.get(&key) {
                        Some(&i) => i,
                        None => {
                            let i = out.add_state(self.finals[*tp] && other.finals[*tq]);
                            index.insert(key, i);
                            queue.push_back(key);
                            i
                        }
                    };
                    out.edges[from].push((to, g));
                }
            }
        }
        out.deterministic = self.deterministic && other.deterministic;
        Ok(out)
    }

    /// Copies `other` into `self`, returning the offset of its states.
    fn absorb(&mut self, other: &Ksla<S>) -> usize {
        let offset = self.num_states();
        for q in 0..other.num_states() {
            self.add_state(other.finals[q]);
        }
        for (q, out) in other.edges.iter().enumerate() {
            for (t, g) in out {
                self.edges[offset + q].push((offset + t, g.clone()));
            }
        }
        offset
    }

    /// Copies the initial out-edges of the automaton at `offset` onto `to`.
    fn copy_initial_edges(&mut self, to: usize, offset: usize, src: &Ksla<S>) {
        for (t, g) in &src.edges[src.initial] {
            self.push_edge(to, offset + t, g.clone());
        }
    }

    fn push_edge(&mut self, from: usize, to: usize, g: Predicate<S>) {
        let out = &mut self.edges[from];
        match out.iter_mut().find(|(t, _)| *t == to) {
            Some((_, old)) => *old = std::mem::replace(old, Predicate::False).or(g),
            None => out.push((to, g)),
        }
    }

    /// Disjoint union under a fresh initial state.
    pub fn union(&self, other: &Ksla<S>) -> Result<Ksla<S>> {
        self.theory.same_as(&other.theory, "union")?;
        let mut out = Ksla::blank(self.theory.clone());
        let init = out.add_state(self.finals[self.initial] || other.finals[other.initial]);
        let a = out.absorb(self);
        let b = out.absorb(other);
        out.copy_initial_edges(init, a, self);
        out.copy_initial_edges(init, b, other);
        out.initial = init;
        out.deterministic = false;
        Ok(out.trim_unreachable())
    }

    /// k-concatenation: words `u v u'` with `|v| = k`, `u v` accepted by
    /// `self`, `v u'` accepted by `other` and `u'` nonempty.
    pub fn concat_k(&self, other: &Ksla<S>) -> Result<Ksla<S>> {
        self.theory.same_as(&other.theory, "k-concatenation")?;
        let mut out = Ksla::blank(self.theory.clone());
        let a = out.absorb(self);
        let b = out.absorb(other);
        for q in 0..self.num_states() {
            out.finals[a + q] = false;
            if self.finals[q] {
                out.copy_initial_edges(a + q, b, other);
            }
        }
        out.initial = a + self.initial;
        out.deterministic = false;
        Ok(out.trim_unreachable())
    }

    /// Kleene star with `R^0 = Σ^k`.
    pub fn star(&self) -> Result<Ksla<S>> {
        let mut out = self.clone();
        let has_incoming = self.edges.iter().any(|out| out.iter().any(|(t, _)| *t == self.initial));
        let init_edges = self.edges[self.initial].clone();
        for q in 0..self.num_states() {
            if self.finals[q] {
                for (t, g) in &init_edges {
                    out.push_edge(q, *t, g.clone());
                }
            }
        }
        if has_incoming {
            let fresh = out.add_state(true);
            for (t, g) in &init_edges {
                out.push_edge(fresh, *t, g.clone());
            }
            out.initial = fresh;
        } else {
            out.finals[self.initial] = true;
        }
        out.deterministic = false;
        Ok(out.trim_unreachable())
    }

    /// Restriction to the states satisfying `keep`, renumbered in order.
    /// The initial state is always kept.
    fn restrict(&self, keep: impl Fn(usize) -> bool) -> Ksla<S> {
        let mut map = vec![None; self.num_states()];
        let mut out = Ksla::blank(self.theory.clone());
        for q in 0..self.num_states() {
            if q == self.initial || keep(q) {
                map[q] = Some(out.add_state(self.finals[q]));
            }
        }
        for (q, edges) in self.edges.iter().enumerate() {
            let Some(from) = map[q] else { continue };
            for (t, g) in edges {
                if let Some(to) = map[*t] {
                    out.edges[from].push((to, g.clone()));
                }
            }
        }
        out.initial = map[self.initial].unwrap();
        out.deterministic = self.deterministic;
        out
    }

    pub fn trim_unreachable(&self) -> Ksla<S> {
        let reachable = self.reachable_states();
        self.restrict(|q| reachable.contains(&q))
    }

    /// Removes unreachable and dead states. Language is unchanged.
    pub fn trim(&self) -> Ksla<S> {
        let reachable = self.reachable_states();
        let dead = self.dead_states();
        self.restrict(|q| reachable.contains(&q) && !dead.contains(&q))
    }

    /// Replaces every guard by its simplified form and drops unsatisfiable
    /// ones (only syntactically contradictory ones for custom theories).
    pub fn clean(&self) -> Result<Ksla<S>> {
        let mut out = self.clone();
        for edges in &mut out.edges {
            let mut kept = Vec::with_capacity(edges.len());
            for (t, g) in edges.drain(..) {
                if !self.is_unsat(&g)? {
                    let g = if self.theory.capabilities().can_decide_sat { self.theory.simplify(&g)? } else { g };
                    kept.push((t, g));
                }
            }
            *edges = kept;
        }
        Ok(out)
    }

    /// Existentially erases track `index` from every guard.
    pub fn project_track(&self, index: usize) -> Result<Ksla<S>> {
        let mut out = self.clone();
        for edges in &mut out.edges {
            for (_, g) in edges.iter_mut() {
                *g = self.theory.simplify(&g.project_track(index))?;
            }
            edges.retain(|(_, g)| !g.is_false());
        }
        out.deterministic = false;
        Ok(out)
    }

    /// Reinterprets the automaton over another theory with the same base
    /// atoms (for instance after adding or removing tracks).
    pub fn with_theory(&self, theory: Theory<S>) -> Result<Ksla<S>> {
        if theory.lookback() != self.lookback() {
            return Err(Error::TheoryMismatch("lookback differs".into()));
        }
        for edges in &self.edges {
            for (_, g) in edges {
                theory.validate(g).map_err(|e| Error::TheoryMismatch(e.to_string()))?;
            }
        }
        let mut out = self.clone();
        out.theory = theory;
        Ok(out)
    }

    /// Applies `f` to every guard, dropping edges whose guard becomes
    /// unsatisfiable.
    pub fn map_guards(&self, f: impl Fn(&Predicate<S>) -> Predicate<S>) -> Result<Ksla<S>> {
        let mut out = self.clone();
        for edges in &mut out.edges {
            let mut kept = Vec::with_capacity(edges.len());
            for (t, g) in edges.drain(..) {
                let g = self.theory.simplify(&f(&g))?;
                if !g.is_false() {
                    kept.push((t, g));
                }
            }
            *edges = kept;
        }
        out.deterministic = false;
        Ok(out)
    }
}
