//! Disjunctive normal form with per-theory cube simplification.
//!
//! Every cube produced here has been checked by the theory's cube solver,
//! so for decidable theories a DNF is empty exactly when the predicate is
//! unsatisfiable. Custom theories only detect propositional clashes.

use std::collections::{BTreeMap, BTreeSet};

use super::letter::{Letter, Symbol};
use super::order::{self, Constraint, Node, Rel};
use super::predicate::{Atom, CmpOp, Predicate, Term};
use super::{Theory, TheoryKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Literal<S> {
    pub atom: Atom<S>,
    pub positive: bool,
}

impl<S: Scalar> Literal<S> {
    fn to_predicate(&self) -> Predicate<S> {
        let atom = Predicate::Atom(self.atom.clone());
        if self.positive {
            atom
        } else {
            Predicate::Not(Box::new(atom))
        }
    }
}

/// A satisfiable-or-unknown conjunction of literals, sorted and deduplicated.
pub(crate) type Cube<S> = Vec<Literal<S>>;

/// A concrete model of a cube: the lookback block and current track bits.
pub(crate) type Model<S> = (Vec<Letter<S>>, u64);

fn full_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

impl<S: Scalar> Theory<S> {
    fn symbol_mask(&self, set: &BTreeSet<Symbol>) -> u128 {
        match &self.kind {
            TheoryKind::Finite(alphabet) => set
                .iter()
                .filter_map(|s| alphabet.index_of(s))
                .fold(0, |m, i| m | 1u128 << i),
            _ => 0,
        }
    }

    /// Orients a literal so equivalent literals compare equal.
    fn orient(&self, lit: Literal<S>) -> Literal<S> {
        let Literal { atom, positive } = lit;
        match atom {
            Atom::Cmp { lhs, op, rhs } => {
                let total = !matches!(self.kind, TheoryKind::Custom);
                let (op, positive) = if total || !op.is_order() {
                    (if positive { op } else { op.negate() }, true)
                } else {
                    (op, positive)
                };
                let (lhs, op, rhs) = match op {
                    CmpOp::Gt | CmpOp::Ge => (rhs, op.flip(), lhs),
                    CmpOp::Eq | CmpOp::Ne if rhs < lhs => (rhs, op, lhs),
                    _ => (lhs, op, rhs),
                };
                Literal { atom: Atom::Cmp { lhs, op, rhs }, positive }
            }
            atom => Literal { atom, positive },
        }
    }

    /// Simplifies a conjunction; `None` when it is known to be unsatisfiable.
    pub(crate) fn simplify_cube(&self, lits: Vec<Literal<S>>) -> Option<Cube<S>> {
        self.solve_cube(lits).map(|(cube, _)| cube)
    }

    /// Simplified cube together with a model, when the theory can build one.
    pub(crate) fn solve_cube(&self, lits: Vec<Literal<S>>) -> Option<(Cube<S>, Option<Model<S>>)> {
        let mut on = 0u64;
        let mut off = 0u64;
        let mut base: BTreeSet<Literal<S>> = BTreeSet::new();
        for lit in lits {
            match lit.atom {
                Atom::Track(t) => {
                    if t >= 64 {
                        return None;
                    }
                    if lit.positive {
                        on |= 1 << t;
                    } else {
                        off |= 1 << t;
                    }
                }
                _ => {
                    base.insert(self.orient(lit));
                }
            }
        }
        if on & off != 0 {
            return None;
        }
        let (mut cube, model) = match &self.kind {
            TheoryKind::Finite(_) => self.finite_cube(base)?,
            TheoryKind::DenseOrder => self.dense_cube(base)?,
            TheoryKind::Custom => (custom_cube(base)?, None),
        };
        for t in 0..64 {
            if on >> t & 1 == 1 {
                cube.push(Literal { atom: Atom::Track(t), positive: true });
            } else if off >> t & 1 == 1 {
                cube.push(Literal { atom: Atom::Track(t), positive: false });
            }
        }
        cube.sort();
        Some((cube, model.map(|block| (block, on))))
    }

    fn finite_cube(&self, lits: BTreeSet<Literal<S>>) -> Option<(Cube<S>, Option<Vec<Letter<S>>>)> {
        let TheoryKind::Finite(alphabet) = &self.kind else { unreachable!() };
        let n = alphabet.len();
        let full = full_mask(n);
        let vars = self.lookback + 1;
        let mut dom = vec![full; vars];
        let mut eqs: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut nes: BTreeSet<(usize, usize)> = BTreeSet::new();
        for lit in lits {
            match lit.atom {
                Atom::Member { var, set } => {
                    let m = self.symbol_mask(&set);
                    if lit.positive {
                        dom[var] &= m;
                    } else {
                        dom[var] &= !m;
                    }
                }
                Atom::Cmp { lhs: Term::Var(a), op, rhs: Term::Var(b) } => match op {
                    CmpOp::Eq if a != b => {
                        eqs.insert((a, b));
                    }
                    CmpOp::Eq => {}
                    CmpOp::Ne if a == b => return None,
                    CmpOp::Ne => {
                        nes.insert((a, b));
                    }
                    _ => {}
                },
                _ => {}
            }
        }
        if dom.contains(&0) {
            return None;
        }
        let assignment = finite_search(&dom, &eqs, &nes)?;
        let mut cube = Vec::new();
        for (var, d) in dom.iter().enumerate() {
            if *d != full {
                let set = (0..n).filter(|i| d >> i & 1 == 1).map(|i| alphabet.symbols[i].clone()).collect();
                cube.push(Literal { atom: Atom::Member { var, set }, positive: true });
            }
        }
        for (a, b) in eqs {
            cube.push(Literal {
                atom: Atom::Cmp { lhs: Term::Var(a), op: CmpOp::Eq, rhs: Term::Var(b) },
                positive: true,
            });
        }
        for (a, b) in nes {
            cube.push(Literal {
                atom: Atom::Cmp { lhs: Term::Var(a), op: CmpOp::Ne, rhs: Term::Var(b) },
                positive: true,
            });
        }
        let block = (0..vars)
            .map(|i| Letter::Sym(alphabet.symbols[assignment[vars - 1 - i]].clone()))
            .collect();
        Some((cube, Some(block)))
    }

    fn dense_cube(&self, lits: BTreeSet<Literal<S>>) -> Option<(Cube<S>, Option<Vec<Letter<S>>>)> {
        let mut cube = Vec::new();
        let mut constraints = Vec::new();
        for lit in lits {
            let Atom::Cmp { lhs, op, rhs } = &lit.atom else { continue };
            let node = |t: &Term<S>| match t {
                Term::Var(j) => Some(Node::Var(*j)),
                Term::Const(c) => Some(Node::Const(c.clone())),
                Term::Min { .. } => None,
            };
            let (Some(a), Some(b)) = (node(lhs), node(rhs)) else { continue };
            if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
                if op.holds(x.cmp(y)) {
                    continue;
                }
                return None;
            }
            if a == b {
                if matches!(op, CmpOp::Lt | CmpOp::Ne) {
                    return None;
                }
                continue;
            }
            let rel = match op {
                CmpOp::Lt => Rel::Lt,
                CmpOp::Le => Rel::Le,
                CmpOp::Eq => Rel::Eq,
                CmpOp::Ne => Rel::Ne,
                CmpOp::Gt | CmpOp::Ge => unreachable!("oriented"),
            };
            constraints.push(Constraint { lhs: a, rel, rhs: b });
            cube.push(lit);
        }
        let model = order::solve(&constraints)?;
        let vars = self.lookback + 1;
        let block = (0..vars)
            .map(|i| Letter::Num(model.get(&(vars - 1 - i)).cloned().unwrap_or_else(S::zero)))
            .collect();
        Some((cube, Some(block)))
    }

    fn check_budget(&self, len: usize) -> Result<()> {
        if len > self.budget {
            Err(Error::Resource(format!("DNF exceeds {} cubes", self.budget)))
        } else {
            Ok(())
        }
    }

    pub(crate) fn dnf(&self, p: &Predicate<S>) -> Result<Vec<Cube<S>>> {
        self.dnf_signed(p, true)
    }

    fn dnf_signed(&self, p: &Predicate<S>, positive: bool) -> Result<Vec<Cube<S>>> {
        match (p, positive) {
            (Predicate::True, true) | (Predicate::False, false) => Ok(vec![Vec::new()]),
            (Predicate::True, false) | (Predicate::False, true) => Ok(Vec::new()),
            (Predicate::Atom(a), _) => Ok(self
                .simplify_cube(vec![Literal { atom: a.clone(), positive }])
                .into_iter()
                .collect()),
            (Predicate::Not(q), _) => self.dnf_signed(q, !positive),
            (Predicate::And(ps), true) | (Predicate::Or(ps), false) => {
                let mut acc = vec![Vec::new()];
                for q in ps {
                    let d = self.dnf_signed(q, positive)?;
                    acc = self.dnf_and(&acc, &d)?;
                    if acc.is_empty() {
                        break;
                    }
                }
                Ok(acc)
            }
            (Predicate::Or(ps), true) | (Predicate::And(ps), false) => {
                let mut acc = Vec::new();
                for q in ps {
                    acc.extend(self.dnf_signed(q, positive)?);
                    self.check_budget(acc.len())?;
                }
                Ok(prune(acc))
            }
        }
    }

    pub(crate) fn dnf_and(&self, a: &[Cube<S>], b: &[Cube<S>]) -> Result<Vec<Cube<S>>> {
        let mut out = Vec::new();
        for ca in a {
            for cb in b {
                let mut lits = ca.clone();
                lits.extend(cb.iter().cloned());
                if let Some(c) = self.simplify_cube(lits) {
                    out.push(c);
                    self.check_budget(out.len())?;
                }
            }
        }
        Ok(prune(out))
    }

    pub(crate) fn dnf_to_predicate(cubes: &[Cube<S>]) -> Predicate<S> {
        Predicate::any(
            cubes
                .iter()
                .map(|c| Predicate::all(c.iter().map(Literal::to_predicate))),
        )
    }
}

fn custom_cube<S: Scalar>(lits: BTreeSet<Literal<S>>) -> Option<Cube<S>> {
    for lit in &lits {
        let mut flipped = lit.clone();
        flipped.positive = !lit.positive;
        if lits.contains(&flipped) {
            return None;
        }
        if let Atom::Cmp { lhs, op: CmpOp::Eq, rhs } = &lit.atom {
            let ne = Literal { atom: Atom::Cmp { lhs: lhs.clone(), op: CmpOp::Ne, rhs: rhs.clone() }, positive: true };
            if lits.contains(&ne) {
                return None;
            }
        }
    }
    Some(lits.into_iter().collect())
}

/// Backtracking search for an assignment of symbol indices per variable
/// honouring domain masks and (dis)equalities.
fn finite_search(dom: &[u128], eqs: &BTreeSet<(usize, usize)>, nes: &BTreeSet<(usize, usize)>) -> Option<Vec<usize>> {
    let n = dom.len();
    let mut neighbours: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    for &(a, b) in eqs {
        neighbours.entry(a).or_default().push((b, true));
        neighbours.entry(b).or_default().push((a, true));
    }
    for &(a, b) in nes {
        neighbours.entry(a).or_default().push((b, false));
        neighbours.entry(b).or_default().push((a, false));
    }
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    fn go(
        var: usize,
        dom: &[u128],
        neighbours: &BTreeMap<usize, Vec<(usize, bool)>>,
        assignment: &mut Vec<Option<usize>>,
    ) -> bool {
        if var == dom.len() {
            return true;
        }
        for value in 0..128 {
            if dom[var] >> value & 1 == 0 {
                continue;
            }
            let ok = neighbours.get(&var).is_none_or(|ns| {
                ns.iter().all(|&(other, equal)| match assignment[other] {
                    Some(v) => (v == value) == equal,
                    None => true,
                })
            });
            if ok {
                assignment[var] = Some(value);
                if go(var + 1, dom, neighbours, assignment) {
                    return true;
                }
                assignment[var] = None;
            }
        }
        false
    }
    if go(0, dom, &neighbours, &mut assignment) {
        Some(assignment.into_iter().map(|v| v.unwrap()).collect())
    } else {
        None
    }
}

/// Drops duplicate cubes and cubes subsumed by a smaller one.
fn prune<S: Ord + Clone>(mut cubes: Vec<Cube<S>>) -> Vec<Cube<S>> {
    cubes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    cubes.dedup();
    if cubes.len() > 512 {
        return cubes;
    }
    let mut kept: Vec<Cube<S>> = Vec::new();
    'outer: for c in cubes {
        for k in &kept {
            if k.iter().all(|lit| c.binary_search(lit).is_ok()) {
                continue 'outer;
            }
        }
        kept.push(c);
    }
    kept
}
