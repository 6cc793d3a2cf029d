//! Satisfiability of conjunctions of order constraints over a dense
//! unbounded domain, with model construction.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Node<S> {
    Var(usize),
    Const(S),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Constraint<S> {
    pub lhs: Node<S>,
    pub rel: Rel,
    pub rhs: Node<S>,
}

/// Returns a model for every variable mentioned, or `None` when the
/// constraints are contradictory.
pub(crate) fn solve<S: Scalar>(constraints: &[Constraint<S>]) -> Option<BTreeMap<usize, S>> {
    let mut nodes: BTreeSet<Node<S>> = BTreeSet::new();
    for c in constraints {
        nodes.insert(c.lhs.clone());
        nodes.insert(c.rhs.clone());
    }
    let mut graph: DiGraph<Node<S>, bool> = DiGraph::new();
    let mut index: BTreeMap<Node<S>, NodeIndex> = BTreeMap::new();
    for n in &nodes {
        index.insert(n.clone(), graph.add_node(n.clone()));
    }
    // Constants are totally ordered among themselves; `nodes` iterates
    // variables first, then constants ascending.
    let consts: Vec<NodeIndex> = nodes
        .iter()
        .filter(|n| matches!(n, Node::Const(_)))
        .map(|n| index[n])
        .collect();
    for pair in consts.windows(2) {
        graph.add_edge(pair[0], pair[1], true);
    }
    let mut diseq = Vec::new();
    for c in constraints {
        let a = index[&c.lhs];
        let b = index[&c.rhs];
        match c.rel {
            Rel::Lt => {
                graph.add_edge(a, b, true);
            }
            Rel::Le => {
                graph.add_edge(a, b, false);
            }
            Rel::Eq => {
                graph.add_edge(a, b, false);
                graph.add_edge(b, a, false);
            }
            Rel::Ne => diseq.push((a, b)),
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut comp = vec![0usize; graph.node_count()];
    for (ci, scc) in sccs.iter().enumerate() {
        for &n in scc {
            comp[n.index()] = ci;
        }
    }
    for e in graph.edge_indices() {
        let (a, b) = graph.edge_endpoints(e).unwrap();
        if graph[e] && comp[a.index()] == comp[b.index()] {
            return None;
        }
    }
    if diseq.iter().any(|(a, b)| comp[a.index()] == comp[b.index()]) {
        return None;
    }

    // Tarjan emits components in reverse topological order.
    let order: Vec<usize> = (0..sccs.len()).rev().collect();
    let fixed: Vec<Option<S>> = sccs
        .iter()
        .map(|scc| {
            scc.iter().find_map(|n| match &graph[*n] {
                Node::Const(c) => Some(c.clone()),
                Node::Var(_) => None,
            })
        })
        .collect();
    let mut value: Vec<Option<S>> = vec![None; sccs.len()];
    let mut pending: Vec<usize> = Vec::new();
    let mut last: Option<S> = None;
    let assign_between = |pending: &mut Vec<usize>, value: &mut Vec<Option<S>>, lo: Option<&S>, hi: Option<&S>| {
        let m = pending.len() as i64;
        for (i, &ci) in pending.iter().enumerate() {
            let i = i as i64;
            let v = match (lo, hi) {
                (None, None) => S::from_int(i),
                (None, Some(h)) => h.clone() - S::from_int(m - i),
                (Some(l), None) => l.clone() + S::from_int(i + 1),
                (Some(l), Some(h)) => {
                    l.clone() + (h.clone() - l.clone()) * S::from_int(i + 1) / S::from_int(m + 1)
                }
            };
            value[ci] = Some(v);
        }
        pending.clear();
    };
    for &ci in &order {
        match &fixed[ci] {
            Some(c) => {
                assign_between(&mut pending, &mut value, last.as_ref(), Some(c));
                value[ci] = Some(c.clone());
                last = Some(c.clone());
            }
            None => pending.push(ci),
        }
    }
    assign_between(&mut pending, &mut value, last.as_ref(), None);

    let mut model = BTreeMap::new();
    for n in graph.node_indices() {
        if let Node::Var(v) = &graph[n] {
            model.insert(*v, value[comp[n.index()]].clone().expect("every component valued"));
        }
    }
    Some(model)
}

/// Checks a model against the constraints.
#[cfg(test)]
pub(crate) fn satisfies<S: Scalar>(constraints: &[Constraint<S>], model: &BTreeMap<usize, S>) -> bool {
    let val = |n: &Node<S>| match n {
        Node::Var(v) => model.get(v).cloned(),
        Node::Const(c) => Some(c.clone()),
    };
    constraints.iter().all(|c| match (val(&c.lhs), val(&c.rhs)) {
        (Some(a), Some(b)) => match c.rel {
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Eq => a == b,
            Rel::Ne => a != b,
        },
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn v(i: usize) -> Node<Q> {
        Node::Var(i)
    }

    fn c(i: i64) -> Node<Q> {
        Node::Const(Q::from_int(i))
    }

    fn k(lhs: Node<Q>, rel: Rel, rhs: Node<Q>) -> Constraint<Q> {
        Constraint { lhs, rel, rhs }
    }

    #[test]
    fn strict_cycle_is_unsat() {
        assert!(solve(&[k(v(0), Rel::Lt, v(1)), k(v(1), Rel::Le, v(0))]).is_none());
    }

    #[test]
    fn weak_cycle_forces_equality() {
        let cs = [k(v(0), Rel::Le, v(1)), k(v(1), Rel::Le, v(0))];
        let m = solve(&cs).unwrap();
        assert_eq!(m[&0], m[&1]);
        let mut with_ne = cs.to_vec();
        with_ne.push(k(v(0), Rel::Ne, v(1)));
        assert!(solve(&with_ne).is_none());
    }

    #[test]
    fn values_squeeze_between_constants() {
        let cs = [
            k(c(1), Rel::Lt, v(0)),
            k(v(0), Rel::Lt, v(1)),
            k(v(1), Rel::Lt, c(2)),
            k(v(2), Rel::Lt, c(1)),
            k(c(2), Rel::Lt, v(3)),
        ];
        let m = solve(&cs).unwrap();
        assert!(satisfies(&cs, &m));
    }

    #[test]
    fn constant_clash() {
        assert!(solve(&[k(v(0), Rel::Eq, c(1)), k(v(0), Rel::Eq, c(2))]).is_none());
        assert!(solve(&[k(c(2), Rel::Le, v(0)), k(v(0), Rel::Le, c(1))]).is_none());
    }
}
