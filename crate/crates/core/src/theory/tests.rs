use num_rational::BigRational;
use proptest::prelude::*;

use super::*;

type Q = BigRational;

fn ab(k: usize) -> Theory<Q> {
    Theory::finite(Alphabet::new(["a", "b"]).unwrap(), k)
}

fn q(n: i64) -> Q {
    Q::from_int(n)
}

#[test]
fn dense_order_atom_evaluates() {
    let t = Theory::<Q>::dense_order(1);
    let p = t.parse("x0 > x-1").unwrap();
    let v = LookbackValuation::from_word(&num_word(&[1, 2]));
    assert!(t.eval(&p, &v).unwrap());
    assert!(t.eval(&Predicate::True, &v).unwrap());
}

#[test]
fn finite_membership_evaluates() {
    let t = ab(1);
    let p = t.parse("x0 in{b} && !(x-1 in{b})").unwrap();
    assert!(t.eval(&p, &LookbackValuation::from_word(&word("ab"))).unwrap());
    assert!(!t.eval(&p, &LookbackValuation::from_word(&word("bb"))).unwrap());
}

#[test]
fn out_of_range_variable_is_malformed() {
    let t = Theory::<Q>::dense_order(1);
    let p = parse_predicate_text::<Q>("x-2 < x0").unwrap();
    let v = LookbackValuation::from_word(&num_word(&[1, 2]));
    assert!(matches!(t.eval(&p, &v), Err(Error::MalformedPredicate(_))));
    assert!(matches!(t.parse("x-2 < x0"), Err(Error::MalformedPredicate(_))));
}

#[test]
fn theory_rejects_foreign_atoms() {
    assert!(ab(0).parse("x0 < 3").is_err());
    assert!(ab(0).parse("x0 in{c}").is_err());
    assert!(Theory::<Q>::dense_order(0).parse("x0 in{a}").is_err());
    assert!(Theory::<Q>::dense_order(2).parse("min(x-2,x-1) < x0").is_err());
    assert!(Theory::<Q>::custom(2).parse("min(x-2,x-1) < x0").is_ok());
}

#[test]
fn disjoint_memberships_are_unsat() {
    let t = ab(0);
    let p = t.parse("x0 in{a} && x0 in{b}").unwrap();
    assert_eq!(t.is_satisfiable(&p).unwrap(), (false, None));
}

#[test]
fn antisymmetry_is_unsat() {
    let t = Theory::<Q>::dense_order(1);
    let p = t.parse("x-1 < x0 && x0 < x-1").unwrap();
    assert_eq!(t.is_satisfiable(&p).unwrap(), (false, None));
}

#[test]
fn rising_chain_has_checked_witness() {
    let t = Theory::<Q>::dense_order(2);
    let p = t.parse("x-2 < x-1 && x-1 < x0 && x-2 < x0").unwrap();
    let (sat, witness) = t.is_satisfiable(&p).unwrap();
    assert!(sat);
    let w = witness.unwrap();
    assert!(t.eval(&p, &w).unwrap());
    let values: Vec<_> = (0..=2).rev().map(|j| w.get(j).unwrap().as_num().unwrap().clone()).collect();
    assert!(values[0] < values[1] && values[1] < values[2]);
}

#[test]
fn witness_respects_constants() {
    let t = Theory::<Q>::dense_order(1);
    let p = t.parse("3/2 < x0 && x0 < 2 && x-1 >= 7 && x-1 != 7").unwrap();
    let (sat, w) = t.is_satisfiable(&p).unwrap();
    assert!(sat);
    assert!(t.eval(&p, &w.unwrap()).unwrap());
}

#[test]
fn custom_theory_cannot_decide() {
    let t = Theory::<Q>::custom(0);
    assert!(matches!(t.is_satisfiable(&Predicate::True), Err(Error::CapabilityMissing(_))));
    let p = t.parse("x0 < 1 && !(x0 < 1)").unwrap();
    assert!(t.definitely_unsat(&p).unwrap());
}

#[test]
fn combine_not_top_is_unsat() {
    let t = ab(0);
    let p = t.combine(BoolOp::Not, vec![Predicate::True]).unwrap();
    assert!(!t.sat(&p).unwrap());
    assert!(t.combine(BoolOp::Not, vec![]).is_err());
    let foreign = Theory::<Q>::dense_order(0).parse("x0 < 1").unwrap();
    assert!(matches!(t.combine(BoolOp::And, vec![foreign]), Err(Error::TheoryMismatch(_))));
}

#[test]
fn enumerate_letters_in_declaration_order() {
    assert_eq!(ab(0).enumerate_letters().unwrap(), word::<Q>("ab"));
    let single = Theory::<Q>::finite(Alphabet::new(["a"]).unwrap(), 0);
    assert_eq!(single.enumerate_letters().unwrap(), word::<Q>("a"));
    assert!(matches!(
        Theory::<Q>::dense_order(0).enumerate_letters(),
        Err(Error::CapabilityMissing(_))
    ));
}

#[test]
fn budget_overflow_is_a_resource_error() {
    let t = ab(3).with_budget(4);
    let p = t
        .parse("(x0 in{a} || x-1 in{a}) && (x-2 in{a} || x-3 in{a}) && (x0 = x-1 || x-2 = x-3)")
        .unwrap();
    assert!(matches!(t.sat(&p), Err(Error::Resource(_))));
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_predicate_text::<Q>("x0 in{a") {
        Err(Error::Syntax { line: 1, column, .. }) => assert_eq!(column, 8),
        other => panic!("{other:?}"),
    }
    assert!(parse_predicate_text::<Q>("x0 <").is_err());
    assert!(parse_predicate_text::<Q>("").is_err());
}

#[test]
fn printing_examples() {
    let p = parse_predicate_text::<Q>("!(x0 >= -3/2) || x-1 in{a,\"b c\"} && @0").unwrap();
    assert_eq!(p.to_string(), "!(x0 >= -3/2) || x-1 in{a,\"b c\"} && @0");
}

#[test]
fn track_projection() {
    let t = ab(0).with_tracks(1);
    let p = t.parse("@0 && x0 in{a} || !@0 && x0 in{b}").unwrap();
    assert!(t.sat(&p.assign_track(0, true)).unwrap());
    let projected = p.project_track(0);
    assert!(!projected.mentions_track(0));
    assert!(!t.sat(&projected.negate()).unwrap());
}

// Random predicates over a fixed atom pool.

fn finite_atoms(k: usize) -> Vec<Atom<Q>> {
    let mut atoms = Vec::new();
    for j in 0..=k {
        atoms.push(Atom::Member { var: j, set: [Symbol::new("a")].into() });
        atoms.push(Atom::Member { var: j, set: [Symbol::new("b")].into() });
        atoms.push(Atom::Member { var: j, set: [Symbol::new("a"), Symbol::new("c")].into() });
    }
    for a in 0..=k {
        for b in a + 1..=k {
            atoms.push(Atom::Cmp { lhs: Term::Var(a), op: CmpOp::Eq, rhs: Term::Var(b) });
            atoms.push(Atom::Cmp { lhs: Term::Var(b), op: CmpOp::Ne, rhs: Term::Var(a) });
        }
    }
    atoms
}

fn dense_atoms(k: usize) -> Vec<Atom<Q>> {
    let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge];
    let mut terms: Vec<Term<Q>> = (0..=k).map(Term::Var).collect();
    terms.push(Term::Const(q(0)));
    terms.push(Term::Const(Q::new(3.into(), 2.into())));
    let mut atoms = Vec::new();
    for l in &terms {
        for r in &terms {
            if matches!((l, r), (Term::Const(_), Term::Const(_))) || l == r {
                continue;
            }
            for op in ops {
                atoms.push(Atom::Cmp { lhs: l.clone(), op, rhs: r.clone() });
            }
        }
    }
    atoms
}

fn predicate_strategy(atoms: Vec<Atom<Q>>, max_atoms: u32) -> impl Strategy<Value = Predicate<Q>> {
    let n = atoms.len();
    let leaf = prop_oneof![
        8 => (0..n).prop_map(move |i| Predicate::Atom(atoms[i].clone())),
        1 => Just(Predicate::True),
        1 => Just(Predicate::False),
    ];
    leaf.prop_recursive(3, max_atoms, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|p| Predicate::Not(Box::new(p))),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Predicate::And),
            prop::collection::vec(inner, 2..=3).prop_map(Predicate::Or),
        ]
    })
}

fn all_words(alphabet: &[&str], len: usize) -> Vec<Vec<Letter<Q>>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |s| {
                    let mut w = w.clone();
                    w.push(Letter::sym(s));
                    w
                })
            })
            .collect();
    }
    out
}

/// Candidate values realizing every weak ordering of `vars` variables
/// relative to the constants 0 and 3/2.
fn dense_grid(vars: usize) -> Vec<Q> {
    let consts = [q(0), Q::new(3.into(), 2.into())];
    let mut grid = consts.to_vec();
    for i in 1..=vars as i64 {
        grid.push(q(-i));
        grid.push(q(1) + q(i));
        grid.push(Q::new(3.into(), 2.into()) * q(i) / q(vars as i64 + 1));
    }
    grid
}

fn dense_assignments(vars: usize) -> Vec<Vec<Letter<Q>>> {
    let grid = dense_grid(vars);
    let mut out = vec![Vec::new()];
    for _ in 0..vars {
        out = out
            .into_iter()
            .flat_map(|w: Vec<Letter<Q>>| {
                grid.iter().map(move |v| {
                    let mut w = w.clone();
                    w.push(Letter::Num(v.clone()));
                    w
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn finite_sat_matches_enumeration(p in predicate_strategy(finite_atoms(1), 6)) {
        let t = Theory::<Q>::finite(Alphabet::new(["a", "b", "c"]).unwrap(), 1);
        let oracle = all_words(&["a", "b", "c"], 2).iter().any(|w| p.eval_block(w, 0));
        let (sat, witness) = t.is_satisfiable(&p).unwrap();
        prop_assert_eq!(sat, oracle);
        if let Some(w) = witness {
            prop_assert!(t.eval(&p, &w).unwrap());
        }
    }

    #[test]
    fn dense_sat_matches_weak_orderings(p in predicate_strategy(dense_atoms(2), 6)) {
        let t = Theory::<Q>::dense_order(2);
        let oracle = dense_assignments(3).iter().any(|w| p.eval_block(w, 0));
        let (sat, witness) = t.is_satisfiable(&p).unwrap();
        prop_assert_eq!(sat, oracle);
        if let Some(w) = witness {
            prop_assert!(t.eval(&p, &w).unwrap());
        }
    }

    #[test]
    fn simplify_preserves_meaning(p in predicate_strategy(finite_atoms(1), 8)) {
        let t = Theory::<Q>::finite(Alphabet::new(["a", "b", "c"]).unwrap(), 1);
        let s = t.simplify(&p).unwrap();
        for w in all_words(&["a", "b", "c"], 2) {
            prop_assert_eq!(p.eval_block(&w, 0), s.eval_block(&w, 0));
        }
    }

    #[test]
    fn dense_simplify_preserves_meaning(p in predicate_strategy(dense_atoms(1), 8)) {
        let t = Theory::<Q>::dense_order(1);
        let s = t.simplify(&p).unwrap();
        for w in dense_assignments(2) {
            prop_assert_eq!(p.eval_block(&w, 0), s.eval_block(&w, 0));
        }
    }

    #[test]
    fn connectives_are_boolean(
        p in predicate_strategy(dense_atoms(1), 6),
        r in predicate_strategy(dense_atoms(1), 6),
        a in -2i64..3,
        b in -2i64..3,
    ) {
        let t = Theory::<Q>::dense_order(1);
        let v = LookbackValuation::from_word(&num_word(&[a, b]));
        let pv = t.eval(&p, &v).unwrap();
        let rv = t.eval(&r, &v).unwrap();
        let not = t.combine(BoolOp::Not, vec![p.clone()]).unwrap();
        let and = t.combine(BoolOp::And, vec![p.clone(), r.clone()]).unwrap();
        let or = t.combine(BoolOp::Or, vec![p.clone(), r.clone()]).unwrap();
        let top = t.combine(BoolOp::And, vec![p.clone(), Predicate::True]).unwrap();
        let excluded = t.combine(BoolOp::Or, vec![p.clone(), not.clone()]).unwrap();
        prop_assert_eq!(t.eval(&not, &v).unwrap(), !pv);
        prop_assert_eq!(t.eval(&and, &v).unwrap(), pv && rv);
        prop_assert_eq!(t.eval(&or, &v).unwrap(), pv || rv);
        prop_assert_eq!(t.eval(&top, &v).unwrap(), pv);
        prop_assert!(t.eval(&excluded, &v).unwrap());
    }

    #[test]
    fn print_parse_round_trip(p in predicate_strategy(dense_atoms(2), 8)) {
        let text = p.to_string();
        let back = parse_predicate_text::<Q>(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn finite_print_parse_round_trip(p in predicate_strategy(finite_atoms(2), 8)) {
        let back = parse_predicate_text::<Q>(&p.to_string()).unwrap();
        prop_assert_eq!(back, p);
    }
}
