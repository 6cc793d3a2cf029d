use super::*;
use crate::testing::*;
use crate::theory::{num_word, word};

const EVEN: &str = "exists X <= xe . X(xb) & !X(xe) & forall x <= xe . forall y <= xe . \
    (!(xb <= x & x < y & !(exists z <= xe . x < z & z < y)) | (X(x) & !X(y)) | (!X(x) & X(y)))";

pub(crate) const FINITE_FORMULAS: &[(usize, &str)] = &[
    (0, "[x0 in{a}](xb) & [x0 in{b}](xe)"),
    (0, "forall x <= xe . (x < xb | [x0 in{a}](x))"),
    (0, "exists x <= xe . xb < x & x < xe & [x0 in{b}](x)"),
    (0, "xb = xe"),
    (0, "xe < xb"),
    (0, "exists y <= xe . [x0 in{b}](y) & !(exists x <= xe . x < y & [x0 in{b}](x)) & xb = y"),
    (0, EVEN),
    (1, "[x0 = x-1](xe) & [x0 != x-1](xb)"),
    (1, "forall x <= xe . [x0 in{a}](x)"),
    (1, "exists x <= xe . x < xb & [x-1 in{b} && x0 in{b}](x)"),
];

const DENSE_FORMULAS: &[(usize, &str)] = &[
    (0, "[x0 > 2](xb) & forall x <= xe . (x < xb | [x0 > 1](x))"),
    (1, "forall x <= xe . (x <= xb | [x0 > x-1](x))"),
    (1, "[x0 < x-1](xb) & exists x <= xe . xb < x & [x0 = 0](x)"),
];

fn formula(text: &str, t: &Theory<Q>) -> GuardedFormula<Q> {
    GuardedFormula::parse(text, t).unwrap_or_else(|e| panic!("{text}: {e}"))
}

#[test]
fn parse_errors() {
    let t = ab(0);
    assert!(matches!(GuardedFormula::parse("exists x . [x0 in{a}](x)", &t), Err(Error::Fragment(_))));
    assert!(matches!(GuardedFormula::parse("exists x <= xb . [x0 in{a}](x)", &t), Err(Error::Fragment(_))));
    assert!(matches!(GuardedFormula::parse("exists xe <= xe . xb < xe", &t), Err(Error::Fragment(_))));
    assert!(matches!(GuardedFormula::parse("[x0 in{a}](y)", &t), Err(Error::Scope(_))));
    assert!(matches!(GuardedFormula::parse("Y(xb)", &t), Err(Error::Scope(_))));
    assert!(matches!(GuardedFormula::parse("xb <", &t), Err(Error::Syntax { .. })));
    assert!(matches!(GuardedFormula::parse("[x0 in{c}](xb)", &t), Err(Error::MalformedPredicate(_))));
}

#[test]
fn printing_round_trips() {
    for &(k, text) in FINITE_FORMULAS {
        let t = ab(k);
        let f = formula(text, &t);
        let printed = f.to_string();
        assert_eq!(formula(&printed, &t), f, "{text} printed as {printed}");
    }
}

#[test]
fn eval_examples() {
    let t = ab(0);
    let f = formula("[x0 in{a}](xb) & [x0 in{b}](xe)", &t);
    let w = word("aab");
    assert!(eval_formula(&w, &f, &Assignment::window(0, 2)).unwrap());
    assert!(!eval_formula(&w, &f, &Assignment::window(0, 1)).unwrap());
    assert!(matches!(eval_formula(&w, &f, &Assignment::window(0, 3)), Err(Error::Assignment(_))));
    assert!(matches!(eval_formula(&w, &f, &Assignment::default()), Err(Error::Assignment(_))));
    let even = formula(EVEN, &t);
    let w = word("abab");
    assert!(eval_formula(&w, &even, &Assignment::window(0, 1)).unwrap());
    assert!(!eval_formula(&w, &even, &Assignment::window(0, 2)).unwrap());
    assert!(eval_formula(&w, &even, &Assignment::window(0, 3)).unwrap());
}

#[test]
fn atoms_before_a_full_block_are_false() {
    let t = ab(1);
    let f = formula("[true](xb)", &t);
    let w = word("ab");
    assert!(!eval_formula(&w, &f, &Assignment::window(0, 1)).unwrap());
    assert!(eval_formula(&w, &f, &Assignment::window(1, 1)).unwrap());
}

#[test]
fn bruteforce_windows_of_a_simple_formula() {
    let t = ab(0);
    let f = formula("[x0 in{a}](xb) & [x0 in{b}](xe)", &t);
    let got = windows_bruteforce(&word("abab"), &f).unwrap();
    assert_eq!(got, [(0, 1), (0, 3), (2, 3)].into());
}

#[test]
fn marked_automaton_agrees_with_evaluation() {
    for &(k, text) in FINITE_FORMULAS {
        let t = ab(k);
        let f = formula(text, &t);
        let m = f.marked_automaton().unwrap();
        assert!(m.is_deterministic());
        for w in t.words_up_to(5).unwrap() {
            for e in k..w.len() {
                for b in k..=e {
                    let mut marks = vec![0u64; e + 1];
                    marks[b] |= 1;
                    marks[e] |= 2;
                    let expected = eval_formula(&w[..=e], &f, &Assignment::window(b, e)).unwrap();
                    assert_eq!(m.accepts_tracked(&w[..=e], &marks), expected, "{text} on {w:?} ({b},{e})");
                }
            }
        }
    }
}

#[test]
fn compiled_pairs_recognize_the_finite_windows() {
    for &(k, text) in FINITE_FORMULAS {
        let t = ab(k);
        let f = formula(text, &t);
        let expr = f.compile().unwrap();
        for pair in expr.pairs() {
            assert!(pair.prefix.is_deterministic() && pair.window.is_deterministic());
            assert!(pair.prefix.is_clean().unwrap() && pair.window.is_clean().unwrap());
        }
        for w in t.words_up_to(6).unwrap() {
            assert_eq!(expr.recognized_bounds(&w), windows_bruteforce(&w, &f).unwrap(), "{text} on {w:?}");
        }
    }
}

#[test]
fn compiled_pairs_recognize_the_dense_windows() {
    let mut r = rng(5);
    for &(k, text) in DENSE_FORMULAS {
        let t = dense(k);
        let f = formula(text, &t);
        let expr = f.compile().unwrap();
        for _ in 0..300 {
            let w = random_num_word(&mut r, 6, 4);
            assert_eq!(expr.recognized_bounds(&w), windows_bruteforce(&w, &f).unwrap(), "{text} on {w:?}");
        }
    }
}

#[test]
fn unsatisfiable_formula_has_no_pairs() {
    let t = ab(0);
    assert!(formula("xe < xb", &t).compile().unwrap().pairs().is_empty());
}

#[test]
fn custom_theories_cannot_compile() {
    let f = formula("[x0 = 1](xb)", &Theory::<Q>::custom(0));
    assert!(matches!(f.compile(), Err(Error::CapabilityMissing(_))));
}

#[test]
fn window_expression_json_round_trip() {
    let t = dense(1);
    let expr = formula("[x0 > x-1](xb) & [x0 < x-1](xe)", &t).compile().unwrap();
    let back = WindowExpression::<Q>::from_json_str(&expr.to_json_string()).unwrap();
    assert_eq!(back.to_json_string(), expr.to_json_string());
    let w = num_word(&[0, 1, 2, 1]);
    assert_eq!(back.recognized(&w), expr.recognized(&w));
    assert!(WindowExpression::<Q>::from_json_str("{}").is_err());
}
