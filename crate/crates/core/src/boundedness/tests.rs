use super::*;
use crate::error::Error;
use crate::processor::{Count, Processor};
use crate::smso::{WindowExpression, WindowPair};
use crate::testing::*;
use crate::theory::{num_word, word, Predicate, Theory};

fn det(text: &str, t: &Theory<Q>) -> Ksla<Q> {
    compile(text, t).determinize().unwrap().trim()
}

/// Final states `0..limit` count the trailing `a`s; `limit` is a sink.
fn no_run_of_a(limit: usize) -> Ksla<Q> {
    let t = ab(0);
    let mut s = Ksla::new(t.clone(), limit + 1, 0);
    for q in 0..limit {
        s.set_final(q, true);
        s.add_transition(q, q + 1, t.parse("x0 in{a}").unwrap()).unwrap();
        s.add_transition(q, 0, t.parse("x0 in{b}").unwrap()).unwrap();
    }
    s.add_transition(limit, limit, Predicate::True).unwrap();
    s
}

/// Accepts streams with at most `limit` letters `b`.
fn few_b(limit: usize) -> Ksla<Q> {
    let t = ab(0);
    let mut s = Ksla::new(t.clone(), limit + 2, 0);
    for q in 0..=limit {
        s.set_final(q, true);
        s.add_transition(q, q, t.parse("x0 in{a}").unwrap()).unwrap();
        s.add_transition(q, q + 1, t.parse("x0 in{b}").unwrap()).unwrap();
    }
    s.add_transition(limit + 1, limit + 1, Predicate::True).unwrap();
    s
}

fn spec(a: &Ksla<Q>) -> InputSpecifier<Q> {
    validate_input_specifier(a).unwrap()
}

fn pair_expr(pa: &Ksla<Q>, wa: &Ksla<Q>) -> WindowExpression<Q> {
    WindowExpression::new(pa.theory().clone(), vec![WindowPair { prefix: pa.clone(), window: wa.clone() }]).unwrap()
}

/// Starts tracked after reading `w1 w2^reps`.
fn pumped(pa: &Ksla<Q>, wa: &Ksla<Q>, w: &Witness<Q>, reps: usize) -> usize {
    let mut p = Processor::new(pair_expr(pa, wa), Count::new()).unwrap();
    let stream = w.w1.iter().chain(std::iter::repeat_n(&w.w2, reps).flatten());
    for l in stream {
        p.step(l.clone(), &l.clone()).unwrap();
    }
    p.tracked_indices()
}

#[test]
fn specifier_zones() {
    let t = ab(0);
    assert!(validate_input_specifier(&Ksla::universal(t.clone())).is_ok());
    let mut parity = Ksla::new(t.clone(), 2, 0);
    parity.set_final(0, true);
    parity.add_transition(0, 1, Predicate::True).unwrap();
    parity.add_transition(1, 0, Predicate::True).unwrap();
    assert!(matches!(validate_input_specifier(&parity), Err(Error::ZoneViolation(_))));
    let s = spec(&no_run_of_a(3));
    assert!(s.conforms(&word("aabaab")));
    assert!(!s.conforms(&word("baaab")));
    assert!(s.conforms(&[]));
}

#[test]
fn witness_verification() {
    let t = ab(0);
    let pa = det("([x0 in{a}] + [x0 in{b}])*", &t);
    let wa = det("[x0 in{a}]* . [x0 in{b}]", &t);
    let u = Ksla::universal(t.clone());
    let q = wa.step(wa.initial(), &word("a"), 0).unwrap();
    assert!(verify_witness(&pa, &wa, &u, &word("a"), &word("a"), &word("a"), q));
    assert!(verify_witness(&pa, &wa, &u, &word("ba"), &word("aa"), &word("a"), q));
    assert!(!verify_witness(&pa, &wa, &u, &word("a"), &word("b"), &word("a"), q));
    assert!(!verify_witness(&pa, &wa, &u, &word("a"), &word("a"), &word("a"), 7));
    let complete = wa.complete().unwrap();
    let sink = complete.dead_states().into_iter().next().unwrap();
    assert!(!verify_witness(&pa, &complete, &u, &word("b"), &word("b"), &word("b"), sink));
    // The specifier must loop on w2 as well.
    let limited = few_b(1);
    assert!(!verify_witness(&pa, &wa, &limited, &word("a"), &word("b"), &word("b"), q));
}

#[test]
fn a_star_b_is_unbounded_on_every_stream() {
    let t = ab(0);
    let pa = det("([x0 in{a}] + [x0 in{b}])*", &t);
    let wa = det("[x0 in{a}]* . [x0 in{b}]", &t);
    let v = check_bounded_finite(&pa, &wa, &InputSpecifier::universal(t.clone())).unwrap();
    let Verdict::Unbounded(w) = v else { panic!("expected a witness, got {v:?}") };
    assert!(verify_witness(&pa, &wa, &Ksla::universal(t), &w.w1, &w.w2, &w.w3, w.state));
    for reps in [3, 6, 9] {
        assert!(pumped(&pa, &wa, &w, reps) >= reps);
    }
}

#[test]
fn forbidding_long_runs_bounds_a_star_b() {
    let t = ab(0);
    let pa = det("([x0 in{a}] + [x0 in{b}])*", &t);
    let wa = det("[x0 in{a}]* . [x0 in{b}]", &t);
    let s = spec(&no_run_of_a(3));
    let v = check_bounded_finite(&pa, &wa, &s).unwrap();
    let Verdict::Bounded(Some(b)) = v else { panic!("expected bounds, got {v:?}") };
    let sim = simulate_max_usage(&pair_expr(&pa, &wa), &s, 10, 1 << 20).unwrap();
    assert!(!sim.partial);
    assert_eq!((b.indices, b.panes), (sim.indices, sim.panes));
    assert_eq!(b.indices, 2);
}

#[test]
fn empty_window_language_is_bounded() {
    let t = ab(0);
    let pa = Ksla::universal(t.clone());
    let wa = Ksla::empty(t.clone());
    let v = check_bounded_finite(&pa, &wa, &InputSpecifier::universal(t)).unwrap();
    assert_eq!(v, Verdict::Bounded(Some(Bounds { indices: 0, panes: 1 })));
}

#[test]
fn simulation_growth() {
    let t = ab(0);
    let pa = det("([x0 in{a}] + [x0 in{b}])*", &t);
    let wa = det("[x0 in{a}]* . [x0 in{b}]", &t);
    let e = pair_expr(&pa, &wa);
    let universal = InputSpecifier::universal(t);
    let limited = spec(&no_run_of_a(3));
    let mut last = (0, 0);
    for h in [6, 9, 12] {
        let grow = simulate_max_usage(&e, &universal, h, 1 << 20).unwrap();
        let flat = simulate_max_usage(&e, &limited, h, 1 << 20).unwrap();
        assert_eq!(grow.indices, h);
        assert!(grow.indices > last.0);
        assert_eq!(flat.indices, 2);
        last = (grow.indices, flat.indices);
    }
    let capped = simulate_max_usage(&e, &universal, 12, 100).unwrap();
    assert!(capped.partial);
    assert_eq!(capped.streams, 100);
}

#[test]
fn lookback_windows() {
    // Windows of strictly increasing letters under a finite order a < b < c.
    let t = abc(1);
    let pa = det("[true]*", &t);
    let wa = det("([x-1 in{a} && x0 in{b}] + [x-1 in{b} && x0 in{c}])*", &t);
    let u = InputSpecifier::universal(t.clone());
    let v = check_bounded_finite(&pa, &wa, &u).unwrap();
    let Verdict::Bounded(Some(b)) = v else { panic!("expected bounds, got {v:?}") };
    let sim = simulate_max_usage(&pair_expr(&pa, &wa), &u, 7, 1 << 20).unwrap();
    assert_eq!(b.indices, sim.indices);
    assert_eq!(b.indices, 2);

    let wa = det("[x0 in{a}]*", &t);
    let v = check_bounded_finite(&pa, &wa, &u).unwrap();
    let Verdict::Unbounded(w) = v else { panic!("expected a witness, got {v:?}") };
    assert!(verify_witness(&pa, &wa, u.automaton(), &w.w1, &w.w2, &w.w3, w.state));
    assert!(pumped(&pa, &wa, &w, 5) >= 5);
}

#[test]
fn dense_rising_runs() {
    let t = dense(1);
    let pa = det("[true]*", &t);
    let wa = det("[x0 > x-1]*", &t);
    let u = InputSpecifier::universal(t.clone());
    let v = check_bounded_symbolic(&pa, &wa, &u, 4).unwrap();
    let Verdict::Unbounded(w) = v else { panic!("expected a witness, got {v:?}") };
    assert!(verify_witness(&pa, &wa, u.automaton(), &w.w1, &w.w2, &w.w3, w.state));
    assert!(rising_usage(&pa, &wa) >= 10);
    assert!(matches!(check_bounded_symbolic(&pa, &wa, &u, 0).unwrap(), Verdict::Unknown(_)));

    // A window that closes right after opening leaves nothing to find.
    let wa = det("[x0 > x-1]", &t);
    assert!(matches!(check_bounded_symbolic(&pa, &wa, &u, 3).unwrap(), Verdict::Unknown(_)));
}

/// Starts tracked after a strictly rising stream of twelve values.
fn rising_usage(pa: &Ksla<Q>, wa: &Ksla<Q>) -> usize {
    let mut p = Processor::new(pair_expr(pa, wa), Count::new()).unwrap();
    let values: Vec<i64> = (0..12).collect();
    for l in num_word::<Q>(&values) {
        p.step(l.clone(), &l).unwrap();
    }
    p.tracked_indices()
}

#[test]
fn custom_theories_are_unknown() {
    let t = Theory::<Q>::custom(0);
    let pa = Ksla::universal(t.clone());
    let wa = Ksla::universal(t.clone());
    let v = check_bounded_symbolic(&pa, &wa, &InputSpecifier::universal(t), 3).unwrap();
    assert!(matches!(v, Verdict::Unknown(reason) if reason.contains("completion property")));
}

#[test]
fn verdict_json() {
    let t = ab(0);
    let pa = det("([x0 in{a}] + [x0 in{b}])*", &t);
    let wa = det("[x0 in{a}]* . [x0 in{b}]", &t);
    let v = check_bounded_finite(&pa, &wa, &InputSpecifier::universal(t)).unwrap();
    let j = v.to_json();
    assert_eq!(j["verdict"], "unbounded");
    assert!(j["witness"]["w2"].as_array().is_some_and(|a| !a.is_empty()));
}

/// The verdict agrees with exhaustive simulation: unbounded iff the peak
/// keeps growing over horizons 6, 9 and 12, bounds are never exceeded, and
/// witnesses pump.
#[test]
fn checker_agrees_with_simulation() {
    let t = ab(0);
    let prefixes = ["([x0 in{a}] + [x0 in{b}])*", "[x0 in{a}]*", "([x0 in{a}] . [x0 in{b}])*"];
    let windows = [
        "[x0 in{a}]* . [x0 in{b}]",
        "([x0 in{a}] + [x0 in{b}])* . [x0 in{b}]",
        "[x0 in{a}] . [x0 in{b}]*",
        "[true]",
        "[x0 in{a}]*",
    ];
    let specs = [Ksla::universal(t.clone()), no_run_of_a(2), few_b(1)];
    let mut checked = 0;
    for p in prefixes {
        for wtext in windows {
            for s in &specs {
                let pa = det(p, &t);
                let wa = det(wtext, &t);
                let s = spec(s);
                let e = pair_expr(&pa, &wa);
                let peaks: Vec<usize> = [6, 9, 12]
                    .into_iter()
                    .map(|h| simulate_max_usage(&e, &s, h, 1 << 20).unwrap().indices)
                    .collect();
                let growing = peaks[0] < peaks[1] && peaks[1] < peaks[2];
                match check_bounded_finite(&pa, &wa, &s).unwrap() {
                    Verdict::Bounded(Some(b)) => {
                        assert!(!growing, "{p} / {wtext}: {peaks:?}");
                        assert!(peaks[2] <= b.indices, "{p} / {wtext}");
                    }
                    Verdict::Unbounded(w) => {
                        assert!(growing, "{p} / {wtext}: {peaks:?}");
                        assert!(verify_witness(&pa, &wa, s.automaton(), &w.w1, &w.w2, &w.w3, w.state));
                        for reps in 1..=5 {
                            let stream: Vec<_> =
                                w.w1.iter().chain(std::iter::repeat_n(&w.w2, reps).flatten()).cloned().collect();
                            assert!(s.conforms(&stream), "{p} / {wtext}");
                            assert!(pumped(&pa, &wa, &w, reps) >= reps, "{p} / {wtext}");
                        }
                    }
                    other => panic!("{p} / {wtext}: {other:?}"),
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 10);
}

#[test]
fn factor_avoiding_specifiers() {
    let t = ab(0);
    let built = avoiding_factor(&sre("[x0 in{a}] . [x0 in{a}] . [x0 in{a}]", &t)).unwrap();
    let by_hand = spec(&no_run_of_a(3));
    for w in t.words_up_to(7).unwrap() {
        assert_eq!(built.conforms(&w), by_hand.conforms(&w), "{w:?}");
    }
    let pa = det("([x0 in{a}] + [x0 in{b}])*", &t);
    let wa = det("[x0 in{a}]* . [x0 in{b}]", &t);
    let v = check_bounded_finite(&pa, &wa, &built).unwrap();
    assert_eq!(v, Verdict::Bounded(Some(Bounds { indices: 2, panes: 2 })));

    let t1 = ab(1);
    let rising = avoiding_factor(&sre("[x-1 in{b} && x0 in{a}]", &t1)).unwrap();
    assert!(rising.conforms(&word("aabbb")));
    assert!(!rising.conforms(&word("aaba")));
}
