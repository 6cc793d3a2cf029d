//! Acceptance criteria, one line each: `PASS [n] ...` or `FAIL [n] ...`.
//!
//! Run with `cargo test -p symwin-cli --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symwin::boundedness::{
    avoiding_factor, check_bounded_finite, simulate_max_usage, verify_witness, InputSpecifier, Verdict,
};
use symwin::processor::{run_stream, windows_oracle, AggValue, Count, NumericAgg, NumericOp, Processor};
use symwin::smso::{windows_bruteforce, GuardedFormula, WindowExpression};
use symwin::sre::Sre;
use symwin::theory::{num_word, Alphabet, Letter, Theory};
use symwin::{QLetter, QSre, QTheory, QWindowExpression, Q};
use symwin_cli::commands::{self, RunOptions};
use symwin_cli::Pipeline;

fn ab(k: usize) -> QTheory {
    Theory::finite(Alphabet::new(["a", "b"]).unwrap(), k)
}

fn sre_pairs(pairs: &[(&str, &str)], t: &QTheory) -> Vec<(QSre, QSre)> {
    pairs.iter().map(|(p, w)| (Sre::parse(p, t).unwrap(), Sre::parse(w, t).unwrap())).collect()
}

fn expr(pairs: &[(QSre, QSre)]) -> QWindowExpression {
    WindowExpression::from_sre_pairs(pairs).unwrap()
}

/// Windows by the denotation of the expressions themselves.
fn sre_windows(pairs: &[(QSre, QSre)], k: usize, w: &[QLetter]) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for (j, (p, win)) in pairs.iter().enumerate() {
        for b in k..w.len() {
            if p.membership(&w[..b]) {
                for e in b..w.len() {
                    if win.membership(&w[b - k..=e]) {
                        out.insert((j, b, e));
                    }
                }
            }
        }
    }
    out
}

fn emitted(e: &QWindowExpression, w: &[QLetter]) -> BTreeSet<(usize, usize, usize)> {
    let stream = w.iter().map(|l| (l.clone(), ()));
    run_stream(e.clone(), Count::new(), stream).unwrap().into_iter().map(|o| (o.pair, o.start, o.end)).collect()
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize, values: i64) -> Vec<QLetter> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| Letter::num(rng.gen_range(0..values))).collect()
}

fn processor_correctness() -> Result<String, String> {
    let corpus: [(usize, &[(&str, &str)]); 5] = [
        (0, &[("([x0 in{a}] + [x0 in{b}])*", "[x0 in{a}]* . [x0 in{b}]")]),
        (0, &[("[true]*", "[x0 in{a}]")]),
        (0, &[("[x0 in{b}]*", "[x0 in{b}]")]),
        (0, &[("[true]*", "[x0 in{a}]* . [x0 in{b}]"), ("[true]* . [x0 in{b}]", "[x0 in{a}] . [x0 in{a}]")]),
        (1, &[("[true]*", "[x0 != x-1] . [x0 = x-1]*")]),
    ];
    let mut words = 0;
    for (k, pairs) in corpus {
        let t = ab(k);
        let parsed = sre_pairs(pairs, &t);
        let e = expr(&parsed);
        for w in t.words_up_to(8).unwrap() {
            let got = emitted(&e, &w);
            if got != windows_oracle(&e, &w) || got != sre_windows(&parsed, k, &w) {
                return Err(format!("{pairs:?} on {w:?}"));
            }
            words += 1;
        }
    }
    Ok(format!("5 expressions, {words} word runs"))
}

fn closure_suite() -> Result<String, String> {
    let finite: [(usize, &[&str]); 2] = [
        (0, &["[x0 in{a}]* . [x0 in{b}]", "([x0 in{a}] . [x0 in{b}])*", "[x0 in{b}] + [x0 in{a}] . [x0 in{a}]", "[x0 in{a}]*"]),
        (1, &["[x0 = x-1]*", "[x-1 in{a} && x0 in{b}] . [true]*", "([x0 != x-1] + [x0 in{a}])* . [x0 in{b}]"]),
    ];
    let dense: [(usize, &[&str]); 2] = [
        (1, &["[x0 > x-1]*", "[x0 > x-1] . [x0 < x-1]", "([x0 >= x-1] + [x0 = 0])* . [x0 > 1]"]),
        (2, &["[x0 > x-1 && x-1 > x-2]*", "[x-1 > x-2 && x-1 > x0] . [true]*"]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checks = 0usize;
    let mut suite = |t: QTheory, texts: &[&str], words: Vec<Vec<QLetter>>| -> Result<(), String> {
        let k = t.lookback();
        let sres: Vec<QSre> = texts.iter().map(|s| Sre::parse(s, &t).unwrap()).collect();
        let autos: Vec<_> = sres.iter().map(|r| r.compile().unwrap()).collect();
        for (x, a) in sres.iter().zip(&autos) {
            let det = a.determinize().unwrap();
            let comp = a.complement().unwrap();
            for w in &words {
                let m = x.membership(w);
                if det.accepts(w) != m || comp.accepts(w) != (w.len() >= k && !m) {
                    return Err(format!("determinize/complement of {x} on {w:?}"));
                }
                checks += 2;
            }
            for (y, b) in sres.iter().zip(&autos) {
                let meet = a.product_intersect(b).unwrap();
                let join = a.union(b).unwrap();
                let cat = a.concat_k(b).unwrap();
                for w in &words {
                    let (mx, my) = (x.membership(w), y.membership(w));
                    let n = w.len();
                    let mc = n > k && (0..n - k).any(|m| x.membership(&w[..m + k]) && y.membership(&w[m..]));
                    if meet.accepts(w) != (mx && my) || join.accepts(w) != (mx || my) || cat.accepts(w) != mc {
                        return Err(format!("product/union/concat of {x} and {y} on {w:?}"));
                    }
                    checks += 3;
                }
            }
        }
        Ok(())
    };
    for (k, texts) in finite {
        let t = ab(k);
        let words = t.words_up_to(6).unwrap();
        suite(t, texts, words)?;
    }
    for (k, texts) in dense {
        let words = (0..1000).map(|_| random_word(&mut rng, 6, 3)).collect();
        suite(Theory::dense_order(k), texts, words)?;
    }
    Ok(format!("{checks} membership checks"))
}

fn formula_compilation() -> Result<String, String> {
    let t = ab(0);
    let formulas = [
        "[x0 in{b}](xe)",
        "!(exists x <= xe . xb <= x & x < xe & [x0 in{b}](x))",
        "exists x <= xe . xb < x & x < xe & [x0 in{a}](x)",
        "[x0 in{a}](xb) & forall x <= xe . (x <= xb | [x0 in{b}](x))",
        "exists X <= xe . X(xb) & X(xe) & forall x <= xe . (!X(x) | [x0 in{a}](x))",
        "exists X <= xe . X(xb) & !X(xe) & forall x <= xe . forall y <= xe . \
         (!(xb <= x & x < y & !(exists z <= xe . x < z & z < y)) | (X(x) & !X(y)) | (!X(x) & X(y)))",
    ];
    let words = t.words_up_to(6).unwrap();
    for text in formulas {
        let f = GuardedFormula::parse(text, &t).map_err(|e| format!("{text}: {e}"))?;
        let e = f.compile().map_err(|e| format!("{text}: {e}"))?;
        for w in &words {
            let got: BTreeSet<(usize, usize)> = e.recognized_bounds(w);
            if got != windows_bruteforce(w, &f).unwrap() {
                return Err(format!("{text} on {w:?}"));
            }
        }
    }
    Ok(format!("{} formulas", formulas.len()))
}

fn boundedness_predictions() -> Result<String, String> {
    let t = ab(0);
    let parsed = sre_pairs(&[("([x0 in{a}] + [x0 in{b}])*", "[x0 in{a}]* . [x0 in{b}]")], &t);
    let e = expr(&parsed);
    let pair = &e.pairs()[0];
    let universal = InputSpecifier::universal(t.clone());
    let no_aaa = avoiding_factor(&Sre::parse("[x0 in{a}] . [x0 in{a}] . [x0 in{a}]", &t).unwrap()).unwrap();

    let Verdict::Unbounded(w) = check_bounded_finite(&pair.prefix, &pair.window, &universal).unwrap() else {
        return Err("universal specifier is not unbounded".into());
    };
    if !verify_witness(&pair.prefix, &pair.window, universal.automaton(), &w.w1, &w.w2, &w.w3, w.state) {
        return Err("witness fails verification".into());
    }
    let mut p = Processor::new(e.clone(), Count::new()).unwrap();
    for l in w.w1.iter().chain(std::iter::repeat_n(&w.w2, 5).flatten()) {
        p.step(l.clone(), &()).unwrap();
    }
    if p.tracked_indices() < 5 {
        return Err(format!("{} tracked indices after 5 repetitions", p.tracked_indices()));
    }
    let bound = match check_bounded_finite(&pair.prefix, &pair.window, &no_aaa).unwrap() {
        Verdict::Bounded(b) => b,
        v => return Err(format!("no-aaa specifier gives {}", v.name())),
    };

    let peaks = |spec: &InputSpecifier<Q>| -> Vec<usize> {
        [6, 9, 12].iter().map(|&h| simulate_max_usage(&e, spec, h, 1 << 22).unwrap().indices).collect()
    };
    let grow = peaks(&universal);
    let flat = peaks(&no_aaa);
    if !(grow[0] < grow[1] && grow[1] < grow[2]) {
        return Err(format!("universal peaks {grow:?} do not grow"));
    }
    if flat.iter().any(|&x| x != flat[0]) {
        return Err(format!("no-aaa peaks {flat:?} are not stable"));
    }
    if let Some(b) = bound {
        if b.indices != flat[0] {
            return Err(format!("bound {} differs from simulated ceiling {}", b.indices, flat[0]));
        }
    }
    Ok(format!("{} tracked after pumping; peaks {grow:?} vs {flat:?}", p.tracked_indices()))
}

fn main_loop_invariant() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fin = ab(1);
    let dense: QTheory = Theory::dense_order(1);
    let cases = [
        (fin.clone(), vec![("[true]*", "[x0 != x-1] . [x0 = x-1]*")]),
        (ab(0), vec![("[true]*", "[x0 in{a}]* . [x0 in{b}]"), ("[true]* . [x0 in{b}]", "[x0 in{a}] . [x0 in{a}]")]),
        (dense.clone(), vec![("[true]*", "[x0 >= x-1]* . [x0 < x-1]")]),
        (dense, vec![("[true]* . [x0 > x-1]", "[x0 > x-1]* . [x0 <= x-1]")]),
    ];
    let mut steps = 0;
    for (t, pairs) in cases {
        let e = expr(&sre_pairs(&pairs, &t));
        let mut p = Processor::new(e, Count::new()).unwrap().with_debug_invariants();
        for _ in 0..10_000 {
            let l = match t.alphabet() {
                Some(_) => Letter::sym(if rng.gen_bool(0.5) { "a" } else { "b" }),
                None => Letter::num(rng.gen_range(0..4)),
            };
            p.step(l, &()).map_err(|e| format!("{pairs:?}: {e}"))?;
            steps += 1;
        }
    }
    Ok(format!("{steps} checked steps"))
}

fn pane_aggregation() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t: QTheory = Theory::dense_order(1);
    let e = expr(&sre_pairs(&[("[true]*", "[x0 >= x-1]* . [x0 < x-1]"), ("[x0 > 0]*", "[true] . [true]*")], &t));
    let mut windows = 0;
    for _ in 0..100 {
        let len = rng.gen_range(1..60);
        let values: Vec<Q> = (0..len).map(|_| Q::new(rng.gen_range(-50..50).into(), rng.gen_range(1..8).into())).collect();
        let w: Vec<QLetter> = values.iter().cloned().map(Letter::Num).collect();
        for op in NumericOp::ALL {
            let stream = w.iter().cloned().zip(values.iter().cloned());
            for o in run_stream(e.clone(), NumericAgg::<Q>::new(op), stream).unwrap() {
                let items = &values[o.start..=o.end];
                let exact = match op {
                    NumericOp::Count => AggValue::Count(items.len() as u64),
                    NumericOp::Sum => AggValue::Exact(items.iter().cloned().sum()),
                    NumericOp::Min => AggValue::Exact(items.iter().min().unwrap().clone()),
                    NumericOp::Max => AggValue::Exact(items.iter().max().unwrap().clone()),
                    NumericOp::First => AggValue::Exact(items[0].clone()),
                    NumericOp::Last => AggValue::Exact(items[items.len() - 1].clone()),
                    NumericOp::Average => {
                        let direct = items.iter().map(|v| v.to_f64().unwrap()).sum::<f64>() / items.len() as f64;
                        let AggValue::Float(got) = o.aggregate else {
                            return Err(format!("average gave {:?}", o.aggregate));
                        };
                        if (got - direct).abs() > 1e-9 * direct.abs().max(1.0) {
                            return Err(format!("average {got} vs {direct}"));
                        }
                        windows += 1;
                        continue;
                    }
                };
                if o.aggregate != exact {
                    return Err(format!("{} over {:?}: {:?} vs {exact:?}", op.name(), (o.start, o.end), o.aggregate));
                }
                windows += 1;
            }
        }
    }
    Ok(format!("{windows} window aggregates"))
}

fn run_config(config: &str, input: &str) -> Vec<(usize, usize)> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(config);
    let pipeline = Pipeline::load(&path).unwrap();
    let (mut out, mut diag) = (Vec::new(), Vec::new());
    commands::run(&pipeline, input.as_bytes(), &mut out, &mut diag, RunOptions::default()).unwrap();
    String::from_utf8(out)
        .unwrap()
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (v["start"].as_u64().unwrap() as usize, v["end"].as_u64().unwrap() as usize)
        })
        .collect()
}

fn examples() -> Result<String, String> {
    let stock = run_config("stock/config.toml", "price\n1\n2\n3\n2\n");
    if stock != [(1, 1), (2, 2)] {
        return Err(format!("stock windows {stock:?}"));
    }
    let dense: QTheory = Theory::dense_order(1);
    let direct = expr(&sre_pairs(&[("[true]*", "[x0 > x-1]")], &dense));
    if direct.recognized_bounds(&num_word(&[1, 2, 3, 2])) != [(1, 1), (2, 2)].into() {
        return Err("stock oracle".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let p = Q::from_integer(3.into());
    let r: Vec<Q> = (0..50).map(|_| Q::new(rng.gen_range(0..600).into(), 100.into())).collect();
    let input: String = r.iter().enumerate().map(|(i, v)| format!("{{\"t\": {i}, \"r\": \"{v}\"}}\n")).collect();
    let flagged: Vec<usize> = run_config("wpm/config.toml", &input).into_iter().map(|(b, e)| {
        assert_eq!(b, e);
        b - 1
    }).collect();
    let scan: Vec<usize> = (1..r.len() - 1).filter(|&i| r[i] > r[i - 1] && r[i] > r[i + 1] && r[i] > p).collect();
    if flagged != scan {
        return Err(format!("peaks {flagged:?} vs scan {scan:?}"));
    }
    Ok(format!("stock (1,1),(2,2); {} peaks in 50 readings", scan.len()))
}

type Criterion = (&'static str, fn() -> Result<String, String>, Duration);

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("processor matches the window oracle on {a,b}^<=8", processor_correctness, Duration::from_secs(60)),
        ("closure constructions match language oracles", closure_suite, Duration::from_secs(120)),
        ("compiled formulas match brute-force windows", formula_compilation, Duration::MAX),
        ("a*b unbounded on all streams, bounded without aaa", boundedness_predictions, Duration::MAX),
        ("debug invariants hold on 10^4-step random streams", main_loop_invariant, Duration::MAX),
        ("pane aggregates equal direct folds", pane_aggregation, Duration::MAX),
        ("stock and peak examples match direct scans", examples, Duration::MAX),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = started.elapsed();
        let result = result.and_then(|d| {
            if took > limit {
                Err(format!("{d}, over the {}s limit", limit.as_secs()))
            } else {
                Ok(d)
            }
        });
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({:.2}s)", i + 1, took.as_secs_f64()),
            Err(detail) => {
                println!("FAIL [{}] {name}: {detail} ({:.2}s)", i + 1, took.as_secs_f64());
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
