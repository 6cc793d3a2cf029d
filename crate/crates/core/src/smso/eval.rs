//! Direct evaluation of formulas on words, by definition.

use std::collections::{BTreeMap, BTreeSet};

use super::{Formula, GuardedFormula, BEGIN, END};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::Letter;

/// Values of free variables: positions for first-order ones, position sets
/// for set variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub first: BTreeMap<String, usize>,
    pub second: BTreeMap<String, BTreeSet<usize>>,
}

impl Assignment {
    pub fn window(begin: usize, end: usize) -> Self {
        let mut a = Assignment::default();
        a.first.insert(BEGIN.to_string(), begin);
        a.first.insert(END.to_string(), end);
        a
    }
}

struct Ctx<'a, S> {
    word: &'a [Letter<S>],
    k: usize,
}

impl<S: Scalar> Ctx<'_, S> {
    fn holds(&self, f: &Formula<S>, asg: &mut Assignment) -> bool {
        match f {
            Formula::PredAt(p, x) => {
                let i = asg.first[x];
                i >= self.k && i < self.word.len() && p.eval_block(&self.word[i - self.k..=i], 0)
            }
            Formula::Less(x, y) => asg.first[x] < asg.first[y],
            Formula::In(set, x) => asg.second[set].contains(&asg.first[x]),
            Formula::Not(g) => !self.holds(g, asg),
            Formula::And(a, b) => self.holds(a, asg) && self.holds(b, asg),
            Formula::Or(a, b) => self.holds(a, asg) || self.holds(b, asg),
            Formula::ExistsFirst(x, body) => {
                let end = asg.first[END];
                let saved = asg.first.get(x).copied();
                let mut found = false;
                for i in self.k..=end {
                    asg.first.insert(x.clone(), i);
                    if self.holds(body, asg) {
                        found = true;
                        break;
                    }
                }
                match saved {
                    Some(v) => asg.first.insert(x.clone(), v),
                    None => asg.first.remove(x),
                };
                found
            }
            Formula::ExistsSecond(set, body) => {
                let end = asg.first[END];
                let domain: Vec<usize> = (self.k..=end).collect();
                let saved = asg.second.remove(set);
                let mut found = false;
                for mask in 0u32..(1 << domain.len()) {
                    let chosen = domain.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i);
                    asg.second.insert(set.clone(), chosen.collect());
                    if self.holds(body, asg) {
                        found = true;
                        break;
                    }
                }
                match saved {
                    Some(v) => asg.second.insert(set.clone(), v),
                    None => asg.second.remove(set),
                };
                found
            }
        }
    }
}

const MAX_SET_DOMAIN: usize = 16;

fn has_set_quantifier<S>(f: &Formula<S>) -> bool {
    match f {
        Formula::PredAt(..) | Formula::Less(..) | Formula::In(..) => false,
        Formula::ExistsSecond(..) => true,
        Formula::Not(g) | Formula::ExistsFirst(_, g) => has_set_quantifier(g),
        Formula::And(a, b) | Formula::Or(a, b) => has_set_quantifier(a) || has_set_quantifier(b),
    }
}

fn free_second<S>(f: &Formula<S>, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::In(set, _) if !bound.contains(set) => {
            out.insert(set.clone());
        }
        Formula::PredAt(..) | Formula::Less(..) | Formula::In(..) => {}
        Formula::Not(g) | Formula::ExistsFirst(_, g) => free_second(g, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) => {
            free_second(a, bound, out);
            free_second(b, bound, out);
        }
        Formula::ExistsSecond(set, g) => {
            bound.push(set.clone());
            free_second(g, bound, out);
            bound.pop();
        }
    }
}

/// Evaluates `formula` on `word`. Quantified positions range over
/// `[k, xe]`; free positions may be `k-1` or later, and an atom read at a
/// position without a full lookback block is false.
pub fn eval_formula<S: Scalar>(word: &[Letter<S>], formula: &GuardedFormula<S>, asg: &Assignment) -> Result<bool> {
    let k = formula.theory().lookback();
    let f = formula.formula();
    let mut needed = f.free_first();
    needed.insert(END.to_string());
    let lo = k.saturating_sub(1);
    for v in &needed {
        match asg.first.get(v) {
            None => return Err(Error::Assignment(format!("no position for '{v}'"))),
            Some(&i) if i < lo || i >= word.len() => {
                return Err(Error::Assignment(format!(
                    "position {i} of '{v}' lies outside [{lo}, {}]",
                    word.len() as i64 - 1
                )))
            }
            Some(_) => {}
        }
    }
    let mut sets = BTreeSet::new();
    free_second(f, &mut Vec::new(), &mut sets);
    for v in &sets {
        match asg.second.get(v) {
            None => return Err(Error::Assignment(format!("no position set for '{v}'"))),
            Some(s) if s.iter().any(|&i| i < lo || i >= word.len()) => {
                return Err(Error::Assignment(format!("position set of '{v}' leaves the word")))
            }
            Some(_) => {}
        }
    }
    for l in word {
        formula.theory().check_letter(l)?;
    }
    if has_set_quantifier(f) && asg.first[END] + 1 > k + MAX_SET_DOMAIN {
        return Err(Error::Resource(format!(
            "set quantifiers are enumerated over at most {MAX_SET_DOMAIN} positions"
        )));
    }
    let ctx = Ctx { word, k };
    Ok(ctx.holds(f, &mut asg.clone()))
}

/// Every `(i_b, i_e)` with `k <= i_b <= i_e < |w|` such that the formula
/// holds on `w[..=i_e]` with `xb = i_b` and `xe = i_e`.
pub fn windows_bruteforce<S: Scalar>(word: &[Letter<S>], formula: &GuardedFormula<S>) -> Result<BTreeSet<(usize, usize)>> {
    let k = formula.theory().lookback();
    let mut out = BTreeSet::new();
    for e in k..word.len() {
        for b in k..=e {
            if eval_formula(&word[..=e], formula, &Assignment::window(b, e))? {
                out.insert((b, e));
            }
        }
    }
    Ok(out)
}
