//! Window expressions: finite unions of prefix/window automaton pairs.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ksla::Ksla;
use crate::scalar::Scalar;
use crate::sre::Sre;
use crate::theory::{Letter, Theory};

/// `prefix` accepts `w[..i_b]` and `window` accepts `w[i_b-k..=i_e]` for
/// every recognized window `(i_b, i_e)`.
#[derive(Debug, Clone)]
pub struct WindowPair<S> {
    pub prefix: Ksla<S>,
    pub window: Ksla<S>,
}

#[derive(Debug, Clone)]
pub struct WindowExpression<S> {
    theory: Theory<S>,
    pairs: Vec<WindowPair<S>>,
}

fn deterministic<S: Scalar>(r: &Sre<S>) -> Result<Ksla<S>> {
    let a = r.compile()?;
    if r.theory().capabilities().can_decide_sat {
        return Ok(a.determinize()?.trim());
    }
    let mut a = a.trim_unreachable();
    if a.certify_deterministic()? {
        Ok(a)
    } else {
        Err(Error::CapabilityMissing(format!("'{r}' is not deterministic and the theory cannot determinize it")))
    }
}

impl<S: Scalar> WindowExpression<S> {
    /// Both automata of every pair must be deterministic and share `theory`.
    pub fn new(theory: Theory<S>, pairs: Vec<WindowPair<S>>) -> Result<Self> {
        if theory.tracks() != 0 {
            return Err(Error::Precondition("window expressions are built over untracked theories".into()));
        }
        for (i, p) in pairs.iter().enumerate() {
            for a in [&p.prefix, &p.window] {
                theory.same_as(a.theory(), "window expression")?;
                if !a.is_deterministic() {
                    return Err(Error::Precondition(format!("pair {i} holds a nondeterministic automaton")));
                }
            }
        }
        Ok(WindowExpression { theory, pairs })
    }

    /// Compiles, determinizes and trims each prefix/window expression pair.
    /// Theories without decidable satisfiability cannot be determinized;
    /// their expressions are accepted when the compiled automata are
    /// already deterministic.
    pub fn from_sre_pairs(pairs: &[(Sre<S>, Sre<S>)]) -> Result<Self> {
        let theory = match pairs.first() {
            Some((p, _)) => p.theory().clone(),
            None => return Err(Error::Precondition("a window expression needs at least one pair".into())),
        };
        let mut out = Vec::new();
        for (p, w) in pairs {
            out.push(WindowPair { prefix: deterministic(p)?, window: deterministic(w)? });
        }
        Self::new(theory, out)
    }

    pub fn theory(&self) -> &Theory<S> {
        &self.theory
    }

    pub fn lookback(&self) -> usize {
        self.theory.lookback()
    }

    pub fn pairs(&self) -> &[WindowPair<S>] {
        &self.pairs
    }

    /// Windows recognized by definition, as `(pair, i_b, i_e)`.
    pub fn recognized(&self, w: &[Letter<S>]) -> BTreeSet<(usize, usize, usize)> {
        let k = self.lookback();
        let mut out = BTreeSet::new();
        for (j, pair) in self.pairs.iter().enumerate() {
            for b in k..w.len() {
                if !pair.prefix.accepts(&w[..b]) {
                    continue;
                }
                for e in b..w.len() {
                    if pair.window.accepts(&w[b - k..=e]) {
                        out.insert((j, b, e));
                    }
                }
            }
        }
        out
    }

    /// Window bounds recognized by any pair.
    pub fn recognized_bounds(&self, w: &[Letter<S>]) -> BTreeSet<(usize, usize)> {
        self.recognized(w).into_iter().map(|(_, b, e)| (b, e)).collect()
    }

    pub fn to_json(&self) -> Value {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|p| json!({"prefix": p.prefix.to_json(), "window": p.window.to_json()}))
            .collect();
        json!({ "pairs": pairs })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("window expressions serialize")
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let pairs = value
            .get("pairs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Document("expected an object with a 'pairs' array".into()))?;
        let mut out = Vec::new();
        for p in pairs {
            let get = |key: &str| {
                p.get(key).ok_or_else(|| Error::Document(format!("pair without '{key}' automaton")))
            };
            out.push(WindowPair { prefix: Ksla::from_json(get("prefix")?)?, window: Ksla::from_json(get("window")?)? });
        }
        let theory = match out.first() {
            Some(p) => p.prefix.theory().clone(),
            None => return Err(Error::Document("a window expression needs at least one pair".into())),
        };
        Self::new(theory, out).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_json(&value)
    }
}
