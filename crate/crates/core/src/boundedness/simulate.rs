//! Exhaustive simulation of the processor on short conforming streams.

use super::InputSpecifier;
use crate::error::Result;
use crate::processor::{Count, Processor};
use crate::scalar::Scalar;
use crate::smso::WindowExpression;
use crate::theory::Letter;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationReport {
    /// Largest number of tracked starts after any step.
    pub indices: usize,
    pub panes: usize,
    /// Conforming streams visited (every prefix counts).
    pub streams: usize,
    /// Set when the stream budget ran out before the horizon was covered.
    pub partial: bool,
}

struct Search<'a, S: Scalar> {
    spec: &'a InputSpecifier<S>,
    letters: Vec<Letter<S>>,
    horizon: usize,
    cap: usize,
    report: SimulationReport,
}

impl<S: Scalar> Search<'_, S> {
    fn visit(&mut self, proc: &Processor<S, Count<Letter<S>>>, word: &mut Vec<Letter<S>>, state: usize) -> Result<()> {
        if word.len() == self.horizon {
            return Ok(());
        }
        let a = self.spec.automaton();
        let k = a.lookback();
        for l in self.letters.clone() {
            if self.report.streams >= self.cap {
                self.report.partial = true;
                return Ok(());
            }
            word.push(l.clone());
            let next = if word.len() > k { a.step(state, &word[word.len() - k - 1..], 0) } else { Some(state) };
            if let Some(s) = next.filter(|s| a.is_final(*s)) {
                self.report.streams += 1;
                let mut p = proc.clone();
                p.step(l.clone(), &l)?;
                self.report.indices = self.report.indices.max(p.tracked_indices());
                self.report.panes = self.report.panes.max(p.panes().count());
                self.visit(&p, word, s)?;
            }
            word.pop();
        }
        Ok(())
    }
}

/// Runs the processor on every conforming stream of length at most
/// `horizon`, visiting at most `cap` streams, and reports the peak usage.
pub fn simulate_max_usage<S: Scalar>(
    expr: &WindowExpression<S>,
    spec: &InputSpecifier<S>,
    horizon: usize,
    cap: usize,
) -> Result<SimulationReport> {
    expr.theory().same_as(spec.theory(), "simulation")?;
    let letters = expr.theory().enumerate_letters()?;
    let proc = Processor::new(expr.clone(), Count::new())?;
    let mut search =
        Search { spec, letters, horizon, cap, report: SimulationReport { indices: 0, panes: 1, streams: 0, partial: false } };
    let a = spec.automaton();
    if !a.is_final(a.initial()) {
        return Ok(search.report);
    }
    search.visit(&proc, &mut Vec::new(), a.initial())?;
    Ok(search.report)
}
