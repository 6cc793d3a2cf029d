//! The `compile`, `run`, `check` and `simulate` subcommands.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use symwin::boundedness::{check_bounded_finite, check_bounded_symbolic, simulate_max_usage, Verdict};
use symwin::processor::{NumericAgg, Processor};
use symwin::theory::TheoryKind;
use symwin::Q;

use crate::config::Pipeline;
use crate::error::{CliError, CliResult};
use crate::input::RecordReader;

/// Writes one expression document per window and returns the paths.
pub fn compile(pipeline: &Pipeline, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut written = Vec::new();
    for (i, w) in pipeline.windows.iter().enumerate() {
        let path = out_dir.join(format!("window{i}.json"));
        let mut text = w.expr.to_json_string();
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub debug_invariants: bool,
    /// Emit pane reports every this many records; 0 disables them.
    pub report_every: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub records: usize,
    pub rejected: usize,
    pub windows: usize,
}

/// Streams the input through one processor per window and writes JSONL
/// outputs ordered by end, pair and start. Rejected records and pane
/// reports go to `diag`.
pub fn run(
    pipeline: &Pipeline,
    input: impl BufRead,
    out: &mut impl Write,
    diag: &mut impl Write,
    opts: RunOptions,
) -> CliResult<RunSummary> {
    let io = |e| CliError::io(Path::new("<output>"), e);
    let mut procs = Vec::new();
    let mut offset = 0;
    for w in &pipeline.windows {
        let mut p = Processor::new(w.expr.clone(), NumericAgg::<Q>::new(w.op))?;
        if opts.debug_invariants {
            p = p.with_debug_invariants();
        }
        procs.push((offset, p));
        offset += w.expr.pairs().len();
    }
    let mut summary = RunSummary::default();
    for rec in RecordReader::new(input, &pipeline.input, &pipeline.theory) {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                summary.rejected += 1;
                writeln!(diag, "{}", json!({"error": e.message, "line": e.line})).map_err(io)?;
                continue;
            }
        };
        let mut outputs = Vec::new();
        for (offset, p) in &mut procs {
            for o in p.step(rec.letter.clone(), &rec.value)? {
                outputs.push((*offset + o.pair, o.start, o.end, o.aggregate.to_json()));
            }
        }
        outputs.sort_by_key(|o| (o.0, o.1));
        for (pair, start, end, aggregate) in outputs {
            let line = json!({"pair": pair, "start": start, "end": end, "aggregate": aggregate});
            writeln!(out, "{line}").map_err(io)?;
            summary.windows += 1;
        }
        summary.records += 1;
        if opts.report_every > 0 && summary.records % opts.report_every == 0 {
            for (i, (_, p)) in procs.iter().enumerate() {
                let mut report = serde_json::to_value(p.pane_report()).expect("pane reports serialize");
                report["window"] = json!(i);
                writeln!(diag, "{}", json!({ "report": report })).map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)?;
    Ok(summary)
}

/// Analyzes every pair against the specifier. The report is unbounded if
/// any pair is, unknown if any pair is and none is unbounded, and bounded
/// otherwise with the bounds of all pairs added up.
pub fn check(pipeline: &Pipeline, budget: usize) -> CliResult<(Value, Verdict<Q>)> {
    let spec = pipeline.specifier_or_universal();
    let finite = matches!(pipeline.theory.kind(), TheoryKind::Finite(_));
    let mut verdicts = Vec::new();
    for pair in pipeline.combined()?.pairs() {
        let v = if finite {
            check_bounded_finite(&pair.prefix, &pair.window, &spec)?
        } else {
            check_bounded_symbolic(&pair.prefix, &pair.window, &spec, budget)?
        };
        verdicts.push(v);
    }
    if let Some((i, v)) = verdicts.iter().enumerate().find(|(_, v)| matches!(v, Verdict::Unbounded(_))) {
        let mut report = v.to_json();
        report["witness"]["pair"] = json!(i);
        return Ok((report, v.clone()));
    }
    if let Some(v) = verdicts.iter().find(|v| matches!(v, Verdict::Unknown(_))) {
        return Ok((v.to_json(), v.clone()));
    }
    let mut total = Some(symwin::boundedness::Bounds { indices: 0, panes: 0 });
    for v in &verdicts {
        total = match (total, v) {
            (Some(t), Verdict::Bounded(Some(b))) => {
                Some(symwin::boundedness::Bounds { indices: t.indices + b.indices, panes: t.panes + b.panes })
            }
            _ => None,
        };
    }
    let verdict = Verdict::Bounded(total);
    Ok((verdict.to_json(), verdict))
}

pub fn verdict_exit_code(v: &Verdict<Q>) -> i32 {
    match v {
        Verdict::Bounded(_) => 0,
        Verdict::Unbounded(_) => 1,
        Verdict::Unknown(_) => 4,
    }
}

pub fn simulate(pipeline: &Pipeline, horizon: usize, cap: usize) -> CliResult<Value> {
    let r = simulate_max_usage(&pipeline.combined()?, &pipeline.specifier_or_universal(), horizon, cap)?;
    Ok(json!({
        "horizon": horizon,
        "indices": r.indices,
        "panes": r.panes,
        "streams": r.streams,
        "partial": r.partial,
    }))
}
