//! File-level solving and the batch benchmark harness.
//!
//! # Stats records
//!
//! Each solve produces one JSON object per line with exactly these fields:
//!
//! ```text
//! {"file": str, "verdict": str, "vars": int, "max_states": int,
//!  "max_transitions": int, "iterations": int, "millis": int}
//! ```
//!
//! `verdict` is one of `sat`, `unsat`, `unknown`, `timeout`, `unsupported`
//! or `error`. Resource failures are reported as `timeout`.
//!
//! # Exit codes
//!
//! `0` for any verdict, `1` for parse and desugaring errors, `2` for
//! resource failures and internal errors.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{desugar, Assignment, DesugarError, DesugarOptions, Problem};
use crate::smt::{parse_smt, print_symbol, SmtError, SmtScript};
use crate::solver::{solve, RefinedReg, SolveError, SolveOptions, Stats, VerdictKind};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DriverError {
    #[error(transparent)]
    Parse(#[from] SmtError),
    #[error(transparent)]
    Desugar(#[from] DesugarError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl DriverError {
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Parse(_) | DriverError::Desugar(_) => 1,
            DriverError::Solve(_) => 2,
        }
    }
}

/// Result of solving every disjunct of a script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solved {
    pub kind: VerdictKind,
    /// Size maxima over disjuncts, iterations of the largest propagation.
    pub stats: Stats,
    pub vars: usize,
    /// Refined constraints per disjunct, in expansion order.
    pub refined: Vec<RefinedReg>,
}

/// Lowers a script into its problems.
pub fn lower(script: &SmtScript) -> Result<Vec<Problem>, DesugarError> {
    desugar(&script.assertions, &DesugarOptions::default())
}

/// Solves the disjuncts in order.
///
/// The script is sat as soon as one disjunct is, unsat when all are, and
/// unknown otherwise. An unsat verdict reports the first disjunct's witness.
pub fn solve_problems(problems: &[Problem], opts: &SolveOptions) -> Result<Solved, SolveError> {
    let start = Instant::now();
    let mut stats = Stats::default();
    let mut refined = Vec::new();
    let mut unsat_witness = None;
    let mut unknown = None;
    let mut sat = None;
    for p in problems {
        let v = solve(p, opts)?;
        for (x, size) in v.stats.sizes {
            let e = stats.sizes.entry(x).or_insert((0, 0));
            *e = (e.0.max(size.0), e.1.max(size.1));
        }
        stats.iterations = stats.iterations.max(v.stats.iterations);
        refined.push(v.refined);
        match v.kind {
            VerdictKind::Sat(m) => {
                sat = Some(m);
                break;
            }
            VerdictKind::Unsat(w) => {
                unsat_witness.get_or_insert(w);
            }
            VerdictKind::Unknown(r) => {
                unknown.get_or_insert(r);
            }
        }
    }
    stats.millis = start.elapsed().as_millis();
    let kind = match (sat, unknown, unsat_witness) {
        (Some(m), _, _) => VerdictKind::Sat(m),
        (None, Some(r), _) => VerdictKind::Unknown(r),
        (None, None, Some(w)) => VerdictKind::Unsat(w),
        // a script without disjuncts cannot arise from desugaring
        (None, None, None) => VerdictKind::Sat(Assignment::new()),
    };
    let vars = problems.iter().map(|p| p.vars().len()).max().unwrap_or(0);
    Ok(Solved {
        kind,
        stats,
        vars,
        refined,
    })
}

/// Parses, lowers and solves SMT-LIB source text.
pub fn solve_source(src: &str, opts: &SolveOptions) -> Result<(SmtScript, Solved), DriverError> {
    let script = parse_smt(src)?;
    let problems = lower(&script)?;
    let solved = solve_problems(&problems, opts)?;
    Ok((script, solved))
}

/// `(define-fun ..)` lines for every declared variable. Declared variables
/// that no constraint mentions get the empty word.
pub fn model_lines(script: &SmtScript, model: &Assignment) -> String {
    let mut out = String::new();
    for v in &script.declarations {
        let w = model.get(v).cloned().unwrap_or_else(Word::empty);
        writeln!(
            out,
            "(define-fun {} () String \"{}\")",
            print_symbol(v),
            w.to_smt_literal()
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileVerdict {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    Unsupported,
    Error,
}

impl FileVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            FileVerdict::Sat => "sat",
            FileVerdict::Unsat => "unsat",
            FileVerdict::Unknown => "unknown",
            FileVerdict::Timeout => "timeout",
            FileVerdict::Unsupported => "unsupported",
            FileVerdict::Error => "error",
        }
    }

    fn of(kind: &VerdictKind) -> FileVerdict {
        match kind {
            VerdictKind::Sat(_) => FileVerdict::Sat,
            VerdictKind::Unsat(_) => FileVerdict::Unsat,
            VerdictKind::Unknown(_) => FileVerdict::Unknown,
        }
    }
}

impl fmt::Display for FileVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub file: String,
    pub verdict: FileVerdict,
    pub vars: usize,
    pub max_states: usize,
    pub max_transitions: usize,
    pub iterations: usize,
    pub millis: u64,
}

impl StatsRecord {
    pub fn new(file: impl Into<String>, verdict: FileVerdict, vars: usize, stats: &Stats) -> StatsRecord {
        StatsRecord {
            file: file.into(),
            verdict,
            vars,
            max_states: stats.max_states(),
            max_transitions: stats.max_transitions(),
            iterations: stats.iterations,
            millis: stats.millis as u64,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub timeout: Duration,
    pub jobs: usize,
    /// Base solver options; the harness adds a deadline and a cancel flag.
    pub solve: SolveOptions,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            timeout: Duration::from_secs(10),
            jobs: 1,
            solve: SolveOptions::default(),
        }
    }
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryRow {
    pub group: String,
    /// In-fragment files: sat, unknown, unsat and timeout.
    pub total: usize,
    pub sat: usize,
    pub unknown: usize,
    pub unsat: usize,
    pub timeout: usize,
    pub unsupported: usize,
    pub errors: usize,
    /// Mean solve time of files that finished, in milliseconds.
    pub avg_millis: f64,
}

impl SummaryRow {
    /// Share of in-fragment files with a definite verdict, in percent.
    pub fn solved_percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * (self.sat + self.unsat) as f64 / self.total as f64
        }
    }

    fn add(&mut self, r: &StatsRecord, finished_millis: &mut Vec<u64>) {
        match r.verdict {
            FileVerdict::Sat => self.sat += 1,
            FileVerdict::Unsat => self.unsat += 1,
            FileVerdict::Unknown => self.unknown += 1,
            FileVerdict::Timeout => self.timeout += 1,
            FileVerdict::Unsupported => self.unsupported += 1,
            FileVerdict::Error => self.errors += 1,
        }
        if matches!(r.verdict, FileVerdict::Sat | FileVerdict::Unsat | FileVerdict::Unknown) {
            finished_millis.push(r.millis);
        }
        self.total = self.sat + self.unsat + self.unknown + self.timeout;
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    /// One record per readable file, sorted by path.
    pub records: Vec<StatsRecord>,
    /// One row per subdirectory, sorted by name.
    pub rows: Vec<SummaryRow>,
    /// Absent when no file was processed.
    pub total: Option<SummaryRow>,
    /// Files that could not be read, with the reason.
    pub unreadable: Vec<(String, String)>,
}

impl BenchReport {
    /// The summary table, one line per group and a closing total line.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<24} {:>6} {:>6} {:>8} {:>6} {:>8} {:>10} {:>8}\n",
            "group", "total", "sat", "unknown", "unsat", "solved%", "avg-time", "timeout"
        );
        let line = |out: &mut String, r: &SummaryRow| {
            writeln!(
                out,
                "{:<24} {:>6} {:>6} {:>8} {:>6} {:>7.1}% {:>8.1}ms {:>8}",
                r.group,
                r.total,
                r.sat,
                r.unknown,
                r.unsat,
                r.solved_percent(),
                r.avg_millis,
                r.timeout
            )
            .unwrap();
        };
        for r in &self.rows {
            line(&mut out, r);
        }
        if let Some(t) = &self.total {
            line(&mut out, t);
            if t.unsupported + t.errors > 0 {
                writeln!(out, "skipped: {} unsupported, {} errors", t.unsupported, t.errors).unwrap();
            }
        }
        for (f, why) in &self.unreadable {
            writeln!(out, "unreadable: {f}: {why}").unwrap();
        }
        out
    }

    pub fn jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_json_line() + "\n").collect()
    }
}

fn summarize(group: &str, records: &[&StatsRecord]) -> SummaryRow {
    let mut row = SummaryRow {
        group: group.to_string(),
        ..SummaryRow::default()
    };
    let mut finished = Vec::new();
    for r in records {
        row.add(r, &mut finished);
    }
    if !finished.is_empty() {
        row.avg_millis = finished.iter().sum::<u64>() as f64 / finished.len() as f64;
    }
    row
}

/// All `.smt2` files below `dir`, sorted.
pub fn collect_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "smt2"))
        .map(|e| e.into_path())
        .collect();
    files.sort();
    files
}

/// Classifies one file under the harness clock.
fn run_file(path: &Path, rel: &str, opts: &BenchOptions) -> Result<StatsRecord, String> {
    let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let empty = Stats::default();
    let script = match parse_smt(&src) {
        Ok(s) => s,
        Err(e) if e.is_unsupported() => return Ok(StatsRecord::new(rel, FileVerdict::Unsupported, 0, &empty)),
        Err(_) => return Ok(StatsRecord::new(rel, FileVerdict::Error, 0, &empty)),
    };
    let problems = match lower(&script) {
        Ok(ps) => ps,
        Err(_) => return Ok(StatsRecord::new(rel, FileVerdict::Unsupported, 0, &empty)),
    };
    let vars = problems.iter().map(|p| p.vars().len()).max().unwrap_or(0);
    let cancel = Arc::new(AtomicBool::new(false));
    let start = Instant::now();
    let mut solve_opts = opts.solve.clone();
    solve_opts.limits = solve_opts
        .limits
        .with_deadline(start + opts.timeout)
        .with_cancel(cancel.clone());
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        // the receiver is gone once the harness has given up
        let _ = tx.send(solve_problems(&problems, &solve_opts));
    });
    let timed_out = |vars| {
        let stats = Stats {
            millis: opts.timeout.as_millis(),
            ..Stats::default()
        };
        StatsRecord::new(rel, FileVerdict::Timeout, vars, &stats)
    };
    match rx.recv_timeout(opts.timeout) {
        Ok(Ok(solved)) => Ok(StatsRecord::new(
            rel,
            FileVerdict::of(&solved.kind),
            vars,
            &solved.stats,
        )),
        Ok(Err(SolveError::Resource(_))) => Ok(timed_out(vars)),
        Ok(Err(SolveError::Extraction(_))) => Ok(StatsRecord::new(rel, FileVerdict::Error, vars, &empty)),
        Err(_) => {
            cancel.store(true, Ordering::Relaxed);
            Ok(timed_out(vars))
        }
    }
}

/// Solves every `.smt2` file below `dir` with up to `opts.jobs` files in
/// flight.
pub fn bench(dir: &Path, opts: &BenchOptions) -> BenchReport {
    let files = collect_files(dir);
    let rel = |p: &Path| p.strip_prefix(dir).unwrap_or(p).to_string_lossy().replace('\\', "/");
    let results: Mutex<Vec<Option<Result<StatsRecord, String>>>> = Mutex::new(vec![None; files.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..opts.jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let r = run_file(path, &rel(path), opts);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut report = BenchReport::default();
    for (path, r) in files.iter().zip(results.into_inner().unwrap()) {
        match r.expect("every file is processed") {
            Ok(rec) => report.records.push(rec),
            Err(why) => report.unreadable.push((rel(path), why)),
        }
    }
    let mut groups: BTreeMap<String, Vec<&StatsRecord>> = BTreeMap::new();
    for r in &report.records {
        let group = match r.file.rsplit_once('/') {
            Some((g, _)) => g.to_string(),
            None => ".".to_string(),
        };
        groups.entry(group).or_default().push(r);
    }
    let rows: Vec<SummaryRow> = groups.iter().map(|(g, rs)| summarize(g, rs)).collect();
    if !report.records.is_empty() {
        let all: Vec<&StatsRecord> = report.records.iter().collect();
        report.total = Some(summarize("total", &all));
    }
    report.rows = rows;
    report
}
