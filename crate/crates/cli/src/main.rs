use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use strprop::driver::{bench, model_lines, solve_source, BenchOptions, FileVerdict, StatsRecord};
use strprop::snfa::Limits;
use strprop::solver::{SolveOptions, VerdictKind, DEFAULT_MAX_TRANSITIONS};

#[derive(Parser)]
#[command(
    name = "strprop",
    version,
    about = "String constraint solver for an SMT-LIB string fragment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one file and print sat, unsat or unknown.
    Solve {
        file: PathBuf,
        /// Print a model as define-fun lines after a sat verdict.
        #[arg(long)]
        model: bool,
        /// Write one DOT file per refined automaton into this directory.
        #[arg(long, value_name = "DIR")]
        dump_dot: Option<PathBuf>,
        /// Wall-clock limit in milliseconds.
        #[arg(long, value_name = "MS")]
        timeout: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve every .smt2 file below a directory and print a summary table.
    Bench {
        dir: PathBuf,
        /// Per-file wall-clock limit in milliseconds.
        #[arg(long, value_name = "MS", default_value_t = 10_000)]
        timeout: u64,
        /// Files solved in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Append JSON-lines stats records to this file.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
    /// Enable the Σ* absorption rewrites.
    #[arg(long)]
    optimize: bool,
    /// Transition budget per constructed automaton.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_TRANSITIONS)]
    max_transitions: usize,
}

impl Common {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            limits: Limits::unbounded().with_max_transitions(self.max_transitions),
            optimize: self.optimize,
        }
    }
}

fn write_stats(path: &Path, lines: &str) -> std::io::Result<()> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(lines.as_bytes())
}

fn dot_name(v: &str) -> String {
    v.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn run_solve(
    file: &Path,
    model: bool,
    dump_dot: Option<&Path>,
    timeout: Option<u64>,
    common: &Common,
) -> Result<(), (u8, String)> {
    let src = fs::read_to_string(file).map_err(|e| (1, format!("{}: {e}", file.display())))?;
    let mut opts = common.solve_options();
    if let Some(ms) = timeout {
        opts.limits = opts.limits.with_deadline(Instant::now() + Duration::from_millis(ms));
    }
    let (script, solved) = solve_source(&src, &opts).map_err(|e| (e.exit_code() as u8, e.to_string()))?;
    println!("{}", solved.kind.label());
    match &solved.kind {
        VerdictKind::Sat(m) if model => print!("{}", model_lines(&script, m)),
        VerdictKind::Unsat(w) => eprintln!("empty language: {w}"),
        VerdictKind::Unknown(r) => eprintln!("reason: {r}"),
        _ => {}
    }
    if let Some(dir) = dump_dot {
        fs::create_dir_all(dir).map_err(|e| (2, format!("{}: {e}", dir.display())))?;
        let many = solved.refined.len() > 1;
        for (i, reg) in solved.refined.iter().enumerate() {
            for (v, a) in reg {
                let name = if many {
                    format!("{i}_{}", dot_name(v.name()))
                } else {
                    dot_name(v.name())
                };
                let path = dir.join(format!("{name}.dot"));
                fs::write(&path, a.to_dot(v.name())).map_err(|e| (2, format!("{}: {e}", path.display())))?;
            }
        }
    }
    if let Some(path) = &common.stats {
        let verdict = match solved.kind {
            VerdictKind::Sat(_) => FileVerdict::Sat,
            VerdictKind::Unsat(_) => FileVerdict::Unsat,
            VerdictKind::Unknown(_) => FileVerdict::Unknown,
        };
        let rec = StatsRecord::new(file.to_string_lossy(), verdict, solved.vars, &solved.stats);
        write_stats(path, &(rec.to_json_line() + "\n")).map_err(|e| (2, format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_bench(dir: &Path, timeout: u64, jobs: usize, common: &Common) -> Result<(), (u8, String)> {
    if !dir.is_dir() {
        return Err((1, format!("{}: not a directory", dir.display())));
    }
    let opts = BenchOptions {
        timeout: Duration::from_millis(timeout),
        jobs,
        solve: common.solve_options(),
    };
    let report = bench(dir, &opts);
    if let Some(path) = &common.stats {
        write_stats(path, &report.jsonl()).map_err(|e| (2, format!("{}: {e}", path.display())))?;
    }
    print!("{}", report.table());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            file,
            model,
            dump_dot,
            timeout,
            common,
        } => run_solve(file, *model, dump_dot.as_deref(), *timeout, common),
        Command::Bench {
            dir,
            timeout,
            jobs,
            common,
        } => run_bench(dir, *timeout, *jobs, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
