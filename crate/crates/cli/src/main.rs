use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgframe::{FaultInjection, SizeCaps, Tolerances};
use kgframe_cli::document::InstanceDocument;
use kgframe_cli::{DualOutcome, VerifyOptions, EXIT_INPUT, EXIT_OK, EXIT_PREDICATE};

/// K-g-frames over finite direct sums of matrix algebras.
#[derive(Parser)]
#[command(name = "kgframe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct TolArgs {
    /// Positivity tolerance (relative).
    #[arg(long, value_parser = positive)]
    tol_psd: Option<f64>,
    /// Equality tolerance for residuals.
    #[arg(long, value_parser = positive)]
    tol_eq: Option<f64>,
    /// Rank cutoff relative to the largest singular value.
    #[arg(long, value_parser = positive)]
    tol_rank: Option<f64>,
}

impl TolArgs {
    fn resolve(self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_psd {
            t.psd = v;
        }
        if let Some(v) = self.tol_eq {
            t.eq = v;
        }
        if let Some(v) = self.tol_rank {
            t.rank = v;
        }
        t
    }
}

#[derive(Subcommand)]
enum Command {
    /// Frame bounds, K-g-frame report, tightness and completeness of an instance.
    Check {
        /// Instance document, or `-` for stdin.
        path: String,
        /// Also require the frame to be tight.
        #[arg(long)]
        require_tight: bool,
        #[command(flatten)]
        tol: TolArgs,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Builds the canonical K-dual and emits it as a new instance document.
    Dual {
        path: String,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Runs the randomized theorem suite.
    Verify {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated theorem ids; all when omitted.
        #[arg(long, value_delimiter = ',')]
        theorems: Option<Vec<String>>,
        /// Size caps as BLOCK_DIM,BLOCKS,RANK,INDEX.
        #[arg(long, value_parser = parse_caps, default_value = "4,3,6,8")]
        max_dims: SizeCaps,
        /// Corrupt one trial, as THEOREM:TRIAL.
        #[arg(long, value_parser = parse_fault)]
        inject_fault: Option<FaultInjection>,
        /// Record wall time in the report (breaks byte-identical output).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn parse_caps(s: &str) -> Result<SizeCaps, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("`{s}`: {e}"))?;
    match v[..] {
        [a, b, c, d] if a > 0 && b > 0 && c > 0 && d > 0 => Ok(SizeCaps {
            max_block_dim: a,
            max_blocks: b,
            max_rank: c,
            max_index: d,
        }),
        _ => Err(format!("`{s}`: expected four positive integers")),
    }
}

fn parse_fault(s: &str) -> Result<FaultInjection, String> {
    let (th, trial) = s.split_once(':').ok_or("expected THEOREM:TRIAL")?;
    Ok(FaultInjection {
        theorem: th.to_string(),
        trial: trial.parse().map_err(|e| format!("`{trial}`: {e}"))?,
    })
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match output {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| e.to_string())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn load(path: &str) -> Result<kgframe_cli::document::Instance, String> {
    InstanceDocument::read(path)
        .and_then(|d| d.decode())
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Check {
            path,
            require_tight,
            tol,
            output,
        } => {
            let inst = load(&path)?;
            let (report, code) =
                kgframe_cli::check(&inst, require_tight, &tol.resolve()).map_err(|e| e.to_string())?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            emit(&output, &json(&report))?;
            Ok(code)
        }
        Command::Dual { path, tol, output } => {
            let inst = load(&path)?;
            match kgframe_cli::dual(&inst, &tol.resolve()).map_err(|e| e.to_string())? {
                DualOutcome::Constructed(doc) => {
                    emit(&output, &doc.to_json())?;
                    Ok(EXIT_OK)
                }
                DualOutcome::Refused(r) => {
                    eprintln!("refused: {}", r.reason);
                    emit(&output, &json(&r))?;
                    Ok(EXIT_PREDICATE)
                }
            }
        }
        Command::Verify {
            trials,
            seed,
            theorems,
            max_dims,
            inject_fault,
            timing,
            tol,
            output,
        } => {
            let opts = VerifyOptions {
                trials,
                seed,
                theorems,
                caps: max_dims,
                tol: tol.resolve(),
                fault: inject_fault,
                timing,
            };
            let (doc, code, elapsed) = kgframe_cli::verify(&opts).map_err(|e| e.to_string())?;
            let s = &doc.suite;
            eprintln!(
                "{} theorems, {} failures, {} audit findings in {elapsed:.2} s",
                s.reports.len(),
                s.failure_count(),
                s.audit_count()
            );
            emit(&output, &json(&doc))?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { EXIT_OK as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
