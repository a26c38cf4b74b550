use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qlattice_core::ToleranceConfig;

use crate::commands::{self, GenRequest};
use crate::error::{CliError, CliResult};
use crate::report::Report;
use crate::suite::{run_suite, SuiteConfig};

#[derive(Debug, Parser)]
#[command(name = "qlattice", version, about = "Transition probabilities between projections")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolArgs,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true, value_name = "OUT")]
    pub json: Option<PathBuf>,
    /// Include wall-clock timing in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().eps_structural)]
    pub eps_structural: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().eps_exist)]
    pub eps_exist: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().eps_rank)]
    pub eps_rank: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a matrix file as an orthogonal projection.
    Check { file: PathBuf },
    /// Analyse the transition probability P(q|p).
    Tp { p: PathBuf, q: PathBuf },
    /// Generate example pairs as matrix files.
    Gen {
        /// Directory for the generated files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Demonstrations.
    Demo {
        #[command(subcommand)]
        kind: DemoKind,
    },
    /// Run the randomized property battery.
    Suite {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// The 4×4 pair with P(q|p) = 1 − s3².
    Example4 {
        #[arg(long, allow_negative_numbers = true)]
        s1: f64,
        #[arg(long, allow_negative_numbers = true)]
        s2: f64,
        #[arg(long, allow_negative_numbers = true)]
        s3: f64,
    },
    /// Two lines; components are `re` or `re:im`, comma separated.
    Rank1 {
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
    /// Overlapping diagonal projections without a transition probability.
    Commuting {
        #[arg(long)]
        mask_p: String,
        #[arg(long)]
        mask_q: String,
    },
    /// A line p and a projection q with P(q|p) but no P(p|q).
    Asymmetric {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random unitary conjugates of a given pair.
    Conjugate {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoKind {
    /// Certificate that no dispersion-free linear state exists.
    NoDeterministic {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Certificate path (default: no_deterministic_dim<N>.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Everything a run produced; `main` forwards it to the process streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: u8,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: text, exit_code: 2 }
            } else {
                Outcome { stdout: text, stderr: String::new(), exit_code: 0 }
            };
        }
    };
    let echo = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    execute(&cli, echo)
}

fn execute(cli: &Cli, echo: Vec<String>) -> Outcome {
    let mut log = String::new();
    let tol = ToleranceConfig {
        eps_structural: cli.tol.eps_structural,
        eps_exist: cli.tol.eps_exist,
        eps_rank: cli.tol.eps_rank,
    };
    let mut report = Report::new(echo, tol);
    let start = Instant::now();
    let result = tol
        .validate()
        .map_err(CliError::from)
        .and_then(|()| dispatch(&cli.command, &tol, &mut report, &mut log));
    if let Err(e) = &result {
        report.fail(e);
        let _ = writeln!(log, "error: {e}");
    }
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let rendered = report.render();
    let mut stdout = String::new();
    match &cli.json {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                let _ = writeln!(log, "error: cannot write {}: {e}", path.display());
                return Outcome { stdout, stderr: log, exit_code: 2 };
            }
        }
        None => stdout = rendered,
    }
    Outcome {
        stdout,
        stderr: log,
        exit_code: report.exit_code,
    }
}

fn dispatch(command: &Command, tol: &ToleranceConfig, report: &mut Report, log: &mut String) -> CliResult<()> {
    match command {
        Command::Check { file } => commands::check(file, tol, report, log),
        Command::Tp { p, q } => commands::tp(p, q, tol, report, log),
        Command::Gen { out_dir, kind } => {
            let request = match kind {
                GenKind::Example4 { s1, s2, s3 } => GenRequest::Example4 { s1: *s1, s2: *s2, s3: *s3 },
                GenKind::Rank1 { psi, phi } => GenRequest::Rank1 { psi: psi.clone(), phi: phi.clone() },
                GenKind::Commuting { mask_p, mask_q } => GenRequest::Commuting {
                    mask_p: mask_p.clone(),
                    mask_q: mask_q.clone(),
                },
                GenKind::Asymmetric { dim, seed } => GenRequest::Asymmetric { dim: *dim, seed: *seed },
                GenKind::Conjugate { p, q, seed, n } => GenRequest::Conjugate {
                    p: p.clone(),
                    q: q.clone(),
                    seed: *seed,
                    n: *n,
                },
            };
            commands::gen(&request, out_dir, tol, report, log)
        }
        Command::Demo { kind: DemoKind::NoDeterministic { dim, seed, out } } => {
            commands::demo_no_deterministic(*dim, *seed, out.as_deref(), tol, report, log)
        }
        Command::Suite { dim, trials, seed } => {
            if *dim < 2 {
                return Err(CliError::Parameter(format!("--dim must be at least 2, got {dim}")));
            }
            if *trials == 0 {
                return Err(CliError::Parameter("--trials must be at least 1".into()));
            }
            let cfg = SuiteConfig { dim: *dim, trials: *trials, seed: *seed };
            let suite = run_suite(&cfg, tol)?;
            for s in &suite.properties {
                let _ = writeln!(
                    log,
                    "{:<26} {:>6}/{:<6} worst residual {:.3e}",
                    s.name,
                    s.passed,
                    s.checked,
                    s.worst_residual
                );
            }
            let _ = writeln!(
                log,
                "suite dim {} trials {} seed {}: {}",
                cfg.dim,
                cfg.trials,
                cfg.seed,
                if suite.passed { "PASS" } else { "FAIL" }
            );
            let (failed, total) = (suite.total_failures, suite.total_checks);
            report.results = serde_json::to_value(&suite).expect("suite reports serialize");
            if suite.passed {
                Ok(())
            } else {
                Err(CliError::SuiteFailed { failed, total })
            }
        }
    }
}
