//! `apdisc`: progression families on boxes and polytopes, certified bounds, colorings, sweeps.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Format, Report, Timing};

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 2718;

#[derive(Parser, Debug)]
#[command(name = "apdisc", version, about = "Discrepancy of arithmetic progressions: bounds, certificates, colorings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Random seed for colorings and sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Multiplier on the default resource guards (set and incidence limits).
    #[arg(long, global = true, default_value_t = 1.0, value_name = "FACTOR")]
    pub scale: f64,
}

/// Exactly one of `--box` or `--polytope`.
#[derive(Args, Debug, Clone, Default)]
pub struct DomainArgs {
    /// Box sides, e.g. `16,16`.
    #[arg(long = "box", value_name = "N1,N2,...")]
    pub box_sides: Option<String>,
    /// Polytope file (`dim`, `vertex`, optional `shift` lines).
    #[arg(long, value_name = "PATH")]
    pub polytope: Option<PathBuf>,
    /// Shift vector overriding the file's, e.g. `1/2,0`.
    #[arg(long, value_name = "r1,r2,...")]
    pub shift: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertKind {
    /// Full certificate when it fits the guards, right-only otherwise.
    Auto,
    Full,
    RightOnly,
    /// Maximal progressions only.
    Maximal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    LargeSets,
    Lex,
    Reduction,
    Partition,
    MapCert,
    ApCert,
    Decay,
    BoxZeta,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// f(N) or f(K) with its zeta table.
    Bound {
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Build and validate a factorization certificate.
    Cert {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, value_enum, default_value_t = CertKind::Auto)]
        kind: CertKind,
        /// Include the construction tree.
        #[arg(long)]
        tree: bool,
    },
    /// Low-discrepancy coloring from the walk driven by a certificate.
    Color {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, value_enum, default_value_t = CertKind::Auto)]
        kind: CertKind,
        /// Number of runs, with seeds `seed, seed + 1, ...`.
        #[arg(long, default_value_t = 1)]
        runs: u64,
        /// Also evaluate uniformly random colorings with the same seeds.
        #[arg(long)]
        baseline: bool,
        /// Include the coloring vectors.
        #[arg(long)]
        coloring: bool,
    },
    /// Exact minimum discrepancy by exhaustive search.
    Brute {
        #[command(flatten)]
        domain: DomainArgs,
        /// Include a witness coloring.
        #[arg(long)]
        witness: bool,
    },
    /// Certified lower bound valid for every coloring.
    Lowerbound {
        #[command(flatten)]
        domain: DomainArgs,
        /// Search shifts on the grid with this denominator instead of using the given shift.
        #[arg(long, value_name = "DEN")]
        search: Option<u64>,
        /// Compare against the exhaustive optimum (tiny instances only).
        #[arg(long)]
        check: bool,
    },
    /// Run the exact-inequality checks; exit 1 on any violation.
    Verify {
        #[command(flatten)]
        domain: DomainArgs,
        /// Single check on the given box.
        #[arg(long, value_enum)]
        lemma: Option<Check>,
        /// Full-scale suite instead of the quick one.
        #[arg(long)]
        full: bool,
        /// Validate a deliberately corrupted certificate.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Scaling family: f, walk discrepancy and lower bound per scale, with a log-log fit.
    Sweep {
        #[command(flatten)]
        domain: DomainArgs,
        /// Scale factors (integers for boxes, rationals for polytopes).
        #[arg(long, value_name = "r1,r2,...", required = true)]
        scales: String,
        /// Color only instances with at most this many points (0 disables coloring).
        #[arg(long, default_value_t = 1024)]
        color_max: u64,
        /// Lower bound only for instances with at most this many points (0 disables).
        #[arg(long, default_value_t = 1 << 16)]
        lower_bound_max: u64,
    },
}

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Guard(String),
    Violation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Guard(_) => 3,
        }
    }
}

impl From<apdisc::Error> for Failure {
    fn from(e: apdisc::Error) -> Self {
        use apdisc::Error;
        match e {
            Error::Resource { .. } => Failure::Guard(e.to_string()),
            Error::Precondition(_) | Error::Construction(_) => Failure::Violation(e.to_string()),
            Error::Structural(_) | Error::Domain(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let start = Instant::now();
    let c = &cli.common;
    if !(c.scale.is_finite() && c.scale > 0.0) {
        return Err(Failure::Usage("--scale must be a positive number".into()));
    }
    let (name, config, records) = match &cli.command {
        Command::Bound { domain } => {
            ("bound", commands::config("bound", domain, c, serde_json::json!({}))?, commands::bound(domain, c)?)
        }
        Command::Cert { domain, kind, tree } => (
            "cert",
            commands::config("cert", domain, c, serde_json::json!({ "kind": kind, "tree": tree }))?,
            commands::cert(domain, c, *kind, *tree)?,
        ),
        Command::Color { domain, kind, runs, baseline, coloring } => (
            "color",
            commands::config(
                "color",
                domain,
                c,
                serde_json::json!({ "kind": kind, "runs": runs, "baseline": baseline }),
            )?,
            commands::color(domain, c, *kind, *runs, *baseline, *coloring)?,
        ),
        Command::Brute { domain, witness } => (
            "brute",
            commands::config("brute", domain, c, serde_json::json!({}))?,
            commands::brute(domain, c, *witness)?,
        ),
        Command::Lowerbound { domain, search, check } => (
            "lowerbound",
            commands::config("lowerbound", domain, c, serde_json::json!({ "search": search, "check": check }))?,
            commands::lowerbound(domain, c, *search, *check)?,
        ),
        Command::Verify { domain, lemma, full, inject_fault } => (
            "verify",
            commands::config_optional(
                "verify",
                domain,
                c,
                serde_json::json!({ "lemma": lemma, "full": full, "inject_fault": inject_fault }),
            )?,
            commands::verify(domain, c, *lemma, *full, *inject_fault)?,
        ),
        Command::Sweep { domain, scales, color_max, lower_bound_max } => (
            "sweep",
            commands::config(
                "sweep",
                domain,
                c,
                serde_json::json!({ "scales": scales, "color_max": color_max, "lower_bound_max": lower_bound_max }),
            )?,
            commands::sweep(domain, c, scales, *color_max, *lower_bound_max)?,
        ),
    };
    let passed = records.iter().all(|r| r.get("passed").and_then(|v| v.as_bool()).unwrap_or(true));
    let report = Report {
        command: name.into(),
        config,
        passed,
        records,
        timing: Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
    };
    let mut w: Box<dyn Write> = match &c.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    report.write(c.format, &mut w)?;
    w.flush()?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("apdisc: property violation (see report)");
            ExitCode::from(1)
        }
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) | Failure::Guard(m) | Failure::Violation(m) => m,
            };
            eprintln!("apdisc: {msg}");
            ExitCode::from(f.code())
        }
    }
}
