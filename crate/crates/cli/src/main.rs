//! `ness-xxz`: profiles, currents, correlations, density matrices,
//! algebraic certificates and closed-form predictions for the
//! boundary-driven XXZ chain.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use xxz_ness::Error;

use output::{emit, Format};

#[derive(Parser, Debug)]
#[command(name = "ness-xxz", version, about = "Exact steady state of the boundary-driven open XXZ chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Point {
    /// Anisotropy Δ > -1.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    /// Coupling ε > 0.
    #[arg(long)]
    pub eps: f64,
    /// Chain length n ≥ 2.
    #[arg(long)]
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TauArg {
    /// τ_r = sign of cos(rλ).
    Default,
    AllPlus,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format; csv by default, json for `verify`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Gauge constant c as `re` or `re,im` (ignored at Δ = 1).
    #[arg(long, allow_hyphen_values = true)]
    pub gauge_c: Option<String>,
    #[arg(long, value_enum, default_value = "default")]
    pub tau_policy: TauArg,
    /// Disable diagonal balancing of the transfer matrices.
    #[arg(long)]
    pub no_balance: bool,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Magnetization profile ⟨σ_j^z⟩, one row per site.
    Profile {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        common: Common,
    },
    /// Steady-state spin current.
    Current {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        common: Common,
    },
    /// ⟨σ_j^z σ_k^z⟩ and its connected part, for all pairs or `--sites j,k`.
    Correlate {
        #[command(flatten)]
        point: Point,
        #[arg(long, value_delimiter = ',')]
        sites: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
    /// Full density matrix (n ≤ 10).
    Density {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        common: Common,
    },
    /// Algebraic certificates, plus the Liouvillian oracle for n ≤ 5.
    Verify {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form and asymptotic predictions.
    Predict {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        common: Common,
    },
    /// Current and edge magnetization over a grid of comma-separated values.
    Sweep {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        delta: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(Error),
    Io(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Size { .. } | Error::Index { .. } | Error::InvalidGauge => Failure::Usage(e.to_string()),
            e => Failure::Numerical(e),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) | Failure::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Numerical(_) => "numerical",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Numerical(e) => e.to_string(),
            Failure::Io(e) => format!("{e:#}"),
        }
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(anyhow::anyhow!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cmd: Command) -> (Result<bool, Failure>, Format) {
    let (common, default_format) = match &cmd {
        Command::Verify { common, .. } => (common.clone(), Format::Json),
        Command::Profile { common, .. }
        | Command::Current { common, .. }
        | Command::Correlate { common, .. }
        | Command::Density { common, .. }
        | Command::Predict { common, .. }
        | Command::Sweep { common, .. } => (common.clone(), Format::Csv),
    };
    let format = common.format.unwrap_or(default_format);
    let result = (|| {
        let (report, meta, passed) = match cmd {
            Command::Profile { point, common } => commands::profile(&point, &common)?,
            Command::Current { point, common } => commands::current(&point, &common)?,
            Command::Correlate { point, sites, common } => commands::correlate(&point, sites.as_deref(), &common)?,
            Command::Density { point, common } => commands::density(&point, &common)?,
            Command::Verify { point, common } => commands::verify(&point, &common)?,
            Command::Predict { point, common } => commands::predict(&point, &common)?,
            Command::Sweep { delta, eps, n, common } => commands::sweep(&delta, &eps, &n, &common)?,
        };
        let mut out = open_output(&common.out)?;
        emit(&report, &meta, format, &mut out)?;
        Ok(passed)
    })();
    (result, format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = run(cli.command);
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            if format == Format::Json {
                let doc = json!({
                    "error": { "kind": f.kind(), "message": f.message(), "exit_code": f.code() },
                    "version": env!("CARGO_PKG_VERSION"),
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("error object serializes"));
            }
            ExitCode::from(f.code())
        }
    }
}
