//! `qnm`: command-line front end of the resonance solver.
//!
//! Every command reads a TOML run configuration, validates all of its blocks
//! before computing anything, prints a versioned JSON report (resolved
//! configuration, SHA-256 of that configuration, command result) to stdout,
//! and optionally writes the JSON and a CSV table into an output directory.
//! Failures print a machine-readable error document and exit nonzero.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use qnm_core::QnmError;

use config::{Overrides, RunConfig};

/// Exit status of a failed command.
const EXIT_FAILURE: u8 = 2;

/// Failures of the command-line layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Error raised by the solver library (including configuration errors).
    #[error(transparent)]
    Core(#[from] QnmError),
    /// File-system or serialization failure.
    #[error("i/o error: {0}")]
    Io(String),
    /// Malformed command-line value.
    #[error("usage error: {0}")]
    Usage(String),
}

impl CliError {
    /// Machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "Io",
            CliError::Usage(_) => "Usage",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qnm", version, about = "Resonances of the charged Klein–Gordon operator on de Sitter black holes")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for JSON/CSV artifacts (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to QNM_THREADS, then all cores).
    #[arg(long, global = true, env = "QNM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct SigmaArgs {
    /// Re σ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    sigma_re: f64,
    /// Im σ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    sigma_im: f64,
}

#[derive(Args, Debug, Clone, Default)]
struct ContourArgs {
    /// Contour center as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    contour_center: Option<String>,
    /// Contour radius (turns the contour into a circle).
    #[arg(long)]
    contour_radius: Option<f64>,
    /// Quadrature nodes on the contour.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate every configuration block and the geometric assumptions.
    Validate,
    /// Horizon radii and surface gravities.
    Horizons,
    /// Horizons, assumption check and derived geometric constants.
    Geometry,
    /// Critical strips for the configured sector.
    Strips,
    /// D_R(σ) with its error budget at one σ.
    DetEval {
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Basis truncation R_max.
        #[arg(long)]
        rmax: Option<usize>,
    },
    /// D_R on a grid over the contour's bounding box.
    DetSweep {
        #[command(flatten)]
        contour: ContourArgs,
        /// Basis truncation R_max.
        #[arg(long)]
        rmax: Option<usize>,
    },
    /// Count resonances inside the contour.
    Count {
        #[command(flatten)]
        contour: ContourArgs,
        /// Basis truncation R_max.
        #[arg(long)]
        rmax: Option<usize>,
    },
    /// Locate resonances inside the contour.
    Locate {
        #[command(flatten)]
        contour: ContourArgs,
        /// Basis truncation R_max.
        #[arg(long)]
        rmax: Option<usize>,
    },
    /// Wronskian zeros of the spherically symmetric radial problem.
    Oracle {
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Map the configuration to Λ = 1.
    Rescale,
    /// Parametrix diagnostics.
    Parametrix {
        #[command(subcommand)]
        action: ParametrixAction,
    },
}

#[derive(Subcommand, Debug)]
enum ParametrixAction {
    /// Sample the fiber symbols of the boundary-frozen model as CSV.
    DumpSymbols {
        #[command(flatten)]
        sigma: SigmaArgs,
    },
}

fn parse_center(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("contour center must be \"re,im\", got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let re = parts[0].parse::<f64>().map_err(|_| bad())?;
    let im = parts[1].parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn contour_overrides(o: &mut Overrides, c: &ContourArgs) -> Result<(), CliError> {
    o.contour_center = c.contour_center.as_deref().map(parse_center).transpose()?;
    o.contour_radius = c.contour_radius;
    o.nodes = c.nodes;
    Ok(())
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a second initialization (e.g. in-process reuse) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    let mut o = Overrides { out: cli.out.as_ref().map(|p| p.display().to_string()), ..Default::default() };
    let (name, sigma) = match &cli.command {
        Command::Validate => ("validate", None),
        Command::Horizons => ("horizons", None),
        Command::Geometry => ("geometry", None),
        Command::Strips => ("strips", None),
        Command::Rescale => ("rescale", None),
        Command::DetEval { sigma, rmax } => {
            o.r_max = *rmax;
            ("det-eval", Some(Complex64::new(sigma.sigma_re, sigma.sigma_im)))
        }
        Command::DetSweep { contour, rmax } | Command::Count { contour, rmax } | Command::Locate { contour, rmax } => {
            o.r_max = *rmax;
            contour_overrides(&mut o, contour)?;
            let name = match &cli.command {
                Command::DetSweep { .. } => "det-sweep",
                Command::Count { .. } => "count",
                _ => "locate",
            };
            (name, None)
        }
        Command::Oracle { contour } => {
            contour_overrides(&mut o, contour)?;
            ("oracle", None)
        }
        Command::Parametrix { action: ParametrixAction::DumpSymbols { sigma } } => {
            ("parametrix-dump-symbols", Some(Complex64::new(sigma.sigma_re, sigma.sigma_im)))
        }
    };
    cfg.apply(&o);
    let cfg = cfg.resolved();
    cfg.validate()?;
    let sigma = sigma.unwrap_or_default();
    let outcome = match name {
        "validate" => commands::validate(&cfg)?,
        "horizons" => commands::horizons(&cfg)?,
        "geometry" => commands::geometry(&cfg)?,
        "strips" => commands::strips(&cfg)?,
        "rescale" => commands::rescale_cmd(&cfg)?,
        "det-eval" => commands::det_eval(&cfg, sigma)?,
        "det-sweep" => commands::det_sweep(&cfg)?,
        "count" => commands::count(&cfg)?,
        "locate" => commands::locate_cmd(&cfg)?,
        "oracle" => commands::oracle(&cfg)?,
        _ => commands::dump_symbols(&cfg, sigma)?,
    };
    let doc = report::envelope(name, &cfg, &outcome.result)?;
    if let Some(dir) = &cfg.output.dir {
        let table = if cfg.output.csv { outcome.table.as_ref() } else { None };
        report::write_artifacts(std::path::Path::new(dir), name, &doc, table)?;
    }
    Ok(doc)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(doc) => {
            println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", serde_json::to_string_pretty(&report::error_document(&e)).expect("error serializes"));
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
