//! Command-line front end: JSON scenario configs in, reports out.

mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

pub use commands::{cmd_chsh, cmd_consistency, cmd_epr, cmd_intervene, cmd_net, CommandError};
pub use config::{ConfigError, ScenarioConfig};
pub use report::{Cell, CheckLine, Provenance, Report, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "qcausal", version, about = "Bell correlations, light-cone state assignment and causal checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint/conditional tables and factorizability, OI and PI gaps.
    Epr(CommonArgs),
    /// LHV bound, optimized quantum CHSH value and Tsirelson scan.
    Chsh(CommonArgs),
    /// Order-independence of state assignment at agent points.
    Consistency(CommonArgs),
    /// Conditioning versus intervening on outcomes, settings and preparation.
    Intervene(CommonArgs),
    /// Microcausality, isotony and Bell searches on a lattice net.
    Net(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Also write the report and per-table CSV files here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `analysis.tolerance`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides `analysis.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Epr(_) => "epr",
            Command::Chsh(_) => "chsh",
            Command::Consistency(_) => "consistency",
            Command::Intervene(_) => "intervene",
            Command::Net(_) => "net",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Epr(a)
            | Command::Chsh(a)
            | Command::Consistency(a)
            | Command::Intervene(a)
            | Command::Net(a) => a,
        }
    }
}

/// Loads the config and runs one command. The report's overall verdict decides
/// between exit codes 0 and 1.
pub fn execute(command: &str, config_text: &str, tol: Option<f64>, seed: Option<u64>) -> Result<Report, CommandError> {
    let config = ScenarioConfig::from_json(config_text)?;
    let tolerance = match tol {
        Some(t) => {
            config::check_cli_tolerance(t)?;
            t
        }
        None => config.analysis.tolerance.unwrap_or(DEFAULT_TOLERANCE),
    };
    let prov = Provenance {
        config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: seed.or(config.analysis.seed).unwrap_or(0),
        tolerance,
    };
    let mut report = match command {
        "epr" => cmd_epr(&config, prov)?,
        "chsh" => cmd_chsh(&config, prov)?,
        "consistency" => cmd_consistency(&config, prov)?,
        "intervene" => cmd_intervene(&config, prov)?,
        "net" => cmd_net(&config, prov)?,
        other => return Err(ConfigError::new("", format!("unknown command `{other}`")).into()),
    };
    if let Some(keys) = &config.analysis.checks {
        if let Some((k, key)) = keys
            .iter()
            .enumerate()
            .find(|(_, key)| !report.checks.iter().any(|c| &c.key == *key))
        {
            return Err(ConfigError::new(
                format!("analysis.checks[{k}]"),
                format!("`{command}` has no check `{key}`"),
            )
            .into());
        }
        report.checks.retain(|c| keys.contains(&c.key));
    }
    Ok(report)
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => report.render_text(),
        Format::Csv => report.render_csv(),
        Format::Json => report.render_json(),
    }
}

/// Writes `<command>.txt`, `<command>.json` and `<command>_<table>.csv`.
pub fn write_artifacts(report: &Report, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> std::io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put(format!("{}.txt", report.command), report.render_text())?;
    put(format!("{}.json", report.command), report.render_json())?;
    for t in &report.tables {
        put(format!("{}_{}.csv", report.command, t.name), t.to_csv())?;
    }
    Ok(written)
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_PASS };
        }
    };
    let args = cli.command.args();
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return EXIT_CONFIG_ERROR;
        }
    };
    let report = match execute(cli.command.name(), &text, args.tol, args.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG_ERROR;
        }
    };
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(render(&report, args.format).as_bytes()).is_err() {
        return EXIT_CONFIG_ERROR;
    }
    if let Some(dir) = &args.out {
        if let Err(e) = write_artifacts(&report, dir) {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return EXIT_CONFIG_ERROR;
        }
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
