use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use meissner_cli::config::{parse_config, FileConfig, Format, Mode, RhoMax, RunConfig};
use meissner_cli::{run, CliError};

/// Self-consistent Meissner effect in a cylinder.
///
/// Settings come from an optional TOML file; every flag overrides the key of
/// the same name.
#[derive(Debug, Parser)]
#[command(name = "meissner", version)]
struct Cli {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    boundary_b: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    /// Outer grid radius in units of R, or "auto".
    #[arg(long)]
    rho_max: Option<RhoMax>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    mixing: Option<f64>,
    /// Slab width for the piecewise Bessel field solver.
    #[arg(long)]
    step_delta: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Cli {
    fn overrides(&self) -> FileConfig {
        FileConfig {
            mode: self.mode,
            kappa: self.kappa,
            boundary_b: self.boundary_b,
            grid_n: self.grid_n,
            rho_max: self.rho_max,
            tol: self.tol,
            max_iter: self.max_iter,
            mixing: self.mixing,
            step_delta: self.step_delta,
            output_path: self.output.clone(),
            output_format: self.format,
            ..FileConfig::default()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(base.merge(cli.overrides()))?;
    let outcome = run(&cfg)?;
    for path in outcome.report.write(&cfg)? {
        eprintln!("wrote {}", path.display());
    }
    outcome.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
