use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cvar_hedge::scenario::{
    run_dynamic, run_optimize, run_price, run_verify, Format, McSection, Report, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "cvar-hedge",
    version,
    about = "Closed-form CVaR hedging of stock with put options"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the Monte Carlo path count.
    #[arg(long, global = true)]
    paths: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Quote the strike chain: P(0), P^alpha and E(P(T)) per strike.
    Price,
    /// Solve the budget allocation LP over the c_grid.
    Optimize,
    /// Dynamic-hedging benchmark against the static frontier.
    Dynamic,
    /// Monte Carlo verification of the closed-form CVaR per frontier row.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

fn load_config(cli: &Cli) -> Result<ScenarioConfig, String> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| "missing --config <path>".to_string())?;
    let mut cfg = ScenarioConfig::from_path(path).map_err(|e| e.to_string())?;
    if cli.seed.is_some() || cli.paths.is_some() {
        let base = cfg.mc.unwrap_or(McSection {
            paths: 1_000_000,
            seed: 0,
            chunk: 65_536,
        });
        cfg.mc = Some(McSection {
            paths: cli.paths.unwrap_or(base.paths),
            seed: cli.seed.unwrap_or(base.seed),
            chunk: base.chunk,
        });
    }
    Ok(cfg)
}

fn emit(cli: &Cli, report: &Report) -> Result<(), String> {
    let text = report.render(cli.format.into());
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let result = match cli.command {
        Command::Price => run_price(&config),
        Command::Optimize => run_optimize(&config),
        Command::Dynamic => run_dynamic(&config),
        Command::Verify => run_verify(&config),
    };

    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    if let Err(msg) = emit(&cli, &report) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_CONFIG);
    }

    if report.feasible_row_count() == 0 {
        return ExitCode::from(EXIT_INFEASIBLE);
    }
    if !report.all_passed() {
        return ExitCode::from(EXIT_VERIFY_FAILED);
    }
    ExitCode::SUCCESS
}
