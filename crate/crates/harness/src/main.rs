//! Command-line driver: Monte-Carlo experiments, privacy tests, decoder-region
//! scans, rate checks, and the bundled example reproductions.
//!
//! Exit codes: 0 success, 1 configuration error, 2 check mismatch (--check).

use clap::{Parser, Subcommand, ValueEnum};
use rankpir_harness::config::{ExperimentConfig, VariantConfig};
use rankpir_harness::experiments::{
    decoder_region, privacy, rate_sweep, roundtrip, success_probability, write_csv, write_json,
    HarnessError, ResultRow,
};
use rankpir_harness::presets::run_examples;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rankpir", about = "rank-metric PIR experiment harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON with field/params/channel/experiment).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the trial count.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Write results to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Require the configured scheme variant.
    #[arg(long, global = true, value_enum)]
    variant: Option<Variant>,
    /// Fail (exit 2) when measurements disagree with closed forms beyond 3σ.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Variant {
    Errorfree,
    Errored,
}

#[derive(Subcommand)]
enum Command {
    /// Full-protocol round trips with staging.
    Roundtrip,
    /// Success-probability Monte Carlo against the closed forms.
    Prob,
    /// Chi-square privacy test on delivered query marginals.
    Privacy,
    /// (ε, τ) decoder-region scan for the errored variant.
    Region,
    /// Counted vs closed-form rate, plus a field-size trend sweep.
    Rate,
    /// Reproduce the bundled examples and print the golden matrices.
    Examples,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let path = cli.config.as_ref().ok_or("missing --config PATH")?;
    let mut cfg = ExperimentConfig::from_path(path).map_err(|e| e.to_string())?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.experiment.trials = trials;
    }
    if let Some(variant) = cli.variant {
        let have = match cfg.params.variant {
            VariantConfig::Errorfree => Variant::Errorfree,
            VariantConfig::Errored { .. } => Variant::Errored,
        };
        if variant != have {
            return Err("config variant does not match --variant".into());
        }
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn emit(cli: &Cli, rows: &[ResultRow]) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            match cli.format {
                Format::Csv => write_csv(rows, file),
                Format::Json => write_json(rows, file),
            }
        }
        None => {
            let stdout = std::io::stdout().lock();
            match cli.format {
                Format::Csv => write_csv(rows, stdout),
                Format::Json => write_json(rows, stdout),
            }
        }
    }
}

/// Do all Monte-Carlo rows sit within 3σ of their closed forms?
fn within_three_sigma(rows: &[ResultRow]) -> bool {
    rows.iter().all(|r| match (r.closed_form, r.std_error) {
        (Some(cf), Some(se)) => (r.measured - cf).abs() <= 3.0 * se.max(1e-12),
        _ => true,
    })
}

fn run(cli: &Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Examples => {
            let report = run_examples(cli.seed.unwrap_or(7))?;
            for line in &report.lines {
                println!("{line}");
            }
            if cli.check && !report.ok {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Roundtrip => {
            let cfg = load_config(cli).map_err(config_err)?;
            let rows = roundtrip(&cfg)?;
            emit(cli, &rows)?;
            check_exit(cli, within_three_sigma(&rows))
        }
        Command::Prob => {
            let cfg = load_config(cli).map_err(config_err)?;
            let out = success_probability(&cfg)?;
            emit(cli, &out.rows)?;
            check_exit(cli, within_three_sigma(&out.rows))
        }
        Command::Privacy => {
            let cfg = load_config(cli).map_err(config_err)?;
            let out = privacy(&cfg)?;
            emit(cli, &out.rows)?;
            check_exit(cli, !out.rejected)
        }
        Command::Region => {
            let cfg = load_config(cli).map_err(config_err)?;
            let out = decoder_region(&cfg)?;
            emit(cli, &out.rows)?;
            let ok = out
                .cells
                .iter()
                .filter(|c| c.inside)
                .all(|c| c.successes == c.trials && c.rate_exact);
            check_exit(cli, ok)
        }
        Command::Rate => {
            let cfg = load_config(cli).map_err(config_err)?;
            let rows = rate_sweep(&cfg)?;
            emit(cli, &rows)?;
            check_exit(cli, within_three_sigma(&rows))
        }
    }
}

fn check_exit(cli: &Cli, ok: bool) -> Result<ExitCode, HarnessError> {
    if cli.check && !ok {
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn config_err(msg: String) -> HarnessError {
    HarnessError::Unsupported(msg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(HarnessError::Unsupported(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
