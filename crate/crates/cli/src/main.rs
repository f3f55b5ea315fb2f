use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tsagg_cli::config::RunConfig;
use tsagg_cli::output::{write_probe, write_rows};
use tsagg_cli::{CliError, Engine, Format, Overrides, Regime, SweepSpec};
use tsagg_core::simulator::Variant;

#[derive(Parser)]
#[command(
    name = "tsagg",
    version,
    about = "Temporal-spatial aggregation multicasting: analysis, simulation and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; the built-in reference parameter set when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// proposed, baseline-temporal or baseline-continuous.
    #[arg(long, global = true)]
    variant: Option<Variant>,
    /// AXIS:START:STOP:POINTS[:log], AXIS one of theta, period_t, lambda_u.
    #[arg(long, global = true)]
    sweep: Option<SweepSpec>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate q and q_n analytically at the configured point.
    Analyze,
    /// Monte Carlo estimate at the configured point.
    Simulate {
        /// Write the snapshots of the first trials here (JSON lines).
        #[arg(long)]
        dump_scenarios: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        dump_trials: u64,
    },
    /// Evaluate along the sweep axis.
    Sweep {
        #[arg(long, value_enum, default_value = "analysis")]
        engine: Engine,
    },
    /// Simulate all three schemes with matched seeds.
    Compare,
    /// Probe convergence towards a limit regime.
    Asymptotic {
        #[arg(long, value_enum)]
        regime: Option<Regime>,
        /// Comma-separated schedule, e.g. 8,16,32,64.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<f64>>,
    },
    /// Print the built-in configuration as JSON.
    Template,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::reference(),
    };
    Overrides {
        trials: cli.trials,
        seed: cli.seed,
        threads: cli.threads,
        variant: cli.variant,
        sweep: cli.sweep,
        out: cli.out,
        format: cli.format,
    }
    .apply(&mut config);

    let mut sink: Box<dyn Write> = match &config.output.path {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?),
        None => Box::new(std::io::stdout().lock()),
    };
    let format = config.output.format;

    let table = match cli.command {
        Command::Template => {
            writeln!(sink, "{}", config.to_json()).map_err(|e| CliError::Output(e.to_string()))?;
            return Ok(false);
        }
        Command::Asymptotic { regime, schedule } => {
            let probe = tsagg_cli::asymptotic(&config, regime, schedule)?;
            write_probe(sink, &probe, format)?;
            return Ok(false);
        }
        Command::Analyze => tsagg_cli::analyze(&config)?,
        Command::Simulate {
            dump_scenarios,
            dump_trials,
        } => {
            if dump_scenarios.is_some() {
                config.output.scenario_dump = dump_scenarios;
                config.output.dump_trials = dump_trials;
            }
            tsagg_cli::simulate(&config)?
        }
        Command::Sweep { engine } => tsagg_cli::sweep(&config, engine)?,
        Command::Compare => tsagg_cli::compare(&config)?,
    };
    for row in &table.rows {
        if let Some(note) = &row.note {
            eprintln!("warning: {}={}: {note}", row.sweep_var, row.sweep_value);
        }
    }
    write_rows(sink, &table.rows, table.n_files, format)?;
    Ok(table.is_partial())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
