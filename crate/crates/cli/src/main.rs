use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nomanet_cli::validate::{write_summary, DEFAULT_TRIALS};
use nomanet_cli::{
    run_sweep, validate_report, write_csv, CliError, CliResult, Engine, Preset, RunOptions,
    SweepSpec, ValidateOptions,
};
use nomanet_core::ScenarioConfig;
use serde_json::{Map, Value};

/// Worker threads for sweeps and simulations; defaults to all cores.
const WORKERS_VAR: &str = "NOMANET_WORKERS";

#[derive(Parser)]
#[command(
    name = "nomanet",
    version,
    about = "Outage analysis of a two-tier NOMA network with carrier-sensing femto cells"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sweep file and write CSV.
    Sweep {
        sweep_file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a built-in figure sweep.
    Preset {
        #[arg(value_enum)]
        name: Preset,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare every analytic expression with its numeric or simulated counterpart.
    Validate {
        /// Scenario JSON merged over the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write a CSV summary here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON merged over the defaults before the sweep's own overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn config_doc(path: Option<&Path>) -> CliResult<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = read(path)?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Config(format!(
            "{}: expected a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn sweep(spec: &SweepSpec, run: &RunArgs) -> CliResult<()> {
    let config = config_doc(run.config.as_deref())?;
    let opts = RunOptions {
        engine: run.engine,
        trials: run.trials,
        seed: run.seed,
    };
    if opts.trials == Some(0) {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let rows = run_sweep(&config, spec, &opts)?;
    write_csv(&rows, output(run.out.as_deref())?)
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sweep { sweep_file, run } => {
            let spec = SweepSpec::from_json_str(&read(&sweep_file)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", sweep_file.display())))?;
            sweep(&spec, &run)
        }
        Command::Preset { name, run } => sweep(&name.spec()?, &run),
        Command::Validate {
            config,
            out,
            seed,
            trials,
            tolerance_scale,
        } => {
            let cfg =
                ScenarioConfig::from_json_value(Value::Object(config_doc(config.as_deref())?))?;
            let opts = ValidateOptions {
                trials,
                seed,
                tolerance_scale,
            };
            let (checks, breaches) = validate_report(&cfg, &opts, io::stdout().lock())?;
            if let Some(path) = out {
                write_summary(&checks, tolerance_scale, output(Some(&path))?)?;
            }
            match breaches {
                0 => Ok(()),
                n => Err(CliError::Breach(n)),
            }
        }
    }
}

fn configure_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{WORKERS_VAR} must be a positive integer (got `{raw}`)"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{WORKERS_VAR}: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_workers().and_then(|()| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nomanet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
