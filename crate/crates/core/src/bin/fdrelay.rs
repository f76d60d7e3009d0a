use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fdrelay::config::{self, ConfigFile, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "fdrelay", version, about = "Throughput of half- and full-duplex relaying")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Run file (flat TOML); omitted keys take the reference values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Throughput table over a parameter grid, as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// sd_distance, source_power or si_attenuation.
        #[arg(long)]
        param: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Analytical results against Monte Carlo, as JSON. Exit 1 on any miss.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Splitting-tree delay distributions, as CSV.
    Pgf {
        #[command(flatten)]
        common: Common,
        /// Contenders; defaults to the run file's `contenders`.
        #[arg(long)]
        n_total: Option<usize>,
        #[arg(long)]
        l_max: Option<usize>,
    },
    /// One point evaluation with diagnostics, as JSON.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common, mut overrides: Overrides) -> fdrelay::Result<RunConfig> {
    let mut file = match &common.config {
        Some(path) => config::read_config_file(path)?,
        None => ConfigFile::default(),
    };
    overrides.seed = common.seed;
    overrides.out = common.out.clone();
    file.apply(&overrides);
    file.resolve()
}

fn run(cli: Cli) -> Result<ExitCode, fdrelay::Error> {
    match cli.command {
        Command::Sweep { common, param, from, to, steps } => {
            let run = load(&common, Overrides { param, from, to, steps, ..Overrides::default() })?;
            config::emit(&config::run_sweep(&run)?, run.out.as_deref())?;
        }
        Command::Validate { common, trials } => {
            let run = load(&common, Overrides { trials, ..Overrides::default() })?;
            let report = config::run_validate(&run)?;
            config::emit(&config::render_report(&report), run.out.as_deref())?;
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Pgf { common, n_total, l_max } => {
            let run = load(&common, Overrides::default())?;
            let n = n_total.unwrap_or(run.scenario.contenders);
            let l = l_max.unwrap_or(run.scenario.l_max);
            config::emit(&config::render_pgf(n, l)?, run.out.as_deref())?;
        }
        Command::Analyze { common } => {
            let run = load(&common, Overrides::default())?;
            config::emit(&config::run_analyze(&run)?, run.out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fdrelay: {e}");
            ExitCode::from(2)
        }
    }
}
