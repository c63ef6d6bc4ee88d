use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msstgarch_cli::commands;
use msstgarch_cli::config::RunConfig;
use msstgarch_cli::error::{CliError, CliResult};
use msstgarch_cli::ingest::Mode;

/// Markov-switching smooth-transition GARCH toolkit.
#[derive(Parser)]
#[command(name = "msstgarch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Simulate returns, regimes and variance paths.
    Simulate,
    /// Run the Gibbs sampler; write draws, summary, DIC and a fitted config.
    Fit,
    /// Print the second-moment stability report as JSON.
    Stability,
    /// One-step-ahead variance and VaR forecasts over the test window.
    Forecast,
    /// VaR violation tests (unconditional coverage, independence, both).
    Backtest,
    /// Diebold-Mariano tests plus MSE/MAE between fitted models.
    Compare,
    /// Descriptive statistics of the return series.
    Summary,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Fit => "fit",
            Command::Stability => "stability",
            Command::Forecast => "forecast",
            Command::Backtest => "backtest",
            Command::Compare => "compare",
            Command::Summary => "summary",
        }
    }
}

/// Flags override the config file.
#[derive(Args)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input CSV with a header row.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Name of the value column in the input CSV.
    #[arg(long, global = true)]
    column: Option<String>,
    /// garch | stgarch | msgarch | msstgarch
    #[arg(long, global = true)]
    model: Option<String>,
    /// Number of regimes.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Named parameter preset (`reference`).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Gibbs sweeps.
    #[arg(long, global = true)]
    iters: Option<usize>,
    #[arg(long, global = true)]
    burnin: Option<usize>,
    /// Griddy-Gibbs grid points.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    thin: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Index of the first out-of-sample observation.
    #[arg(long, global = true)]
    split: Option<usize>,
    /// Comma-separated VaR levels.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Logistic tail tolerance for the stability check.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Comma-separated fitted configs to compare.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<PathBuf>>,
    /// Simulated series length.
    #[arg(long, global = true)]
    length: Option<usize>,
}

impl Overrides {
    fn apply(self, mut cfg: RunConfig) -> CliResult<(RunConfig, Vec<PathBuf>)> {
        if let Some(v) = self.data {
            cfg.data.path = Some(v);
        }
        if let Some(v) = self.mode {
            cfg.data.mode = v;
        }
        if let Some(v) = self.column {
            cfg.data.column = Some(v);
        }
        if let Some(v) = self.model {
            cfg.model.variant = v.parse()?;
        }
        if let Some(v) = self.k {
            cfg.model.k = Some(v);
        }
        if let Some(v) = self.preset {
            cfg.model.preset = Some(v);
            cfg.model.regimes = None;
            cfg.model.transition = None;
        }
        if let Some(v) = self.iters {
            cfg.mcmc.iterations = v;
        }
        if let Some(v) = self.burnin {
            cfg.mcmc.burn_in = v;
        }
        if let Some(v) = self.grid {
            cfg.mcmc.grid_size = v;
        }
        if let Some(v) = self.thin {
            cfg.mcmc.thinning = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
            cfg.mcmc.seed = v;
        }
        if let Some(v) = self.split {
            cfg.data.split = Some(v);
        }
        if let Some(v) = self.levels {
            cfg.evaluation.levels = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if let Some(v) = self.delta {
            cfg.evaluation.delta = v;
        }
        if let Some(v) = self.length {
            cfg.simulate.length = v;
        }
        cfg.validate()?;
        Ok((cfg, self.models.unwrap_or_default()))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let base = match &cli.overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let (cfg, models) = cli.overrides.apply(base)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Stability => commands::stability(&cfg),
        Command::Forecast => commands::forecast(&cfg),
        Command::Backtest => commands::backtest(&cfg),
        Command::Compare => commands::compare(&cfg, &models),
        Command::Summary => commands::summary(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("msstgarch {name}: error[{}]: {message}", code.tag());
            ExitCode::from(code as u8)
        }
    }
}
