use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sentivol_cli::{execute, resolve, Command, Overrides};

#[derive(Parser, Debug)]
#[command(
    name = "sentivol",
    version,
    about = "Investor sentiment and implied volatility surface dynamics"
)]
struct Cli {
    /// TOML run configuration; every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the effective configuration with comments and exit.
    #[arg(long)]
    print_config: bool,
    /// FFT cutoff period in trading days.
    #[arg(long, global = true)]
    cutoff_period: Option<f64>,
    /// VAR lag order, or `auto`.
    #[arg(long, global = true)]
    lags: Option<String>,
    /// Moneyness grid: default7 | paper24.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Initial rolling window for evaluate.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    quotes: Option<PathBuf>,
    #[arg(long, global = true)]
    rates: Option<PathBuf>,
    #[arg(long, global = true)]
    proxies: Option<PathBuf>,
    #[arg(long, global = true)]
    scores: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Daily implied volatility grids from option quotes.
    BuildSurface,
    /// Daily sentiment series (PCA composite or external scores).
    Sentiment,
    /// Split sentiment into high and low frequency components.
    Decompose,
    /// Fit the VAR with sentiment components.
    VarFit,
    /// Impulse responses to sentiment shocks.
    VarIrf,
    /// Granger causality of sentiment components on surface variables.
    Granger,
    /// Multi-step forecast from the end of the sample.
    Forecast,
    /// Rolling out-of-sample comparison of sentiment variants.
    Evaluate,
    /// Coefficient stability across sub-periods.
    Robustness,
    /// Generate a synthetic dataset with known structure.
    Synth,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::BuildSurface => Command::BuildSurface,
            Cmd::Sentiment => Command::Sentiment,
            Cmd::Decompose => Command::Decompose,
            Cmd::VarFit => Command::VarFit,
            Cmd::VarIrf => Command::VarIrf,
            Cmd::Granger => Command::Granger,
            Cmd::Forecast => Command::Forecast,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::Robustness => Command::Robustness,
            Cmd::Synth => Command::Synth,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ov = Overrides {
        out: cli.out,
        seed: cli.seed,
        cutoff_period: cli.cutoff_period,
        lags: cli.lags,
        grid: cli.grid,
        window: cli.window,
        quotes: cli.quotes,
        rates: cli.rates,
        proxies: cli.proxies,
        scores: cli.scores,
    };
    let result = if cli.print_config {
        resolve(cli.config.as_deref(), &ov).map(|r| print!("{}", r.config.documented()))
    } else if let Some(cmd) = cli.command {
        execute(cmd.into(), cli.config.as_deref(), &ov).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        })
    } else {
        eprintln!("config-error: no command given (see --help)");
        return ExitCode::from(2);
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
