//! `beanrec`: ingest reviews, train and evaluate regressors, run the
//! recommendation-accuracy sweep, and serve or query recommendations.

mod commands;
mod config;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use beanrec_core::regressors::Family;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "beanrec", version, about = "Coffee bean quality prediction and recommendation")]
struct Cli {
    /// Master RNG seed for partitions, folds, models and simulated users.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// TOML file with model, sweep and service settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Directory for machine-readable outputs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DataArg {
    /// Reviews CSV (raw CQI export or a cleaned file).
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a CQI export and write the cleaned file, logs and diagnostics.
    Ingest {
        input: PathBuf,
    },
    /// Train one model family on the full dataset and save it.
    Train {
        #[arg(value_parser = parse_family)]
        family: Family,
        #[command(flatten)]
        data: DataArg,
        /// Folds for the SVR grid or MLP search.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
        folds: u64,
        /// Random-search this many MLP configurations before training.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        search: Option<u64>,
    },
    /// Cross-validated RMSE for one or more families (default: all three).
    Evaluate {
        #[arg(value_parser = parse_family)]
        families: Vec<Family>,
        #[command(flatten)]
        data: DataArg,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
        folds: u64,
    },
    /// Recommendation-accuracy sweep over prediction sizes.
    Simulate {
        #[command(flatten)]
        data: DataArg,
        /// Neighbours per recommendation list.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: Option<u64>,
        /// Comma-separated hidden fractions.
        #[arg(long, value_delimiter = ',', value_parser = parse_fraction)]
        m: Option<Vec<f64>>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        users: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        repetitions: Option<u64>,
        #[arg(long, default_value = "rf", value_parser = parse_family)]
        family: Family,
    },
    /// Ask a running service for recommendations.
    Recommend {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        url: String,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        prefs: commands::PreferenceArgs,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        data: DataArg,
        /// Trained model JSON.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Extra beans without reviews.
        #[arg(long)]
        unreviewed: Option<PathBuf>,
        /// Hide this fraction of reviews and serve predictions for them.
        #[arg(long, value_parser = parse_fraction)]
        hidden_fraction: Option<f64>,
        #[arg(long)]
        bind: Option<SocketAddr>,
        /// Permissive CORS headers for a UI on another origin.
        #[arg(long)]
        dev_cors: bool,
    },
    /// Write a synthetic CQI-format file.
    Synth {
        #[arg(long, default_value_t = 1340)]
        rows: usize,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: beanrec_core::Error| e.to_string())
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

/// `RUST_LOG` wins, then `-v`, then the `[service] log` setting.
fn init_logging(verbose: u8, configured: Option<&str>) {
    let level = match (verbose, configured) {
        (0, Some(l)) => l,
        (0, None) => "warn",
        (1, _) => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::CliConfig::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    init_logging(cli.verbose, cfg.service.as_ref().map(|s| s.log.as_str()));
    match run(cli, cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli, cfg: config::CliConfig) -> anyhow::Result<()> {
    let ctx = commands::Context {
        seed: cli.seed,
        out: cli.out,
        cfg,
    };
    tracing::info!(seed = ctx.seed, "starting");
    match cli.command {
        Command::Ingest { input } => commands::ingest(&ctx, &input),
        Command::Train {
            family,
            data,
            folds,
            search,
        } => commands::train(&ctx, family, data.data.as_deref(), folds as usize, search.map(|s| s as usize)),
        Command::Evaluate { families, data, folds } => {
            let families = if families.is_empty() {
                Family::ALL.to_vec()
            } else {
                families
            };
            commands::evaluate(&ctx, &families, data.data.as_deref(), folds as usize)
        }
        Command::Simulate {
            data,
            k,
            m,
            users,
            repetitions,
            family,
        } => {
            let mut sweep = ctx.cfg.sweep.clone();
            if let Some(k) = k {
                sweep.k = k as usize;
            }
            if let Some(m) = m {
                sweep.m_values = m;
            }
            if let Some(u) = users {
                sweep.n_users = u as usize;
            }
            if let Some(r) = repetitions {
                sweep.repetitions = r as usize;
            }
            sweep.seed = ctx.seed;
            commands::simulate(&ctx, family, data.data.as_deref(), &sweep)
        }
        Command::Recommend { url, k, prefs } => commands::recommend(&url, k, &prefs),
        Command::Serve {
            data,
            model,
            unreviewed,
            hidden_fraction,
            bind,
            dev_cors,
        } => commands::serve(
            &ctx,
            commands::ServeOverrides {
                data: data.data,
                model,
                unreviewed,
                hidden_fraction,
                bind,
                dev_cors,
            },
        ),
        Command::Synth { rows } => commands::synth(&ctx, rows),
    }
}
