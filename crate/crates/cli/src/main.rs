mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "gqrs", version, about = "Quasi-random copula sampling with GAN transport maps")]
struct Cli {
    /// Cap on worker threads (falls back to GQRS_THREADS, then all cores).
    #[arg(long, global = true, env = "GQRS_THREADS")]
    threads: Option<usize>,

    /// Where to write the run manifest (default: manifest.json in the output directory).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a space-filling design on the unit cube as CSV.
    Design(commands::DesignArgs),
    /// Rank-transform a numeric CSV into pseudo-observations.
    Ingest(commands::IngestArgs),
    /// Train a generator/discriminator pair on data.
    Train(commands::TrainArgs),
    /// Draw copula samples from a trained model or a parametric copula.
    Sample(commands::SampleArgs),
    /// Cramér–von Mises statistic against a copula or a reference sample.
    Gof(commands::GofArgs),
    /// Replicated expected-shortfall variance study.
    EsStudy(commands::StudyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let threads = match cli.threads {
        Some(0) => {
            report(&anyhow::anyhow!("--threads must be positive"));
            return ExitCode::from(2);
        }
        Some(t) => t,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let ctx = commands::Context { threads, manifest: cli.manifest };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    let result = pool.install(|| match cli.command {
        Command::Design(a) => commands::design(&ctx, a),
        Command::Ingest(a) => commands::ingest(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Sample(a) => commands::sample(&ctx, a),
        Command::Gof(a) => commands::gof(&ctx, a),
        Command::EsStudy(a) => commands::es_study(&ctx, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}

/// One JSON line on stderr so scripts can parse failures.
fn report(e: &anyhow::Error) {
    let chain: Vec<String> = e.chain().map(ToString::to_string).collect();
    eprintln!("{}", serde_json::json!({ "error": chain.join(": ") }));
}
