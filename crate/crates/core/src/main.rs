use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use vickrey_ring::harness::appendix::replay_appendix;
use vickrey_ring::harness::bench::{bench, write_csv};
use vickrey_ring::harness::{run_auction, AuctionConfig};
use vickrey_ring::transcript::Transcript;
use vickrey_ring::verify::audit_transcript;
use vickrey_ring::Error;

#[derive(Parser)]
#[command(name = "vickrey", version, about = "Sealed-bid second-price auction without an auctioneer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one auction from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON-lines transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Audit a transcript using only its public values.
    Verify {
        #[arg(long)]
        transcript: PathBuf,
    },
    /// Replay the bundled five-bidder example.
    Demo {
        #[arg(long, required = true)]
        appendix: bool,
    },
    /// Time honest auctions over a grid and write a CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn failure(e: &Error) -> ExitCode {
    error!("{e}");
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn run(config: PathBuf, transcript: Option<PathBuf>, seed: Option<u64>) -> Result<ExitCode, Error> {
    let mut cfg = AuctionConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = Some(s.into());
    }
    let (outcome, t) = run_auction(&cfg)?;
    if let Some(path) = transcript {
        t.write_jsonl(BufWriter::new(File::create(path)?))?;
    }
    println!("price {} ({})", outcome.price.value, outcome.price.bit_string());
    println!("matching slots {:?}", outcome.matching_slots);
    if !outcome.accepted {
        println!("price rejected: no committed bid matches");
        return Ok(ExitCode::from(1));
    }
    match outcome.winner {
        Some(w) if outcome.tie => println!("winner bidder {w} (drawn among matching slots)"),
        Some(w) => println!("winner bidder {w}"),
        None => println!("no winner"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(path: PathBuf) -> Result<ExitCode, Error> {
    let t = Transcript::read_jsonl(BufReader::new(File::open(path)?))?;
    let report = audit_transcript(&t)?;
    for c in &report.checks {
        let at = c.j.map(|j| format!("[{j}]")).unwrap_or_default();
        let mark = if c.pass { "ok  " } else { "FAIL" };
        println!("{mark} {}{at}: expected {}, got {}", c.name, c.expected, c.actual);
    }
    println!("{}", report.verdict);
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AUCTION_LOG", "warn")).init();
    let result = match Cli::parse().command {
        Command::Run { config, transcript, seed } => run(config, transcript, seed),
        Command::Verify { transcript } => verify(transcript),
        Command::Demo { .. } => replay_appendix().map(|a| {
            let o = a.outcome().expect("replay finishes the auction");
            println!("appendix replay matches: price {} ({}), winner bidder {}", o.price.value, o.price.bit_string(), o.winner.unwrap_or(0));
            ExitCode::SUCCESS
        }),
        Command::Bench { n, k, reps, seed, out } => bench(&n, &k, reps, seed).and_then(|rows| {
            write_csv(&rows, BufWriter::new(File::create(&out)?))?;
            println!("{} rows written to {}", rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }),
    };
    result.unwrap_or_else(|e| failure(&e))
}
