use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use adaquery::adapter::AdapterRegistry;
use adaquery::campaign::{recheck, run_campaign, CampaignConfig, OracleChoice, RecheckOutcome};
use adaquery::feature::{load_stats, Catalog, InferenceConfig};

const EXIT_CLEAN: u8 = 0;
const EXIT_BUGS: u8 = 1;
const EXIT_FATAL: u8 = 2;

#[derive(Parser)]
#[command(name = "adaquery", version, about = "Adaptive metamorphic SQL fuzzer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a testing campaign.
    Run(RunArgs),
    /// Replay every bug report in an output directory.
    Recheck {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Print a feature statistics file.
    Stats {
        #[arg(long)]
        stats: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `sqlite:<path>` or `mock:<spec-path>`.
    #[arg(long)]
    target: String,
    #[arg(long, default_value = "tlp", value_parser = ["tlp", "norec", "both"])]
    oracle: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    threshold_p: f64,
    /// Statements per feedback window and per depth step.
    #[arg(long, default_value_t = 100_000)]
    interval_i: u64,
    #[arg(long, default_value_t = 3)]
    max_depth: u32,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Statements to execute.
    #[arg(long, required_unless_present = "duration")]
    budget: Option<u64>,
    /// Seconds to run.
    #[arg(long)]
    duration: Option<u64>,
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    no_feedback: bool,
    #[arg(long)]
    isolate_stats: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Recheck { out, target } => run_recheck(out, &target),
        Command::Stats { stats } => print_stats(stats),
    };
    ExitCode::from(code.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_FATAL
    }))
}

fn run(a: RunArgs) -> Result<u8, Box<dyn std::error::Error>> {
    let inference =
        InferenceConfig::with_threshold(a.threshold_p).ok_or("--threshold-p must lie in (0, 1)")?;
    let mut cfg = CampaignConfig::new(a.target, a.out);
    cfg.oracle = OracleChoice::from_token(&a.oracle).expect("clap restricts the values");
    cfg.inference = inference;
    cfg = cfg.with_interval(a.interval_i);
    cfg.gen.seed = a.seed;
    cfg.gen.max_depth = a.max_depth;
    cfg.workers = a.workers;
    cfg.budget = a.budget;
    cfg.duration = a.duration.map(Duration::from_secs);
    cfg.stats_path = a.stats;
    cfg.feedback = !a.no_feedback;
    cfg.isolate_stats = a.isolate_stats;
    let m = run_campaign(&cfg)?;
    let states: Vec<String> = m
        .features_by_state()
        .iter()
        .map(|(s, n)| format!("{s}={n}"))
        .collect();
    println!(
        "{} statements ({} ok), {} checks ({} valid), {} bug reports ({} new); features {}",
        m.statements_executed,
        m.statements_succeeded,
        m.checks_executed,
        m.checks_succeeded,
        m.bugs.len(),
        m.bugs_new(),
        states.join(" ")
    );
    if let Some(f) = &m.fatal {
        eprintln!("fatal: {f}");
        return Ok(EXIT_FATAL);
    }
    Ok(if m.bugs.is_empty() {
        EXIT_CLEAN
    } else {
        EXIT_BUGS
    })
}

fn run_recheck(out: PathBuf, target: &str) -> Result<u8, Box<dyn std::error::Error>> {
    let catalog = Arc::new(Catalog::default_catalog());
    let mut adapter = AdapterRegistry::default().open(target, 0, &catalog)?;
    let entries = recheck(&out, &mut *adapter)?;
    let mut failing = 0;
    for e in &entries {
        match &e.outcome {
            RecheckOutcome::Fail => {
                failing += 1;
                println!("{}\tfail", e.name);
            }
            RecheckOutcome::Pass => println!("{}\tpass", e.name),
            RecheckOutcome::Skip(why) => println!("{}\tskip\t{why}", e.name),
        }
    }
    println!("{} of {} reports still fail", failing, entries.len());
    Ok(if failing > 0 { EXIT_BUGS } else { EXIT_CLEAN })
}

fn print_stats(path: PathBuf) -> Result<u8, Box<dyn std::error::Error>> {
    println!("feature\tN\ty\tstate");
    for r in load_stats(&path)? {
        println!("{}\t{}\t{}\t{}", r.feature, r.n, r.y, r.state.token());
    }
    Ok(EXIT_CLEAN)
}
