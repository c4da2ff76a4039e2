use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use etdgt::cli::{resolve_scenario, run_case, Overrides};
use etdgt::engine::Algorithm;
use etdgt::error::Error;
use etdgt::oracle;
use etdgt::scenario::gen_large_scenario;
use etdgt::stepsize::BoundReport;

#[derive(Parser)]
#[command(
    name = "etdgt",
    about = "Event-triggered dual gradient tracking simulator for distributed resource allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the oracle, run the requested algorithms, and write trace
    /// CSVs plus a summary JSON.
    Run(RunArgs),
    /// Print the step-size bound report (every constant by name) as JSON.
    Bounds(ScenarioArgs),
    /// Solve the centralized problem and print/write the solution JSON.
    Oracle(ScenarioArgs),
    /// Generate a seeded random strongly connected scenario.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file path or bundled name (case1, case2).
    #[arg(long)]
    scenario: String,
    /// Algorithm to run; repeatable. Defaults to both etdgt and ddgt.
    #[arg(long = "alg")]
    algs: Vec<String>,
    /// Horizon override.
    #[arg(short = 'K')]
    k: Option<usize>,
    /// Step-size override.
    #[arg(long)]
    alpha: Option<f64>,
    /// Trigger magnitude override (E).
    #[arg(long = "threshold-E")]
    threshold_e: Option<f64>,
    /// Trigger decay override (s).
    #[arg(long = "threshold-s")]
    threshold_s: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: String,
    /// Directory to also write the JSON into.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Number of agents.
    #[arg(long)]
    n: usize,
    /// Fraction of agents hosting generators.
    #[arg(long = "gen-fraction", default_value_t = 0.3)]
    gen_fraction: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Scenario file to write.
    #[arg(long)]
    out: PathBuf,
}

fn parse_algorithms(raw: &[String]) -> Result<Vec<Algorithm>, Error> {
    if raw.is_empty() {
        return Ok(vec![Algorithm::EtDgt, Algorithm::Ddgt]);
    }
    raw.iter()
        .map(|s| Algorithm::from_str(s).map_err(Error::InvalidScenario))
        .collect()
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let mut scenario = resolve_scenario(&args.scenario)?;
            Overrides {
                k: args.k,
                alpha: args.alpha,
                threshold_e: args.threshold_e,
                threshold_s: args.threshold_s,
            }
            .apply(&mut scenario)?;
            let algorithms = parse_algorithms(&args.algs)?;
            let outputs = run_case(&scenario, &algorithms, &args.out)?;
            for (alg, path) in &outputs.traces {
                println!("{}: {}", alg.file_tag(), path.display());
            }
            println!("oracle: {}", outputs.oracle_path.display());
            println!("summary: {}", outputs.summary_path.display());
            Ok(())
        }
        Command::Bounds(args) => {
            let scenario = resolve_scenario(&args.scenario)?;
            let report = BoundReport::compute(&scenario)?;
            let text = serde_json::to_string_pretty(&report).expect("json");
            println!("{text}");
            if let Some(dir) = args.out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join(format!("{}_bounds.json", scenario.name)), text + "\n")?;
            }
            Ok(())
        }
        Command::Oracle(args) => {
            let scenario = resolve_scenario(&args.scenario)?;
            let costs = scenario.cost_models()?;
            let sol = oracle::solve_centralized(&costs)?;
            let text = serde_json::to_string_pretty(&sol.to_json_value()).expect("json");
            println!("{text}");
            if let Some(dir) = args.out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join(format!("{}_oracle.json", scenario.name)), text + "\n")?;
            }
            Ok(())
        }
        Command::Gen(args) => {
            let scenario = gen_large_scenario(args.n, args.gen_fraction, args.seed)?;
            if let Some(parent) = args.out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            scenario.save(&args.out)?;
            println!("{}: {}", scenario.name, args.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
