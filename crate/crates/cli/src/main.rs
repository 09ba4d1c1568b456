use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_path_to_error::Segment;

use trunctail::io::read_sample_csv;
use trunctail::runs::{self, EstimateRun, LimitCheckRun, RunResult, RunSpec, SimulateRun};
use trunctail::tail_index::DEFAULT_THETA;
use trunctail::{estimate, CellSpec, EstimateOptions, Error, StudyConfig, Variant};

const EXIT_INPUT: u8 = 2;
const EXIT_MODEL: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_NUMERIC: u8 = 5;
const EXIT_NOT_REPRODUCED: u8 = 1;

#[derive(Parser)]
#[command(name = "trunctail", version, about = "Tail index estimation under random right truncation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate gamma1 from a CSV of observed pairs (header `x,y`).
    Estimate(EstimateArgs),
    /// Run a replicated Burr simulation study.
    Simulate(SimulateArgs),
    /// Compare the Monte Carlo variance of the limit law with its closed form.
    LimitCheck(LimitCheckArgs),
    /// Re-run a command from its manifest and check the outputs match.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct EstimateArgs {
    input: PathBuf,
    #[arg(long, default_value_t = Variant::Woodroofe)]
    variant: Variant,
    /// Number of upper order statistics; selected automatically when absent.
    #[arg(long)]
    k: Option<usize>,
    /// Order statistics for the plug-in gamma2 estimate.
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Confidence level of the interval.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Write the estimate JSON here (plus a manifest) instead of only printing it.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write `k,gamma1_hat` over the search range (needs --output).
    #[arg(long, requires = "output")]
    trace: Option<PathBuf>,
    /// Write the product-limit fit `x,c_n,df` (needs --output).
    #[arg(long, requires = "output")]
    fit: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON study configuration; inline flags describe a single cell otherwise.
    #[arg(long, conflicts_with_all = ["p", "gamma1", "sizes"])]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Untruncated sample size; repeat for several.
    #[arg(long = "N", id = "sizes")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = Variant::Woodroofe)]
    variant: Variant,
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Master seed (overrides any seed in the config file).
    #[arg(long)]
    seed: u64,
    #[arg(long, env = "TRUNCTAIL_THREADS")]
    threads: Option<usize>,
    /// Output prefix: writes `<prefix>.csv` and `<prefix>.json`.
    #[arg(long, default_value = "report")]
    output: PathBuf,
}

#[derive(Args)]
struct LimitCheckArgs {
    #[arg(long)]
    gamma1: f64,
    #[arg(long)]
    gamma2: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    /// Uniform grid steps per path.
    #[arg(long, default_value_t = 1 << 14)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, env = "TRUNCTAIL_THREADS")]
    threads: Option<usize>,
    #[arg(long, default_value = "limit_check.json")]
    output: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ModelViolation(_) => EXIT_MODEL,
        Error::DegenerateTail(_) | Error::EmptySample { .. } => EXIT_DEGENERATE,
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_INPUT,
    }
}

fn default_threads(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_estimate(a: EstimateArgs) -> Result<u8, Error> {
    let est = match a.output {
        None => {
            let sample = read_sample_csv(File::open(&a.input)?)?;
            if sample.len() < 3 {
                return Err(Error::InvalidSample(format!("need at least 3 rows, found {}", sample.len())));
            }
            let opts = EstimateOptions { variant: a.variant, k: a.k, k2: a.k2, theta: a.theta, level: a.level };
            estimate(&sample, &opts)?
        }
        Some(output) => {
            let run = EstimateRun {
                input: a.input,
                output,
                variant: a.variant,
                k: a.k,
                k2: a.k2,
                theta: a.theta,
                level: a.level,
                trace: a.trace,
                fit: a.fit,
            };
            match runs::execute(&RunSpec::Estimate(run))?.result {
                RunResult::Estimate(e) => e,
                _ => unreachable!("estimate run"),
            }
        }
    };
    print_json(&est);
    if est.model_violation() {
        eprintln!("model violation: gamma2_hat <= gamma1_hat, no confidence interval");
        return Ok(EXIT_MODEL);
    }
    Ok(0)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

/// Reads a study config, reporting schema errors by JSON pointer.
fn load_config(path: &Path) -> Result<StudyConfig, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut de = serde_json::Deserializer::from_reader(BufReader::new(file));
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let pointer = json_pointer(e.path());
        format!("{}: {pointer}: {}", path.display(), e.into_inner())
    })
}

fn cmd_simulate(a: SimulateArgs) -> Result<u8, Error> {
    let mut config = match &a.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(msg) => {
                eprintln!("error: invalid config: {msg}");
                return Ok(EXIT_INPUT);
            }
        },
        None => {
            let cells = match (a.p, a.gamma1) {
                (Some(p), Some(gamma1)) => vec![CellSpec { p, gamma1, delta: a.delta, sizes: a.sizes.clone() }],
                (None, None) if a.sizes.is_empty() => vec![],
                _ => {
                    eprintln!("error: inline cells need --p, --gamma1 and at least one --N");
                    return Ok(EXIT_INPUT);
                }
            };
            StudyConfig { cells, replicates: a.reps, variant: a.variant, theta: a.theta, master_seed: a.seed }
        }
    };
    config.master_seed = a.seed;
    let issues = config.issues();
    if !issues.is_empty() {
        for i in &issues {
            eprintln!("error: invalid config: {}: {}", i.pointer, i.message);
        }
        return Ok(EXIT_INPUT);
    }
    let with_ext = |ext: &str| {
        let mut s = a.output.as_os_str().to_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    let run = SimulateRun {
        config,
        config_file: a.config.clone(),
        csv: with_ext(".csv"),
        json: with_ext(".json"),
        threads: default_threads(a.threads),
    };
    let out = runs::execute(&RunSpec::Simulate(run.clone()))?;
    eprintln!(
        "wrote {} and {} (manifest {})",
        run.csv.display(),
        run.json.display(),
        out.manifest_path.display()
    );
    print!("{}", std::fs::read_to_string(&run.csv)?);
    Ok(0)
}

fn cmd_limit_check(a: LimitCheckArgs) -> Result<u8, Error> {
    let run = LimitCheckRun {
        gamma1: a.gamma1,
        gamma2: a.gamma2,
        paths: a.paths,
        m: a.m,
        seed: a.seed,
        output: a.output,
        threads: default_threads(a.threads),
    };
    match runs::execute(&RunSpec::LimitCheck(run))?.result {
        RunResult::LimitCheck(report) => print_json(&report),
        _ => unreachable!("limit-check run"),
    }
    Ok(0)
}

fn cmd_replay(manifest: &Path) -> Result<u8, Error> {
    let report = runs::replay(manifest)?;
    if report.reproduced() {
        println!("reproduced: all {} outputs match", report.outcome.manifest.outputs.len());
        Ok(0)
    } else {
        for p in &report.mismatched {
            eprintln!("output differs: {}", p.display());
        }
        Ok(EXIT_NOT_REPRODUCED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::LimitCheck(a) => cmd_limit_check(a),
        Command::Replay { manifest } => cmd_replay(&manifest),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
