//! `mudet`: massive-MIMO uplink detection experiments from the command line.

mod config;
mod output;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use config::{parse_config, SweepArgs};
use mudet::harness::{
    run_ber_sweep, run_complexity_study, run_convergence_study, run_load_ratio_study,
    run_selftest, ComplexityConfig, ConvergenceConfig, LoadRatioConfig,
};
use mudet::DetectorId;
use output::{emit_results, fmt_f64, OutputFormat, ResultRow, RunManifest};
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "mudet", version, about = "Massive-MIMO uplink detection simulator")]
struct Cli {
    /// Base seed; overrides the MUDET_SEED environment variable and the
    /// config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path (defaults to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER versus SNR for a set of detectors (paired realizations).
    BerSweep(SweepArgs),
    /// LBL convergence trace: DSC difference norms and iteration counts.
    Convergence(ConvergenceArgs),
    /// BER versus load ratio alpha = K/N at fixed SNR.
    LoadRatio(LoadRatioArgs),
    /// Operation-count comparison across detectors and system sizes.
    Complexity(ComplexityArgs),
    /// Runs the built-in property suite.
    Selftest,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(short = 'N', long, default_value_t = 24)]
    n_rx: usize,
    #[arg(short = 'K', long, default_value_t = 8)]
    n_users: usize,
    #[arg(short = 'M', long, default_value_t = 4)]
    qam_order: usize,
    #[arg(long, default_value_t = 10.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1e-6)]
    lbl_epsilon: f64,
    #[arg(long, default_value_t = 10)]
    lbl_t_max: usize,
}

#[derive(Args)]
struct LoadRatioArgs {
    #[arg(short = 'N', long, default_value_t = 256)]
    n_rx: usize,
    /// Comma-separated list of K/N ratios.
    #[arg(long, default_value = "0.5,0.625,0.75")]
    alphas: String,
    #[arg(short = 'M', long, default_value_t = 4)]
    qam_order: usize,
    #[arg(long, default_value_t = 9.0)]
    snr_db: f64,
    #[arg(long, default_value = "lbl")]
    detectors: String,
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 1e-6)]
    lbl_epsilon: f64,
    #[arg(long, default_value_t = 10)]
    lbl_t_max: usize,
    #[arg(long, default_value_t = 0.9)]
    ep_beta: f64,
    #[arg(long, default_value_t = 10)]
    ep_iterations: usize,
}

#[derive(Args)]
struct ComplexityArgs {
    /// TOML file with [[cases]] entries (detector, n_rx, n_users, qam_order,
    /// iterations); defaults to the standard comparison set.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    trials: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexityFile {
    cases: Vec<ComplexityCase>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexityCase {
    detector: String,
    n_rx: usize,
    n_users: usize,
    #[serde(default = "default_order")]
    qam_order: usize,
    #[serde(default = "default_iters")]
    iterations: usize,
}

fn default_order() -> usize {
    4
}

fn default_iters() -> usize {
    10
}

enum CliError {
    Config(String),
    Runtime(String),
}

fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("MUDET_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map(Some)
            .map_err(|e| CliError::Config(format!("MUDET_SEED '{v}': {e}"))),
        Err(_) => Ok(None),
    }
}

fn write_out(path: &Option<PathBuf>, doc: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, doc)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let seed = resolve_seed(cli.seed)?;
    let started = Utc::now();

    match &cli.command {
        Command::BerSweep(args) => {
            let cfg = parse_config(args, seed).map_err(CliError::Config)?;
            let records = run_ber_sweep(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
            let rows: Vec<ResultRow> = records.iter().map(ResultRow::from).collect();
            let manifest = RunManifest::for_sweep("ber-sweep", &cfg, started);
            let doc = emit_results(&rows, &manifest, cli.format).map_err(CliError::Runtime)?;
            write_out(&cli.out, &doc)
        }
        Command::LoadRatio(args) => {
            let alphas: Vec<f64> = args
                .alphas
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| format!("alpha '{s}': {e}")))
                .collect::<Result<_, _>>()
                .map_err(CliError::Config)?;
            let detectors: Vec<DetectorId> = args
                .detectors
                .split(',')
                .map(DetectorId::from_str)
                .collect::<Result<_, _>>()
                .map_err(CliError::Config)?;
            let cfg = LoadRatioConfig {
                detectors,
                n_rx: args.n_rx,
                alphas,
                qam_order: args.qam_order,
                snr_db: args.snr_db,
                n_trials: args.trials,
                base_seed: seed.unwrap_or(1),
                min_error_events: args.min_errors,
                lbl_epsilon: args.lbl_epsilon,
                lbl_t_max: args.lbl_t_max,
                ep_damping: args.ep_beta,
                ep_iterations: args.ep_iterations,
            };
            let study = run_load_ratio_study(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
            let rows: Vec<ResultRow> = study
                .iter()
                .flat_map(|r| r.records.iter().map(ResultRow::from))
                .collect();
            let manifest = RunManifest::new(
                "load-ratio",
                serde_json::to_value(&cfg).unwrap(),
                started,
                Utc::now(),
            );
            let doc = emit_results(&rows, &manifest, cli.format).map_err(CliError::Runtime)?;
            write_out(&cli.out, &doc)
        }
        Command::Convergence(args) => {
            let cfg = ConvergenceConfig {
                n_rx: args.n_rx,
                n_users: args.n_users,
                qam_order: args.qam_order,
                snr_db: args.snr_db,
                n_trials: args.trials,
                base_seed: seed.unwrap_or(1),
                lbl_epsilon: args.lbl_epsilon,
                lbl_t_max: args.lbl_t_max,
            };
            let trace = run_convergence_study(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
            let manifest = RunManifest::new(
                "convergence",
                serde_json::to_value(&cfg).unwrap(),
                started,
                Utc::now(),
            );
            let doc = match cli.format {
                OutputFormat::Csv => {
                    let mut out = format!("# manifest: {}\n", serde_json::to_string(&manifest).unwrap());
                    out.push_str(&format!(
                        "# iterations: median={} p99={} max={}\n",
                        trace.median_iterations, trace.p99_iterations, trace.max_iterations
                    ));
                    out.push_str(&format!(
                        "# iterations_histogram: {}\n",
                        trace
                            .iterations_histogram
                            .iter()
                            .enumerate()
                            .map(|(i, c)| format!("{}:{}", i + 1, c))
                            .collect::<Vec<_>>()
                            .join(" ")
                    ));
                    out.push_str("t,trials_reached,mean_diff,p50,p90,p99\n");
                    for s in &trace.per_iteration {
                        out.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            s.t,
                            s.n,
                            fmt_f64(s.mean),
                            fmt_f64(s.p50),
                            fmt_f64(s.p90),
                            fmt_f64(s.p99)
                        ));
                    }
                    out
                }
                OutputFormat::JsonLines => {
                    let mut out =
                        serde_json::to_string(&serde_json::json!({ "manifest": manifest })).unwrap();
                    out.push('\n');
                    out.push_str(&serde_json::to_string(&trace).unwrap());
                    out.push('\n');
                    out
                }
            };
            write_out(&cli.out, &doc)
        }
        Command::Complexity(args) => {
            let cases: Vec<ComplexityConfig> = match &args.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::Config(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let file: ComplexityFile = toml::from_str(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                    file.cases
                        .iter()
                        .map(|c| {
                            Ok(ComplexityConfig {
                                detector: DetectorId::from_str(&c.detector)
                                    .map_err(CliError::Config)?,
                                n_rx: c.n_rx,
                                n_users: c.n_users,
                                qam_order: c.qam_order,
                                iterations: c.iterations,
                            })
                        })
                        .collect::<Result<_, CliError>>()?
                }
                None => [DetectorId::Lbl, DetectorId::Pic, DetectorId::Mrc, DetectorId::Mmse, DetectorId::Ep]
                    .into_iter()
                    .map(|detector| ComplexityConfig {
                        detector,
                        n_rx: 192,
                        n_users: 64,
                        qam_order: 4,
                        iterations: 10,
                    })
                    .collect(),
            };
            let records = run_complexity_study(&cases, seed.unwrap_or(1), args.trials)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let manifest = RunManifest::new(
                "complexity",
                serde_json::to_value(&cases).unwrap(),
                started,
                Utc::now(),
            );
            // pairwise op-count ratios against LBL at matching sizes
            let mut ratio_lines = String::new();
            for r in &records {
                if r.detector == DetectorId::Lbl {
                    continue;
                }
                if let Some(lbl) = records.iter().find(|x| {
                    x.detector == DetectorId::Lbl && x.n_rx == r.n_rx && x.n_users == r.n_users
                }) {
                    ratio_lines.push_str(&format!(
                        "# ratio {}/lbl at N={} K={}: {:.2}\n",
                        r.detector,
                        r.n_rx,
                        r.n_users,
                        r.mean_op_count / lbl.mean_op_count
                    ));
                }
            }
            let doc = match cli.format {
                OutputFormat::Csv => {
                    let mut out = format!("# manifest: {}\n", serde_json::to_string(&manifest).unwrap());
                    out.push_str(&ratio_lines);
                    out.push_str("detector,N,K,T,mean_op_count,mean_iterations,mean_factorizations\n");
                    for r in &records {
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            r.detector,
                            r.n_rx,
                            r.n_users,
                            r.iterations,
                            fmt_f64(r.mean_op_count),
                            fmt_f64(r.mean_iterations),
                            fmt_f64(r.mean_factorizations)
                        ));
                    }
                    out
                }
                OutputFormat::JsonLines => {
                    let mut out =
                        serde_json::to_string(&serde_json::json!({ "manifest": manifest })).unwrap();
                    out.push('\n');
                    for r in &records {
                        out.push_str(&serde_json::to_string(r).unwrap());
                        out.push('\n');
                    }
                    out
                }
            };
            write_out(&cli.out, &doc)
        }
        Command::Selftest => {
            let results = run_selftest(seed.unwrap_or(1));
            let mut all = true;
            for r in &results {
                println!("{} {} — {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                all &= r.passed;
            }
            if all {
                println!("selftest: {} checks passed", results.len());
                Ok(())
            } else {
                Err(CliError::Runtime("selftest failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
