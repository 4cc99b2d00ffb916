use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use semid::decomp::{estimate, DecompOptions, DEFAULT_MAX_NODES};
use semid::graph::parse_graph_json;
use semid::oracle::{
    compare_criteria, comparison_csv, ensemble, random_check, run_criterion, Criterion,
    EnsembleConfig, SuiteOptions,
};
use semid::report::{AnalysisReport, EstimateReport};
use semid::{CovarianceMatrix, MixedGraph};

/// Decide which coefficients of a linear structural equation model are
/// identified, and estimate them from a covariance matrix.
#[derive(Debug, Parser)]
#[command(name = "semid", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Overrides the seed of ensemble configurations.
    #[arg(long, global = true, env = "SEMID_SEED")]
    seed: Option<u64>,
    /// Largest graph accepted by the decomposition search.
    #[arg(long, global = true, env = "SEMID_MAX_NODES", default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,
    /// Absolute error allowed when checking estimates against ground truth.
    #[arg(long, global = true, env = "SEMID_TOLERANCE", default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report which coefficients are identified, with certificates.
    Identify {
        #[arg(long, env = "SEMID_GRAPH")]
        graph: PathBuf,
        /// htc, edge-set, g-htc or decomp.
        #[arg(long, default_value = "decomp", env = "SEMID_MODE")]
        mode: Criterion,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate certificates against a covariance matrix (CSV or JSON).
    Estimate {
        #[arg(long, env = "SEMID_GRAPH")]
        graph: PathBuf,
        #[arg(long)]
        cov: PathBuf,
        /// Report from `identify`; identification runs in decomp mode when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the identified sets of all four procedures as CSV.
    Compare {
        #[arg(long, conflicts_with = "ensemble", required_unless_present = "ensemble")]
        graph: Option<PathBuf>,
        #[arg(long)]
        ensemble: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check soundness, containment and the c-tree property on a random ensemble.
    RandomCheck {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Corrupt one certificate before checking (harness self-test).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Failure categories; each maps to one exit code and error prefix.
#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

const EXIT_PARTIAL: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn load_graph(path: &Path) -> Result<MixedGraph, Failure> {
    parse_graph_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_covariance(path: &Path) -> Result<CovarianceMatrix, Failure> {
    let text = read(path)?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        CovarianceMatrix::from_json_str(&text)
    } else {
        CovarianceMatrix::from_csv_str(&text)
    };
    parsed.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_ensemble(path: &Path, global: &Global) -> Result<EnsembleConfig, Failure> {
    let mut cfg: EnsembleConfig = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    cfg.validate()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    if !(g.tolerance > 0.0 && g.tolerance.is_finite()) {
        return Err(Failure::Input(format!("--tolerance must be positive, got {}", g.tolerance)));
    }
    let decomp = DecompOptions {
        max_nodes: g.max_nodes,
    };
    match cli.command {
        Command::Identify { graph, mode, out } => {
            let graph = load_graph(&graph)?;
            let status =
                run_criterion(&graph, mode, &decomp).map_err(|e| Failure::Input(e.to_string()))?;
            let report = AnalysisReport::new(&graph, mode, &status);
            write(out.as_deref(), &to_json(&report))?;
            Ok(if report.all_identified() { 0 } else { EXIT_PARTIAL })
        }
        Command::Estimate {
            graph,
            cov,
            report,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let sigma = load_covariance(&cov)?;
            sigma
                .aligned_to(&graph)
                .map_err(|e| Failure::Input(format!("{}: {e}", cov.display())))?;
            let status = match report {
                Some(path) => {
                    let rep: AnalysisReport = serde_json::from_str(&read(&path)?)
                        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    rep.status()
                }
                None => run_criterion(&graph, Criterion::Decomp, &decomp)
                    .map_err(|e| Failure::Input(e.to_string()))?,
            };
            let est = estimate(&graph, &status, &sigma).map_err(|e| Failure::Input(e.to_string()))?;
            write(out.as_deref(), &to_json(&EstimateReport::new(&graph, &est)))?;
            Ok(0)
        }
        Command::Compare {
            graph,
            ensemble: cfg_path,
            out,
        } => {
            let mut rows = Vec::new();
            if let Some(path) = graph {
                let graph = load_graph(&path)?;
                let cmp = compare_criteria(&graph, &decomp).map_err(|e| Failure::Input(e.to_string()))?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "graph".into());
                rows.push((id, cmp));
            } else if let Some(path) = cfg_path {
                let cfg = load_ensemble(&path, g)?;
                for eg in ensemble(&cfg) {
                    let cmp = compare_criteria(&eg.graph, &decomp)
                        .map_err(|e| Failure::Input(format!("graph {}: {e}", eg.index)))?;
                    rows.push((format!("g{}", eg.index), cmp));
                }
            }
            write(out.as_deref(), &comparison_csv(&rows))?;
            Ok(0)
        }
        Command::RandomCheck {
            ensemble: path,
            out,
            inject_fault,
        } => {
            let cfg = load_ensemble(&path, g)?;
            let opts = SuiteOptions {
                tolerance: g.tolerance,
                decomp,
                inject_fault,
            };
            let report = random_check(&cfg, &opts).map_err(|e| Failure::Internal(e.to_string()))?;
            write(out.as_deref(), &to_json(&report))?;
            Ok(if report.passed { 0 } else { EXIT_VIOLATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("semid: error[usage]: {first}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("semid: error[input]: {}", msg.replace('\n', " "));
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("semid: error[internal]: {}", msg.replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
