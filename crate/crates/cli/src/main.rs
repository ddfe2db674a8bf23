use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use kframe_core::canonical::{canonical_kdual, canonical_via_restricted};
use kframe_core::io::{read_coded, read_dual, read_matrix, read_system, read_vector};
use kframe_core::recovery::{
    find_rk_matrix, recover_blind, recover_consistency, recover_side_info, RecoveryReport, Strategy,
};
use kframe_core::redundancy::{
    is_maximal_robust, mrc_all, mrc_subset, spark, uniform_excess, DEFAULT_SPARK_CAP,
};
use kframe_core::simulate::{run_simulation, ExperimentConfig};
use kframe_core::{fixtures, DualSystem, ErasureSet, Error, KFrameSystem, TolerancePolicy};

const EXIT_CONTRACT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "kframe", version, about = "K-frame analysis and erasure recovery")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Relative rank cutoff.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Relative residual tolerance.
    #[arg(long, global = true)]
    tol_res: Option<f64>,
    /// Maximum number of subsets any enumeration may visit.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    cap_subsets: u128,
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Compact single-line JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds, classification and redundancy diagnostics of a system.
    Analyze {
        #[arg(long)]
        system: PathBuf,
        /// Erasure count for the MRC scan.
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
    /// The canonical K-dual.
    CanonicalDual {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum, default_value = "douglas")]
        method: Method,
    },
    /// Verifies a candidate K-dual.
    CheckDual {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        dual: PathBuf,
    },
    /// Spark of a matrix with a minimal-support kernel vector.
    Spark {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Minimal redundancy condition for one erasure set or all sets of size r.
    Mrc {
        #[arg(long)]
        system: PathBuf,
        /// Comma-separated 1-based indices.
        #[arg(long, value_delimiter = ',', conflicts_with = "r")]
        sigma: Option<Vec<usize>>,
        #[arg(long)]
        r: Option<usize>,
    },
    /// Recovers erased coefficients.
    Recover {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        dual: PathBuf,
        #[arg(long)]
        coded: PathBuf,
        #[arg(long, default_value = "side-info")]
        strategy: Strategy,
        /// Recovery matrix; side-info defaults to the Gramian, blind requires one.
        #[arg(long)]
        rk_matrix: Option<PathBuf>,
        /// Side vector v = Fᵀ·K·f, required by side-info recovery.
        #[arg(long)]
        side_info: Option<PathBuf>,
    },
    /// Seeded search for an (r,k)-matrix.
    FindRk {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        dual: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Seeded Monte-Carlo erasure experiment.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        /// Defaults to the canonical dual.
        #[arg(long)]
        dual: Option<PathBuf>,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1000)]
        signals: usize,
        /// Repeatable; defaults to every strategy.
        #[arg(long)]
        strategy: Vec<Strategy>,
        #[arg(long)]
        rk_matrix: Option<PathBuf>,
        /// Search budget when blind recovery needs a matrix.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Built-in example systems.
    Fixtures {
        /// FIX-A to FIX-D; all fixtures when omitted.
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Method {
    Douglas,
    Restricted,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_input_error() => EXIT_INPUT,
            CliError::Core(_) => EXIT_CONTRACT,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let text = if cli.global.pretty {
                serde_json::to_string_pretty(&report)
            } else {
                serde_json::to_string(&report)
            };
            println!("{}", text.expect("reports serialise"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kframe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn tolerance(g: &GlobalOpts) -> CliResult<TolerancePolicy> {
    let d = TolerancePolicy::default();
    Ok(TolerancePolicy::new(
        g.tol_rank.unwrap_or(d.rank_cutoff_rel),
        g.tol_res.unwrap_or(d.residual_rel),
    )?)
}

fn load_system(path: &Path, tol: TolerancePolicy) -> CliResult<KFrameSystem> {
    let (f, k) = read_system(path)?;
    Ok(KFrameSystem::new(f, k, tol)?)
}

fn load_dual(sys: &KFrameSystem, path: &Path) -> CliResult<DualSystem> {
    Ok(sys.verify_kdual(read_dual(path)?)?)
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v).map_err(Error::from)?)
}

fn run(cli: &Cli) -> CliResult<Value> {
    let g = &cli.global;
    let tol = tolerance(g)?;
    let cap = g.cap_subsets;
    match &cli.command {
        Command::Analyze { system, r } => {
            let sys = load_system(system, tol)?;
            let (f, k) = (sys.f(), sys.k().matrix());
            if *r > sys.m() {
                return Err(CliError::Usage(format!("--r {r} exceeds m = {}", sys.m())));
            }
            let (all, witness) = mrc_all(f, k, *r, cap, &tol)?;
            Ok(json!({
                "n": sys.n(),
                "m": sys.m(),
                "bounds": sys.bounds(),
                "classify": sys.classify(),
                "spark": spark(f, &tol, DEFAULT_SPARK_CAP)?,
                "uniform_excess": uniform_excess(f, k, cap, &tol)?,
                "mrc": { "r": r, "all_mrc": all, "witness": witness },
                "maximal_robust": is_maximal_robust(f, k, cap, &tol)?,
            }))
        }
        Command::CanonicalDual { system, method } => {
            let sys = load_system(system, tol)?;
            let restricted = canonical_via_restricted(&sys)?;
            let dual = match method {
                Method::Douglas => canonical_kdual(&sys)?.dual,
                Method::Restricted => restricted.projected_image.clone(),
            };
            Ok(json!({
                "G": dual.g,
                "residual": dual.residual,
                "is_valid": dual.is_valid,
                "hypotheses": restricted.hypotheses,
            }))
        }
        Command::CheckDual { system, dual } => {
            let sys = load_system(system, tol)?;
            to_value(&load_dual(&sys, dual)?)
        }
        Command::Spark { matrix } => to_value(&spark(&read_matrix(matrix)?, &tol, DEFAULT_SPARK_CAP)?),
        Command::Mrc { system, sigma, r } => {
            let sys = load_system(system, tol)?;
            let (f, k) = (sys.f(), sys.k().matrix());
            match (sigma, r) {
                (Some(sigma), _) => {
                    let sigma = ErasureSet::from_one_based(sigma, sys.m())?;
                    to_value(&mrc_subset(f, k, &sigma, &tol)?)
                }
                (None, Some(r)) => {
                    let (all, witness) = mrc_all(f, k, *r, cap, &tol)?;
                    Ok(json!({ "r": r, "all_mrc": all, "witness": witness }))
                }
                (None, None) => Err(CliError::Usage("mrc needs --sigma or --r".into())),
            }
        }
        Command::Recover {
            system,
            dual,
            coded,
            strategy,
            rk_matrix,
            side_info,
        } => {
            let sys = load_system(system, tol)?;
            let dual = load_dual(&sys, dual)?;
            let coded = read_coded(coded)?;
            let matrix = rk_matrix.as_deref().map(read_matrix).transpose()?;
            let report: RecoveryReport = match strategy {
                Strategy::SideInfo => {
                    let v = side_info
                        .as_deref()
                        .ok_or_else(|| CliError::Usage("side-info recovery needs --side-info".into()))?;
                    let m = matrix.unwrap_or_else(|| sys.gramian().clone());
                    recover_side_info(&sys, &dual, &m, &coded, &read_vector(v)?)?
                }
                Strategy::Blind => {
                    let m = matrix.ok_or_else(|| CliError::Usage("blind recovery needs --rk-matrix".into()))?;
                    recover_blind(&sys, &dual, &m, &coded)?
                }
                Strategy::Consistency => recover_consistency(&sys, &dual, &coded)?,
            };
            to_value(&report)
        }
        Command::FindRk { system, dual, r, trials } => {
            let sys = load_system(system, tol)?;
            let dual = load_dual(&sys, dual)?;
            to_value(&find_rk_matrix(&sys, &dual, *r, *trials, g.seed, DEFAULT_SPARK_CAP)?)
        }
        Command::Simulate {
            system,
            dual,
            r,
            signals,
            strategy,
            rk_matrix,
            trials,
        } => {
            let sys = load_system(system, tol)?;
            let dual = match dual {
                Some(path) => load_dual(&sys, path)?,
                None => canonical_kdual(&sys)?.dual,
            };
            let mut cfg = ExperimentConfig::new(*r, *signals, g.seed);
            if !strategy.is_empty() {
                cfg.strategies = strategy.clone();
            }
            cfg.rk_matrix = rk_matrix.as_deref().map(read_matrix).transpose()?;
            cfg.search_trials = *trials;
            to_value(&run_simulation(&sys, &dual, &cfg)?)
        }
        Command::Fixtures { name } => match name {
            Some(name) => to_value(&fixtures::by_name(name).map_err(|e| CliError::Usage(e.to_string()))?),
            None => to_value(&fixtures::all().into_iter().map(|f| (f.name, f)).collect::<BTreeMap<_, _>>()),
        },
    }
}
