//! `qwb`: generate and solve k-SAT instances, materialize backtracking trees,
//! and run the walk-based detection, finding and analysis pipelines with
//! reproducible configuration.

mod config;

use clap::{Args, Parser, Subcommand};
use config::ResolvedConfig;
use qwb_core::analysis::{expected_tree_size, separation_experiment};
use qwb_core::backtrack::{build_tree, run_backtracking, BacktrackTree, BuildOptions};
use qwb_core::csp::{parse_dimacs, random_ksat, InstanceFile, KSatInstance, NaiveHeuristic};
use qwb_core::error::{Error, Result};
use qwb_core::search::{
    calibrate_constants, detect, find_all, find_marked, unique_find, DetectionOutcome, FindOutcome,
    SearchTranscript,
};
use qwb_core::spectral::eigendecompose;
use qwb_core::suite::standard_suite;
use qwb_core::walk::{build_walk, WalkOperators};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "qwb",
    about = "walk-based search on backtracking trees",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Seed of the named generator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Target failure probability.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Phase-estimation precision constant.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Repetition constant.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Dense eigendecomposition threshold.
    #[arg(long, global = true)]
    max_dim: Option<usize>,
    /// Vertex budget for tree materialization and size doubling.
    #[arg(long, global = true)]
    vertex_cap: Option<usize>,
    /// Output format where applicable (json, csv, dimacs).
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the timestamp field for byte-identical reruns.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random k-SAT instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
    /// Run the classical backtracking traversal and report statistics.
    Solve {
        input: PathBuf,
        #[arg(long)]
        depth_limit: Option<usize>,
    },
    /// Materialize the backtracking tree and dump it as JSON.
    Tree {
        input: PathBuf,
        #[arg(long)]
        depth_limit: Option<usize>,
        /// Export the dense reflection operators as coordinate-list text.
        #[arg(long)]
        operators: Option<PathBuf>,
    },
    /// Walk-based detection of a satisfying assignment.
    Detect {
        input: PathBuf,
        /// Size bound fed to the detection run (default: materialized size).
        #[arg(long)]
        t_bound: Option<usize>,
        /// Export the spectrum as CSV of (theta, root weight).
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Walk-based search for one satisfying assignment.
    Find { input: PathBuf },
    /// Walk-based enumeration of all solutions.
    FindAll { input: PathBuf },
    /// Faster search under the unique-solution promise.
    UniqueFind { input: PathBuf },
    /// Calibrate the detection constants on the standard tree suite.
    Calibrate {
        /// Seed of the standard suite.
        #[arg(long, default_value_t = 1)]
        suite_seed: u64,
        /// Also write the constants as a loadable key=value config file.
        #[arg(long)]
        write_config: Option<PathBuf>,
    },
    /// Exact expected tree size for the random k-SAT model.
    ExpectedSize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, conflicts_with = "alpha")]
        m: Option<usize>,
        /// Clause density; used as m = ceil(alpha * n).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Paired average-case experiment over the heavy-tail distribution.
    Experiment {
        /// Comma-separated list of variable counts.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10usize, 12, 14, 16])]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Write the summary JSON here (rows go to --out or stdout).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    config: ResolvedConfig,
    #[serde(flatten)]
    body: T,
}

struct Context {
    config: ResolvedConfig,
    out: Option<PathBuf>,
    timestamp: Option<u64>,
}

impl Context {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
            None => {
                println!("{}", text.trim_end_matches('\n'));
                Ok(())
            }
        }
    }

    fn emit_report<T: Serialize>(&self, body: T) -> Result<()> {
        let report = Report {
            timestamp: self.timestamp,
            config: self.config.clone(),
            body,
        };
        self.emit(&format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("report serialization")
        ))
    }
}

enum LoadedInput {
    Instance(KSatInstance),
    Tree(BacktrackTree),
}

fn load_input(path: &Path) -> Result<LoadedInput> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if value.get("vertices").is_some() {
            return Ok(LoadedInput::Tree(BacktrackTree::from_json(&text)?));
        }
        let file: InstanceFile = serde_json::from_value(value)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        return Ok(LoadedInput::Instance(file.instance()?));
    }
    Ok(LoadedInput::Instance(parse_dimacs(&text)?))
}

fn require_instance(path: &Path) -> Result<KSatInstance> {
    match load_input(path)? {
        LoadedInput::Instance(instance) => Ok(instance),
        LoadedInput::Tree(_) => Err(Error::Input(format!(
            "{} holds a tree dump; this command needs a problem instance",
            path.display()
        ))),
    }
}

#[derive(Serialize)]
struct SolveBody {
    input_n: usize,
    input_k: usize,
    input_m: usize,
    stats: qwb_core::backtrack::TraversalStats,
}

#[derive(Serialize)]
struct DetectBody {
    tree_vertices: usize,
    t_bound: usize,
    outcome: DetectionOutcome,
    transcript: SearchTranscript,
}

#[derive(Serialize)]
struct FindBody {
    outcome: FindOutcome,
    transcript: SearchTranscript,
}

#[derive(Serialize)]
struct FindAllBody {
    solutions: Vec<qwb_core::csp::PartialAssignment>,
    transcript: SearchTranscript,
}

#[derive(Serialize)]
struct UniqueFindBody {
    solution: qwb_core::csp::PartialAssignment,
    transcript: SearchTranscript,
}

#[derive(Serialize)]
struct CalibrateBody {
    calibration: qwb_core::search::CalibrationResult,
    suite_seed: u64,
}

#[derive(Serialize)]
struct ExpectedSizeBody {
    model: qwb_core::analysis::TreeSizeModel,
}

#[derive(Serialize)]
struct ExperimentSummaryBody {
    summary: Vec<qwb_core::analysis::NSummary>,
    fitted_step_constant: f64,
    ratios_strictly_increasing: bool,
}

fn run(cli: Cli) -> Result<()> {
    let mut config = ResolvedConfig::default();
    if let Ok(path) = std::env::var("QWB_CONFIG") {
        config.apply_file(Path::new(&path))?;
    }
    let g = &cli.global;
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if let Some(delta) = g.delta {
        config.delta = delta;
    }
    if let Some(beta) = g.beta {
        config.beta = beta;
    }
    if let Some(gamma) = g.gamma {
        config.gamma = gamma;
    }
    if let Some(max_dim) = g.max_dim {
        config.max_dim = max_dim;
    }
    if let Some(vertex_cap) = g.vertex_cap {
        config.vertex_cap = vertex_cap;
    }
    if let Some(format) = &g.format {
        config.format = format.clone();
    }
    let timestamp = if g.no_timestamp {
        None
    } else {
        Some(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    };
    let ctx = Context {
        out: g.out.clone(),
        timestamp,
        config,
    };

    match cli.command {
        Command::Gen { n, k, m } => {
            let spec = ctx.config.rng_spec();
            let instance = random_ksat(n, k, m, &spec)?;
            match ctx.config.format.as_str() {
                "json" => {
                    let file = InstanceFile::new(&instance, Some(&spec));
                    ctx.emit(&format!(
                        "{}\n",
                        serde_json::to_string_pretty(&file).expect("instance serialization")
                    ))
                }
                "dimacs" | "" => ctx.emit(&instance.to_dimacs()),
                other => Err(Error::Input(format!(
                    "gen supports --format dimacs or json, not '{other}'"
                ))),
            }
        }
        Command::Solve { input, depth_limit } => {
            let instance = require_instance(&input)?;
            let options = BuildOptions {
                depth_limit,
                vertex_cap: ctx.config.vertex_cap,
            };
            let stats = run_backtracking(&instance, &NaiveHeuristic, &options)?;
            ctx.emit_report(SolveBody {
                input_n: instance.n(),
                input_k: instance.k(),
                input_m: instance.m(),
                stats,
            })
        }
        Command::Tree {
            input,
            depth_limit,
            operators,
        } => {
            let tree = match load_input(&input)? {
                LoadedInput::Instance(instance) => {
                    let options = BuildOptions {
                        depth_limit,
                        vertex_cap: ctx.config.vertex_cap,
                    };
                    build_tree(&instance, &NaiveHeuristic, &options)?
                }
                LoadedInput::Tree(tree) => match depth_limit {
                    Some(limit) => tree.truncated(limit),
                    None => tree,
                },
            };
            if let Some(path) = operators {
                let walk = build_walk(&tree, tree.n.max(1))?;
                let text = format!(
                    "# operator A\n{}# operator B\n{}",
                    WalkOperators::to_coo_string(&walk.dense_r_a()),
                    WalkOperators::to_coo_string(&walk.dense_r_b())
                );
                std::fs::write(&path, text)
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            ctx.emit(&format!("{}\n", tree.to_json()))
        }
        Command::Detect {
            input,
            t_bound,
            spectrum,
        } => {
            let tree = match load_input(&input)? {
                LoadedInput::Instance(instance) => {
                    let options = BuildOptions {
                        depth_limit: None,
                        vertex_cap: ctx.config.vertex_cap,
                    };
                    build_tree(&instance, &NaiveHeuristic, &options)?
                }
                LoadedInput::Tree(tree) => tree,
            };
            let n = tree.n.max(1);
            let bound = t_bound.unwrap_or_else(|| tree.len());
            let detection = ctx.config.detection();
            let mut rng = ctx.config.rng_spec().build()?;
            let (outcome, transcript) = detect(&tree, n, bound, &detection, &mut rng)?;
            if let Some(path) = spectrum {
                let walk = build_walk(&tree, n)?;
                let decomp = eigendecompose(&walk, detection.max_dim)?;
                std::fs::write(&path, decomp.spectrum_csv(&walk.root_state()))
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            ctx.emit_report(DetectBody {
                tree_vertices: tree.len(),
                t_bound: bound,
                outcome,
                transcript,
            })
        }
        Command::Find { input } => {
            let instance = require_instance(&input)?;
            let detection = ctx.config.detection();
            let mut rng = ctx.config.rng_spec().build()?;
            let (outcome, transcript) =
                find_marked(&instance, &NaiveHeuristic, &detection, &mut rng)?;
            ctx.emit_report(FindBody {
                outcome,
                transcript,
            })
        }
        Command::FindAll { input } => {
            let instance = require_instance(&input)?;
            let detection = ctx.config.detection();
            let mut rng = ctx.config.rng_spec().build()?;
            let (solutions, transcript) =
                find_all(&instance, &NaiveHeuristic, &detection, &mut rng)?;
            ctx.emit_report(FindAllBody {
                solutions,
                transcript,
            })
        }
        Command::UniqueFind { input } => {
            let instance = require_instance(&input)?;
            let detection = ctx.config.detection();
            let mut rng = ctx.config.rng_spec().build()?;
            let (solution, transcript) =
                unique_find(&instance, &NaiveHeuristic, &detection, &mut rng)?;
            ctx.emit_report(UniqueFindBody {
                solution,
                transcript,
            })
        }
        Command::Calibrate {
            suite_seed,
            write_config,
        } => {
            let suite = standard_suite(suite_seed)?;
            let calibration = calibrate_constants(&suite, ctx.config.delta)?;
            if let Some(path) = write_config {
                let mut tuned = ctx.config.clone();
                tuned.beta = calibration.beta;
                tuned.gamma = calibration.gamma;
                std::fs::write(&path, tuned.to_key_values())
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            ctx.emit_report(CalibrateBody {
                calibration,
                suite_seed,
            })
        }
        Command::ExpectedSize { n, k, m, alpha } => {
            let m = match (m, alpha) {
                (Some(m), _) => m,
                (None, Some(alpha)) => (alpha * n as f64).ceil() as usize,
                (None, None) => {
                    return Err(Error::Input("expected-size needs --m or --alpha".into()))
                }
            };
            let model = expected_tree_size(n, k, m)?;
            ctx.emit_report(ExpectedSizeBody { model })
        }
        Command::Experiment {
            n_list,
            samples,
            summary,
        } => {
            let detection = ctx.config.detection();
            let report =
                separation_experiment(&n_list, samples, &detection, &ctx.config.rng_spec())?;
            ctx.emit(&report.rows_csv())?;
            let summary_body = ExperimentSummaryBody {
                summary: report.summary.clone(),
                fitted_step_constant: report.fitted_step_constant,
                ratios_strictly_increasing: report.ratios_strictly_increasing(),
            };
            let text = format!(
                "{}\n",
                serde_json::to_string_pretty(&Report {
                    timestamp: ctx.timestamp,
                    config: ctx.config.clone(),
                    body: summary_body,
                })
                .expect("summary serialization")
            );
            match summary {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
                None if ctx.out.is_some() => {
                    println!("{}", text.trim_end_matches('\n'));
                    Ok(())
                }
                None => Ok(()),
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
