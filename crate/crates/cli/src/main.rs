//! `gexplain` command-line tool: explain single graphs, evaluate methods
//! over datasets, compare against the exhaustive oracle, generate corpora,
//! train GCN classifiers and count forward passes.
//!
//! Exit codes: 0 ok, 2 usage error, 3 data error, 4 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gexplain::datasets::{gen_ba2motifs_mini, gen_varsize_motifs, load_dataset, save_dataset, FEATURE_DIM};
use gexplain::eval::{compare_methods, export_dot, fidelity_curve, oracle_report, timing_report, CurvePoint, ComparisonReport};
use gexplain::explain::{explain, ClassPolicy, ExplainConfig, KRange, Method, DEFAULT_BRUTE_FORCE_CAP};
use gexplain::gnn::{Architecture, ModelSpec, Pooling};
use gexplain::trainer::{train_gcn, trace_to_string, write_trace, TrainConfig};
use gexplain::{Error, Graph};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "gexplain", version, about = "Edge-subgraph explanations for GNN graph classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain one graph and write the explanation file.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// `auto` (predicted class) or a class index.
        #[arg(long, default_value = "auto")]
        class: ClassPolicy,
        #[arg(long, default_value = "linear-gradient")]
        method: Method,
        #[arg(long, default_value = "full")]
        k_range: KRange,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Fidelity curves and a method comparison over a dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "linear-gradient,sa,ig")]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7,0.8,0.9")]
        levels: Vec<f64>,
        #[arg(long, default_value = "full")]
        k_range: KRange,
        #[arg(long)]
        out: PathBuf,
    },
    /// Linear-gradient search against the exhaustive best subset.
    Oracle {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
        cap: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus with ground-truth edge masks.
    GenDataset {
        #[arg(long)]
        kind: DatasetKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tree nodes per graph (ba2motifs-mini).
        #[arg(long, default_value_t = 5)]
        base_nodes: usize,
        /// Largest number of planted stars (varsize).
        #[arg(long, default_value_t = 3)]
        max_motifs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a GCN classifier with momentum gradient descent.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[arg(long, default_value_t = 32)]
        hidden: usize,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 0.9)]
        momentum: f64,
        #[arg(long, default_value_t = 0.3)]
        init_scale: f64,
        #[arg(long, default_value = "mean")]
        pooling: PoolingArg,
        /// Stop as soon as training accuracy reaches this value.
        #[arg(long)]
        target_accuracy: Option<f64>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forward-pass counts and wall time of explanations on random trees.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,50,100,200")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetKind {
    Ba2motifsMini,
    Varsize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolingArg {
    Mean,
    Sum,
    Max,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Mean => Pooling::Mean,
            PoolingArg::Sum => Pooling::Sum,
            PoolingArg::Max => Pooling::Max,
        }
    }
}

#[derive(Serialize)]
struct MethodCurve {
    method: Method,
    points: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct EvaluationFile {
    curves: Vec<MethodCurve>,
    comparison: ComparisonReport,
}

fn write_json<T: Serialize>(value: &T, path: &PathBuf) -> gexplain::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn run(cmd: Command) -> gexplain::Result<()> {
    match cmd {
        Command::Explain {
            model,
            graph,
            class,
            method,
            k_range,
            out,
            dot,
        } => {
            let m = ModelSpec::load(model)?;
            let (g, _) = Graph::load(graph)?;
            let cfg = ExplainConfig {
                method,
                k_range,
                class,
                ..ExplainConfig::default()
            };
            let e = explain(&m, &g, &cfg)?;
            e.save(&g, &out)?;
            if let Some(dot) = dot {
                export_dot(&g, &e.subgraph_edges, dot)?;
            }
            println!(
                "class {} k {} overall {:.6} forwards {}",
                e.target_class, e.chosen_k, e.overall, e.forward_passes_used
            );
        }
        Command::Evaluate {
            model,
            dataset,
            methods,
            levels,
            k_range,
            out,
        } => {
            let m = ModelSpec::load(model)?;
            let data = load_dataset(dataset)?;
            let mut curves = Vec::with_capacity(methods.len());
            for &method in &methods {
                curves.push(MethodCurve {
                    method,
                    points: fidelity_curve(&m, &data, method, &levels)?,
                });
            }
            let comparison = compare_methods(&m, &data, &methods, k_range)?;
            print!("{}", comparison.to_table());
            write_json(&EvaluationFile { curves, comparison }, &out)?;
        }
        Command::Oracle { model, dataset, cap, out } => {
            let m = ModelSpec::load(model)?;
            let data = load_dataset(dataset)?;
            let r = oracle_report(&m, &data, cap)?;
            println!(
                "evaluated {} skipped {} exact {} mean gap {:.6} max gap {:.6} mean ratio {:.6}",
                r.evaluated, r.skipped, r.exact_matches, r.mean_gap, r.max_gap, r.mean_ratio
            );
            write_json(&r, &out)?;
        }
        Command::GenDataset {
            kind,
            n,
            seed,
            base_nodes,
            max_motifs,
            out,
        } => {
            let data = match kind {
                DatasetKind::Ba2motifsMini => gen_ba2motifs_mini(n, base_nodes, seed)?,
                DatasetKind::Varsize => gen_varsize_motifs(n, max_motifs, seed)?,
            };
            save_dataset(&data, out)?;
        }
        Command::Train {
            dataset,
            layers,
            hidden,
            epochs,
            seed,
            lr,
            momentum,
            init_scale,
            pooling,
            target_accuracy,
            trace,
            out,
        } => {
            let data = load_dataset(dataset)?;
            let dim = data.first().map_or(FEATURE_DIM, |r| r.graph.feature_dim());
            let classes = data.iter().map(|r| r.label + 1).max().unwrap_or(2).max(2);
            let mut arch = Architecture::gcn(dim, layers, hidden, classes);
            arch.pooling = pooling.into();
            let cfg = TrainConfig {
                epochs,
                learning_rate: lr,
                momentum,
                seed,
                init_scale,
                target_train_accuracy: target_accuracy,
            };
            let outcome = train_gcn(&data, &arch, &cfg)?;
            outcome.model.save(out)?;
            match trace {
                Some(path) => write_trace(&outcome.trace, path)?,
                None => {
                    let text = trace_to_string(&outcome.trace);
                    if let Some(last) = text.lines().last() {
                        println!("{last}");
                    }
                }
            }
        }
        Command::Bench { model, sizes, reps } => {
            let m = ModelSpec::load(model)?;
            print!("{}", timing_report(&m, &sizes, reps)?.to_table());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        4
    } else if matches!(e, Error::InvalidArgument(_)) {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
