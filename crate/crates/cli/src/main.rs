use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use matchlab::experiment::{reproduce, run_experiment, AlgorithmSpec, ExperimentSpec, OutputFormat, REPRODUCTIONS};
use matchlab::families::Family;
use matchlab::{brute_force_maximum_matching, maximum_matching, BipartiteGraph, GraphJson};

/// Bipartite matching experiments.
#[derive(Parser, Debug)]
#[command(name = "matchlab", version)]
struct Cli {
    /// Worker threads for trial parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a family instance as JSON with its block descriptor.
    Generate {
        /// Family spec, e.g. `fibonacci:k=3`, `bp:b=3`, `hgraph:n=5,k=3`.
        family: Family,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run an algorithm on a family and report sizes against the optimum.
    Run {
        #[arg(long)]
        family: Family,
        /// Algorithm spec, e.g. `ranking`, `category-advice:k=4`, `mindegree:tie=max-index`.
        #[arg(long)]
        algorithm: AlgorithmSpec,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, env = "MATCHLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        /// One row per trial instead of a summary row.
        #[arg(long)]
        per_trial: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Re-run a bundled experiment and check it against its tolerances.
    Reproduce {
        /// One of: fibonacci-ratios, ranking-kvv, mingreedy-bp, minranking-bp,
        /// mindegree-iid, greedy-goelmehta, markov-ne.
        name: String,
    },
    /// Maximum matching of a graph file.
    Oracle {
        graph: PathBuf,
        /// Use exhaustive search (at most 12 online vertices).
        #[arg(long)]
        brute_force: bool,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Returns `Ok(true)` when everything checked passed.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Generate { family, out } => {
            let (g, desc) = family.generate()?;
            let mut v = serde_json::to_value(g.to_json())?;
            v["families"] = serde_json::to_value(&desc)?;
            emit(&(serde_json::to_string(&v)? + "\n"), out.as_deref())?;
            Ok(true)
        }
        Command::Run {
            family,
            algorithm,
            trials,
            seed,
            format,
            per_trial,
            out,
        } => {
            let spec = ExperimentSpec {
                family,
                algorithm,
                trials,
                seed,
                format,
                per_trial,
            };
            let report = run_experiment(&spec)?;
            emit(&report.render()?, out.as_deref())?;
            Ok(true)
        }
        Command::Reproduce { name } => {
            if !REPRODUCTIONS.contains(&name.as_str()) {
                anyhow::bail!("unknown reproduction {name:?}; expected one of {}", REPRODUCTIONS.join(", "));
            }
            let r = reproduce(&name)?;
            for line in r.lines() {
                println!("{line}");
            }
            Ok(r.pass())
        }
        Command::Oracle { graph, brute_force } => {
            let text = fs::read_to_string(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let json: GraphJson = serde_json::from_str(&text).context("parsing graph JSON")?;
            let g = BipartiteGraph::try_from(json)?;
            let m = if brute_force {
                brute_force_maximum_matching(&g)?
            } else {
                maximum_matching(&g)
            };
            let v = serde_json::json!({ "size": m.size(), "edges": m.edges() });
            println!("{v}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        pool = pool.num_threads(w.max(1));
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| execute(cli.command)),
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
