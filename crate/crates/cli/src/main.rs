use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use intervention_design::designer::{design, Algorithm, DesignConfig, DesignResult};
use intervention_design::essential::{check_essential, essential_of};
use intervention_design::estimators::{estimate, select_estimator, EstimatorConfig, EstimatorKind, FastSampler};
use intervention_design::mec::{class_size, UniformSampler};
use intervention_design::rng::{mix, stream};
use intervention_design::workbench::bench::{run_benchmark, BenchSpec};
use intervention_design::workbench::dream3::ingest_dream3;
use intervention_design::workbench::format::{read_graph, write_graph, write_graph_file};
use intervention_design::workbench::generator::{random_chordal_dag, GeneratorConfig, DEFAULT_DENSITY};
use intervention_design::workbench::metrics::discovered_edge_ratio;
use intervention_design::{InterventionSet, Pdag};

#[derive(Parser)]
#[command(name = "idesign", version, about = "Budgeted single-vertex intervention design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random chordal ground-truth DAGs
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose an intervention set
    Design {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "lazy")]
        algorithm: Algorithm,
        #[command(flatten)]
        estimator: EstimatorArgs,
        /// Draw fresh samples for every gain evaluation
        #[arg(long)]
        resample_per_eval: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a given intervention set
    Eval {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated vertex ids or names
        #[arg(long, default_value = "")]
        targets: String,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Markov equivalence class size or samples
    Mec {
        #[command(subcommand)]
        action: MecAction,
    },
    /// Run a benchmark described by a TOML file
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a DREAM3 gold standard to the graph format
    #[command(name = "ingest-dream3")]
    IngestDream3 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum MecAction {
    Count {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Sample {
        #[arg(long, default_value_t = 1)]
        draws: usize,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the triple-rejection sampler
        #[arg(long)]
        fast: bool,
    },
}

#[derive(Args)]
struct EstimatorArgs {
    /// Chosen from the class size and maximum degree when omitted
    #[arg(long)]
    estimator: Option<EstimatorKind>,
    #[arg(long, conflicts_with_all = ["epsilon", "delta", "approx_epsilon"])]
    samples: Option<usize>,
    #[arg(long, conflicts_with = "approx_epsilon")]
    epsilon: Option<f64>,
    #[arg(long, conflicts_with = "approx_delta")]
    delta: Option<f64>,
    /// Overall approximation slack; sets per-evaluation accuracy from the budget
    #[arg(long, requires = "approx_delta")]
    approx_epsilon: Option<f64>,
    #[arg(long, requires = "approx_epsilon")]
    approx_delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    restart_cap: Option<usize>,
}

impl EstimatorArgs {
    fn config(&self, ess: &Pdag, k: usize) -> anyhow::Result<EstimatorConfig> {
        let kind = match self.estimator {
            Some(kind) => kind,
            None => select_estimator(ess)?,
        };
        let mut cfg = EstimatorConfig::new(kind).with_seed(self.seed);
        cfg.samples = self.samples;
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if let Some(cap) = self.restart_cap {
            cfg.fast_restart_cap = cap;
        }
        if let (Some(e), Some(d)) = (self.approx_epsilon, self.approx_delta) {
            cfg = cfg.for_approximation(e, d, k.max(1))?;
        }
        Ok(cfg)
    }
}

/// Ground truth when the file holds a DAG, else the essential graph itself.
struct Loaded {
    truth: Option<Pdag>,
    ess: Pdag,
}

fn load(path: &Path) -> anyhow::Result<Loaded> {
    let g = read_graph(path).with_context(|| format!("reading {}", path.display()))?;
    if g.num_undirected() == 0 {
        if g.is_dag() {
            let ess = essential_of(&g)?;
            return Ok(Loaded { truth: Some(g), ess });
        }
        g.require_dag()?;
    }
    check_essential(&g)?;
    Ok(Loaded { truth: None, ess: g })
}

fn emit(out: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn labels(g: &Pdag, targets: &InterventionSet) -> Vec<String> {
    targets.iter().map(|v| g.label(v)).collect()
}

fn parse_targets(g: &Pdag, text: &str) -> anyhow::Result<InterventionSet> {
    let mut set = InterventionSet::empty();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let by_name = g.names().and_then(|names| names.iter().position(|n| n == tok));
        let id = match by_name {
            Some(id) => id,
            None => tok.parse::<usize>().with_context(|| format!("unknown vertex {tok:?}"))?,
        };
        set.push(id)?;
    }
    set.check_against(g)?;
    Ok(set)
}

fn design_report(loaded: &Loaded, result: &DesignResult) -> anyhow::Result<Value> {
    let ratio = match &loaded.truth {
        Some(t) if loaded.ess.num_undirected() > 0 => Some(discovered_edge_ratio(t, &loaded.ess, &result.targets)?),
        _ => None,
    };
    Ok(json!({
        "algorithm": result.algorithm,
        "targets": result.targets,
        "target_labels": labels(&loaded.ess, &result.targets),
        "round_gains": result.round_gains,
        "objective": result.objective,
        "config": result.config,
        "evaluations_performed": result.evaluations_performed,
        "undirected_edges": loaded.ess.num_undirected(),
        "ratio": ratio,
    }))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen { n, count, density, seed, out } => {
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for i in 0..count {
                let g = random_chordal_dag(&GeneratorConfig::new(n, density, mix(seed, i as u64)))?;
                write_graph_file(&g, &out.join(format!("instance_{i:04}.graph")))?;
            }
        }
        Command::Design {
            graph,
            k,
            algorithm,
            estimator,
            resample_per_eval,
            out,
        } => {
            let loaded = load(&graph)?;
            let mut cfg = DesignConfig::from(estimator.config(&loaded.ess, k)?);
            cfg.resample_per_eval = resample_per_eval;
            let result = design(&loaded.ess, k, algorithm, &cfg)?;
            emit(out.as_deref(), &design_report(&loaded, &result)?)?;
        }
        Command::Eval {
            graph,
            targets,
            estimator,
            out,
        } => {
            let loaded = load(&graph)?;
            let targets = parse_targets(&loaded.ess, &targets)?;
            let cfg = estimator.config(&loaded.ess, targets.len())?;
            let objective = estimate(&loaded.ess, &targets, &cfg)?;
            let ratio = match &loaded.truth {
                Some(t) if loaded.ess.num_undirected() > 0 => Some(discovered_edge_ratio(t, &loaded.ess, &targets)?),
                _ => None,
            };
            emit(
                out.as_deref(),
                &json!({
                    "targets": targets,
                    "target_labels": labels(&loaded.ess, &targets),
                    "objective": objective,
                    "config": cfg,
                    "undirected_edges": loaded.ess.num_undirected(),
                    "ratio": ratio,
                }),
            )?;
        }
        Command::Mec { action } => match action {
            MecAction::Count { graph, .. } => {
                let loaded = load(&graph)?;
                let size = class_size(&loaded.ess)?;
                emit(None, &json!({ "class_size": size.to_string() }))?;
            }
            MecAction::Sample { draws, graph, seed, fast } => {
                let loaded = load(&graph)?;
                let mut text = String::new();
                if fast {
                    let sampler = FastSampler::new(&loaded.ess)?;
                    for i in 0..draws {
                        let m = sampler.draw(&mut stream(seed, i as u64), 100)?;
                        text += &write_graph(&m)?;
                    }
                } else {
                    let mut sampler = UniformSampler::new(&loaded.ess)?;
                    for i in 0..draws {
                        text += &write_graph(&sampler.draw(&mut stream(seed, i as u64)))?;
                    }
                }
                std::io::stdout().write_all(text.as_bytes())?;
            }
        },
        Command::Bench { spec, out } => {
            let spec = BenchSpec::load(&spec)?;
            let mut file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let outcome = run_benchmark(&spec, &mut file)?;
            for r in &outcome.reports {
                eprintln!(
                    "{:>7} k={:<3} mean={:.4} sd={:.4} instances={} density={:.3}",
                    r.algorithm, r.k, r.mean, r.std_dev, r.instances, r.density
                );
            }
        }
        Command::IngestDream3 { input, out } => {
            let g = ingest_dream3(&input)?;
            write_graph_file(&g, &out)?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let lib = err.chain().find_map(|e| e.downcast_ref::<intervention_design::Error>());
    match lib {
        Some(e) if e.is_cap_exceeded() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
