//! Benchmark runner driven by a TOML description.
//!
//! ```toml
//! seed = 7
//! instances = 100
//! budgets = [1, 2, 3]
//! algorithms = ["greedy", "rand", "maxdeg"]
//!
//! [generator]
//! n = 20
//! density = 2.0
//!
//! [estimator]
//! kind = "unbiased"   # exact | unbiased | fast; omitted selects per instance
//! epsilon = 0.2
//! delta = 0.1
//! ```
//!
//! `graphs = ["a.graph", ...]` (paths relative to the spec file) replaces the
//! generator; each file must hold a ground-truth DAG.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::designer::{
    baseline_maxdeg, baseline_random, brute_force_design, design, design_with_bank, Algorithm, DesignConfig, DesignResult,
    SampleBank, DEFAULT_SUBSET_CAP,
};
use crate::error::{Error, Result};
use crate::essential::essential_of;
use crate::estimators::{select_estimator, EstimatorConfig, EstimatorKind};
use crate::graph::Pdag;
use crate::mec::DEFAULT_ENUMERATION_CAP;
use crate::rng::{mix, stream};
use crate::workbench::format::read_graph;
use crate::workbench::generator::{density_ratio, random_chordal_dag, GeneratorConfig, DEFAULT_DENSITY};
use crate::workbench::metrics::{discovered_edge_ratio, EvalReport};

pub const CSV_HEADER: &str = "instance_id,seed,n,k,algorithm,estimator,N,ratio,runtime_ms";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    #[serde(default = "default_density")]
    pub density: f64,
}

fn default_density() -> f64 {
    DEFAULT_DENSITY
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: Option<EstimatorKind>,
    pub samples: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    #[serde(default)]
    pub resample_per_eval: bool,
    pub fast_restart_cap: Option<usize>,
    pub enumeration_cap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_instances")]
    pub instances: usize,
    pub budgets: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub graphs: Vec<PathBuf>,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    /// Runtimes are written as 0 when false, making output byte-reproducible.
    #[serde(default = "default_true")]
    pub record_runtime: bool,
}

fn default_instances() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl BenchSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: BenchSpec = toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("bench spec: {e}")))?;
        spec.check()?;
        Ok(spec)
    }

    /// Parse a spec file, resolving graph paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for g in &mut spec.graphs {
            if g.is_relative() {
                *g = base.join(&*g);
            }
        }
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        match (&self.generator, self.graphs.is_empty()) {
            (None, true) => Err(Error::InvalidParameter("bench spec needs [generator] or graphs".into())),
            (Some(_), false) => Err(Error::InvalidParameter("bench spec takes [generator] or graphs, not both".into())),
            _ if self.algorithms.is_empty() => Err(Error::InvalidParameter("bench spec lists no algorithms".into())),
            _ => Ok(()),
        }
    }

    pub fn instance_count(&self) -> usize {
        if self.graphs.is_empty() {
            self.instances
        } else {
            self.graphs.len()
        }
    }

    fn estimator_for(&self, ess: &Pdag, seed: u64) -> Result<DesignConfig> {
        let e = &self.estimator;
        let kind = match e.kind {
            Some(k) => k,
            None => select_estimator(ess)?,
        };
        let defaults = EstimatorConfig::default();
        let estimator = EstimatorConfig {
            kind,
            samples: e.samples,
            epsilon: e.epsilon.unwrap_or(defaults.epsilon),
            delta: e.delta.unwrap_or(defaults.delta),
            master_seed: seed,
            fast_restart_cap: e.fast_restart_cap.unwrap_or(defaults.fast_restart_cap),
            enumeration_cap: e.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
        };
        Ok(DesignConfig {
            estimator,
            resample_per_eval: e.resample_per_eval,
            subset_cap: DEFAULT_SUBSET_CAP,
        })
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: usize,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub algorithm: Algorithm,
    pub estimator: String,
    pub samples: u64,
    pub ratio: f64,
    pub runtime_ms: u128,
    pub targets: Vec<usize>,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{}",
            self.instance_id,
            self.seed,
            self.n,
            self.k,
            self.algorithm.name(),
            self.estimator,
            self.samples,
            self.ratio,
            self.runtime_ms
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    /// One report per (algorithm, budget), algorithms in spec order.
    pub reports: Vec<EvalReport>,
}

impl BenchOutcome {
    pub fn report(&self, algorithm: Algorithm, k: usize) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.algorithm == algorithm.name() && r.k == k)
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn ground_truth(spec: &BenchSpec, index: usize, seed: u64) -> Result<Pdag> {
    match &spec.generator {
        Some(g) => random_chordal_dag(&GeneratorConfig::new(g.n, g.density, seed)),
        None => {
            let g = read_graph(&spec.graphs[index])?;
            g.require_dag()?;
            Ok(g)
        }
    }
}

fn instance_rows(spec: &BenchSpec, index: usize, seed: u64, g_star: &Pdag) -> Result<Vec<BenchRow>> {
    let ess = essential_of(g_star)?;
    let cfg = spec.estimator_for(&ess, mix(seed, 1))?;
    let ms = |t: Instant| if spec.record_runtime { t.elapsed().as_millis() } else { 0 };
    let mut rows = Vec::new();
    for &algorithm in &spec.algorithms {
        // greedy variants share one frozen bank across budgets
        let mut bank: Option<(SampleBank, u128)> = None;
        for &k in &spec.budgets {
            let start = Instant::now();
            let result: DesignResult = match algorithm {
                Algorithm::Greedy | Algorithm::Lazy if !cfg.resample_per_eval => {
                    if bank.is_none() {
                        let t = Instant::now();
                        let b = SampleBank::build(&ess, &cfg.estimator)?;
                        bank = Some((b, ms(t)));
                    }
                    let (b, build_ms) = bank.as_ref().unwrap();
                    let r = design_with_bank(&ess, b, k, algorithm == Algorithm::Lazy, &cfg)?;
                    rows.push(row(index, seed, &ess, k, algorithm, &cfg, b.len(), g_star, &r, build_ms + ms(start))?);
                    continue;
                }
                Algorithm::Random => baseline_random(&ess, k, &mut stream(seed, 2))?,
                Algorithm::MaxDegree => baseline_maxdeg(&ess, k)?,
                Algorithm::BruteForce => brute_force_design(&ess, k, &cfg)?,
                _ => design(&ess, k, algorithm, &cfg)?,
            };
            let samples = match algorithm {
                Algorithm::Random | Algorithm::MaxDegree => 0,
                _ => result.objective.as_ref().map_or(0, |o| o.sample_count as u64),
            };
            rows.push(row(index, seed, &ess, k, algorithm, &cfg, samples, g_star, &result, ms(start))?);
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn row(
    index: usize,
    seed: u64,
    ess: &Pdag,
    k: usize,
    algorithm: Algorithm,
    cfg: &DesignConfig,
    samples: u64,
    g_star: &Pdag,
    result: &DesignResult,
    runtime_ms: u128,
) -> Result<BenchRow> {
    let estimator = match algorithm {
        Algorithm::Random | Algorithm::MaxDegree => "none",
        Algorithm::BruteForce => EstimatorKind::Exact.name(),
        _ => cfg.estimator.kind.name(),
    };
    Ok(BenchRow {
        instance_id: index,
        seed,
        n: ess.order(),
        k,
        algorithm,
        estimator: estimator.to_string(),
        samples,
        ratio: discovered_edge_ratio(g_star, ess, &result.targets)?,
        runtime_ms,
        targets: result.targets.iter().collect(),
    })
}

/// Run every instance, writing the CSV to `out` as rows are produced. On
/// failure an error marker row naming the instance is written before the
/// error is returned.
pub fn run_benchmark<W: Write>(spec: &BenchSpec, out: &mut W) -> Result<BenchOutcome> {
    spec.check()?;
    let io = |e: std::io::Error| Error::Io {
        path: "<bench output>".into(),
        cause: e,
    };
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    let mut rows = Vec::new();
    let mut densities = Vec::new();
    for index in 0..spec.instance_count() {
        let seed = mix(spec.seed, index as u64);
        let produced = ground_truth(spec, index, seed).and_then(|g| {
            let r = instance_rows(spec, index, seed, &g)?;
            Ok((density_ratio(&g), r))
        });
        match produced {
            Ok((density, instance)) => {
                for r in &instance {
                    writeln!(out, "{}", r.to_csv()).map_err(io)?;
                }
                densities.push(density);
                rows.extend(instance);
            }
            Err(e) => {
                let n = spec.generator.as_ref().map_or(0, |g| g.n);
                writeln!(out, "{index},{seed},{n},,ERROR,{},0,NaN,0", csv_quote(&e.to_string())).map_err(io)?;
                out.flush().map_err(io)?;
                return Err(e);
            }
        }
    }
    out.flush().map_err(io)?;
    let density = if densities.is_empty() {
        0.0
    } else {
        densities.iter().sum::<f64>() / densities.len() as f64
    };
    let mut grouped: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in &rows {
        let a = spec.algorithms.iter().position(|&a| a == r.algorithm).unwrap();
        grouped.entry((a, r.k)).or_default().push(r.ratio);
    }
    let reports = grouped
        .into_iter()
        .map(|((a, k), ratios)| EvalReport::new(spec.algorithms[a].name(), k, ratios, density))
        .collect();
    Ok(BenchOutcome { rows, reports })
}
