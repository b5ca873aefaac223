//! The objective: expected number of essential-graph edges resolved by an
//! intervention set, averaged uniformly over the class.
//!
//! Three evaluators are provided: exact averaging over the enumerated class,
//! Monte-Carlo averaging over exact uniform samples (unbiased), and
//! Monte-Carlo averaging over the triple-rejection sampler (fast, biased).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::essential::check_essential;
use crate::graph::{find_directed_cycle, v_structures, InterventionSet, Pdag};
use crate::mec::{class_size, enumerate, Provenance, SampledMember, UniformSampler, DEFAULT_ENUMERATION_CAP};
use crate::meek::Resolver;
use crate::rng::stream;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Exact,
    Unbiased,
    Fast,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Exact => "exact",
            EstimatorKind::Unbiased => "unbiased",
            EstimatorKind::Fast => "fast",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EstimatorKind::Exact),
            "unbiased" => Ok(EstimatorKind::Unbiased),
            "fast" => Ok(EstimatorKind::Fast),
            other => Err(Error::InvalidParameter(format!("unknown estimator {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Sample count; derived from `epsilon`/`delta` when unset.
    pub samples: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    pub master_seed: u64,
    pub fast_restart_cap: usize,
    pub enumeration_cap: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            kind: EstimatorKind::Unbiased,
            samples: None,
            epsilon: 0.2,
            delta: 0.1,
            master_seed: 0,
            fast_restart_cap: 100,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind) -> Self {
        EstimatorConfig {
            kind,
            ..Self::default()
        }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = Some(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    /// Per-evaluation accuracy needed for a `(1 - 1/e - eps')` guarantee
    /// with probability `1 - delta'` over a `k`-round greedy run:
    /// `epsilon = eps' / 4k`, `delta = delta' / 4k^2`.
    pub fn for_approximation(mut self, eps_prime: f64, delta_prime: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("budget must be positive".into()));
        }
        let k = k as f64;
        self.epsilon = eps_prime / (4.0 * k);
        self.delta = delta_prime / (4.0 * k * k);
        self.samples = None;
        check_unit("epsilon", self.epsilon)?;
        check_unit("delta", self.delta)?;
        Ok(self)
    }

    /// Sample count for a graph with `num_undirected` unresolved edges.
    pub fn sample_count(&self, num_undirected: usize) -> Result<usize> {
        match self.samples {
            Some(0) => Err(Error::InvalidParameter("sample count must be positive".into())),
            Some(n) => Ok(n),
            None if num_undirected == 0 => Ok(1),
            None => chernoff_sample_size(num_undirected, self.epsilon, self.delta),
        }
    }
}

/// Estimated objective value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sample_count: usize,
    pub standard_error: f64,
}

impl Estimate {
    /// Mean and standard error (sample sd / sqrt N) of integer counts.
    pub fn from_counts<I: IntoIterator<Item = usize>>(counts: I) -> Self {
        let (mut n, mut sum, mut sum_sq) = (0usize, 0u128, 0u128);
        for c in counts {
            n += 1;
            sum += c as u128;
            sum_sq += (c as u128) * (c as u128);
        }
        Self::from_sums(n, sum, sum_sq)
    }

    pub(crate) fn from_sums(n: usize, sum: u128, sum_sq: u128) -> Self {
        if n == 0 {
            return Estimate {
                value: 0.0,
                sample_count: 0,
                standard_error: 0.0,
            };
        }
        let mean = sum as f64 / n as f64;
        let se = if n > 1 {
            // exact integer numerator avoids cancellation
            let num = (n as u128) * sum_sq - sum * sum;
            let var = num as f64 / (n as f64 * (n - 1) as f64);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            value: mean,
            sample_count: n,
            standard_error: se,
        }
    }

    pub fn exact(value: f64, members: usize) -> Self {
        Estimate {
            value,
            sample_count: members,
            standard_error: 0.0,
        }
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {x}")))
    }
}

/// Smallest integer strictly greater than `m (2 + eps) / eps^2 * ln(2 / delta)`.
pub fn chernoff_sample_size(num_undirected: usize, epsilon: f64, delta: f64) -> Result<usize> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    if num_undirected == 0 {
        return Err(Error::InvalidParameter("edge count must be positive".into()));
    }
    let bound = num_undirected as f64 * (2.0 + epsilon) / (epsilon * epsilon) * (2.0 / delta).ln();
    Ok(bound.floor() as usize + 1)
}

/// Evaluator choice when none is given: exact for classes up to 10^4
/// members, unbiased sampling for maximum degree up to 12, fast otherwise.
pub fn select_estimator(ess: &Pdag) -> Result<EstimatorKind> {
    let size = class_size(ess)?;
    if size.to_u64().is_some_and(|s| s <= 10_000) {
        Ok(EstimatorKind::Exact)
    } else if ess.max_degree() <= 12 {
        Ok(EstimatorKind::Unbiased)
    } else {
        Ok(EstimatorKind::Fast)
    }
}

fn targets_vec(ess: &Pdag, targets: &InterventionSet) -> Result<Vec<usize>> {
    targets.check_against(ess)?;
    Ok(targets.iter().collect())
}

/// Average resolved count over every class member.
pub fn exact_objective(ess: &Pdag, targets: &InterventionSet, cap: usize) -> Result<Estimate> {
    let t = targets_vec(ess, targets)?;
    let members = enumerate(ess, cap)?;
    let resolver = Resolver::new(ess);
    let total: usize = members
        .iter()
        .map(|m| resolver.count(m, &t))
        .sum::<Result<usize>>()?;
    Ok(Estimate::exact(total as f64 / members.len() as f64, members.len()))
}

/// Mean resolved count over `N` exact uniform samples.
pub fn estimate_unbiased(ess: &Pdag, targets: &InterventionSet, cfg: &EstimatorConfig) -> Result<Estimate> {
    let t = targets_vec(ess, targets)?;
    let resolver = Resolver::new(ess);
    let n = cfg.sample_count(resolver.num_edges())?;
    let mut sampler = UniformSampler::new(ess)?;
    let mut counts = Vec::with_capacity(n);
    for i in 0..n {
        let member = sampler.draw(&mut stream(cfg.master_seed, i as u64));
        counts.push(resolver.count(&member, &t)?);
    }
    Ok(Estimate::from_counts(counts))
}

/// Mean resolved count over `N` draws of the triple-rejection sampler.
pub fn estimate_fast(ess: &Pdag, targets: &InterventionSet, cfg: &EstimatorConfig) -> Result<Estimate> {
    let t = targets_vec(ess, targets)?;
    let resolver = Resolver::new(ess);
    let n = cfg.sample_count(resolver.num_edges())?;
    let sampler = FastSampler::new(ess)?;
    let mut counts = Vec::with_capacity(n);
    for i in 0..n {
        let member = sampler.draw(&mut stream(cfg.master_seed, i as u64), cfg.fast_restart_cap)?;
        counts.push(resolver.count(&member, &t)?);
    }
    Ok(Estimate::from_counts(counts))
}

/// Dispatch on `cfg.kind`.
pub fn estimate(ess: &Pdag, targets: &InterventionSet, cfg: &EstimatorConfig) -> Result<Estimate> {
    match cfg.kind {
        EstimatorKind::Exact => exact_objective(ess, targets, cfg.enumeration_cap),
        EstimatorKind::Unbiased => estimate_unbiased(ess, targets, cfg),
        EstimatorKind::Fast => estimate_fast(ess, targets, cfg),
    }
}

/// One vertex triple touching at least one undirected edge of the essential graph.
#[derive(Clone, Debug)]
struct Triple {
    vertices: [usize; 3],
    /// adjacent pairs within the triple
    pairs: Vec<(usize, usize)>,
    /// pairs undirected in the essential graph; these are resampled
    free: Vec<(usize, usize)>,
}

/// Triple-rejection sampler.
///
/// Each draw shuffles the vertex labels, then sweeps every triple that holds
/// an undirected essential-graph edge in the induced lexicographic order. A
/// triple that is not fully oriented, or forms a directed 3-cycle or a
/// v-structure absent from the essential graph, has its free edges redrawn
/// from fair coins until it is acceptable. Sweeps repeat until one passes
/// with no redraw. Because undirected components are chordal, 3-cycle
/// freedom implies acyclicity, so the output is always a class member; its
/// distribution is only approximately uniform.
#[derive(Clone, Debug)]
pub struct FastSampler {
    ess: Pdag,
    triples: Vec<Triple>,
    target_vstructs: usize,
}

/// Sweeps without convergence before a restart with a fresh shuffle.
const SWEEP_LIMIT: usize = 200;
/// Coin-flip rounds for one triple before the sweep gives up on it.
const TRIPLE_ATTEMPTS: usize = 256;

impl FastSampler {
    pub fn new(ess: &Pdag) -> Result<Self> {
        check_essential(ess)?;
        let n = ess.order();
        let mut keys = std::collections::BTreeSet::new();
        for (u, v) in ess.undirected_edges() {
            for w in 0..n {
                if w != u && w != v {
                    let mut t = [u, v, w];
                    t.sort_unstable();
                    keys.insert(t);
                }
            }
        }
        let triples = keys
            .into_iter()
            .map(|t| {
                let [a, b, c] = t;
                let pairs: Vec<(usize, usize)> = [(a, b), (a, c), (b, c)]
                    .into_iter()
                    .filter(|&(x, y)| ess.adjacent(x, y))
                    .collect();
                let free = pairs.iter().copied().filter(|&(x, y)| ess.is_undirected(x, y)).collect();
                Triple {
                    vertices: t,
                    pairs,
                    free,
                }
            })
            .collect();
        Ok(FastSampler {
            ess: ess.clone(),
            triples,
            target_vstructs: v_structures(ess).len(),
        })
    }

    fn acceptable(g: &Pdag, ess: &Pdag, t: &Triple) -> bool {
        if t.pairs.iter().any(|&(x, y)| g.is_undirected(x, y)) {
            return false;
        }
        let [a, b, c] = t.vertices;
        match t.pairs.len() {
            3 => {
                let cyclic = (g.has_arrow(a, b) && g.has_arrow(b, c) && g.has_arrow(c, a))
                    || (g.has_arrow(b, a) && g.has_arrow(c, b) && g.has_arrow(a, c));
                !cyclic
            }
            2 => {
                // the shared vertex is the middle of the path
                let mid = [a, b, c]
                    .into_iter()
                    .find(|&m| t.pairs.iter().all(|&(x, y)| x == m || y == m))
                    .expect("two pairs share a vertex");
                let ends: Vec<usize> = [a, b, c].into_iter().filter(|&x| x != mid).collect();
                let collider = g.has_arrow(ends[0], mid) && g.has_arrow(ends[1], mid);
                let in_ess = ess.has_arrow(ends[0], mid) && ess.has_arrow(ends[1], mid);
                !collider || in_ess
            }
            _ => true,
        }
    }

    /// One class member, or an error after `restart_cap` failed restarts.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, restart_cap: usize) -> Result<Pdag> {
        let n = self.ess.order();
        let mut order: Vec<usize> = (0..self.triples.len()).collect();
        let mut label: Vec<usize> = (0..n).collect();
        for _ in 0..restart_cap.max(1) {
            label.shuffle(rng);
            let key = |t: &Triple| {
                let mut k = t.vertices.map(|v| label[v]);
                k.sort_unstable();
                k
            };
            order.sort_by_cached_key(|&i| key(&self.triples[i]));
            let mut g = self.ess.clone();
            let mut converged = false;
            'sweeps: for _ in 0..SWEEP_LIMIT {
                let mut redraws = 0;
                for &i in &order {
                    let t = &self.triples[i];
                    if Self::acceptable(&g, &self.ess, t) {
                        continue;
                    }
                    redraws += 1;
                    let mut ok = false;
                    for _ in 0..TRIPLE_ATTEMPTS {
                        for &(x, y) in &t.free {
                            if rng.gen_bool(0.5) {
                                g.orient(x, y);
                            } else {
                                g.orient(y, x);
                            }
                        }
                        if Self::acceptable(&g, &self.ess, t) {
                            ok = true;
                            break;
                        }
                    }
                    if !ok {
                        break 'sweeps;
                    }
                }
                if redraws == 0 {
                    converged = true;
                    break;
                }
            }
            if converged && self.is_member(&g) {
                return Ok(g);
            }
        }
        Err(Error::RestartsExhausted(restart_cap))
    }

    fn is_member(&self, g: &Pdag) -> bool {
        g.undirected_edges().is_empty()
            && find_directed_cycle(g).is_none()
            && v_structures(g).len() == self.target_vstructs
    }
}

/// One draw of the fast sampler.
pub fn sample_fast_member<R: Rng + ?Sized>(ess: &Pdag, rng: &mut R, restart_cap: usize) -> Result<SampledMember> {
    Ok(SampledMember {
        dag: FastSampler::new(ess)?.draw(rng, restart_cap)?,
        provenance: Provenance::Fast,
    })
}
