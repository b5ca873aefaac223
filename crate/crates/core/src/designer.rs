//! Intervention-set selection: general and lazy greedy, two baselines, and
//! exhaustive search.
//!
//! By default every gain in a run is measured against one frozen multiset of
//! class members (the [`SampleBank`]). Over a fixed multiset the averaged
//! resolved count is exactly monotone and submodular, so lazy greedy selects
//! the same targets as general greedy. `resample_per_eval` instead draws a
//! fresh multiset for every evaluation.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::essential::check_essential;
use crate::estimators::{estimate, Estimate, EstimatorConfig, EstimatorKind, FastSampler};
use crate::graph::{InterventionSet, Pdag, VertexId};
use crate::mec::{for_each_member, UniformSampler};
use crate::meek::{EdgeBits, Resolver};
use crate::rng::{mix, stream};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "lazy")]
    Lazy,
    #[serde(rename = "rand")]
    Random,
    #[serde(rename = "maxdeg")]
    MaxDegree,
    #[serde(rename = "brute")]
    BruteForce,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Lazy => "lazy",
            Algorithm::Random => "rand",
            Algorithm::MaxDegree => "maxdeg",
            Algorithm::BruteForce => "brute",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algorithm::Greedy),
            "lazy" => Ok(Algorithm::Lazy),
            "rand" | "random" => Ok(Algorithm::Random),
            "maxdeg" => Ok(Algorithm::MaxDegree),
            "brute" => Ok(Algorithm::BruteForce),
            other => Err(Error::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Default limit on the number of subsets [`brute_force_design`] scores.
pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub estimator: EstimatorConfig,
    pub resample_per_eval: bool,
    pub subset_cap: u128,
}

impl From<EstimatorConfig> for DesignConfig {
    fn from(estimator: EstimatorConfig) -> Self {
        DesignConfig {
            estimator,
            resample_per_eval: false,
            subset_cap: DEFAULT_SUBSET_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundGain {
    pub vertex: VertexId,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub algorithm: Algorithm,
    pub targets: InterventionSet,
    /// Empty for the baselines.
    pub round_gains: Vec<RoundGain>,
    pub objective: Option<Estimate>,
    pub config: Option<DesignConfig>,
    pub evaluations_performed: usize,
}

/// Frozen multiset of class members, kept as per-vertex resolved sets.
///
/// Intervening on `I` in member `G` resolves the union over `v` in `I` of
/// what intervening on `v` alone resolves, so each member is reduced to one
/// resolved bitset per vertex. That bitset only depends on how the member
/// orients the edges at `v`, which lets members share bitsets; members with
/// identical signatures are merged into one weighted entry.
#[derive(Clone, Debug)]
pub struct SampleBank {
    num_edges: usize,
    /// `bits[v][id]`: edges resolved by intervening on `v` alone
    bits: Vec<Vec<EdgeBits>>,
    entries: Vec<Entry>,
    total_weight: u64,
    exact: bool,
}

#[derive(Clone, Debug)]
struct Entry {
    weight: u64,
    /// per-vertex index into `bits[v]`
    signature: Vec<u32>,
}

struct BankBuilder<'a> {
    ess: &'a Pdag,
    resolver: Resolver,
    undirected: Vec<Vec<usize>>,
    patterns: Vec<HashMap<Vec<bool>, u32>>,
    bits: Vec<Vec<EdgeBits>>,
    index: HashMap<Vec<u32>, usize>,
    entries: Vec<Entry>,
}

impl<'a> BankBuilder<'a> {
    fn new(ess: &'a Pdag) -> Self {
        let n = ess.order();
        let resolver = Resolver::new(ess);
        let empty = EdgeBits::zeros(resolver.num_edges());
        BankBuilder {
            ess,
            undirected: (0..n).map(|v| ess.undirected_neighbors(v).collect()).collect(),
            patterns: vec![HashMap::new(); n],
            bits: vec![vec![empty]; n],
            index: HashMap::new(),
            entries: Vec::new(),
            resolver,
        }
    }

    fn add(&mut self, member: &Pdag) -> Result<()> {
        let n = self.ess.order();
        let mut signature = Vec::with_capacity(n);
        for v in 0..n {
            if self.undirected[v].is_empty() {
                signature.push(0);
                continue;
            }
            let pattern: Vec<bool> = self.undirected[v].iter().map(|&u| member.has_arrow(v, u)).collect();
            let id = match self.patterns[v].get(&pattern) {
                Some(&id) => id,
                None => {
                    let resolved = self.resolver.resolve(member, &[v])?;
                    let id = self.bits[v].len() as u32;
                    self.bits[v].push(resolved);
                    self.patterns[v].insert(pattern, id);
                    id
                }
            };
            signature.push(id);
        }
        match self.index.get(&signature) {
            Some(&i) => self.entries[i].weight += 1,
            None => {
                self.index.insert(signature.clone(), self.entries.len());
                self.entries.push(Entry { weight: 1, signature });
            }
        }
        Ok(())
    }

    fn finish(self, exact: bool) -> SampleBank {
        SampleBank {
            num_edges: self.resolver.num_edges(),
            total_weight: self.entries.iter().map(|e| e.weight).sum(),
            bits: self.bits,
            entries: self.entries,
            exact,
        }
    }
}

impl SampleBank {
    /// Every member when `cfg.kind` is exact, otherwise `N` draws from the
    /// configured sampler on per-index streams of `cfg.master_seed`.
    pub fn build(ess: &Pdag, cfg: &EstimatorConfig) -> Result<Self> {
        check_essential(ess)?;
        let mut b = BankBuilder::new(ess);
        match cfg.kind {
            EstimatorKind::Exact => {
                for_each_member(ess, cfg.enumeration_cap, |m| b.add(m))?;
                Ok(b.finish(true))
            }
            EstimatorKind::Unbiased => {
                let n = cfg.sample_count(ess.num_undirected())?;
                let mut sampler = UniformSampler::new(ess)?;
                for i in 0..n {
                    let m = sampler.draw(&mut stream(cfg.master_seed, i as u64));
                    b.add(&m)?;
                }
                Ok(b.finish(false))
            }
            EstimatorKind::Fast => {
                let n = cfg.sample_count(ess.num_undirected())?;
                let sampler = FastSampler::new(ess)?;
                for i in 0..n {
                    let m = sampler.draw(&mut stream(cfg.master_seed, i as u64), cfg.fast_restart_cap)?;
                    b.add(&m)?;
                }
                Ok(b.finish(false))
            }
        }
    }

    /// Bank over an explicit member list, each with weight one.
    pub fn from_members(ess: &Pdag, members: &[Pdag]) -> Result<Self> {
        let mut b = BankBuilder::new(ess);
        for m in members {
            b.add(m)?;
        }
        Ok(b.finish(false))
    }

    /// Members drawn (or enumerated), counting repeats.
    pub fn len(&self) -> u64 {
        self.total_weight
    }

    pub fn is_empty(&self) -> bool {
        self.total_weight == 0
    }

    /// Distinct member signatures held.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    fn resolved(&self, entry: &Entry, targets: &[usize]) -> EdgeBits {
        let mut acc = EdgeBits::zeros(self.num_edges);
        for &v in targets {
            acc.union_with(&self.bits[v][entry.signature[v] as usize]);
        }
        acc
    }

    /// Sum of resolved counts over the multiset.
    pub fn total(&self, targets: &[usize]) -> u128 {
        self.entries
            .iter()
            .map(|e| e.weight as u128 * self.resolved(e, targets).count() as u128)
            .sum()
    }

    /// Average resolved count over the multiset.
    pub fn evaluate(&self, targets: &[usize]) -> Estimate {
        let (mut sum, mut sum_sq) = (0u128, 0u128);
        for e in &self.entries {
            let c = self.resolved(e, targets).count() as u128;
            sum += e.weight as u128 * c;
            sum_sq += e.weight as u128 * c * c;
        }
        if self.exact {
            Estimate::exact(sum as f64 / self.total_weight as f64, self.total_weight as usize)
        } else {
            Estimate::from_sums(self.total_weight as usize, sum, sum_sq)
        }
    }
}

/// Marginal-gain oracle driving the greedy loops.
trait GainOracle {
    /// Score of adding `v` to the committed set. Larger is better.
    fn gain(&mut self, v: usize) -> Result<f64>;
    fn commit(&mut self, v: usize);
    fn objective(&mut self) -> Result<Estimate>;
}

/// Gains over a frozen bank, kept as exact integer totals.
struct BankOracle<'b> {
    bank: &'b SampleBank,
    current: Vec<EdgeBits>,
    current_total: u128,
    targets: Vec<usize>,
}

impl<'b> BankOracle<'b> {
    fn new(bank: &'b SampleBank) -> Self {
        BankOracle {
            current: vec![EdgeBits::zeros(bank.num_edges); bank.entries.len()],
            current_total: 0,
            targets: Vec::new(),
            bank,
        }
    }

    fn gain_total(&self, v: usize) -> u128 {
        let mut after = 0u128;
        for (e, cur) in self.bank.entries.iter().zip(&self.current) {
            let add = &self.bank.bits[v][e.signature[v] as usize];
            after += e.weight as u128 * cur.union_count(add) as u128;
        }
        after - self.current_total
    }
}

impl GainOracle for BankOracle<'_> {
    fn gain(&mut self, v: usize) -> Result<f64> {
        Ok(self.gain_total(v) as f64 / self.bank.total_weight as f64)
    }

    fn commit(&mut self, v: usize) {
        let mut total = 0u128;
        for (e, cur) in self.bank.entries.iter().zip(self.current.iter_mut()) {
            cur.union_with(&self.bank.bits[v][e.signature[v] as usize]);
            total += e.weight as u128 * cur.count() as u128;
        }
        self.current_total = total;
        self.targets.push(v);
    }

    fn objective(&mut self) -> Result<Estimate> {
        Ok(self.bank.evaluate(&self.targets))
    }
}

/// Fresh draws for every evaluation, seeded by an evaluation counter.
struct ResampleOracle<'g> {
    ess: &'g Pdag,
    cfg: EstimatorConfig,
    targets: InterventionSet,
    base: Option<f64>,
    draws: u64,
}

impl ResampleOracle<'_> {
    fn next_cfg(&mut self) -> EstimatorConfig {
        let mut cfg = self.cfg.clone();
        cfg.master_seed = mix(self.cfg.master_seed, self.draws);
        self.draws += 1;
        cfg
    }
}

impl GainOracle for ResampleOracle<'_> {
    fn gain(&mut self, v: usize) -> Result<f64> {
        let base = match self.base {
            Some(b) => b,
            None => {
                let cfg = self.next_cfg();
                let b = estimate(self.ess, &self.targets, &cfg)?.value;
                self.base = Some(b);
                b
            }
        };
        let cfg = self.next_cfg();
        Ok(estimate(self.ess, &self.targets.with(v)?, &cfg)?.value - base)
    }

    fn commit(&mut self, v: usize) {
        self.targets.push(v).expect("greedy never repeats a vertex");
        self.base = None;
    }

    fn objective(&mut self) -> Result<Estimate> {
        let cfg = self.next_cfg();
        estimate(self.ess, &self.targets, &cfg)
    }
}

fn check_budget(ess: &Pdag, k: usize) -> Result<()> {
    if k > ess.order() {
        return Err(Error::InvalidParameter(format!(
            "budget {k} exceeds the vertex count {}",
            ess.order()
        )));
    }
    Ok(())
}

fn run_rounds(n: usize, k: usize, lazy: bool, cfg: &DesignConfig, oracle: &mut dyn GainOracle) -> Result<DesignResult> {
    let (picks, evaluations) = if lazy {
        lazy_rounds(n, k, oracle)?
    } else {
        general_rounds(n, k, oracle)?
    };
    Ok(DesignResult {
        algorithm: if lazy { Algorithm::Lazy } else { Algorithm::Greedy },
        targets: InterventionSet::new(picks.iter().map(|g| g.vertex.index()))?,
        round_gains: picks,
        objective: Some(oracle.objective()?),
        config: Some(cfg.clone()),
        evaluations_performed: evaluations,
    })
}

fn run_greedy(ess: &Pdag, k: usize, cfg: &DesignConfig, lazy: bool) -> Result<DesignResult> {
    check_essential(ess)?;
    check_budget(ess, k)?;
    if !cfg.resample_per_eval {
        let bank = SampleBank::build(ess, &cfg.estimator)?;
        return design_with_bank(ess, &bank, k, lazy, cfg);
    }
    let mut oracle = ResampleOracle {
        ess,
        cfg: cfg.estimator.clone(),
        targets: InterventionSet::empty(),
        base: None,
        draws: 0,
    };
    run_rounds(ess.order(), k, lazy, cfg, &mut oracle)
}

/// Every remaining vertex evaluated every round; ties go to the smallest id.
fn general_rounds(n: usize, k: usize, oracle: &mut dyn GainOracle) -> Result<(Vec<RoundGain>, usize)> {
    let mut chosen = vec![false; n];
    let mut picks = Vec::with_capacity(k);
    let mut evaluations = 0;
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| !chosen[v]) {
            let g = oracle.gain(v)?;
            evaluations += 1;
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((v, g));
            }
        }
        let (v, gain) = best.expect("budget checked against the vertex count");
        chosen[v] = true;
        oracle.commit(v);
        picks.push(RoundGain {
            vertex: VertexId::from(v),
            gain,
        });
    }
    Ok((picks, evaluations))
}

/// Profits start unbounded and serve as upper bounds on the true gains. Each
/// round clears the update flags, then repeatedly takes the vertex of largest
/// profit (smallest id on ties): a fresh profit is selected, a stale one is
/// re-evaluated.
fn lazy_rounds(n: usize, k: usize, oracle: &mut dyn GainOracle) -> Result<(Vec<RoundGain>, usize)> {
    let mut profit = vec![f64::INFINITY; n];
    let mut chosen = vec![false; n];
    let mut picks = Vec::with_capacity(k);
    let mut evaluations = 0;
    for _ in 0..k {
        let mut updated = vec![false; n];
        loop {
            let mut top: Option<usize> = None;
            for v in (0..n).filter(|&v| !chosen[v]) {
                if top.is_none_or(|t| profit[v] > profit[t]) {
                    top = Some(v);
                }
            }
            let v = top.expect("budget checked against the vertex count");
            if updated[v] {
                chosen[v] = true;
                oracle.commit(v);
                picks.push(RoundGain {
                    vertex: VertexId::from(v),
                    gain: profit[v],
                });
                break;
            }
            profit[v] = oracle.gain(v)?;
            updated[v] = true;
            evaluations += 1;
        }
    }
    Ok((picks, evaluations))
}

/// Greedy (or lazy greedy) over a bank built earlier for `ess`; lets several
/// budgets share one multiset.
pub fn design_with_bank(ess: &Pdag, bank: &SampleBank, k: usize, lazy: bool, cfg: &DesignConfig) -> Result<DesignResult> {
    check_budget(ess, k)?;
    let mut oracle = BankOracle::new(bank);
    run_rounds(ess.order(), k, lazy, cfg, &mut oracle)
}

pub fn greedy_design(ess: &Pdag, k: usize, cfg: &DesignConfig) -> Result<DesignResult> {
    run_greedy(ess, k, cfg, false)
}

pub fn lazy_greedy_design(ess: &Pdag, k: usize, cfg: &DesignConfig) -> Result<DesignResult> {
    run_greedy(ess, k, cfg, true)
}

fn baseline(algorithm: Algorithm, picks: Vec<usize>) -> Result<DesignResult> {
    Ok(DesignResult {
        algorithm,
        targets: InterventionSet::new(picks)?,
        round_gains: Vec::new(),
        objective: None,
        config: None,
        evaluations_performed: 0,
    })
}

/// Uniform `k`-subset, in draw order.
pub fn baseline_random<R: Rng + ?Sized>(ess: &Pdag, k: usize, rng: &mut R) -> Result<DesignResult> {
    check_budget(ess, k)?;
    let mut ids: Vec<usize> = (0..ess.order()).collect();
    let (picked, _) = ids.partial_shuffle(rng, k);
    baseline(Algorithm::Random, picked.to_vec())
}

/// Top `k` by undirected degree, smallest id on ties.
pub fn baseline_maxdeg(ess: &Pdag, k: usize) -> Result<DesignResult> {
    check_budget(ess, k)?;
    let mut ids: Vec<usize> = (0..ess.order()).collect();
    ids.sort_by_key(|&v| (std::cmp::Reverse(ess.undirected_degree(v)), v));
    ids.truncate(k);
    baseline(Algorithm::MaxDegree, ids)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c = 1u128;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

/// Exhaustive search for the best `k`-subset under the exact objective;
/// the lexicographically smallest subset wins ties.
pub fn brute_force_design(ess: &Pdag, k: usize, cfg: &DesignConfig) -> Result<DesignResult> {
    check_essential(ess)?;
    check_budget(ess, k)?;
    let n = ess.order();
    let subsets = binomial(n, k);
    if subsets > cfg.subset_cap {
        return Err(Error::CapExceeded {
            what: "subset search",
            cap: cfg.subset_cap,
        });
    }
    let mut exact = EstimatorConfig::new(EstimatorKind::Exact);
    exact.enumeration_cap = cfg.estimator.enumeration_cap;
    let bank = SampleBank::build(ess, &exact)?;

    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = (bank.total(&combo), combo.clone());
    let mut evaluations = 1;
    // advance to the next combination in lexicographic order
    while let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) {
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
        let t = bank.total(&combo);
        evaluations += 1;
        if t > best.0 {
            best = (t, combo.clone());
        }
    }
    let objective = bank.evaluate(&best.1);
    Ok(DesignResult {
        algorithm: Algorithm::BruteForce,
        targets: InterventionSet::new(best.1)?,
        round_gains: Vec::new(),
        objective: Some(objective),
        config: Some(DesignConfig {
            estimator: exact,
            ..cfg.clone()
        }),
        evaluations_performed: evaluations,
    })
}

/// Dispatch on `algorithm`; the random baseline draws from `cfg`'s master seed.
pub fn design(ess: &Pdag, k: usize, algorithm: Algorithm, cfg: &DesignConfig) -> Result<DesignResult> {
    match algorithm {
        Algorithm::Greedy => greedy_design(ess, k, cfg),
        Algorithm::Lazy => lazy_greedy_design(ess, k, cfg),
        Algorithm::Random => baseline_random(ess, k, &mut stream(cfg.estimator.master_seed, u64::MAX)),
        Algorithm::MaxDegree => baseline_maxdeg(ess, k),
        Algorithm::BruteForce => brute_force_design(ess, k, cfg),
    }
}
