//! Markov equivalence classes: exhaustive enumeration, rooted counting, exact
//! class size, and exact uniform sampling.
//!
//! Counting and sampling work on the undirected components of an essential
//! graph. For a connected chordal component `C` and a chosen source `v`, every
//! edge whose endpoints sit at different BFS distances from `v` is oriented
//! away from `v`. Closing that orientation under the Meek rules can force
//! some equal-distance edges as well; whatever stays undirected splits into
//! chordal components that are oriented independently. This gives
//!
//! ```text
//! W(v, C) = prod over residual components K of  sum_{u in K} W(u, K)
//! ```
//!
//! with `W = 1` on an empty residual. Every residual component is an induced
//! subgraph of the original one, so a vertex set identifies it.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::essential::check_essential;
use crate::error::{Error, Result};
use crate::graph::{undirected_components, v_structures, DirectedEdgeSet, Mark, Pdag};
use crate::meek::close_in_place;

/// Default cap on the number of members [`enumerate`] will produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Arbitrary-precision count of class members.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassCount(pub BigUint);

impl ClassCount {
    pub fn one() -> Self {
        ClassCount(BigUint::one())
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl From<u64> for ClassCount {
    fn from(v: u64) -> Self {
        ClassCount(BigUint::from(v))
    }
}

impl fmt::Display for ClassCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which procedure produced a member.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Enumerated,
    Uniform,
    Fast,
}

#[derive(Clone, Debug)]
pub struct SampledMember {
    pub dag: Pdag,
    pub provenance: Provenance,
}

/// Checks that `dag` belongs to the class of `ess`: same skeleton, fully
/// directed, acyclic, and the same v-structures.
pub fn check_member(ess: &Pdag, dag: &Pdag) -> Result<()> {
    if ess.order() != dag.order() {
        return Err(Error::InvalidParameter(format!(
            "member has {} vertices, essential graph {}",
            dag.order(),
            ess.order()
        )));
    }
    dag.require_dag()?;
    for u in 0..ess.order() {
        if ess.neighbors(u) != dag.neighbors(u) {
            return Err(Error::InvalidParameter(format!("skeleton differs at vertex {u}")));
        }
    }
    for (t, h) in ess.directed_edges() {
        if !dag.has_arrow(t, h) {
            return Err(Error::InconsistentOrientation { tail: h, head: t });
        }
    }
    if v_structures(dag) != v_structures(ess) {
        return Err(Error::InvalidParameter("v-structures differ".into()));
    }
    Ok(())
}

/// Every member of the class of `ess`, in backtracking order (edges in
/// ascending pair order, the lower-to-higher orientation tried first).
pub fn enumerate(ess: &Pdag, cap: usize) -> Result<Vec<Pdag>> {
    let mut out = Vec::new();
    for_each_member(ess, cap, |m| {
        out.push(m.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Visit every member in [`enumerate`] order without storing them; returns
/// the member count.
pub fn for_each_member<F>(ess: &Pdag, cap: usize, mut visit: F) -> Result<usize>
where
    F: FnMut(&Pdag) -> Result<()>,
{
    check_essential(ess)?;
    let edges = ess.undirected_edges();
    let mut work = ess.clone();
    let mut seen = 0;
    extend(&mut work, &edges, 0, cap, &mut seen, &mut visit)?;
    Ok(seen)
}

fn extend<F>(work: &mut Pdag, edges: &[(usize, usize)], i: usize, cap: usize, seen: &mut usize, visit: &mut F) -> Result<()>
where
    F: FnMut(&Pdag) -> Result<()>,
{
    if i == edges.len() {
        if *seen >= cap {
            return Err(Error::CapExceeded {
                what: "class enumeration",
                cap: cap as u128,
            });
        }
        *seen += 1;
        return visit(work);
    }
    let (u, v) = edges[i];
    for (t, h) in [(u, v), (v, u)] {
        work.orient(t, h);
        if !creates_collider(work, t, h) && !reaches(work, h, t) {
            extend(work, edges, i + 1, cap, seen, visit)?;
        }
        work.set_undirected(t, h);
    }
    Ok(())
}

/// `t -> h` forms a v-structure with some existing parent of `h`.
fn creates_collider(g: &Pdag, t: usize, h: usize) -> bool {
    g.parents(h).any(|p| p != t && !g.adjacent(p, t))
}

/// Directed path from `from` to `to`.
fn reaches(g: &Pdag, from: usize, to: usize) -> bool {
    let mut seen = vec![false; g.order()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(x) = stack.pop() {
        if x == to {
            return true;
        }
        for c in g.children(x) {
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    false
}

/// Memoized rooted counts over induced subgraphs of one undirected graph.
///
/// `g`'s undirected pairs define the edges; directed pairs are ignored.
#[derive(Debug)]
pub struct RootedCounter<'g> {
    g: &'g Pdag,
    rooted: HashMap<(u32, Vec<u32>), (BigUint, Rc<Split>)>,
    totals: HashMap<Vec<u32>, BigUint>,
}

/// Rooted orientation of a component from a chosen source.
#[derive(Debug)]
struct Split {
    /// arrows forced once the source is fixed
    arrows: Vec<(usize, usize)>,
    /// undirected components left over, each sorted
    residual: Vec<Vec<u32>>,
}

impl<'g> RootedCounter<'g> {
    pub fn new(g: &'g Pdag) -> Self {
        RootedCounter {
            g,
            rooted: HashMap::new(),
            totals: HashMap::new(),
        }
    }

    fn split(&self, source: u32, set: &[u32]) -> Split {
        let g = self.g;
        let idx = |x: usize| set.binary_search(&(x as u32)).ok();
        let mut dist = vec![u32::MAX; set.len()];
        let s = idx(source as usize).expect("source in component");
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for w in g.undirected_neighbors(set[i] as usize) {
                if let Some(j) = idx(w) {
                    if dist[j] == u32::MAX {
                        dist[j] = dist[i] + 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        // flow away from the source, then close: equal-distance edges can
        // still be forced, e.g. x - y with a parent of x not adjacent to y
        let mut rooted = Pdag::empty(g.order());
        for (i, &u) in set.iter().enumerate() {
            for w in g.undirected_neighbors(u as usize) {
                if let Some(j) = idx(w) {
                    if dist[i] < dist[j] {
                        rooted.insert_pair(u as usize, w, Mark::Out);
                    } else if dist[i] == dist[j] && (u as usize) < w {
                        rooted.insert_pair(u as usize, w, Mark::Undirected);
                    }
                }
            }
        }
        close_in_place(&mut rooted).expect("rooted orientation of a chordal component is consistent");
        let arrows = rooted.directed_edges();
        let residual = undirected_components(&rooted)
            .into_iter()
            .map(|c| c.into_iter().map(|v| v.0).collect())
            .collect();
        Split { arrows, residual }
    }

    fn rooted_entry(&mut self, v: u32, set: &[u32]) -> (BigUint, Rc<Split>) {
        let key = (v, set.to_vec());
        if let Some(entry) = self.rooted.get(&key) {
            return entry.clone();
        }
        let split = Rc::new(self.split(v, set));
        let mut count = BigUint::one();
        for comp in &split.residual {
            count *= self.total(comp);
        }
        self.rooted.insert(key, (count.clone(), split.clone()));
        (count, split)
    }

    /// Members of the class of the induced component `set` whose source is `v`.
    pub fn rooted(&mut self, v: u32, set: &[u32]) -> BigUint {
        self.rooted_entry(v, set).0
    }

    /// Class size of the induced component `set`.
    pub fn total(&mut self, set: &[u32]) -> BigUint {
        if let Some(c) = self.totals.get(set) {
            return c.clone();
        }
        let mut sum = BigUint::zero();
        for &u in set {
            sum += self.rooted(u, set);
        }
        self.totals.insert(set.to_vec(), sum.clone());
        sum
    }

    /// Orient the component `set` uniformly at random, appending arrows to `out`.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, set: &[u32], rng: &mut R, out: &mut Vec<(usize, usize)>) {
        let total = self.total(set);
        let mut r = rng.gen_biguint_below(&total);
        let mut chosen = None;
        for &u in set {
            let (w, split) = self.rooted_entry(u, set);
            if r < w {
                chosen = Some(split);
                break;
            }
            r -= w;
        }
        let split = chosen.expect("draw below the total");
        out.extend_from_slice(&split.arrows);
        for comp in &split.residual {
            self.sample_into(comp, rng, out);
        }
    }
}

fn require_connected_undirected(g: &Pdag) -> Result<Vec<u32>> {
    if let Some(&(tail, head)) = g.directed_edges().first() {
        return Err(Error::NotUndirected { tail, head });
    }
    let comps = undirected_components(g);
    let n = g.order();
    match comps.len() {
        0 if n <= 1 => Ok((0..n as u32).collect()),
        1 if comps[0].len() == n => Ok(comps[0].iter().map(|v| v.0).collect()),
        _ => Err(Error::Disconnected),
    }
}

/// Edges oriented away from source `v` in the connected undirected graph `g`;
/// edges between equidistant endpoints are omitted.
pub fn flowed(v: usize, g: &Pdag) -> Result<DirectedEdgeSet> {
    g.check_vertex(v.into())?;
    require_connected_undirected(g)?;
    let dist = crate::graph::bfs_distances(g, v.into())?;
    let mut out = DirectedEdgeSet::new();
    for (a, b) in g.undirected_edges() {
        let (da, db) = (dist[&a.into()], dist[&b.into()]);
        if da < db {
            out.insert(a, b)?;
        } else if da > db {
            out.insert(b, a)?;
        }
    }
    Ok(out)
}

/// Number of class members of the connected undirected graph `g` with source `v`.
pub fn w_count(v: usize, g: &Pdag) -> Result<ClassCount> {
    g.check_vertex(v.into())?;
    let set = require_connected_undirected(g)?;
    if set.len() <= 1 {
        return Ok(ClassCount::one());
    }
    Ok(ClassCount(RootedCounter::new(g).rooted(v as u32, &set)))
}

/// Size of the class represented by `ess`.
pub fn class_size(ess: &Pdag) -> Result<ClassCount> {
    check_essential(ess)?;
    let mut counter = RootedCounter::new(ess);
    let mut size = BigUint::one();
    for comp in undirected_components(ess) {
        let set: Vec<u32> = comp.iter().map(|v| v.0).collect();
        size *= counter.total(&set);
    }
    Ok(ClassCount(size))
}

/// A uniformly random member orientation of the connected undirected graph `g`.
pub fn rand_edge<R: Rng + ?Sized>(g: &Pdag, rng: &mut R) -> Result<DirectedEdgeSet> {
    let set = require_connected_undirected(g)?;
    let mut arrows = Vec::new();
    if set.len() > 1 {
        RootedCounter::new(g).sample_into(&set, rng, &mut arrows);
    }
    DirectedEdgeSet::from_pairs(arrows)
}

/// Reusable uniform sampler over the class of one essential graph.
///
/// Holds the rooted-count memo, so repeated draws only pay for the walk.
#[derive(Debug)]
pub struct UniformSampler<'g> {
    ess: &'g Pdag,
    components: Vec<Vec<u32>>,
    counter: RootedCounter<'g>,
    scratch: Vec<(usize, usize)>,
}

impl<'g> UniformSampler<'g> {
    pub fn new(ess: &'g Pdag) -> Result<Self> {
        check_essential(ess)?;
        let components = undirected_components(ess)
            .into_iter()
            .map(|c| c.into_iter().map(|v| v.0).collect())
            .collect();
        Ok(UniformSampler {
            ess,
            components,
            counter: RootedCounter::new(ess),
            scratch: Vec::new(),
        })
    }

    pub fn class_size(&mut self) -> ClassCount {
        let mut size = BigUint::one();
        for comp in &self.components {
            size *= self.counter.total(comp);
        }
        ClassCount(size)
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Pdag {
        let mut dag = self.ess.clone();
        self.scratch.clear();
        for comp in &self.components {
            self.counter.sample_into(comp, rng, &mut self.scratch);
        }
        for &(t, h) in &self.scratch {
            dag.orient(t, h);
        }
        dag
    }
}

/// One uniform member of the class of `ess`.
pub fn sample_member<R: Rng + ?Sized>(ess: &Pdag, rng: &mut R) -> Result<SampledMember> {
    let mut sampler = UniformSampler::new(ess)?;
    Ok(SampledMember {
        dag: sampler.draw(rng),
        provenance: Provenance::Uniform,
    })
}

/// Vertex with in-degree zero among `set`'s induced undirected edges, as seen in `dag`.
pub fn source_of(dag: &Pdag, set: &[usize]) -> Option<usize> {
    let members: BTreeSet<usize> = set.iter().copied().collect();
    set.iter()
        .copied()
        .find(|&v| !dag.parents(v).any(|p| members.contains(&p)))
}
