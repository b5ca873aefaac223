//! Orientation propagation with Meek rules 1-4, the resolved set of an
//! interventional orientation set, and the per-DAG discovered count.

use std::collections::{BTreeSet, VecDeque};

use crate::graph::{
    find_directed_cycle, incident_orientations, DirectedEdgeSet, InterventionSet, Mark, Pdag,
    VertexId,
};
use crate::error::{Error, Result};

/// Close `g` under Meek rules 1-4.
///
/// Directed pairs and the skeleton are never changed. Fails on a cyclic
/// directed part or if the rules would orient a pair both ways.
pub fn meek_close(g: &Pdag) -> Result<Pdag> {
    if let Some(cycle) = find_directed_cycle(g) {
        return Err(Error::Cycle(cycle.into_iter().map(|v| g.label(v)).collect()));
    }
    let mut out = g.clone();
    close_in_place(&mut out)?;
    Ok(out)
}

/// Worklist closure. The input's directed part must already be acyclic.
pub(crate) fn close_in_place(g: &mut Pdag) -> Result<()> {
    let n = g.order();
    let mut queued = vec![false; n * n];
    let mut work: VecDeque<(usize, usize)> = VecDeque::new();
    for (u, v) in g.undirected_edges() {
        queued[u * n + v] = true;
        work.push_back((u, v));
    }
    let mut oriented_any = false;
    while let Some((a, b)) = work.pop_front() {
        queued[a * n + b] = false;
        if !g.is_undirected(a, b) {
            continue;
        }
        let forward = rule_fires(g, a, b);
        let backward = rule_fires(g, b, a);
        let (tail, head) = match (forward, backward) {
            (true, true) => return Err(Error::Contradiction { a, b }),
            (true, false) => (a, b),
            (false, true) => (b, a),
            (false, false) => continue,
        };
        g.orient(tail, head);
        oriented_any = true;
        // A new arrow tail -> head can enable rules on undirected pairs at
        // either endpoint, and (rule 4) at any vertex adjacent to both.
        let mut touch = |x: usize, g: &Pdag, work: &mut VecDeque<(usize, usize)>| {
            for y in g.undirected_neighbors(x) {
                let (p, q) = if x < y { (x, y) } else { (y, x) };
                if !queued[p * n + q] {
                    queued[p * n + q] = true;
                    work.push_back((p, q));
                }
            }
        };
        touch(tail, g, &mut work);
        touch(head, g, &mut work);
        for &c in g.neighbors(tail) {
            let c = c as usize;
            if c != head && g.adjacent(c, head) {
                touch(c, g, &mut work);
            }
        }
    }
    if oriented_any {
        if let Some((a, b)) = find_directed_cycle(g).map(|c| (c[0], c[1])) {
            return Err(Error::Contradiction { a, b });
        }
    }
    Ok(())
}

/// Whether some rule orients the undirected pair `a - b` as `a -> b`.
pub(crate) fn rule_fires(g: &Pdag, a: usize, b: usize) -> bool {
    let na = g.neighbors(a);
    // rule 1: c -> a - b, c and b nonadjacent
    for &c in na {
        let c = c as usize;
        if c != b && g.has_arrow(c, a) && !g.adjacent(c, b) {
            return true;
        }
    }
    // rule 2: a -> c -> b
    for &c in na {
        let c = c as usize;
        if g.has_arrow(a, c) && g.has_arrow(c, b) {
            return true;
        }
    }
    // rule 3: c -> b <- d, a - c, a - d, c and d nonadjacent
    let mut spouses: Vec<usize> = Vec::new();
    for &c in g.neighbors(b) {
        let c = c as usize;
        if c != a && g.has_arrow(c, b) && g.is_undirected(a, c) {
            spouses.push(c);
        }
    }
    for (i, &c) in spouses.iter().enumerate() {
        if spouses[i + 1..].iter().any(|&d| !g.adjacent(c, d)) {
            return true;
        }
    }
    // rule 4: d -> c, c -> b (or c - b), a adjacent to c and d, b and d nonadjacent
    for &c in na {
        let c = c as usize;
        if c == b || !matches!(g.mark(c, b), Mark::Out | Mark::Undirected) {
            continue;
        }
        for d in g.parents(c) {
            if d != a && d != b && g.adjacent(a, d) && !g.adjacent(b, d) {
                return true;
            }
        }
    }
    false
}

/// Orient `a`'s edges on a copy of `ess`, checking each against `g_star`.
fn apply_orientations(a: &DirectedEdgeSet, ess: &Pdag, g_star: &Pdag) -> Result<Pdag> {
    a.check_against(ess)?;
    let mut work = ess.clone();
    for (t, h) in a.iter() {
        if !g_star.has_arrow(t, h) || work.has_arrow(h, t) {
            return Err(Error::InconsistentOrientation { tail: t, head: h });
        }
        if work.is_undirected(t, h) {
            work.orient(t, h);
        }
    }
    Ok(work)
}

/// Undirected pairs of `ess` whose orientation is fixed once `a` is added
/// to the essential graph's own orientations and the result is Meek-closed.
pub fn resolved_set(
    a: &DirectedEdgeSet,
    ess: &Pdag,
    g_star: &Pdag,
) -> Result<BTreeSet<(VertexId, VertexId)>> {
    let mut work = apply_orientations(a, ess, g_star)?;
    close_in_place(&mut work)?;
    Ok(ess
        .undirected_edges()
        .into_iter()
        .filter(|&(u, v)| !work.is_undirected(u, v))
        .map(|(u, v)| (u.into(), v.into()))
        .collect())
}

/// Number of edges of `ess` resolved by intervening on `targets` when the
/// truth is `g`.
pub fn discovered_count(targets: &InterventionSet, g: &Pdag, ess: &Pdag) -> Result<usize> {
    let a = incident_orientations(g, targets)?;
    Ok(resolved_set(&a, ess, g)?.len())
}

/// Fixed-width bitset over the undirected edges of one essential graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeBits {
    words: Vec<u64>,
}

impl EdgeBits {
    pub fn zeros(len: usize) -> Self {
        EdgeBits {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &EdgeBits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// `|self ∪ other|` without allocating.
    pub fn union_count(&self, other: &EdgeBits) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &EdgeBits) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

/// Resolved-set evaluation specialised to one essential graph.
///
/// Indexes the undirected pairs of `ess` once so repeated evaluations over
/// many members return bitsets instead of pair sets.
#[derive(Clone, Debug)]
pub struct Resolver {
    ess: Pdag,
    edges: Vec<(usize, usize)>,
}

impl Resolver {
    pub fn new(ess: &Pdag) -> Self {
        Resolver {
            ess: ess.clone(),
            edges: ess.undirected_edges(),
        }
    }

    pub fn essential(&self) -> &Pdag {
        &self.ess
    }

    /// Undirected pairs of the essential graph, indexed as in the bitsets.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Resolved edges when intervening on `targets` with truth `member`.
    ///
    /// `member` must be a DAG in the class; only the orientation of pairs
    /// incident to targets is read from it.
    pub fn resolve(&self, member: &Pdag, targets: &[usize]) -> Result<EdgeBits> {
        let mut work = self.ess.clone();
        for &v in targets {
            for &u in self.ess.neighbors(v) {
                let u = u as usize;
                if !work.is_undirected(v, u) {
                    continue;
                }
                if member.has_arrow(v, u) {
                    work.orient(v, u);
                } else if member.has_arrow(u, v) {
                    work.orient(u, v);
                } else {
                    return Err(Error::NotADag(format!("pair {v} - {u} is not directed in member")));
                }
            }
        }
        close_in_place(&mut work)?;
        let mut bits = EdgeBits::zeros(self.edges.len());
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if !work.is_undirected(u, v) {
                bits.set(i);
            }
        }
        Ok(bits)
    }

    pub fn count(&self, member: &Pdag, targets: &[usize]) -> Result<usize> {
        Ok(self.resolve(member, targets)?.count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{directed, undirected};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edge(tail: usize, head: usize) -> DirectedEdgeSet {
        DirectedEdgeSet::from_pairs([(tail, head)]).unwrap()
    }

    fn pairs(set: &BTreeSet<(VertexId, VertexId)>) -> Vec<(usize, usize)> {
        set.iter().map(|&(u, v)| (u.index(), v.index())).collect()
    }

    #[test]
    fn rule_one() {
        let mut b = Pdag::builder(3);
        b.directed(0, 1).unwrap().undirected(1, 2).unwrap();
        let closed = meek_close(&b.build()).unwrap();
        assert!(closed.has_arrow(1, 2));
    }

    #[test]
    fn rule_two() {
        let mut b = Pdag::builder(3);
        b.directed(0, 2).unwrap().directed(2, 1).unwrap().undirected(0, 1).unwrap();
        let closed = meek_close(&b.build()).unwrap();
        assert!(closed.has_arrow(0, 1));
    }

    #[test]
    fn rule_three() {
        // a=0, b=1, c=2, d=3
        let mut b = Pdag::builder(4);
        b.undirected(0, 1).unwrap().undirected(0, 2).unwrap().undirected(0, 3).unwrap();
        b.directed(2, 1).unwrap().directed(3, 1).unwrap();
        let closed = meek_close(&b.build()).unwrap();
        assert!(closed.has_arrow(0, 1));
        assert!(closed.is_undirected(0, 2));
        assert!(closed.is_undirected(0, 3));
    }

    #[test]
    fn rule_four() {
        // d=3 -> c=2 -> b=1, a=0 adjacent to all, b and d nonadjacent
        let mut b = Pdag::builder(4);
        b.undirected(0, 1).unwrap().undirected(0, 2).unwrap().undirected(0, 3).unwrap();
        b.directed(3, 2).unwrap().directed(2, 1).unwrap();
        let closed = meek_close(&b.build()).unwrap();
        assert!(closed.has_arrow(0, 1));
    }

    #[test]
    fn rejects_cycle() {
        let g = directed(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(matches!(meek_close(&g), Err(Error::Cycle(_))));
    }

    #[test]
    fn contradiction_is_an_error() {
        // 2 -> 0 - 1 <- 3 with 2,1 and 3,0 nonadjacent: rule 1 wants both ways
        let mut b = Pdag::builder(4);
        b.directed(2, 0).unwrap().directed(3, 1).unwrap().undirected(0, 1).unwrap();
        assert!(matches!(meek_close(&b.build()), Err(Error::Contradiction { .. })));
    }

    #[test]
    fn closure_order_independent() {
        // Apply single firing rules in random order until none fires.
        let mut b = Pdag::builder(6);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (1, 3), (3, 4), (2, 4), (4, 5)] {
            b.undirected(u, v).unwrap();
        }
        let base = b.build();
        let mut start = base.to_builder();
        start.set(0, 1, crate::graph::PairState::Directed { tail: 0.into(), head: 1.into() }).unwrap();
        let start = start.build();
        let reference = meek_close(&start).unwrap();
        assert_eq!(meek_close(&reference).unwrap(), reference);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut g = start.clone();
            loop {
                let mut firing = Vec::new();
                for (u, v) in g.undirected_edges() {
                    if rule_fires(&g, u, v) {
                        firing.push((u, v));
                    }
                    if rule_fires(&g, v, u) {
                        firing.push((v, u));
                    }
                }
                match firing.choose(&mut rng) {
                    Some(&(t, h)) => g.orient(t, h),
                    None => break,
                }
            }
            assert_eq!(g, reference);
        }
    }

    #[test]
    fn resolved_examples() {
        let path = undirected(3, &[(0, 1), (1, 2)]);
        let chain = directed(3, &[(0, 1), (1, 2)]);
        assert!(resolved_set(&DirectedEdgeSet::new(), &path, &chain).unwrap().is_empty());
        assert_eq!(pairs(&resolved_set(&edge(0, 1), &path, &chain).unwrap()), vec![(0, 1), (1, 2)]);

        let tri = undirected(3, &[(0, 1), (1, 2), (0, 2)]);
        let tri_dag = directed(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(pairs(&resolved_set(&edge(0, 1), &tri, &tri_dag).unwrap()), vec![(0, 1)]);
    }

    #[test]
    fn resolved_rejects_wrong_orientation() {
        let path = undirected(3, &[(0, 1), (1, 2)]);
        let chain = directed(3, &[(0, 1), (1, 2)]);
        assert!(matches!(
            resolved_set(&edge(1, 0), &path, &chain),
            Err(Error::InconsistentOrientation { tail: 1, head: 0 })
        ));
    }

    #[test]
    fn discovered_examples() {
        let ess = undirected(3, &[(0, 1), (1, 2)]);
        let chain = directed(3, &[(0, 1), (1, 2)]);
        let fork = directed(3, &[(1, 0), (1, 2)]);
        let at = |v: usize| InterventionSet::new([v]).unwrap();
        assert_eq!(discovered_count(&at(1), &chain, &ess).unwrap(), 2);
        assert_eq!(discovered_count(&at(0), &chain, &ess).unwrap(), 2);
        assert_eq!(discovered_count(&at(0), &fork, &ess).unwrap(), 1);
    }

    #[test]
    fn resolver_matches_resolved_set() {
        let ess = undirected(4, &[(0, 1), (1, 2), (2, 3), (1, 3)]);
        let member = directed(4, &[(1, 0), (1, 2), (1, 3), (2, 3)]);
        let resolver = Resolver::new(&ess);
        for v in 0..4 {
            let bits = resolver.resolve(&member, &[v]).unwrap();
            let set = resolved_set(
                &incident_orientations(&member, &InterventionSet::new([v]).unwrap()).unwrap(),
                &ess,
                &member,
            )
            .unwrap();
            assert_eq!(bits.count(), set.len());
            for (i, &(a, b)) in resolver.edges().iter().enumerate() {
                assert_eq!(bits.get(i), set.contains(&(a.into(), b.into())));
            }
        }
    }

    #[test]
    fn edge_bits_ops() {
        let mut a = EdgeBits::zeros(70);
        let mut b = EdgeBits::zeros(70);
        a.set(1);
        a.set(65);
        b.set(65);
        b.set(3);
        assert_eq!(a.union_count(&b), 3);
        assert!(!a.is_subset(&b));
        let mut c = b.clone();
        c.union_with(&a);
        assert!(a.is_subset(&c) && b.is_subset(&c));
        assert_eq!(c.count(), 3);
    }
}
