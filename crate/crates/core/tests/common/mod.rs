//! Corpora and brute-force oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use intervention_design::essential::essential_of;
use intervention_design::graph::{undirected_components, DirectedEdgeSet};
use intervention_design::rng::{mix, stream};
use intervention_design::Pdag;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random DAG: shuffled order, each forward pair present with probability `p`.
pub fn random_dag(n: usize, p: f64, seed: u64) -> Pdag {
    let mut rng = stream(seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut b = Pdag::builder(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                b.directed(order[i], order[j]).unwrap();
            }
        }
    }
    b.build()
}

pub fn is_connected(g: &Pdag) -> bool {
    let skel = g.skeleton();
    let comps = undirected_components(&skel);
    g.order() <= 1 || (comps.len() == 1 && comps[0].len() == g.order())
}

/// Essential graphs of random DAGs on `min_n..=max_n` vertices with a
/// connected skeleton and at least one undirected edge, paired with the
/// generating DAG.
pub fn essential_corpus(count: usize, min_n: usize, max_n: usize, seed: u64) -> Vec<(Pdag, Pdag)> {
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < count {
        let n = min_n + (mix(seed, i) as usize % (max_n - min_n + 1));
        let p = [0.3, 0.45, 0.6, 0.8][(mix(seed ^ 1, i) % 4) as usize];
        let dag = random_dag(n, p, mix(seed, i + 1_000_000));
        i += 1;
        if !is_connected(&dag) {
            continue;
        }
        let ess = essential_of(&dag).unwrap();
        if ess.num_undirected() > 0 {
            out.push((ess, dag));
        }
    }
    out
}

/// Connected undirected chordal graphs on up to `max_n` vertices: undirected
/// components of random essential graphs, as standalone graphs.
pub fn chordal_corpus(count: usize, max_n: usize, seed: u64) -> Vec<Pdag> {
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < count {
        let n = 2 + (mix(seed, i) as usize % (max_n - 1));
        let p = [0.35, 0.55, 0.75, 0.95][(mix(seed ^ 3, i) % 4) as usize];
        let ess = essential_of(&random_dag(n, p, mix(seed, i + 7_000_000))).unwrap();
        i += 1;
        for comp in undirected_components(&ess) {
            let ids: Vec<usize> = comp.iter().map(|v| v.index()).collect();
            let mut b = Pdag::builder(ids.len());
            for (a, &u) in ids.iter().enumerate() {
                for (c, &w) in ids.iter().enumerate() {
                    if a < c && ess.is_undirected(u, w) {
                        b.undirected(a, c).unwrap();
                    }
                }
            }
            if out.len() < count && ids.len() >= 2 {
                out.push(b.build());
            }
        }
    }
    out
}

/// Undirected pairs of `ess` oriented identically by every member in
/// `members` that contains all arrows of `a`.
pub fn invariant_pairs(ess: &Pdag, members: &[Pdag], a: &DirectedEdgeSet) -> BTreeSet<(usize, usize)> {
    let consistent: Vec<&Pdag> = members
        .iter()
        .filter(|m| a.iter().all(|(t, h)| m.has_arrow(t, h)))
        .collect();
    assert!(!consistent.is_empty(), "background orientations drawn from a member");
    ess.undirected_edges()
        .into_iter()
        .filter(|&(u, v)| {
            let first = consistent[0].has_arrow(u, v);
            consistent.iter().all(|m| m.has_arrow(u, v) == first)
        })
        .collect()
}

/// True when some vertex subset of size >= 4 induces a cycle.
pub fn has_hole(g: &Pdag) -> bool {
    let n = g.order();
    assert!(n <= 16);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 4 {
            continue;
        }
        let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let degree_two = vs
            .iter()
            .all(|&u| vs.iter().filter(|&&w| g.adjacent(u, w)).count() == 2);
        if !degree_two {
            continue;
        }
        // induced 2-regular subgraph is a single cycle iff it is connected
        let mut seen = vec![vs[0]];
        let mut stack = vec![vs[0]];
        while let Some(u) = stack.pop() {
            for &w in &vs {
                if g.adjacent(u, w) && !seen.contains(&w) {
                    seen.push(w);
                    stack.push(w);
                }
            }
        }
        if seen.len() == vs.len() {
            return true;
        }
    }
    false
}

/// Random undirected graph with edge probability `p`.
pub fn random_undirected(n: usize, p: f64, seed: u64) -> Pdag {
    let mut rng = stream(seed, 1);
    let mut b = Pdag::builder(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                b.undirected(u, v).unwrap();
            }
        }
    }
    b.build()
}

/// Vertex subsets of `0..n` as sorted id lists, indexed by bitmask.
pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect())
        .collect()
}

pub fn undirected(n: usize, edges: &[(usize, usize)]) -> Pdag {
    let mut b = Pdag::builder(n);
    for &(u, v) in edges {
        b.undirected(u, v).unwrap();
    }
    b.build()
}
