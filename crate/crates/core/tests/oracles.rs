//! Meek closure, essential graphs, counting and chordality checked against
//! brute-force oracles that share no code with the library algorithms.

mod common;

use std::collections::BTreeSet;

use common::*;
use intervention_design::essential::{essential_of, validate_essential};
use intervention_design::graph::{
    incident_orientations, is_chordal, perfect_elimination_ordering, v_structures, DirectedEdgeSet,
};
use intervention_design::mec::{class_size, enumerate, source_of, w_count, DEFAULT_ENUMERATION_CAP};
use intervention_design::meek::resolved_set;
use intervention_design::rng::stream;
use intervention_design::{InterventionSet, Pdag};
use rand::Rng;

/// Every acyclic orientation of `dag`'s skeleton with `dag`'s v-structures.
fn brute_force_class(dag: &Pdag) -> Vec<Pdag> {
    let skel = dag.skeleton();
    let pairs = skel.undirected_edges();
    let target = v_structures(dag);
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut b = Pdag::builder(dag.order());
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                b.directed(v, u).unwrap();
            } else {
                b.directed(u, v).unwrap();
            }
        }
        let g = b.build();
        if g.is_dag() && v_structures(&g) == target {
            out.push(g);
        }
    }
    out
}

fn edge_key(g: &Pdag) -> Vec<(usize, usize)> {
    g.directed_edges()
}

#[test]
fn essential_graph_matches_class_definition() {
    let mut checked = 0;
    for seed in 0..1200u64 {
        let n = 2 + (seed as usize % 5);
        let p = [0.3, 0.5, 0.7, 0.9][(seed / 5 % 4) as usize];
        let dag = random_dag(n, p, seed);
        let ess = essential_of(&dag).unwrap();
        assert!(validate_essential(&ess), "{ess:?}");
        let class = brute_force_class(&dag);
        for (u, v) in dag.skeleton().undirected_edges() {
            let first = class[0].has_arrow(u, v);
            let invariant = class.iter().all(|m| m.has_arrow(u, v) == first);
            assert_eq!(!ess.is_undirected(u, v), invariant, "pair {u}-{v} of {dag:?}");
            if invariant {
                assert_eq!(ess.has_arrow(u, v), first);
            }
        }
        // class invariance and enumeration agree with the brute-force class
        for m in &class {
            assert_eq!(essential_of(m).unwrap(), ess);
        }
        let mut listed: Vec<_> = enumerate(&ess, DEFAULT_ENUMERATION_CAP).unwrap().iter().map(edge_key).collect();
        let mut expected: Vec<_> = class.iter().map(edge_key).collect();
        listed.sort();
        expected.sort();
        assert_eq!(listed, expected);
        assert_eq!(class_size(&ess).unwrap().to_u64().unwrap() as usize, class.len());
        checked += 1;
    }
    assert!(checked >= 1000);
}

#[test]
fn meek_closure_is_complete_for_background_orientations() {
    let mut rng = stream(99, 0);
    for (ess, _) in essential_corpus(250, 3, 7, 17) {
        let members = enumerate(&ess, DEFAULT_ENUMERATION_CAP).unwrap();
        for _ in 0..6 {
            let g = &members[rng.gen_range(0..members.len())];
            // random subset of the member's arrows over undirected pairs
            let mut a = DirectedEdgeSet::new();
            for (u, v) in ess.undirected_edges() {
                if rng.gen_bool(0.3) {
                    if g.has_arrow(u, v) {
                        a.insert(u, v).unwrap();
                    } else {
                        a.insert(v, u).unwrap();
                    }
                }
            }
            let got: BTreeSet<(usize, usize)> =
                resolved_set(&a, &ess, g).unwrap().into_iter().map(|(u, v)| (u.index(), v.index())).collect();
            assert_eq!(got, invariant_pairs(&ess, &members, &a), "{ess:?} with {a:?}");
        }
        // single-vertex interventions from every member
        let g = &members[rng.gen_range(0..members.len())];
        for v in 0..ess.order() {
            let a = incident_orientations(g, &InterventionSet::new([v]).unwrap()).unwrap();
            let got: BTreeSet<(usize, usize)> =
                resolved_set(&a, &ess, g).unwrap().into_iter().map(|(u, v)| (u.index(), v.index())).collect();
            assert_eq!(got, invariant_pairs(&ess, &members, &a));
        }
    }
}

#[test]
fn rooted_counts_match_enumeration() {
    for g in chordal_corpus(300, 7, 5) {
        let members = enumerate(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        let all: Vec<usize> = (0..g.order()).collect();
        let mut sum = 0u64;
        for v in 0..g.order() {
            let w = w_count(v, &g).unwrap().to_u64().unwrap();
            let sourced = members.iter().filter(|m| source_of(m, &all) == Some(v)).count() as u64;
            assert_eq!(w, sourced, "source {v} of {g:?}");
            sum += w;
        }
        assert_eq!(sum as usize, members.len());
    }
}

#[test]
fn chordality_matches_hole_search() {
    for seed in 0..1500u64 {
        let n = 1 + (seed as usize % 8);
        let p = [0.3, 0.5, 0.7][(seed % 3) as usize];
        let g = random_undirected(n, p, seed);
        let chordal = is_chordal(&g).unwrap();
        assert_eq!(chordal, !has_hole(&g), "{g:?}");
        if let Some(peo) = perfect_elimination_ordering(&g).unwrap() {
            let pos: Vec<usize> = {
                let mut pos = vec![0; n];
                for (i, v) in peo.iter().enumerate() {
                    pos[v.index()] = i;
                }
                pos
            };
            for v in 0..n {
                let later: Vec<usize> = g.undirected_neighbors(v).filter(|&w| pos[w] > pos[v]).collect();
                for (i, &a) in later.iter().enumerate() {
                    for &b in &later[i + 1..] {
                        assert!(g.adjacent(a, b), "later neighbours of {v} not a clique in {g:?}");
                    }
                }
            }
        }
    }
}
