//! Essential graphs computed directly from a ground-truth DAG.

use crate::error::{Error, Result};
use crate::graph::{
    find_directed_cycle, perfect_elimination_ordering, undirected_components, v_structures, Pdag,
};
use crate::meek::close_in_place;

/// The essential graph (CPDAG) of `dag`: orient exactly its v-structures on the
/// skeleton, then close under the Meek rules.
pub fn essential_of(dag: &Pdag) -> Result<Pdag> {
    dag.require_dag()?;
    let mut work = dag.skeleton();
    for (a, b, c) in v_structures(dag) {
        work.orient(a.index(), b.index());
        work.orient(c.index(), b.index());
    }
    close_in_place(&mut work)?;
    Ok(work)
}

pub fn validate_essential(g: &Pdag) -> bool {
    check_essential(g).is_ok()
}

/// Like [`validate_essential`], naming the offending component or pair.
pub fn check_essential(g: &Pdag) -> Result<()> {
    if let Some(cycle) = find_directed_cycle(g) {
        let labels: Vec<String> = cycle.iter().map(|&v| g.label(v)).collect();
        return Err(Error::InvalidEssential(format!(
            "directed cycle {}",
            labels.join(" -> ")
        )));
    }
    let undirected = g.undirected_part();
    if perfect_elimination_ordering(&undirected)?.is_none() {
        // name the first non-chordal component
        for comp in undirected_components(&undirected) {
            let mut b = Pdag::builder(g.order());
            for &u in &comp {
                for w in undirected.undirected_neighbors(u.index()) {
                    b.undirected(u.index(), w)?;
                }
            }
            if perfect_elimination_ordering(&b.build())?.is_none() {
                let labels: Vec<String> = comp.iter().map(|v| g.label(v.index())).collect();
                return Err(Error::InvalidEssential(format!(
                    "undirected component {{{}}} is not chordal",
                    labels.join(", ")
                )));
            }
        }
    }
    let mut closed = g.clone();
    close_in_place(&mut closed).map_err(|e| Error::InvalidEssential(e.to_string()))?;
    if let Some(&(u, v)) = g
        .undirected_edges()
        .iter()
        .find(|&&(u, v)| !closed.is_undirected(u, v))
    {
        return Err(Error::InvalidEssential(format!(
            "pair {} - {} is oriented by the Meek rules",
            g.label(u),
            g.label(v)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{directed, undirected};

    #[test]
    fn collider_stays_directed() {
        let dag = directed(3, &[(0, 1), (2, 1)]);
        assert_eq!(essential_of(&dag).unwrap(), dag);
    }

    #[test]
    fn chain_becomes_undirected() {
        let dag = directed(3, &[(0, 1), (1, 2)]);
        assert_eq!(essential_of(&dag).unwrap(), undirected(3, &[(0, 1), (1, 2)]));
    }

    #[test]
    fn every_triangle_orientation_is_undirected() {
        let tri = undirected(3, &[(0, 1), (1, 2), (0, 2)]);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let dag = directed(3, &[(p[0], p[1]), (p[1], p[2]), (p[0], p[2])]);
            assert_eq!(essential_of(&dag).unwrap(), tri);
        }
    }

    #[test]
    fn rejects_non_dag() {
        assert!(essential_of(&undirected(2, &[(0, 1)])).is_err());
        assert!(essential_of(&directed(3, &[(0, 1), (1, 2), (2, 0)])).is_err());
    }

    #[test]
    fn validation_cases() {
        let c4 = undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let err = check_essential(&c4).unwrap_err().to_string();
        assert!(err.contains("not chordal"), "{err}");
        assert!(validate_essential(&undirected(3, &[(0, 1), (1, 2), (0, 2)])));

        let mut b = Pdag::builder(3);
        b.directed(0, 1).unwrap().undirected(1, 2).unwrap();
        let err = check_essential(&b.build()).unwrap_err().to_string();
        assert!(err.contains("1 - 2"), "{err}");
    }
}
