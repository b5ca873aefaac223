use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Pdag;
use crate::rng::stream;

/// Density factor used when none is configured.
pub const DEFAULT_DENSITY: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Roughly the expected number of randomly drawn parents per vertex.
    pub density_factor: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(n: usize, density_factor: f64, seed: u64) -> Self {
        GeneratorConfig { n, density_factor, seed }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("generator needs n >= 1".into()));
        }
        if !(self.density_factor > 0.0 && self.density_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "density factor must be positive, got {}",
                self.density_factor
            )));
        }
        Ok(())
    }
}

/// Connected, chordal, v-structure-free DAG.
///
/// Vertices get uniformly shuffled positions and are processed from the
/// highest position down. The vertex at 1-based position `i` links to each
/// lower vertex with probability `min(1, c / (i - 1))`, keeps any links
/// already added as fill, and takes one uniform lower parent if it would
/// otherwise have none. Its lower neighbours are then joined into a clique.
/// Every edge points from the lower position to the higher one.
pub fn random_chordal_dag(cfg: &GeneratorConfig) -> Result<Pdag> {
    cfg.check()?;
    let n = cfg.n;
    let mut rng = stream(cfg.seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    // lower[p]: positions below p linked to position p
    let mut linked = vec![vec![false; n]; n];
    for p in (1..n).rev() {
        let prob = (cfg.density_factor / p as f64).min(1.0);
        for q in 0..p {
            if rng.gen_bool(prob) {
                linked[p][q] = true;
            }
        }
        if !linked[p][..p].iter().any(|&x| x) {
            linked[p][rng.gen_range(0..p)] = true;
        }
        let parents: Vec<usize> = (0..p).filter(|&q| linked[p][q]).collect();
        for (i, &a) in parents.iter().enumerate() {
            for &b in &parents[i + 1..] {
                linked[b][a] = true;
            }
        }
    }
    let mut builder = Pdag::builder(n);
    for p in 1..n {
        for q in 0..p {
            if linked[p][q] {
                builder.directed(order[q], order[p])?;
            }
        }
    }
    Ok(builder.build())
}

/// Edge count over `n choose 2`.
pub fn density_ratio(g: &Pdag) -> f64 {
    let n = g.order();
    if n < 2 {
        return 0.0;
    }
    g.num_edges() as f64 / (n * (n - 1) / 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::essential::essential_of;
    use crate::graph::{is_chordal, undirected_components, v_structures};

    #[test]
    fn single_vertex() {
        let g = random_chordal_dag(&GeneratorConfig::new(1, 1.0, 0)).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn invariants() {
        for seed in 0..200 {
            let n = 2 + (seed as usize % 15);
            let g = random_chordal_dag(&GeneratorConfig::new(n, 1.5, seed)).unwrap();
            assert!(g.is_dag());
            assert!(v_structures(&g).is_empty());
            let skel = g.skeleton();
            assert!(is_chordal(&skel).unwrap());
            let comps = undirected_components(&skel);
            assert_eq!(comps.len(), 1);
            assert_eq!(comps[0].len(), n);
            let ess = essential_of(&g).unwrap();
            assert_eq!(ess.num_undirected(), g.num_edges());
        }
    }

    #[test]
    fn deterministic() {
        let cfg = GeneratorConfig::new(12, 2.0, 77);
        assert_eq!(random_chordal_dag(&cfg).unwrap(), random_chordal_dag(&cfg).unwrap());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(random_chordal_dag(&GeneratorConfig::new(0, 1.0, 0)).is_err());
        assert!(random_chordal_dag(&GeneratorConfig::new(3, 0.0, 0)).is_err());
    }
}
