use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{InterventionSet, Pdag};
use crate::meek::discovered_count;

/// Edges oriented by intervening on `targets` over those left undirected
/// observationally.
pub fn discovered_edge_ratio(g_star: &Pdag, ess: &Pdag, targets: &InterventionSet) -> Result<f64> {
    let total = ess.num_undirected();
    if total == 0 {
        return Err(Error::NothingToDiscover);
    }
    Ok(discovered_count(targets, g_star, ess)? as f64 / total as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: String,
    pub k: usize,
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; zero for fewer than two instances.
    pub std_dev: f64,
    pub instances: usize,
    /// Mean edge count over `n choose 2`.
    pub density: f64,
}

impl EvalReport {
    pub fn new(algorithm: &str, k: usize, ratios: Vec<f64>, density: f64) -> Self {
        let m = ratios.len();
        let mean = if m == 0 { 0.0 } else { ratios.iter().sum::<f64>() / m as f64 };
        let std_dev = if m < 2 {
            0.0
        } else {
            (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
        };
        EvalReport {
            algorithm: algorithm.to_string(),
            k,
            instances: m,
            ratios,
            mean,
            std_dev,
            density,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::essential::essential_of;
    use crate::graph::fixtures::directed;

    fn at(v: &[usize]) -> InterventionSet {
        InterventionSet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn ratio_examples() {
        let chain = directed(3, &[(0, 1), (1, 2)]);
        let ess = essential_of(&chain).unwrap();
        assert_eq!(discovered_edge_ratio(&chain, &ess, &at(&[1])).unwrap(), 1.0);
        assert_eq!(discovered_edge_ratio(&chain, &ess, &at(&[])).unwrap(), 0.0);
        let fork = directed(3, &[(1, 0), (1, 2)]);
        assert_eq!(discovered_edge_ratio(&fork, &ess, &at(&[0])).unwrap(), 0.5);
    }

    #[test]
    fn nothing_to_discover() {
        let collider = directed(3, &[(0, 1), (2, 1)]);
        let ess = essential_of(&collider).unwrap();
        assert!(matches!(
            discovered_edge_ratio(&collider, &ess, &at(&[1])),
            Err(Error::NothingToDiscover)
        ));
    }

    #[test]
    fn report_stats() {
        let r = EvalReport::new("greedy", 2, vec![0.5, 1.0], 0.3);
        assert_eq!(r.mean, 0.75);
        assert!((r.std_dev - 0.125f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.instances, 2);
    }
}
