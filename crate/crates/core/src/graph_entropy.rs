//! Normalized network entropy of a thresholded agent graph.
//!
//! Each node's entropy is `ln(k) / ln(N - 1)` for degree `k` (zero for
//! degrees 0 and 1); the network value is the mean over nodes. A literal
//! single-number variant over the raw dissimilarity sum is kept for
//! comparison runs.

use crate::error::{Error, Result};
use crate::similarity::DissimilarityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentGraph {
    num_nodes: usize,
    adjacency: Vec<bool>,
    degrees: Vec<usize>,
}

impl AgentGraph {
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![false; num_nodes * num_nodes];
        for &(i, j) in edges {
            if i != j {
                adjacency[i * num_nodes + j] = true;
                adjacency[j * num_nodes + i] = true;
            }
        }
        let degrees = (0..num_nodes)
            .map(|i| (0..num_nodes).filter(|&j| adjacency[i * num_nodes + j]).count())
            .collect();
        AgentGraph {
            num_nodes,
            adjacency,
            degrees,
        }
    }

    pub fn complete(num_nodes: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..num_nodes)
            .flat_map(|i| (i + 1..num_nodes).map(move |j| (i, j)))
            .collect();
        AgentGraph::from_edges(num_nodes, &edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.num_nodes + j]
    }

    pub fn num_edges(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }
}

/// Binary graph with an edge wherever the dissimilarity is at most `tau`.
pub fn threshold_graph(m: &DissimilarityMatrix, tau: f64) -> Result<AgentGraph> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Config(format!("tau must be in (0, 1], got {tau}")));
    }
    let n = m.n();
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| m.get(i, j) <= tau)
        .collect();
    Ok(AgentGraph::from_edges(n, &edges))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResult {
    pub per_node: Vec<f64>,
    pub network: f64,
}

/// `ln(k_i) / ln(N - 1)`, with the zero convention for isolated and
/// degree-1 nodes. Requires at least 3 nodes.
pub fn node_entropy(g: &AgentGraph, i: usize) -> Result<f64> {
    let n = g.num_nodes();
    if n < 3 {
        return Err(Error::TooFewNodes(n));
    }
    let k = g.degree(i);
    Ok(if k <= 1 {
        0.0
    } else {
        (k as f64).ln() / ((n - 1) as f64).ln()
    })
}

/// Mean of the per-node normalized entropies.
pub fn network_entropy(g: &AgentGraph) -> Result<EntropyResult> {
    let n = g.num_nodes();
    if n < 3 {
        return Err(Error::TooFewNodes(n));
    }
    let per_node: Vec<f64> = (0..n).map(|i| node_entropy(g, i).unwrap()).collect();
    let network = per_node.iter().sum::<f64>() / n as f64;
    Ok(EntropyResult { per_node, network })
}

/// The single-number variant: `ln(sum of all dissimilarities) /
/// (N * ln(N - 1))`. Undefined (None) when the sum is not positive.
pub fn literal_entropy(m: &DissimilarityMatrix) -> Result<Option<f64>> {
    let n = m.n();
    if n < 3 {
        return Err(Error::TooFewNodes(n));
    }
    let total = m.total();
    if total <= 0.0 {
        return Ok(None);
    }
    Ok(Some(total.ln() / (n as f64 * ((n - 1) as f64).ln())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::SquareMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn complete_graph_entropy_one() {
        for n in 3..=12 {
            let g = AgentGraph::complete(n);
            let e = network_entropy(&g).unwrap();
            assert!((e.network - 1.0).abs() < 1e-12, "n={n}: {}", e.network);
        }
    }

    #[test]
    fn empty_graph_entropy_zero() {
        let g = AgentGraph::from_edges(10, &[]);
        assert_eq!(network_entropy(&g).unwrap().network, 0.0);
    }

    #[test]
    fn node_entropy_closed_forms() {
        // N=10: k=9 -> 1, k=1 -> 0, k=3 -> 0.5
        let hub_edges: Vec<(usize, usize)> = (1..10).map(|j| (0, j)).collect();
        let g = AgentGraph::from_edges(10, &hub_edges);
        assert!((node_entropy(&g, 0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(node_entropy(&g, 1).unwrap(), 0.0);

        let g3 = AgentGraph::from_edges(10, &[(0, 1), (0, 2), (0, 3)]);
        assert!((node_entropy(&g3, 0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn star_graph_quarter() {
        let g = AgentGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let e = network_entropy(&g).unwrap();
        assert!((e.network - 0.25).abs() < 1e-12);
    }

    #[test]
    fn too_few_nodes_rejected() {
        let g = AgentGraph::from_edges(2, &[(0, 1)]);
        assert!(network_entropy(&g).is_err());
    }

    #[test]
    fn walk_distribution_sums_to_one() {
        let g = AgentGraph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (3, 4)]);
        for i in 0..5 {
            let k = g.degree(i);
            if k == 0 {
                continue;
            }
            let total: f64 = (0..5)
                .filter(|&j| g.has_edge(i, j))
                .map(|_| 1.0 / k as f64)
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_graph_edge_cases() {
        let m = DissimilarityMatrix::from_matrix(SquareMatrix::zeros(4)).unwrap();
        let g = threshold_graph(&m, 0.01).unwrap();
        assert_eq!(g.num_edges(), 6); // complete

        let m = DissimilarityMatrix::from_matrix(SquareMatrix::from_fn(4, |i, j| {
            if i == j {
                0.0
            } else {
                0.5
            }
        }))
        .unwrap();
        let g = threshold_graph(&m, 0.01).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> (AgentGraph, Vec<(usize, usize)>) {
        let mut edges = Vec::new();
        let mut missing = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    edges.push((i, j));
                } else {
                    missing.push((i, j));
                }
            }
        }
        (AgentGraph::from_edges(n, &edges), edges)
    }

    proptest! {
        #[test]
        fn entropy_bounds_and_monotonicity(seed in 0u64..300) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..25);
            let (g, mut edges) = random_graph(n, rng.gen_range(0.05..0.9), &mut rng);
            let h = network_entropy(&g).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&h.network));

            // add one absent edge: entropy never decreases
            let absent: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !g.has_edge(i, j))
                .collect();
            if let Some(&e) = absent.first() {
                edges.push(e);
                let g2 = AgentGraph::from_edges(n, &edges);
                let h2 = network_entropy(&g2).unwrap();
                prop_assert!(h2.network >= h.network - 1e-15);
            }

            // node permutation invariance
            use rand::seq::SliceRandom;
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let perm_edges: Vec<(usize, usize)> =
                edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
            let gp = AgentGraph::from_edges(n, &perm_edges);
            let hp = network_entropy(&gp).unwrap();
            prop_assert!((hp.network - network_entropy(&AgentGraph::from_edges(n, &edges)).unwrap().network).abs() < 1e-12);
        }

        #[test]
        fn threshold_matches_entrywise_oracle(seed in 0u64..200) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..20);
            let mut m = SquareMatrix::zeros(n);
            for i in 0..n {
                for j in i + 1..n {
                    let v = rng.gen_range(0.0..1.0);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let d = DissimilarityMatrix::from_matrix(m).unwrap();
            let tau = 0.01_f64.max(rng.gen_range(0.0..0.2));
            let g = threshold_graph(&d, tau).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let expected = i != j && d.get(i, j) <= tau;
                    prop_assert_eq!(g.has_edge(i, j), expected);
                }
            }
        }
    }
}
