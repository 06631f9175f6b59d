//! Random bipartite graphs for fuzzing and property checks.

use rand::Rng;

use crate::graph::BipartiteGraph;

/// Erdős–Rényi bipartite graph: each of the `n_online * n_offline` edges is
/// present independently with probability `p`.
pub fn random_bipartite<R: Rng + ?Sized>(
    n_online: usize,
    n_offline: usize,
    p: f64,
    rng: &mut R,
) -> BipartiteGraph {
    let adjacency = (0..n_online)
        .map(|_| (0..n_offline).filter(|_| rng.gen_bool(p)).collect())
        .collect();
    BipartiteGraph::from_adjacency(n_offline, adjacency).expect("generated indices are in range")
}
