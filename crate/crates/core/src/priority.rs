//! Priority algorithms: MinGreedy, MinRanking and RHSGreedy.
//!
//! MinGreedy and MinRanking repeatedly pick an alive online vertex of minimum
//! current degree (alive offline neighbors only), match it, and delete both
//! endpoints. A selected vertex with no alive neighbor is deleted unmatched.
//! The graph is never mutated; deletions live in a [`LiveState`].

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Family, FamilyDescriptor};
use crate::graph::{maximum_matching, BipartiteGraph, Matching, Permutation};
use crate::online::SizeStats;
use crate::seed::{rng_from_seed, trial_seed, TrialRng};
use crate::stats::trial_stats_usize;

/// Alive masks and current online degrees during a priority run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiveState {
    alive_online: Vec<bool>,
    alive_offline: Vec<bool>,
    curdeg: Vec<usize>,
}

impl LiveState {
    pub fn new(g: &BipartiteGraph) -> Self {
        Self {
            alive_online: vec![true; g.n_online()],
            alive_offline: vec![true; g.n_offline()],
            curdeg: (0..g.n_online()).map(|u| g.degree(u)).collect(),
        }
    }

    pub fn is_online_alive(&self, u: usize) -> bool {
        self.alive_online[u]
    }

    pub fn is_offline_alive(&self, v: usize) -> bool {
        self.alive_offline[v]
    }

    /// Current degree of `u`; meaningful only while `u` is alive.
    pub fn curdeg(&self, u: usize) -> usize {
        self.curdeg[u]
    }

    pub fn alive_online(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alive_online.len()).filter(|&u| self.alive_online[u])
    }

    /// True if every alive online vertex's stored degree equals its number of
    /// alive neighbors.
    pub fn is_consistent(&self, g: &BipartiteGraph) -> bool {
        self.alive_online().all(|u| {
            let d = g
                .neighbors(u)
                .iter()
                .filter(|&&v| self.alive_offline[v as usize])
                .count();
            d == self.curdeg[u]
        })
    }
}

/// Alive online vertices bucketed by current degree.
struct DegreeBuckets {
    buckets: Vec<Vec<u32>>,
    pos: Vec<usize>,
    min: usize,
}

impl DegreeBuckets {
    fn new(curdeg: &[usize]) -> Self {
        let max = curdeg.iter().copied().max().unwrap_or(0);
        let mut buckets = vec![Vec::new(); max + 1];
        let mut pos = vec![0; curdeg.len()];
        for (u, &d) in curdeg.iter().enumerate() {
            pos[u] = buckets[d].len();
            buckets[d].push(u as u32);
        }
        Self { buckets, pos, min: 0 }
    }

    fn remove(&mut self, u: usize, d: usize) {
        let b = &mut self.buckets[d];
        let i = self.pos[u];
        b.swap_remove(i);
        if let Some(&moved) = b.get(i) {
            self.pos[moved as usize] = i;
        }
    }

    fn insert(&mut self, u: usize, d: usize) {
        self.pos[u] = self.buckets[d].len();
        self.buckets[d].push(u as u32);
        self.min = self.min.min(d);
    }

    /// The non-empty bucket of least degree.
    fn min_bucket(&mut self) -> Option<&[u32]> {
        while self.min < self.buckets.len() && self.buckets[self.min].is_empty() {
            self.min += 1;
        }
        self.buckets.get(self.min).map(|b| b.as_slice())
    }
}

/// How MinRanking picks among alive online vertices of minimum current degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnlineSelection {
    Random(u64),
    LowestIndex,
}

enum NeighborRule<'a> {
    Random,
    Rank(&'a Permutation),
}

fn run_priority(
    g: &BipartiteGraph,
    rule: NeighborRule<'_>,
    mut rng: Option<&mut TrialRng>,
    observer: &mut dyn FnMut(&LiveState),
) -> Matching {
    let mut state = LiveState::new(g);
    let mut buckets = DegreeBuckets::new(&state.curdeg);
    let mut m = Matching::new(g.n_online(), g.n_offline());
    let mut scratch: Vec<usize> = Vec::new();
    loop {
        observer(&state);
        let Some(bucket) = buckets.min_bucket() else { break };
        let u = match rng.as_deref_mut() {
            Some(r) => bucket[r.gen_range(0..bucket.len())],
            None => *bucket.iter().min().unwrap(),
        } as usize;
        let d = state.curdeg[u];
        buckets.remove(u, d);
        state.alive_online[u] = false;
        if d == 0 {
            continue;
        }
        scratch.clear();
        scratch.extend(
            g.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(|&v| state.alive_offline[v]),
        );
        let v = match rule {
            NeighborRule::Random => *scratch
                .choose(rng.as_deref_mut().expect("random neighbor needs a stream"))
                .unwrap(),
            NeighborRule::Rank(pi) => *scratch.iter().min_by_key(|&&v| pi.rank(v)).unwrap(),
        };
        m.add(u, v);
        state.alive_offline[v] = false;
        for &w in g.offline_neighbors(v) {
            let w = w as usize;
            if state.alive_online[w] {
                let dw = state.curdeg[w];
                buckets.remove(w, dw);
                state.curdeg[w] = dw - 1;
                buckets.insert(w, dw - 1);
            }
        }
    }
    m
}

/// MinGreedy: uniform min-degree online vertex, uniform alive neighbor.
pub fn run_min_greedy(g: &BipartiteGraph, seed: u64) -> Matching {
    let mut rng = rng_from_seed(seed);
    run_priority(g, NeighborRule::Random, Some(&mut rng), &mut |_| {})
}

/// MinRanking: draws the offline permutation first, then runs the
/// min-degree loop from the same stream.
pub fn run_min_ranking(g: &BipartiteGraph, seed: u64) -> Matching {
    let mut rng = rng_from_seed(seed);
    let pi = Permutation::random(g.n_offline(), &mut rng);
    run_priority(g, NeighborRule::Rank(&pi), Some(&mut rng), &mut |_| {})
}

/// MinRanking with a given permutation `pi` over V.
pub fn run_min_ranking_with(g: &BipartiteGraph, pi: &Permutation, selection: OnlineSelection) -> Matching {
    run_min_ranking_observed(g, pi, selection, |_| {})
}

/// As [`run_min_ranking_with`], calling `observer` before every selection and
/// once at the end.
pub fn run_min_ranking_observed(
    g: &BipartiteGraph,
    pi: &Permutation,
    selection: OnlineSelection,
    mut observer: impl FnMut(&LiveState),
) -> Matching {
    match selection {
        OnlineSelection::Random(seed) => {
            let mut rng = rng_from_seed(seed);
            run_priority(g, NeighborRule::Rank(pi), Some(&mut rng), &mut observer)
        }
        OnlineSelection::LowestIndex => run_priority(g, NeighborRule::Rank(pi), None, &mut observer),
    }
}

/// MinGreedy calling `observer` before every selection and once at the end.
pub fn run_min_greedy_observed(g: &BipartiteGraph, seed: u64, mut observer: impl FnMut(&LiveState)) -> Matching {
    let mut rng = rng_from_seed(seed);
    run_priority(g, NeighborRule::Random, Some(&mut rng), &mut observer)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorityAlgorithm {
    MinGreedy,
    MinRanking,
}

impl PriorityAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            PriorityAlgorithm::MinGreedy => "mingreedy",
            PriorityAlgorithm::MinRanking => "minranking",
        }
    }

    pub fn run(self, g: &BipartiteGraph, seed: u64) -> Matching {
        match self {
            PriorityAlgorithm::MinGreedy => run_min_greedy(g, seed),
            PriorityAlgorithm::MinRanking => run_min_ranking(g, seed),
        }
    }
}

/// Matching sizes of `trials` runs; trial `t` uses `trial_seed(seed, t)`.
pub fn priority_trials(g: &BipartiteGraph, alg: PriorityAlgorithm, trials: usize, seed: u64) -> Result<Vec<usize>> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| alg.run(g, trial_seed(seed, t)).size())
        .collect())
}

pub fn estimate_priority_ratio(
    g: &BipartiteGraph,
    alg: PriorityAlgorithm,
    trials: usize,
    seed: u64,
) -> Result<SizeStats> {
    let sizes = priority_trials(g, alg, trials, seed)?;
    Ok(SizeStats {
        sizes: trial_stats_usize(&sizes)?.with_seed(seed),
        opt: maximum_matching(g).size(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhsOutcome {
    pub matching: Matching,
    /// Matched edges whose offline end lies in `V_2`.
    pub v2_edges: usize,
}

/// RHSGreedy on `H(n,k)`: offline vertices arrive in `offline_order`, each
/// taking the lowest-index alive online neighbor.
pub fn run_rhs_greedy(g: &BipartiteGraph, desc: &FamilyDescriptor, offline_order: &Permutation) -> Result<RhsOutcome> {
    let Family::HGraph { n, k } = desc.family else {
        return Err(Error::NotHGraph);
    };
    if g.n_online() != n || g.n_offline() != n + k {
        return Err(Error::NotHGraph);
    }
    if offline_order.len() != n + k {
        return Err(Error::InvalidPermutation(format!(
            "offline order has length {}, expected {}",
            offline_order.len(),
            n + k
        )));
    }
    let mut m = Matching::new(n, n + k);
    let mut v2_edges = 0;
    for &v in offline_order.order() {
        let free = g
            .offline_neighbors(v)
            .iter()
            .map(|&u| u as usize)
            .find(|&u| !m.is_online_matched(u));
        if let Some(u) = free {
            m.add(u, v);
            if v >= k {
                v2_edges += 1;
            }
        }
    }
    Ok(RhsOutcome { matching: m, v2_edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{gen_besser_poloczek, gen_h_graph, gen_kvv_triangular};
    use crate::fuzz::random_bipartite;
    use crate::graph::verify_matching;

    fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
        // Heap's algorithm
        let mut a: Vec<usize> = (0..n).collect();
        let mut c = vec![0; n];
        f(&a);
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    a.swap(0, i);
                } else {
                    a.swap(c[i], i);
                }
                f(&a);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn heap_enumerates_all_orders() {
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(5, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn single_edge() {
        let g = BipartiteGraph::from_adjacency(1, vec![vec![0]]).unwrap();
        assert_eq!(run_min_greedy(&g, 0).size(), 1);
        assert_eq!(run_min_ranking(&g, 0).size(), 1);
    }

    #[test]
    fn kvv_is_perfect() {
        let (g, _) = gen_kvv_triangular(60).unwrap();
        for seed in 0..20 {
            assert_eq!(run_min_greedy(&g, seed).size(), 60);
            assert_eq!(run_min_ranking(&g, seed).size(), 60);
        }
    }

    #[test]
    fn biclique_is_perfect() {
        let n = 12;
        let g = BipartiteGraph::from_adjacency(n, vec![(0..n).collect(); n]).unwrap();
        for seed in 0..10 {
            assert_eq!(run_min_greedy(&g, seed).size(), n);
            assert_eq!(run_min_ranking(&g, seed).size(), n);
        }
    }

    #[test]
    fn isolated_vertices_are_skipped() {
        let g = BipartiteGraph::from_adjacency(2, vec![vec![], vec![1], vec![]]).unwrap();
        let m = run_min_greedy(&g, 4);
        assert_eq!(m.edges(), vec![(1, 1)]);
    }

    #[test]
    fn outputs_are_maximal_and_curdeg_stays_consistent() {
        let mut rng = rng_from_seed(31);
        for i in 0..60 {
            let g = random_bipartite(15, 12, 0.25, &mut rng);
            let check = |s: &LiveState| assert!(s.is_consistent(&g));
            let m = run_min_greedy_observed(&g, i, check);
            assert!(verify_matching(&g, &m) && m.is_maximal_in(&g));
            let pi = Permutation::random(g.n_offline(), &mut rng);
            let m = run_min_ranking_observed(&g, &pi, OnlineSelection::Random(i), check);
            assert!(verify_matching(&g, &m) && m.is_maximal_in(&g));
            let m = run_min_ranking_observed(&g, &pi, OnlineSelection::LowestIndex, check);
            assert!(verify_matching(&g, &m) && m.is_maximal_in(&g));
        }
    }

    #[test]
    fn min_degree_vertex_is_always_selected() {
        let mut rng = rng_from_seed(2);
        let g = random_bipartite(20, 20, 0.2, &mut rng);
        let pi = Permutation::identity(20);
        let mut prev: Option<LiveState> = None;
        run_min_ranking_observed(&g, &pi, OnlineSelection::Random(5), |s| {
            if let Some(p) = &prev {
                let picked: Vec<usize> = p.alive_online().filter(|&u| !s.is_online_alive(u)).collect();
                assert_eq!(picked.len(), 1);
                let min = p.alive_online().map(|u| p.curdeg(u)).min().unwrap();
                assert_eq!(p.curdeg(picked[0]), min);
            }
            prev = Some(s.clone());
        });
    }

    #[test]
    fn runs_replay_per_seed() {
        let (g, _) = gen_besser_poloczek(4).unwrap();
        assert_eq!(run_min_greedy(&g, 9), run_min_greedy(&g, 9));
        assert_eq!(run_min_ranking(&g, 9), run_min_ranking(&g, 9));
        assert_eq!(
            priority_trials(&g, PriorityAlgorithm::MinRanking, 16, 3).unwrap(),
            priority_trials(&g, PriorityAlgorithm::MinRanking, 16, 3).unwrap()
        );
        assert!(priority_trials(&g, PriorityAlgorithm::MinGreedy, 0, 3).is_err());
    }

    #[test]
    fn rhs_small_cases() {
        let (g, d) = gen_h_graph(1, 1).unwrap();
        // Offline index 0 is V_1, index 1 is V_2.
        let v2_first = Permutation::from_order(vec![1, 0]).unwrap();
        let v1_first = Permutation::from_order(vec![0, 1]).unwrap();
        assert_eq!(run_rhs_greedy(&g, &d, &v2_first).unwrap().v2_edges, 1);
        assert_eq!(run_rhs_greedy(&g, &d, &v1_first).unwrap().v2_edges, 0);

        let (g, d) = gen_h_graph(3, 0).unwrap();
        let out = run_rhs_greedy(&g, &d, &Permutation::reversed(3)).unwrap();
        assert_eq!(out.v2_edges, 3);
        assert_eq!(out.matching.size(), 3);
    }

    #[test]
    fn rhs_rejects_other_graphs() {
        let (g, d) = gen_kvv_triangular(3).unwrap();
        assert!(matches!(
            run_rhs_greedy(&g, &d, &Permutation::identity(3)),
            Err(Error::NotHGraph)
        ));
        let (h, hd) = gen_h_graph(3, 1).unwrap();
        assert!(matches!(run_rhs_greedy(&g, &hd, &Permutation::identity(3)), Err(Error::NotHGraph)));
        assert!(run_rhs_greedy(&h, &hd, &Permutation::identity(3)).is_err());
    }

    #[test]
    fn rhs_equals_min_ranking_exhaustively() {
        for total in 1..=7 {
            for k in 0..=total / 2 {
                let n = total - k;
                let (g, d) = gen_h_graph(n, k).unwrap();
                for_each_permutation(n + k, |order| {
                    let pi = Permutation::from_order(order.to_vec()).unwrap();
                    let rhs = run_rhs_greedy(&g, &d, &pi).unwrap().matching;
                    let mr = run_min_ranking_with(&g, &pi, OnlineSelection::LowestIndex);
                    assert_eq!(rhs.edges(), mr.edges(), "n={n} k={k} order={order:?}");
                });
            }
        }
    }

    #[test]
    fn alive_online_degrees_stay_equal_on_h_graphs() {
        let mut rng = rng_from_seed(12);
        for (n, k) in [(6, 3), (10, 10), (8, 0), (9, 4)] {
            let (g, _) = gen_h_graph(n, k).unwrap();
            for s in 0..10 {
                let pi = Permutation::random(n + k, &mut rng);
                run_min_ranking_observed(&g, &pi, OnlineSelection::Random(s), |st| {
                    let mut degs = st.alive_online().map(|u| st.curdeg(u));
                    if let Some(d0) = degs.next() {
                        assert!(degs.all(|d| d == d0));
                    }
                });
            }
        }
    }

    #[test]
    fn besser_poloczek_small_scale_ordering() {
        // MinRanking should do clearly better than MinGreedy on G_b.
        let (g, _) = gen_besser_poloczek(12).unwrap();
        let greedy = estimate_priority_ratio(&g, PriorityAlgorithm::MinGreedy, 200, 1).unwrap();
        let ranking = estimate_priority_ratio(&g, PriorityAlgorithm::MinRanking, 200, 1).unwrap();
        assert_eq!(greedy.opt, 2 * 144 + 24);
        assert!(ranking.ratio().mean > greedy.ratio().mean + 0.05);
    }
}
