//! Bipartite graphs, matchings, permutations and the exact maximum-matching
//! oracles every experiment is measured against.
//!
//! Vertices are 0-based indices per side: the online side `U` has
//! `n_online` vertices and the offline side `V` has `n_offline`. Adjacency
//! is stored in compressed form for both directions and never changes after
//! construction; algorithms that "delete" vertices keep their own alive masks.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable bipartite graph with sorted, duplicate-free neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_online: usize,
    n_offline: usize,
    online_offsets: Vec<usize>,
    online_targets: Vec<u32>,
    offline_offsets: Vec<usize>,
    offline_targets: Vec<u32>,
}

impl BipartiteGraph {
    /// Builds a graph from per-online-vertex neighbor lists. Lists are sorted
    /// and deduplicated; out-of-range neighbors are rejected.
    pub fn from_adjacency(n_offline: usize, adjacency: Vec<Vec<usize>>) -> Result<Self> {
        if n_offline > u32::MAX as usize || adjacency.len() > u32::MAX as usize {
            return Err(Error::InvalidGraph("side exceeds u32 range".into()));
        }
        let n_online = adjacency.len();
        let mut online_offsets = Vec::with_capacity(n_online + 1);
        let mut online_targets = Vec::new();
        let mut offline_degree = vec![0usize; n_offline];
        online_offsets.push(0);
        for (u, mut list) in adjacency.into_iter().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&bad) = list.iter().find(|&&v| v >= n_offline) {
                return Err(Error::InvalidGraph(format!(
                    "online vertex {u} has neighbor {bad} but n_offline = {n_offline}"
                )));
            }
            for v in list {
                offline_degree[v] += 1;
                online_targets.push(v as u32);
            }
            online_offsets.push(online_targets.len());
        }

        let mut offline_offsets = Vec::with_capacity(n_offline + 1);
        offline_offsets.push(0);
        for d in &offline_degree {
            offline_offsets.push(offline_offsets.last().unwrap() + d);
        }
        let mut fill = offline_offsets[..n_offline].to_vec();
        let mut offline_targets = vec![0u32; online_targets.len()];
        // Online vertices are visited in increasing order, so each offline list comes out sorted.
        for u in 0..n_online {
            for &v in &online_targets[online_offsets[u]..online_offsets[u + 1]] {
                offline_targets[fill[v as usize]] = u as u32;
                fill[v as usize] += 1;
            }
        }

        Ok(Self {
            n_online,
            n_offline,
            online_offsets,
            online_targets,
            offline_offsets,
            offline_targets,
        })
    }

    pub fn from_edges(
        n_online: usize,
        n_offline: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n_online];
        for (u, v) in edges {
            if u >= n_online {
                return Err(Error::InvalidGraph(format!(
                    "online vertex {u} out of range (n_online = {n_online})"
                )));
            }
            adjacency[u].push(v);
        }
        Self::from_adjacency(n_offline, adjacency)
    }

    pub fn empty(n_online: usize, n_offline: usize) -> Self {
        Self::from_adjacency(n_offline, vec![Vec::new(); n_online]).expect("empty graph is valid")
    }

    pub fn n_online(&self) -> usize {
        self.n_online
    }

    pub fn n_offline(&self) -> usize {
        self.n_offline
    }

    pub fn edge_count(&self) -> usize {
        self.online_targets.len()
    }

    /// Sorted offline neighbors of online vertex `u`.
    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.online_targets[self.online_offsets[u]..self.online_offsets[u + 1]]
    }

    /// Sorted online neighbors of offline vertex `v`.
    #[inline]
    pub fn offline_neighbors(&self, v: usize) -> &[u32] {
        &self.offline_targets[self.offline_offsets[v]..self.offline_offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.online_offsets[u + 1] - self.online_offsets[u]
    }

    #[inline]
    pub fn offline_degree(&self, v: usize) -> usize {
        self.offline_offsets[v + 1] - self.offline_offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_online && v < self.n_offline && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_online).flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v as usize)))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n_online)
            .map(|u| self.neighbors(u).iter().map(|&v| v as usize).collect())
            .collect()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n_online: self.n_online,
            n_offline: self.n_offline,
            adj: self.adjacency(),
        }
    }
}

/// Wire form of a graph: `{"n_online": .., "n_offline": .., "adj": [[..], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n_online: usize,
    pub n_offline: usize,
    pub adj: Vec<Vec<usize>>,
}

impl TryFrom<GraphJson> for BipartiteGraph {
    type Error = Error;

    fn try_from(json: GraphJson) -> Result<Self> {
        if json.adj.len() != json.n_online {
            return Err(Error::InvalidGraph(format!(
                "adj has {} rows but n_online = {}",
                json.adj.len(),
                json.n_online
            )));
        }
        BipartiteGraph::from_adjacency(json.n_offline, json.adj)
    }
}

/// A set of vertex-disjoint edges with partner lookup on both sides.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    partner_of_online: Vec<Option<usize>>,
    partner_of_offline: Vec<Option<usize>>,
    size: usize,
}

impl Matching {
    pub fn new(n_online: usize, n_offline: usize) -> Self {
        Self {
            partner_of_online: vec![None; n_online],
            partner_of_offline: vec![None; n_offline],
            size: 0,
        }
    }

    /// Builds a matching from explicit partner arrays, with no validation.
    /// Use [`verify_matching`] to check the result against a graph.
    pub fn from_partners(
        partner_of_online: Vec<Option<usize>>,
        partner_of_offline: Vec<Option<usize>>,
    ) -> Self {
        let size = partner_of_online.iter().flatten().count();
        Self {
            partner_of_online,
            partner_of_offline,
            size,
        }
    }

    /// Matches `u` with `v`. Panics if either endpoint is already matched.
    pub fn add(&mut self, u: usize, v: usize) {
        assert!(
            self.partner_of_online[u].is_none() && self.partner_of_offline[v].is_none(),
            "vertex already matched: ({u}, {v})"
        );
        self.partner_of_online[u] = Some(v);
        self.partner_of_offline[v] = Some(u);
        self.size += 1;
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn partner_of_online(&self, u: usize) -> Option<usize> {
        self.partner_of_online[u]
    }

    pub fn partner_of_offline(&self, v: usize) -> Option<usize> {
        self.partner_of_offline[v]
    }

    pub fn is_online_matched(&self, u: usize) -> bool {
        self.partner_of_online[u].is_some()
    }

    pub fn is_offline_matched(&self, v: usize) -> bool {
        self.partner_of_offline[v].is_some()
    }

    pub fn n_online(&self) -> usize {
        self.partner_of_online.len()
    }

    pub fn n_offline(&self) -> usize {
        self.partner_of_offline.len()
    }

    /// Matched pairs `(u, v)` in increasing `u`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.partner_of_online
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.map(|v| (u, v)))
            .collect()
    }

    /// True if no edge of `g` has both endpoints free.
    pub fn is_maximal_in(&self, g: &BipartiteGraph) -> bool {
        (0..g.n_online()).all(|u| {
            self.is_online_matched(u)
                || g.neighbors(u).iter().all(|&v| self.is_offline_matched(v as usize))
        })
    }
}

/// A bijection on `[0, n)` stored in both directions. `order[i]` is the
/// vertex at position `i`; `rank[v]` is the position of vertex `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidPermutation(format!("entry {v} out of range 0..{n}")));
            }
            if rank[v] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("entry {v} repeated")));
            }
            rank[v] = i;
        }
        Ok(Self { order, rank })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self::from_order(order).expect("shuffled identity is a permutation")
    }

    pub fn reversed(n: usize) -> Self {
        Self::from_order((0..n).rev().collect()).expect("reversal is a permutation")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    #[inline]
    pub fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    #[inline]
    pub fn at(&self, position: usize) -> usize {
        self.order[position]
    }
}

/// Maximum-cardinality matching by Hopcroft-Karp.
///
/// Deterministic for a fixed graph: BFS layers start from free online vertices
/// in index order and the DFS scans neighbor lists in sorted order.
pub fn maximum_matching(g: &BipartiteGraph) -> Matching {
    const INF: u32 = u32::MAX;
    let n = g.n_online();
    let mut mate_u: Vec<Option<usize>> = vec![None; n];
    let mut mate_v: Vec<Option<usize>> = vec![None; g.n_offline()];
    let mut dist = vec![INF; n];
    let mut queue = VecDeque::new();
    let mut cursor = vec![0usize; n];
    let mut stack: Vec<usize> = Vec::new();

    loop {
        queue.clear();
        for u in 0..n {
            if mate_u[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                match mate_v[v as usize] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }

        cursor.iter_mut().for_each(|c| *c = 0);
        for root in 0..n {
            if mate_u[root].is_some() {
                continue;
            }
            // Iterative layered DFS; `stack` holds the online vertices on the current path.
            stack.clear();
            stack.push(root);
            let mut augmented = false;
            while let Some(&u) = stack.last() {
                let nbrs = g.neighbors(u);
                if cursor[u] >= nbrs.len() {
                    dist[u] = INF;
                    stack.pop();
                    continue;
                }
                let v = nbrs[cursor[u]] as usize;
                cursor[u] += 1;
                match mate_v[v] {
                    None => {
                        // Flip the path: each stacked vertex takes the offline vertex it advanced through.
                        let mut free_v = v;
                        while let Some(x) = stack.pop() {
                            let prev = mate_u[x];
                            mate_u[x] = Some(free_v);
                            mate_v[free_v] = Some(x);
                            match prev {
                                Some(p) => free_v = p,
                                None => break,
                            }
                        }
                        augmented = true;
                        break;
                    }
                    Some(w) if dist[w] == dist[u] + 1 => stack.push(w),
                    Some(_) => {}
                }
            }
            if augmented {
                stack.clear();
            }
        }
    }

    Matching::from_partners(mate_u, mate_v)
}

/// Largest `n_online` accepted by [`brute_force_maximum_matching`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Exhaustive search over all matchings. Independent of [`maximum_matching`]
/// and used only to cross-check it on small graphs.
pub fn brute_force_maximum_matching(g: &BipartiteGraph) -> Result<Matching> {
    if g.n_online() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            what: "n_online",
            actual: g.n_online(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    struct Search<'a> {
        g: &'a BipartiteGraph,
        used: Vec<bool>,
        current: Vec<Option<usize>>,
        best: Vec<Option<usize>>,
        best_size: usize,
    }

    impl Search<'_> {
        fn go(&mut self, u: usize, size: usize) {
            let n = self.g.n_online();
            if size + (n - u) <= self.best_size {
                return;
            }
            if u == n {
                self.best_size = size;
                self.best.clone_from(&self.current);
                return;
            }
            for &v in self.g.neighbors(u) {
                let v = v as usize;
                if !self.used[v] {
                    self.used[v] = true;
                    self.current[u] = Some(v);
                    self.go(u + 1, size + 1);
                    self.current[u] = None;
                    self.used[v] = false;
                }
            }
            self.go(u + 1, size);
        }
    }

    let mut search = Search {
        g,
        used: vec![false; g.n_offline()],
        current: vec![None; g.n_online()],
        best: vec![None; g.n_online()],
        best_size: 0,
    };
    search.go(0, 0);

    let mut m = Matching::new(g.n_online(), g.n_offline());
    for (u, v) in search.best.iter().enumerate() {
        if let Some(v) = *v {
            m.add(u, v);
        }
    }
    Ok(m)
}

/// Checks every matching invariant of `m` against `g`.
pub fn verify_matching(g: &BipartiteGraph, m: &Matching) -> bool {
    if m.n_online() != g.n_online() || m.n_offline() != g.n_offline() {
        return false;
    }
    let mut count = 0;
    for u in 0..g.n_online() {
        if let Some(v) = m.partner_of_online(u) {
            if v >= g.n_offline() || m.partner_of_offline(v) != Some(u) || !g.has_edge(u, v) {
                return false;
            }
            count += 1;
        }
    }
    let offline_count = (0..g.n_offline())
        .filter(|&v| match m.partner_of_offline(v) {
            Some(u) => u < g.n_online() && m.partner_of_online(u) == Some(v),
            None => true,
        })
        .count();
    if offline_count != g.n_offline() {
        return false;
    }
    let matched_offline = (0..g.n_offline()).filter(|&v| m.is_offline_matched(v)).count();
    count == m.size() && matched_offline == count
}
