//! One-pass online algorithms (greedy, Ranking) and k-pass Category-Advice.
//!
//! Online vertices arrive in the order given by an arrival [`Permutation`]
//! over `U`; each arrival is matched irrevocably on arrival. Every algorithm
//! here is greedy, so its output is a maximal matching.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{maximum_matching, BipartiteGraph, Matching, Permutation};
use crate::seed::{rng_from_seed, trial_rng};
use crate::stats::{trial_stats_usize, TrialStats};

/// How a greedy algorithm picks among several free neighbors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieBreak {
    LowestIndex,
    /// Highest offline index. Generators lay blocks out in increasing block
    /// number, so on generated families this is the max-block rule.
    MaxIndex,
    /// Best (smallest) rank under a permutation of `V`.
    OfflineRank(Permutation),
    /// Uniformly random free neighbor, driven by the given seed.
    Random(u64),
}

impl TieBreak {
    pub fn name(&self) -> &'static str {
        match self {
            TieBreak::LowestIndex => "lowest-index",
            TieBreak::MaxIndex => "max-index",
            TieBreak::OfflineRank(_) => "offline-rank",
            TieBreak::Random(_) => "random",
        }
    }
}

/// Stateful chooser built from a [`TieBreak`]; owns the RNG for the random rule.
pub(crate) enum Chooser<'a> {
    Lowest,
    Max,
    Rank(&'a Permutation),
    Random(Box<crate::seed::TrialRng>),
}

impl<'a> Chooser<'a> {
    pub(crate) fn new(tie: &'a TieBreak) -> Self {
        match tie {
            TieBreak::LowestIndex => Chooser::Lowest,
            TieBreak::MaxIndex => Chooser::Max,
            TieBreak::OfflineRank(p) => Chooser::Rank(p),
            TieBreak::Random(seed) => Chooser::Random(Box::new(rng_from_seed(*seed))),
        }
    }

    /// Picks one of `candidates` (sorted ascending, non-empty).
    pub(crate) fn pick(&mut self, candidates: &[usize]) -> usize {
        match self {
            Chooser::Lowest => candidates[0],
            Chooser::Max => *candidates.last().unwrap(),
            Chooser::Rank(p) => *candidates.iter().min_by_key(|&&v| p.rank(v)).unwrap(),
            Chooser::Random(rng) => *candidates.choose(rng.as_mut()).unwrap(),
        }
    }
}

/// Greedy online matching: each arriving `u` takes a free neighbor, chosen by
/// `tie`, whenever one exists.
pub fn run_greedy(g: &BipartiteGraph, arrival: &Permutation, tie: &TieBreak) -> Matching {
    assert_eq!(arrival.len(), g.n_online(), "arrival order must cover U");
    let mut chooser = Chooser::new(tie);
    let mut m = Matching::new(g.n_online(), g.n_offline());
    let mut free = Vec::new();
    for &u in arrival.order() {
        free.clear();
        free.extend(
            g.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(|&v| !m.is_offline_matched(v)),
        );
        if !free.is_empty() {
            m.add(u, chooser.pick(&free));
        }
    }
    m
}

/// Deterministic Ranking pass: each arrival takes its free neighbor of
/// smallest `sigma` rank.
pub fn run_ranking(g: &BipartiteGraph, arrival: &Permutation, sigma: &Permutation) -> Matching {
    assert_eq!(arrival.len(), g.n_online(), "arrival order must cover U");
    assert_eq!(sigma.len(), g.n_offline(), "sigma must cover V");
    let mut m = Matching::new(g.n_online(), g.n_offline());
    for &u in arrival.order() {
        let best = g
            .neighbors(u)
            .iter()
            .map(|&v| v as usize)
            .filter(|&v| !m.is_offline_matched(v))
            .min_by_key(|&v| sigma.rank(v));
        if let Some(v) = best {
            m.add(u, v);
        }
    }
    m
}

/// Matching sizes over repeated trials, with the fixed optimum they are compared to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub sizes: TrialStats,
    pub opt: usize,
}

impl SizeStats {
    /// Per-trial `size / opt`; an empty optimum counts as ratio 1.
    pub fn ratio(&self) -> TrialStats {
        if self.opt == 0 {
            return self.sizes.scaled(0.0).shifted(1.0);
        }
        self.sizes.scaled(1.0 / self.opt as f64)
    }
}

/// Sizes of Ranking under `trials` independent uniform `sigma`; trial `t` is
/// seeded with `trial_seed(seed, t)`.
pub fn ranking_trials(g: &BipartiteGraph, arrival: &Permutation, seed: u64, trials: usize) -> Result<Vec<usize>> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let sigma = Permutation::random(g.n_offline(), &mut rng);
            run_ranking(g, arrival, &sigma).size()
        })
        .collect())
}

/// Randomized Ranking statistics over [`ranking_trials`].
pub fn run_ranking_random(
    g: &BipartiteGraph,
    arrival: &Permutation,
    seed: u64,
    trials: usize,
) -> Result<SizeStats> {
    let sizes = ranking_trials(g, arrival, seed, trials)?;
    Ok(SizeStats {
        sizes: trial_stats_usize(&sizes)?.with_seed(seed),
        opt: maximum_matching(g).size(),
    })
}

/// Category per offline vertex, with [`CategoryFunction::NEG_INFINITY`] as −∞.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CategoryFunction {
    values: Vec<i64>,
}

impl CategoryFunction {
    /// Sentinel for −∞; compares below every finite category.
    pub const NEG_INFINITY: i64 = i64::MIN;

    pub fn new(values: Vec<i64>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, value: i64) -> Self {
        Self::new(vec![value; n])
    }

    pub fn neg_infinity(n: usize) -> Self {
        Self::constant(n, Self::NEG_INFINITY)
    }

    pub fn get(&self, v: usize) -> i64 {
        self.values[v]
    }

    pub fn set(&mut self, v: usize, value: i64) {
        self.values[v] = value;
    }

    pub fn is_neg_infinity(&self, v: usize) -> bool {
        self.values[v] == Self::NEG_INFINITY
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `sigma_c`: orders `V` by category first, then by `sigma` within a category.
pub fn refine_sigma(sigma: &Permutation, c: &CategoryFunction) -> Permutation {
    assert_eq!(sigma.len(), c.len(), "category function must cover V");
    let mut order = sigma.order().to_vec();
    // Stable: equal categories keep their sigma order.
    order.sort_by_key(|&v| c.get(v));
    Permutation::from_order(order).expect("reordering a permutation")
}

#[derive(Clone, Debug)]
pub struct CategoryAdviceRun {
    /// Matching of the final pass.
    pub matching: Matching,
    /// `|M_1|, ..., |M_k|`.
    pub pass_sizes: Vec<usize>,
    /// Categories after the final pass: `-i` for the first pass `i` matching `v`.
    pub categories: CategoryFunction,
}

/// k-pass Category-Advice.
///
/// Starts from the identity `sigma` and an all-−∞ category function. Pass `i`
/// runs Ranking under `sigma_c` with the same arrival order; afterwards every
/// still-−∞ vertex matched in that pass gets category `-i`, so the next pass
/// prefers never-matched vertices, then those first matched most recently.
pub fn run_category_advice(
    g: &BipartiteGraph,
    arrival: &Permutation,
    passes: usize,
) -> Result<CategoryAdviceRun> {
    if passes == 0 {
        return Err(Error::Parameter("category advice needs at least one pass".into()));
    }
    let sigma = Permutation::identity(g.n_offline());
    let mut categories = CategoryFunction::neg_infinity(g.n_offline());
    let mut pass_sizes = Vec::with_capacity(passes);
    let mut matching = Matching::new(g.n_online(), g.n_offline());
    for i in 1..=passes {
        let sigma_c = refine_sigma(&sigma, &categories);
        matching = run_ranking(g, arrival, &sigma_c);
        for v in 0..g.n_offline() {
            if categories.is_neg_infinity(v) && matching.is_offline_matched(v) {
                categories.set(v, -(i as i64));
            }
        }
        pass_sizes.push(matching.size());
    }
    Ok(CategoryAdviceRun {
        matching,
        pass_sizes,
        categories,
    })
}
