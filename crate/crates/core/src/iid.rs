//! Known-IID model: type graphs, instance sampling, greedy arrival rules
//! (including MinDegree) and the consistency checker.
//!
//! An instance draws `|U|` arrivals independently and uniformly from the types
//! of a [`TypeGraph`]. Instances are never materialized for the algorithms:
//! each arrival is resolved against the type graph with an active-offline
//! mask. Arrival `t` of the instance is online vertex `t` of the resulting
//! [`Matching`].
//!
//! MinDegree ranks offline vertices by their *static* degree in the type
//! graph, fixed before any arrival. It does not look at degrees in the
//! residual instance.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{maximum_matching, BipartiteGraph, Matching};
use crate::online::{Chooser, TieBreak};
use crate::seed::{rng_from_seed, trial_seed};
use crate::stats::{trial_stats_usize, TrialStats};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeGraph {
    base: BipartiteGraph,
    static_degree: Vec<usize>,
}

impl TypeGraph {
    pub fn new(base: BipartiteGraph) -> Self {
        let static_degree = (0..base.n_offline()).map(|v| base.offline_degree(v)).collect();
        Self { base, static_degree }
    }

    pub fn base(&self) -> &BipartiteGraph {
        &self.base
    }

    pub fn into_base(self) -> BipartiteGraph {
        self.base
    }

    /// Degree of offline vertex `v` in the type graph.
    pub fn static_degree(&self, v: usize) -> usize {
        self.static_degree[v]
    }

    pub fn n_types(&self) -> usize {
        self.base.n_online()
    }
}

/// Arrival types of one instance, in arrival order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSample {
    draws: Vec<usize>,
}

impl InstanceSample {
    pub fn new(draws: Vec<usize>) -> Self {
        Self { draws }
    }

    pub fn draws(&self) -> &[usize] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// The instance graph: row `t` is the neighborhood of the `t`-th draw.
    pub fn materialize(&self, tg: &TypeGraph) -> BipartiteGraph {
        let adj = self
            .draws
            .iter()
            .map(|&t| tg.base.neighbors(t).iter().map(|&v| v as usize).collect())
            .collect();
        BipartiteGraph::from_adjacency(tg.base.n_offline(), adj).expect("type graph rows are valid")
    }
}

/// `|U|` uniform draws with replacement.
pub fn sample_instance(tg: &TypeGraph, seed: u64) -> Result<InstanceSample> {
    let n = tg.n_types();
    if n == 0 {
        return Err(Error::Parameter("type graph has no online types".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok(InstanceSample::new((0..n).map(|_| rng.gen_range(0..n)).collect()))
}

/// A greedy decision rule: given the arriving type and its available (active)
/// neighbors, pick one of them.
pub trait ArrivalRule {
    /// `available` is sorted ascending and non-empty; `step` is the arrival position.
    fn choose(&mut self, tg: &TypeGraph, arrival_type: usize, available: &[usize], step: usize) -> usize;
}

/// Greedy with a plain tie rule over all available neighbors.
pub struct GreedyRule<'a> {
    chooser: Chooser<'a>,
}

impl<'a> GreedyRule<'a> {
    pub fn new(tie: &'a TieBreak) -> Self {
        Self {
            chooser: Chooser::new(tie),
        }
    }
}

impl ArrivalRule for GreedyRule<'_> {
    fn choose(&mut self, _: &TypeGraph, _: usize, available: &[usize], _: usize) -> usize {
        self.chooser.pick(available)
    }
}

/// MinDegree: restrict to available neighbors of minimum static degree, then
/// break the remaining ties with the given rule.
pub struct MinDegreeRule<'a> {
    chooser: Chooser<'a>,
    scratch: Vec<usize>,
}

impl<'a> MinDegreeRule<'a> {
    pub fn new(tie: &'a TieBreak) -> Self {
        Self {
            chooser: Chooser::new(tie),
            scratch: Vec::new(),
        }
    }
}

impl ArrivalRule for MinDegreeRule<'_> {
    fn choose(&mut self, tg: &TypeGraph, _: usize, available: &[usize], _: usize) -> usize {
        let d = available.iter().map(|&v| tg.static_degree(v)).min().unwrap();
        self.scratch.clear();
        self.scratch
            .extend(available.iter().copied().filter(|&v| tg.static_degree(v) == d));
        self.chooser.pick(&self.scratch)
    }
}

/// A deliberately inconsistent control: on odd steps it takes the second
/// available neighbor, otherwise the first.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepParityRule;

impl ArrivalRule for StepParityRule {
    fn choose(&mut self, _: &TypeGraph, _: usize, available: &[usize], step: usize) -> usize {
        if step % 2 == 1 && available.len() > 1 {
            available[1]
        } else {
            available[0]
        }
    }
}

/// Runs any greedy arrival rule over an instance.
pub fn run_rule<R: ArrivalRule + ?Sized>(tg: &TypeGraph, inst: &InstanceSample, rule: &mut R) -> Matching {
    let mut m = Matching::new(inst.len(), tg.base.n_offline());
    let mut available = Vec::new();
    for (step, &t) in inst.draws().iter().enumerate() {
        available.clear();
        available.extend(
            tg.base
                .neighbors(t)
                .iter()
                .map(|&v| v as usize)
                .filter(|&v| !m.is_offline_matched(v)),
        );
        if !available.is_empty() {
            let v = rule.choose(tg, t, &available, step);
            debug_assert!(available.binary_search(&v).is_ok());
            m.add(step, v);
        }
    }
    m
}

/// MinDegree with static type-graph degrees; `tie` resolves equal degrees.
pub fn run_min_degree(tg: &TypeGraph, inst: &InstanceSample, tie: &TieBreak) -> Matching {
    run_rule(tg, inst, &mut MinDegreeRule::new(tie))
}

/// Plain greedy; with [`TieBreak::MaxIndex`] on the Goel-Mehta family this is
/// the adversarial "largest block first" criterion.
pub fn run_greedy_iid(tg: &TypeGraph, inst: &InstanceSample, tie: &TieBreak) -> Matching {
    run_rule(tg, inst, &mut GreedyRule::new(tie))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum IidAlgorithm {
    MinDegree { tie: IidTie },
    Greedy { tie: IidTie },
}

/// Tie rules usable across trials. `Random` re-derives its stream per trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IidTie {
    LowestIndex,
    MaxIndex,
    Random { seed: u64 },
}

impl IidTie {
    pub fn for_trial(self, trial: u64) -> TieBreak {
        match self {
            IidTie::LowestIndex => TieBreak::LowestIndex,
            IidTie::MaxIndex => TieBreak::MaxIndex,
            IidTie::Random { seed } => TieBreak::Random(trial_seed(seed, trial)),
        }
    }
}

impl IidAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            IidAlgorithm::MinDegree { .. } => "mindegree",
            IidAlgorithm::Greedy { .. } => "greedy-iid",
        }
    }

    pub fn run(&self, tg: &TypeGraph, inst: &InstanceSample, trial: u64) -> Matching {
        match *self {
            IidAlgorithm::MinDegree { tie } => run_min_degree(tg, inst, &tie.for_trial(trial)),
            IidAlgorithm::Greedy { tie } => run_greedy_iid(tg, inst, &tie.for_trial(trial)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IidTrial {
    pub alg_size: usize,
    pub opt_size: usize,
}

/// Per-trial algorithm and optimum sizes. Trial `t` samples its instance with
/// seed `trial_seed(seed, t)`; the optimum is taken on the same instance.
pub fn iid_trials(tg: &TypeGraph, alg: &IidAlgorithm, trials: usize, seed: u64) -> Result<Vec<IidTrial>> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let inst = sample_instance(tg, trial_seed(seed, t))?;
            let alg_size = alg.run(tg, &inst, t).size();
            let opt_size = maximum_matching(&inst.materialize(tg)).size();
            Ok(IidTrial { alg_size, opt_size })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IidEstimate {
    pub alg: TrialStats,
    pub opt: TrialStats,
    /// `E[ALG] / E[OPT]` estimated by the ratio of trial means.
    pub ratio: f64,
    pub seed: u64,
}

/// Distributional approximation ratio `E[ALG] / E[OPT]`.
pub fn estimate_iid_ratio(tg: &TypeGraph, alg: &IidAlgorithm, trials: usize, seed: u64) -> Result<IidEstimate> {
    summarize_iid(&iid_trials(tg, alg, trials, seed)?, seed)
}

pub fn summarize_iid(trials: &[IidTrial], seed: u64) -> Result<IidEstimate> {
    let alg_sizes: Vec<usize> = trials.iter().map(|t| t.alg_size).collect();
    let opt_sizes: Vec<usize> = trials.iter().map(|t| t.opt_size).collect();
    let alg = trial_stats_usize(&alg_sizes)?.with_seed(seed);
    let opt = trial_stats_usize(&opt_sizes)?.with_seed(seed);
    let ratio = if opt.mean == 0.0 { 1.0 } else { alg.mean / opt.mean };
    Ok(IidEstimate { alg, opt, ratio, seed })
}

/// Exhaustive enumeration is `|U|^|U|` sequences; this caps `|U|`.
pub const CONSISTENCY_MAX_TYPES: usize = 6;
const CONSISTENCY_MAX_OFFLINE: usize = 64;
const MAX_REPORTED_VIOLATIONS: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub arrival_type: usize,
    /// Available neighbors in the run where the larger set was seen.
    pub wide: Vec<usize>,
    pub wide_choice: usize,
    /// A subset of `wide` that still contains `wide_choice`.
    pub narrow: Vec<usize>,
    pub narrow_choice: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub sequences: usize,
    pub decisions: usize,
    pub violation_count: usize,
    /// The first few violations found.
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violation_count == 0
    }
}

fn mask_to_vec(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Enumerates every arrival sequence of length `|U|` over the types of `tg`
/// and checks the consistency condition on all recorded decisions.
///
/// A decision is `(type, available set A, choice c)`. An arriving vertex is
/// identified by its type, so the condition is checked across every pair of
/// decisions `(t, A, c)` and `(t, A', c')` from any two runs: whenever
/// `A' ⊆ A` and `c ∈ A'`, it requires `c' = c`. Runs use `rule` in sequence,
/// so stateful rules see all sequences back to back.
pub fn check_consistency<R: ArrivalRule + ?Sized>(
    rule: &mut R,
    tg: &TypeGraph,
    max_size: usize,
) -> Result<ConsistencyReport> {
    let types = tg.n_types();
    let limit = max_size.min(CONSISTENCY_MAX_TYPES);
    if types > limit {
        return Err(Error::SizeGuard {
            what: "n_online",
            actual: types,
            limit,
        });
    }
    let n_off = tg.base.n_offline();
    if n_off > CONSISTENCY_MAX_OFFLINE {
        return Err(Error::SizeGuard {
            what: "n_offline",
            actual: n_off,
            limit: CONSISTENCY_MAX_OFFLINE,
        });
    }

    // choices[t][A] holds the set of offline vertices chosen by type t facing A.
    let mut choices: Vec<std::collections::HashMap<u64, u64>> = vec![Default::default(); types];
    let mut report = ConsistencyReport::default();
    let mut seq = vec![0usize; types];
    loop {
        let inst = InstanceSample::new(seq.clone());
        let mut taken = 0u64;
        for (step, &t) in seq.iter().enumerate() {
            let available: Vec<usize> = tg
                .base
                .neighbors(t)
                .iter()
                .map(|&v| v as usize)
                .filter(|&v| taken >> v & 1 == 0)
                .collect();
            if available.is_empty() {
                continue;
            }
            let v = rule.choose(tg, t, &available, step);
            let mask = available.iter().fold(0u64, |m, &x| m | 1 << x);
            *choices[t].entry(mask).or_default() |= 1 << v;
            taken |= 1 << v;
            report.decisions += 1;
        }
        drop(inst);
        report.sequences += 1;

        // Odometer over |U|^|U| sequences.
        let mut i = 0;
        while i < types {
            seq[i] += 1;
            if seq[i] < types {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
        if i == types {
            break;
        }
    }

    for (t, by_set) in choices.iter().enumerate() {
        let mut keys: Vec<(&u64, &u64)> = by_set.iter().collect();
        keys.sort();
        for &(&wide, &wide_choices) in &keys {
            for &(&narrow, &narrow_choices) in &keys {
                if narrow & !wide != 0 {
                    continue;
                }
                for c in mask_to_vec(wide_choices) {
                    if narrow >> c & 1 == 0 {
                        continue;
                    }
                    for c2 in mask_to_vec(narrow_choices & !(1 << c)) {
                        report.violation_count += 1;
                        if report.violations.len() < MAX_REPORTED_VIOLATIONS {
                            report.violations.push(Violation {
                                arrival_type: t,
                                wide: mask_to_vec(wide),
                                wide_choice: c,
                                narrow: mask_to_vec(narrow),
                                narrow_choice: c2,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}
