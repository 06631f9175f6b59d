//! Experiment specs, result rows and the bundled reproductions.
//!
//! CSV output always starts with [`CSV_HEADER`]. In summary mode there is one
//! row whose `trial` column reads `mean`; JSON output additionally carries the
//! full statistics and a ratio confidence interval.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{expected_y_exact, ode_root, simulate_chain, simulate_rhs_empirical};
use crate::error::{Error, Result};
use crate::families::{
    fibonacci, gen_besser_poloczek, gen_fibonacci_family, gen_goel_mehta, gen_kvv_triangular, gen_min_degree_hard,
    overflow_trials, Family,
};
use crate::graph::{maximum_matching, Permutation};
use crate::iid::{iid_trials, IidAlgorithm, IidTie, TypeGraph};
use crate::online::{ranking_trials, run_category_advice, run_greedy, TieBreak};
use crate::priority::{priority_trials, run_min_greedy, run_rhs_greedy, PriorityAlgorithm};
use crate::seed::{trial_rng, trial_seed};
use crate::stats::{trial_stats, trial_stats_usize, TrialStats, Z_95};

pub const CSV_HEADER: &str = "family,params,algorithm,seed,trial,alg_size,opt_size,ratio";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    LowestIndex,
    MaxIndex,
    /// Seeded from the experiment seed, re-derived per trial.
    Random,
}

impl TieRule {
    pub fn name(self) -> &'static str {
        match self {
            TieRule::LowestIndex => "lowest-index",
            TieRule::MaxIndex => "max-index",
            TieRule::Random => "random",
        }
    }

    fn iid(self, seed: u64) -> IidTie {
        match self {
            TieRule::LowestIndex => IidTie::LowestIndex,
            TieRule::MaxIndex => IidTie::MaxIndex,
            TieRule::Random => IidTie::Random { seed },
        }
    }
}

impl FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest-index" | "lowest" => Ok(TieRule::LowestIndex),
            "max-index" | "max" | "max-block-index" => Ok(TieRule::MaxIndex),
            "random" => Ok(TieRule::Random),
            other => Err(Error::Parameter(format!("unknown tie rule {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum AlgorithmSpec {
    /// Online greedy over the family's canonical arrival order.
    Greedy { tie: TieRule },
    /// Ranking with a fresh uniform `sigma` per trial.
    Ranking,
    CategoryAdvice { k: usize },
    #[serde(rename = "mingreedy")]
    MinGreedy,
    #[serde(rename = "minranking")]
    MinRanking,
    /// Needs an `hgraph` family; a fresh uniform offline order per trial.
    RhsGreedy,
    #[serde(rename = "mindegree")]
    MinDegree { tie: TieRule },
    GreedyIid { tie: TieRule },
}

impl AlgorithmSpec {
    pub fn needs_type_graph(&self) -> bool {
        matches!(self, AlgorithmSpec::MinDegree { .. } | AlgorithmSpec::GreedyIid { .. })
    }

    /// Deterministic algorithms emit a single row whatever the trial count.
    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            AlgorithmSpec::CategoryAdvice { .. }
                | AlgorithmSpec::Greedy {
                    tie: TieRule::LowestIndex | TieRule::MaxIndex
                }
        )
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::Greedy { tie } => write!(f, "greedy:tie={}", tie.name()),
            AlgorithmSpec::Ranking => write!(f, "ranking"),
            AlgorithmSpec::CategoryAdvice { k } => write!(f, "category-advice:k={k}"),
            AlgorithmSpec::MinGreedy => write!(f, "mingreedy"),
            AlgorithmSpec::MinRanking => write!(f, "minranking"),
            AlgorithmSpec::RhsGreedy => write!(f, "rhs-greedy"),
            AlgorithmSpec::MinDegree { tie } => write!(f, "mindegree:tie={}", tie.name()),
            AlgorithmSpec::GreedyIid { tie } => write!(f, "greedy-iid:tie={}", tie.name()),
        }
    }
}

/// Parses `name` or `name:key=value`, e.g. `category-advice:k=4` or
/// `mindegree:tie=max-index`. Tie rules default to `lowest-index`.
impl FromStr for AlgorithmSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut tie = TieRule::LowestIndex;
        let mut k = None;
        for pair in rest.split([',', ';']).filter(|p| !p.is_empty()) {
            match pair.split_once('=') {
                Some(("tie", v)) => tie = v.parse()?,
                Some(("k", v)) => {
                    k = Some(v.parse().map_err(|_| Error::Parameter(format!("bad pass count {v:?}")))?)
                }
                _ => return Err(Error::Parameter(format!("unknown algorithm option {pair:?}"))),
            }
        }
        let spec = match name {
            "greedy" => AlgorithmSpec::Greedy { tie },
            "ranking" => AlgorithmSpec::Ranking,
            "category-advice" => AlgorithmSpec::CategoryAdvice {
                k: k.ok_or_else(|| Error::Parameter("category-advice needs k".into()))?,
            },
            "mingreedy" => AlgorithmSpec::MinGreedy,
            "minranking" => AlgorithmSpec::MinRanking,
            "rhs-greedy" => AlgorithmSpec::RhsGreedy,
            "mindegree" => AlgorithmSpec::MinDegree { tie },
            "greedy-iid" => AlgorithmSpec::GreedyIid { tie },
            other => return Err(Error::Parameter(format!("unknown algorithm {other:?}"))),
        };
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parameter(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub family: Family,
    pub algorithm: AlgorithmSpec,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub format: OutputFormat,
    /// One row per trial instead of a summary row.
    #[serde(default)]
    pub per_trial: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.algorithm.needs_type_graph() && !self.family.is_type_graph() {
            return Err(Error::Parameter(format!(
                "{} runs on type graphs; {} is not one",
                self.algorithm,
                self.family.name()
            )));
        }
        if self.algorithm == AlgorithmSpec::RhsGreedy && !matches!(self.family, Family::HGraph { .. }) {
            return Err(Error::NotHGraph);
        }
        if let AlgorithmSpec::CategoryAdvice { k: 0 } = self.algorithm {
            return Err(Error::Parameter("category-advice needs k >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrialLabel {
    Index(usize),
    Name(String),
}

impl fmt::Display for TrialLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialLabel::Index(i) => write!(f, "{i}"),
            TrialLabel::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub family: String,
    pub params: String,
    pub algorithm: String,
    pub seed: u64,
    pub trial: TrialLabel,
    pub alg_size: f64,
    pub opt_size: f64,
    pub ratio: f64,
}

impl Row {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.family, self.params, self.algorithm, self.seed, self.trial, self.alg_size, self.opt_size, self.ratio
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub alg: TrialStats,
    pub opt: TrialStats,
    /// `mean(alg) / mean(opt)`.
    pub ratio: f64,
    /// Delta-method 95% interval for the ratio of means.
    pub ratio_ci_low: f64,
    pub ratio_ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub experiment: ExperimentSpec,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render(&self) -> Result<String> {
        match self.experiment.format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn ratio(alg: f64, opt: f64) -> f64 {
    if opt == 0.0 {
        1.0
    } else {
        alg / opt
    }
}

fn summarize(pairs: &[(usize, usize)], seed: u64) -> Result<Summary> {
    let alg_sizes: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let opt_sizes: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let alg = trial_stats_usize(&alg_sizes)?.with_seed(seed);
    let opt = trial_stats_usize(&opt_sizes)?.with_seed(seed);
    let r = ratio(alg.mean, opt.mean);
    let n = pairs.len() as f64;
    let (lo, hi) = if opt.mean == 0.0 || pairs.len() < 2 {
        (r, r)
    } else {
        let cov = pairs
            .iter()
            .map(|&(a, o)| (a as f64 - alg.mean) * (o as f64 - opt.mean))
            .sum::<f64>()
            / (n - 1.0);
        let var = (alg.variance - 2.0 * r * cov + r * r * opt.variance).max(0.0) / (opt.mean * opt.mean * n);
        let half = Z_95 * var.sqrt();
        (r - half, r + half)
    };
    Ok(Summary {
        alg,
        opt,
        ratio: r,
        ratio_ci_low: lo,
        ratio_ci_high: hi,
    })
}

/// `(alg_size, opt_size)` per trial, in trial order.
fn trial_pairs(spec: &ExperimentSpec) -> Result<Vec<(usize, usize)>> {
    let (g, desc) = spec.family.generate()?;
    let trials = if spec.algorithm.is_deterministic() { 1 } else { spec.trials };
    let seed = spec.seed;

    if spec.algorithm.needs_type_graph() {
        let tg = TypeGraph::new(g);
        let alg = match spec.algorithm {
            AlgorithmSpec::MinDegree { tie } => IidAlgorithm::MinDegree { tie: tie.iid(seed) },
            AlgorithmSpec::GreedyIid { tie } => IidAlgorithm::Greedy { tie: tie.iid(seed) },
            _ => unreachable!(),
        };
        return Ok(iid_trials(&tg, &alg, trials, seed)?
            .into_iter()
            .map(|t| (t.alg_size, t.opt_size))
            .collect());
    }

    let opt = maximum_matching(&g).size();
    let arrival = Permutation::from_order(desc.arrival_order.clone())?;
    let sizes: Vec<usize> = match spec.algorithm {
        AlgorithmSpec::Greedy { tie } => match tie {
            TieRule::LowestIndex => vec![run_greedy(&g, &arrival, &TieBreak::LowestIndex).size()],
            TieRule::MaxIndex => vec![run_greedy(&g, &arrival, &TieBreak::MaxIndex).size()],
            TieRule::Random => (0..trials as u64)
                .into_par_iter()
                .map(|t| run_greedy(&g, &arrival, &TieBreak::Random(trial_seed(seed, t))).size())
                .collect(),
        },
        AlgorithmSpec::Ranking => ranking_trials(&g, &arrival, seed, trials)?,
        AlgorithmSpec::CategoryAdvice { k } => vec![run_category_advice(&g, &arrival, k)?.matching.size()],
        AlgorithmSpec::MinGreedy => priority_trials(&g, PriorityAlgorithm::MinGreedy, trials, seed)?,
        AlgorithmSpec::MinRanking => priority_trials(&g, PriorityAlgorithm::MinRanking, trials, seed)?,
        AlgorithmSpec::RhsGreedy => (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let order = Permutation::random(g.n_offline(), &mut trial_rng(seed, t));
                Ok(run_rhs_greedy(&g, &desc, &order)?.matching.size())
            })
            .collect::<Result<_>>()?,
        AlgorithmSpec::MinDegree { .. } | AlgorithmSpec::GreedyIid { .. } => unreachable!(),
    };
    Ok(sizes.into_iter().map(|s| (s, opt)).collect())
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let pairs = trial_pairs(spec)?;
    let summary = summarize(&pairs, spec.seed)?;
    let row = |trial: TrialLabel, alg: f64, opt: f64| Row {
        family: spec.family.name().to_string(),
        params: spec.family.params(),
        algorithm: spec.algorithm.to_string(),
        seed: spec.seed,
        trial,
        alg_size: alg,
        opt_size: opt,
        ratio: ratio(alg, opt),
    };
    let rows = if spec.per_trial || pairs.len() == 1 {
        pairs
            .iter()
            .enumerate()
            .map(|(t, &(a, o))| row(TrialLabel::Index(t), a as f64, o as f64))
            .collect()
    } else {
        vec![row(TrialLabel::Name("mean".into()), summary.alg.mean, summary.opt.mean)]
    };
    Ok(Report {
        schema: SCHEMA_VERSION,
        experiment: spec.clone(),
        rows,
        summary,
    })
}

pub const REPRODUCTIONS: [&str; 7] = [
    "fibonacci-ratios",
    "ranking-kvv",
    "mingreedy-bp",
    "minranking-bp",
    "mindegree-iid",
    "greedy-goelmehta",
    "markov-ne",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Reproduction {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.label))
            .collect();
        lines.push(format!("{}: {}", self.name, if self.pass() { "PASS" } else { "FAIL" }));
        lines
    }
}

fn check(checks: &mut Vec<Check>, pass: bool, label: String) {
    checks.push(Check { label, pass });
}

/// Runs one of [`REPRODUCTIONS`] with its pinned parameters and seeds.
pub fn reproduce(name: &str) -> Result<Reproduction> {
    let mut c = Vec::new();
    match name {
        "fibonacci-ratios" => {
            for k in 1..=8u32 {
                let (g, d) = gen_fibonacci_family(k)?;
                let arrival = Permutation::from_order(d.arrival_order.clone())?;
                let run = run_category_advice(&g, &arrival, k as usize + 2)?;
                let (f2k, f2k1) = (fibonacci(2 * k)? as usize, fibonacci(2 * k + 1)? as usize);
                let opt = maximum_matching(&g).size();
                let s = &run.pass_sizes;
                let k = k as usize;
                check(
                    &mut c,
                    s[k - 1] == f2k && s[k] == f2k + 1 && s[k + 1] == f2k + 1 && opt == f2k1,
                    format!(
                        "k={k}: passes k..k+2 = {:?}, expected [{f2k}, {}, {}]; OPT {opt} of {f2k1}; ratio {f2k}/{f2k1} = {:.6}",
                        &s[k - 1..],
                        f2k + 1,
                        f2k + 1,
                        f2k as f64 / f2k1 as f64
                    ),
                );
            }
            let r = fibonacci(10)? as f64 / fibonacci(11)? as f64;
            let golden = 2.0 / (1.0 + 5f64.sqrt());
            check(
                &mut c,
                ((r - golden) / golden).abs() < 1e-4,
                format!("F(10)/F(11) = {r:.6}, inverse golden ratio {golden:.6}"),
            );
        }
        "ranking-kvv" => {
            let (g, _) = gen_kvv_triangular(200)?;
            let sizes = ranking_trials(&g, &Permutation::identity(200), 3, 5000)?;
            let r = trial_stats_usize(&sizes)?.mean / 200.0;
            let target = 1.0 - 1.0 / E;
            check(
                &mut c,
                (r - target).abs() <= 0.02,
                format!("n=200, 5000 trials: mean ratio {r:.4}, target {target:.4} +/- 0.02"),
            );
        }
        "mingreedy-bp" => {
            let (kvv, _) = gen_kvv_triangular(100)?;
            let perfect = (0..100u64).filter(|&t| run_min_greedy(&kvv, trial_seed(4, t)).size() == 100).count();
            check(&mut c, perfect == 100, format!("triangular n=100: {perfect}/100 runs perfect"));
            let (g, _) = gen_besser_poloczek(25)?;
            let sizes = priority_trials(&g, PriorityAlgorithm::MinGreedy, 500, 5)?;
            let r = trial_stats_usize(&sizes)?.mean / (2.0 * 625.0 + 50.0);
            check(
                &mut c,
                (0.50..=0.56).contains(&r),
                format!("G_b b=25, 500 trials: mean ratio {r:.4}, band [0.50, 0.56]"),
            );
        }
        "minranking-bp" => {
            let (g, _) = gen_besser_poloczek(25)?;
            let sizes = priority_trials(&g, PriorityAlgorithm::MinRanking, 500, 6)?;
            let r = trial_stats_usize(&sizes)?.mean / (2.0 * 625.0 + 50.0);
            let target = 0.5 + 0.5 / E;
            check(
                &mut c,
                (r - target).abs() <= 0.03,
                format!("G_b b=25, 500 trials: mean ratio {r:.4}, target {target:.4} +/- 0.03"),
            );
        }
        "mindegree-iid" => {
            let (tg, d) = gen_min_degree_hard(10, 10, 20)?;
            let alg = IidAlgorithm::MinDegree { tie: IidTie::MaxIndex };
            let pairs: Vec<(usize, usize)> = iid_trials(&tg, &alg, 200, 11)?
                .into_iter()
                .map(|t| (t.alg_size, t.opt_size))
                .collect();
            let s = summarize(&pairs, 11)?;
            let overflow = overflow_trials(&tg, &d, 200, 11)?;
            check(
                &mut c,
                (0.60..=0.70).contains(&s.ratio),
                format!(
                    "G(10,10,20), max-block ties, 200 trials: ratio {:.4} [{:.4}, {:.4}], band [0.60, 0.70]",
                    s.ratio, s.ratio_ci_low, s.ratio_ci_high
                ),
            );
            check(&mut c, overflow < 2, format!("gadget overflow in {overflow}/200 trials (< 1%)"));
            check(
                &mut c,
                s.opt.mean >= 0.95 * 2100.0,
                format!("mean OPT {:.1}, needs >= 0.95 * (LNK + NL) = 1995", s.opt.mean),
            );
        }
        "greedy-goelmehta" => {
            let (tg, _) = gen_goel_mehta(20, 20)?;
            let alg = IidAlgorithm::Greedy { tie: IidTie::MaxIndex };
            let sizes: Vec<f64> = iid_trials(&tg, &alg, 300, 10)?
                .iter()
                .map(|t| t.alg_size as f64 / 400.0)
                .collect();
            let r = trial_stats(&sizes)?.mean;
            let target = 1.0 - 1.0 / E;
            check(
                &mut c,
                (r - target).abs() <= 0.03,
                format!("G(20,20), max-index ties, 300 trials: size/(LN) {r:.4}, target {target:.4} +/- 0.03"),
            );
        }
        "markov-ne" => {
            let v = expected_y_exact(2000)? / 2000.0;
            check(
                &mut c,
                (v - 1.0 / E).abs() <= 0.01,
                format!("E[Y_n(n)]/n at n=2000 = {v:.5}, 1/e = {:.5} +/- 0.01", 1.0 / E),
            );
            let dp = expected_y_exact(200)?;
            let chain = simulate_chain(200, 10_000, 8)?;
            let rhs = simulate_rhs_empirical(200, 10_000, 9)?;
            check(
                &mut c,
                chain.within_sigmas(dp, 3.0),
                format!("chain n=200: {:.3} +/- {:.3} vs DP {dp:.3}", chain.mean, chain.std_error()),
            );
            check(
                &mut c,
                rhs.within_sigmas(dp, 3.0),
                format!("rhs-greedy n=200: {:.3} +/- {:.3} vs DP {dp:.3}", rhs.mean, rhs.std_error()),
            );
            let root = ode_root(1000.0, 1e-9)? / 1000.0;
            check(&mut c, (0.33..=0.37).contains(&root), format!("ode root/n at n=1000 = {root:.4}"));
        }
        other => {
            return Err(Error::Parameter(format!(
                "unknown reproduction {other:?}; expected one of {}",
                REPRODUCTIONS.join(", ")
            )))
        }
    }
    Ok(Reproduction {
        name: name.to_string(),
        checks: c,
    })
}
