//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line, then exits non-zero if any failed.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use matchlab::analysis::{expected_y_exact, ode_root, simulate_chain, simulate_rhs_empirical};
use matchlab::families::{
    fibonacci, gen_besser_poloczek, gen_fibonacci_family, gen_goel_mehta, gen_h_graph, gen_kvv_triangular,
    gen_min_degree_hard, overflow_trials,
};
use matchlab::fuzz::random_bipartite;
use matchlab::iid::{
    check_consistency, estimate_iid_ratio, GreedyRule, IidAlgorithm, IidTie, MinDegreeRule, StepParityRule, TypeGraph,
};
use matchlab::online::{run_category_advice, run_ranking_random, TieBreak};
use matchlab::priority::{
    estimate_priority_ratio, run_min_greedy, run_min_ranking_with, run_rhs_greedy, OnlineSelection, PriorityAlgorithm,
};
use matchlab::seed::{rng_from_seed, trial_seed};
use matchlab::{brute_force_maximum_matching, maximum_matching, BipartiteGraph, Permutation};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fib_ratio(k: u32) -> f64 {
    fibonacci(2 * k).unwrap() as f64 / fibonacci(2 * k + 1).unwrap() as f64
}

fn fibonacci_exactness() -> Outcome {
    for k in 1..=8u32 {
        let (g, d) = gen_fibonacci_family(k).unwrap();
        let arrival = Permutation::from_order(d.arrival_order.clone()).unwrap();
        let f2k = fibonacci(2 * k).unwrap() as usize;
        let opt = maximum_matching(&g).size();
        if opt != fibonacci(2 * k + 1).unwrap() as usize {
            return outcome(false, format!("k={k}: OPT {opt}"));
        }
        let run = run_category_advice(&g, &arrival, k as usize + 2).unwrap();
        let sizes = &run.pass_sizes;
        if sizes[k as usize - 1] != f2k || sizes[k as usize] != f2k + 1 || sizes[k as usize + 1] != f2k + 1 {
            return outcome(false, format!("k={k}: pass sizes {sizes:?}, F(2k)={f2k}"));
        }
    }
    outcome(true, "k=1..8: |M_k| = F(2k), |M_k+1| = |M_k+2| = F(2k)+1, OPT = F(2k+1)")
}

fn positive_bound() -> Outcome {
    let mut rng = rng_from_seed(2024);
    let mut worst = f64::INFINITY;
    for i in 0..200 {
        let n_on = rng.gen_range(1..=40);
        let n_off = rng.gen_range(1..=40);
        let g = random_bipartite(n_on, n_off, 0.3, &mut rng);
        let arrival = Permutation::random(n_on, &mut rng);
        let opt = maximum_matching(&g).size() as f64;
        let run = run_category_advice(&g, &arrival, 4).unwrap();
        if run.pass_sizes.windows(2).any(|w| w[0] > w[1]) {
            return outcome(false, format!("graph {i}: pass sizes {:?} decrease", run.pass_sizes));
        }
        for k in 1..=4u32 {
            let size = run.pass_sizes[k as usize - 1] as f64;
            if size < fib_ratio(k) * opt - 1e-9 {
                return outcome(false, format!("graph {i}, k={k}: {size} < {} * {opt}", fib_ratio(k)));
            }
            if opt > 0.0 {
                worst = worst.min(size / opt - fib_ratio(k));
            }
        }
    }
    outcome(true, format!("200 graphs x k=1..4, least margin over F(2k)/F(2k+1): {worst:.4}"))
}

fn ranking_triangular() -> Outcome {
    let (g, _) = gen_kvv_triangular(200).unwrap();
    let s = run_ranking_random(&g, &Permutation::identity(200), 3, 5000).unwrap();
    let r = s.ratio().mean;
    let target = 1.0 - 1.0 / E;
    outcome((r - target).abs() <= 0.02, format!("mean ratio {r:.4}, target {target:.4} +/- 0.02"))
}

fn mingreedy_kvv() -> Outcome {
    let (g, _) = gen_kvv_triangular(100).unwrap();
    let bad: Vec<u64> = (0..100).filter(|&t| run_min_greedy(&g, trial_seed(4, t)).size() != 100).collect();
    outcome(bad.is_empty(), format!("100 runs, {} not perfect", bad.len()))
}

fn mingreedy_bp() -> Outcome {
    let (g, _) = gen_besser_poloczek(25).unwrap();
    let s = estimate_priority_ratio(&g, PriorityAlgorithm::MinGreedy, 500, 5).unwrap();
    let r = s.ratio().mean;
    outcome((0.50..=0.56).contains(&r), format!("b=25 mean ratio {r:.4}, band [0.50, 0.56]"))
}

fn minranking_bp() -> Outcome {
    let (g, _) = gen_besser_poloczek(25).unwrap();
    let s = estimate_priority_ratio(&g, PriorityAlgorithm::MinRanking, 500, 6).unwrap();
    let r = s.ratio().mean;
    let target = 0.5 + 0.5 / E;
    outcome((r - target).abs() <= 0.03, format!("b=25 mean ratio {r:.4}, target {target:.4} +/- 0.03"))
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
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

fn equivalence() -> Outcome {
    let mut checked = 0usize;
    for total in 1..=7usize {
        for k in 0..=total {
            let n = total - k;
            if k > n {
                continue;
            }
            let (g, d) = gen_h_graph(n, k).unwrap();
            let mut mismatch = None;
            for_each_permutation(total, |order| {
                if mismatch.is_some() {
                    return;
                }
                let pi = Permutation::from_order(order.to_vec()).unwrap();
                let a = run_rhs_greedy(&g, &d, &pi).unwrap().matching.edges();
                let b = run_min_ranking_with(&g, &pi, OnlineSelection::LowestIndex).edges();
                if a != b {
                    mismatch = Some(order.to_vec());
                }
                checked += 1;
            });
            if let Some(o) = mismatch {
                return outcome(false, format!("n={n} k={k} order {o:?}"));
            }
        }
    }
    outcome(true, format!("{checked} (graph, order) pairs identical"))
}

fn markov_anchor() -> Outcome {
    let exact = expected_y_exact(2000).unwrap() / 2000.0;
    let dp200 = expected_y_exact(200).unwrap();
    let chain = simulate_chain(200, 10_000, 8).unwrap();
    let rhs = simulate_rhs_empirical(200, 10_000, 9).unwrap();
    let root = ode_root(1000.0, 1e-9).unwrap() / 1000.0;
    let ok = (exact - 1.0 / E).abs() <= 0.01
        && chain.within_sigmas(dp200, 3.0)
        && rhs.within_sigmas(dp200, 3.0)
        && (0.33..=0.37).contains(&root);
    outcome(
        ok,
        format!(
            "E[Y]/n at 2000 = {exact:.5}; n=200 DP {dp200:.3}, chain {:.3} (se {:.3}), rhs {:.3} (se {:.3}); root/n = {root:.4}",
            chain.mean,
            chain.std_error(),
            rhs.mean,
            rhs.std_error()
        ),
    )
}

fn goel_mehta() -> Outcome {
    let (tg, _) = gen_goel_mehta(20, 20).unwrap();
    let alg = IidAlgorithm::Greedy { tie: IidTie::MaxIndex };
    let e = estimate_iid_ratio(&tg, &alg, 300, 10).unwrap();
    let r = e.alg.mean / 400.0;
    let target = 1.0 - 1.0 / E;
    outcome((r - target).abs() <= 0.03, format!("mean size/(LN) {r:.4}, target {target:.4} +/- 0.03"))
}

fn mindegree_hard() -> Outcome {
    let (tg, d) = gen_min_degree_hard(10, 10, 20).unwrap();
    let alg = IidAlgorithm::MinDegree { tie: IidTie::MaxIndex };
    let e = estimate_iid_ratio(&tg, &alg, 200, 11).unwrap();
    let overflow = overflow_trials(&tg, &d, 200, 11).unwrap();
    let ok = (0.60..=0.70).contains(&e.ratio) && (overflow as f64) < 0.01 * 200.0;
    outcome(
        ok,
        format!(
            "ratio {:.4} (band [0.60, 0.70]), mean OPT {:.1}, overflow trials {overflow}/200",
            e.ratio, e.opt.mean
        ),
    )
}

fn mindegree_hard_opt() -> Outcome {
    let (tg, _) = gen_min_degree_hard(10, 10, 20).unwrap();
    let alg = IidAlgorithm::MinDegree { tie: IidTie::MaxIndex };
    let e = estimate_iid_ratio(&tg, &alg, 200, 11).unwrap();
    let bound = 0.95 * (10.0 * 10.0 * 20.0 + 10.0 * 10.0);
    outcome(e.opt.mean >= bound, format!("mean OPT {:.1}, needs >= {bound:.1}", e.opt.mean))
}

fn type_graph(n_u: usize, n_v: usize, bits: u64) -> TypeGraph {
    let adj = (0..n_u)
        .map(|u| (0..n_v).filter(|&v| bits >> (u * n_v + v) & 1 == 1).collect())
        .collect();
    TypeGraph::new(BipartiteGraph::from_adjacency(n_v, adj).unwrap())
}

fn consistency_suite() -> Outcome {
    let lowest = TieBreak::LowestIndex;
    let mut graphs = 0usize;
    let mut control_failures = 0usize;
    for n_u in 1..=4 {
        for n_v in 1..=4 {
            let sigmas = [
                Permutation::identity(n_v),
                Permutation::reversed(n_v),
                Permutation::random(n_v, &mut rng_from_seed((n_u * 10 + n_v) as u64)),
            ];
            let ties: Vec<TieBreak> = sigmas.into_iter().map(TieBreak::OfflineRank).collect();
            for bits in 0u64..1 << (n_u * n_v) {
                let tg = type_graph(n_u, n_v, bits);
                graphs += 1;
                let r = check_consistency(&mut MinDegreeRule::new(&lowest), &tg, 4).unwrap();
                if !r.is_consistent() {
                    return outcome(false, format!("mindegree inconsistent on {:?}", tg.base().adjacency()));
                }
                for tie in &ties {
                    let r = check_consistency(&mut GreedyRule::new(tie), &tg, 4).unwrap();
                    if !r.is_consistent() {
                        return outcome(false, format!("rank greedy inconsistent on {:?}", tg.base().adjacency()));
                    }
                }
                if !check_consistency(&mut StepParityRule, &tg, 4).unwrap().is_consistent() {
                    control_failures += 1;
                }
            }
        }
    }
    outcome(
        control_failures > 0,
        format!("{graphs} type graphs consistent; parity control inconsistent on {control_failures}"),
    )
}

fn oracle_cross_check() -> Outcome {
    let mut rng = rng_from_seed(12);
    for i in 0..500 {
        let n_on = rng.gen_range(0..=10);
        let n_off = rng.gen_range(0..=10);
        let p = rng.gen_range(0.05..0.7);
        let g = random_bipartite(n_on, n_off, p, &mut rng);
        let hk = maximum_matching(&g).size();
        let bf = brute_force_maximum_matching(&g).unwrap().size();
        if hk != bf {
            return outcome(false, format!("graph {i}: {hk} vs {bf}"));
        }
    }
    outcome(true, "500 fuzz graphs agree")
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn report(label: &str, name: &str, budget: Duration, run: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    let elapsed = start.elapsed();
    let pass = o.pass && elapsed <= budget;
    println!(
        "{label} {name:<32} {} ({:.2}s of {}s) {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        o.detail
    );
    pass
}

fn main() {
    let secs = Duration::from_secs;
    let criteria: [Criterion; 12] = [
        ("fibonacci exactness", secs(5), fibonacci_exactness),
        ("positive bound", secs(10), positive_bound),
        ("ranking on triangular graphs", secs(30), ranking_triangular),
        ("mingreedy perfect on triangular", secs(60), mingreedy_kvv),
        ("mingreedy on G_b", secs(60), mingreedy_bp),
        ("minranking on G_b", secs(120), minranking_bp),
        ("rhs/minranking equivalence", secs(30), equivalence),
        ("markov chain and ode anchor", secs(60), markov_anchor),
        ("goel-mehta greedy", secs(60), goel_mehta),
        ("mindegree hard family", secs(180), mindegree_hard),
        ("consistency suite", secs(600), consistency_suite),
        ("oracle cross-check", secs(60), oracle_cross_check),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        if !report(&format!("acceptance {:>2}", i + 1), name, *budget, *run) {
            failed += 1;
        }
    }
    if !report("invariant    ", "G(10,10,20) mean OPT", secs(180), mindegree_hard_opt) {
        failed += 1;
    }
    println!("acceptance: {} checks, {failed} failed", criteria.len() + 1);
    if failed > 0 {
        std::process::exit(1);
    }
}
