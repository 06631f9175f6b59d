//! The Markov chain behind RHSGreedy on `H(n,n)`, its exact expectation, two
//! samplers, and the root of the limiting equation.
//!
//! State `(x, y)`: `x` unmatched online vertices, `y` matched `V_2` vertices.
//! Each step matches one online vertex; with probability `x / (2x + y)` the
//! match uses a `V_2` vertex and `y` grows by one. The chain starts at `(n, 0)`
//! and runs `n` steps.

use num::{BigInt, BigRational, One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::gen_h_graph;
use crate::graph::Permutation;
use crate::priority::run_rhs_greedy;
use crate::seed::trial_rng;
use crate::stats::{trial_stats_usize, TrialStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainState {
    pub x: usize,
    pub y: usize,
}

impl ChainState {
    pub fn initial(n: usize) -> Self {
        Self { x: n, y: 0 }
    }
}

/// `(p_same_y, p_inc_y)` for one step out of `state`.
pub fn chain_step_probs(state: ChainState) -> Result<(f64, f64)> {
    let ChainState { x, y } = state;
    if x == 0 {
        return Err(Error::Parameter("chain step needs x >= 1".into()));
    }
    let denom = (2 * x + y) as f64;
    Ok(((x + y) as f64 / denom, x as f64 / denom))
}

/// Probability mass over `y` after all `n` steps, as floats.
fn final_distribution(n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    let mut next = vec![0.0; n + 1];
    for t in 0..n {
        let x = n - t;
        next[..=t + 1].iter_mut().for_each(|q| *q = 0.0);
        for y in 0..=t {
            let mass = p[y];
            if mass == 0.0 {
                continue;
            }
            let denom = (2 * x + y) as f64;
            next[y + 1] += mass * (x as f64 / denom);
            next[y] += mass * ((x + y) as f64 / denom);
        }
        std::mem::swap(&mut p, &mut next);
    }
    p
}

/// `E[Y_n(n)]` by forward dynamic programming over the reachable states.
pub fn expected_y_exact(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let p = final_distribution(n);
    // Kahan
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for (y, &mass) in p.iter().enumerate() {
        let term = y as f64 * mass - comp;
        let t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    Ok(sum)
}

pub const MAX_RATIONAL_N: usize = 30;

/// `E[Y_n(n)]` in exact rational arithmetic, for `n <= 30`.
pub fn expected_y_exact_rational(n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if n > MAX_RATIONAL_N {
        return Err(Error::SizeGuard {
            what: "n",
            actual: n,
            limit: MAX_RATIONAL_N,
        });
    }
    let r = |a: usize, b: usize| BigRational::new(BigInt::from(a), BigInt::from(b));
    let mut p = vec![BigRational::zero(); n + 1];
    p[0] = BigRational::one();
    for t in 0..n {
        let x = n - t;
        let mut next = vec![BigRational::zero(); n + 1];
        for y in 0..=t {
            if p[y].is_zero() {
                continue;
            }
            let denom = 2 * x + y;
            next[y + 1] += &p[y] * r(x, denom);
            next[y] += &p[y] * r(x + y, denom);
        }
        p = next;
    }
    Ok(p.iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (y, m)| acc + m * BigRational::from_integer(BigInt::from(y))))
}

/// One sampled path of the chain; returns `Y_n(n)`.
pub fn sample_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    let mut s = ChainState::initial(n);
    while s.x > 0 {
        if rng.gen_range(0..2 * s.x + s.y) < s.x {
            s.y += 1;
        }
        s.x -= 1;
    }
    s.y
}

pub fn simulate_chain_values(n: usize, trials: usize, seed: u64) -> Result<Vec<usize>> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| sample_chain(n, &mut trial_rng(seed, t)))
        .collect())
}

/// Monte Carlo estimate of `E[Y_n(n)]` from the chain itself.
pub fn simulate_chain(n: usize, trials: usize, seed: u64) -> Result<TrialStats> {
    Ok(trial_stats_usize(&simulate_chain_values(n, trials, seed)?)?.with_seed(seed))
}

pub fn simulate_rhs_values(n: usize, trials: usize, seed: u64) -> Result<Vec<usize>> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let (g, desc) = gen_h_graph(n, n)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let order = Permutation::random(2 * n, &mut trial_rng(seed, t));
            Ok(run_rhs_greedy(&g, &desc, &order)?.v2_edges)
        })
        .collect()
}

/// `V_2` edges used by RHSGreedy on `H(n,n)` under uniform offline orders.
pub fn simulate_rhs_empirical(n: usize, trials: usize, seed: u64) -> Result<TrialStats> {
    Ok(trial_stats_usize(&simulate_rhs_values(n, trials, seed)?)?.with_seed(seed))
}

/// `f(z) = ln(1+z) - 1/(1+z) + 1 - ln n`.
pub fn ode_f(z: f64, n: f64) -> f64 {
    (1.0 + z).ln() - 1.0 / (1.0 + z) + 1.0 - n.ln()
}

/// The positive root of [`ode_f`], by bisection on `[0, n]` until the
/// bracket is narrower than `tolerance`.
pub fn ode_root(n: f64, tolerance: f64) -> Result<f64> {
    if n.is_nan() || n < 3.0 {
        return Err(Error::Parameter(format!("ode_root needs n >= 3, got {n}")));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let (mut lo, mut hi) = (0.0, n);
    if ode_f(lo, n) >= 0.0 || ode_f(hi, n) <= 0.0 {
        return Err(Error::Bracket { lo, hi });
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ode_f(mid, n) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;
    use std::f64::consts::E;

    /// Independent oracle: recursion over every path, exact rationals.
    fn expected_by_paths(s: ChainState) -> BigRational {
        if s.x == 0 {
            return BigRational::from_integer(BigInt::from(s.y));
        }
        let d = BigInt::from(2 * s.x + s.y);
        let inc = BigRational::new(BigInt::from(s.x), d.clone());
        let same = BigRational::new(BigInt::from(s.x + s.y), d);
        inc * expected_by_paths(ChainState { x: s.x - 1, y: s.y + 1 })
            + same * expected_by_paths(ChainState { x: s.x - 1, y: s.y })
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn step_probabilities() {
        assert_eq!(chain_step_probs(ChainState { x: 1, y: 0 }).unwrap(), (0.5, 0.5));
        let (s, i) = chain_step_probs(ChainState { x: 1, y: 1 }).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-15 && (i - 1.0 / 3.0).abs() < 1e-15);
        assert!(chain_step_probs(ChainState { x: 0, y: 3 }).is_err());
        for x in 1..20 {
            for y in 0..20 {
                let (s, i) = chain_step_probs(ChainState { x, y }).unwrap();
                assert!((s + i - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn small_exact_values() {
        assert_eq!(expected_y_exact_rational(1).unwrap(), q(1, 2));
        assert_eq!(expected_y_exact_rational(2).unwrap(), q(11, 12));
        assert_eq!(expected_by_paths(ChainState::initial(2)), q(11, 12));
        assert!((expected_y_exact(1).unwrap() - 0.5).abs() < 1e-15);
        assert!((expected_y_exact(2).unwrap() - 11.0 / 12.0).abs() < 1e-15);
        assert!(expected_y_exact(0).is_err());
        assert!(expected_y_exact_rational(31).is_err());
    }

    #[test]
    fn rational_dp_matches_path_enumeration() {
        for n in 1..=12 {
            assert_eq!(expected_y_exact_rational(n).unwrap(), expected_by_paths(ChainState::initial(n)));
        }
    }

    #[test]
    fn float_dp_matches_rational() {
        for n in 1..=MAX_RATIONAL_N {
            let exact = expected_y_exact_rational(n).unwrap().to_f64().unwrap();
            assert!((expected_y_exact(n).unwrap() - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn large_n_approaches_inverse_e() {
        let v = expected_y_exact(2000).unwrap() / 2000.0;
        assert!((v - 1.0 / E).abs() < 0.01, "{v}");
    }

    #[test]
    fn ladder_distance_is_non_increasing() {
        let d: Vec<f64> = [10, 100, 1000, 2000]
            .iter()
            .map(|&n| (expected_y_exact(n).unwrap() / n as f64 - 1.0 / E).abs())
            .collect();
        for w in d.windows(2) {
            assert!(w[1] <= w[0], "{d:?}");
        }
    }

    #[test]
    fn chain_samples_stay_in_range() {
        for n in [0, 1, 5, 50] {
            for y in simulate_chain_values(n, 200, 7).unwrap() {
                assert!(y <= n);
            }
        }
    }

    #[test]
    fn chain_n1_mean() {
        let s = simulate_chain(1, 100_000, 1).unwrap();
        assert!(s.within_sigmas(0.5, 3.0), "{s:?}");
    }

    #[test]
    fn rhs_n1_mean_and_replay() {
        let s = simulate_rhs_empirical(1, 20_000, 2).unwrap();
        assert!(s.within_sigmas(0.5, 3.0), "{s:?}");
        assert_eq!(s, simulate_rhs_empirical(1, 20_000, 2).unwrap());
        assert!(simulate_rhs_empirical(3, 0, 2).is_err());
    }

    #[test]
    fn samplers_agree_with_dp_at_small_n() {
        for n in [3, 10, 40] {
            let exact = expected_y_exact(n).unwrap();
            let chain = simulate_chain(n, 20_000, n as u64).unwrap();
            let rhs = simulate_rhs_empirical(n, 20_000, n as u64 + 100).unwrap();
            assert!(chain.within_sigmas(exact, 3.0), "n={n} {chain:?} vs {exact}");
            assert!(rhs.within_sigmas(exact, 3.0), "n={n} {rhs:?} vs {exact}");
        }
    }

    #[test]
    fn ode_root_contract() {
        let r = ode_root(1000.0, 1e-10).unwrap();
        assert!((0.33..=0.37).contains(&(r / 1000.0)));
        // Residual bounded by slope times bracket width.
        let slope = 1.0 / (1.0 + r) + 1.0 / (1.0 + r).powi(2);
        assert!(ode_f(r, 1000.0).abs() <= 1e-10 * slope * 2.0);
        let big = ode_root(1e6, 1e-6).unwrap() / 1e6;
        assert!((big - 1.0 / E).abs() < 0.002);
        assert!(ode_root(2.0, 1e-6).is_err());
        assert!(ode_root(10.0, 0.0).is_err());
    }

    #[test]
    fn sign_argument_holds() {
        for n in [100.0, 1000.0, 1e4, 1e5] {
            assert!(ode_f(n / E, n) > 0.0, "n={n}");
            assert!(ode_f(0.9 * n / E, n) < 0.0, "n={n}");
        }
    }

    #[test]
    fn root_tracks_dp_value() {
        let n = 2000;
        let root = ode_root(n as f64, 1e-9).unwrap();
        let dp = expected_y_exact(n).unwrap();
        assert!((root - dp).abs() / (n as f64) < 0.005, "root {root} dp {dp}");
    }
}
