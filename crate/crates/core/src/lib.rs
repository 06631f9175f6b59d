//! Bipartite matching laboratory: online, multi-pass, priority and known-IID
//! matching algorithms, the instance families that stress them, and the
//! stochastic analysis of RHSGreedy.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod families;
pub mod fuzz;
pub mod graph;
pub mod iid;
pub mod online;
pub mod priority;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{
    brute_force_maximum_matching, maximum_matching, verify_matching, BipartiteGraph, GraphJson, Matching,
    Permutation,
};
pub use stats::{trial_stats, TrialStats};
