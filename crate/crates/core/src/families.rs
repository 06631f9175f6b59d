//! Generators for the adversarial and structured instance families.
//!
//! Each generator returns the graph together with a [`FamilyDescriptor`]
//! naming its vertex blocks as index ranges. Blocks are laid out top to
//! bottom in index order on both sides, so index order is also the canonical
//! arrival order of `U` and the identity ranking of `V`.
//!
//! Index maps per family:
//!
//! * Fibonacci `G_k` (`k >= 2`): `U = U_1 | U_2 | U_3`, `V = V_1 | V_2 | V_3`
//!   with sizes `F(2k-1), F(2k-2), F(2k-1)`. A copy of `G_{k-1}` sits between
//!   `U_1` and `V_3`; `U_1`–`V_1` and `U_2`–`V_1` are bicliques; `U_2`–`V_2`
//!   and `U_3`–`V_1` are parallel edges. `G_1` is `u0-{v0,v1}`, `u1-v0`.
//! * Besser-Poloczek `G_b`: the vertex numbered `x` (1-based) on side `L`
//!   (online) or `R` (offline) has index `x - 1`, so `S_1 = [0, b^2)`,
//!   `S_2^(i) = [b^2 + (i-1)b, b^2 + ib)` and `S_3 = [2b^2, 2b^2 + 2b)`.
//! * `H(n,k)`: `U = [0, n)`, `V_1 = [0, k)`, `V_2 = [k, k + n)`, with
//!   `i_U` parallel to `k + i`.
//! * Goel-Mehta `G(L,N)`: block `j` (1-based) is `[(j-1)L, jL)` on each side;
//!   `U_j` is joined to `V_i` for all `i >= j`.
//! * `G(L,N,K)`: copies `0..K` of `G(L,N)` first on both sides (copy `c`
//!   occupies `[cLN, (c+1)LN)`), then gadgets `H_1..H_N` with `L` online and
//!   `L + gadget_slack(L)` offline vertices each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::iid::{InstanceSample, TypeGraph};

/// Largest `i` with `F(i)` representable in a `u64`.
pub const MAX_FIBONACCI_INDEX: u32 = 93;

/// `F(1) = F(2) = 1`, `F(i) = F(i-1) + F(i-2)`.
pub fn fibonacci(i: u32) -> Result<u64> {
    if i == 0 {
        return Err(Error::Parameter("fibonacci index starts at 1".into()));
    }
    if i > MAX_FIBONACCI_INDEX {
        return Err(Error::FibonacciOverflow(i));
    }
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 2..i {
        let next = a + b;
        a = b;
        b = next;
    }
    Ok(b)
}

/// Extra offline vertices per `G(L,N,K)` gadget beyond `L`:
/// `ceil(3 * sqrt(L * ln(max(L, 2))))`.
pub fn gadget_slack(l: usize) -> usize {
    let l = l as f64;
    (3.0 * (l * l.max(2.0).ln()).sqrt()).ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Online,
    Offline,
}

/// A named half-open index range on one side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub side: Side,
    pub start: usize,
    pub end: usize,
}

impl Block {
    fn new(name: impl Into<String>, side: Side, start: usize, len: usize) -> Self {
        Self {
            name: name.into(),
            side,
            start,
            end: start + len,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, x: usize) -> bool {
        (self.start..self.end).contains(&x)
    }
}

/// Family name plus parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Family {
    Fibonacci { k: u32 },
    #[serde(rename = "kvv")]
    KvvTriangular { n: usize },
    #[serde(rename = "bp")]
    BesserPoloczek { b: usize },
    #[serde(rename = "hgraph")]
    HGraph { n: usize, k: usize },
    GoelMehta { l: usize, n: usize },
    #[serde(rename = "mindegree-hard")]
    MinDegreeHard { l: usize, n: usize, k: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Fibonacci { .. } => "fibonacci",
            Family::KvvTriangular { .. } => "kvv",
            Family::BesserPoloczek { .. } => "bp",
            Family::HGraph { .. } => "hgraph",
            Family::GoelMehta { .. } => "goel-mehta",
            Family::MinDegreeHard { .. } => "mindegree-hard",
        }
    }

    /// Parameters as `key=value` pairs joined by `;`.
    pub fn params(&self) -> String {
        match *self {
            Family::Fibonacci { k } => format!("k={k}"),
            Family::KvvTriangular { n } => format!("n={n}"),
            Family::BesserPoloczek { b } => format!("b={b}"),
            Family::HGraph { n, k } => format!("n={n};k={k}"),
            Family::GoelMehta { l, n } => format!("L={l};N={n}"),
            Family::MinDegreeHard { l, n, k } => format!("L={l};N={n};K={k}"),
        }
    }

    /// True for families meant to be used as known-IID type graphs.
    pub fn is_type_graph(&self) -> bool {
        matches!(self, Family::GoelMehta { .. } | Family::MinDegreeHard { .. })
    }

    pub fn generate(&self) -> Result<(BipartiteGraph, FamilyDescriptor)> {
        match *self {
            Family::Fibonacci { k } => gen_fibonacci_family(k),
            Family::KvvTriangular { n } => gen_kvv_triangular(n),
            Family::BesserPoloczek { b } => gen_besser_poloczek(b),
            Family::HGraph { n, k } => gen_h_graph(n, k),
            Family::GoelMehta { l, n } => gen_goel_mehta(l, n).map(|(tg, d)| (tg.into_base(), d)),
            Family::MinDegreeHard { l, n, k } => {
                gen_min_degree_hard(l, n, k).map(|(tg, d)| (tg.into_base(), d))
            }
        }
    }
}

/// Parses `name:key=value,...` (`;` also separates pairs; keys are
/// case-insensitive), e.g. `hgraph:n=5,k=3` or `mindegree-hard:L=10;N=10;K=20`.
impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for pair in rest.split([',', ';']).filter(|p| !p.trim().is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("expected key=value, got {pair:?}")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad value for {key}: {value:?}")))?;
            params.insert(key.trim().to_ascii_lowercase(), value);
        }
        let mut take = |key: &str| {
            params
                .remove(key)
                .ok_or_else(|| Error::Parameter(format!("family {name} needs parameter {key}")))
        };
        let family = match name.trim() {
            "fibonacci" => Family::Fibonacci {
                k: u32::try_from(take("k")?).map_err(|_| Error::Parameter("k out of range".into()))?,
            },
            "kvv" => Family::KvvTriangular { n: take("n")? },
            "bp" => Family::BesserPoloczek { b: take("b")? },
            "hgraph" => Family::HGraph {
                n: take("n")?,
                k: take("k")?,
            },
            "goel-mehta" => Family::GoelMehta {
                l: take("l")?,
                n: take("n")?,
            },
            "mindegree-hard" => Family::MinDegreeHard {
                l: take("l")?,
                n: take("n")?,
                k: take("k")?,
            },
            other => return Err(Error::Parameter(format!("unknown family {other:?}"))),
        };
        if let Some(extra) = params.keys().next() {
            return Err(Error::Parameter(format!("family {name} has no parameter {extra}")));
        }
        Ok(family)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub family: Family,
    pub blocks: Vec<Block>,
    /// Canonical arrival order of `U` (top to bottom).
    pub arrival_order: Vec<usize>,
    /// Maximum matching size of the emitted graph.
    pub expected_opt: usize,
}

impl FamilyDescriptor {
    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn blocks_on(&self, side: Side) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(move |b| b.side == side)
    }
}

fn push_biclique(adj: &mut [Vec<usize>], us: std::ops::Range<usize>, vs: std::ops::Range<usize>) {
    for u in us {
        adj[u].extend(vs.clone());
    }
}

fn push_parallel(adj: &mut [Vec<usize>], u_start: usize, v_start: usize, len: usize) {
    for i in 0..len {
        adj[u_start + i].push(v_start + i);
    }
}

pub const MAX_FIBONACCI_FAMILY_K: u32 = 11;

fn fibonacci_adjacency(k: u32) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![0, 1], vec![0]];
    }
    let big = fibonacci(2 * k - 1).unwrap() as usize;
    let mid = fibonacci(2 * k - 2).unwrap() as usize;
    let n = 2 * big + mid;
    let (u2, u3) = (big, big + mid);
    let (v2, v3) = (big, big + mid);
    let mut adj = vec![Vec::new(); n];
    // Listing V_1 before the inner copy keeps each row sorted.
    push_biclique(&mut adj, 0..big, 0..big);
    for (u, row) in fibonacci_adjacency(k - 1).into_iter().enumerate() {
        adj[u].extend(row.into_iter().map(|v| v3 + v));
    }
    push_biclique(&mut adj, u2..u3, 0..big);
    push_parallel(&mut adj, u2, v2, mid);
    push_parallel(&mut adj, u3, 0, big);
    adj
}

/// The recursive family `G_k` with `F(2k+1)` vertices per side on which
/// k-pass Category-Advice finds exactly `F(2k)` edges.
pub fn gen_fibonacci_family(k: u32) -> Result<(BipartiteGraph, FamilyDescriptor)> {
    if !(1..=MAX_FIBONACCI_FAMILY_K).contains(&k) {
        return Err(Error::Parameter(format!(
            "fibonacci family needs 1 <= k <= {MAX_FIBONACCI_FAMILY_K}, got {k}"
        )));
    }
    let n = fibonacci(2 * k + 1)? as usize;
    let adj = fibonacci_adjacency(k);
    debug_assert_eq!(adj.len(), n);
    let graph = BipartiteGraph::from_adjacency(n, adj)?;

    let blocks = if k == 1 {
        vec![Block::new("U", Side::Online, 0, n), Block::new("V", Side::Offline, 0, n)]
    } else {
        let big = fibonacci(2 * k - 1)? as usize;
        let mid = fibonacci(2 * k - 2)? as usize;
        let mut blocks = Vec::new();
        for (side, prefix) in [(Side::Online, "U"), (Side::Offline, "V")] {
            blocks.push(Block::new(format!("{prefix}_1"), side, 0, big));
            blocks.push(Block::new(format!("{prefix}_2"), side, big, mid));
            blocks.push(Block::new(format!("{prefix}_3"), side, big + mid, big));
        }
        blocks
    };

    Ok((
        graph,
        FamilyDescriptor {
            family: Family::Fibonacci { k },
            blocks,
            arrival_order: (0..n).collect(),
            expected_opt: n,
        },
    ))
}

/// Upper-triangular biadjacency: `u_i ~ {v_i, ..., v_{n-1}}`.
pub fn gen_kvv_triangular(n: usize) -> Result<(BipartiteGraph, FamilyDescriptor)> {
    if n == 0 {
        return Err(Error::Parameter("triangular family needs n >= 1".into()));
    }
    let adj = (0..n).map(|i| (i..n).collect()).collect();
    let graph = BipartiteGraph::from_adjacency(n, adj)?;
    Ok((
        graph,
        FamilyDescriptor {
            family: Family::KvvTriangular { n },
            blocks: vec![Block::new("U", Side::Online, 0, n), Block::new("V", Side::Offline, 0, n)],
            arrival_order: (0..n).collect(),
            expected_opt: n,
        },
    ))
}

/// Besser-Poloczek graph `G_b` with `2b^2 + 2b` vertices per side; `L` is the
/// online side and `R` the offline side.
pub fn gen_besser_poloczek(b: usize) -> Result<(BipartiteGraph, FamilyDescriptor)> {
    if b < 2 {
        return Err(Error::Parameter(format!("besser-poloczek needs b >= 2, got {b}")));
    }
    let sq = b * b;
    let n = 2 * sq + 2 * b;
    let s1 = 0..sq;
    let s3 = 2 * sq..n;
    let mut adj = vec![Vec::new(); n];
    push_biclique(&mut adj, s3.clone(), s1.clone());
    push_biclique(&mut adj, s1.clone(), s3.clone());
    // S_{1,R} - S_{2,L} and S_{1,L} - S_{2,R}
    push_parallel(&mut adj, sq, 0, sq);
    push_parallel(&mut adj, 0, sq, sq);
    push_parallel(&mut adj, 2 * sq, 2 * sq, 2 * b);
    for i in 0..b {
        let block = sq + i * b..sq + (i + 1) * b;
        push_biclique(&mut adj, block.clone(), block);
    }
    let graph = BipartiteGraph::from_adjacency(n, adj)?;

    let mut blocks = Vec::new();
    for (side, tag) in [(Side::Online, "L"), (Side::Offline, "R")] {
        blocks.push(Block::new(format!("S_1,{tag}"), side, 0, sq));
        for i in 0..b {
            blocks.push(Block::new(format!("S_2,{tag}^{}", i + 1), side, sq + i * b, b));
        }
        blocks.push(Block::new(format!("S_3,{tag}"), side, 2 * sq, 2 * b));
    }
    Ok((
        graph,
        FamilyDescriptor {
            family: Family::BesserPoloczek { b },
            blocks,
            arrival_order: (0..n).collect(),
            expected_opt: n,
        },
    ))
}

/// `H(n,k)`: biclique between `U` and `V_1` (`|V_1| = k`) plus parallel edges
/// between `U` and `V_2` (`|V_2| = n`).
pub fn gen_h_graph(n: usize, k: usize) -> Result<(BipartiteGraph, FamilyDescriptor)> {
    if k > n {
        return Err(Error::Parameter(format!("H(n,k) needs k <= n, got n={n}, k={k}")));
    }
    let adj = (0..n)
        .map(|i| {
            let mut row: Vec<usize> = (0..k).collect();
            row.push(k + i);
            row
        })
        .collect();
    let graph = BipartiteGraph::from_adjacency(n + k, adj)?;
    Ok((
        graph,
        FamilyDescriptor {
            family: Family::HGraph { n, k },
            blocks: vec![
                Block::new("U", Side::Online, 0, n),
                Block::new("V_1", Side::Offline, 0, k),
                Block::new("V_2", Side::Offline, k, n),
            ],
            arrival_order: (0..n).collect(),
            expected_opt: n,
        },
    ))
}

fn goel_mehta_rows(l: usize, n: usize, u_offset: usize, v_offset: usize, adj: &mut [Vec<usize>]) {
    for j in 0..n {
        for row in &mut adj[u_offset + j * l..u_offset + (j + 1) * l] {
            row.extend(v_offset + j * l..v_offset + n * l);
        }
    }
}

/// Goel-Mehta type graph `G(L,N)`: `N` blocks of `L` per side, `U_j` joined to
/// every `V_i` with `i >= j`.
pub fn gen_goel_mehta(l: usize, n: usize) -> Result<(TypeGraph, FamilyDescriptor)> {
    if l == 0 || n == 0 {
        return Err(Error::Parameter("goel-mehta needs L, N >= 1".into()));
    }
    let size = l * n;
    let mut adj = vec![Vec::new(); size];
    goel_mehta_rows(l, n, 0, 0, &mut adj);
    let graph = BipartiteGraph::from_adjacency(size, adj)?;
    let mut blocks = Vec::new();
    for (side, prefix) in [(Side::Online, "U"), (Side::Offline, "V")] {
        for j in 0..n {
            blocks.push(Block::new(format!("{prefix}_{}", j + 1), side, j * l, l));
        }
    }
    Ok((
        TypeGraph::new(graph),
        FamilyDescriptor {
            family: Family::GoelMehta { l, n },
            blocks,
            arrival_order: (0..size).collect(),
            expected_opt: size,
        },
    ))
}

/// `G(L,N,K)`: `K` disjoint copies of `G(L,N)` plus `N` shared biclique
/// gadgets. Offline block `b` of every copy is joined to the online side of
/// gadgets `H_b..H_N`, which equalizes all copy offline degrees at `(N+1)L`.
pub fn gen_min_degree_hard(l: usize, n: usize, k: usize) -> Result<(TypeGraph, FamilyDescriptor)> {
    if l == 0 || n == 0 || k == 0 {
        return Err(Error::Parameter("mindegree-hard needs L, N, K >= 1".into()));
    }
    let copy = l * n;
    let gadget_off = l + gadget_slack(l);
    let n_online = k * copy + n * l;
    let n_offline = k * copy + n * gadget_off;
    let mut adj = vec![Vec::new(); n_online];
    for c in 0..k {
        goel_mehta_rows(l, n, c * copy, c * copy, &mut adj);
    }
    for j in 0..n {
        let online = k * copy + j * l..k * copy + (j + 1) * l;
        let own = k * copy + j * gadget_off..k * copy + (j + 1) * gadget_off;
        for u in online {
            for c in 0..k {
                // Copy blocks 1..=j+1 (1-based).
                adj[u].extend(c * copy..c * copy + (j + 1) * l);
            }
            adj[u].extend(own.clone());
        }
    }
    let graph = BipartiteGraph::from_adjacency(n_offline, adj)?;

    let mut blocks = Vec::new();
    for c in 0..k {
        for (side, prefix) in [(Side::Online, "U"), (Side::Offline, "V")] {
            for j in 0..n {
                blocks.push(Block::new(
                    format!("copy{}.{prefix}_{}", c + 1, j + 1),
                    side,
                    c * copy + j * l,
                    l,
                ));
            }
        }
    }
    for j in 0..n {
        blocks.push(Block::new(format!("H_{}.online", j + 1), Side::Online, k * copy + j * l, l));
        blocks.push(Block::new(
            format!("H_{}.offline", j + 1),
            Side::Offline,
            k * copy + j * gadget_off,
            gadget_off,
        ));
    }
    Ok((
        TypeGraph::new(graph),
        FamilyDescriptor {
            family: Family::MinDegreeHard { l, n, k },
            blocks,
            arrival_order: (0..n_online).collect(),
            expected_opt: n_online,
        },
    ))
}

/// Number of gadgets in a `G(L,N,K)` instance that drew more arrivals than
/// their offline side can absorb. Zero for every other family.
pub fn gadget_overflows(desc: &FamilyDescriptor, inst: &InstanceSample) -> usize {
    let Family::MinDegreeHard { l, n, k } = desc.family else {
        return 0;
    };
    let start = k * l * n;
    let capacity = l + gadget_slack(l);
    let mut counts = vec![0usize; n];
    for &t in inst.draws() {
        if t >= start {
            counts[(t - start) / l] += 1;
        }
    }
    counts.into_iter().filter(|&c| c > capacity).count()
}

/// Trials (instances sampled as in [`crate::iid::iid_trials`]) in which at
/// least one gadget overflowed.
pub fn overflow_trials(tg: &TypeGraph, desc: &FamilyDescriptor, trials: usize, seed: u64) -> Result<usize> {
    let mut hit = 0;
    for t in 0..trials as u64 {
        let inst = crate::iid::sample_instance(tg, crate::seed::trial_seed(seed, t))?;
        if gadget_overflows(desc, &inst) > 0 {
            hit += 1;
        }
    }
    Ok(hit)
}
