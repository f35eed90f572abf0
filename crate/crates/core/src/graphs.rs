//! Multigraphs and the three generators: uniform stub pairing (CM),
//! erasure of loops and multi-edges (ECM), and rank-1 inhomogeneous random
//! graphs (IRG).

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Open01;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::degree_model::DegreeSequence;
use crate::error::{Error, Result};

pub type Pair = (u32, u32);

#[inline]
fn canonical(i: u32, j: u32) -> Pair {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Undirected multigraph on `0..n`.
///
/// `X_ij` is stored once per unordered pair under the key `(min, max)`.
/// `X_ii` counts self-loops, each contributing 2 to the degree of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: FxHashMap<Pair, u32>,
    degrees: Vec<u64>,
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "vertex ids are 32-bit");
        MultiGraph { n, edges: FxHashMap::default(), degrees: vec![0; n] }
    }

    fn with_capacity(n: usize, pairs: usize) -> Self {
        let mut g = Self::new(n);
        g.edges.reserve(pairs);
        g
    }

    /// Builds a graph from `(i, j, multiplicity)` triples; repeated pairs add up.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32, u32)>) -> Result<Self> {
        let mut g = Self::new(n);
        for (i, j, m) in edges {
            if i as usize >= n || j as usize >= n {
                return Err(Error::invalid(format!("edge ({i},{j}) out of range for n = {n}")));
            }
            g.add_edges(i, j, m);
        }
        Ok(g)
    }

    /// Adds `count` parallel edges between `i` and `j` (loops when `i == j`).
    pub fn add_edges(&mut self, i: u32, j: u32, count: u32) {
        if count == 0 {
            return;
        }
        *self.edges.entry(canonical(i, j)).or_insert(0) += count;
        self.degrees[i as usize] += count as u64;
        self.degrees[j as usize] += count as u64;
    }

    pub fn add_edge(&mut self, i: u32, j: u32) {
        self.add_edges(i, j, 1);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.degrees[i]
    }

    pub fn multiplicity(&self, i: u32, j: u32) -> u32 {
        self.edges.get(&canonical(i, j)).copied().unwrap_or(0)
    }

    pub fn loops(&self, i: u32) -> u32 {
        self.multiplicity(i, i)
    }

    /// `(i, j, X_ij)` with `i <= j`, in storage order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.edges.iter().map(|(&(i, j), &m)| (i, j, m))
    }

    /// `(i, j, X_ij)` sorted by `(i, j)`.
    pub fn sorted_edges(&self) -> Vec<(u32, u32, u32)> {
        let mut v: Vec<_> = self.edges().collect();
        v.sort_unstable();
        v
    }

    /// Number of vertex pairs (including loop pairs) with at least one edge.
    pub fn distinct_pairs(&self) -> usize {
        self.edges.len()
    }

    /// Total number of edges, loops included, counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges.values().map(|&m| m as u64).sum()
    }

    /// `L_n = sum_i D_i`.
    pub fn total_degree(&self) -> u64 {
        self.degrees.iter().sum()
    }

    pub fn is_simple(&self) -> bool {
        self.edges.iter().all(|(&(i, j), &m)| i != j && m == 1)
    }

    /// Recomputes degrees from the multiplicities and checks the storage
    /// invariants.
    pub fn validate(&self) -> Result<()> {
        let mut deg = vec![0u64; self.n];
        for (&(i, j), &m) in &self.edges {
            if m == 0 {
                return Err(Error::invalid(format!("zero multiplicity stored for ({i},{j})")));
            }
            if i > j {
                return Err(Error::invalid(format!("non-canonical key ({i},{j})")));
            }
            deg[i as usize] += m as u64;
            deg[j as usize] += m as u64;
        }
        if deg != self.degrees {
            return Err(Error::invalid("degree array inconsistent with multiplicities"));
        }
        Ok(())
    }

    /// Graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[u32]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::invalid("permutation length differs from vertex count"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p as usize >= self.n || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        let mut g = Self::with_capacity(self.n, self.edges.len());
        for (i, j, m) in self.sorted_edges() {
            g.add_edges(perm[i as usize], perm[j as usize], m);
        }
        Ok(g)
    }
}

/// Bookkeeping for the edges removed by [`erase`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasureReport {
    /// `Z_n`: loops plus surplus parallel edges.
    pub z_total: u64,
    /// `Z_ij` per unordered pair; loops keyed `(i, i)` with `Z_ii = X_ii`.
    pub z_pair: FxHashMap<Pair, u32>,
    /// `D_i - D̂_i`; a removed loop accounts for two stubs.
    pub removed_stubs: Vec<u64>,
}

impl ErasureReport {
    /// `Y_i = X_ii + sum_{j != i} (X_ij - 1{X_ij > 0})`: the removed-stub
    /// counter that counts a removed loop once.
    pub fn removed_stubs_loop_once(&self) -> Vec<u64> {
        let mut y = vec![0u64; self.removed_stubs.len()];
        for (&(i, j), &z) in &self.z_pair {
            y[i as usize] += z as u64;
            if i != j {
                y[j as usize] += z as u64;
            }
        }
        y
    }

    pub fn sorted_pairs(&self) -> Vec<(u32, u32, u32)> {
        let mut v: Vec<_> = self.z_pair.iter().map(|(&(i, j), &z)| (i, j, z)).collect();
        v.sort_unstable();
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ErasureReportJson::from(self)).expect("report serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: ErasureReportJson = serde_json::from_value(value.clone())?;
        let mut z_pair = FxHashMap::default();
        for (i, j, z) in raw.z_pair {
            if z == 0 {
                continue;
            }
            z_pair.insert(canonical(i, j), z);
        }
        Ok(ErasureReport { z_total: raw.z_total, z_pair, removed_stubs: raw.removed_stubs })
    }
}

#[derive(Serialize, Deserialize)]
struct ErasureReportJson {
    z_total: u64,
    removed_stubs: Vec<u64>,
    #[serde(default)]
    removed_stubs_loop_once: Vec<u64>,
    z_pair: Vec<(u32, u32, u32)>,
}

impl From<&ErasureReport> for ErasureReportJson {
    fn from(r: &ErasureReport) -> Self {
        ErasureReportJson {
            z_total: r.z_total,
            removed_stubs: r.removed_stubs.clone(),
            removed_stubs_loop_once: r.removed_stubs_loop_once(),
            z_pair: r.sorted_pairs(),
        }
    }
}

/// Uniform random perfect matching of the stubs of `seq`.
///
/// The stub array is shuffled with Fisher-Yates and consecutive entries are
/// paired, so every matching is equally likely.
pub fn generate_cm<R: Rng + ?Sized>(seq: &DegreeSequence, rng: &mut R) -> Result<MultiGraph> {
    let total = seq.total();
    if total % 2 == 1 {
        return Err(Error::invalid(format!("stub total {total} is odd")));
    }
    let n = seq.len();
    if n > u32::MAX as usize {
        return Err(Error::invalid("too many vertices for 32-bit ids"));
    }
    let mut stubs = Vec::with_capacity(total as usize);
    for (v, &d) in seq.values().iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v as u32, d as usize));
    }
    stubs.shuffle(rng);
    let mut g = MultiGraph::with_capacity(n, stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        g.add_edge(pair[0], pair[1]);
    }
    Ok(g)
}

/// Removes loops and collapses parallel edges; the input is left untouched.
pub fn erase(g: &MultiGraph) -> (MultiGraph, ErasureReport) {
    let mut simple = MultiGraph::with_capacity(g.n, g.edges.len());
    let mut z_pair = FxHashMap::default();
    let mut removed = vec![0u64; g.n];
    let mut z_total = 0u64;
    for (i, j, m) in g.edges() {
        let z = if i == j {
            removed[i as usize] += 2 * m as u64;
            m
        } else {
            simple.add_edge(i, j);
            removed[i as usize] += (m - 1) as u64;
            removed[j as usize] += (m - 1) as u64;
            m - 1
        };
        if z > 0 {
            z_pair.insert((i, j), z);
            z_total += z as u64;
        }
    }
    (simple, ErasureReport { z_total, z_pair, removed_stubs: removed })
}

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Connection-probability profile `q(u) = u h(u)`.
#[derive(Clone)]
pub enum KernelSpec {
    /// `q(u) = min(u, 1)`
    ChungLu,
    /// `q(u) = 1 - exp(-u)`
    Poisson,
    /// `q(u) = u / (1 + u)`
    MaxEntropy,
    Custom { name: String, q: KernelFn },
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelSpec({})", self.name())
    }
}

impl KernelSpec {
    pub fn custom(name: impl Into<String>, q: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        KernelSpec::Custom { name: name.into(), q: Arc::new(q) }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "chung_lu" => Ok(KernelSpec::ChungLu),
            "poisson" => Ok(KernelSpec::Poisson),
            "max_entropy" => Ok(KernelSpec::MaxEntropy),
            other => Err(Error::invalid(format!(
                "unknown kernel {other:?}; expected chung_lu, poisson or max_entropy"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            KernelSpec::ChungLu => "chung_lu",
            KernelSpec::Poisson => "poisson",
            KernelSpec::MaxEntropy => "max_entropy",
            KernelSpec::Custom { name, .. } => name,
        }
    }

    pub fn q(&self, u: f64) -> f64 {
        match self {
            KernelSpec::ChungLu => u.min(1.0),
            KernelSpec::Poisson => -(-u).exp_m1(),
            KernelSpec::MaxEntropy => {
                if u.is_infinite() {
                    1.0
                } else {
                    u / (1.0 + u)
                }
            }
            KernelSpec::Custom { q, .. } => q(u),
        }
    }

    /// Values of `ln u` where `q` is not smooth. Custom kernels are assumed
    /// smooth.
    pub fn log_kinks(&self) -> &'static [f64] {
        match self {
            KernelSpec::ChungLu => &[0.0],
            _ => &[],
        }
    }

    pub fn h(&self, u: f64) -> f64 {
        match self {
            KernelSpec::ChungLu => {
                if u <= 1.0 {
                    1.0
                } else {
                    1.0 / u
                }
            }
            KernelSpec::Poisson if u < 1e-8 => 1.0 - 0.5 * u,
            KernelSpec::MaxEntropy => 1.0 / (1.0 + u),
            _ if u == 0.0 => {
                let tiny = 1e-12;
                self.q(tiny) / tiny
            }
            _ => self.q(u) / u,
        }
    }

    /// Grid check of the connection-probability class: `h(0) = 1`, `h`
    /// nonincreasing to 0, `q` nondecreasing to 1, and `q(u) <= min(u, 1)`.
    pub fn validate(&self) -> Result<()> {
        let grid: Vec<f64> = (0..=240).map(|k| 10f64.powf(-6.0 + k as f64 * 0.05)).collect();
        let mut violations = Vec::new();
        if (self.h(0.0) - 1.0).abs() > 1e-6 {
            violations.push(format!("h(0) = {} instead of 1", self.h(0.0)));
        }
        let hs: Vec<f64> = grid.iter().map(|&u| self.h(u)).collect();
        let qs: Vec<f64> = grid.iter().map(|&u| self.q(u)).collect();
        if let Some(k) = (1..grid.len()).find(|&k| hs[k] > hs[k - 1] + 1e-12) {
            violations.push(format!("h increases between u = {:e} and u = {:e}", grid[k - 1], grid[k]));
        }
        if hs.last().copied().unwrap_or(1.0) > 1e-3 {
            violations.push("h does not decrease to 0".to_string());
        }
        if let Some(k) = (1..grid.len()).find(|&k| qs[k] < qs[k - 1] - 1e-12) {
            violations.push(format!("q decreases between u = {:e} and u = {:e}", grid[k - 1], grid[k]));
        }
        if qs.last().copied().unwrap_or(0.0) < 1.0 - 1e-3 {
            violations.push("q does not increase to 1".to_string());
        }
        if let Some(k) = (0..grid.len()).find(|&k| !(qs[k] >= 0.0 && qs[k] <= grid[k].min(1.0) + 1e-12)) {
            violations.push(format!("q(u) exceeds min(u,1) or leaves [0,1] at u = {:e}", grid[k]));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::KernelCondition(violations))
        }
    }
}

/// `q(w_i w_j / (mu n))` clamped to `[0, 1]`.
pub fn connection_probability(kernel: &KernelSpec, w_i: f64, w_j: f64, mu: f64, n: usize) -> f64 {
    let u = w_i * w_j / (mu * n as f64);
    kernel.q(u).clamp(0.0, 1.0)
}

/// Rank-1 inhomogeneous random graph: each pair `{i, j}` is an edge
/// independently with probability `q(w_i w_j / (mu n))`.
///
/// Vertices are processed in weight-descending order so that along a row the
/// probabilities are nonincreasing; the row is then scanned with geometric
/// skips at the current probability and thinned to the exact target, which
/// keeps every pair's marginal unchanged and costs `O(n + m)`.
pub fn generate_irg<R: Rng + ?Sized>(
    weights: &DegreeSequence,
    kernel: &KernelSpec,
    mu: f64,
    rng: &mut R,
) -> Result<MultiGraph> {
    kernel.validate()?;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    let w = weights.values();
    let n = w.len();
    if n > u32::MAX as usize {
        return Err(Error::invalid("too many vertices for 32-bit ids"));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| w[b as usize].cmp(&w[a as usize]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&v| w[v as usize] as f64).collect();
    let norm = mu * n as f64;
    let prob = |a: usize, b: usize| kernel.q(sorted[a] * sorted[b] / norm).clamp(0.0, 1.0);

    let mut g = MultiGraph::new(n);
    for a in 0..n {
        let mut b = a + 1;
        if b >= n {
            break;
        }
        let mut p = prob(a, b);
        while b < n && p > 0.0 {
            if p < 1.0 {
                let r: f64 = rng.sample(Open01);
                let skip = (r.ln() / (-p).ln_1p()).floor();
                if skip >= (n - b) as f64 {
                    break;
                }
                b += skip as usize;
            }
            let target = prob(a, b);
            let r: f64 = rng.random();
            if r < target / p {
                g.add_edge(order[a], order[b]);
            }
            p = target;
            b += 1;
        }
    }
    Ok(g)
}
