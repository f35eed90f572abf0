//! Exact graph statistics: Pearson degree correlation with its positive and
//! negative parts, multiplicity-weighted triangles, global and average
//! clustering, and degree power sums.
//!
//! Sums of degree products are accumulated in 128-bit integers and spill to
//! arbitrary precision on overflow, so the statistics are exact up to the
//! final conversion to `f64`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graphs::MultiGraph;

/// Nonnegative integer accumulated without loss.
#[derive(Clone, PartialEq, Eq)]
pub enum ExactSum {
    Small(u128),
    Big(BigUint),
}

impl ExactSum {
    pub fn zero() -> Self {
        ExactSum::Small(0)
    }

    pub fn add(&mut self, x: u128) {
        match self {
            ExactSum::Small(s) => match s.checked_add(x) {
                Some(v) => *s = v,
                None => *self = ExactSum::Big(BigUint::from(*s) + BigUint::from(x)),
            },
            ExactSum::Big(b) => *b += BigUint::from(x),
        }
    }

    pub fn add_big(&mut self, x: &BigUint) {
        let mut big = self.to_biguint();
        big += x;
        *self = ExactSum::from_biguint(big);
    }

    fn from_biguint(b: BigUint) -> Self {
        match b.to_u128() {
            Some(v) => ExactSum::Small(v),
            None => ExactSum::Big(b),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            ExactSum::Small(s) => BigUint::from(*s),
            ExactSum::Big(b) => b.clone(),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        BigInt::from(self.to_biguint())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactSum::Small(s) => *s as f64,
            ExactSum::Big(b) => b.to_f64().unwrap_or(f64::INFINITY),
        }
    }

    pub fn to_u128(&self) -> Option<u128> {
        match self {
            ExactSum::Small(s) => Some(*s),
            ExactSum::Big(b) => b.to_u128(),
        }
    }
}

impl fmt::Debug for ExactSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExactSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactSum::Small(s) => write!(f, "{s}"),
            ExactSum::Big(b) => write!(f, "{b}"),
        }
    }
}

/// Serialized as a JSON integer when it fits in `u64`, else as a decimal string.
impl Serialize for ExactSum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.to_u128().and_then(|v| u64::try_from(v).ok()) {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.to_string()),
        }
    }
}

/// `sum_i d_i^p` for an exponent `p <= 6`.
fn power_sum(degrees: &[u64], p: u32) -> ExactSum {
    let mut acc = ExactSum::zero();
    for &d in degrees {
        match (d as u128).checked_pow(p) {
            Some(v) => acc.add(v),
            None => acc.add_big(&BigUint::from(d).pow(p)),
        }
    }
    acc
}

pub const SUPPORTED_POWERS: [u32; 5] = [1, 2, 3, 4, 6];

/// Exact `sum_i D_i^p` for each requested `p` in `{1, 2, 3, 4, 6}`.
pub fn degree_power_sums(degrees: &[u64], powers: &[u32]) -> Result<BTreeMap<u32, ExactSum>> {
    let mut out = BTreeMap::new();
    for &p in powers {
        if !SUPPORTED_POWERS.contains(&p) {
            return Err(Error::invalid(format!("power {p} not in {{1,2,3,4,6}}")));
        }
        out.entry(p).or_insert_with(|| power_sum(degrees, p));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PearsonBreakdown {
    pub r: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    /// `sum_{i,j} X_ij D_i D_j` over ordered pairs, loops weighted twice.
    pub numerator_edge_sum: ExactSum,
    pub s2: ExactSum,
    pub s3: ExactSum,
    pub l: ExactSum,
}

fn ratio(num: &BigInt, den: &BigInt) -> f64 {
    // scale both down together so the f64 conversion cannot overflow
    let bits = num.bits().max(den.bits());
    if bits > 1000 {
        let shift = bits - 1000;
        let n: BigInt = num >> shift;
        let d: BigInt = den >> shift;
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN)
}

/// Pearson's degree correlation over edges.
///
/// The ordered double sum `sum_{i,j} X_ij D_i D_j` is realised as
/// `2 sum_{i<j} X_ij D_i D_j + 2 sum_i X_ii D_i^2`. Everything is combined in
/// exact integer arithmetic as
/// `r = (L * E - S2^2) / (L * S3 - S2^2)`.
pub fn pearson(g: &MultiGraph) -> Result<PearsonBreakdown> {
    let deg = g.degrees();
    let mut edge_sum = ExactSum::zero();
    for (i, j, m) in g.edges() {
        let prod = deg[i as usize] as u128 * deg[j as usize] as u128;
        match prod.checked_mul(2 * m as u128) {
            Some(v) => edge_sum.add(v),
            None => edge_sum.add_big(&(BigUint::from(prod) * BigUint::from(2 * m))),
        }
    }
    pearson_from_parts(deg, edge_sum)
}

pub(crate) fn pearson_from_parts(deg: &[u64], edge_sum: ExactSum) -> Result<PearsonBreakdown> {
    let l = power_sum(deg, 1);
    let s2 = power_sum(deg, 2);
    let s3 = power_sum(deg, 3);
    let (lb, s2b, s3b, eb) = (l.to_bigint(), s2.to_bigint(), s3.to_bigint(), edge_sum.to_bigint());
    let s2sq = &s2b * &s2b;
    let den = &lb * &s3b - &s2sq;
    if lb.is_zero() || den.is_zero() {
        return Err(Error::degenerate("degenerate denominator"));
    }
    let plus_num = &lb * &eb;
    let r = ratio(&(&plus_num - &s2sq), &den);
    Ok(PearsonBreakdown {
        r,
        r_plus: ratio(&plus_num, &den),
        r_minus: ratio(&s2sq, &den),
        numerator_edge_sum: edge_sum,
        s2,
        s3,
        l,
    })
}

/// Oriented adjacency without loops: each non-loop pair is stored once, at
/// the endpoint of lower `(degree, id)` rank.
struct Oriented {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    mult: Vec<u32>,
}

impl Oriented {
    fn build(g: &MultiGraph) -> Self {
        let n = g.n();
        let mut support = vec![0u32; n];
        for (i, j, _) in g.edges() {
            if i != j {
                support[i as usize] += 1;
                support[j as usize] += 1;
            }
        }
        let below = |a: u32, b: u32| (support[a as usize], a) < (support[b as usize], b);
        let mut out_deg = vec![0usize; n + 1];
        for (i, j, _) in g.edges() {
            if i != j {
                let src = if below(i, j) { i } else { j };
                out_deg[src as usize + 1] += 1;
            }
        }
        for k in 0..n {
            out_deg[k + 1] += out_deg[k];
        }
        let offsets = out_deg;
        let mut fill = offsets.clone();
        let m = offsets[n];
        let mut targets = vec![0u32; m];
        let mut mult = vec![0u32; m];
        for (i, j, x) in g.edges() {
            if i != j {
                let (src, dst) = if below(i, j) { (i, j) } else { (j, i) };
                let slot = fill[src as usize];
                targets[slot] = dst;
                mult[slot] = x;
                fill[src as usize] += 1;
            }
        }
        Oriented { offsets, targets, mult }
    }

    fn out(&self, v: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()].iter().copied().zip(self.mult[range].iter().copied())
    }

    /// Calls `visit(u, v, w, X_uv X_vw X_uw)` once per triangle.
    fn for_each_triangle(&self, n: usize, mut visit: impl FnMut(u32, u32, u32, u128)) {
        let mut mark = vec![0u32; n];
        for u in 0..n {
            for (w, x) in self.out(u) {
                mark[w as usize] = x;
            }
            for (v, x_uv) in self.out(u) {
                for (w, x_vw) in self.out(v as usize) {
                    let x_uw = mark[w as usize];
                    if x_uw > 0 {
                        visit(u as u32, v, w, x_uv as u128 * x_vw as u128 * x_uw as u128);
                    }
                }
            }
            for (w, _) in self.out(u) {
                mark[w as usize] = 0;
            }
        }
    }
}

/// `sum_{i<j<k} X_ij X_jk X_ik`; loops never contribute.
///
/// Degree-ordered orientation with a dense marker array, so the cost is
/// `O(sum over edges of the smaller endpoint's out-degree)`.
pub fn triangle_count(g: &MultiGraph) -> u128 {
    let adj = Oriented::build(g);
    let mut total = 0u128;
    adj.for_each_triangle(g.n(), |_, _, _, w| total += w);
    total
}

/// Triangles restricted to vertices whose `band` flag is set.
pub fn triangle_count_within(g: &MultiGraph, band: &[bool]) -> u128 {
    let adj = Oriented::build(g);
    let mut total = 0u128;
    adj.for_each_triangle(g.n(), |u, v, w, x| {
        if band[u as usize] && band[v as usize] && band[w as usize] {
            total += x;
        }
    });
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusteringResult {
    pub triangles: f64,
    pub wedge_sum: ExactSum,
    pub c_global: f64,
}

/// `6 * triangles / sum_i D_i (D_i - 1)` with the graph's own degrees.
/// Not clamped: multigraphs may exceed one.
pub fn clustering_global(g: &MultiGraph) -> Result<ClusteringResult> {
    let mut wedge = ExactSum::zero();
    for &d in g.degrees() {
        if d >= 2 {
            wedge.add(d as u128 * (d as u128 - 1));
        }
    }
    if wedge.to_biguint().is_zero() {
        return Err(Error::degenerate("no connected triples (wedge sum is zero)"));
    }
    let tri = triangle_count(g);
    let c = ratio(&(BigInt::from(tri) * 6), &wedge.to_bigint());
    Ok(ClusteringResult { triangles: tri as f64, wedge_sum: wedge, c_global: c })
}

/// Mean local clustering over vertices of degree at least two.
pub fn clustering_average(g: &MultiGraph) -> Result<f64> {
    if !g.is_simple() {
        return Err(Error::invalid("average clustering needs a simple graph"));
    }
    let n = g.n();
    let adj = Oriented::build(g);
    let mut local = vec![0u64; n];
    adj.for_each_triangle(n, |u, v, w, _| {
        local[u as usize] += 1;
        local[v as usize] += 1;
        local[w as usize] += 1;
    });
    let mut sum = 0.0;
    let mut count = 0usize;
    for (v, &d) in g.degrees().iter().enumerate() {
        if d >= 2 {
            let pairs = (d * (d - 1) / 2) as f64;
            sum += local[v] as f64 / pairs;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::degenerate("no vertex of degree at least two"));
    }
    Ok(sum / count as f64)
}
