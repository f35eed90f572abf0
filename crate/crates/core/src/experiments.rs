//! Monte Carlo experiments: scaling-exponent fits, limit-distribution
//! comparisons, conditional variance of Pearson in the CM, erased-edge sums,
//! the edge-probability approximation, truncated triangle expectations and
//! the joint behaviour of the three rescaled statistics.
//!
//! Replica `r` at size index `s` always draws from
//! [`replica_rng`]`(seed, s, r)` and results are collected in replica order,
//! so every summary is bit-for-bit independent of the thread count.

pub mod config;
pub mod summary;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use serde_json::{json, Value};

use crate::degree_model::{DegreeLaw, DegreeSequence};
use crate::error::{Error, Result};
use crate::graphs::{erase, generate_cm, generate_irg, ErasureReport, KernelSpec, MultiGraph};
use crate::integrals::{a_gamma, monte_carlo_triple, triple_integral, TripleIntegralSpec};
use crate::rng::{derive_seed, replica_rng, stream_rng, StreamRng};
use crate::stable_limits::{
    clustering_cm_scale, clustering_ecm_exponent, clustering_ecm_scale, normalized_degree_sum_reference,
    pearson_ecm_scale, sample_limits, LimitConstants, LimitSample, Norming,
};
use crate::statistics::{
    clustering_global, degree_power_sums, pearson, pearson_from_parts, triangle_count_within, ExactSum,
};

pub use config::{Check, ExperimentConfig, ExperimentKind, Model, Normalization, RunConfig, Statistic};
use summary::{ks_two_sample, ols, quantile_sorted, quantile_table, sorted, spearman_matrix};

const LANE_PAIRING: u64 = 0x7061_6972;

/// One replica's degree sequence and the graphs built from it.
pub struct Draw {
    pub degrees: DegreeSequence,
    pub cm: Option<MultiGraph>,
    pub ecm: Option<(MultiGraph, ErasureReport)>,
    pub irg: Option<MultiGraph>,
}

impl Draw {
    fn cm(&self) -> Result<&MultiGraph> {
        self.cm.as_ref().ok_or_else(|| Error::Experiment("statistic needs the CM graph".into()))
    }

    fn ecm(&self) -> Result<&(MultiGraph, ErasureReport)> {
        self.ecm.as_ref().ok_or_else(|| Error::Experiment("statistic needs the ECM graph".into()))
    }

    fn graph(&self, model: Model) -> Result<&MultiGraph> {
        match model {
            Model::Cm => self.cm(),
            Model::Ecm => Ok(&self.ecm()?.0),
            Model::Irg => self.irg.as_ref().ok_or_else(|| Error::Experiment("statistic needs the IRG graph".into())),
        }
    }
}

/// Samples degrees and, if `graphs` is set, the model graph. For the ECM the
/// underlying CM multigraph is kept as well.
pub fn draw(model: Model, law: &DegreeLaw, n: usize, kernel: &KernelSpec, graphs: bool, rng: &mut StreamRng) -> Result<Draw> {
    match model {
        Model::Cm | Model::Ecm => {
            let degrees = DegreeSequence::sample(law, n, rng);
            if !graphs {
                return Ok(Draw { degrees, cm: None, ecm: None, irg: None });
            }
            let cm = generate_cm(&degrees, rng)?;
            let ecm = (model == Model::Ecm).then(|| erase(&cm));
            Ok(Draw { degrees, cm: Some(cm), ecm, irg: None })
        }
        Model::Irg => {
            let degrees = DegreeSequence::sample_weights(law, n, rng);
            let irg = if graphs { Some(generate_irg(&degrees, kernel, law.mean(), rng)?) } else { None };
            Ok(Draw { degrees, cm: None, ecm: None, irg })
        }
    }
}

fn pearson_scale(model: Model, law: &DegreeLaw, n: usize) -> f64 {
    match model {
        Model::Cm => (n as f64).sqrt(),
        _ => pearson_ecm_scale(law, n),
    }
}

fn clustering_scale(model: Model, law: &DegreeLaw, n: usize) -> f64 {
    match model {
        Model::Cm => clustering_cm_scale(law, n),
        _ => clustering_ecm_scale(law, n),
    }
}

/// Everything needed to turn a [`Draw`] into one number.
#[derive(Debug, Clone, Copy)]
pub struct StatSpec {
    pub statistic: Statistic,
    pub model: Model,
    pub power: u32,
    pub normalization: Normalization,
    pub norming: Norming,
}

impl StatSpec {
    pub fn raw(statistic: Statistic, model: Model) -> Self {
        StatSpec { statistic, model, power: 2, normalization: Normalization::Raw, norming: Norming::Exact }
    }

    pub fn paper(statistic: Statistic, model: Model) -> Self {
        StatSpec { normalization: Normalization::Paper, ..Self::raw(statistic, model) }
    }

    fn from_config(c: &ExperimentConfig, model: Model) -> Result<Self> {
        let statistic = c.statistic.ok_or_else(|| Error::Config("statistic is required".into()))?;
        Ok(StatSpec { statistic, model, power: c.power, normalization: c.normalization, norming: c.norming })
    }

    fn needs_graph(&self) -> bool {
        self.statistic != Statistic::DegreePowerSum
    }

    /// The statistic on `d`; `Err(Degenerate)` when it is undefined.
    pub fn evaluate(&self, d: &Draw, law: &DegreeLaw, n: usize) -> Result<f64> {
        let paper = self.normalization == Normalization::Paper;
        let scaled = |x: f64, s: f64, multiply: bool| match (paper, multiply) {
            (false, _) => x,
            (true, true) => x * s,
            (true, false) => x / s,
        };
        use Statistic as S;
        Ok(match self.statistic {
            S::Pearson => scaled(pearson(d.graph(self.model)?)?.r, pearson_scale(self.model, law, n), true),
            S::PearsonAbs => scaled(pearson(d.graph(self.model)?)?.r.abs(), pearson_scale(self.model, law, n), true),
            S::PearsonCm => scaled(pearson(d.cm()?)?.r, pearson_scale(Model::Cm, law, n), true),
            S::PearsonEcm => scaled(pearson(&d.ecm()?.0)?.r, pearson_ecm_scale(law, n), true),
            S::ClusteringGlobal => {
                let c = clustering_global(d.graph(self.model)?)?.c_global;
                scaled(c, clustering_scale(self.model, law, n), false)
            }
            S::ClusteringCm => scaled(clustering_global(d.cm()?)?.c_global, clustering_cm_scale(law, n), false),
            S::ClusteringEcm => scaled(clustering_global(&d.ecm()?.0)?.c_global, clustering_ecm_scale(law, n), false),
            S::ErasedEdges => d.ecm()?.1.z_total as f64,
            S::DegreePowerSum => {
                let values = d.degrees.unadjusted_values();
                let s = degree_power_sums(&values, &[self.power])?[&self.power].to_f64();
                if paper {
                    s / normalized_degree_sum_reference(law, self.power, n, self.norming)?
                } else {
                    s
                }
            }
        })
    }

    /// The matching coordinate of a limit sample, when the statistic has one.
    pub fn limit_value(&self, c: &LimitConstants, s: &LimitSample) -> Option<f64> {
        use Statistic as S;
        let comp = s.composed(c);
        let clustering_cm = match self.norming {
            Norming::Exact => comp.clustering_cm_exact,
            Norming::StableClt => comp.clustering_cm,
        };
        match (self.statistic, self.model) {
            (S::Pearson | S::PearsonEcm, Model::Ecm | Model::Irg) => Some(comp.pearson_ecm),
            (S::PearsonAbs, Model::Ecm | Model::Irg) => Some(comp.pearson_ecm.abs()),
            (S::ClusteringCm, _) | (S::ClusteringGlobal, Model::Cm) => Some(clustering_cm),
            (S::ClusteringEcm, _) | (S::ClusteringGlobal, Model::Ecm | Model::Irg) => Some(comp.clustering_ecm),
            (S::DegreePowerSum, _) if crate::stable_limits::POWERS.contains(&self.power) => Some(s.s(self.power)),
            _ => None,
        }
    }
}

/// Runs `f` on replicas `0..replicas` of size index `size_index`, in parallel,
/// returning results in replica order.
pub fn replicate<T, F>(seed: u64, size_index: usize, replicas: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, size_index, r);
            f(&mut rng)
        })
        .collect()
}

/// One replica's outcome: a value or the reason it is undefined.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicaRecord {
    pub n: usize,
    pub replica: usize,
    pub value: Option<f64>,
    pub reason: Option<String>,
}

fn record(n: usize, replica: usize, r: Result<f64>) -> Result<ReplicaRecord> {
    match r {
        Ok(v) => Ok(ReplicaRecord { n, replica, value: Some(v), reason: None }),
        Err(e) if e.is_degenerate() => Ok(ReplicaRecord { n, replica, value: None, reason: Some(e.to_string()) }),
        Err(e) => Err(e),
    }
}

/// Values of one statistic over the replicas of each size.
pub fn collect_values(
    spec: &StatSpec,
    law: &DegreeLaw,
    kernel: &KernelSpec,
    sizes: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<Vec<ReplicaRecord>> {
    let mut out = Vec::with_capacity(sizes.len() * replicas);
    for (si, &n) in sizes.iter().enumerate() {
        let recs = replicate(seed, si, replicas, |rng| {
            let d = draw(spec.model, law, n, kernel, spec.needs_graph(), rng)?;
            Ok::<_, Error>(spec.evaluate(&d, law, n))
        });
        for (r, res) in recs.into_iter().enumerate() {
            out.push(record(n, r, res?)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub replicas: usize,
    pub count: usize,
    pub degenerate: usize,
    /// Median and quartiles of `|value|`.
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Fraction of values below zero.
    pub sign_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingResult {
    pub statistic: String,
    pub gamma: f64,
    pub sizes: Vec<SizeSummary>,
    /// OLS slope of `ln median |value|` against `ln n`.
    pub slope: f64,
    pub slope_se: f64,
    /// Set for the erased-edge exponent, whose sharpness is only conjectured.
    pub conjectural: bool,
}

fn size_summary(n: usize, values: &[f64], replicas: usize) -> Result<SizeSummary> {
    if values.is_empty() {
        return Err(Error::Experiment(format!("every replica at n = {n} is degenerate")));
    }
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let s = sorted(&abs);
    Ok(SizeSummary {
        n,
        replicas,
        count: values.len(),
        degenerate: replicas - values.len(),
        median: quantile_sorted(&s, 0.5),
        q25: quantile_sorted(&s, 0.25),
        q75: quantile_sorted(&s, 0.75),
        sign_fraction: values.iter().filter(|&&v| v < 0.0).count() as f64 / values.len() as f64,
    })
}

fn values_at(records: &[ReplicaRecord], n: usize) -> Vec<f64> {
    records.iter().filter(|r| r.n == n).filter_map(|r| r.value).collect()
}

/// Fits the log-log slope of per-size medians.
pub fn scaling_from_records(
    statistic: &str,
    gamma: f64,
    sizes: &[usize],
    replicas: usize,
    records: &[ReplicaRecord],
) -> Result<ScalingResult> {
    let summaries = sizes.iter().map(|&n| size_summary(n, &values_at(records, n), replicas)).collect::<Result<Vec<_>>>()?;
    if let Some(s) = summaries.iter().find(|s| !(s.median > 0.0)) {
        return Err(Error::Experiment(format!("median |{statistic}| is zero at n = {}; no log-log fit", s.n)));
    }
    let (slope, slope_se) = if summaries.len() >= 2 {
        let x: Vec<f64> = summaries.iter().map(|s| (s.n as f64).ln()).collect();
        let y: Vec<f64> = summaries.iter().map(|s| s.median.ln()).collect();
        ols(&x, &y)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ScalingResult {
        statistic: statistic.to_string(),
        gamma,
        sizes: summaries,
        slope,
        slope_se,
        conjectural: statistic == "erased_edges",
    })
}

pub fn run_scaling(cfg: &ExperimentConfig, seed: u64) -> Result<(ScalingResult, Vec<ReplicaRecord>)> {
    let law = DegreeLaw::new(cfg.gamma, cfg.scale)?;
    let spec = StatSpec::from_config(cfg, cfg.model)?;
    let kernel = cfg.kernel_spec()?;
    let records = collect_values(&spec, &law, &kernel, &cfg.sizes, cfg.replicas, seed)?;
    let res = scaling_from_records(spec.statistic.name(), cfg.gamma, &cfg.sizes, cfg.replicas, &records)?;
    Ok((res, records))
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionAtSize {
    pub n: usize,
    pub count: usize,
    pub degenerate: usize,
    pub reference_count: usize,
    pub ks: f64,
    /// 5/25/50/75/95% quantiles.
    pub quantiles: [f64; 5],
    pub reference_quantiles: [f64; 5],
    /// `max_q |empirical - reference| / |reference|` over the five levels.
    pub quantile_relative: f64,
    pub sign_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionResult {
    pub statistic: String,
    pub model: Model,
    /// `limit` or `model:<name>`.
    pub reference: String,
    pub sizes: Vec<DistributionAtSize>,
}

fn compare(n: usize, values: &[f64], degenerate: usize, reference: &[f64]) -> DistributionAtSize {
    let quantiles = quantile_table(values);
    let reference_quantiles = quantile_table(reference);
    let quantile_relative = quantiles
        .iter()
        .zip(&reference_quantiles)
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max);
    DistributionAtSize {
        n,
        count: values.len(),
        degenerate,
        reference_count: reference.len(),
        ks: ks_two_sample(values, reference),
        quantiles,
        reference_quantiles,
        quantile_relative,
        sign_fraction: values.iter().filter(|&&v| v < 0.0).count() as f64 / values.len() as f64,
    }
}

/// Limit constants with the ECM `A_gamma` or, for IRG, the kernel integral.
fn limit_constants(law: &DegreeLaw, model: Model, kernel: &KernelSpec) -> Result<LimitConstants> {
    let a = match model {
        Model::Irg => triple_integral(&TripleIntegralSpec::new(law.gamma(), kernel.clone()))?.value,
        _ => a_gamma(law.gamma(), 1e-10)?.value,
    };
    LimitConstants::new(law, a)
}

/// Coupled limit samples of `(S_{g/2}, S_{g/3}, S_{g/4}, S_{g/6})`.
pub fn limit_draws(gamma: f64, truncation: usize, count: usize, seed: u64) -> Result<Vec<LimitSample>> {
    sample_limits(gamma, truncation, count, derive_seed(seed, 0x6c))
}

pub fn run_distribution(cfg: &ExperimentConfig, seed: u64) -> Result<(DistributionResult, Vec<ReplicaRecord>)> {
    let law = DegreeLaw::new(cfg.gamma, cfg.scale)?;
    let spec = StatSpec::from_config(cfg, cfg.model)?;
    let kernel = cfg.kernel_spec()?;
    let records = collect_values(&spec, &law, &kernel, &cfg.sizes, cfg.replicas, seed)?;
    let mut sizes = Vec::new();
    let reference_name;
    match cfg.compare_model {
        Some(other) => {
            reference_name = format!("model:{}", serde_json::to_value(other)?.as_str().unwrap_or("?"));
            let ref_spec = StatSpec { model: other, ..spec };
            let ref_records = collect_values(&ref_spec, &law, &kernel, &cfg.sizes, cfg.replicas, derive_seed(seed, 0x72))?;
            for &n in &cfg.sizes {
                let v = values_at(&records, n);
                let w = values_at(&ref_records, n);
                if v.is_empty() || w.is_empty() {
                    return Err(Error::Experiment(format!("every replica at n = {n} is degenerate")));
                }
                sizes.push(compare(n, &v, cfg.replicas - v.len(), &w));
            }
        }
        None => {
            reference_name = "limit".to_string();
            let consts = limit_constants(&law, cfg.model, &kernel)?;
            let limit: Vec<f64> = limit_draws(cfg.gamma, cfg.truncation, cfg.limit_samples, seed)?
                .iter()
                .map(|s| spec.limit_value(&consts, s))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::Config(format!("statistic {} has no limit law here", spec.statistic.name())))?;
            for &n in &cfg.sizes {
                let v = values_at(&records, n);
                if v.is_empty() {
                    return Err(Error::Experiment(format!("every replica at n = {n} is degenerate")));
                }
                sizes.push(compare(n, &v, cfg.replicas - v.len(), &limit));
            }
        }
    }
    let res = DistributionResult { statistic: spec.statistic.name().into(), model: cfg.model, reference: reference_name, sizes };
    Ok((res, records))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalVarianceResult {
    pub n: usize,
    pub pairings: usize,
    pub l: u64,
    /// `n` times the sample variance of `r` over the pairings.
    pub estimate: f64,
    /// `(n / L)(2 - sum D^6 / (sum D^3)^2)`.
    pub prediction: f64,
    pub ratio: f64,
    /// `n Var(r)` under the uniform matching, from the exact pair covariances.
    pub exact: f64,
    /// `2 n / L`, the leading term of `exact`.
    pub leading_term: f64,
}

fn stub_array(deg: &[u64]) -> Vec<u32> {
    let mut stubs = Vec::with_capacity(deg.iter().sum::<u64>() as usize);
    for (v, &d) in deg.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v as u32, d as usize));
    }
    stubs
}

/// Exact `Var(sum over matched stub pairs of d_s d_t)` for a uniform perfect
/// matching of `L` stubs with weights `d_s`.
///
/// With `p = 1/(L-1)` and `q = 1/((L-1)(L-3))`: a pair is matched with
/// probability `p`, two disjoint pairs jointly with `q`, and two pairs that
/// share a stub never.
fn matching_variance(deg: &[u64]) -> f64 {
    let l: f64 = deg.iter().map(|&d| d as f64).sum();
    // stub power sums: sum_s d_s^k = sum_i D_i^(k+1)
    let (mut a, mut b, mut c4) = (0.0f64, 0.0f64, 0.0f64);
    for &d in deg {
        let x = d as f64;
        a += x * x;
        b += x * x * x;
        c4 += x.powi(5);
    }
    let w = 0.5 * (a * a - b);
    let sq = 0.5 * (b * b - c4);
    // ordered pairs of distinct pairs sharing a stub: sum_s d_s^2 ((a - d_s)^2 - (b - d_s^2))
    let mut shared = 0.0;
    for &d in deg {
        let x = d as f64;
        shared += x * x * x * ((a - x).powi(2) - (b - x * x));
    }
    let p = 1.0 / (l - 1.0);
    let q_minus_p2 = 2.0 / ((l - 1.0).powi(2) * (l - 3.0));
    sq * p * (1.0 - p) + (w * w - sq - shared) * q_minus_p2 - shared * p * p
}

/// Resamples CM pairings of a fixed sequence and estimates `n Var_n(r_n)`.
pub fn run_conditional_variance(seq: &DegreeSequence, pairings: usize, seed: u64) -> Result<ConditionalVarianceResult> {
    if seq.total() % 2 == 1 {
        return Err(Error::invalid("stub total is odd"));
    }
    let deg = seq.values();
    let n = deg.len();
    // fails with Degenerate on constant degrees
    let base = pearson_from_parts(deg, ExactSum::zero())?;
    let stubs = stub_array(deg);
    let rs: Vec<f64> = (0..pairings)
        .into_par_iter()
        .map(|m| {
            let mut rng = stream_rng(seed, LANE_PAIRING, m as u64);
            let mut s = stubs.clone();
            s.shuffle(&mut rng);
            let mut e = ExactSum::zero();
            for pair in s.chunks_exact(2) {
                e.add(2 * deg[pair[0] as usize] as u128 * deg[pair[1] as usize] as u128);
            }
            pearson_from_parts(deg, e).map(|p| p.r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = rs.iter().sum::<f64>() / pairings as f64;
    let var = rs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (pairings as f64 - 1.0);
    let l = seq.total();
    let lf = l as f64;
    let s3 = base.s3.to_f64();
    let s6 = degree_power_sums(deg, &[6])?[&6].to_f64();
    let prediction = n as f64 / lf * (2.0 - s6 / (s3 * s3));
    let den = lf * s3 - base.s2.to_f64().powi(2);
    let exact = n as f64 * 4.0 * lf * lf * matching_variance(deg) / (den * den);
    Ok(ConditionalVarianceResult {
        n,
        pairings,
        l,
        estimate: n as f64 * var,
        prediction,
        ratio: n as f64 * var / prediction,
        exact,
        leading_term: 2.0 * n as f64 / lf,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDeviation {
    pub i: u32,
    pub j: u32,
    pub d_i: u64,
    pub d_j: u64,
    pub empirical: f64,
    pub approximation: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeProbabilityResult {
    pub pairings: usize,
    pub pairs: Vec<PairDeviation>,
    pub p95: f64,
    pub max: f64,
    /// `sum D_i D_j |dev| / sum D_i D_j` over the sampled pairs.
    pub weighted: f64,
    /// The two largest degrees; `None` if the sequence has one vertex.
    pub hub: Option<PairDeviation>,
}

/// Samples up to `count` distinct vertex pairs with probability proportional
/// to `D_i D_j`, by drawing two uniform stubs.
fn sample_pairs(deg: &[u64], stubs: &[u32], count: usize, rng: &mut StreamRng) -> Vec<(u32, u32)> {
    let distinct_possible = deg.len() * deg.len().saturating_sub(1) / 2;
    let want = count.min(distinct_possible);
    let mut seen = rustc_hash::FxHashSet::default();
    let mut out = Vec::new();
    let mut attempts = 0usize;
    while out.len() < want && attempts < 1000 * want.max(1) {
        attempts += 1;
        let a = stubs[rng.random_range(0..stubs.len())];
        let b = stubs[rng.random_range(0..stubs.len())];
        if a != b && seen.insert((a.min(b), a.max(b))) {
            out.push((a.min(b), a.max(b)));
        }
    }
    out
}

/// Empirical `P_n(X_ij > 0)` over `pairings` CM pairings against
/// `1 - exp(-D_i D_j / L_n)`.
pub fn check_edge_probability(seq: &DegreeSequence, pairs: usize, pairings: usize, seed: u64) -> Result<EdgeProbabilityResult> {
    if seq.total() % 2 == 1 {
        return Err(Error::invalid("stub total is odd"));
    }
    let deg = seq.values();
    let stubs = stub_array(deg);
    let mut rng = stream_rng(seed, LANE_PAIRING, u64::MAX);
    let mut tracked = sample_pairs(deg, &stubs, pairs, &mut rng);
    let sampled = tracked.len();
    let hub = (deg.len() >= 2).then(|| {
        let mut idx: Vec<u32> = (0..deg.len() as u32).collect();
        idx.sort_by_key(|&v| (std::cmp::Reverse(deg[v as usize]), v));
        (idx[0].min(idx[1]), idx[0].max(idx[1]))
    });
    let hub_index = hub.map(|h| match tracked.iter().position(|&p| p == h) {
        Some(k) => k,
        None => {
            tracked.push(h);
            tracked.len() - 1
        }
    });
    let index: FxHashMap<(u32, u32), usize> = tracked.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut marked = vec![false; deg.len()];
    for &(a, b) in &tracked {
        marked[a as usize] = true;
        marked[b as usize] = true;
    }
    let counts: Vec<Vec<u64>> = (0..pairings)
        .into_par_iter()
        .map(|m| {
            let mut rng = stream_rng(seed, LANE_PAIRING, m as u64);
            let mut s = stubs.clone();
            s.shuffle(&mut rng);
            let mut hit = vec![0u64; tracked.len()];
            for pair in s.chunks_exact(2) {
                let (a, b) = (pair[0], pair[1]);
                if a != b && marked[a as usize] && marked[b as usize] {
                    if let Some(&k) = index.get(&(a.min(b), a.max(b))) {
                        hit[k] = 1;
                    }
                }
            }
            hit
        })
        .collect();
    let mut totals = vec![0u64; tracked.len()];
    for h in &counts {
        for (t, x) in totals.iter_mut().zip(h) {
            *t += x;
        }
    }
    let l = seq.total() as f64;
    let devs: Vec<PairDeviation> = tracked
        .iter()
        .zip(&totals)
        .map(|(&(i, j), &c)| {
            let (d_i, d_j) = (deg[i as usize], deg[j as usize]);
            let empirical = c as f64 / pairings as f64;
            let approximation = -(-(d_i as f64) * d_j as f64 / l).exp_m1();
            PairDeviation { i, j, d_i, d_j, empirical, approximation, deviation: (empirical - approximation).abs() }
        })
        .collect();
    let hub = hub_index.map(|k| devs[k].clone());
    let body = &devs[..sampled];
    let abs: Vec<f64> = body.iter().map(|p| p.deviation).collect();
    let (p95, max) = if abs.is_empty() {
        (0.0, 0.0)
    } else {
        let s = sorted(&abs);
        (quantile_sorted(&s, 0.95), s[s.len() - 1])
    };
    let wsum: f64 = body.iter().map(|p| p.d_i as f64 * p.d_j as f64).sum();
    let weighted = if wsum > 0.0 {
        body.iter().map(|p| p.d_i as f64 * p.d_j as f64 * p.deviation).sum::<f64>() / wsum
    } else {
        0.0
    };
    Ok(EdgeProbabilityResult { pairings, pairs: body.to_vec(), p95, max, weighted, hub })
}

/// `sum_{i<j<k}` over vertices with degree in `[eps sqrt(mu n), sqrt(mu n)/eps]`
/// of `prod (1 - exp(-D_a D_b / denom))`, where `denom` is `mu n` when
/// `use_mu` is set and `L_n` otherwise.
pub fn expected_triangles_truncated(seq: &DegreeSequence, epsilon: f64, mu: f64, use_mu: bool) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0,1)")));
    }
    let n = seq.len() as f64;
    let root = (mu * n).sqrt();
    let (lo, hi) = (epsilon * root, root / epsilon);
    let band: Vec<f64> = seq.values().iter().map(|&d| d as f64).filter(|&d| d >= lo && d <= hi).collect();
    let denom = if use_mu { mu * n } else { seq.total() as f64 };
    let p = |a: f64, b: f64| -(-a * b / denom).exp_m1();
    let m = band.len();
    let mut total = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let pij = p(band[i], band[j]);
            let mut inner = 0.0;
            for k in j + 1..m {
                inner += p(band[i], band[k]) * p(band[j], band[k]);
            }
            total += pij * inner;
        }
    }
    Ok(total)
}

fn band_flags(seq: &DegreeSequence, epsilon: f64, mu: f64) -> Vec<bool> {
    let root = (mu * seq.len() as f64).sqrt();
    seq.values().iter().map(|&d| (d as f64) >= epsilon * root && (d as f64) <= root / epsilon).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncatedTrianglesAtSize {
    pub n: usize,
    pub replicas: usize,
    /// Median over replicas of ECM band triangles / g-sum (replicas with g = 0 skipped).
    pub median_ratio: f64,
    /// Median of `|g - f| / f`.
    pub median_relative_difference: f64,
    pub median_band_size: f64,
    pub skipped: usize,
}

pub fn run_truncated_triangles(cfg: &ExperimentConfig, seed: u64) -> Result<(Vec<TruncatedTrianglesAtSize>, Vec<Value>)> {
    let law = DegreeLaw::new(cfg.gamma, cfg.scale)?;
    let mu = law.mean();
    let mut out = Vec::new();
    let mut records = Vec::new();
    for (si, &n) in cfg.sizes.iter().enumerate() {
        let per = replicate(seed, si, cfg.replicas, |rng| -> Result<(f64, f64, f64, usize)> {
            let d = draw(Model::Ecm, &law, n, &KernelSpec::Poisson, true, rng)?;
            let g = expected_triangles_truncated(&d.degrees, cfg.epsilon, mu, false)?;
            let f = expected_triangles_truncated(&d.degrees, cfg.epsilon, mu, true)?;
            let flags = band_flags(&d.degrees, cfg.epsilon, mu);
            let t = triangle_count_within(&d.ecm()?.0, &flags) as f64;
            Ok((g, f, t, flags.iter().filter(|&&b| b).count()))
        });
        let mut ratios = Vec::new();
        let mut rel = Vec::new();
        let mut bands = Vec::new();
        for (r, res) in per.into_iter().enumerate() {
            let (g, f, t, m) = res?;
            records.push(json!({"n": n, "replica": r, "g": g, "f": f, "triangles": t, "band": m}));
            bands.push(m as f64);
            if g > 0.0 && f > 0.0 {
                ratios.push(t / g);
                rel.push((g - f).abs() / f);
            }
        }
        if ratios.is_empty() {
            return Err(Error::Experiment(format!("empty degree band in every replica at n = {n}")));
        }
        out.push(TruncatedTrianglesAtSize {
            n,
            replicas: cfg.replicas,
            median_ratio: quantile_sorted(&sorted(&ratios), 0.5),
            median_relative_difference: quantile_sorted(&sorted(&rel), 0.5),
            median_band_size: quantile_sorted(&sorted(&bands), 0.5),
            skipped: cfg.replicas - ratios.len(),
        });
    }
    Ok((out, records))
}

#[derive(Debug, Clone, Serialize)]
pub struct ErasedSeries {
    pub label: String,
    /// Exponent bound `p/gamma + 2 - gamma`.
    pub exponent: f64,
    pub scaling: ScalingResult,
}

/// Per replica: `sum_i D_i^p Y*_i` for `p = 0, 1, 2` (stub-accurate removed
/// stubs) and `sum_{i<j} Z_ij D_i D_j`, each fitted against `n`.
pub fn run_erased_sums(cfg: &ExperimentConfig, seed: u64) -> Result<(Vec<ErasedSeries>, Vec<Value>)> {
    let law = DegreeLaw::new(cfg.gamma, cfg.scale)?;
    let g = cfg.gamma;
    let mut recs: Vec<Vec<ReplicaRecord>> = vec![Vec::new(); 5];
    let mut raw = Vec::new();
    for (si, &n) in cfg.sizes.iter().enumerate() {
        let per = replicate(seed, si, cfg.replicas, |rng| -> Result<[f64; 5]> {
            let d = draw(Model::Ecm, &law, n, &KernelSpec::Poisson, true, rng)?;
            let (_, report) = d.ecm()?;
            let deg = d.degrees.values();
            let mut s = [0.0f64; 5];
            for (i, &y) in report.removed_stubs.iter().enumerate() {
                let di = deg[i] as f64;
                let y = y as f64;
                s[0] += y;
                s[1] += di * y;
                s[2] += di * di * y;
            }
            for (i, j, z) in report.sorted_pairs() {
                if i != j {
                    s[3] += z as f64 * deg[i as usize] as f64 * deg[j as usize] as f64;
                }
            }
            s[4] = report.z_total as f64;
            Ok(s)
        });
        for (r, res) in per.into_iter().enumerate() {
            let s = res?;
            raw.push(json!({"n": n, "replica": r, "y0": s[0], "y1": s[1], "y2": s[2], "zdd": s[3], "z": s[4]}));
            for k in 0..5 {
                recs[k].push(ReplicaRecord { n, replica: r, value: Some(s[k]), reason: None });
            }
        }
    }
    let labels = ["sum_y", "sum_d_y", "sum_d2_y", "sum_z_dd", "erased_edges"];
    let exps = [2.0 - g, 1.0 / g + 2.0 - g, 2.0 / g + 2.0 - g, 2.0 / g + 2.0 - g, 2.0 - g];
    let mut series = Vec::new();
    for k in 0..5 {
        series.push(ErasedSeries {
            label: labels[k].into(),
            exponent: exps[k],
            scaling: scaling_from_records(labels[k], g, &cfg.sizes, cfg.replicas, &recs[k])?,
        });
    }
    Ok((series, raw))
}

#[derive(Debug, Clone, Serialize)]
pub struct JointResult {
    pub n: usize,
    pub replicas: usize,
    pub degenerate: usize,
    /// Order: rescaled ECM Pearson, rescaled CM clustering, rescaled ECM clustering.
    pub empirical_spearman: [[f64; 3]; 3],
    pub limit_spearman: [[f64; 3]; 3],
    pub max_abs_difference: f64,
    /// Every limit triple has signs `(-, +, +)`.
    pub limit_signs_ok: bool,
    pub limit_samples: usize,
}

/// The three statistics on one shared CM/ECM draw, under paper normalization.
pub fn joint_triple(d: &Draw, law: &DegreeLaw, n: usize) -> Result<[f64; 3]> {
    Ok([
        StatSpec::paper(Statistic::PearsonEcm, Model::Ecm).evaluate(d, law, n)?,
        StatSpec::paper(Statistic::ClusteringCm, Model::Ecm).evaluate(d, law, n)?,
        StatSpec::paper(Statistic::ClusteringEcm, Model::Ecm).evaluate(d, law, n)?,
    ])
}

pub fn run_joint(cfg: &ExperimentConfig, seed: u64) -> Result<(JointResult, Vec<Value>)> {
    let law = DegreeLaw::new(cfg.gamma, cfg.scale)?;
    let n = *cfg.sizes.last().expect("validated");
    let si = cfg.sizes.len() - 1;
    let per = replicate(seed, si, cfg.replicas, |rng| -> Result<Result<[f64; 3]>> {
        let d = draw(Model::Ecm, &law, n, &KernelSpec::Poisson, true, rng)?;
        Ok(joint_triple(&d, &law, n))
    });
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (r, res) in per.into_iter().enumerate() {
        match res? {
            Ok(t) => {
                records.push(json!({"n": n, "replica": r, "values": t}));
                rows.push(t);
            }
            Err(e) if e.is_degenerate() => records.push(json!({"n": n, "replica": r, "values": null, "reason": e.to_string()})),
            Err(e) => return Err(e),
        }
    }
    if rows.len() < 3 {
        return Err(Error::Experiment(format!("fewer than three usable replicas at n = {n}")));
    }
    let consts = limit_constants(&law, Model::Ecm, &KernelSpec::Poisson)?;
    let limit: Vec<[f64; 3]> = limit_draws(cfg.gamma, cfg.truncation, cfg.limit_samples, seed)?
        .iter()
        .map(|s| {
            let c = s.composed(&consts);
            [c.pearson_ecm, c.clustering_cm_exact, c.clustering_ecm]
        })
        .collect();
    let limit_signs_ok = limit.iter().all(|t| t[0] < 0.0 && t[1] > 0.0 && t[2] > 0.0);
    let e = spearman_matrix(&rows);
    let l = spearman_matrix(&limit);
    let mut max_abs_difference: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            max_abs_difference = max_abs_difference.max((e[a][b] - l[a][b]).abs());
        }
    }
    Ok((
        JointResult {
            n,
            replicas: cfg.replicas,
            degenerate: cfg.replicas - rows.len(),
            empirical_spearman: e,
            limit_spearman: l,
            max_abs_difference,
            limit_signs_ok,
            limit_samples: limit.len(),
        },
        records,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub statistic: String,
    pub points: Vec<ScalingResult>,
    /// The predicted exponent at each gamma.
    pub predicted: Vec<f64>,
    pub argmax_gamma: f64,
    pub max_slope: f64,
}

/// Scaling fits over a grid of exponents; gamma `k` uses an independent master seed.
pub fn run_gamma_sweep(cfg: &ExperimentConfig, seed: u64) -> Result<SweepResult> {
    let mut points = Vec::new();
    for (k, &g) in cfg.gammas.iter().enumerate() {
        let sub = ExperimentConfig { gamma: g, kind: ExperimentKind::Scaling, checks: Vec::new(), ..cfg.clone() };
        points.push(run_scaling(&sub, derive_seed(seed, k as u64))?.0);
    }
    let best = points.iter().enumerate().max_by(|a, b| a.1.slope.total_cmp(&b.1.slope)).map(|(k, _)| k).expect("non-empty");
    let statistic = cfg.statistic.map(|s| s.name()).unwrap_or("").to_string();
    let predicted = cfg
        .gammas
        .iter()
        .map(|&g| match cfg.statistic {
            Some(Statistic::ClusteringEcm) => clustering_ecm_exponent(g),
            Some(Statistic::ClusteringCm) => 4.0 / g - 3.0,
            Some(Statistic::PearsonEcm | Statistic::PearsonAbs) => 1.0 / g - 1.0,
            Some(Statistic::ErasedEdges) => 2.0 - g,
            _ => f64::NAN,
        })
        .collect();
    Ok(SweepResult { statistic, argmax_gamma: cfg.gammas[best], max_slope: points[best].slope, points, predicted })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralCheck {
    pub gamma: f64,
    /// `A_gamma` from integrating one coordinate out exactly.
    pub a_gamma: f64,
    /// Generic kernel triple integral with the Poisson kernel.
    pub generic: f64,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub monte_carlo_se: f64,
    pub quadrature_error: f64,
}

pub fn run_integrals(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<IntegralCheck>> {
    cfg.gammas
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let a = a_gamma(g, cfg.tolerance)?;
            let t = triple_integral(&TripleIntegralSpec::poisson(g).with_tolerance(cfg.tolerance))?;
            let mc = monte_carlo_triple(g, &KernelSpec::Poisson, None, cfg.mc_samples, derive_seed(seed, k as u64))?;
            Ok(IntegralCheck {
                gamma: g,
                a_gamma: a.value,
                generic: t.value,
                closed_form: crate::integrals::a_gamma_closed_form(g),
                monte_carlo: mc.value,
                monte_carlo_se: mc.error,
                quadrature_error: a.error + t.error,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub passed: bool,
    pub observed: Value,
    pub detail: String,
}

fn outcome(check: &Check, passed: bool, observed: Value, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome { check: check.name().into(), passed, observed, detail: detail.into() }
}

fn within(x: f64, min: Option<f64>, max: Option<f64>) -> bool {
    x.is_finite() && min.is_none_or(|m| x >= m) && max.is_none_or(|m| x <= m)
}

/// Result of one configured experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub name: String,
    pub kind: ExperimentKind,
    pub tag: Option<String>,
    pub summary: Value,
    #[serde(skip)]
    pub records: Vec<Value>,
    #[serde(skip)]
    pub csv: String,
    pub checks: Vec<CheckOutcome>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn scaling_csv(rows: &[&ScalingResult]) -> String {
    let mut s = String::from("statistic,gamma,n,count,degenerate,median,q25,q75,sign_fraction,slope,slope_se\n");
    for r in rows {
        for z in &r.sizes {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.statistic, r.gamma, z.n, z.count, z.degenerate, z.median, z.q25, z.q75, z.sign_fraction, r.slope, r.slope_se
            ));
        }
    }
    s
}

fn to_values<T: Serialize>(items: &[T]) -> Vec<Value> {
    items.iter().map(|x| serde_json::to_value(x).expect("serializes")).collect()
}

/// Runs one experiment and evaluates its checks.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut checks = Vec::new();
    let (summary, records, csv) = match cfg.kind {
        ExperimentKind::Scaling => {
            let (res, recs) = run_scaling(cfg, seed)?;
            for c in &cfg.checks {
                checks.push(match c {
                    Check::Slope { min, max } => outcome(c, within(res.slope, *min, *max), json!(res.slope), format!("slope {:.4} +- {:.4}", res.slope, res.slope_se)),
                    Check::SignFraction { n, min } => sign_check(c, &res.sizes.iter().map(|s| (s.n, s.sign_fraction)).collect::<Vec<_>>(), *n, *min),
                    _ => unreachable!("validated"),
                });
            }
            let csv = scaling_csv(&[&res]);
            (serde_json::to_value(&res)?, to_values(&recs), csv)
        }
        ExperimentKind::Distribution => {
            let (res, recs) = run_distribution(cfg, seed)?;
            let last = res.sizes.last().expect("validated");
            for c in &cfg.checks {
                checks.push(match c {
                    Check::Ks { max } => outcome(c, last.ks <= *max, json!(last.ks), format!("KS {:.4} at n = {}", last.ks, last.n)),
                    Check::QuantileRelative { max } => outcome(c, last.quantile_relative <= *max, json!(last.quantile_relative), format!("n = {}", last.n)),
                    Check::SignFraction { n, min } => sign_check(c, &res.sizes.iter().map(|s| (s.n, s.sign_fraction)).collect::<Vec<_>>(), *n, *min),
                    _ => unreachable!("validated"),
                });
            }
            let mut csv = String::from("n,level,empirical,reference,ks\n");
            for s in &res.sizes {
                for (k, q) in summary::QUANTILE_LEVELS.iter().enumerate() {
                    csv.push_str(&format!("{},{},{},{},{}\n", s.n, q, s.quantiles[k], s.reference_quantiles[k], s.ks));
                }
            }
            (serde_json::to_value(&res)?, to_values(&recs), csv)
        }
        ExperimentKind::ConditionalVariance => {
            let law = DegreeLaw::new(cfg.gamma, cfg.scale)?;
            let n = cfg.sizes[0];
            let seq = DegreeSequence::sample(&law, n, &mut replica_rng(seed, 0, 0));
            let res = run_conditional_variance(&seq, cfg.pairings, seed)?;
            for c in &cfg.checks {
                if let Check::Ratio { min, max } = c {
                    checks.push(outcome(c, within(res.ratio, Some(*min), Some(*max)), json!(res.ratio), format!("estimate {:.4}, prediction {:.4}, exact {:.4}", res.estimate, res.prediction, res.exact)));
                }
            }
            let csv = format!("n,pairings,l,estimate,prediction,ratio,exact,leading_term\n{},{},{},{},{},{},{},{}\n", res.n, res.pairings, res.l, res.estimate, res.prediction, res.ratio, res.exact, res.leading_term);
            (serde_json::to_value(&res)?, Vec::new(), csv)
        }
        ExperimentKind::EdgeProbability => {
            let law = DegreeLaw::new(cfg.gamma, cfg.scale)?;
            let seq = DegreeSequence::sample(&law, cfg.sizes[0], &mut replica_rng(seed, 0, 0));
            let res = check_edge_probability(&seq, cfg.pairs, cfg.pairings, seed)?;
            for c in &cfg.checks {
                if let Check::Deviation { q, max } = c {
                    let s = sorted(&res.pairs.iter().map(|p| p.deviation).collect::<Vec<_>>());
                    let v = if s.is_empty() { 0.0 } else { quantile_sorted(&s, *q) };
                    checks.push(outcome(c, v <= *max, json!(v), format!("quantile {q} of |deviation|")));
                }
            }
            let mut csv = String::from("i,j,d_i,d_j,empirical,approximation,deviation\n");
            for p in res.pairs.iter().chain(res.hub.iter()) {
                csv.push_str(&format!("{},{},{},{},{},{},{}\n", p.i, p.j, p.d_i, p.d_j, p.empirical, p.approximation, p.deviation));
            }
            (serde_json::to_value(&res)?, Vec::new(), csv)
        }
        ExperimentKind::TruncatedTriangles => {
            let (res, recs) = run_truncated_triangles(cfg, seed)?;
            let last = res.last().expect("validated");
            for c in &cfg.checks {
                checks.push(match c {
                    Check::Ratio { min, max } => outcome(c, within(last.median_ratio, Some(*min), Some(*max)), json!(last.median_ratio), format!("n = {}", last.n)),
                    Check::RelativeDifference { max } => outcome(c, last.median_relative_difference <= *max, json!(last.median_relative_difference), format!("n = {}", last.n)),
                    _ => unreachable!("validated"),
                });
            }
            let mut csv = String::from("n,median_ratio,median_relative_difference,median_band_size,skipped\n");
            for r in &res {
                csv.push_str(&format!("{},{},{},{},{}\n", r.n, r.median_ratio, r.median_relative_difference, r.median_band_size, r.skipped));
            }
            (json!(res), recs, csv)
        }
        ExperimentKind::ErasedSums => {
            let (res, recs) = run_erased_sums(cfg, seed)?;
            for c in &cfg.checks {
                if let Check::ErasedSumBounds { margin } = c {
                    let bad: Vec<String> = res
                        .iter()
                        .filter(|s| s.label.starts_with("sum_") && !(s.scaling.slope <= s.exponent + margin))
                        .map(|s| format!("{} slope {:.3} > {:.3}", s.label, s.scaling.slope, s.exponent + margin))
                        .collect();
                    let slopes: BTreeMap<&str, f64> = res.iter().map(|s| (s.label.as_str(), s.scaling.slope)).collect();
                    checks.push(outcome(c, bad.is_empty(), json!(slopes), bad.join("; ")));
                }
            }
            let csv = scaling_csv(&res.iter().map(|s| &s.scaling).collect::<Vec<_>>());
            (json!(res), recs, csv)
        }
        ExperimentKind::Joint => {
            let (res, recs) = run_joint(cfg, seed)?;
            for c in &cfg.checks {
                if let Check::Spearman { max } = c {
                    checks.push(outcome(c, res.max_abs_difference <= *max, json!(res.max_abs_difference), format!("n = {}", res.n)));
                }
            }
            let mut csv = String::from("source,row,col,spearman\n");
            for (name, m) in [("empirical", res.empirical_spearman), ("limit", res.limit_spearman)] {
                for (a, row) in m.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        csv.push_str(&format!("{name},{a},{b},{v}\n"));
                    }
                }
            }
            (serde_json::to_value(&res)?, recs, csv)
        }
        ExperimentKind::GammaSweep => {
            let res = run_gamma_sweep(cfg, seed)?;
            for c in &cfg.checks {
                checks.push(match c {
                    Check::ArgmaxGamma { min, max } => outcome(c, within(res.argmax_gamma, Some(*min), Some(*max)), json!(res.argmax_gamma), format!("max slope {:.4}", res.max_slope)),
                    Check::MaxSlope { min, max } => outcome(c, within(res.max_slope, Some(*min), Some(*max)), json!(res.max_slope), format!("at gamma {}", res.argmax_gamma)),
                    _ => unreachable!("validated"),
                });
            }
            let csv = scaling_csv(&res.points.iter().collect::<Vec<_>>());
            (serde_json::to_value(&res)?, Vec::new(), csv)
        }
        ExperimentKind::Integral => {
            let res = run_integrals(cfg, seed)?;
            for c in &cfg.checks {
                if let Check::IntegralAgreement { max_abs, sigmas } = c {
                    let bad: Vec<String> = res
                        .iter()
                        .filter(|r| {
                            let err = (r.monte_carlo_se.powi(2) + r.quadrature_error.powi(2)).sqrt();
                            !((r.a_gamma - r.generic).abs() <= *max_abs && (r.monte_carlo - r.a_gamma).abs() <= sigmas * err)
                        })
                        .map(|r| format!("gamma {}", r.gamma))
                        .collect();
                    checks.push(outcome(c, bad.is_empty(), json!(bad), bad.join("; ")));
                }
            }
            let mut csv = String::from("gamma,a_gamma,generic,closed_form,monte_carlo,monte_carlo_se\n");
            for r in &res {
                csv.push_str(&format!("{},{},{},{},{},{}\n", r.gamma, r.a_gamma, r.generic, r.closed_form, r.monte_carlo, r.monte_carlo_se));
            }
            (json!(res), Vec::new(), csv)
        }
    };
    Ok(ExperimentOutput { name: cfg.name.clone(), kind: cfg.kind, tag: cfg.tag.clone(), summary, records, csv, checks })
}

fn sign_check(c: &Check, per_size: &[(usize, f64)], n: Option<usize>, min: f64) -> CheckOutcome {
    let rows: Vec<&(usize, f64)> = per_size.iter().filter(|(m, _)| n.is_none_or(|n| *m == n)).collect();
    if rows.is_empty() {
        return outcome(c, false, Value::Null, format!("size {n:?} not in the experiment"));
    }
    let worst = rows.iter().map(|(_, f)| *f).fold(f64::INFINITY, f64::min);
    outcome(c, worst >= min, json!(worst), "fraction of negative values")
}
