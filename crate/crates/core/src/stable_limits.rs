//! Gamma-series representation of the one-sided stable limits and the
//! composed limit variables for Pearson and clustering.
//!
//! `S_{gamma/p} = sum_i Gamma_i^(-p/gamma)` where `Gamma_i` are partial sums
//! of unit exponentials. All four exponents `p in {2, 3, 4, 6}` are built
//! from one Gamma sequence so the components are jointly coupled.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::degree_model::{validate_gamma, DegreeLaw};
use crate::error::{Error, Result};
use crate::rng::limit_rng;
use crate::special::gamma as gamma_fn;

pub const POWERS: [u32; 4] = [2, 3, 4, 6];
pub const MIN_TRUNCATION: usize = 100;
pub const DEFAULT_TRUNCATION: usize = 100_000;
/// Limit samples per RNG stream in [`sample_limits`].
const CHUNK: usize = 256;

/// Increasing partial sums of positive spacings.
#[derive(Debug, Clone)]
pub struct GammaSeries {
    values: Vec<f64>,
}

impl GammaSeries {
    /// `n` partial sums of unit exponentials.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut acc = 0.0;
        let values = (0..n)
            .map(|_| {
                let e: f64 = rng.sample(Exp1);
                acc += e;
                acc
            })
            .collect();
        GammaSeries { values }
    }

    /// Partial sums of the given spacings, which must all be positive.
    pub fn from_spacings(spacings: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut acc = 0.0;
        let mut values = Vec::new();
        for (i, s) in spacings.into_iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("spacing {i} is {s}, must be positive")));
            }
            acc += s;
            values.push(acc);
        }
        Ok(GammaSeries { values })
    }

    /// `Gamma_i = i`.
    pub fn unit_spacings(n: usize) -> Self {
        GammaSeries { values: (1..=n).map(|i| i as f64).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    pub fn spacings(&self) -> impl Iterator<Item = f64> + '_ {
        let prev = std::iter::once(0.0).chain(self.values.iter().copied());
        self.values.iter().zip(prev).map(|(v, p)| v - p)
    }
}

/// One draw of `(S_{g/2}, S_{g/3}, S_{g/4}, S_{g/6})` from a shared Gamma sequence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitSample {
    pub gamma: f64,
    pub truncation: usize,
    /// `S_{gamma/p}` indexed like [`POWERS`], tail included.
    pub s: [f64; 4],
    /// Continuum tail `Gamma_N^(1-a)/(a-1)` added to each entry of `s`.
    pub tail: [f64; 4],
    pub gamma_1: f64,
}

fn power_index(p: u32) -> Option<usize> {
    POWERS.iter().position(|&q| q == p)
}

impl LimitSample {
    pub fn from_series(gamma: f64, series: &GammaSeries) -> Result<Self> {
        validate_gamma(gamma)?;
        if series.truncation() < MIN_TRUNCATION {
            return Err(Error::Config(format!(
                "truncation {} below the minimum {MIN_TRUNCATION}",
                series.truncation()
            )));
        }
        Ok(accumulate(gamma, series.values().iter().copied()))
    }

    /// `S_{gamma/p}` for `p in {2, 3, 4, 6}`.
    pub fn s(&self, p: u32) -> f64 {
        self.s[power_index(p).expect("p must be one of 2, 3, 4, 6")]
    }

    pub fn tail_correction(&self, p: u32) -> f64 {
        self.tail[power_index(p).expect("p must be one of 2, 3, 4, 6")]
    }

    pub fn composed(&self, c: &LimitConstants) -> Composed {
        let (s2, s3, s4, s6) = (self.s[0], self.s[1], self.s[2], self.s[3]);
        let mu3 = c.mu.powi(3);
        let (t2, t4, t6) = (c.c_tilde[0], c.c_tilde[2], c.c_tilde[3]);
        Composed {
            pearson_ecm: -s2 * s2 / s3,
            clustering_cm: (t2 * s2 * s2 - 3.0 * t4 * s4 + 2.0 * t6 * s6 / (t2 * s2)) / mu3,
            clustering_cm_exact: (s2 * s2 - 3.0 * s4 + 2.0 * s6 / s2) / mu3,
            clustering_ecm: c.mu.powf(-1.5 * c.gamma) * c.a_gamma / s2,
        }
    }
}

/// Sums `Gamma_i^(-p/gamma)` over a stream of Gamma values; `x^p` is built
/// from one `powf` per term.
fn accumulate(gamma: f64, values: impl Iterator<Item = f64>) -> LimitSample {
    let inv = -1.0 / gamma;
    let mut sums = [0.0f64; 4];
    let mut last = 0.0;
    let mut first = f64::NAN;
    let mut count = 0usize;
    for g in values {
        if count == 0 {
            first = g;
        }
        let x = g.powf(inv);
        let x2 = x * x;
        let x3 = x2 * x;
        sums[0] += x2;
        sums[1] += x3;
        sums[2] += x2 * x2;
        sums[3] += x3 * x3;
        last = g;
        count += 1;
    }
    let mut tail = [0.0; 4];
    for (k, &p) in POWERS.iter().enumerate() {
        let a = p as f64 / gamma;
        tail[k] = last.powf(1.0 - a) / (a - 1.0);
        sums[k] += tail[k];
    }
    LimitSample { gamma, truncation: count, s: sums, tail, gamma_1: first }
}

/// One limit sample drawn from `rng` without storing the Gamma sequence.
pub fn sample_limit<R: Rng + ?Sized>(gamma: f64, truncation: usize, rng: &mut R) -> Result<LimitSample> {
    validate_gamma(gamma)?;
    if truncation < MIN_TRUNCATION {
        return Err(Error::Config(format!("truncation {truncation} below the minimum {MIN_TRUNCATION}")));
    }
    let mut acc = 0.0;
    let values = (0..truncation).map(|_| {
        let e: f64 = rng.sample(Exp1);
        acc += e;
        acc
    });
    Ok(accumulate(gamma, values))
}

/// `count` independent limit samples. Sample `k` comes from stream
/// `k / 256` of the limit lane, so the output is independent of the thread
/// pool size.
pub fn sample_limits(gamma: f64, truncation: usize, count: usize, master_seed: u64) -> Result<Vec<LimitSample>> {
    validate_gamma(gamma)?;
    if truncation < MIN_TRUNCATION {
        return Err(Error::Config(format!("truncation {truncation} below the minimum {MIN_TRUNCATION}")));
    }
    let chunks = count.div_ceil(CHUNK);
    let nested: Vec<Vec<LimitSample>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = limit_rng(master_seed, chunk);
            let len = CHUNK.min(count - chunk * CHUNK);
            (0..len).map(|_| sample_limit(gamma, truncation, &mut rng).expect("validated")).collect()
        })
        .collect();
    Ok(nested.into_iter().flatten().collect())
}

/// Upper bound on `sum_{i > N} i^(-a)` used as the truncation scale.
pub fn tail_bound(gamma: f64, p: u32, truncation: usize) -> f64 {
    let a = p as f64 / gamma;
    (truncation as f64).powf(1.0 - a) / (a - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableConstant {
    pub c_hat: f64,
    pub c_tilde: f64,
}

/// `C_hat = (1-a) / (Gamma(2-a) cos(pi a / 2))` and `C_tilde = C_hat^a`.
///
/// The cosine is evaluated as `sin(pi (1-a) / 2)` so that `(1-a)/cos` stays
/// accurate as `a -> 1`, where the ratio tends to `2/pi`.
pub fn stable_constant(alpha: f64) -> Result<StableConstant> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("stability index {alpha} outside (0,1)")));
    }
    let one_minus = 1.0 - alpha;
    let cos = (std::f64::consts::FRAC_PI_2 * one_minus).sin();
    let c_hat = one_minus / (gamma_fn(2.0 - alpha) * cos);
    Ok(StableConstant { c_hat, c_tilde: c_hat.powf(alpha) })
}

/// Deterministic inputs of the composed limits.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitConstants {
    pub gamma: f64,
    pub mu: f64,
    pub a_gamma: f64,
    /// `C_tilde_{gamma/p}` indexed like [`POWERS`].
    pub c_tilde: [f64; 4],
}

impl LimitConstants {
    pub fn new(law: &DegreeLaw, a_gamma: f64) -> Result<Self> {
        let gamma = law.gamma();
        let mut c_tilde = [0.0; 4];
        for (k, &p) in POWERS.iter().enumerate() {
            c_tilde[k] = stable_constant(gamma / p as f64)?.c_tilde;
        }
        Ok(LimitConstants { gamma, mu: law.mean(), a_gamma, c_tilde })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Composed {
    /// `-S_{g/2}^2 / S_{g/3}`.
    pub pearson_ecm: f64,
    /// CM clustering limit with the `C_tilde` weights.
    pub clustering_cm: f64,
    /// CM clustering limit under the exact Pareto norming:
    /// `(S_{g/2}^2 - 3 S_{g/4} + 2 S_{g/6} / S_{g/2}) / mu^3`.
    pub clustering_cm_exact: f64,
    /// `mu^(-3g/2) A_g / S_{g/2}`.
    pub clustering_ecm: f64,
}

/// How `sum_i D_i^p` is normed before comparing with `S_{gamma/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Norming {
    /// `(c n)^(p/gamma)`: the order statistics of `n` Pareto draws are
    /// `(c n / Gamma_i)^(1/gamma)`, so the ratio converges to the Gamma series.
    #[default]
    Exact,
    /// `C_hat_{gamma/p}^(p/gamma) (c n)^(p/gamma)`.
    StableClt,
}

/// Norming `a_{n,p}` with `sum_i D_i^p / a_{n,p} -> S_{gamma/p}`.
pub fn normalized_degree_sum_reference(law: &DegreeLaw, p: u32, n: usize, norming: Norming) -> Result<f64> {
    if p < 2 {
        return Err(Error::invalid(format!("power {p} gives index p/gamma below one; need p >= 2")));
    }
    let e = p as f64 / law.gamma();
    let base = (law.scale() * n as f64).powf(e);
    match norming {
        Norming::Exact => Ok(base),
        Norming::StableClt => {
            let alpha = law.gamma() / p as f64;
            Ok(stable_constant(alpha)?.c_hat.powf(e) * base)
        }
    }
}

/// `mu c^(-1/g) n^(1-1/g)`: multiplies ECM Pearson toward `-S_{g/2}^2/S_{g/3}`.
pub fn pearson_ecm_scale(law: &DegreeLaw, n: usize) -> f64 {
    let g = law.gamma();
    law.mean() * law.scale().powf(-1.0 / g) * (n as f64).powf(1.0 - 1.0 / g)
}

/// `c^(4/g) n^(4/g - 3)`: divides CM clustering toward `clustering_cm_exact`.
pub fn clustering_cm_scale(law: &DegreeLaw, n: usize) -> f64 {
    let g = law.gamma();
    law.scale().powf(4.0 / g) * (n as f64).powf(4.0 / g - 3.0)
}

/// Exponent of ECM clustering, `(-3g^2 + 6g - 4) / (2g)`.
pub fn clustering_ecm_exponent(gamma: f64) -> f64 {
    (-3.0 * gamma * gamma + 6.0 * gamma - 4.0) / (2.0 * gamma)
}

/// `(c g)^3 c^(-2/g) n^alpha`: divides ECM clustering toward `clustering_ecm`.
pub fn clustering_ecm_scale(law: &DegreeLaw, n: usize) -> f64 {
    let (g, c) = (law.gamma(), law.scale());
    (c * g).powi(3) * c.powf(-2.0 / g) * (n as f64).powf(clustering_ecm_exponent(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn unit_spacings_reproduce_zeta() {
        let n = 10_000;
        let s = LimitSample::from_series(1.5, &GammaSeries::unit_spacings(n)).unwrap();
        let zeta_4_3 = 3.600_937_750_458_862;
        assert!((s.s(2) - zeta_4_3).abs() < tail_bound(1.5, 2, n) * 1e-3);
        assert!((s.s(2) - zeta_4_3).abs() < 1e-5);
        // S_{g/3} -> zeta(2)
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((s.s(3) - z2).abs() < 1e-7);
    }

    #[test]
    fn truncation_is_validated() {
        let mut rng = seeded(1);
        assert!(matches!(sample_limit(1.5, 99, &mut rng), Err(Error::Config(_))));
        assert!(sample_limit(2.0, 1000, &mut rng).is_err());
        assert!(GammaSeries::from_spacings([1.0, 0.0]).is_err());
    }

    #[test]
    fn streaming_matches_stored_series() {
        let a = sample_limit(1.5, 500, &mut seeded(3)).unwrap();
        let series = GammaSeries::sample(500, &mut seeded(3));
        let b = LimitSample::from_series(1.5, &series).unwrap();
        assert_eq!(a.s, b.s);
        assert_eq!(a.gamma_1, series.values()[0]);
        let sp: Vec<f64> = series.spacings().collect();
        assert!(sp.iter().all(|&x| x > 0.0));
        assert!((sp.iter().sum::<f64>() - series.values()[499]).abs() < 1e-9);
    }

    #[test]
    fn longer_truncation_changes_less_than_tail_bound() {
        for seed in 0..5 {
            let short = sample_limit(1.5, 10_000, &mut seeded(seed)).unwrap();
            let long = sample_limit(1.5, 100_000, &mut seeded(seed)).unwrap();
            for &p in &POWERS {
                let d = (short.s(p) - long.s(p)).abs();
                assert!(d < tail_bound(1.5, p, 10_000) + 1e-12 * long.s(p), "p={p} d={d}");
            }
        }
    }

    #[test]
    fn samples_dominate_first_term_and_pearson_is_negative() {
        let c = LimitConstants::new(&DegreeLaw::pareto(1.5).unwrap(), 1.0).unwrap();
        for s in sample_limits(1.5, 200, 2000, 11).unwrap() {
            for &p in &POWERS {
                assert!(s.s(p) > 0.0);
                assert!(s.s(p) >= s.gamma_1.powf(-(p as f64) / 1.5));
            }
            let comp = s.composed(&c);
            assert!(comp.pearson_ecm < 0.0);
            assert!(comp.clustering_cm_exact > 0.0);
            assert!(comp.clustering_ecm > 0.0);
        }
    }

    #[test]
    fn sample_limits_is_deterministic_and_chunked() {
        let a = sample_limits(1.3, 150, 600, 5).unwrap();
        let b = sample_limits(1.3, 150, 600, 5).unwrap();
        assert_eq!(a.len(), 600);
        assert!(a.iter().zip(&b).all(|(x, y)| x.s == y.s));
        let mut rng = limit_rng(5, 1);
        let first_of_second_chunk = sample_limit(1.3, 150, &mut rng).unwrap();
        assert_eq!(a[CHUNK].s, first_of_second_chunk.s);
    }

    #[test]
    fn inverse_s_mean_stabilises() {
        let mean = |v: &[LimitSample]| v.iter().map(|s| 1.0 / s.s(2)).sum::<f64>() / v.len() as f64;
        let big = sample_limits(1.5, 200, 100_000, 21).unwrap();
        let small = sample_limits(1.5, 200, 10_000, 22).unwrap();
        let (m1, m2) = (mean(&small), mean(&big));
        assert!((m1 - m2).abs() / m2 < 0.05, "{m1} vs {m2}");
    }

    #[test]
    fn s2_and_s3_are_positively_correlated() {
        let v = sample_limits(1.5, 200, 5000, 8).unwrap();
        // rank correlation, since both have infinite variance
        let rank = |xs: Vec<f64>| {
            let mut idx: Vec<usize> = (0..xs.len()).collect();
            idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
            let mut r = vec![0.0; xs.len()];
            for (k, &i) in idx.iter().enumerate() {
                r[i] = k as f64;
            }
            r
        };
        let r2 = rank(v.iter().map(|s| s.s(2)).collect());
        let r3 = rank(v.iter().map(|s| s.s(3)).collect());
        let n = r2.len() as f64;
        let m = (n - 1.0) / 2.0;
        let cov: f64 = r2.iter().zip(&r3).map(|(a, b)| (a - m) * (b - m)).sum::<f64>();
        let var: f64 = r2.iter().map(|a| (a - m) * (a - m)).sum::<f64>();
        assert!(cov / var > 0.8);
    }

    #[test]
    fn stable_constant_values() {
        let c = stable_constant(0.5).unwrap();
        assert!((c.c_hat - 0.797_884_560_802_865_4).abs() < 1e-12);
        for k in 1..=9 {
            let a = k as f64 / 10.0;
            let c = stable_constant(a).unwrap();
            assert!(c.c_hat > 0.0);
            assert!((c.c_tilde.ln() - a * c.c_hat.ln()).abs() < 1e-14);
        }
        // (1-a)/cos(pi a/2) -> 2/pi as a -> 1, and Gamma(1) = 1
        let near = stable_constant(1.0 - 1e-12).unwrap();
        assert!((near.c_hat - 2.0 / std::f64::consts::PI).abs() < 1e-9);
        assert!(stable_constant(1.0).is_err());
        assert!(stable_constant(0.0).is_err());
    }

    #[test]
    fn norming_values() {
        let law = DegreeLaw::pareto(1.5).unwrap();
        let a = normalized_degree_sum_reference(&law, 2, 10_000, Norming::StableClt).unwrap();
        let expect = stable_constant(0.75).unwrap().c_hat.powf(4.0 / 3.0) * 1e4f64.powf(4.0 / 3.0);
        assert!((a / expect - 1.0).abs() < 1e-14);
        for &p in &[2, 3, 4, 6] {
            let a1 = normalized_degree_sum_reference(&law, p, 1000, Norming::Exact).unwrap();
            let a2 = normalized_degree_sum_reference(&law, p, 2000, Norming::Exact).unwrap();
            assert!((a2 / a1 - 2f64.powf(p as f64 / 1.5)).abs() < 1e-12);
        }
        assert!(normalized_degree_sum_reference(&law, 1, 10, Norming::Exact).is_err());
    }

    #[test]
    fn ecm_exponent_peaks_at_root_four_thirds() {
        let g = (4.0f64 / 3.0).sqrt();
        assert!((clustering_ecm_exponent(g) - (3.0 - 2.0 * 3f64.sqrt())).abs() < 1e-12);
        assert!(clustering_ecm_exponent(g) > clustering_ecm_exponent(g - 0.01));
        assert!(clustering_ecm_exponent(g) > clustering_ecm_exponent(g + 0.01));
        assert!((clustering_ecm_exponent(1.5) + 0.583_333_333_333_333_3).abs() < 1e-12);
    }
}
