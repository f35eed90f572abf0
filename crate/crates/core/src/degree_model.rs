//! Heavy-tailed degree and weight laws.
//!
//! Degrees follow a pure Pareto tail on the integers, `P(D > t) = c t^(-gamma)`
//! whenever the right-hand side is below one, with `1 < gamma < 2` (finite
//! mean, infinite variance). Sampling is by inverse CDF with a ceiling so
//! the survival function is exact at integer thresholds.

use rand::Rng;
use rand_distr::Open01;

use crate::error::{Error, Result};
use crate::special::zeta_tail;

/// Number of directly summed terms before the Euler-Maclaurin tail takes over
/// when computing the mean.
const MEAN_DIRECT_TERMS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeLaw {
    gamma: f64,
    scale: f64,
}

impl DegreeLaw {
    pub fn new(gamma: f64, scale: f64) -> Result<Self> {
        validate_gamma(gamma)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!("tail constant must be positive, got {scale}")));
        }
        Ok(DegreeLaw { gamma, scale })
    }

    /// Pure Pareto law with tail constant 1.
    pub fn pareto(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `P(D > t)`.
    pub fn survival(&self, t: u64) -> f64 {
        if t == 0 {
            return 1.0;
        }
        (self.scale * (t as f64).powf(-self.gamma)).min(1.0)
    }

    /// `P(D = x)`.
    pub fn pmf(&self, x: u64) -> f64 {
        if x == 0 {
            return 0.0;
        }
        self.survival(x - 1) - self.survival(x)
    }

    /// Smallest integer `t` with `c t^(-gamma) <= 1`; below it the survival
    /// function saturates at one.
    fn saturation_point(&self) -> u64 {
        let mut t = self.scale.powf(1.0 / self.gamma).floor().max(1.0) as u64;
        while self.scale * (t as f64).powf(-self.gamma) > 1.0 {
            t += 1;
        }
        while t > 1 && self.scale * ((t - 1) as f64).powf(-self.gamma) <= 1.0 {
            t -= 1;
        }
        t
    }

    /// `sum_{s >= from} P(D > s)`.
    fn survival_tail_sum(&self, from: u64) -> f64 {
        let sat = self.saturation_point();
        let saturated = sat.saturating_sub(from) as f64;
        saturated + self.scale * zeta_tail(self.gamma, from.max(sat))
    }

    /// `E[D] = sum_{t >= 0} P(D > t)`; for `c <= 1` this is `1 + c zeta(gamma)`.
    pub fn mean(&self) -> f64 {
        let sat = self.saturation_point();
        let cut = sat.max(MEAN_DIRECT_TERMS);
        let mut total = 0.0;
        for t in (0..cut).rev() {
            total += self.survival(t);
        }
        total + self.scale * crate::special::euler_maclaurin_tail(self.gamma, cut as f64)
    }

    /// Inverse-CDF draw for a uniform variate `u` in `(0, 1)`.
    ///
    /// Returns the smallest integer `t >= 1` with `c t^(-gamma) <= u`, i.e.
    /// `ceil((c/u)^(1/gamma))` with the floating-point ceiling corrected
    /// against the defining inequality.
    pub fn sample_degree(&self, u: f64) -> Result<u64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid(format!("uniform variate must lie in (0,1), got {u}")));
        }
        Ok(self.quantile(u))
    }

    fn quantile(&self, u: f64) -> u64 {
        let raw = (self.scale / u).powf(1.0 / self.gamma).ceil();
        let mut d = if raw >= u64::MAX as f64 { u64::MAX } else { raw.max(1.0) as u64 };
        let exceeds = |t: u64| self.scale * (t as f64).powf(-self.gamma) > u;
        while d > 1 && !exceeds(d - 1) {
            d -= 1;
        }
        while d < u64::MAX && exceeds(d) {
            d += 1;
        }
        d
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }

    /// `E[D (1 ∧ D/t)]`, summed exactly below `t` and through the survival
    /// tail above it.
    pub fn moment_tail(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return self.mean();
        }
        let m = t.ceil() as u64;
        // E[D^2/t; D < m]
        let mut below = 0.0;
        for x in (1..m).rev() {
            let xf = x as f64;
            below += xf * xf * self.pmf(x);
        }
        below /= t;
        // E[D; D >= m] = m P(D > m-1) + sum_{s >= m} P(D > s)
        let above = m as f64 * self.survival(m - 1) + self.survival_tail_sum(m);
        below + above
    }
}

pub(crate) fn validate_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 1.0 && gamma < 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("gamma must lie in the open interval (1,2), got {gamma}")))
    }
}

/// Degrees (or weights) of `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    values: Vec<u64>,
    total: u64,
    parity_adjusted: bool,
}

impl DegreeSequence {
    /// `n` i.i.d. draws; if the sum is odd the last entry is incremented and
    /// the adjustment recorded.
    pub fn sample<R: Rng + ?Sized>(law: &DegreeLaw, n: usize, rng: &mut R) -> Self {
        let values: Vec<u64> = (0..n).map(|_| law.sample(rng)).collect();
        let mut seq = Self::from_raw(values);
        seq.fix_parity();
        seq
    }

    /// I.i.d. draws without the parity fix (used for IRG weights).
    pub fn sample_weights<R: Rng + ?Sized>(law: &DegreeLaw, n: usize, rng: &mut R) -> Self {
        Self::from_raw((0..n).map(|_| law.sample(rng)).collect())
    }

    pub fn from_values(values: Vec<u64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!("degree at index {pos} is zero")));
        }
        values
            .iter()
            .try_fold(0u64, |acc, &d| acc.checked_add(d))
            .ok_or_else(|| Error::invalid("degree total overflows u64"))?;
        Ok(Self::from_raw(values))
    }

    fn from_raw(values: Vec<u64>) -> Self {
        let total = values.iter().sum();
        DegreeSequence { values, total, parity_adjusted: false }
    }

    fn fix_parity(&mut self) {
        if self.total % 2 == 1 {
            if let Some(last) = self.values.last_mut() {
                *last += 1;
                self.total += 1;
                self.parity_adjusted = true;
            }
        }
    }

    /// Copy with the parity fix applied (no-op when already even).
    pub fn with_parity_fix(&self) -> Self {
        let mut out = self.clone();
        out.fix_parity();
        out
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// The sequence as drawn, before any parity correction.
    pub fn unadjusted_values(&self) -> Vec<u64> {
        let mut v = self.values.clone();
        if self.parity_adjusted {
            if let Some(last) = v.last_mut() {
                *last -= 1;
            }
        }
        v
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn parity_adjusted(&self) -> bool {
        self.parity_adjusted
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// Newline-delimited integers.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 4);
        for d in &self.values {
            out.push_str(&d.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses newline-delimited positive integers; blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let d: u64 = line.parse().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("expected a positive integer, found {line:?} ({e})"),
            })?;
            if d == 0 {
                return Err(Error::Parse { line: idx + 1, message: "degree must be positive".into() });
            }
            values.push(d);
        }
        Self::from_values(values)
    }
}
