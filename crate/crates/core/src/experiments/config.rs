//! Experiment configuration files.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "experiments": [
//!     {"name": "erased", "kind": "scaling", "model": "ecm", "gamma": 1.5,
//!      "sizes": [1000, 10000], "replicas": 20, "statistic": "erased_edges",
//!      "tag": "erased-edges",
//!      "assert": [{"check": "slope", "min": 0.35, "max": 0.65}]}
//!   ]
//! }
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::degree_model::validate_gamma;
use crate::error::{Error, Result};
use crate::graphs::KernelSpec;
use crate::stable_limits::Norming;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Cm,
    Ecm,
    Irg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Pearson `r` of the model graph.
    Pearson,
    PearsonAbs,
    /// Pearson of the CM multigraph (`sqrt(n) r` under paper normalization).
    PearsonCm,
    PearsonEcm,
    /// Global clustering of the model graph.
    ClusteringGlobal,
    ClusteringCm,
    ClusteringEcm,
    ErasedEdges,
    /// `sum_i D_i^power`.
    DegreePowerSum,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Pearson => "pearson",
            Statistic::PearsonAbs => "pearson_abs",
            Statistic::PearsonCm => "pearson_cm",
            Statistic::PearsonEcm => "pearson_ecm",
            Statistic::ClusteringGlobal => "clustering_global",
            Statistic::ClusteringCm => "clustering_cm",
            Statistic::ClusteringEcm => "clustering_ecm",
            Statistic::ErasedEdges => "erased_edges",
            Statistic::DegreePowerSum => "degree_power_sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Raw,
    /// Divide by the norming of the corresponding limit theorem.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Scaling,
    Distribution,
    ConditionalVariance,
    ErasedSums,
    EdgeProbability,
    TruncatedTriangles,
    Joint,
    GammaSweep,
    Integral,
}

/// Acceptance checks evaluated after an experiment has run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// Fitted log-log slope within `[min, max]`.
    Slope { min: Option<f64>, max: Option<f64> },
    /// Fraction of negative values at size `n` (every size if absent).
    SignFraction { n: Option<usize>, min: f64 },
    /// KS distance at the largest size.
    Ks { max: f64 },
    /// Estimate/prediction ratio, or median triangle ratio.
    Ratio { min: f64, max: f64 },
    /// Quantile `q` of the absolute deviations.
    Deviation { q: f64, max: f64 },
    /// Largest relative quantile difference against the limit.
    QuantileRelative { max: f64 },
    /// Largest entrywise Spearman difference.
    Spearman { max: f64 },
    /// Slope of each erased-sum series at most its exponent plus `margin`.
    ErasedSumBounds { margin: f64 },
    /// `|g - f| / f` at most `max`.
    RelativeDifference { max: f64 },
    /// The gamma with the largest fitted slope lies in `[min, max]`.
    ArgmaxGamma { min: f64, max: f64 },
    /// The largest fitted slope lies in `[min, max]`.
    MaxSlope { min: f64, max: f64 },
    /// Quadrature routes within `max_abs`; Monte Carlo within `sigmas` standard errors.
    IntegralAgreement { max_abs: f64, sigmas: f64 },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Slope { .. } => "slope",
            Check::SignFraction { .. } => "sign_fraction",
            Check::Ks { .. } => "ks",
            Check::Ratio { .. } => "ratio",
            Check::Deviation { .. } => "deviation",
            Check::QuantileRelative { .. } => "quantile_relative",
            Check::Spearman { .. } => "spearman",
            Check::ErasedSumBounds { .. } => "erased_sum_bounds",
            Check::RelativeDifference { .. } => "relative_difference",
            Check::ArgmaxGamma { .. } => "argmax_gamma",
            Check::MaxSlope { .. } => "max_slope",
            Check::IntegralAgreement { .. } => "integral_agreement",
        }
    }

    fn allowed_for(&self, kind: ExperimentKind) -> bool {
        use ExperimentKind as K;
        matches!(
            (self, kind),
            (Check::Slope { .. }, K::Scaling)
                | (Check::SignFraction { .. }, K::Scaling | K::Distribution)
                | (Check::Ks { .. }, K::Distribution)
                | (Check::QuantileRelative { .. }, K::Distribution)
                | (Check::Ratio { .. }, K::ConditionalVariance | K::TruncatedTriangles)
                | (Check::Deviation { .. }, K::EdgeProbability)
                | (Check::Spearman { .. }, K::Joint)
                | (Check::ErasedSumBounds { .. }, K::ErasedSums)
                | (Check::RelativeDifference { .. }, K::TruncatedTriangles)
                | (Check::ArgmaxGamma { .. } | Check::MaxSlope { .. }, K::GammaSweep)
                | (Check::IntegralAgreement { .. }, K::Integral)
        )
    }
}

fn default_model() -> Model {
    Model::Ecm
}
fn default_gamma() -> f64 {
    1.5
}
fn default_scale() -> f64 {
    1.0
}
fn default_sizes() -> Vec<usize> {
    vec![1_000, 10_000, 100_000, 1_000_000]
}
fn default_replicas() -> usize {
    50
}
fn default_power() -> u32 {
    2
}
fn default_limit_samples() -> usize {
    10_000
}
fn default_truncation() -> usize {
    crate::stable_limits::DEFAULT_TRUNCATION
}
fn default_pairings() -> usize {
    10_000
}
fn default_pairs() -> usize {
    100
}
fn default_epsilon() -> f64 {
    0.2
}
fn default_gammas() -> Vec<f64> {
    vec![1.1, 1.15, 1.2, 1.5, 1.8]
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_mc_samples() -> usize {
    1 << 20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default = "default_model")]
    pub model: Model,
    #[serde(default)]
    pub kernel: Option<String>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub statistic: Option<Statistic>,
    #[serde(default = "default_power")]
    pub power: u32,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub norming: Norming,
    #[serde(default = "default_limit_samples")]
    pub limit_samples: usize,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_pairings")]
    pub pairings: usize,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Compare against the same statistic under this model instead of the limit law.
    #[serde(default)]
    pub compare_model: Option<Model>,
    /// Label printed with failed checks.
    #[serde(default)]
    pub tag: Option<String>,
    #[serde(default, rename = "assert")]
    pub checks: Vec<Check>,
}

const EXPERIMENT_KEYS: &[&str] = &[
    "name",
    "kind",
    "model",
    "kernel",
    "gamma",
    "scale",
    "sizes",
    "replicas",
    "statistic",
    "power",
    "normalization",
    "norming",
    "limit_samples",
    "truncation",
    "pairings",
    "pairs",
    "epsilon",
    "gammas",
    "tolerance",
    "mc_samples",
    "compare_model",
    "tag",
    "assert",
];

const TOP_KEYS: &[&str] = &["seed", "threads", "experiments"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
}

fn unknown_keys(value: &Value) -> Vec<String> {
    let mut bad = Vec::new();
    let Some(top) = value.as_object() else {
        return bad;
    };
    for k in top.keys() {
        if !TOP_KEYS.contains(&k.as_str()) {
            bad.push(k.clone());
        }
    }
    if let Some(list) = top.get("experiments").and_then(Value::as_array) {
        for (i, e) in list.iter().enumerate() {
            if let Some(obj) = e.as_object() {
                for k in obj.keys() {
                    if !EXPERIMENT_KEYS.contains(&k.as_str()) {
                        bad.push(format!("experiments[{i}].{k}"));
                    }
                }
            }
        }
    }
    bad
}

impl RunConfig {
    /// Parses and validates a configuration. Every unknown key is listed in
    /// the error, not just the first.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self> {
        if !value.is_object() {
            return Err(Error::Config("top level must be a JSON object".into()));
        }
        let bad = unknown_keys(value);
        if !bad.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", bad.join(", "))));
        }
        let cfg: RunConfig =
            serde_json::from_value(value.clone()).map_err(|e| Error::Config(format!("schema violation: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for e in &self.experiments {
            if !names.insert(e.name.as_str()) {
                return Err(Error::Config(format!("duplicate experiment name {:?}", e.name)));
            }
            e.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical (sorted-key, compact) JSON encoding.
    pub fn hash(&self) -> String {
        canonical_hash(&serde_json::to_value(self).expect("config serializes"))
    }
}

/// SHA-256 hex digest of `value` serialized with sorted object keys.
pub fn canonical_hash(value: &Value) -> String {
    // serde_json's default map is ordered by key, so re-serializing a Value
    // canonicalises the key order
    let text = serde_json::to_string(value).expect("value serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn cfg_err(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("experiment {name:?}: {msg}"))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let name = &self.name;
        let uses_gamma_list = matches!(self.kind, ExperimentKind::GammaSweep | ExperimentKind::Integral);
        if uses_gamma_list {
            if self.gammas.is_empty() {
                return Err(cfg_err(name, "gammas must not be empty"));
            }
            for &g in &self.gammas {
                validate_gamma(g).map_err(|e| cfg_err(name, e))?;
            }
        } else {
            validate_gamma(self.gamma).map_err(|e| cfg_err(name, e))?;
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(cfg_err(name, "scale must be positive"));
        }
        if self.kind != ExperimentKind::Integral {
            if self.sizes.is_empty() {
                return Err(cfg_err(name, "sizes must not be empty"));
            }
            if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(cfg_err(name, "sizes must be strictly increasing"));
            }
            if self.sizes[0] < 2 {
                return Err(cfg_err(name, "sizes must be at least 2"));
            }
        }
        let needs_replicas = !matches!(
            self.kind,
            ExperimentKind::ConditionalVariance | ExperimentKind::EdgeProbability | ExperimentKind::Integral
        );
        if needs_replicas && self.replicas < 2 {
            return Err(cfg_err(name, "replicas must be at least 2"));
        }
        if self.model == Model::Irg || self.compare_model == Some(Model::Irg) {
            let k = self.kernel.as_deref().ok_or_else(|| cfg_err(name, "model irg needs a kernel"))?;
            KernelSpec::from_name(k).map_err(|e| cfg_err(name, e))?;
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(cfg_err(name, "epsilon must lie in (0,1)"));
        }
        if !crate::statistics::SUPPORTED_POWERS.contains(&self.power) {
            return Err(cfg_err(name, "power must be one of 1, 2, 3, 4, 6"));
        }
        match self.kind {
            ExperimentKind::Scaling | ExperimentKind::Distribution | ExperimentKind::GammaSweep => {
                let stat = self.statistic.ok_or_else(|| cfg_err(name, "statistic is required"))?;
                check_model(name, stat, self.model)?;
                if let Some(m) = self.compare_model {
                    check_model(name, stat, m)?;
                }
            }
            ExperimentKind::ConditionalVariance | ExperimentKind::EdgeProbability => {
                if self.pairings < 2 {
                    return Err(cfg_err(name, "pairings must be at least 2"));
                }
            }
            _ => {}
        }
        if self.kind == ExperimentKind::Distribution && self.limit_samples < 2 && self.compare_model.is_none() {
            return Err(cfg_err(name, "limit_samples must be at least 2"));
        }
        for c in &self.checks {
            if !c.allowed_for(self.kind) {
                return Err(cfg_err(name, format!("check {} does not apply to kind {:?}", c.name(), self.kind)));
            }
        }
        Ok(())
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::from_name(self.kernel.as_deref().unwrap_or("poisson"))
    }
}

fn check_model(name: &str, stat: Statistic, model: Model) -> Result<()> {
    let ok = match stat {
        Statistic::PearsonCm | Statistic::ClusteringCm => matches!(model, Model::Cm | Model::Ecm),
        Statistic::PearsonEcm | Statistic::ClusteringEcm | Statistic::ErasedEdges => model == Model::Ecm,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(cfg_err(name, format!("statistic {} is not available for model {model:?}", stat.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn lists_every_unknown_key() {
        let v = json!({"seed": 1, "bogus": 2, "experiments": [{"name": "a", "kind": "scaling", "sizez": [1]}]});
        let err = RunConfig::from_value(&v).unwrap_err().to_string();
        assert!(err.contains("bogus") && err.contains("experiments[0].sizez"), "{err}");
    }

    #[test]
    fn empty_list_is_valid_and_hash_ignores_key_order() {
        let a = RunConfig::from_json_str(r#"{"seed": 3, "experiments": []}"#).unwrap();
        let b = RunConfig::from_json_str(r#"{"experiments": [], "seed": 3}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_json_str(r#"{"seed": 4}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn semantic_validation() {
        let base = json!({"name": "x", "kind": "scaling", "statistic": "erased_edges", "sizes": [10, 20], "replicas": 3});
        let with = |k: &str, v: Value| {
            let mut e = base.clone();
            e[k] = v;
            RunConfig::from_value(&json!({"seed": 1, "experiments": [e]}))
        };
        assert!(with("replicas", json!(3)).is_ok());
        assert!(with("gamma", json!(2.5)).unwrap_err().to_string().contains("(1,2)"));
        assert!(with("sizes", json!([20, 10])).is_err());
        assert!(with("replicas", json!(1)).is_err());
        assert!(with("model", json!("cm")).is_err());
        assert!(with("model", json!("irg")).is_err());
        assert!(with("assert", json!([{"check": "ks", "max": 0.1}])).is_err());
        assert!(with("assert", json!([{"check": "slope", "min": 0.3, "extra": 1}])).is_err());
        assert!(with("assert", json!([{"check": "slope", "min": 0.3}])).is_ok());
    }
}
