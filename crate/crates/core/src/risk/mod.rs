//! Attribute disclosure risk, scored as mutual information with the target.
//!
//! The default estimator is the plug-in estimate over a contingency table:
//! numeric attributes are cut into equal-frequency bins, every other kind is
//! taken token by token. A column holding a single token (for example a fully
//! masked one) scores exactly zero. The KSG nearest-neighbour estimator is
//! available for numeric attributes as a cross-check.
//!
//! All values are in nats.

mod ksg;
mod plugin;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeRole, Column, Dataset};
use crate::exec::Execution;

pub use ksg::mutual_information_knn;
pub use plugin::{bin_codes, discretize_for_mi, mutual_information_plugin, JointHistogram};

pub const DEFAULT_MI_BINS: usize = 10;
pub const DEFAULT_KSG_NEIGHBORS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("{n} samples is too few for k = {k} neighbours")]
    TooFewSamples { n: usize, k: usize },
    #[error("non-finite sample value")]
    NonFinite,
    #[error("baseline total mutual information is zero")]
    ZeroBaseline,
    #[error("attribute sets differ: {0}")]
    AttributeMismatch(String),
}

/// Which estimator scores each attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EstimatorConfig {
    Plugin {
        #[serde(default = "default_bins")]
        n_bins: usize,
    },
    /// KSG on numeric attributes; other kinds fall back to the plug-in
    /// estimate with [`DEFAULT_MI_BINS`].
    Knn {
        #[serde(default = "default_neighbors")]
        k: usize,
    },
}

fn default_bins() -> usize {
    DEFAULT_MI_BINS
}

fn default_neighbors() -> usize {
    DEFAULT_KSG_NEIGHBORS
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig::Plugin {
            n_bins: DEFAULT_MI_BINS,
        }
    }
}

impl fmt::Display for EstimatorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorConfig::Plugin { n_bins } => write!(f, "plugin(n_bins={n_bins})"),
            EstimatorConfig::Knn { k } => write!(f, "knn(k={k})"),
        }
    }
}

/// Attributes that count towards the total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskScope {
    /// Every non-target attribute.
    #[default]
    All,
    /// Quasi-identifiers and sensitive attributes only.
    Protected,
}

impl RiskScope {
    fn includes(self, role: AttributeRole) -> bool {
        match self {
            RiskScope::All => role != AttributeRole::Target,
            RiskScope::Protected => {
                matches!(
                    role,
                    AttributeRole::QuasiIdentifier | AttributeRole::Sensitive
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Plugin,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RiskBand {
    Low,
    Medium,
    High,
}

/// Band of `score` relative to the largest score: thirds of `[0, 1]`,
/// closed below.
pub fn risk_band(score: f64, max_score: f64) -> RiskBand {
    let r = if max_score > 0.0 {
        score / max_score
    } else {
        0.0
    };
    if r < 1.0 / 3.0 {
        RiskBand::Low
    } else if r < 2.0 / 3.0 {
        RiskBand::Medium
    } else {
        RiskBand::High
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiScore {
    pub attribute: String,
    pub role: AttributeRole,
    pub mi_nats: f64,
    pub band: RiskBand,
    pub estimator: EstimatorKind,
    pub n_bins_used: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub estimator: String,
    pub scope: RiskScope,
    /// Highest score first; ties by name.
    pub scores: Vec<MiScore>,
    pub total_mi: f64,
    pub baseline_total: Option<f64>,
    pub risk_reduced: Option<f64>,
}

impl RiskReport {
    pub fn score(&self, attribute: &str) -> Option<&MiScore> {
        self.scores.iter().find(|s| s.attribute == attribute)
    }

    /// Copy of this report with the baseline and reduction ratio against
    /// `raw` filled in.
    pub fn relative_to(&self, raw: &RiskReport) -> Result<RiskReport, RiskError> {
        let ratio = risk_reduced_ratio(raw, self)?;
        Ok(RiskReport {
            baseline_total: Some(raw.total_mi),
            risk_reduced: Some(ratio),
            ..self.clone()
        })
    }
}

fn score_attribute(
    col: &Column,
    y_tokens: &[String],
    y_values: &[f64],
    estimator: EstimatorConfig,
) -> Result<(f64, EstimatorKind, Option<usize>), RiskError> {
    match (estimator, col) {
        (EstimatorConfig::Knn { k }, Column::Numeric(x)) => Ok((
            mutual_information_knn(x, y_values, k, Execution::Sequential)?,
            EstimatorKind::Knn,
            None,
        )),
        (EstimatorConfig::Plugin { n_bins }, _) => plugin_score(col, y_tokens, n_bins),
        (EstimatorConfig::Knn { .. }, _) => plugin_score(col, y_tokens, DEFAULT_MI_BINS),
    }
}

fn plugin_score(
    col: &Column,
    y_tokens: &[String],
    n_bins: usize,
) -> Result<(f64, EstimatorKind, Option<usize>), RiskError> {
    let x = discretize_for_mi(col, n_bins);
    let used = matches!(col, Column::Numeric(_)).then(|| {
        let mut distinct = x.clone();
        distinct.sort();
        distinct.dedup();
        distinct.len()
    });
    Ok((
        mutual_information_plugin(&x, y_tokens)?,
        EstimatorKind::Plugin,
        used,
    ))
}

/// Scores every non-target attribute of `ds` against the target.
///
/// Attributes are scored independently, on worker threads under
/// [`Execution::Parallel`]. The total sums the in-scope scores in attribute
/// name order, so it does not depend on column order.
pub fn attribute_risk_scores(
    ds: &Dataset,
    estimator: EstimatorConfig,
    scope: RiskScope,
    exec: Execution,
) -> Result<RiskReport, RiskError> {
    let labels = ds.labels();
    let y_tokens: Vec<String> = labels.iter().map(u8::to_string).collect();
    let y_values: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let features: Vec<_> = ds
        .features()
        .filter(|(a, _)| a.role != AttributeRole::Identifier)
        .collect();
    let raw = exec.map(&features, |(_, col)| {
        score_attribute(col, &y_tokens, &y_values, estimator)
    });

    let max = raw
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|s| s.0)
        .fold(0.0, f64::max);
    let mut scores = Vec::with_capacity(features.len());
    for ((attr, _), r) in features.iter().zip(raw) {
        let (mi, kind, n_bins_used) = r?;
        scores.push(MiScore {
            attribute: attr.name.clone(),
            role: attr.role,
            mi_nats: mi,
            band: risk_band(mi, max),
            estimator: kind,
            n_bins_used,
        });
    }
    scores.sort_by(|a, b| {
        b.mi_nats
            .total_cmp(&a.mi_nats)
            .then_with(|| a.attribute.cmp(&b.attribute))
    });
    let by_name: BTreeMap<&str, &MiScore> =
        scores.iter().map(|s| (s.attribute.as_str(), s)).collect();
    let total_mi = by_name
        .values()
        .filter(|s| scope.includes(s.role))
        .map(|s| s.mi_nats)
        .sum();
    Ok(RiskReport {
        estimator: estimator.to_string(),
        scope,
        scores,
        total_mi,
        baseline_total: None,
        risk_reduced: None,
    })
}

/// `(total_raw - total_published) / total_raw`.
///
/// Both reports must score the same attributes; kinds may differ.
pub fn risk_reduced_ratio(raw: &RiskReport, published: &RiskReport) -> Result<f64, RiskError> {
    let names = |r: &RiskReport| -> Vec<String> {
        let mut v: Vec<String> = r.scores.iter().map(|s| s.attribute.clone()).collect();
        v.sort();
        v
    };
    let (a, b) = (names(raw), names(published));
    if a != b {
        let diff: Vec<&String> = a
            .iter()
            .filter(|n| !b.contains(n))
            .chain(b.iter().filter(|n| !a.contains(n)))
            .collect();
        return Err(RiskError::AttributeMismatch(format!("{diff:?}")));
    }
    if raw.total_mi <= 0.0 {
        return Err(RiskError::ZeroBaseline);
    }
    Ok((raw.total_mi - published.total_mi) / raw.total_mi)
}
