//! The `medpriv` workflow: assess raw risk, protect, evaluate the published
//! data, and compare presets.
//!
//! Every command reads a JSON [`RunConfig`] and writes its reports into the
//! output directory. Exit codes: 0 success, 2 configuration or load error,
//! 3 infeasible transform, 4 degenerate evaluation.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use medpriv_core::risk::{attribute_risk_scores, RiskScope};
use medpriv_core::transforms::{apply_plan, SuppressedRow};
use medpriv_core::utility::{utility_report, Metrics, UtilityRow, Variant};
use medpriv_core::{
    load_csv, read_csv, Dataset, Execution, ProtectionPlan, RiskReport, SuppressionLog,
    TransformError, UtilityReport,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{PlanSource, RolesSource, RunConfig, SplitSection, DEFAULT_SEED};
pub use output::{dataset_csv, write_atomic};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("load: {0}")]
    Load(String),
    #[error("io: {0}")]
    Io(String),
    #[error("transform: {0}")]
    Transform(#[from] TransformError),
    #[error("evaluation: {0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Load(_) | CliError::Io(_) => 2,
            CliError::Transform(e) if e.is_infeasible() => 3,
            CliError::Transform(_) => 2,
            CliError::Degenerate(_) => 4,
        }
    }
}

pub const PUBLISHED_CSV: &str = "published.csv";
pub const SUPPRESSION_JSON: &str = "suppression.json";
pub const RISK_RAW_JSON: &str = "risk_raw.json";
pub const RISK_PUBLISHED_JSON: &str = "risk_published.json";
pub const RISK_DELTA_JSON: &str = "risk_delta.json";
pub const UTILITY_JSON: &str = "utility.json";
pub const UTILITY_CSV: &str = "utility.csv";
pub const COMPARE_CSV: &str = "compare.csv";
pub const COMPARE_JSON: &str = "compare.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskFile {
    pub seed: u64,
    #[serde(flatten)]
    pub report: RiskReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuppressionFile {
    pub seed: u64,
    pub plan: ProtectionPlan,
    pub input_rows: usize,
    pub published_rows: usize,
    pub suppressed: Vec<SuppressedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDelta {
    pub attribute: String,
    pub raw_mi_nats: f64,
    pub published_mi_nats: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskDelta {
    pub seed: u64,
    pub estimator: String,
    pub scope: RiskScope,
    pub baseline_total: f64,
    pub published_total: f64,
    pub risk_reduced: f64,
    /// In attribute name order.
    pub attributes: Vec<AttributeDelta>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtilityFile {
    pub seed: u64,
    #[serde(flatten)]
    pub report: UtilityReport,
}

/// The raw dataset of a run, with identifier columns removed.
pub fn load_raw(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let roles = cfg.role_map()?;
    let ds = load_csv(&cfg.input_csv, &roles, cfg.positive_label.as_deref())
        .map_err(|e| CliError::Load(e.to_string()))?;
    Ok(ds.drop_identifiers())
}

fn score(ds: &Dataset, cfg: &RunConfig) -> Result<RiskReport, CliError> {
    attribute_risk_scores(ds, cfg.estimator, cfg.risk_scope, Execution::default())
        .map_err(|e| CliError::Degenerate(e.to_string()))
}

fn ranked_table(report: &RiskReport) -> String {
    let mut s = format!("{:<28} {:>10}  band\n", "attribute", "mi_nats");
    for sc in &report.scores {
        let _ = writeln!(
            s,
            "{:<28} {:>10.5}  {:?}",
            sc.attribute, sc.mi_nats, sc.band
        );
    }
    let _ = writeln!(
        s,
        "total_mi = {:.5} ({})",
        report.total_mi, report.estimator
    );
    s
}

/// Scores the raw data and writes `risk_raw.json`.
pub fn cmd_assess(cfg: &RunConfig, out: &Path) -> Result<(RiskReport, String), CliError> {
    let raw = load_raw(cfg)?;
    let report = score(&raw, cfg)?;
    output::write_json(
        &out.join(RISK_RAW_JSON),
        &RiskFile {
            seed: cfg.seed,
            report: report.clone(),
        },
    )?;
    let table = ranked_table(&report);
    Ok((report, table))
}

/// Applies the plan and writes `published.csv` and `suppression.json`.
pub fn cmd_protect(
    cfg: &RunConfig,
    preset: Option<&str>,
    out: &Path,
) -> Result<(Dataset, SuppressionLog, String), CliError> {
    let raw = load_raw(cfg)?;
    let plan = cfg.resolve_plan(preset)?;
    let (published, log) = apply_plan(&raw, &plan)?;
    output::write_atomic(
        &out.join(PUBLISHED_CSV),
        output::with_seed_line(plan.seed, &dataset_csv(&published)).as_bytes(),
    )?;
    output::write_json(
        &out.join(SUPPRESSION_JSON),
        &SuppressionFile {
            seed: plan.seed,
            plan: plan.clone(),
            input_rows: raw.n_rows(),
            published_rows: published.n_rows(),
            suppressed: log.entries.clone(),
        },
    )?;
    let summary = format!(
        "{plan}: {} of {} rows published, {} suppressed\n",
        published.n_rows(),
        raw.n_rows(),
        log.len()
    );
    Ok((published, log, summary))
}

fn risk_delta(seed: u64, raw: &RiskReport, published: &RiskReport) -> RiskDelta {
    let by_name = |r: &RiskReport| -> BTreeMap<String, f64> {
        r.scores
            .iter()
            .map(|s| (s.attribute.clone(), s.mi_nats))
            .collect()
    };
    let pub_scores = by_name(published);
    RiskDelta {
        seed,
        estimator: published.estimator.clone(),
        scope: published.scope,
        baseline_total: raw.total_mi,
        published_total: published.total_mi,
        risk_reduced: published.risk_reduced.unwrap_or(0.0),
        attributes: by_name(raw)
            .into_iter()
            .map(|(attribute, r)| {
                let p = pub_scores[&attribute];
                AttributeDelta {
                    attribute,
                    raw_mi_nats: r,
                    published_mi_nats: p,
                    delta: p - r,
                }
            })
            .collect(),
    }
}

pub struct Evaluation {
    pub risk_raw: RiskReport,
    pub risk_published: RiskReport,
    pub delta: RiskDelta,
    pub utility: UtilityReport,
    pub summary: String,
}

impl Evaluation {
    /// Rows whose classifier could not be evaluated.
    pub fn failed_rows(&self) -> Vec<&UtilityRow> {
        self.utility
            .rows
            .iter()
            .filter(|r| r.error.is_some())
            .collect()
    }
}

/// Reads a published CSV (and its suppression log, if next to it) and writes
/// the published risk, the risk delta and the utility reports.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    published_csv: Option<&Path>,
    out: &Path,
) -> Result<Evaluation, CliError> {
    let raw = load_raw(cfg)?;
    let path: PathBuf = published_csv
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.join(PUBLISHED_CSV));
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Load(format!("{}: {e}", path.display())))?;
    let published = read_csv(text.as_bytes(), &raw.roles(), None)
        .map_err(|e| CliError::Load(format!("{}: {e}", path.display())))?;
    if published.schema().names() != raw.schema().names() {
        return Err(CliError::Config(format!(
            "{} columns {:?} do not match the input columns {:?}",
            path.display(),
            published.schema().names(),
            raw.schema().names()
        )));
    }

    let log_path = path.with_file_name(SUPPRESSION_JSON);
    let (name, origin) = if log_path.exists() {
        let s: SuppressionFile = serde_json::from_str(
            &fs::read_to_string(&log_path)
                .map_err(|e| CliError::Load(format!("{}: {e}", log_path.display())))?,
        )
        .map_err(|e| CliError::Load(format!("{}: {e}", log_path.display())))?;
        let log = SuppressionLog {
            entries: s.suppressed,
        };
        (s.plan.name, log.retained_rows(raw.n_rows()))
    } else {
        ("published".to_string(), (0..raw.n_rows()).collect())
    };
    if origin.len() != published.n_rows() {
        return Err(CliError::Config(format!(
            "{} has {} rows but the suppression log leaves {}",
            path.display(),
            published.n_rows(),
            origin.len()
        )));
    }

    let risk_raw = score(&raw, cfg)?;
    let risk_published = score(&published, cfg)?
        .relative_to(&risk_raw)
        .map_err(|e| CliError::Degenerate(e.to_string()))?;
    let delta = risk_delta(cfg.seed, &risk_raw, &risk_published);
    let utility = utility_report(
        &raw,
        &[Variant {
            name,
            data: published,
            origin,
        }],
        &cfg.classifiers,
        cfg.split_config(),
        Execution::default(),
    )
    .map_err(|e| CliError::Degenerate(e.to_string()))?;

    let seed = cfg.seed;
    output::write_json(
        &out.join(RISK_RAW_JSON),
        &RiskFile {
            seed,
            report: risk_raw.clone(),
        },
    )?;
    output::write_json(
        &out.join(RISK_PUBLISHED_JSON),
        &RiskFile {
            seed,
            report: risk_published.clone(),
        },
    )?;
    output::write_json(&out.join(RISK_DELTA_JSON), &delta)?;
    output::write_json(
        &out.join(UTILITY_JSON),
        &UtilityFile {
            seed,
            report: utility.clone(),
        },
    )?;
    output::write_atomic(
        &out.join(UTILITY_CSV),
        output::with_seed_line(seed, &utility.to_csv()).as_bytes(),
    )?;

    let mut summary = format!(
        "risk_reduced = {:.4} (total MI {:.5} -> {:.5})\n",
        delta.risk_reduced, delta.baseline_total, delta.published_total
    );
    for r in &utility.rows {
        match (&r.metrics, &r.error) {
            (Some(m), _) => {
                let _ = writeln!(
                    summary,
                    "{:<14} {:<34} acc {:.3} prec {:.3} rec {:.3} f1 {:.3}",
                    r.variant, r.classifier, m.accuracy, m.precision, m.recall, m.f1
                );
            }
            (None, e) => {
                let _ = writeln!(
                    summary,
                    "{:<14} {:<34} error: {}",
                    r.variant,
                    r.classifier,
                    e.as_deref().unwrap_or("?")
                );
            }
        }
    }
    Ok(Evaluation {
        risk_raw,
        risk_published,
        delta,
        utility,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub preset: String,
    pub risk_reduced: Option<f64>,
    pub suppressed: Option<usize>,
    /// Classifier label to metrics, in config order.
    pub metrics: Vec<(String, Option<Metrics>)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareFile {
    pub seed: u64,
    pub raw_total_mi: f64,
    pub raw: Vec<(String, Option<Metrics>)>,
    pub rows: Vec<CompareRow>,
}

struct PresetRun {
    name: String,
    outcome: Result<(Variant, f64, usize), String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl CompareFile {
    pub fn to_csv(&self) -> String {
        let mut header = vec![
            "preset".to_string(),
            "risk_reduced".into(),
            "suppressed".into(),
        ];
        let labels: Vec<&String> = self.raw.iter().map(|(l, _)| l).collect();
        for l in &labels {
            for m in ["accuracy", "precision", "recall", "f1"] {
                header.push(format!("{l}:{m}"));
            }
        }
        header.push("error".into());
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![
                    r.preset.clone(),
                    fmt_opt(r.risk_reduced),
                    r.suppressed.map(|s| s.to_string()).unwrap_or_default(),
                ];
                for (_, m) in &r.metrics {
                    cells.push(fmt_opt(m.map(|m| m.accuracy)));
                    cells.push(fmt_opt(m.map(|m| m.precision)));
                    cells.push(fmt_opt(m.map(|m| m.recall)));
                    cells.push(fmt_opt(m.map(|m| m.f1)));
                }
                cells.push(r.error.clone().unwrap_or_default());
                cells
            })
            .collect();
        output::csv_text(&header, &rows)
    }
}

/// Runs every preset under the run seed and writes `compare.csv` and
/// `compare.json`, sorted by `risk_reduced` (failed presets last).
pub fn cmd_compare(
    cfg: &RunConfig,
    presets: Option<&str>,
    out: &Path,
) -> Result<(CompareFile, String), CliError> {
    let names = cfg.compare_presets(presets);
    if names.is_empty() {
        return Err(CliError::Config("no presets to compare".into()));
    }
    let raw = load_raw(cfg)?;
    let risk_raw = score(&raw, cfg)?;
    if risk_raw.total_mi <= 0.0 {
        return Err(CliError::Degenerate(
            "raw total mutual information is zero".into(),
        ));
    }

    let runs: Vec<PresetRun> = Execution::default().map(&names, |name| {
        let outcome = (|| -> Result<(Variant, f64, usize), String> {
            let plan = cfg.resolve_plan(Some(name)).map_err(|e| e.to_string())?;
            let (data, log) = apply_plan(&raw, &plan).map_err(|e| e.to_string())?;
            let report =
                attribute_risk_scores(&data, cfg.estimator, cfg.risk_scope, Execution::Sequential)
                    .and_then(|r| r.relative_to(&risk_raw))
                    .map_err(|e| e.to_string())?;
            let origin = log.retained_rows(raw.n_rows());
            Ok((
                Variant {
                    name: name.clone(),
                    data,
                    origin,
                },
                report.risk_reduced.unwrap_or(0.0),
                log.len(),
            ))
        })();
        PresetRun {
            name: name.clone(),
            outcome,
        }
    });

    let variants: Vec<Variant> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|o| o.0.clone()))
        .collect();
    let utility = utility_report(
        &raw,
        &variants,
        &cfg.classifiers,
        cfg.split_config(),
        Execution::default(),
    )
    .map_err(|e| CliError::Degenerate(e.to_string()))?;
    let labels: Vec<String> = cfg.classifiers.iter().map(|c| c.to_string()).collect();
    let metrics_of = |variant: &str| -> (Vec<(String, Option<Metrics>)>, Vec<String>) {
        let mut errors = Vec::new();
        let m = labels
            .iter()
            .map(|l| {
                let row = utility.row(variant, l);
                if let Some(e) = row.and_then(|r| r.error.as_ref()) {
                    errors.push(format!("{l}: {e}"));
                }
                (l.clone(), row.and_then(|r| r.metrics))
            })
            .collect();
        (m, errors)
    };
    let (raw_metrics, raw_errors) = metrics_of("raw");
    if !raw_errors.is_empty() {
        return Err(CliError::Degenerate(raw_errors.join("; ")));
    }

    let mut rows: Vec<CompareRow> = runs
        .into_iter()
        .map(|r| match r.outcome {
            Ok((_, ratio, suppressed)) => {
                let (metrics, errors) = metrics_of(&r.name);
                CompareRow {
                    preset: r.name,
                    risk_reduced: Some(ratio),
                    suppressed: Some(suppressed),
                    metrics,
                    error: (!errors.is_empty()).then(|| errors.join("; ")),
                }
            }
            Err(e) => CompareRow {
                preset: r.name,
                risk_reduced: None,
                suppressed: None,
                metrics: labels.iter().map(|l| (l.clone(), None)).collect(),
                error: Some(e),
            },
        })
        .collect();
    rows.sort_by(|a, b| match (a.risk_reduced, b.risk_reduced) {
        (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| a.preset.cmp(&b.preset)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.preset.cmp(&b.preset),
    });

    let file = CompareFile {
        seed: cfg.seed,
        raw_total_mi: risk_raw.total_mi,
        raw: raw_metrics,
        rows,
    };
    output::write_json(
        &out.join(RISK_RAW_JSON),
        &RiskFile {
            seed: cfg.seed,
            report: risk_raw,
        },
    )?;
    output::write_json(&out.join(COMPARE_JSON), &file)?;
    output::write_atomic(
        &out.join(COMPARE_CSV),
        output::with_seed_line(cfg.seed, &file.to_csv()).as_bytes(),
    )?;

    let mut summary = format!("{:<16} {:>12}", "preset", "risk_reduced");
    for l in &labels {
        let _ = write!(
            summary,
            " {:>14}",
            format!("prec {}", l.split('(').next().unwrap_or(l))
        );
    }
    summary.push('\n');
    let mut line = |name: &str, ratio: Option<f64>, metrics: &[(String, Option<Metrics>)]| {
        let _ = write!(
            summary,
            "{:<16} {:>12}",
            name,
            ratio.map(|r| format!("{r:.4}")).unwrap_or("-".into())
        );
        for (_, m) in metrics {
            let _ = write!(
                summary,
                " {:>14}",
                m.map(|m| format!("{:.3}", m.precision))
                    .unwrap_or("-".into())
            );
        }
        summary.push('\n');
    };
    line("raw", Some(0.0), &file.raw);
    for r in &file.rows {
        line(&r.preset, r.risk_reduced, &r.metrics);
    }
    Ok((file, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use medpriv_core::transforms::Preset;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::Transform(TransformError::AllSuppressed { k: 9, n_rows: 3 }).exit_code(),
            3
        );
        assert_eq!(
            CliError::Transform(TransformError::UnknownAttribute("q".into())).exit_code(),
            2
        );
        assert_eq!(CliError::Degenerate("d".into()).exit_code(), 4);
    }

    #[test]
    fn compare_csv_layout() {
        let m = Metrics {
            accuracy: 0.5,
            precision: 0.25,
            recall: 1.0,
            f1: 0.4,
        };
        let file = CompareFile {
            seed: 1,
            raw_total_mi: 1.0,
            raw: vec![("knn(k=5)".into(), Some(m))],
            rows: vec![
                CompareRow {
                    preset: Preset::Ra.to_string(),
                    risk_reduced: Some(0.5),
                    suppressed: Some(0),
                    metrics: vec![("knn(k=5)".into(), Some(m))],
                    error: None,
                },
                CompareRow {
                    preset: "K_L".into(),
                    risk_reduced: None,
                    suppressed: None,
                    metrics: vec![("knn(k=5)".into(), None)],
                    error: Some("transform: l = 2, only 1".into()),
                },
            ],
        };
        assert_eq!(
            file.to_csv(),
            "preset,risk_reduced,suppressed,knn(k=5):accuracy,knn(k=5):precision,knn(k=5):recall,knn(k=5):f1,error\n\
             RA,0.5,0,0.5,0.25,1,0.4,\n\
             K_L,,,,,,,\"transform: l = 2, only 1\"\n"
        );
    }
}
