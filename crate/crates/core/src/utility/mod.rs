//! Data utility measured as binary classification quality on raw and
//! protected versions of a dataset.

mod encode;
mod knn;
mod logreg;
mod metrics;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{stratified_split_indices, Dataset};
use crate::exec::Execution;

pub use encode::{FeatureEncoder, FeatureMap, Matrix};
pub use knn::knn_predict;
pub use logreg::{loss_and_gradient, LogisticModel};
pub use metrics::{confusion_matrix, metrics_from_cm, ConfusionMatrix, Metrics};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtilityError {
    #[error("no usable features remain after encoding")]
    NoUsableFeatures,
    #[error("empty training set")]
    EmptyTrain,
    #[error("empty confusion matrix")]
    EmptyMatrix,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("label {0} is not 0 or 1")]
    NonBinaryLabel(u8),
    #[error("logistic regression diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid classifier: {0}")]
    InvalidSpec(String),
    #[error("attribute `{0}` is missing or changed kind since encoding")]
    EncodingMismatch(String),
    #[error("{fold} fold has no rows of class {class}")]
    MissingClass { fold: &'static str, class: u8 },
    #[error("variant rows do not line up with the raw data: {0}")]
    Misaligned(String),
    #[error("split failed: {0}")]
    Split(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    #[serde(rename = "logreg")]
    LogReg {
        #[serde(default = "default_lr")]
        learning_rate: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
        #[serde(default)]
        l2: f64,
    },
}

fn default_k() -> usize {
    5
}

fn default_lr() -> f64 {
    0.1
}

fn default_epochs() -> usize {
    1000
}

impl ClassifierSpec {
    pub fn knn() -> Self {
        ClassifierSpec::Knn { k: default_k() }
    }

    pub fn logreg() -> Self {
        ClassifierSpec::LogReg {
            learning_rate: default_lr(),
            epochs: default_epochs(),
            l2: 0.0,
        }
    }

    pub fn defaults() -> Vec<ClassifierSpec> {
        vec![Self::knn(), Self::logreg()]
    }

    pub fn validate(&self) -> Result<(), UtilityError> {
        let bad = |m: String| Err(UtilityError::InvalidSpec(m));
        match *self {
            ClassifierSpec::Knn { k: 0 } => bad("knn k must be >= 1".into()),
            ClassifierSpec::LogReg { learning_rate, .. }
                if !(learning_rate.is_finite() && learning_rate > 0.0) =>
            {
                bad(format!("learning_rate must be > 0, got {learning_rate}"))
            }
            ClassifierSpec::LogReg { epochs: 0, .. } => bad("epochs must be >= 1".into()),
            ClassifierSpec::LogReg { l2, .. } if !(l2.is_finite() && l2 >= 0.0) => {
                bad(format!("l2 must be >= 0, got {l2}"))
            }
            _ => Ok(()),
        }
    }

    /// Trains on the encoded training fold and labels the test fold.
    pub fn fit_predict(
        &self,
        train: &Matrix,
        labels: &[u8],
        test: &Matrix,
        exec: Execution,
    ) -> Result<Vec<u8>, UtilityError> {
        self.validate()?;
        match *self {
            ClassifierSpec::Knn { k } => knn_predict(train, labels, test, k, exec),
            ClassifierSpec::LogReg {
                learning_rate,
                epochs,
                l2,
            } => Ok(LogisticModel::fit(train, labels, learning_rate, epochs, l2)?.predict(test)),
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Knn { k } => write!(f, "knn(k={k})"),
            ClassifierSpec::LogReg {
                learning_rate,
                epochs,
                l2,
            } => write!(f, "logreg(lr={learning_rate};epochs={epochs};l2={l2})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_test_fraction() -> f64 {
    0.2
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: default_test_fraction(),
            seed: 0,
        }
    }
}

/// A dataset to evaluate, with the raw row each of its rows came from.
#[derive(Debug, Clone)]
pub struct Variant {
    pub name: String,
    pub data: Dataset,
    pub origin: Vec<usize>,
}

impl Variant {
    /// A variant whose rows map one-to-one onto the raw rows.
    pub fn whole(name: impl Into<String>, data: Dataset) -> Variant {
        let origin = (0..data.n_rows()).collect();
        Variant {
            name: name.into(),
            data,
            origin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityRow {
    pub variant: String,
    pub classifier: String,
    pub n_train: usize,
    pub n_test: usize,
    pub suppressed: usize,
    pub confusion: Option<ConfusionMatrix>,
    pub metrics: Option<Metrics>,
    pub delta: Option<Metrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub baseline: String,
    pub split: SplitConfig,
    pub rows: Vec<UtilityRow>,
}

impl UtilityReport {
    pub fn row(&self, variant: &str, classifier: &str) -> Option<&UtilityRow> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.classifier == classifier)
    }

    /// Flat table: one line per (variant, classifier). Missing values are
    /// empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "variant,classifier,n_train,n_test,suppressed,tp,tn,fp,fn,accuracy,precision,recall,f1,\
             delta_accuracy,delta_precision,delta_recall,delta_f1,error\n",
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let cm = r.confusion;
            let cells = [
                r.variant.clone(),
                r.classifier.clone(),
                r.n_train.to_string(),
                r.n_test.to_string(),
                r.suppressed.to_string(),
                cm.map(|c| c.tp.to_string()).unwrap_or_default(),
                cm.map(|c| c.tn.to_string()).unwrap_or_default(),
                cm.map(|c| c.fp.to_string()).unwrap_or_default(),
                cm.map(|c| c.fn_.to_string()).unwrap_or_default(),
                opt(r.metrics.map(|m| m.accuracy)),
                opt(r.metrics.map(|m| m.precision)),
                opt(r.metrics.map(|m| m.recall)),
                opt(r.metrics.map(|m| m.f1)),
                opt(r.delta.map(|m| m.accuracy)),
                opt(r.delta.map(|m| m.precision)),
                opt(r.delta.map(|m| m.recall)),
                opt(r.delta.map(|m| m.f1)),
                r.error.clone().unwrap_or_default(),
            ];
            let escaped: Vec<String> = cells.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&escaped.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Folds {
    train: Dataset,
    test: Dataset,
}

/// Restricts the raw train/test row sets to the rows a variant kept.
fn variant_folds(v: &Variant, raw_labels: &[u8], in_test: &[bool]) -> Result<Folds, UtilityError> {
    if v.origin.len() != v.data.n_rows() {
        return Err(UtilityError::Misaligned(format!(
            "{} origin entries for {} rows",
            v.origin.len(),
            v.data.n_rows()
        )));
    }
    let labels = v.data.labels();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (row, &o) in v.origin.iter().enumerate() {
        if o >= raw_labels.len() || raw_labels[o] != labels[row] {
            return Err(UtilityError::Misaligned(format!("row {row} (raw row {o})")));
        }
        if in_test[o] {
            test.push(row);
        } else {
            train.push(row);
        }
    }
    let folds = Folds {
        train: v.data.select_rows(&train),
        test: v.data.select_rows(&test),
    };
    for (fold, ds) in [("train", &folds.train), ("test", &folds.test)] {
        let l = ds.labels();
        for class in [0u8, 1] {
            if !l.contains(&class) {
                return Err(UtilityError::MissingClass { fold, class });
            }
        }
    }
    Ok(folds)
}

fn evaluate(
    folds: &Folds,
    spec: &ClassifierSpec,
    exec: Execution,
) -> Result<ConfusionMatrix, UtilityError> {
    let enc = FeatureEncoder::fit(&folds.train)?;
    let xtr = enc.transform(&folds.train)?;
    let xte = enc.transform(&folds.test)?;
    let pred = spec.fit_predict(&xtr, &folds.train.labels(), &xte, exec)?;
    confusion_matrix(&folds.test.labels(), &pred)
}

/// Trains and scores every classifier on the raw data and on each variant.
///
/// One stratified split of the raw rows is shared by all variants; a variant
/// evaluates on the rows of each fold it still holds. A failing pair is kept
/// as a row carrying the error message. Deltas are taken against the raw row
/// of the same classifier.
pub fn utility_report(
    raw: &Dataset,
    variants: &[Variant],
    specs: &[ClassifierSpec],
    split: SplitConfig,
    exec: Execution,
) -> Result<UtilityReport, UtilityError> {
    for s in specs {
        s.validate()?;
    }
    let raw_labels = raw.labels();
    let (_, test_rows) = stratified_split_indices(&raw_labels, split.test_fraction, split.seed)
        .map_err(|e| UtilityError::Split(e.to_string()))?;
    let mut in_test = vec![false; raw.n_rows()];
    for r in test_rows {
        in_test[r] = true;
    }

    let mut all = vec![Variant::whole("raw", raw.clone())];
    all.extend(variants.iter().cloned());
    let folds: Vec<Result<Folds, UtilityError>> = all
        .iter()
        .map(|v| variant_folds(v, &raw_labels, &in_test))
        .collect();

    let jobs: Vec<(usize, usize)> = (0..all.len())
        .flat_map(|v| (0..specs.len()).map(move |s| (v, s)))
        .collect();
    let outcomes = exec.map(&jobs, |&(v, s)| match &folds[v] {
        Ok(f) => evaluate(f, &specs[s], Execution::Sequential),
        Err(e) => Err(e.clone()),
    });

    let mut rows = Vec::with_capacity(jobs.len());
    for (&(v, s), outcome) in jobs.iter().zip(outcomes) {
        let (n_train, n_test) = match &folds[v] {
            Ok(f) => (f.train.n_rows(), f.test.n_rows()),
            Err(_) => (0, 0),
        };
        let (confusion, metrics, error) =
            match outcome.and_then(|cm| Ok((cm, metrics_from_cm(&cm)?))) {
                Ok((cm, m)) => (Some(cm), Some(m), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
        rows.push(UtilityRow {
            variant: all[v].name.clone(),
            classifier: specs[s].to_string(),
            n_train,
            n_test,
            suppressed: raw.n_rows() - all[v].data.n_rows(),
            confusion,
            metrics,
            delta: None,
            error,
        });
    }
    let n_specs = specs.len();
    for i in 0..rows.len() {
        let base = rows[i % n_specs].metrics;
        rows[i].delta = match (rows[i].metrics, base) {
            (Some(m), Some(b)) => Some(m.minus(&b)),
            _ => None,
        };
    }
    Ok(UtilityReport {
        baseline: "raw".into(),
        split,
        rows,
    })
}
