//! Anonymization transforms and declarative protection plans.
//!
//! Six primitive steps (additive noise, multiplicative noise, k-anonymity,
//! l-diversity, binning, masking) are composed into a [`ProtectionPlan`] and
//! applied in order by [`apply_plan`]. Every step is a pure function of the
//! input dataset, its parameters and the plan seed.

mod binning;
mod generalize;
mod kanon;
mod ldiv;
mod masking;
mod noise;
mod preset;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeRole, Column, ColumnKind, Dataset, Schema};
use crate::rng;

pub use binning::{bin_column, BinStrategy};
pub use kanon::k_anonymize;
pub use ldiv::enforce_l_diversity;
pub use masking::{mask_column, MaskMode, MASK_TOKEN};
pub use noise::{rand_additive, rand_multiplicative};
pub use preset::{preset_plan, Family, Preset};

/// Default relative noise scale for both randomization steps.
pub const DEFAULT_SIGMA_REL: f64 = 1.0;
pub const DEFAULT_K: usize = 5;
pub const DEFAULT_L: usize = 2;
pub const DEFAULT_N_BINS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attribute}` is {found}, expected {expected}")]
    IncompatibleKind {
        attribute: String,
        found: ColumnKind,
        expected: &'static str,
    },
    #[error("the target attribute `{0}` cannot be transformed")]
    TargetNotAllowed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("k = {k} exceeds the {n_rows} available rows; nothing can be released")]
    AllSuppressed { k: usize, n_rows: usize },
    #[error("l = {l} exceeds the {distinct} distinct values of `{sensitive}`")]
    Unsatisfiable {
        l: usize,
        distinct: usize,
        sensitive: String,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown dataset family `{0}`")]
    UnknownFamily(String),
    #[error("step {index} ({op}): {source}")]
    Step {
        index: usize,
        op: &'static str,
        source: Box<TransformError>,
    },
}

impl TransformError {
    /// The underlying error, with any step wrapper removed.
    pub fn root(&self) -> &TransformError {
        match self {
            TransformError::Step { source, .. } => source.root(),
            e => e,
        }
    }

    /// Whether the error means no publishable output exists for the inputs,
    /// as opposed to a malformed plan.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self.root(),
            TransformError::AllSuppressed { .. } | TransformError::Unsatisfiable { .. }
        )
    }
}

/// Attributes a noise or binning step acts on.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TargetSetRepr", into = "TargetSetRepr")]
pub enum TargetSet {
    /// Every non-target numeric attribute present when the step runs.
    #[default]
    AllNumeric,
    Named(Vec<String>),
}

impl TargetSet {
    pub fn named<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        TargetSet::Named(names.into_iter().map(Into::into).collect())
    }

    fn resolve(&self, schema: &Schema) -> Vec<String> {
        match self {
            TargetSet::AllNumeric => schema
                .attributes()
                .iter()
                .filter(|a| a.role != AttributeRole::Target && a.kind == ColumnKind::Numeric)
                .map(|a| a.name.clone())
                .collect(),
            TargetSet::Named(v) => v.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TargetSetRepr {
    Keyword(String),
    List(Vec<String>),
}

impl TryFrom<TargetSetRepr> for TargetSet {
    type Error = String;

    fn try_from(r: TargetSetRepr) -> Result<Self, String> {
        match r {
            TargetSetRepr::Keyword(k) if k.eq_ignore_ascii_case("all_numeric") => {
                Ok(TargetSet::AllNumeric)
            }
            TargetSetRepr::Keyword(k) => Err(format!(
                "targets must be \"all_numeric\" or a list of attributes, got \"{k}\""
            )),
            TargetSetRepr::List(v) => Ok(TargetSet::Named(v)),
        }
    }
}

impl From<TargetSet> for TargetSetRepr {
    fn from(t: TargetSet) -> Self {
        match t {
            TargetSet::AllNumeric => TargetSetRepr::Keyword("all_numeric".into()),
            TargetSet::Named(v) => TargetSetRepr::List(v),
        }
    }
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA_REL
}
fn default_n_bins() -> usize {
    DEFAULT_N_BINS
}

/// One step of a protection plan. Serialized with an `op` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformStep {
    /// `x + N(0, (sigma_rel * std(x))^2)`.
    #[serde(rename = "ra")]
    RandAdditive {
        #[serde(default = "default_sigma")]
        sigma_rel: f64,
        #[serde(default)]
        targets: TargetSet,
    },
    /// `x * (1 + N(0, sigma_rel^2))`.
    #[serde(rename = "rm")]
    RandMultiplicative {
        #[serde(default = "default_sigma")]
        sigma_rel: f64,
        #[serde(default)]
        targets: TargetSet,
    },
    #[serde(rename = "k")]
    KAnonymize { k: usize, qids: Vec<String> },
    #[serde(rename = "l")]
    LDiversify {
        l: usize,
        sensitive: String,
        qids: Vec<String>,
    },
    #[serde(rename = "bin")]
    Bin {
        #[serde(default = "default_n_bins")]
        n_bins: usize,
        #[serde(default)]
        strategy: BinStrategy,
        targets: TargetSet,
    },
    #[serde(rename = "mask")]
    Mask {
        #[serde(default)]
        mode: MaskMode,
        targets: Vec<String>,
    },
}

impl TransformStep {
    pub fn op(&self) -> &'static str {
        match self {
            TransformStep::RandAdditive { .. } => "ra",
            TransformStep::RandMultiplicative { .. } => "rm",
            TransformStep::KAnonymize { .. } => "k",
            TransformStep::LDiversify { .. } => "l",
            TransformStep::Bin { .. } => "bin",
            TransformStep::Mask { .. } => "mask",
        }
    }

    /// Checks parameters and target kinds against `schema`, returning the
    /// kinds the step leaves behind.
    fn check(&self, schema: &Schema) -> Result<Vec<(String, ColumnKind)>, TransformError> {
        let lookup = |name: &str| -> Result<ColumnKind, TransformError> {
            let attr = schema
                .get(name)
                .ok_or_else(|| TransformError::UnknownAttribute(name.to_string()))?;
            if attr.role == AttributeRole::Target {
                return Err(TransformError::TargetNotAllowed(name.to_string()));
            }
            Ok(attr.kind)
        };
        let require_numeric = |name: &str| -> Result<(), TransformError> {
            match lookup(name)? {
                ColumnKind::Numeric => Ok(()),
                found => Err(TransformError::IncompatibleKind {
                    attribute: name.to_string(),
                    found,
                    expected: "numeric",
                }),
            }
        };
        let check_qids = |qids: &[String]| -> Result<Vec<(String, ColumnKind)>, TransformError> {
            if qids.is_empty() {
                return Err(TransformError::InvalidParameter(
                    "quasi-identifier set is empty".into(),
                ));
            }
            let mut out = Vec::new();
            for q in qids {
                match lookup(q)? {
                    ColumnKind::MaskedToken => {
                        return Err(TransformError::IncompatibleKind {
                            attribute: q.clone(),
                            found: ColumnKind::MaskedToken,
                            expected: "numeric, interval or categorical",
                        })
                    }
                    ColumnKind::Numeric | ColumnKind::Interval => {
                        out.push((q.clone(), ColumnKind::Interval))
                    }
                    ColumnKind::Categorical => out.push((q.clone(), ColumnKind::Categorical)),
                }
            }
            Ok(out)
        };
        let check_sigma = |sigma: f64| {
            if sigma.is_finite() && sigma >= 0.0 {
                Ok(())
            } else {
                Err(TransformError::InvalidParameter(format!(
                    "sigma_rel must be a finite value >= 0, got {sigma}"
                )))
            }
        };

        match self {
            TransformStep::RandAdditive { sigma_rel, targets }
            | TransformStep::RandMultiplicative { sigma_rel, targets } => {
                check_sigma(*sigma_rel)?;
                for t in targets.resolve(schema) {
                    require_numeric(&t)?;
                }
                Ok(Vec::new())
            }
            TransformStep::KAnonymize { k, qids } => {
                if *k == 0 {
                    return Err(TransformError::InvalidParameter("k must be >= 1".into()));
                }
                let out = check_qids(qids)?;
                Ok(if *k == 1 { Vec::new() } else { out })
            }
            TransformStep::LDiversify { l, sensitive, qids } => {
                if *l == 0 {
                    return Err(TransformError::InvalidParameter("l must be >= 1".into()));
                }
                lookup(sensitive)?;
                if qids.contains(sensitive) {
                    return Err(TransformError::InvalidParameter(format!(
                        "`{sensitive}` cannot be both sensitive and quasi-identifier"
                    )));
                }
                let out = check_qids(qids)?;
                Ok(if *l == 1 { Vec::new() } else { out })
            }
            TransformStep::Bin {
                n_bins, targets, ..
            } => {
                if *n_bins == 0 {
                    return Err(TransformError::InvalidParameter(
                        "n_bins must be >= 1".into(),
                    ));
                }
                let names = targets.resolve(schema);
                for t in &names {
                    require_numeric(t)?;
                }
                Ok(names
                    .into_iter()
                    .map(|n| (n, ColumnKind::Interval))
                    .collect())
            }
            TransformStep::Mask { targets, .. } => {
                let mut out = Vec::new();
                for t in targets {
                    lookup(t)?;
                    out.push((t.clone(), ColumnKind::MaskedToken));
                }
                Ok(out)
            }
        }
    }
}

/// Why a row was withheld from the published data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuppressionReason {
    KAnonymity,
    LDiversity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuppressedRow {
    /// Index in the dataset the transform (or plan) was applied to.
    pub row: usize,
    pub reason: SuppressionReason,
}

/// Rows removed by k-anonymity or l-diversity. Indices are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuppressionLog {
    pub entries: Vec<SuppressedRow>,
}

impl SuppressionLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rows(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|e| e.row).collect()
    }

    /// Input rows that survive, in order, for an input of `n_rows`.
    pub fn retained_rows(&self, n_rows: usize) -> Vec<usize> {
        let gone = self.rows();
        (0..n_rows).filter(|r| !gone.contains(r)).collect()
    }

    fn record(&mut self, rows: impl IntoIterator<Item = usize>, reason: SuppressionReason) {
        self.entries
            .extend(rows.into_iter().map(|row| SuppressedRow { row, reason }));
    }
}

/// An ordered, seeded list of transform steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectionPlan {
    pub name: String,
    pub seed: u64,
    pub steps: Vec<TransformStep>,
}

impl ProtectionPlan {
    pub fn new(name: impl Into<String>, seed: u64, steps: Vec<TransformStep>) -> Self {
        ProtectionPlan {
            name: name.into(),
            seed,
            steps,
        }
    }

    /// Checks every step against the schema as it will look when the step
    /// runs, without touching any data.
    pub fn validate(&self, schema: &Schema) -> Result<(), TransformError> {
        let mut kinds: Vec<(String, ColumnKind, AttributeRole)> = schema
            .attributes()
            .iter()
            .map(|a| (a.name.clone(), a.kind, a.role))
            .collect();
        for (index, step) in self.steps.iter().enumerate() {
            let current = schema_with_kinds(&kinds);
            let changes = step.check(&current).map_err(|e| TransformError::Step {
                index,
                op: step.op(),
                source: Box::new(e),
            })?;
            for (name, kind) in changes {
                if let Some(entry) = kinds.iter_mut().find(|(n, _, _)| *n == name) {
                    entry.1 = kind;
                }
            }
        }
        Ok(())
    }
}

fn schema_with_kinds(kinds: &[(String, ColumnKind, AttributeRole)]) -> Schema {
    let columns = kinds
        .iter()
        .map(|(_, kind, role)| match (kind, role) {
            (_, AttributeRole::Target) | (ColumnKind::Numeric, _) => Column::Numeric(Vec::new()),
            (ColumnKind::Categorical, _) => Column::Categorical(Vec::new()),
            (ColumnKind::Interval, _) => Column::Interval(Vec::new()),
            (ColumnKind::MaskedToken, _) => Column::Masked(Vec::new()),
        })
        .collect();
    Dataset::new(
        kinds.iter().map(|(n, _, r)| (n.clone(), *r)).collect(),
        columns,
    )
    .expect("kinds come from a valid schema")
    .schema()
    .clone()
}

impl fmt::Display for ProtectionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops: Vec<&str> = self.steps.iter().map(TransformStep::op).collect();
        write!(f, "{} [{}] seed={}", self.name, ops.join(", "), self.seed)
    }
}

/// Applies a single step. `step_index` selects the noise streams.
pub fn apply_step(
    ds: &Dataset,
    step: &TransformStep,
    seed: u64,
    step_index: u32,
) -> Result<(Dataset, SuppressionLog), TransformError> {
    step.check(ds.schema())?;
    match step {
        TransformStep::RandAdditive { sigma_rel, targets }
        | TransformStep::RandMultiplicative { sigma_rel, targets } => {
            let additive = matches!(step, TransformStep::RandAdditive { .. });
            let mut out = ds.clone();
            for name in targets.resolve(ds.schema()) {
                let col_index = ds.schema().index_of(&name).expect("checked") as u32;
                let values = ds
                    .column(&name)
                    .and_then(Column::as_numeric)
                    .expect("checked");
                let mut rng = rng::stream(seed, step_index, col_index);
                let noisy = if additive {
                    rand_additive(values, *sigma_rel, &mut rng)
                } else {
                    rand_multiplicative(values, *sigma_rel, &mut rng)
                };
                out = out
                    .with_column(&name, Column::Numeric(noisy))
                    .expect("same shape");
            }
            Ok((out, SuppressionLog::default()))
        }
        TransformStep::KAnonymize { k, qids } => k_anonymize(ds, qids, *k),
        TransformStep::LDiversify { l, sensitive, qids } => {
            enforce_l_diversity(ds, qids, sensitive, *l)
        }
        TransformStep::Bin {
            n_bins,
            strategy,
            targets,
        } => {
            let mut out = ds.clone();
            for name in targets.resolve(ds.schema()) {
                let values = ds
                    .column(&name)
                    .and_then(Column::as_numeric)
                    .expect("checked");
                let binned = bin_column(values, *n_bins, *strategy)?;
                out = out
                    .with_column(&name, Column::Interval(binned))
                    .expect("same shape");
            }
            Ok((out, SuppressionLog::default()))
        }
        TransformStep::Mask { mode, targets } => {
            let mut out = ds.clone();
            for name in targets {
                let masked = mask_column(ds.column(name).expect("checked"), *mode);
                out = out.with_column(name, masked).expect("same shape");
            }
            Ok((out, SuppressionLog::default()))
        }
    }
}

/// Applies the plan's steps in order.
///
/// Step `i` draws noise from streams keyed by `(plan.seed, i, column index)`.
/// The returned log holds indices into `ds`.
pub fn apply_plan(
    ds: &Dataset,
    plan: &ProtectionPlan,
) -> Result<(Dataset, SuppressionLog), TransformError> {
    plan.validate(ds.schema())?;
    let mut current = ds.clone();
    let mut origin: Vec<usize> = (0..ds.n_rows()).collect();
    let mut log = SuppressionLog::default();
    for (index, step) in plan.steps.iter().enumerate() {
        let (next, step_log) =
            apply_step(&current, step, plan.seed, index as u32).map_err(|e| {
                TransformError::Step {
                    index,
                    op: step.op(),
                    source: Box::new(e),
                }
            })?;
        if !step_log.is_empty() {
            let gone = step_log.rows();
            for e in &step_log.entries {
                log.record([origin[e.row]], e.reason);
            }
            origin = origin
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !gone.contains(i))
                .map(|(_, o)| o)
                .collect();
        }
        current = next;
    }
    Ok((current, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AttributeRole::*;

    fn small() -> Dataset {
        Dataset::new(
            vec![
                ("age".into(), QuasiIdentifier),
                ("hr".into(), Sensitive),
                ("thal".into(), Sensitive),
                ("y".into(), Target),
            ],
            vec![
                Column::Numeric(vec![21.0, 22.0, 23.0, 35.0, 36.0, 37.0]),
                Column::Numeric(vec![150.0, 160.0, 170.0, 140.0, 130.0, 120.0]),
                Column::Categorical(["a", "b", "a", "b", "a", "b"].map(String::from).to_vec()),
                Column::Numeric(vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_plan_is_identity() {
        let ds = small();
        let (out, log) = apply_plan(&ds, &ProtectionPlan::new("none", 1, vec![])).unwrap();
        assert_eq!(out, ds);
        assert!(log.is_empty());
    }

    #[test]
    fn mask_touches_only_its_target() {
        let ds = small();
        let plan = ProtectionPlan::new(
            "m",
            1,
            vec![TransformStep::Mask {
                mode: MaskMode::Full,
                targets: vec!["hr".into()],
            }],
        );
        let (out, _) = apply_plan(&ds, &plan).unwrap();
        assert_eq!(out.column("hr").unwrap().tokens(), vec!["*"; 6]);
        for name in ["age", "thal", "y"] {
            assert_eq!(out.column(name), ds.column(name));
        }
    }

    #[test]
    fn validation_tracks_kinds_across_steps() {
        let ds = small();
        let plan = ProtectionPlan::new(
            "bad",
            1,
            vec![
                TransformStep::Mask {
                    mode: MaskMode::Full,
                    targets: vec!["age".into()],
                },
                TransformStep::Bin {
                    n_bins: 2,
                    strategy: BinStrategy::EqualWidth,
                    targets: TargetSet::named(["age"]),
                },
            ],
        );
        let err = apply_plan(&ds, &plan).unwrap_err();
        assert!(matches!(err, TransformError::Step { index: 1, .. }));
        assert!(matches!(
            err.root(),
            TransformError::IncompatibleKind { .. }
        ));

        let unknown = ProtectionPlan::new(
            "u",
            1,
            vec![TransformStep::KAnonymize {
                k: 2,
                qids: vec!["zip".into()],
            }],
        );
        assert!(matches!(
            apply_plan(&ds, &unknown).unwrap_err().root(),
            TransformError::UnknownAttribute(_)
        ));

        let target = ProtectionPlan::new(
            "t",
            1,
            vec![TransformStep::Mask {
                mode: MaskMode::Full,
                targets: vec!["y".into()],
            }],
        );
        assert!(matches!(
            apply_plan(&ds, &target).unwrap_err().root(),
            TransformError::TargetNotAllowed(_)
        ));
    }

    #[test]
    fn noise_steps_skip_target_and_categoricals() {
        let ds = small();
        let plan = ProtectionPlan::new(
            "ra",
            9,
            vec![TransformStep::RandAdditive {
                sigma_rel: 0.5,
                targets: TargetSet::AllNumeric,
            }],
        );
        let (out, _) = apply_plan(&ds, &plan).unwrap();
        assert_eq!(out.column("y"), ds.column("y"));
        assert_eq!(out.column("thal"), ds.column("thal"));
        assert_ne!(out.column("age"), ds.column("age"));
        assert_eq!(apply_plan(&ds, &plan).unwrap().0, out);
    }

    #[test]
    fn plan_json_layout() {
        let json = r#"{"name": "p", "seed": 3, "steps": [
            {"op": "ra", "sigma_rel": 0.2, "targets": "all_numeric"},
            {"op": "rm"},
            {"op": "k", "k": 5, "qids": ["age"]},
            {"op": "l", "l": 2, "sensitive": "cp", "qids": ["age"]},
            {"op": "bin", "n_bins": 4, "strategy": "equal_frequency", "targets": ["age"]},
            {"op": "mask", "mode": {"partial": {"keep_prefix": 1}}, "targets": ["ca"]},
            {"op": "mask", "targets": ["thal"]}
        ]}"#;
        let plan: ProtectionPlan = serde_json::from_str(json).unwrap();
        assert_eq!(plan.steps.len(), 7);
        assert_eq!(
            plan.steps[1],
            TransformStep::RandMultiplicative {
                sigma_rel: DEFAULT_SIGMA_REL,
                targets: TargetSet::AllNumeric
            }
        );
        assert_eq!(
            plan.steps[5],
            TransformStep::Mask {
                mode: MaskMode::Partial { keep_prefix: 1 },
                targets: vec!["ca".into()]
            }
        );
        let back: ProtectionPlan =
            serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
        assert_eq!(back, plan);
        assert!(serde_json::from_str::<ProtectionPlan>(
            r#"{"name":"x","seed":1,"steps":[{"op":"ra","targets":"everything"}]}"#
        )
        .is_err());
    }
}
