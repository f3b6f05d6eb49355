//! Typed, role-annotated tables.
//!
//! A [`Dataset`] is immutable once built: transforms return new datasets.
//! The target column is always stored as `Numeric` holding only `0.0`/`1.0`.

mod column;
mod load;
mod split;
mod standardize;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use column::{Column, ColumnKind, Interval};
pub use load::{load_csv, read_csv, RoleMap};
pub use split::{stratified_split_indices, train_test_split};
pub use standardize::{standardize_numeric, ColumnStats, StandardizeStats};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("input has no header row")]
    MissingHeader,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: missing value in column `{column}`")]
    MissingCell { line: u64, column: String },
    #[error("role config names unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("no role configured for attribute `{0}`")]
    MissingRole(String),
    #[error("duplicate attribute `{0}`")]
    DuplicateAttribute(String),
    #[error("expected exactly one target attribute, found {0}")]
    TargetCount(usize),
    #[error("target `{column}` is not binary-codable: {detail}")]
    TargetNotBinary { column: String, detail: String },
    #[error("column `{column}` has {found} rows, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("identifier attribute `{0}` must be dropped first")]
    IdentifierPresent(String),
    #[error("target class {0} has no rows")]
    EmptyClass(u8),
    #[error("test fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("need at least 2 rows to split, got {0}")]
    TooFewRows(usize),
}

/// Role an attribute plays in the privacy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeRole {
    Identifier,
    #[serde(rename = "qid")]
    QuasiIdentifier,
    Sensitive,
    #[serde(rename = "nonsensitive")]
    NonSensitive,
    Target,
}

impl fmt::Display for AttributeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttributeRole::Identifier => "identifier",
            AttributeRole::QuasiIdentifier => "qid",
            AttributeRole::Sensitive => "sensitive",
            AttributeRole::NonSensitive => "nonsensitive",
            AttributeRole::Target => "target",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attribute {
    pub name: String,
    pub kind: ColumnKind,
    pub role: AttributeRole,
}

/// Ordered attribute list. Names are unique and exactly one is the target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schema {
    attributes: Vec<Attribute>,
}

impl Schema {
    fn new(attributes: Vec<Attribute>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(DatasetError::DuplicateAttribute(a.name.clone()));
            }
        }
        let targets = attributes
            .iter()
            .filter(|a| a.role == AttributeRole::Target)
            .count();
        if targets != 1 {
            return Err(DatasetError::TargetCount(targets));
        }
        Ok(Schema { attributes })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Number of non-target attributes.
    pub fn m(&self) -> usize {
        self.attributes.len() - 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn target(&self) -> &Attribute {
        self.attributes
            .iter()
            .find(|a| a.role == AttributeRole::Target)
            .expect("schema invariant: one target")
    }

    pub fn names(&self) -> Vec<&str> {
        self.attributes.iter().map(|a| a.name.as_str()).collect()
    }
}

/// Column-oriented table with a role-annotated schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Column>,
    n_rows: usize,
}

impl Dataset {
    /// Builds a dataset, checking column lengths, name uniqueness, a single
    /// target, and that the target holds only 0/1.
    pub fn new(
        attributes: Vec<(String, AttributeRole)>,
        columns: Vec<Column>,
    ) -> Result<Self, DatasetError> {
        assert_eq!(attributes.len(), columns.len(), "one column per attribute");
        let n_rows = columns.first().map_or(0, Column::len);
        let attrs = attributes
            .into_iter()
            .zip(&columns)
            .map(|((name, role), col)| Attribute {
                name,
                kind: col.kind(),
                role,
            })
            .collect::<Vec<_>>();
        for (a, c) in attrs.iter().zip(&columns) {
            if c.len() != n_rows {
                return Err(DatasetError::LengthMismatch {
                    column: a.name.clone(),
                    expected: n_rows,
                    found: c.len(),
                });
            }
        }
        let schema = Schema::new(attrs)?;
        let ti = schema.index_of(&schema.target().name).unwrap();
        match &columns[ti] {
            Column::Numeric(v) if v.iter().all(|&x| x == 0.0 || x == 1.0) => {}
            _ => {
                return Err(DatasetError::TargetNotBinary {
                    column: schema.target().name.clone(),
                    detail: "target must be numeric 0/1".into(),
                })
            }
        }
        Ok(Dataset {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.schema.index_of(name).map(|i| &self.columns[i])
    }

    pub fn target_name(&self) -> &str {
        &self.schema.target().name
    }

    /// Target labels as 0/1.
    pub fn labels(&self) -> Vec<u8> {
        self.column(self.target_name())
            .and_then(Column::as_numeric)
            .expect("target is numeric")
            .iter()
            .map(|&v| v as u8)
            .collect()
    }

    /// Non-target attributes with their columns, in schema order.
    pub fn features(&self) -> impl Iterator<Item = (&Attribute, &Column)> {
        self.schema
            .attributes
            .iter()
            .zip(&self.columns)
            .filter(|(a, _)| a.role != AttributeRole::Target)
    }

    /// Replaces a column, keeping name and role; the kind follows the new column.
    pub fn with_column(&self, name: &str, column: Column) -> Result<Dataset, DatasetError> {
        let idx = self
            .schema
            .index_of(name)
            .ok_or_else(|| DatasetError::UnknownAttribute(name.to_string()))?;
        let mut columns = self.columns.clone();
        columns[idx] = column;
        Dataset::new(self.role_list(), columns)
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns: Vec<Column> = self.columns.iter().map(|c| c.select(rows)).collect();
        Dataset {
            schema: self.schema.clone(),
            columns,
            n_rows: rows.len(),
        }
    }

    /// `(name, role)` pairs in schema order.
    pub fn role_list(&self) -> Vec<(String, AttributeRole)> {
        self.schema
            .attributes
            .iter()
            .map(|a| (a.name.clone(), a.role))
            .collect()
    }

    /// Row `r` rendered as CSV tokens.
    pub fn row_tokens(&self, r: usize) -> Vec<String> {
        self.columns.iter().map(|c| c.token(r)).collect()
    }

    /// Removes every identifier column. Row count is unchanged.
    pub fn drop_identifiers(&self) -> Dataset {
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&i| self.schema.attributes[i].role != AttributeRole::Identifier)
            .collect();
        Dataset {
            schema: Schema {
                attributes: keep
                    .iter()
                    .map(|&i| self.schema.attributes[i].clone())
                    .collect(),
            },
            columns: keep.iter().map(|&i| self.columns[i].clone()).collect(),
            n_rows: self.n_rows,
        }
    }

    /// Splits attributes into quasi-identifier, sensitive, non-sensitive and
    /// target sets.
    pub fn partition(&self) -> Result<PartitionView, DatasetError> {
        let mut view = PartitionView {
            q: BTreeSet::new(),
            s: BTreeSet::new(),
            m_set: BTreeSet::new(),
            y: self.target_name().to_string(),
        };
        for a in &self.schema.attributes {
            match a.role {
                AttributeRole::Identifier => {
                    return Err(DatasetError::IdentifierPresent(a.name.clone()))
                }
                AttributeRole::QuasiIdentifier => view.q.insert(a.name.clone()),
                AttributeRole::Sensitive => view.s.insert(a.name.clone()),
                AttributeRole::NonSensitive => view.m_set.insert(a.name.clone()),
                AttributeRole::Target => true,
            };
        }
        Ok(view)
    }

    /// Names of attributes with the given role, in schema order.
    pub fn names_with_role(&self, role: AttributeRole) -> Vec<String> {
        self.schema
            .attributes
            .iter()
            .filter(|a| a.role == role)
            .map(|a| a.name.clone())
            .collect()
    }

    pub fn roles(&self) -> BTreeMap<String, AttributeRole> {
        self.role_list().into_iter().collect()
    }
}

/// The Q/S/M/Y split of a dataset's attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionView {
    pub q: BTreeSet<String>,
    pub s: BTreeSet<String>,
    pub m_set: BTreeSet<String>,
    pub y: String,
}

impl PartitionView {
    /// Quasi-identifiers and sensitive attributes together.
    pub fn protected(&self) -> BTreeSet<String> {
        self.q.union(&self.s).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use AttributeRole::*;

    fn ds(attrs: &[(&str, AttributeRole)]) -> Dataset {
        let cols = attrs
            .iter()
            .map(|(_, r)| match r {
                Target => Column::Numeric(vec![0.0, 1.0, 1.0]),
                _ => Column::Numeric(vec![1.0, 2.0, 3.0]),
            })
            .collect();
        Dataset::new(
            attrs.iter().map(|(n, r)| (n.to_string(), *r)).collect(),
            cols,
        )
        .unwrap()
    }

    #[test]
    fn drop_identifiers_keeps_rows() {
        let d = ds(&[("ssn", Identifier), ("age", QuasiIdentifier), ("y", Target)]);
        let out = d.drop_identifiers();
        assert_eq!(out.schema().names(), vec!["age", "y"]);
        assert_eq!(out.n_rows(), 3);

        let none = ds(&[("age", QuasiIdentifier), ("y", Target)]);
        assert_eq!(none.drop_identifiers(), none);

        let five = ds(&[
            ("a", Identifier),
            ("b", Identifier),
            ("c", Identifier),
            ("d", Sensitive),
            ("y", Target),
        ]);
        let out = five.drop_identifiers();
        assert_eq!(out.schema().len(), 2);
        assert_eq!(out.n_rows(), 3);
    }

    #[test]
    fn partition_follows_roles() {
        let d = ds(&[
            ("age", QuasiIdentifier),
            ("sex", QuasiIdentifier),
            ("cp", QuasiIdentifier),
            ("thalach", Sensitive),
            ("ca", Sensitive),
            ("thal", Sensitive),
            ("chol", NonSensitive),
            ("target", Target),
        ]);
        let v = d.partition().unwrap();
        assert_eq!(v.q.len(), 3);
        assert_eq!(v.s.len(), 3);
        assert_eq!(v.m_set.len(), 1);
        assert_eq!(v.y, "target");
        assert!(v.q.is_disjoint(&v.s) && v.s.is_disjoint(&v.m_set) && v.q.is_disjoint(&v.m_set));
        assert_eq!(v.q.len() + v.s.len() + v.m_set.len(), d.schema().m());

        let single = ds(&[("x", QuasiIdentifier), ("y", Target)]);
        let v = single.partition().unwrap();
        assert_eq!(v.q.iter().collect::<Vec<_>>(), vec!["x"]);
        assert!(v.s.is_empty() && v.m_set.is_empty());

        let bad = ds(&[("ssn", Identifier), ("y", Target)]);
        assert!(matches!(
            bad.partition(),
            Err(DatasetError::IdentifierPresent(_))
        ));
    }

    #[test]
    fn constructor_checks_invariants() {
        let two_targets = Dataset::new(
            vec![("a".into(), Target), ("b".into(), Target)],
            vec![Column::Numeric(vec![0.0]), Column::Numeric(vec![1.0])],
        );
        assert!(matches!(two_targets, Err(DatasetError::TargetCount(2))));
        let ragged = Dataset::new(
            vec![("a".into(), Sensitive), ("y".into(), Target)],
            vec![Column::Numeric(vec![0.0, 1.0]), Column::Numeric(vec![1.0])],
        );
        assert!(matches!(ragged, Err(DatasetError::LengthMismatch { .. })));
        let nonbinary = Dataset::new(vec![("y".into(), Target)], vec![Column::Numeric(vec![2.0])]);
        assert!(matches!(
            nonbinary,
            Err(DatasetError::TargetNotBinary { .. })
        ));
    }
}
