use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::UtilityError;
use crate::dataset::{Column, ColumnStats, Dataset};

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureMap {
    Standardized {
        attribute: String,
        stats: ColumnStats,
    },
    OneHot {
        attribute: String,
        levels: Vec<String>,
    },
}

impl FeatureMap {
    fn width(&self) -> usize {
        match self {
            FeatureMap::Standardized { .. } => 1,
            FeatureMap::OneHot { levels, .. } => levels.len(),
        }
    }
}

/// Column-wise encoding learned on a training fold.
///
/// Numeric attributes are standardized, categorical and interval attributes
/// are one-hot encoded over the training levels, and masked attributes are
/// one-hot encoded unless they hold a single token, in which case they are
/// dropped. Unseen levels encode as all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub features: Vec<FeatureMap>,
}

impl FeatureEncoder {
    pub fn fit(train: &Dataset) -> Result<FeatureEncoder, UtilityError> {
        let mut features = Vec::new();
        for (attr, col) in train.features() {
            let attribute = attr.name.clone();
            match col {
                Column::Numeric(v) => features.push(FeatureMap::Standardized {
                    attribute,
                    stats: ColumnStats::of(v),
                }),
                other => {
                    let levels: BTreeSet<String> = other.tokens().into_iter().collect();
                    if matches!(other, Column::Masked(_)) && levels.len() <= 1 {
                        continue;
                    }
                    features.push(FeatureMap::OneHot {
                        attribute,
                        levels: levels.into_iter().collect(),
                    });
                }
            }
        }
        if features.is_empty() {
            return Err(UtilityError::NoUsableFeatures);
        }
        Ok(FeatureEncoder { features })
    }

    pub fn width(&self) -> usize {
        self.features.iter().map(FeatureMap::width).sum()
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Matrix, UtilityError> {
        let mut m = Matrix::zeros(ds.n_rows(), self.width());
        let mut offset = 0;
        for f in &self.features {
            match f {
                FeatureMap::Standardized { attribute, stats } => {
                    let v = ds
                        .column(attribute)
                        .and_then(Column::as_numeric)
                        .ok_or_else(|| UtilityError::EncodingMismatch(attribute.clone()))?;
                    for (r, &x) in v.iter().enumerate() {
                        m.data[r * m.cols + offset] = stats.apply(x);
                    }
                }
                FeatureMap::OneHot { attribute, levels } => {
                    let col = ds
                        .column(attribute)
                        .ok_or_else(|| UtilityError::EncodingMismatch(attribute.clone()))?;
                    for r in 0..ds.n_rows() {
                        if let Ok(j) = levels.binary_search(&col.token(r)) {
                            m.data[r * m.cols + offset + j] = 1.0;
                        }
                    }
                }
            }
            offset += f.width();
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeRole::*, Interval};

    fn mixed() -> Dataset {
        Dataset::new(
            vec![
                ("x".into(), QuasiIdentifier),
                ("c".into(), Sensitive),
                ("iv".into(), NonSensitive),
                ("m".into(), NonSensitive),
                ("y".into(), Target),
            ],
            vec![
                Column::Numeric(vec![1.0, 2.0, 3.0, 4.0]),
                Column::Categorical(["a", "b", "c", "a"].map(String::from).to_vec()),
                Column::Interval(vec![
                    Interval::new(0.0, 1.0).unwrap(),
                    Interval::new(1.0, 2.0).unwrap(),
                    Interval::new(0.0, 1.0).unwrap(),
                    Interval::new(1.0, 2.0).unwrap(),
                ]),
                Column::Masked(vec!["*".into(); 4]),
                Column::Numeric(vec![0.0, 1.0, 0.0, 1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn widths_and_codes() {
        let ds = mixed();
        let enc = FeatureEncoder::fit(&ds).unwrap();
        assert_eq!(enc.width(), 1 + 3 + 2);
        let m = enc.transform(&ds).unwrap();
        assert_eq!(m.row(0)[1..], [1.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(m.row(2)[1..], [0.0, 0.0, 1.0, 1.0, 0.0]);
        let col0: Vec<f64> = (0..4).map(|r| m.row(r)[0]).collect();
        assert!(col0.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn unseen_level_is_all_zero() {
        let ds = mixed();
        let enc = FeatureEncoder::fit(&ds.select_rows(&[0, 1])).unwrap();
        let m = enc.transform(&ds).unwrap();
        // "c" was not in the training rows
        assert_eq!(m.row(2)[1..3], [0.0, 0.0]);
    }

    #[test]
    fn all_masked_has_no_features() {
        let ds = Dataset::new(
            vec![("m".into(), Sensitive), ("y".into(), Target)],
            vec![
                Column::Masked(vec!["*".into(); 3]),
                Column::Numeric(vec![0.0, 1.0, 1.0]),
            ],
        )
        .unwrap();
        assert_eq!(
            FeatureEncoder::fit(&ds),
            Err(UtilityError::NoUsableFeatures)
        );
    }
}
