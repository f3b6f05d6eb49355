use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AttributeRole, Column, Dataset};

/// Mean and population standard deviation of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

impl ColumnStats {
    /// Population (1/N) statistics.
    pub fn of(values: &[f64]) -> ColumnStats {
        let n = values.len() as f64;
        if values.is_empty() {
            return ColumnStats {
                mean: 0.0,
                std: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        ColumnStats {
            mean,
            std: var.sqrt(),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.std > 0.0 {
            (x - self.mean) / self.std
        } else {
            0.0
        }
    }
}

pub type StandardizeStats = BTreeMap<String, ColumnStats>;

/// Maps every non-target numeric column to `(x - mean) / std`.
///
/// With `stats = None` the statistics are computed from `ds` (training fold)
/// and returned for reuse on the test fold. Zero-std columns become zeros.
pub fn standardize_numeric(
    ds: &Dataset,
    stats: Option<&StandardizeStats>,
) -> (Dataset, StandardizeStats) {
    let mut used = StandardizeStats::new();
    let columns = ds
        .schema()
        .attributes()
        .iter()
        .zip(ds.columns())
        .map(|(attr, col)| match col {
            Column::Numeric(v) if attr.role != AttributeRole::Target => {
                let s = stats
                    .and_then(|m| m.get(&attr.name).copied())
                    .unwrap_or_else(|| ColumnStats::of(v));
                used.insert(attr.name.clone(), s);
                Column::Numeric(v.iter().map(|&x| s.apply(x)).collect())
            }
            other => other.clone(),
        })
        .collect();
    let out = Dataset::new(ds.role_list(), columns).expect("shape unchanged");
    (out, used)
}
