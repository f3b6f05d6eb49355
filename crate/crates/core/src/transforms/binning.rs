use serde::{Deserialize, Serialize};

use super::TransformError;
use crate::dataset::Interval;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinStrategy {
    #[default]
    EqualWidth,
    EqualFrequency,
}

/// Bin edges `[min, c1, ..., max]`. Bins are half-open except the last.
fn edges(col: &[f64], n_bins: usize, strategy: BinStrategy) -> Vec<f64> {
    let mut sorted = col.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == max {
        return vec![min, max];
    }
    let n = sorted.len();
    let cuts: Vec<f64> = match strategy {
        BinStrategy::EqualWidth => (1..n_bins)
            .map(|i| min + (max - min) * i as f64 / n_bins as f64)
            .collect(),
        BinStrategy::EqualFrequency => (1..n_bins)
            .map(|j| j * n / n_bins)
            .filter(|&idx| idx > 0 && idx < n)
            .map(|idx| sorted[idx - 1] + (sorted[idx] - sorted[idx - 1]) / 2.0)
            .collect(),
    };
    let mut out = vec![min];
    for c in cuts {
        if c > *out.last().unwrap() && c < max {
            out.push(c);
        }
    }
    out.push(max);
    out
}

/// Replaces every value with the interval of the bin that contains it.
///
/// `EqualWidth` splits `[min, max]` into `n_bins` equal spans; `EqualFrequency`
/// cuts halfway between neighbouring order statistics at the `j/n_bins`
/// quantiles, merging duplicate cuts. A constant column gets the single
/// interval `[v, v]`.
pub fn bin_column(
    col: &[f64],
    n_bins: usize,
    strategy: BinStrategy,
) -> Result<Vec<Interval>, TransformError> {
    if n_bins == 0 {
        return Err(TransformError::InvalidParameter(
            "n_bins must be >= 1".into(),
        ));
    }
    if col.is_empty() {
        return Ok(Vec::new());
    }
    let edges = edges(col, n_bins, strategy);
    let inner = &edges[1..edges.len() - 1];
    let bins: Vec<Interval> = edges
        .windows(2)
        .map(|w| Interval::new(w[0], w[1]).expect("edges ascend"))
        .collect();
    Ok(col
        .iter()
        .map(|&x| bins[inner.partition_point(|&e| e <= x)])
        .collect())
}
