use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RiskError;
use crate::dataset::Column;

/// Equal-frequency cut points: `sorted[j * n / n_bins]` for `j = 1..n_bins`,
/// deduplicated, dropping any cut at or below the minimum.
fn equal_frequency_cuts(values: &[f64], n_bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = (1..n_bins).map(|j| sorted[j * n / n_bins]).collect();
    cuts.dedup();
    cuts.retain(|&c| c > sorted[0]);
    cuts
}

/// Bin index of every value; a value equal to a cut goes to the upper bin.
pub fn bin_codes(values: &[f64], n_bins: usize) -> Vec<usize> {
    let cuts = equal_frequency_cuts(values, n_bins.max(1));
    values
        .iter()
        .map(|&x| cuts.partition_point(|&c| c <= x))
        .collect()
}

/// Tokens used for MI estimation. Numeric columns become equal-frequency bin
/// labels `B0`, `B1`, ...; every other kind keeps its rendered tokens.
pub fn discretize_for_mi(col: &Column, n_bins: usize) -> Vec<String> {
    match col {
        Column::Numeric(v) => bin_codes(v, n_bins)
            .into_iter()
            .map(|b| format!("B{b}"))
            .collect(),
        other => other.tokens(),
    }
}

/// Contingency table of two token sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointHistogram {
    pub x_levels: Vec<String>,
    pub y_levels: Vec<String>,
    /// Row-major, `x_levels.len() x y_levels.len()`.
    pub counts: Vec<u64>,
    pub n: u64,
}

fn levels<S: AsRef<str>>(tokens: &[S]) -> (Vec<String>, Vec<usize>) {
    let mut index: BTreeMap<&str, usize> = tokens.iter().map(|t| (t.as_ref(), 0)).collect();
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let codes = tokens.iter().map(|t| index[t.as_ref()]).collect();
    (index.keys().map(|k| k.to_string()).collect(), codes)
}

impl JointHistogram {
    pub fn from_tokens<S: AsRef<str>, T: AsRef<str>>(
        x: &[S],
        y: &[T],
    ) -> Result<JointHistogram, RiskError> {
        if x.len() != y.len() {
            return Err(RiskError::LengthMismatch(x.len(), y.len()));
        }
        if x.is_empty() {
            return Err(RiskError::Empty);
        }
        let (x_levels, xc) = levels(x);
        let (y_levels, yc) = levels(y);
        let ny = y_levels.len();
        let mut counts = vec![0u64; x_levels.len() * ny];
        for (a, b) in xc.into_iter().zip(yc) {
            counts[a * ny + b] += 1;
        }
        Ok(JointHistogram {
            x_levels,
            y_levels,
            counts,
            n: x.len() as u64,
        })
    }

    /// Builds a histogram from a raw count grid with generic level names.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> JointHistogram {
        assert_eq!(counts.len(), rows * cols, "grid shape");
        JointHistogram {
            x_levels: (0..rows).map(|i| format!("x{i}")).collect(),
            y_levels: (0..cols).map(|j| format!("y{j}")).collect(),
            n: counts.iter().sum(),
            counts,
        }
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.y_levels.len() + j]
    }

    pub fn x_marginal(&self) -> Vec<u64> {
        self.counts
            .chunks(self.y_levels.len().max(1))
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn y_marginal(&self) -> Vec<u64> {
        let ny = self.y_levels.len();
        (0..ny)
            .map(|j| (0..self.x_levels.len()).map(|i| self.count(i, j)).sum())
            .collect()
    }

    /// `sum p(x,y) ln(p(x,y) / (p(x) p(y)))` in nats.
    ///
    /// Each ratio is formed from exact integer products, so a cell matching
    /// the product of its marginals contributes exactly zero.
    pub fn mutual_information(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as u128;
        let px = self.x_marginal();
        let py = self.y_marginal();
        let mut mi = 0.0;
        for (i, &rx) in px.iter().enumerate() {
            for (j, &cy) in py.iter().enumerate() {
                let c = self.count(i, j);
                if c == 0 {
                    continue;
                }
                let num = c as u128 * n;
                let den = rx as u128 * cy as u128;
                if num != den {
                    mi += c as f64 / self.n as f64 * (num as f64 / den as f64).ln();
                }
            }
        }
        mi.max(0.0)
    }

    fn entropy(marginal: &[u64], n: u64) -> f64 {
        marginal
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                -p * p.ln()
            })
            .sum()
    }

    pub fn entropy_x(&self) -> f64 {
        Self::entropy(&self.x_marginal(), self.n)
    }

    pub fn entropy_y(&self) -> f64 {
        Self::entropy(&self.y_marginal(), self.n)
    }

    /// Folds x-level `b` into x-level `a`.
    pub fn merge_x_levels(&self, a: usize, b: usize) -> JointHistogram {
        assert!(a != b, "merging a level with itself");
        let ny = self.y_levels.len();
        let mut out = self.clone();
        for j in 0..ny {
            out.counts[a * ny + j] += self.count(b, j);
        }
        out.counts.drain(b * ny..(b + 1) * ny);
        out.x_levels[a] = format!("{}+{}", self.x_levels[a], self.x_levels[b]);
        out.x_levels.remove(b);
        out
    }

    pub fn transpose(&self) -> JointHistogram {
        let (nx, ny) = (self.x_levels.len(), self.y_levels.len());
        let mut counts = vec![0; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                counts[j * nx + i] = self.count(i, j);
            }
        }
        JointHistogram {
            x_levels: self.y_levels.clone(),
            y_levels: self.x_levels.clone(),
            counts,
            n: self.n,
        }
    }
}

/// Plug-in mutual information of two token sequences, in nats.
pub fn mutual_information_plugin<S: AsRef<str>, T: AsRef<str>>(
    x: &[S],
    y: &[T],
) -> Result<f64, RiskError> {
    Ok(JointHistogram::from_tokens(x, y)?.mutual_information())
}
