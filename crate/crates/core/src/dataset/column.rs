use std::fmt;

use serde::{Deserialize, Serialize};

/// Kind of every cell in a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    /// Closed range produced by generalization or binning.
    Interval,
    /// Opaque token produced by masking.
    MaskedToken,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Interval => "interval",
            ColumnKind::MaskedToken => "masked",
        };
        f.write_str(s)
    }
}

/// A generalized numeric value `[low, high]` with `low <= high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    low: f64,
    high: f64,
}

impl Interval {
    /// Returns `None` unless both bounds are finite and `low <= high`.
    pub fn new(low: f64, high: f64) -> Option<Self> {
        (low.is_finite() && high.is_finite() && low <= high).then_some(Interval { low, high })
    }

    pub fn point(value: f64) -> Self {
        Interval {
            low: value,
            high: value,
        }
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn midpoint(&self) -> f64 {
        self.low + (self.high - self.low) / 2.0
    }

    /// Smallest interval covering both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            low: self.low.min(other.low),
            high: self.high.max(other.high),
        }
    }

    /// Parses the `[lo,hi]` rendering.
    pub fn parse(s: &str) -> Option<Interval> {
        let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
        let (lo, hi) = inner.split_once(',')?;
        Interval::new(lo.trim().parse().ok()?, hi.trim().parse().ok()?)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.low, self.high)
    }
}

/// A typed column. Every cell conforms to the variant's kind by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
    Interval(Vec<Interval>),
    Masked(Vec<String>),
}

impl Column {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Numeric(_) => ColumnKind::Numeric,
            Column::Categorical(_) => ColumnKind::Categorical,
            Column::Interval(_) => ColumnKind::Interval,
            Column::Masked(_) => ColumnKind::MaskedToken,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) | Column::Masked(v) => v.len(),
            Column::Interval(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Column::Numeric(v) => Some(v),
            _ => None,
        }
    }

    /// String rendering of one cell, as written to CSV.
    pub fn token(&self, row: usize) -> String {
        match self {
            Column::Numeric(v) => v[row].to_string(),
            Column::Categorical(v) | Column::Masked(v) => v[row].clone(),
            Column::Interval(v) => v[row].to_string(),
        }
    }

    pub fn tokens(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.token(i)).collect()
    }

    /// Keeps the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => {
                Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
            Column::Interval(v) => Column::Interval(rows.iter().map(|&r| v[r]).collect()),
            Column::Masked(v) => Column::Masked(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }

    /// Infers the kind of a column of raw CSV cells.
    ///
    /// Finite numbers give `Numeric`, `[lo,hi]` cells give `Interval`, cells
    /// that all contain `*` give `Masked`; anything else is `Categorical`.
    pub fn infer(cells: Vec<String>) -> Column {
        if let Some(values) = cells
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
        {
            return Column::Numeric(values);
        }
        if let Some(intervals) = cells
            .iter()
            .map(|c| Interval::parse(c))
            .collect::<Option<Vec<_>>>()
        {
            return Column::Interval(intervals);
        }
        if !cells.is_empty() && cells.iter().all(|c| c.contains('*')) {
            return Column::Masked(cells);
        }
        Column::Categorical(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rejects_inverted_bounds() {
        assert!(Interval::new(2.0, 1.0).is_none());
        assert!(Interval::new(1.0, f64::NAN).is_none());
        assert_eq!(Interval::new(1.0, 1.0), Some(Interval::point(1.0)));
    }

    #[test]
    fn interval_rendering_round_trips() {
        let iv = Interval::new(21.0, 23.5).unwrap();
        assert_eq!(iv.to_string(), "[21,23.5]");
        assert_eq!(Interval::parse(&iv.to_string()), Some(iv));
        assert_eq!(Interval::parse("[1, 2]"), Interval::new(1.0, 2.0));
        assert_eq!(Interval::parse("[3,2]"), None);
        assert_eq!(Interval::parse("1,2"), None);
    }

    #[test]
    fn infers_kinds() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(Column::infer(s(&["1", "2.5"])).kind(), ColumnKind::Numeric);
        assert_eq!(
            Column::infer(s(&["[1,2]", "[3,4]"])).kind(),
            ColumnKind::Interval
        );
        assert_eq!(
            Column::infer(s(&["*", "1**"])).kind(),
            ColumnKind::MaskedToken
        );
        assert_eq!(
            Column::infer(s(&["a", "1"])).kind(),
            ColumnKind::Categorical
        );
        assert_eq!(
            Column::infer(s(&["NaN", "1"])).kind(),
            ColumnKind::Categorical
        );
    }
}
