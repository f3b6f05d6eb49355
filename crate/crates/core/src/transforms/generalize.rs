//! Generalized quasi-identifier values shared by k-anonymity and l-diversity.

use std::collections::BTreeSet;

use crate::dataset::{Column, Interval};

/// Generalized value of one quasi-identifier over an equivalence class.
#[derive(Debug, Clone, PartialEq)]
pub(super) enum Generalized {
    Range(Interval),
    Set(BTreeSet<String>),
}

impl Generalized {
    pub(super) fn of_rows(col: &Column, rows: &[usize]) -> Generalized {
        match col {
            Column::Numeric(v) => {
                let lo = rows.iter().map(|&r| v[r]).fold(f64::INFINITY, f64::min);
                let hi = rows.iter().map(|&r| v[r]).fold(f64::NEG_INFINITY, f64::max);
                Generalized::Range(Interval::new(lo, hi).expect("finite numeric cells"))
            }
            Column::Interval(v) => Generalized::Range(
                rows.iter()
                    .map(|&r| v[r])
                    .reduce(|a, b| a.hull(&b))
                    .expect("non-empty class"),
            ),
            Column::Categorical(v) | Column::Masked(v) => {
                Generalized::Set(rows.iter().flat_map(|&r| category_set(&v[r])).collect())
            }
        }
    }

    pub(super) fn merge(&self, other: &Generalized) -> Generalized {
        match (self, other) {
            (Generalized::Range(a), Generalized::Range(b)) => Generalized::Range(a.hull(b)),
            (Generalized::Set(a), Generalized::Set(b)) => {
                Generalized::Set(a.union(b).cloned().collect())
            }
            _ => unreachable!("a column generalizes to one variant"),
        }
    }

    /// Distance contribution between two classes on this attribute: midpoint
    /// gap over `span` for ranges, 0/1 mismatch for sets.
    pub(super) fn distance(&self, other: &Generalized, span: f64) -> f64 {
        match (self, other) {
            (Generalized::Range(a), Generalized::Range(b)) => {
                if span > 0.0 {
                    (a.midpoint() - b.midpoint()).abs() / span
                } else {
                    0.0
                }
            }
            (Generalized::Set(a), Generalized::Set(b)) => f64::from(u8::from(a != b)),
            _ => unreachable!("a column generalizes to one variant"),
        }
    }
}

/// Splits a rendered category union `{a|b}` back into its members.
pub(super) fn category_set(token: &str) -> BTreeSet<String> {
    match token.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        Some(inner) => inner.split('|').map(str::to_string).collect(),
        None => BTreeSet::from([token.to_string()]),
    }
}

/// Renders a category set; a single member renders as itself.
pub(super) fn render_set(set: &BTreeSet<String>) -> String {
    if set.len() == 1 {
        set.iter().next().unwrap().clone()
    } else {
        let parts: Vec<&str> = set.iter().map(String::as_str).collect();
        format!("{{{}}}", parts.join("|"))
    }
}

/// Value used to order rows along a quasi-identifier: the number itself,
/// an interval's midpoint, or a category's rank in sorted token order.
pub(super) fn ordering_values(col: &Column) -> Vec<f64> {
    match col {
        Column::Numeric(v) => v.clone(),
        Column::Interval(v) => v.iter().map(Interval::midpoint).collect(),
        Column::Categorical(v) | Column::Masked(v) => {
            let levels: BTreeSet<&str> = v.iter().map(String::as_str).collect();
            let levels: Vec<&str> = levels.into_iter().collect();
            v.iter()
                .map(|t| levels.binary_search(&t.as_str()).unwrap() as f64)
                .collect()
        }
    }
}

/// Span of a column's generalized values over the whole dataset.
pub(super) fn span(col: &Column) -> f64 {
    let all: Vec<usize> = (0..col.len()).collect();
    match Generalized::of_rows(col, &all) {
        Generalized::Range(iv) => iv.high() - iv.low(),
        Generalized::Set(_) => 0.0,
    }
}

/// Builds the published column for a quasi-identifier. `retained` lists the
/// surviving rows in output order and `class_of[row]` indexes `classes`.
pub(super) fn generalized_column(
    col: &Column,
    retained: &[usize],
    class_of: &[usize],
    classes: &[Generalized],
) -> Column {
    let class = |r: usize| &classes[class_of[r]];
    match col {
        Column::Numeric(_) | Column::Interval(_) => Column::Interval(
            retained
                .iter()
                .map(|&r| match class(r) {
                    Generalized::Range(iv) => *iv,
                    Generalized::Set(_) => unreachable!("numeric columns generalize to ranges"),
                })
                .collect(),
        ),
        Column::Categorical(_) | Column::Masked(_) => Column::Categorical(
            retained
                .iter()
                .map(|&r| match class(r) {
                    Generalized::Set(s) => render_set(s),
                    Generalized::Range(_) => unreachable!("categories generalize to sets"),
                })
                .collect(),
        ),
    }
}
