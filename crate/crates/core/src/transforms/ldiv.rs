use std::collections::{BTreeSet, HashMap};

use super::generalize::{generalized_column, span, Generalized};
use super::{SuppressionLog, SuppressionReason, TransformError, TransformStep};
use crate::dataset::Dataset;

struct Class {
    rows: Vec<usize>,
    values: Vec<Generalized>,
    sensitive: BTreeSet<String>,
}

/// Ensures each equivalence class over `qids` holds at least `l` distinct
/// values of `sensitive`.
///
/// Classes are the groups of rows sharing all quasi-identifier tokens, in
/// order of first appearance. While some class falls short, the first such
/// class is merged into its nearest neighbour (summed per-attribute distance,
/// lowest index on ties) and the merged class takes the hull of both
/// generalizations. Quasi-identifiers are then published per class. A class
/// that still falls short with no neighbour left is suppressed.
pub fn enforce_l_diversity(
    ds: &Dataset,
    qids: &[String],
    sensitive: &str,
    l: usize,
) -> Result<(Dataset, SuppressionLog), TransformError> {
    TransformStep::LDiversify {
        l,
        sensitive: sensitive.to_string(),
        qids: qids.to_vec(),
    }
    .check(ds.schema())?;
    if l == 1 {
        return Ok((ds.clone(), SuppressionLog::default()));
    }
    let s_col = ds.column(sensitive).expect("checked");
    let n = ds.n_rows();
    let distinct: BTreeSet<String> = (0..n).map(|r| s_col.token(r)).collect();
    if distinct.len() < l {
        return Err(TransformError::Unsatisfiable {
            l,
            distinct: distinct.len(),
            sensitive: sensitive.to_string(),
        });
    }

    let q_cols: Vec<_> = qids
        .iter()
        .map(|q| ds.column(q).expect("checked"))
        .collect();
    let spans: Vec<f64> = q_cols.iter().map(|c| span(c)).collect();

    let mut index: HashMap<Vec<String>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for r in 0..n {
        let key: Vec<String> = q_cols.iter().map(|c| c.token(r)).collect();
        let next = groups.len();
        let g = *index.entry(key).or_insert(next);
        if g == groups.len() {
            groups.push(Vec::new());
        }
        groups[g].push(r);
    }
    let mut classes: Vec<Class> = groups
        .into_iter()
        .map(|rows| Class {
            values: q_cols
                .iter()
                .map(|c| Generalized::of_rows(c, &rows))
                .collect(),
            sensitive: rows.iter().map(|&r| s_col.token(r)).collect(),
            rows,
        })
        .collect();

    let mut log = SuppressionLog::default();
    while let Some(i) = classes.iter().position(|c| c.sensitive.len() < l) {
        if classes.len() == 1 {
            let gone = classes.remove(0);
            log.record(gone.rows, SuppressionReason::LDiversity);
            break;
        }
        let j = nearest(&classes, i, &spans);
        let (keep, drop) = (i.min(j), i.max(j));
        let other = classes.remove(drop);
        let c = &mut classes[keep];
        c.rows.extend(other.rows);
        c.values = c
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.merge(b))
            .collect();
        c.sensitive.extend(other.sensitive);
    }
    if classes.is_empty() {
        return Err(TransformError::AllSuppressed { k: l, n_rows: n });
    }
    log.entries.sort_by_key(|e| e.row);

    let mut class_of = vec![usize::MAX; n];
    for (ci, c) in classes.iter().enumerate() {
        for &r in &c.rows {
            class_of[r] = ci;
        }
    }
    let retained: Vec<usize> = (0..n).filter(|&r| class_of[r] != usize::MAX).collect();
    let mut out = ds.select_rows(&retained);
    for (qi, (q, col)) in qids.iter().zip(&q_cols).enumerate() {
        let per_class: Vec<Generalized> = classes.iter().map(|c| c.values[qi].clone()).collect();
        out = out
            .with_column(q, generalized_column(col, &retained, &class_of, &per_class))
            .expect("same shape");
    }
    Ok((out, log))
}

fn nearest(classes: &[Class], i: usize, spans: &[f64]) -> usize {
    let dist = |j: usize| -> f64 {
        classes[i]
            .values
            .iter()
            .zip(&classes[j].values)
            .zip(spans)
            .map(|((a, b), &s)| a.distance(b, s))
            .sum()
    };
    (0..classes.len())
        .filter(|&j| j != i)
        .map(|j| (j, dist(j)))
        .fold(None, |best: Option<(usize, f64)>, (j, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((j, d)),
        })
        .map(|(j, _)| j)
        .expect("at least two classes")
}
