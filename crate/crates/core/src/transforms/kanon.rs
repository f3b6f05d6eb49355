use super::generalize::{generalized_column, ordering_values, Generalized};
use super::{SuppressionLog, SuppressionReason, TransformError, TransformStep};
use crate::dataset::Dataset;

/// Generalizes `qids` so every released quasi-identifier tuple occurs at least
/// `k` times.
///
/// Rows are partitioned by greedy recursive median splits (strict Mondrian):
/// each partition is cut on the quasi-identifier with the widest range
/// relative to the whole dataset, at its median, with `<= median` going left.
/// A cut is only taken if both halves keep `k` rows; otherwise the next
/// attribute is tried, and a partition with no allowable cut becomes an
/// equivalence class. Numeric attributes are published as the class's
/// `[min, max]`, categorical ones as the union of the class's categories.
/// Classes smaller than `k` are suppressed. Non-QID columns are untouched.
pub fn k_anonymize(
    ds: &Dataset,
    qids: &[String],
    k: usize,
) -> Result<(Dataset, SuppressionLog), TransformError> {
    TransformStep::KAnonymize {
        k,
        qids: qids.to_vec(),
    }
    .check(ds.schema())?;
    let n = ds.n_rows();
    if k > n {
        return Err(TransformError::AllSuppressed { k, n_rows: n });
    }
    if k == 1 {
        return Ok((ds.clone(), SuppressionLog::default()));
    }

    let columns: Vec<_> = qids
        .iter()
        .map(|q| ds.column(q).expect("checked"))
        .collect();
    let dims: Vec<Vec<f64>> = columns.iter().map(|c| ordering_values(c)).collect();
    let global_range: Vec<f64> = dims.iter().map(|v| range(v, 0..v.len())).collect();

    let mut finished: Vec<Vec<usize>> = Vec::new();
    let mut pending: Vec<Vec<usize>> = vec![(0..n).collect()];
    while let Some(part) = pending.pop() {
        match split(&part, &dims, &global_range, k) {
            Some((left, right)) => {
                // right pushed first so the left half is refined first
                pending.push(right);
                pending.push(left);
            }
            None => finished.push(part),
        }
    }

    let mut log = SuppressionLog::default();
    let mut class_of = vec![usize::MAX; n];
    let mut kept_classes: Vec<Vec<usize>> = Vec::new();
    for part in finished {
        if part.len() < k {
            log.record(part.iter().copied(), SuppressionReason::KAnonymity);
            continue;
        }
        for &r in &part {
            class_of[r] = kept_classes.len();
        }
        kept_classes.push(part);
    }
    if kept_classes.is_empty() {
        return Err(TransformError::AllSuppressed { k, n_rows: n });
    }
    log.entries.sort_by_key(|e| e.row);

    let retained: Vec<usize> = (0..n).filter(|&r| class_of[r] != usize::MAX).collect();
    let mut out = ds.select_rows(&retained);
    for (q, col) in qids.iter().zip(&columns) {
        let classes: Vec<Generalized> = kept_classes
            .iter()
            .map(|rows| Generalized::of_rows(col, rows))
            .collect();
        let generalized = generalized_column(col, &retained, &class_of, &classes);
        out = out.with_column(q, generalized).expect("same shape");
    }
    Ok((out, log))
}

fn range(values: &[f64], rows: impl IntoIterator<Item = usize>) -> f64 {
    let (lo, hi) = rows
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(values[r]), hi.max(values[r]))
        });
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        values[n / 2 - 1] + (values[n / 2] - values[n / 2 - 1]) / 2.0
    }
}

fn split(
    part: &[usize],
    dims: &[Vec<f64>],
    global_range: &[f64],
    k: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if part.len() < 2 * k {
        return None;
    }
    let mut order: Vec<(usize, f64)> = dims
        .iter()
        .zip(global_range)
        .enumerate()
        .map(|(d, (values, &g))| {
            let r = range(values, part.iter().copied());
            (d, if g > 0.0 { r / g } else { 0.0 })
        })
        .filter(|&(_, r)| r > 0.0)
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (d, _) in order {
        let values = &dims[d];
        let cut = median(part.iter().map(|&r| values[r]).collect());
        let (left, right): (Vec<usize>, Vec<usize>) = part.iter().partition(|&&r| values[r] <= cut);
        if left.len() >= k && right.len() >= k {
            return Some((left, right));
        }
    }
    None
}
