use std::cmp::Ordering;

use super::{Matrix, UtilityError};
use crate::exec::Execution;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority vote among the `k` nearest training rows (Euclidean distance).
///
/// Equal distances go to the lower training index and a tied vote goes to
/// label 0. Test rows are classified in parallel under
/// [`Execution::Parallel`].
pub fn knn_predict(
    train: &Matrix,
    labels: &[u8],
    test: &Matrix,
    k: usize,
    exec: Execution,
) -> Result<Vec<u8>, UtilityError> {
    if train.rows == 0 {
        return Err(UtilityError::EmptyTrain);
    }
    if labels.len() != train.rows {
        return Err(UtilityError::LengthMismatch(labels.len(), train.rows));
    }
    if k == 0 || k > train.rows {
        return Err(UtilityError::InvalidSpec(format!(
            "k = {k} with {} training rows",
            train.rows
        )));
    }
    if train.cols != test.cols {
        return Err(UtilityError::LengthMismatch(train.cols, test.cols));
    }
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    };
    Ok(exec.map_range(test.rows, |t| {
        let q = test.row(t);
        let mut d: Vec<(f64, usize)> = (0..train.rows)
            .map(|i| (squared_distance(q, train.row(i)), i))
            .collect();
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, by_distance);
        }
        let ones = d[..k].iter().filter(|&&(_, i)| labels[i] == 1).count();
        u8::from(2 * ones > k)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Vec<u8>) {
        (
            Matrix::from_rows(&[
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![3.0, 0.0],
                vec![3.0, 1.0],
            ]),
            vec![0, 0, 1, 1],
        )
    }

    /// Sort every training row by distance and vote, no partial selection.
    fn oracle(train: &Matrix, labels: &[u8], q: &[f64], k: usize) -> u8 {
        let mut d: Vec<(f64, usize)> = (0..train.rows)
            .map(|i| {
                let r = train.row(i);
                (((q[0] - r[0]).powi(2) + (q[1] - r[1]).powi(2)).sqrt(), i)
            })
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ones = d[..k].iter().filter(|p| labels[p.1] == 1).count();
        u8::from(ones * 2 > k)
    }

    #[test]
    fn matches_full_sort() {
        let (train, labels) = toy();
        let test = Matrix::from_rows(&[
            vec![1.0, 0.5],
            vec![2.0, 0.2],
            vec![1.5, 0.9],
            vec![-4.0, 3.0],
        ]);
        let pred = knn_predict(&train, &labels, &test, 3, Execution::Sequential).unwrap();
        let expected: Vec<u8> = (0..test.rows)
            .map(|t| oracle(&train, &labels, test.row(t), 3))
            .collect();
        assert_eq!(pred, expected);
        assert_eq!(pred, vec![0, 1, 0, 0]);
    }

    #[test]
    fn degenerate_k() {
        let (train, labels) = toy();
        assert_eq!(
            knn_predict(&train, &labels, &train, 1, Execution::Sequential).unwrap(),
            labels
        );
        // k = n: two votes each way, tie goes to 0
        assert_eq!(
            knn_predict(&train, &labels, &train, 4, Execution::Sequential).unwrap(),
            vec![0; 4]
        );
        let mostly_one = vec![1, 1, 1, 0];
        assert_eq!(
            knn_predict(&train, &mostly_one, &train, 4, Execution::Parallel).unwrap(),
            vec![1; 4]
        );
        assert!(knn_predict(&train, &labels, &train, 5, Execution::Sequential).is_err());
        assert_eq!(
            knn_predict(&Matrix::zeros(0, 2), &[], &train, 1, Execution::Sequential),
            Err(UtilityError::EmptyTrain)
        );
    }

    #[test]
    fn equal_distance_prefers_lower_index() {
        let train = Matrix::from_rows(&[vec![1.0], vec![-1.0]]);
        let test = Matrix::from_rows(&[vec![0.0]]);
        assert_eq!(
            knn_predict(&train, &[1, 0], &test, 1, Execution::Sequential).unwrap(),
            vec![1]
        );
        assert_eq!(
            knn_predict(&train, &[0, 1], &test, 1, Execution::Sequential).unwrap(),
            vec![0]
        );
    }
}
