use rand::seq::SliceRandom;

use super::{Dataset, DatasetError};
use crate::rng;

/// Stratified train/test row indices.
///
/// The training side gets `ceil(n * (1 - f))` rows; the test quota is shared
/// between classes by largest remainder (ties favour class 0). Both index
/// lists are returned in ascending order.
pub fn stratified_split_indices(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(test_fraction));
    }
    let n = labels.len();
    if n < 2 {
        return Err(DatasetError::TooFewRows(n));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y as usize].push(i);
    }
    for (c, rows) in by_class.iter().enumerate() {
        if rows.is_empty() {
            return Err(DatasetError::EmptyClass(c as u8));
        }
    }

    // ceil(n(1-f)) == n - floor(n f); the epsilon absorbs 0.2 * 100 = 20.000000000000004
    let n_test = ((n as f64 * test_fraction) + 1e-9).floor() as usize;
    let ideal: Vec<f64> = by_class
        .iter()
        .map(|rows| rows.len() as f64 * n_test as f64 / n as f64)
        .collect();
    let mut quota: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut remaining = n_test - quota.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = ideal[a] - ideal[a].floor();
        let fb = ideal[b] - ideal[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }

    let mut rng = rng::stream(seed, rng::SPLIT_STEP, 0);
    let mut train = Vec::with_capacity(n - n_test);
    let mut test = Vec::with_capacity(n_test);
    for (c, rows) in by_class.iter().enumerate() {
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut rng);
        test.extend_from_slice(&shuffled[..quota[c]]);
        train.extend_from_slice(&shuffled[quota[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified split of a dataset; see [`stratified_split_indices`].
pub fn train_test_split(
    ds: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DatasetError> {
    let (train, test) = stratified_split_indices(&ds.labels(), test_fraction, seed)?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeRole, Column};
    use proptest::prelude::*;

    fn labelled(labels: &[u8]) -> Dataset {
        Dataset::new(
            vec![
                ("id".into(), AttributeRole::NonSensitive),
                ("y".into(), AttributeRole::Target),
            ],
            vec![
                Column::Numeric((0..labels.len()).map(|i| i as f64).collect()),
                Column::Numeric(labels.iter().map(|&l| l as f64).collect()),
            ],
        )
        .unwrap()
    }

    fn class_counts(ds: &Dataset) -> (usize, usize) {
        let l = ds.labels();
        let ones = l.iter().filter(|&&x| x == 1).count();
        (l.len() - ones, ones)
    }

    #[test]
    fn balanced_hundred_rows() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let (train, test) = train_test_split(&labelled(&labels), 0.2, 7).unwrap();
        assert_eq!(train.n_rows(), 80);
        assert_eq!(test.n_rows(), 20);
        assert_eq!(class_counts(&train), (40, 40));
        assert_eq!(class_counts(&test), (10, 10));
    }

    #[test]
    fn two_rows_one_per_class() {
        let (train, test) = train_test_split(&labelled(&[0, 1]), 0.5, 3).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (1, 1));
        assert_ne!(train.labels(), test.labels());
    }

    #[test]
    fn deterministic_per_seed() {
        let labels: Vec<u8> = (0..57).map(|i| (i % 3 == 0) as u8).collect();
        let ds = labelled(&labels);
        assert_eq!(
            train_test_split(&ds, 0.3, 11).unwrap(),
            train_test_split(&ds, 0.3, 11).unwrap()
        );
        assert_ne!(
            train_test_split(&ds, 0.3, 11).unwrap().1,
            train_test_split(&ds, 0.3, 12).unwrap().1
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            stratified_split_indices(&[0, 0, 0], 0.2, 1),
            Err(DatasetError::EmptyClass(1))
        ));
        assert!(matches!(
            stratified_split_indices(&[0, 1], 1.0, 1),
            Err(DatasetError::InvalidFraction(_))
        ));
        assert!(matches!(
            stratified_split_indices(&[1], 0.5, 1),
            Err(DatasetError::TooFewRows(1))
        ));
    }

    proptest! {
        #[test]
        fn split_partitions_rows(
            labels in proptest::collection::vec(0u8..2, 2..120),
            f in 0.05f64..0.95,
            seed in any::<u64>(),
        ) {
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let n = labels.len();
            let (train, test) = stratified_split_indices(&labels, f, seed).unwrap();
            prop_assert_eq!(train.len(), (n as f64 * (1.0 - f) - 1e-9).ceil() as usize);
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
