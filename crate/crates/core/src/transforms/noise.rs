use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::ColumnStats;

/// Adds `N(0, (sigma_rel * std(col))^2)` noise to every cell, using the
/// population std of `col`. `sigma_rel = 0` returns the column unchanged.
pub fn rand_additive<R: Rng + ?Sized>(col: &[f64], sigma_rel: f64, rng: &mut R) -> Vec<f64> {
    let scale = sigma_rel * ColumnStats::of(col).std;
    if scale == 0.0 {
        return col.to_vec();
    }
    col.iter()
        .map(|&x| {
            let eps: f64 = rng.sample(StandardNormal);
            x + scale * eps
        })
        .collect()
}

/// Multiplies every cell by `1 + eps`, `eps ~ N(0, sigma_rel^2)`.
/// Zero cells stay zero; `sigma_rel = 0` returns the column unchanged.
pub fn rand_multiplicative<R: Rng + ?Sized>(col: &[f64], sigma_rel: f64, rng: &mut R) -> Vec<f64> {
    if sigma_rel == 0.0 {
        return col.to_vec();
    }
    col.iter()
        .map(|&x| {
            let eps: f64 = rng.sample(StandardNormal);
            x * (1.0 + sigma_rel * eps)
        })
        .collect()
}
