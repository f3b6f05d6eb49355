use super::{Matrix, UtilityError};

/// Weights and bias of a fitted binary logistic model.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Mean cross-entropy plus `l2 / 2 * |w|^2`, and its gradient `(dw, db)`.
pub fn loss_and_gradient(
    x: &Matrix,
    y: &[u8],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; x.cols];
    let mut gb = 0.0;
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        let z = dot(weights, row) + bias;
        let t = f64::from(label);
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, &xj) in gw.iter_mut().zip(row) {
            *g += r * xj;
        }
        gb += r;
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    for (g, &w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (loss / n + penalty, gw, gb / n)
}

impl LogisticModel {
    /// Full-batch gradient descent from all-zero parameters.
    ///
    /// Fails with [`UtilityError::Diverged`] as soon as the loss stops being
    /// finite.
    pub fn fit(
        x: &Matrix,
        y: &[u8],
        learning_rate: f64,
        epochs: usize,
        l2: f64,
    ) -> Result<LogisticModel, UtilityError> {
        Self::fit_with_trace(x, y, learning_rate, epochs, l2).map(|(m, _)| m)
    }

    /// Like [`LogisticModel::fit`], also returning the loss seen at each epoch.
    pub fn fit_with_trace(
        x: &Matrix,
        y: &[u8],
        learning_rate: f64,
        epochs: usize,
        l2: f64,
    ) -> Result<(LogisticModel, Vec<f64>), UtilityError> {
        if y.len() != x.rows {
            return Err(UtilityError::LengthMismatch(y.len(), x.rows));
        }
        if x.rows == 0 {
            return Err(UtilityError::EmptyTrain);
        }
        let mut w = vec![0.0; x.cols];
        let mut b = 0.0;
        let mut trace = Vec::with_capacity(epochs);
        for epoch in 0..epochs {
            let (loss, gw, gb) = loss_and_gradient(x, y, &w, b, l2);
            if !loss.is_finite() {
                return Err(UtilityError::Diverged { epoch });
            }
            trace.push(loss);
            for (wj, g) in w.iter_mut().zip(gw) {
                *wj -= learning_rate * g;
            }
            b -= learning_rate * gb;
            if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(UtilityError::Diverged { epoch });
            }
        }
        Ok((
            LogisticModel {
                weights: w,
                bias: b,
            },
            trace,
        ))
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }

    /// Label 1 iff the predicted probability is at least 0.5.
    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        (0..x.rows)
            .map(|i| u8::from(self.probability(x.row(i)) >= 0.5))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn separable_line() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0]]);
        let y = [0, 1];
        let m = LogisticModel::fit(&x, &y, 0.5, 500, 0.0).unwrap();
        assert!(m.weights[0] > 0.0);
        assert_eq!(m.predict(&x), y);
    }

    #[test]
    fn zero_epochs_predicts_one() {
        let x = Matrix::from_rows(&[vec![-3.0], vec![2.0], vec![0.0]]);
        let m = LogisticModel::fit(&x, &[0, 1, 0], 0.1, 0, 0.0).unwrap();
        assert_eq!(m.predict(&x), vec![1, 1, 1]);
    }

    #[test]
    fn huge_rate_diverges() {
        let x = Matrix::from_rows(&[vec![1e200], vec![-1e200]]);
        assert!(matches!(
            LogisticModel::fit(&x, &[1, 0], 1e200, 10, 0.0),
            Err(UtilityError::Diverged { .. })
        ));
    }

    #[test]
    fn finite_differences() {
        let mut r = rng::stream(21, 0, 0);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| r.random_range(-2.0..2.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<u8> = (0..40).map(|_| r.random_range(0..2)).collect();
        let h = 1e-5;
        for _ in 0..10 {
            let w: Vec<f64> = (0..3).map(|_| r.random_range(-1.5..1.5)).collect();
            let b = r.random_range(-1.0..1.0);
            let l2 = 0.3;
            let (_, gw, gb) = loss_and_gradient(&x, &y, &w, b, l2);
            for j in 0..=3 {
                let shifted = |d: f64| {
                    let mut w2 = w.clone();
                    let mut b2 = b;
                    if j < 3 {
                        w2[j] += d;
                    } else {
                        b2 += d;
                    }
                    loss_and_gradient(&x, &y, &w2, b2, l2).0
                };
                let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
                let analytic = if j < 3 { gw[j] } else { gb };
                let rel = (numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(rel < 1e-6, "param {j}: {analytic} vs {numeric}");
            }
        }
    }

    #[test]
    fn loss_never_rises_at_small_rate() {
        let x = Matrix::from_rows(&[
            vec![0.5, 1.0],
            vec![-1.0, 0.2],
            vec![2.0, -0.3],
            vec![0.1, 0.1],
        ]);
        let (_, trace) = LogisticModel::fit_with_trace(&x, &[1, 0, 1, 0], 0.1, 300, 0.01).unwrap();
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
