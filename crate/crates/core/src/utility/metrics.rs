use serde::{Deserialize, Serialize};

use super::UtilityError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Counts outcomes with label 1 as the positive class.
pub fn confusion_matrix(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix, UtilityError> {
    if y_true.len() != y_pred.len() {
        return Err(UtilityError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => return Err(UtilityError::NonBinaryLabel(t.max(p))),
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub const ZERO: Metrics = Metrics {
        accuracy: 0.0,
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    /// Field-wise `self - base`.
    pub fn minus(&self, base: &Metrics) -> Metrics {
        Metrics {
            accuracy: self.accuracy - base.accuracy,
            precision: self.precision - base.precision,
            recall: self.recall - base.recall,
            f1: self.f1 - base.f1,
        }
    }
}

/// Accuracy, precision, recall and F1 of a confusion matrix.
///
/// A ratio with a zero denominator is reported as 0.
pub fn metrics_from_cm(cm: &ConfusionMatrix) -> Result<Metrics, UtilityError> {
    let total = cm.total();
    if total == 0 {
        return Err(UtilityError::EmptyMatrix);
    }
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics {
        accuracy: ratio(cm.tp + cm.tn, total),
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn enumeration() {
        let cm = confusion_matrix(&[1, 0, 1, 0], &[1, 0, 0, 1]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                tn: 1,
                fp: 1,
                fn_: 1
            }
        );
        let perfect = confusion_matrix(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!((perfect.fp, perfect.fn_), (0, 0));
        let inverted = confusion_matrix(&[1, 0, 1], &[0, 1, 0]).unwrap();
        assert_eq!((inverted.tp, inverted.tn), (0, 0));
        assert!(confusion_matrix(&[1], &[1, 0]).is_err());
        assert!(matches!(
            confusion_matrix(&[2], &[1]),
            Err(UtilityError::NonBinaryLabel(2))
        ));
    }

    #[test]
    fn direct_arithmetic() {
        let m = metrics_from_cm(&ConfusionMatrix {
            tp: 50,
            tn: 30,
            fp: 10,
            fn_: 10,
        })
        .unwrap();
        assert_abs_diff_eq!(m.accuracy, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(m.precision, 50.0 / 60.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.recall, 50.0 / 60.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f1, 50.0 / 60.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_conventions() {
        let m = metrics_from_cm(&ConfusionMatrix {
            tp: 0,
            tn: 5,
            fp: 0,
            fn_: 3,
        })
        .unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        let m = metrics_from_cm(&ConfusionMatrix {
            tp: 4,
            tn: 2,
            fp: 0,
            fn_: 0,
        })
        .unwrap();
        assert_eq!(
            m,
            Metrics {
                accuracy: 1.0,
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert_eq!(
            metrics_from_cm(&ConfusionMatrix::default()),
            Err(UtilityError::EmptyMatrix)
        );
    }

    #[test]
    fn serializes_fn_field() {
        let json = serde_json::to_string(&ConfusionMatrix {
            tp: 1,
            tn: 2,
            fp: 3,
            fn_: 4,
        })
        .unwrap();
        assert_eq!(json, r#"{"tp":1,"tn":2,"fp":3,"fn":4}"#);
    }
}
