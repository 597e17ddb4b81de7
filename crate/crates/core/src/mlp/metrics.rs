//! Regression metrics per target column: MSE, MAE and R².

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Metrics<T: Scalar> {
    pub mse: Vec<T>,
    pub mae: Vec<T>,
    pub r2: Vec<T>,
    pub mean_mse: T,
    pub mean_mae: T,
    pub mean_r2: T,
}

/// Metrics between row-major `truth` and `pred`. The R² baseline is the
/// mean of each truth column over these rows.
pub fn regression_metrics<T: Scalar, R: AsRef<[T]>>(truth: &[R], pred: &[R]) -> Result<Metrics<T>> {
    if truth.is_empty() {
        return Err(Error::Precondition("metrics need at least one row".into()));
    }
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    let width = truth[0].as_ref().len();
    let n = T::from_usize_lossy(truth.len());
    let mut mean = vec![T::zero(); width];
    for row in truth {
        let row = row.as_ref();
        if row.len() != width {
            return Err(Error::LengthMismatch {
                expected: width,
                actual: row.len(),
            });
        }
        for (m, &v) in mean.iter_mut().zip(row) {
            *m = *m + v;
        }
    }
    for m in &mut mean {
        *m = *m / n;
    }
    let mut sse = vec![T::zero(); width];
    let mut sae = vec![T::zero(); width];
    let mut sst = vec![T::zero(); width];
    for (t, p) in truth.iter().zip(pred) {
        let (t, p) = (t.as_ref(), p.as_ref());
        if p.len() != width {
            return Err(Error::LengthMismatch {
                expected: width,
                actual: p.len(),
            });
        }
        for j in 0..width {
            let e = t[j] - p[j];
            sse[j] = sse[j] + e * e;
            sae[j] = sae[j] + e.abs();
            let c = t[j] - mean[j];
            sst[j] = sst[j] + c * c;
        }
    }
    let mut r2 = Vec::with_capacity(width);
    for j in 0..width {
        if sst[j] == T::zero() {
            return Err(Error::UndefinedR2 { column: j });
        }
        r2.push(T::one() - sse[j] / sst[j]);
    }
    let mse: Vec<T> = sse.iter().map(|&s| s / n).collect();
    let mae: Vec<T> = sae.iter().map(|&s| s / n).collect();
    let w = T::from_usize_lossy(width);
    Ok(Metrics {
        mean_mse: mse.iter().copied().sum::<T>() / w,
        mean_mae: mae.iter().copied().sum::<T>() / w,
        mean_r2: r2.iter().copied().sum::<T>() / w,
        mse,
        mae,
        r2,
    })
}
