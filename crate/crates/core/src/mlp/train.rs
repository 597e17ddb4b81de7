use rand::seq::SliceRandom;
use serde::Serialize;

use super::adam::Adam;
use super::model::{normalize_rows, MlpConfig, MlpModel};
use super::network::{Dropout, Network};
use crate::dataset::{Dataset, SimRecord, SplitIndices};
use crate::design_space::fit_scaler;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Inference-mode MSE on both parts at the end of an epoch (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossPoint {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T: Scalar> {
    pub model: MlpModel<T>,
    pub curve: Vec<LossPoint>,
}

impl<T: Scalar> TrainOutcome<T> {
    pub fn final_val_mse(&self) -> f64 {
        self.curve.last().map_or(f64::INFINITY, |p| p.val_mse)
    }
}

/// Loss curve as `epoch,train_mse,val_mse` CSV.
pub fn curve_csv(curve: &[LossPoint]) -> String {
    let mut out = String::from("epoch,train_mse,val_mse\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.epoch, p.train_mse, p.val_mse));
    }
    out
}

fn mse<T: Scalar>(net: &Network<T>, xs: &[Vec<T>], ys: &[Vec<T>]) -> Result<f64> {
    let mut total = T::zero();
    let mut count = 0usize;
    for (x, y) in xs.iter().zip(ys) {
        for (p, t) in net.forward(x)?.iter().zip(y) {
            total = total + (*p - *t) * (*p - *t);
            count += 1;
        }
    }
    Ok(total.as_f64() / count as f64)
}

/// Trains on the split's train part and tracks the validation part.
pub fn train<T: Scalar>(
    dataset: &Dataset<T>,
    split: &SplitIndices,
    config: &MlpConfig,
) -> Result<TrainOutcome<T>> {
    train_on(
        &dataset.subset(&split.train),
        &dataset.subset(&split.validation),
        config,
    )
}

/// Fits scalers on `train_rows`, initializes from `config.seed`, and runs
/// `config.epochs` epochs of shuffled mini-batch Adam with dropout.
/// Returns the final-epoch weights.
pub fn train_on<T: Scalar>(
    train_rows: &[SimRecord<T>],
    val_rows: &[SimRecord<T>],
    config: &MlpConfig,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    if train_rows.len() < 2 {
        return Err(Error::Sizing {
            required: 2,
            available: train_rows.len(),
        });
    }
    if val_rows.is_empty() {
        return Err(Error::Sizing {
            required: 1,
            available: 0,
        });
    }
    let inputs: Vec<[T; 3]> = train_rows.iter().map(SimRecord::inputs).collect();
    let targets: Vec<[T; 4]> = train_rows.iter().map(SimRecord::targets).collect();
    let input_scaler = fit_scaler(&inputs)?;
    let target_scaler = fit_scaler(&targets)?;

    let mut rng = rng::seeded(config.seed);
    let mut model = MlpModel::init(*config, input_scaler, target_scaler, &mut rng)?;
    let (train_x, train_y) = normalize_rows(&model, train_rows);
    let (val_x, val_y) = normalize_rows(&model, val_rows);

    let mut net = model.network();
    let mut params = net.params();
    let mut adam = Adam::<T>::new(params.len());
    let lr = T::lit(config.learning_rate);
    let mut order: Vec<usize> = (0..train_rows.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut last_batch = 0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            last_batch = b + 1;
            let xs: Vec<&[T]> = batch.iter().map(|&i| train_x[i].as_slice()).collect();
            let ys: Vec<&[T]> = batch.iter().map(|&i| train_y[i].as_slice()).collect();
            let mut dropout = Dropout {
                rate: config.dropout_rate,
                rng: &mut rng,
            };
            let (loss, grads) = net
                .loss_and_gradients(&xs, &ys, Some(&mut dropout))
                .map_err(|e| match e {
                    Error::NonFinite(_) => Error::Divergence { epoch, batch: b + 1 },
                    e => e,
                })?;
            let flat = grads.flat();
            if !loss.is_finite() || flat.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch, batch: b + 1 });
            }
            adam.step(&mut params, &flat, lr)?;
            net.set_params(&params)?;
        }
        let diverged = || Error::Divergence {
            epoch,
            batch: last_batch,
        };
        let train_mse = mse(&net, &train_x, &train_y).map_err(|_| diverged())?;
        let val_mse = mse(&net, &val_x, &val_y).map_err(|_| diverged())?;
        if !(train_mse.is_finite() && val_mse.is_finite()) {
            return Err(diverged());
        }
        curve.push(LossPoint {
            epoch,
            train_mse,
            val_mse,
        });
    }
    model.layers = net.layers;
    model.validate()?;
    Ok(TrainOutcome { model, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{split, SplitRatios};
    use crate::design_space::DesignSpace;
    use crate::oracle::{generate_dataset, OracleConfig};

    fn oracle_data() -> Dataset<f64> {
        generate_dataset(&DesignSpace::default(), &OracleConfig::default()).unwrap()
    }

    #[test]
    fn deterministic_given_seed() {
        let data = oracle_data();
        let s = split(data.len(), 1, SplitRatios::default(), 5).unwrap();
        let cfg = MlpConfig { epochs: 3, seed: 11, ..Default::default() };
        let a = train(&data, &s, &cfg).unwrap();
        let b = train(&data, &s, &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.curve, b.curve);
        let c = train(&data, &s, &MlpConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.model, c.model);
    }

    #[test]
    fn scalers_come_from_training_rows_only() {
        let data = oracle_data();
        let s = split(data.len(), 2, SplitRatios::default(), 5).unwrap();
        let out = train(&data, &s, &MlpConfig { epochs: 1, ..Default::default() }).unwrap();
        let train_fx: Vec<f64> = data.subset(&s.train).iter().map(|r| r.fx).collect();
        let max = train_fx.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(out.model.target_scaler.columns[0].max, max);
    }

    #[test]
    fn empty_validation_rejected() {
        let data = oracle_data();
        let rows = data.subset(&[0, 1, 2]);
        assert!(train_on(&rows, &[], &MlpConfig::default()).is_err());
        assert!(train_on(&rows[..1], &rows[1..], &MlpConfig::default()).is_err());
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let data = oracle_data();
        let s = split(data.len(), 3, SplitRatios::default(), 5).unwrap();
        let cfg = MlpConfig { learning_rate: 1e300, epochs: 3, ..Default::default() };
        assert!(matches!(train(&data, &s, &cfg), Err(Error::Divergence { epoch: 1, .. })));
    }

    #[test]
    fn f32_training_runs() {
        let data: Dataset<f32> =
            generate_dataset(&DesignSpace::default(), &OracleConfig::default()).unwrap();
        let s = split(data.len(), 4, SplitRatios::default(), 5).unwrap();
        let out = train(&data, &s, &MlpConfig { epochs: 5, ..Default::default() }).unwrap();
        assert_eq!(out.curve.len(), 5);
        assert!(out.final_val_mse().is_finite());
    }

    #[test]
    fn curve_csv_header() {
        let c = curve_csv(&[LossPoint { epoch: 1, train_mse: 0.5, val_mse: 0.25 }]);
        assert_eq!(c, "epoch,train_mse,val_mse\n1,0.5,0.25\n");
    }
}
