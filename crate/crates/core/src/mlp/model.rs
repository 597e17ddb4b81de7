use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{regression_metrics, Metrics};
use super::network::{Activation, Layer, Network};
use crate::dataset::SimRecord;
use crate::design_space::{ScalerParams, CLAMP_TOLERANCE};
use crate::error::{Error, Result};
use crate::rng::{self, PRNG_ALGORITHM};
use crate::scalar::Scalar;

pub const INPUT_WIDTH: usize = 3;
pub const OUTPUT_WIDTH: usize = 4;

/// Hyperparameters for one surrogate. Input width is fixed at 3 design
/// variables, output width at 4 responses with a sigmoid output layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden_sizes: [usize; 3],
    pub hidden_activation: Activation,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    /// 9-10-9 ReLU, Adam at 0.001, batch 1, 50 epochs, dropout 0.1.
    fn default() -> Self {
        Self {
            hidden_sizes: [9, 10, 9],
            hidden_activation: Activation::Relu,
            dropout_rate: 0.1,
            learning_rate: 0.001,
            batch_size: 1,
            epochs: 50,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.hidden_sizes.iter().position(|&h| h == 0) {
            return Err(Error::config(
                format!("mlp.hidden_sizes[{i}]"),
                "must be positive",
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("mlp.dropout_rate", "must lie in [0, 1)"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config("mlp.learning_rate", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("mlp.batch_size", "must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::config("mlp.epochs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn total_neurons(&self) -> usize {
        self.hidden_sizes.iter().sum()
    }
}

/// A trained surrogate: network plus the scalers that map physical
/// designs and responses to and from the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MlpModel<T: Scalar> {
    pub config: MlpConfig,
    pub input_scaler: ScalerParams<T>,
    pub target_scaler: ScalerParams<T>,
    pub layers: Vec<Layer<T>>,
    pub seed: u64,
    #[serde(default = "default_prng")]
    pub prng: String,
}

fn default_prng() -> String {
    PRNG_ALGORITHM.to_string()
}

/// A physical-unit prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    /// fx, fy (N), dx, dy (mm).
    pub responses: [T; 4],
    /// Some input fell outside the scaler's training range.
    pub extrapolated: bool,
}

impl<T: Scalar> MlpModel<T> {
    /// Glorot-initialized model for `config`, drawing from `rng`.
    pub fn init(
        config: MlpConfig,
        input_scaler: ScalerParams<T>,
        target_scaler: ScalerParams<T>,
        rng: &mut rng::Prng,
    ) -> Result<Self> {
        config.validate()?;
        let mut widths = vec![INPUT_WIDTH];
        widths.extend(config.hidden_sizes);
        widths.push(OUTPUT_WIDTH);
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i + 2 == widths.len() {
                    Activation::Sigmoid
                } else {
                    config.hidden_activation
                };
                Layer::glorot(w[0], w[1], act, rng)
            })
            .collect();
        let model = Self {
            config,
            input_scaler,
            target_scaler,
            layers,
            seed: config.seed,
            prng: default_prng(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks the 3 → h1 → h2 → h3 → 4 chain, activations and scalers.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let expected_layers = self.config.hidden_sizes.len() + 1;
        if self.layers.len() != expected_layers {
            return Err(Error::Dimension {
                layer: self.layers.len().min(expected_layers),
                message: format!(
                    "expected {expected_layers} layers, found {}",
                    self.layers.len()
                ),
            });
        }
        let mut width = INPUT_WIDTH;
        for (i, layer) in self.layers.iter().enumerate() {
            let (out, act) = match self.config.hidden_sizes.get(i) {
                Some(&h) => (h, self.config.hidden_activation),
                None => (OUTPUT_WIDTH, Activation::Sigmoid),
            };
            if layer.bias.len() != out || layer.weights.len() != out {
                return Err(Error::Dimension {
                    layer: i,
                    message: format!(
                        "expected {out} units, found {} weight rows and {} biases",
                        layer.weights.len(),
                        layer.bias.len()
                    ),
                });
            }
            if let Some(row) = layer.weights.iter().find(|r| r.len() != width) {
                return Err(Error::Dimension {
                    layer: i,
                    message: format!(
                        "weight matrix should be {out}x{width}, found a row of length {}",
                        row.len()
                    ),
                });
            }
            if layer.activation != act {
                return Err(Error::Dimension {
                    layer: i,
                    message: format!("expected activation {act}, found {}", layer.activation),
                });
            }
            width = out;
        }
        Network::new(self.layers.clone())?;
        if self.input_scaler.width() != INPUT_WIDTH {
            return Err(Error::ModelFormat(format!(
                "input scaler has {} columns, expected {INPUT_WIDTH}",
                self.input_scaler.width()
            )));
        }
        if self.target_scaler.width() != OUTPUT_WIDTH {
            return Err(Error::ModelFormat(format!(
                "target scaler has {} columns, expected {OUTPUT_WIDTH}",
                self.target_scaler.width()
            )));
        }
        self.input_scaler.validate()?;
        self.target_scaler.validate()?;
        Ok(())
    }

    pub fn network(&self) -> Network<T> {
        Network {
            layers: self.layers.clone(),
        }
    }

    /// Inference in normalized space; outputs lie strictly inside (0, 1).
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        if input.len() != INPUT_WIDTH {
            return Err(Error::LengthMismatch {
                expected: INPUT_WIDTH,
                actual: input.len(),
            });
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model input".into()));
        }
        let mut x = input.to_vec();
        for l in &self.layers {
            x = l
                .weights
                .iter()
                .zip(&l.bias)
                .map(|(row, &b)| {
                    let z = row.iter().zip(&x).fold(b, |acc, (&w, &xi)| acc + w * xi);
                    l.activation.apply(z)
                })
                .collect();
        }
        Ok(x)
    }

    /// Whether a normalized input lies outside [0, 1] beyond the clamp tolerance.
    pub fn is_extrapolation(input: &[T]) -> bool {
        let tol = T::lit(CLAMP_TOLERANCE);
        input
            .iter()
            .any(|&v| v < -tol || v > T::one() + tol)
    }

    /// Physical design (mm) to physical responses.
    pub fn predict(&self, design: &[T; 3]) -> Result<Prediction<T>> {
        let x = self.input_scaler.scale_row(design);
        let extrapolated = Self::is_extrapolation(&x);
        let y = self.forward(&x)?;
        let r = self.target_scaler.unscale_row(&y);
        Ok(Prediction {
            responses: [r[0], r[1], r[2], r[3]],
            extrapolated,
        })
    }

    /// Physical responses from a normalized input.
    pub fn predict_normalized(&self, genes: &[T]) -> Result<[T; 4]> {
        let y = self.forward(genes)?;
        let r = self.target_scaler.unscale_row(&y);
        Ok([r[0], r[1], r[2], r[3]])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}

/// Normalized inputs and targets of `rows` under the model's scalers.
pub fn normalize_rows<T: Scalar>(
    model: &MlpModel<T>,
    rows: &[SimRecord<T>],
) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    rows.iter()
        .map(|r| {
            (
                model.input_scaler.scale_row(&r.inputs()),
                model.target_scaler.scale_row(&r.targets()),
            )
        })
        .unzip()
}

/// MSE, MAE and R² per target in normalized target space.
pub fn evaluate_metrics<T: Scalar>(model: &MlpModel<T>, rows: &[SimRecord<T>]) -> Result<Metrics<T>> {
    if rows.is_empty() {
        return Err(Error::Precondition("metrics need at least one row".into()));
    }
    let (xs, ys) = normalize_rows(model, rows);
    let preds = xs
        .iter()
        .map(|x| model.forward(x))
        .collect::<Result<Vec<_>>>()?;
    regression_metrics(&ys, &preds)
}

pub fn save_model<T: Scalar>(model: &MlpModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    model.validate()?;
    let mut text = model.to_json()?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<MlpModel<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    MlpModel::from_json(&text)
}
