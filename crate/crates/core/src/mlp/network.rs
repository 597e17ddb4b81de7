//! Dense feedforward layers, inverted dropout and backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Relu, Activation::Sigmoid, Activation::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative given the pre-activation `z` and its output `a`.
    pub fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => a * (T::one() - a),
            Activation::Tanh => T::one() - a * a,
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::config("activation", format!("unknown activation `{other}`"))),
        }
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Affine map followed by an element-wise activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Layer<T: Scalar> {
    /// Row `i` holds the weights into output unit `i`.
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<T>,
    pub activation: Activation,
}

impl<T: Scalar> Layer<T> {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            weights: vec![vec![T::zero(); inputs]; outputs],
            bias: vec![T::zero(); outputs],
            activation,
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot(inputs: usize, outputs: usize, activation: Activation, rng: &mut Prng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..outputs)
            .map(|_| {
                (0..inputs)
                    .map(|_| T::lit(rng.random_range(-limit..limit)))
                    .collect()
            })
            .collect();
        Self {
            weights,
            bias: vec![T::zero(); outputs],
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    fn pre_activation(&self, x: &[T]) -> Vec<T> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi))
            .collect()
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    /// Input fed to each layer (after dropout for hidden outputs).
    pub layer_inputs: Vec<Vec<T>>,
    pub pre_activations: Vec<Vec<T>>,
    /// Activation outputs before dropout.
    pub activations: Vec<Vec<T>>,
    /// Inverted-dropout multipliers per hidden layer (0 or 1/(1-p)).
    pub masks: Vec<Option<Vec<T>>>,
}

impl<T: Copy> Trace<T> {
    pub fn output(&self) -> &[T] {
        self.activations.last().map_or(&[], Vec::as_slice)
    }
}

/// Training-mode dropout settings.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut Prng,
}

/// Gradient of the loss, shaped like the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<(Vec<Vec<T>>, Vec<T>)>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(net: &Network<T>) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| {
                    (
                        vec![vec![T::zero(); l.inputs()]; l.outputs()],
                        vec![T::zero(); l.outputs()],
                    )
                })
                .collect(),
        }
    }

    /// Flattened in the same order as [`Network::params`].
    pub fn flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            for row in w {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(b);
        }
        out
    }

    fn scale(&mut self, s: T) {
        for (w, b) in &mut self.layers {
            for v in w.iter_mut().flatten().chain(b.iter_mut()) {
                *v = *v * s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "")]
pub struct Network<T: Scalar> {
    pub layers: Vec<Layer<T>>,
}

impl<T: Scalar> Network<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Result<Self> {
        let net = Self { layers };
        net.validate()?;
        Ok(net)
    }

    /// Checks that consecutive layers chain and all parameters are finite.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Dimension {
                layer: 0,
                message: "network has no layers".into(),
            });
        }
        let mut width = self.layers[0].inputs();
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.bias.len() {
                return Err(Error::Dimension {
                    layer: i,
                    message: format!(
                        "{} weight rows but {} biases",
                        l.weights.len(),
                        l.bias.len()
                    ),
                });
            }
            if l.weights.is_empty() {
                return Err(Error::Dimension {
                    layer: i,
                    message: "layer has no units".into(),
                });
            }
            if let Some(row) = l.weights.iter().find(|r| r.len() != width) {
                return Err(Error::Dimension {
                    layer: i,
                    message: format!("expected {width} inputs per unit, found {}", row.len()),
                });
            }
            if l.weights.iter().flatten().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} parameters")));
            }
            width = l.outputs();
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, Layer::inputs)
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, Layer::outputs)
    }

    /// Inference pass (dropout off).
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for l in &self.layers {
            x = l
                .pre_activation(&x)
                .into_iter()
                .map(|z| l.activation.apply(z))
                .collect();
        }
        Ok(x)
    }

    fn check_input(&self, input: &[T]) -> Result<()> {
        if input.len() != self.input_width() {
            return Err(Error::LengthMismatch {
                expected: self.input_width(),
                actual: input.len(),
            });
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input".into()));
        }
        Ok(())
    }

    /// Forward pass recording every intermediate. With `dropout`, each
    /// hidden unit is zeroed with probability `rate` and survivors are
    /// scaled by 1/(1 - rate).
    pub fn forward_trace(&self, input: &[T], mut dropout: Option<&mut Dropout<'_>>) -> Result<Trace<T>> {
        self.check_input(input)?;
        let n = self.layers.len();
        let mut trace = Trace {
            layer_inputs: Vec::with_capacity(n),
            pre_activations: Vec::with_capacity(n),
            activations: Vec::with_capacity(n),
            masks: Vec::with_capacity(n),
        };
        let mut x = input.to_vec();
        for (i, l) in self.layers.iter().enumerate() {
            let z = l.pre_activation(&x);
            let a: Vec<T> = z.iter().map(|&v| l.activation.apply(v)).collect();
            trace.layer_inputs.push(x);
            let hidden = i + 1 < n;
            let mask = match dropout.as_deref_mut() {
                Some(d) if hidden && d.rate > 0.0 => {
                    let keep = T::lit(1.0 / (1.0 - d.rate));
                    Some(
                        (0..a.len())
                            .map(|_| {
                                if d.rng.random::<f64>() < d.rate {
                                    T::zero()
                                } else {
                                    keep
                                }
                            })
                            .collect::<Vec<T>>(),
                    )
                }
                _ => None,
            };
            x = match &mask {
                Some(m) => a.iter().zip(m).map(|(&v, &k)| v * k).collect(),
                None => a.clone(),
            };
            trace.pre_activations.push(z);
            trace.activations.push(a);
            trace.masks.push(mask);
        }
        Ok(trace)
    }

    /// Mean squared error over the batch and all outputs, and its gradient
    /// with respect to every weight and bias.
    pub fn loss_and_gradients(
        &self,
        inputs: &[&[T]],
        targets: &[&[T]],
        mut dropout: Option<&mut Dropout<'_>>,
    ) -> Result<(T, Gradients<T>)> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::Precondition(
                "batch must be non-empty with one target per input".into(),
            ));
        }
        let out_w = self.output_width();
        let mut grads = Gradients::zeros_like(self);
        let mut loss = T::zero();
        for (x, y) in inputs.iter().zip(targets) {
            if y.len() != out_w {
                return Err(Error::LengthMismatch {
                    expected: out_w,
                    actual: y.len(),
                });
            }
            let trace = self.forward_trace(x, dropout.as_deref_mut())?;
            let out = trace.output();
            // dL/da for this sample, before averaging.
            let mut delta: Vec<T> = out
                .iter()
                .zip(y.iter())
                .map(|(&p, &t)| {
                    loss = loss + (p - t) * (p - t);
                    T::lit(2.0) * (p - t)
                })
                .collect();
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let z = &trace.pre_activations[li];
                let a = &trace.activations[li];
                for (d, (&zi, &ai)) in delta.iter_mut().zip(z.iter().zip(a)) {
                    *d = *d * layer.activation.derivative(zi, ai);
                }
                let input = &trace.layer_inputs[li];
                let (gw, gb) = &mut grads.layers[li];
                for (o, &d) in delta.iter().enumerate() {
                    gb[o] = gb[o] + d;
                    for (g, &xi) in gw[o].iter_mut().zip(input) {
                        *g = *g + d * xi;
                    }
                }
                if li == 0 {
                    break;
                }
                let mut prev = vec![T::zero(); layer.inputs()];
                for (row, &d) in layer.weights.iter().zip(&delta) {
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p = *p + w * d;
                    }
                }
                if let Some(mask) = &trace.masks[li - 1] {
                    for (p, &m) in prev.iter_mut().zip(mask) {
                        *p = *p * m;
                    }
                }
                delta = prev;
            }
        }
        let denom = T::from_usize_lossy(inputs.len() * out_w);
        grads.scale(T::one() / denom);
        Ok((loss / denom, grads))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.outputs() * (l.inputs() + 1))
            .sum()
    }

    /// Every parameter, layer by layer: weights row-major, then biases.
    pub fn params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            for row in &l.weights {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for v in l.weights.iter_mut().flatten().chain(l.bias.iter_mut()) {
                *v = it.next().expect("length checked");
            }
        }
        Ok(())
    }
}
