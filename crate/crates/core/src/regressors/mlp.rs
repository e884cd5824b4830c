//! Fully connected network with ReLU hidden layers, inverted dropout and an
//! 8-wide linear head, trained with Adam on the root-mean-square error.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamParams};
use super::forest::check_inputs;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden_layers: Vec<usize>,
    pub dropout_rate: f64,
    pub adam: AdamParams,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_layers: vec![256, 256, 256],
            dropout_rate: 0.2,
            adam: AdamParams::default(),
            epochs: 200,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.contains(&0) {
            return Err(Error::invalid("hidden_layers", "widths must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::invalid("dropout_rate", format!("{} not in [0, 1)", self.dropout_rate)));
        }
        if !(self.adam.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate", "must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `inputs x outputs`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

pub struct MlpFit {
    pub mlp: Mlp,
    /// Mean training loss per epoch (dropout active).
    pub loss_curve: Vec<f64>,
}

struct Forward {
    /// Inputs to each layer (post-activation, post-dropout).
    inputs: Vec<Array2<f64>>,
    /// Per hidden layer: derivative of activation times dropout scale.
    gates: Vec<Array2<f64>>,
    output: Array2<f64>,
}

fn rmse_loss(pred: &Array2<f64>, y: ArrayView2<f64>) -> (f64, Array2<f64>) {
    let diff = pred - &y;
    let count = diff.len() as f64;
    let loss = (diff.iter().map(|d| d * d).sum::<f64>() / count).sqrt();
    let grad = if loss > 0.0 {
        diff / (count * loss)
    } else {
        Array2::zeros(pred.raw_dim())
    };
    (loss, grad)
}

impl Mlp {
    /// Uniform fan-in initialization `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`, zero biases.
    pub fn init(n_inputs: usize, hidden: &[usize], n_outputs: usize, seed: u64) -> Self {
        let mut r = rng::stream(seed, &[0x696E_6974]);
        let mut widths = vec![n_inputs];
        widths.extend_from_slice(hidden);
        widths.push(n_outputs);
        let layers = widths
            .windows(2)
            .map(|w| {
                let limit = (6.0 / w[0] as f64).sqrt();
                Dense {
                    weights: Array2::from_shape_simple_fn((w[0], w[1]), || r.random_range(-limit..limit)),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    fn forward(&self, x: ArrayView2<f64>, dropout: Option<(f64, &mut rng::Rng)>) -> Forward {
        let mut inputs = vec![x.to_owned()];
        let mut gates = Vec::new();
        let last = self.layers.len() - 1;
        let (rate, mut r) = match dropout {
            Some((p, r)) if p > 0.0 => (p, Some(r)),
            _ => (0.0, None),
        };
        let keep = 1.0 - rate;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = inputs[l].dot(&layer.weights);
            z += &layer.bias;
            if l == last {
                return Forward {
                    inputs,
                    gates,
                    output: z,
                };
            }
            let mut gate = z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            if let Some(r) = r.as_deref_mut() {
                gate.mapv_inplace(|g| if r.random::<f64>() < keep { g / keep } else { 0.0 });
            }
            // gate is zero wherever z <= 0, so this is relu(z) * mask / keep.
            let a = &z * &gate;
            gates.push(gate);
            inputs.push(a);
        }
        unreachable!("network has an output layer")
    }

    fn backward(&self, fw: &Forward, mut delta: Array2<f64>) -> Vec<DenseGrad> {
        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let gw = fw.inputs[l].t().dot(&delta);
            let gb = delta.sum_axis(Axis(0));
            grads.push(DenseGrad {
                weights: gw,
                bias: gb,
            });
            if l > 0 {
                delta = delta.dot(&self.layers[l].weights.t()) * &fw.gates[l - 1];
            }
        }
        grads.reverse();
        grads
    }

    /// Loss and gradients with dropout disabled.
    pub fn loss_and_gradients(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> (f64, Vec<DenseGrad>) {
        let fw = self.forward(x, None);
        let (loss, delta) = rmse_loss(&fw.output, y);
        (loss, self.backward(&fw, delta))
    }

    pub fn loss(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> f64 {
        rmse_loss(&self.forward(x, None).output, y).0
    }

    /// Network output with dropout disabled (unclamped).
    pub fn predict_raw(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward(x, None).output
    }

    fn apply(&mut self, adam: &mut Adam, grads: &[DenseGrad]) {
        adam.begin_step();
        for (l, (layer, g)) in self.layers.iter_mut().zip(grads).enumerate() {
            adam.update(
                2 * l,
                layer.weights.as_slice_mut().expect("standard layout"),
                g.weights.as_slice().expect("standard layout"),
            );
            adam.update(
                2 * l + 1,
                layer.bias.as_slice_mut().expect("contiguous"),
                g.bias.as_slice().expect("contiguous"),
            );
        }
    }
}

pub fn fit_mlp(x: ArrayView2<f64>, y: ArrayView2<f64>, cfg: &MlpConfig) -> Result<MlpFit> {
    check_inputs(x, y)?;
    cfg.validate()?;
    let mut mlp = Mlp::init(x.ncols(), &cfg.hidden_layers, y.ncols(), cfg.seed);
    let sizes: Vec<usize> = mlp
        .layers
        .iter()
        .flat_map(|l| [l.weights.len(), l.bias.len()])
        .collect();
    let mut adam = Adam::new(cfg.adam, &sizes);

    let n = x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::stream(cfg.seed, &[0x6570_6F63, epoch as u64]));
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let xb = x.select(Axis(0), chunk);
            let yb = y.select(Axis(0), chunk);
            let mut r = rng::stream(cfg.seed, &[0x6472_6F70, epoch as u64, b as u64]);
            let fw = mlp.forward(xb.view(), Some((cfg.dropout_rate, &mut r)));
            let (loss, delta) = rmse_loss(&fw.output, yb.view());
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    learning_rate: cfg.adam.learning_rate,
                });
            }
            let grads = mlp.backward(&fw, delta);
            mlp.apply(&mut adam, &grads);
            epoch_loss += loss;
            batches += 1;
        }
        loss_curve.push(epoch_loss / batches as f64);
    }
    Ok(MlpFit { mlp, loss_curve })
}
