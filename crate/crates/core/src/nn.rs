//! Dense feed-forward networks with manual backpropagation.
//!
//! A network is a stack of affine layers `z = a W^T + b`. Hidden layers apply
//! the network's [`Activation`]; the last layer applies the
//! [`OutputActivation`]. Batches are row-major: one sample per row.
//!
//! Weights of layer `l` have shape `(dims[l + 1], dims[l])`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    /// ELU with unit scale: `z` for `z > 0`, `e^z - 1` otherwise.
    Elu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Elu => {
                if z > 0.0 {
                    z
                } else {
                    z.exp_m1()
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative given the pre-activation `z` and the activation `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Elu => {
                if z > 0.0 {
                    1.0
                } else {
                    a + 1.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    /// Row-wise softmax.
    Softmax,
}

/// One affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// Shape `(out_dim, in_dim)`.
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl Dense {
    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    fn zeros_like(&self) -> Dense {
        Dense {
            weights: Array2::zeros(self.weights.raw_dim()),
            biases: Array1::zeros(self.biases.raw_dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layers: Vec<Dense>,
    hidden_activation: Activation,
    output_activation: OutputActivation,
}

/// Intermediate values from a forward pass, consumed by [`MlpNetwork::backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `inputs[l]` is the input of layer `l`; `inputs[0]` is the batch.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of every layer.
    pre_activations: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }

    pub fn batch_size(&self) -> usize {
        self.output.nrows()
    }
}

/// Parameter gradients, congruent with the network they were computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

/// Result of a backward pass.
#[derive(Debug, Clone)]
pub struct Backward {
    pub params: Gradients,
    /// Gradient with respect to the network input, shape `(n, in_dim)`.
    pub input: Array2<f64>,
}

impl Gradients {
    pub fn zeros_for(net: &MlpNetwork) -> Gradients {
        Gradients {
            layers: net.layers.iter().map(Dense::zeros_like).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite()) && l.biases.iter().all(|v| v.is_finite())
        })
    }

    /// Flattened in the same order as [`MlpNetwork::flat_params`].
    pub fn to_flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights *= factor;
            l.biases *= factor;
        }
    }

    fn congruent_with(&self, net: &MlpNetwork) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.dim() == l.weights.dim() && g.biases.len() == l.biases.len()
            })
    }
}

fn flatten(layers: &[Dense]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend(l.weights.iter().copied());
        out.extend(l.biases.iter().copied());
    }
    out
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(
            "a network needs at least an input and an output dimension".into(),
        ));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidArgument("layer dims must be > 0".into()));
    }
    Ok(())
}

impl MlpNetwork {
    /// He-initialized network: weights drawn from `N(0, 2 / fan_in)`, zero biases.
    pub fn new<R: Rng + ?Sized>(
        layer_dims: &[usize],
        hidden_activation: Activation,
        output_activation: OutputActivation,
        rng: &mut R,
    ) -> Result<Self> {
        check_dims(layer_dims)?;
        let layers = layer_dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt())
                    .expect("positive std");
                Dense {
                    weights: Array2::from_shape_simple_fn((fan_out, fan_in), || normal.sample(rng)),
                    biases: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self {
            layers,
            hidden_activation,
            output_activation,
        })
    }

    /// All weights and biases zero.
    pub fn zeros(
        layer_dims: &[usize],
        hidden_activation: Activation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        check_dims(layer_dims)?;
        let layers = layer_dims
            .windows(2)
            .map(|w| Dense {
                weights: Array2::zeros((w[1], w[0])),
                biases: Array1::zeros(w[1]),
            })
            .collect();
        Ok(Self {
            layers,
            hidden_activation,
            output_activation,
        })
    }

    pub fn from_layers(
        layers: Vec<Dense>,
        hidden_activation: Activation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network has no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.biases.len() != l.out_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i}: {} biases for {} outputs",
                    l.biases.len(),
                    l.out_dim()
                )));
            }
            if l.in_dim() == 0 || l.out_dim() == 0 {
                return Err(Error::InvalidArgument("layer dims must be > 0".into()));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i} outputs {} values but layer {} expects {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        let net = Self {
            layers,
            hidden_activation,
            output_activation,
        };
        if !net.is_finite() {
            return Err(Error::NonFinite("network parameters".into()));
        }
        Ok(net)
    }

    /// A one-hidden-layer ReLU network `dim -> hidden_width -> dim` that is
    /// exactly the identity map at initialization.
    ///
    /// Each input coordinate `x_i` is carried by a pair of units computing
    /// `relu(x_i) - relu(-x_i)`. The remaining hidden units get He-random
    /// input weights and zero output weights, so they start silent but can
    /// be recruited by training.
    pub fn identity_relu<R: Rng + ?Sized>(
        dim: usize,
        hidden_width: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if dim == 0 || hidden_width < 2 * dim {
            return Err(Error::InvalidArgument(format!(
                "identity network needs hidden width >= 2 * dim ({} < {})",
                hidden_width,
                2 * dim
            )));
        }
        let normal = Normal::new(0.0, (2.0 / dim as f64).sqrt()).expect("positive std");
        let mut w1 = Array2::zeros((hidden_width, dim));
        let mut w2 = Array2::zeros((dim, hidden_width));
        for i in 0..dim {
            w1[[2 * i, i]] = 1.0;
            w1[[2 * i + 1, i]] = -1.0;
            w2[[i, 2 * i]] = 1.0;
            w2[[i, 2 * i + 1]] = -1.0;
        }
        for u in 2 * dim..hidden_width {
            for i in 0..dim {
                w1[[u, i]] = normal.sample(rng);
            }
        }
        Self::from_layers(
            vec![
                Dense {
                    weights: w1,
                    biases: Array1::zeros(hidden_width),
                },
                Dense {
                    weights: w2,
                    biases: Array1::zeros(dim),
                },
            ],
            Activation::Relu,
            OutputActivation::Identity,
        )
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Dense::out_dim));
        dims
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite()) && l.biases.iter().all(|v| v.is_finite())
        })
    }

    /// Parameters flattened layer by layer: weights (row-major), then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} parameters",
                values.len(),
                self.parameter_count()
            )));
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = it.next().unwrap();
            }
            for b in l.biases.iter_mut() {
                *b = it.next().unwrap();
            }
        }
        Ok(())
    }

    fn check_input(&self, batch: &ArrayView2<f64>) -> Result<()> {
        if batch.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "batch has {} columns, network expects {}",
                batch.ncols(),
                self.input_dim()
            )));
        }
        if !batch.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("network input".into()));
        }
        Ok(())
    }

    pub fn forward(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&batch)?;
        let last = self.layers.len() - 1;
        let mut a = batch.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.biases;
            if l < last {
                let act = self.hidden_activation;
                z.mapv_inplace(|v| act.apply(v));
            } else if self.output_activation == OutputActivation::Softmax {
                softmax_rows(&mut z);
            }
            a = z;
        }
        Ok(a)
    }

    /// Forward pass that keeps every layer's input and pre-activation.
    pub fn forward_trace(&self, batch: ArrayView2<f64>) -> Result<ForwardTrace> {
        self.check_input(&batch)?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut a = batch.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.biases;
            let mut next = z.clone();
            if l < last {
                let act = self.hidden_activation;
                next.mapv_inplace(|v| act.apply(v));
            } else if self.output_activation == OutputActivation::Softmax {
                softmax_rows(&mut next);
            }
            inputs.push(a);
            pre_activations.push(z);
            a = next;
        }
        Ok(ForwardTrace {
            inputs,
            pre_activations,
            output: a,
        })
    }

    /// Backpropagates `upstream = dL/d(output)` through the network.
    ///
    /// Gradients are summed over rows; scale `upstream` to get a mean.
    pub fn backward(&self, trace: &ForwardTrace, upstream: ArrayView2<f64>) -> Result<Backward> {
        if trace.inputs.len() != self.layers.len() {
            return Err(Error::DimensionMismatch(
                "trace was produced by a different network".into(),
            ));
        }
        if upstream.dim() != trace.output.dim() {
            return Err(Error::DimensionMismatch(format!(
                "upstream gradient {:?} does not match output {:?}",
                upstream.dim(),
                trace.output.dim()
            )));
        }

        let mut delta = match self.output_activation {
            OutputActivation::Identity => upstream.to_owned(),
            OutputActivation::Softmax => {
                // J^T g for row-wise softmax s: s * (g - <g, s>)
                let s = &trace.output;
                let dot = (&upstream * s).sum_axis(Axis(1)).insert_axis(Axis(1));
                s * &(&upstream - &dot)
            }
        };

        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        let mut input_grad = Array2::zeros((0, 0));
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let weights = delta.t().dot(&trace.inputs[l]);
            let biases = delta.sum_axis(Axis(0));
            grads.push(Dense { weights, biases });
            let d_input = delta.dot(&layer.weights);
            if l > 0 {
                let act = self.hidden_activation;
                let mut d = d_input;
                ndarray::Zip::from(&mut d)
                    .and(&trace.pre_activations[l - 1])
                    .and(&trace.inputs[l])
                    .for_each(|g, &z, &a| *g *= act.derivative(z, a));
                delta = d;
            } else {
                input_grad = d_input;
            }
        }
        grads.reverse();
        Ok(Backward {
            params: Gradients { layers: grads },
            input: input_grad,
        })
    }

    pub(crate) fn check_gradients(&self, grads: &Gradients) -> Result<()> {
        if !grads.congruent_with(self) {
            return Err(Error::DimensionMismatch(
                "gradients are not congruent with the network".into(),
            ));
        }
        Ok(())
    }
}

/// Numerically stable in-place softmax over each row.
pub fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}
