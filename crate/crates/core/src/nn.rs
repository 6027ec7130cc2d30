//! Minimal dense network engine.
//!
//! Every network here has the same fixed topology: four ReLU hidden layers of
//! equal width followed by one output layer. Each layer is stored as a
//! `(fan_in + 1) x fan_out` matrix whose last row is the bias, so a layer
//! computes `z = x · W[..fan_in] + W[fan_in]`.
//!
//! Gradients are computed by hand (there is no tape); [`Mlp::forward_cached`]
//! records the per-layer inputs that [`Mlp::backward`] needs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const HIDDEN_LAYERS: usize = 4;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before any log.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HiddenActivation {
    #[default]
    Relu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputActivation {
    Sigmoid,
    Linear,
}

impl OutputActivation {
    pub fn name(self) -> &'static str {
        match self {
            OutputActivation::Sigmoid => "sigmoid",
            OutputActivation::Linear => "linear",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sigmoid" => Some(OutputActivation::Sigmoid),
            "linear" => Some(OutputActivation::Linear),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Ascend,
    Descend,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Mean binary cross entropy, `-(1/n) Σ [y log p + (1-y) log(1-p)]`, with
/// `p` clamped away from 0 and 1.
pub fn bce_loss(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    check_bce_inputs(predictions, labels)?;
    let total: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = clamp_prob(p);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / predictions.len() as f64)
}

/// Derivative of [`bce_loss`] with respect to each prediction. Entries whose
/// prediction sits outside the clamp band get a zero derivative, matching the
/// clamped loss exactly.
pub fn bce_grad(predictions: &[f64], labels: &[f64]) -> Result<Vec<f64>> {
    check_bce_inputs(predictions, labels)?;
    let n = predictions.len() as f64;
    Ok(predictions
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            if !(PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
                0.0
            } else {
                (-(y / p) + (1.0 - y) / (1.0 - p)) / n
            }
        })
        .collect())
}

fn check_bce_inputs(predictions: &[f64], labels: &[f64]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::Domain("cross entropy of an empty batch".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::shape("bce", predictions.len(), labels.len()));
    }
    Ok(())
}

/// Per-layer gradients, shaped exactly like [`Mlp::layers`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Matrix>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|m| m.as_slice())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Result of a backward pass: weight gradients plus the gradient with respect
/// to the network input (needed to push a loss through a detector into the
/// generator).
#[derive(Clone, Debug)]
pub struct Backprop {
    pub weights: Gradients,
    pub input: Matrix,
}

/// Activations recorded by [`Mlp::forward_cached`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// Input to each layer; `inputs[0]` is the batch itself.
    inputs: Vec<Matrix>,
    output: Matrix,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn into_output(self) -> Matrix {
        self.output
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Matrix>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
    input_dim: usize,
    layer_width: usize,
}

impl Mlp {
    /// Assembles a network from explicit weights, checking the topology.
    pub fn from_layers(
        layers: Vec<Matrix>,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if layers.len() != HIDDEN_LAYERS + 1 {
            return Err(Error::shape(
                "Mlp::from_layers",
                format!("{} layers", HIDDEN_LAYERS + 1),
                layers.len(),
            ));
        }
        let input_dim = layers[0].rows().saturating_sub(1);
        let layer_width = layers[0].cols();
        if input_dim == 0 || layer_width == 0 {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].cols() + 1 != pair[1].rows() {
                return Err(Error::shape(
                    "Mlp::from_layers",
                    format!("layer {} fan_in {}", i + 1, pair[0].cols()),
                    pair[1].rows().saturating_sub(1),
                ));
            }
        }
        for (i, w) in layers[..HIDDEN_LAYERS].iter().enumerate() {
            if w.cols() != layer_width {
                return Err(Error::shape(
                    "Mlp::from_layers",
                    format!("hidden width {layer_width}"),
                    format!("{} in layer {i}", w.cols()),
                ));
            }
        }
        if let Some(i) = layers.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteGradient { layer: i });
        }
        Ok(Self {
            layers,
            hidden_activation,
            output_activation,
            input_dim,
            layer_width,
        })
    }

    /// Glorot-uniform weights, zero biases, deterministic in `seed`.
    pub fn init_weights(
        input_dim: usize,
        layer_width: usize,
        out_dim: usize,
        output_activation: OutputActivation,
        seed: u64,
    ) -> Self {
        assert!(
            input_dim > 0 && layer_width > 0 && out_dim > 0,
            "network dimensions must be positive"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(HIDDEN_LAYERS + 1);
        let mut fan_in = input_dim;
        for l in 0..=HIDDEN_LAYERS {
            let fan_out = if l == HIDDEN_LAYERS { out_dim } else { layer_width };
            let bound = glorot_bound(fan_in, fan_out);
            let mut w = Matrix::zeros(fan_in + 1, fan_out);
            for v in &mut w.as_mut_slice()[..fan_in * fan_out] {
                *v = rng.random_range(-bound..=bound);
            }
            layers.push(w);
            fan_in = fan_out;
        }
        Self {
            layers,
            hidden_activation: HiddenActivation::Relu,
            output_activation,
            input_dim,
            layer_width,
        }
    }

    /// Square network whose every layer is the identity with zero bias, so
    /// it maps non-negative inputs to themselves.
    pub fn identity(dim: usize, output_activation: OutputActivation) -> Self {
        assert!(dim > 0, "network dimensions must be positive");
        let eye = Matrix::from_fn(dim + 1, dim, |r, c| if r == c { 1.0 } else { 0.0 });
        Self {
            layers: vec![eye; HIDDEN_LAYERS + 1],
            hidden_activation: HiddenActivation::Relu,
            output_activation,
            input_dim: dim,
            layer_width: dim,
        }
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layer_width(&self) -> usize {
        self.layer_width
    }

    pub fn out_dim(&self) -> usize {
        self.layers[HIDDEN_LAYERS].cols()
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|w| w.rows() * w.cols()).sum()
    }

    pub fn forward(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_input(batch)?;
        let mut x = self.apply_layer(0, batch);
        for l in 1..=HIDDEN_LAYERS {
            x = self.apply_layer(l, &x);
        }
        Ok(x)
    }

    pub fn forward_cached(&self, batch: &Matrix) -> Result<ForwardCache> {
        self.check_input(batch)?;
        let mut inputs = Vec::with_capacity(HIDDEN_LAYERS + 1);
        inputs.push(batch.clone());
        for l in 0..HIDDEN_LAYERS {
            let next = self.apply_layer(l, &inputs[l]);
            inputs.push(next);
        }
        let output = self.apply_layer(HIDDEN_LAYERS, &inputs[HIDDEN_LAYERS]);
        Ok(ForwardCache { inputs, output })
    }

    /// Backpropagates `grad_out` (the derivative of some scalar with respect
    /// to the network output) through the cached activations.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Matrix) -> Result<Backprop> {
        self.check_cache(cache)?;
        if grad_out.shape() != cache.output.shape() {
            return Err(Error::State(format!(
                "output gradient is {:?} but cached output is {:?}",
                grad_out.shape(),
                cache.output.shape()
            )));
        }

        // delta holds dL/dz for the current layer's pre-activation
        let mut delta = grad_out.clone();
        if self.output_activation == OutputActivation::Sigmoid {
            for (d, &s) in delta
                .as_mut_slice()
                .iter_mut()
                .zip(cache.output.as_slice())
            {
                *d *= s * (1.0 - s);
            }
        }

        let mut grads = vec![Matrix::zeros(0, 0); HIDDEN_LAYERS + 1];
        for l in (0..=HIDDEN_LAYERS).rev() {
            let input = &cache.inputs[l];
            let w = &self.layers[l];
            let fan_in = w.rows() - 1;
            let fan_out = w.cols();

            let mut g = Matrix::zeros(fan_in + 1, fan_out);
            {
                let gs = g.as_mut_slice();
                for r in 0..input.rows() {
                    let x = input.row(r);
                    let d = delta.row(r);
                    for (i, &xi) in x.iter().enumerate() {
                        if xi == 0.0 {
                            continue;
                        }
                        for (gv, dv) in gs[i * fan_out..(i + 1) * fan_out].iter_mut().zip(d) {
                            *gv += xi * dv;
                        }
                    }
                    for (gv, dv) in gs[fan_in * fan_out..].iter_mut().zip(d) {
                        *gv += dv;
                    }
                }
            }
            grads[l] = g;

            // dL/d(input) = delta · W[..fan_in]ᵀ
            let mut prev = Matrix::zeros(input.rows(), fan_in);
            for r in 0..input.rows() {
                let d = delta.row(r);
                let p = prev.row_mut(r);
                for (i, pv) in p.iter_mut().enumerate() {
                    let wi = w.row(i);
                    *pv = d.iter().zip(wi).map(|(a, b)| a * b).sum();
                }
            }
            if l > 0 {
                // ReLU derivative: the layer input is relu(z) and is positive iff z > 0
                for (pv, &xv) in prev.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    if xv <= 0.0 {
                        *pv = 0.0;
                    }
                }
            }
            delta = prev;
        }

        Ok(Backprop {
            weights: Gradients { layers: grads },
            input: delta,
        })
    }

    /// One plain gradient step: `W ← W ± lr · grad`.
    ///
    /// Nothing is modified if any gradient entry is non-finite.
    pub fn sgd_step(
        &mut self,
        grads: &Gradients,
        cfg: &SgdConfig,
        direction: Direction,
    ) -> Result<()> {
        if grads.layers.len() != self.layers.len() {
            return Err(Error::shape(
                "Mlp::sgd_step",
                self.layers.len(),
                grads.layers.len(),
            ));
        }
        for (l, (g, w)) in grads.layers.iter().zip(&self.layers).enumerate() {
            if g.shape() != w.shape() {
                return Err(Error::shape(
                    "Mlp::sgd_step",
                    format!("layer {l} {:?}", w.shape()),
                    format!("{:?}", g.shape()),
                ));
            }
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient { layer: l });
            }
        }
        let step = match direction {
            Direction::Ascend => cfg.learning_rate,
            Direction::Descend => -cfg.learning_rate,
        };
        for (w, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (wv, gv) in w.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *wv += step * gv;
            }
        }
        Ok(())
    }

    /// Mutable access for tests and tooling that perturb single weights.
    pub fn layers_mut(&mut self) -> &mut [Matrix] {
        &mut self.layers
    }

    fn check_input(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_dim {
            return Err(Error::shape(
                "Mlp::forward",
                format!("{} input columns", self.input_dim),
                batch.cols(),
            ));
        }
        Ok(())
    }

    fn check_cache(&self, cache: &ForwardCache) -> Result<()> {
        if cache.inputs.len() != HIDDEN_LAYERS + 1 {
            return Err(Error::State(format!(
                "cache holds {} layer inputs",
                cache.inputs.len()
            )));
        }
        for (l, (x, w)) in cache.inputs.iter().zip(&self.layers).enumerate() {
            if x.cols() + 1 != w.rows() {
                return Err(Error::State(format!(
                    "layer {l} expects {} inputs, cache has {}",
                    w.rows() - 1,
                    x.cols()
                )));
            }
        }
        Ok(())
    }

    fn apply_layer(&self, l: usize, x: &Matrix) -> Matrix {
        let w = &self.layers[l];
        let fan_in = w.rows() - 1;
        let fan_out = w.cols();
        let bias = w.row(fan_in);
        let ws = w.as_slice();
        let mut out = Matrix::zeros(x.rows(), fan_out);
        for r in 0..x.rows() {
            let o = out.row_mut(r);
            o.copy_from_slice(bias);
            for (i, &xi) in x.row(r).iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                for (ov, wv) in o.iter_mut().zip(&ws[i * fan_out..(i + 1) * fan_out]) {
                    *ov += xi * wv;
                }
            }
        }
        if l < HIDDEN_LAYERS {
            match self.hidden_activation {
                HiddenActivation::Relu => out.map_inplace(|v| v.max(0.0)),
            }
        } else if self.output_activation == OutputActivation::Sigmoid {
            out.map_inplace(sigmoid);
        }
        out
    }
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
