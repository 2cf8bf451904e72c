//! Coordinate MLPs with periodic activations.
//!
//! Hidden layers compute `act(W h + b)`; the output layer is affine. Two
//! activations are supported: SIREN's `sin(w0 z)` and FINER's
//! `sin(w0 (|z| + 1) z)`. Gradients are computed by a hand-written reverse
//! pass over the cached pre-activations.

mod adam;
mod checkpoint;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default frequency factor for sine and FINER hidden layers.
pub const DEFAULT_OMEGA0: f64 = 30.0;

/// Default half-width of the uniform first-layer bias draw for FINER.
pub const DEFAULT_FINER_BIAS_SCALE: f64 = 1.0;

/// Coordinates are 2-D.
pub const COORD_DIM: usize = 2;

/// Rows per block in [`loss_and_grad`]. Partial sums are combined in block order.
const BLOCK_ROWS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Activation {
    Sine { omega0: f64 },
    Finer { omega0: f64 },
}

impl Activation {
    pub fn omega0(&self) -> f64 {
        match *self {
            Activation::Sine { omega0 } | Activation::Finer { omega0 } => omega0,
        }
    }

    /// Stable numeric id used in checkpoints.
    pub fn id(&self) -> u32 {
        match self {
            Activation::Sine { .. } => 0,
            Activation::Finer { .. } => 1,
        }
    }

    pub fn from_id(id: u32, omega0: f64) -> Option<Self> {
        match id {
            0 => Some(Activation::Sine { omega0 }),
            1 => Some(Activation::Finer { omega0 }),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match *self {
            Activation::Sine { omega0 } => (omega0 * z).sin(),
            Activation::Finer { omega0 } => (omega0 * (z.abs() + 1.0) * z).sin(),
        }
    }

    /// `(apply(z), derivative(z))` with a single `sin_cos`.
    #[inline]
    pub fn apply_with_derivative(&self, z: f64) -> (f64, f64) {
        match *self {
            Activation::Sine { omega0 } => {
                let (s, c) = (omega0 * z).sin_cos();
                (s, omega0 * c)
            }
            Activation::Finer { omega0 } => {
                let (s, c) = (omega0 * (z.abs() + 1.0) * z).sin_cos();
                (s, omega0 * (2.0 * z.abs() + 1.0) * c)
            }
        }
    }

    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            Activation::Sine { omega0 } => omega0 * (omega0 * z).cos(),
            // d/dz [(|z| + 1) z] = 2|z| + 1
            Activation::Finer { omega0 } => {
                omega0 * (2.0 * z.abs() + 1.0) * (omega0 * (z.abs() + 1.0) * z).cos()
            }
        }
    }
}

/// One affine layer. `weight` is `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: Array2::zeros((out_dim, in_dim)),
            bias: Array1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub activation: Activation,
}

/// Gradients with the same layout as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim(), l.out_dim()))
                .collect(),
        }
    }

    fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight += &b.weight;
            a.bias += &b.bias;
        }
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl MlpParams {
    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, Layer::in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// Layer widths from input to output, e.g. `[2, 256, 256, 256, 3]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.in_dim()];
        dims.extend(self.layers.iter().map(Layer::out_dim));
        dims
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidConfig("network has no layers".into()));
        }
        for (k, l) in self.layers.iter().enumerate() {
            if l.bias.len() != l.out_dim() {
                return Err(Error::ShapeMismatch(format!(
                    "layer {k}: bias length {} vs {} outputs",
                    l.bias.len(),
                    l.out_dim()
                )));
            }
            if k + 1 < self.layers.len() && self.layers[k + 1].in_dim() != l.out_dim() {
                return Err(Error::ShapeMismatch(format!(
                    "layer {k} outputs {} but layer {} expects {}",
                    l.out_dim(),
                    k + 1,
                    self.layers[k + 1].in_dim()
                )));
            }
            if l.weight.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "layer {k} has non-finite parameters"
                )));
            }
        }
        Ok(())
    }

    /// Flat view of every parameter, weights before biases per layer.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
    }
}

/// SIREN-style initialization.
///
/// First-layer weights are uniform on `[-1/in, 1/in]`, later layers on
/// `[-sqrt(6/fan_in)/w0, sqrt(6/fan_in)/w0]`. Biases are zero, except that
/// FINER draws its first-layer bias uniformly from
/// `[-DEFAULT_FINER_BIAS_SCALE, DEFAULT_FINER_BIAS_SCALE]`.
pub fn init_mlp(
    hidden_layers: usize,
    width: usize,
    out_channels: usize,
    activation: Activation,
    seed: u64,
) -> Result<MlpParams> {
    init_mlp_with_bias_scale(
        hidden_layers,
        width,
        out_channels,
        activation,
        seed,
        DEFAULT_FINER_BIAS_SCALE,
    )
}

pub fn init_mlp_with_bias_scale(
    hidden_layers: usize,
    width: usize,
    out_channels: usize,
    activation: Activation,
    seed: u64,
    finer_bias_scale: f64,
) -> Result<MlpParams> {
    if hidden_layers == 0 || width == 0 {
        return Err(Error::InvalidConfig(format!(
            "need at least one hidden layer of positive width, got {hidden_layers} x {width}"
        )));
    }
    if out_channels != 1 && out_channels != 3 {
        return Err(Error::InvalidConfig(format!(
            "out_channels must be 1 or 3, got {out_channels}"
        )));
    }
    if !(activation.omega0() > 0.0 && activation.omega0().is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "omega0 must be positive, got {}",
            activation.omega0()
        )));
    }
    if !(finer_bias_scale >= 0.0 && finer_bias_scale.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "FINER bias scale must be non-negative, got {finer_bias_scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims = vec![COORD_DIM];
    dims.extend(std::iter::repeat_n(width, hidden_layers));
    dims.push(out_channels);

    let omega0 = activation.omega0();
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (k, pair) in dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = if k == 0 {
            1.0 / fan_in as f64
        } else {
            (6.0 / fan_in as f64).sqrt() / omega0
        };
        let weight = Array2::from_shape_simple_fn((fan_out, fan_in), || {
            rng.random_range(-bound..=bound)
        });
        let bias = match activation {
            Activation::Finer { .. } if k == 0 && finer_bias_scale > 0.0 => {
                Array1::from_shape_simple_fn(fan_out, || {
                    rng.random_range(-finer_bias_scale..=finer_bias_scale)
                })
            }
            _ => Array1::zeros(fan_out),
        };
        layers.push(Layer { weight, bias });
    }
    Ok(MlpParams { layers, activation })
}

/// Inputs, targets and per-channel loss weights for one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordBatch {
    /// `N x 2`, each row `(x, y)` in `[-1, 1]^2`.
    pub coords: Array2<f64>,
    /// `N x C`.
    pub targets: Array2<f64>,
    /// `N x C`; all ones for unweighted training.
    pub weights: Array2<f64>,
}

impl CoordBatch {
    pub fn new(coords: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        let weights = Array2::ones(targets.raw_dim());
        Self::with_weights(coords, targets, weights)
    }

    pub fn with_weights(
        coords: Array2<f64>,
        targets: Array2<f64>,
        weights: Array2<f64>,
    ) -> Result<Self> {
        if coords.ncols() != COORD_DIM {
            return Err(Error::ShapeMismatch(format!(
                "coordinates must have {COORD_DIM} columns, got {}",
                coords.ncols()
            )));
        }
        if coords.nrows() != targets.nrows() || targets.raw_dim() != weights.raw_dim() {
            return Err(Error::ShapeMismatch(format!(
                "coords {:?}, targets {:?}, weights {:?}",
                coords.dim(),
                targets.dim(),
                weights.dim()
            )));
        }
        if coords.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig(
                "coordinates must lie in [-1, 1]".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidConfig(
                "weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            coords,
            targets,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.targets.ncols()
    }
}

fn check_input(params: &MlpParams, coords: &ArrayView2<f64>) -> Result<()> {
    if params.layers.is_empty() {
        return Err(Error::InvalidConfig("network has no layers".into()));
    }
    if coords.ncols() != params.in_dim() {
        return Err(Error::ShapeMismatch(format!(
            "network expects {} inputs, got {}",
            params.in_dim(),
            coords.ncols()
        )));
    }
    Ok(())
}

#[inline]
fn affine(h: &ArrayView2<f64>, layer: &Layer) -> Array2<f64> {
    let mut z = h.dot(&layer.weight.t());
    z += &layer.bias;
    z
}

/// Network output for every coordinate row. Output is unclamped.
pub fn forward(params: &MlpParams, coords: ArrayView2<f64>) -> Result<Array2<f64>> {
    check_input(params, &coords)?;
    let act = params.activation;
    let (last, hidden) = params.layers.split_last().expect("checked non-empty");
    let mut h = coords.to_owned();
    for layer in hidden {
        h = affine(&h.view(), layer);
        h.mapv_inplace(|z| act.apply(z));
    }
    Ok(affine(&h.view(), last))
}

/// Loss and exact gradients over a whole batch.
///
/// Unweighted: `sum_i ||y_i - t_i||^2 / N`.
/// Weighted: `C * sum_{i,c} w_ic (y_ic - t_ic)^2 / sum_{i,c} w_ic`, which
/// equals the unweighted loss when every weight is 1 and is invariant to a
/// global rescaling of the weights.
pub fn loss_and_grad(
    params: &MlpParams,
    batch: &CoordBatch,
    weighted: bool,
) -> Result<(f64, Gradients)> {
    check_input(params, &batch.coords.view())?;
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    if batch.channels() != params.out_dim() {
        return Err(Error::ShapeMismatch(format!(
            "network produces {} channels, targets have {}",
            params.out_dim(),
            batch.channels()
        )));
    }
    let scale = if weighted {
        let total: f64 = batch.weights.sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights(total));
        }
        batch.channels() as f64 / total
    } else {
        1.0 / batch.len() as f64
    };

    let n = batch.len();
    let blocks: Vec<(usize, usize)> = (0..n)
        .step_by(BLOCK_ROWS)
        .map(|start| (start, (start + BLOCK_ROWS).min(n)))
        .collect();
    let run = |&(a, b): &(usize, usize)| block_loss_and_grad(params, batch, a..b, weighted, scale);
    // On a single worker, nested parallelism only interleaves concurrent fits.
    let partials: Vec<(f64, Gradients)> = if rayon::current_num_threads() > 1 {
        blocks.par_iter().map(run).collect()
    } else {
        blocks.iter().map(run).collect()
    };

    let mut iter = partials.into_iter();
    let (mut sum, mut grads) = iter.next().expect("batch is non-empty");
    for (s, g) in iter {
        sum += s;
        grads.accumulate(&g);
    }
    Ok((sum * scale, grads))
}

/// Unscaled squared-error sum of one row block, and the gradient of the
/// scaled loss restricted to that block.
fn block_loss_and_grad(
    params: &MlpParams,
    batch: &CoordBatch,
    rows: std::ops::Range<usize>,
    weighted: bool,
    scale: f64,
) -> (f64, Gradients) {
    let act = params.activation;
    let coords = batch.coords.slice(s![rows.clone(), ..]);
    let targets = batch.targets.slice(s![rows.clone(), ..]);
    let weights = batch.weights.slice(s![rows, ..]);
    let (last, hidden) = params.layers.split_last().expect("checked non-empty");

    // inputs[k] feeds layer k; slopes[k] is the activation derivative at
    // layer k's pre-activation.
    let mut inputs: Vec<Array2<f64>> = Vec::with_capacity(params.layers.len());
    let mut slopes: Vec<Array2<f64>> = Vec::with_capacity(hidden.len());
    inputs.push(coords.to_owned());
    for layer in hidden {
        let mut z = affine(&inputs.last().unwrap().view(), layer);
        let mut h = Array2::zeros(z.raw_dim());
        Zip::from(&mut h).and(&mut z).for_each(|h, z| {
            let (a, d) = act.apply_with_derivative(*z);
            *h = a;
            *z = d;
        });
        inputs.push(h);
        slopes.push(z);
    }
    let mut out = affine(&inputs.last().unwrap().view(), last);

    // Residual, then upstream gradient in place.
    out -= &targets;
    let mut sum = 0.0;
    if weighted {
        Zip::from(&mut out).and(&weights).for_each(|r, &w| {
            sum += w * *r * *r;
            *r *= 2.0 * scale * w;
        });
    } else {
        out.map_inplace(|r| {
            sum += *r * *r;
            *r *= 2.0 * scale;
        });
    }

    let mut grads = Vec::with_capacity(params.layers.len());
    let mut upstream = out;
    for k in (0..params.layers.len()).rev() {
        let layer = &params.layers[k];
        if k + 1 < params.layers.len() {
            upstream *= &slopes[k];
        }
        let weight = upstream.t().dot(&inputs[k]);
        let bias = upstream.sum_axis(Axis(0));
        if k > 0 {
            upstream = upstream.dot(&layer.weight);
        }
        grads.push(Layer { weight, bias });
    }
    grads.reverse();
    (sum, Gradients { layers: grads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sine() -> Activation {
        Activation::Sine { omega0: 30.0 }
    }

    fn random_batch(n: usize, c: usize, seed: u64) -> CoordBatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = Array2::from_shape_simple_fn((n, 2), || rng.random_range(-1.0..=1.0));
        let targets = Array2::from_shape_simple_fn((n, c), || rng.random::<f64>());
        let weights = Array2::from_shape_simple_fn((n, c), || rng.random_range(0.01..1.0));
        CoordBatch::with_weights(coords, targets, weights).unwrap()
    }

    #[test]
    fn init_shapes_for_reference_architecture() {
        let p = init_mlp(3, 256, 3, sine(), 0).unwrap();
        let shapes: Vec<_> = p.layers.iter().map(|l| l.weight.dim()).collect();
        assert_eq!(shapes, vec![(256, 2), (256, 256), (256, 256), (3, 256)]);
        assert_eq!(p.dims(), vec![2, 256, 256, 256, 3]);
        assert!(p.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        assert!(p.layers[0].weight.iter().all(|w| w.abs() <= 0.5));
        let bound = (6.0f64 / 256.0).sqrt() / 30.0;
        assert!(p.layers[1].weight.iter().all(|w| w.abs() <= bound));
        p.validate().unwrap();
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_mlp(2, 16, 1, sine(), 42).unwrap();
        let b = init_mlp(2, 16, 1, sine(), 42).unwrap();
        let c = init_mlp(2, 16, 1, sine(), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn finer_first_bias_is_drawn() {
        let p = init_mlp(2, 32, 3, Activation::Finer { omega0: 30.0 }, 1).unwrap();
        assert!(p.layers[0].bias.iter().any(|&b| b != 0.0));
        assert!(p.layers[0].bias.iter().all(|b| b.abs() <= 1.0));
        assert!(p.layers[1..].iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn init_rejects_bad_arguments() {
        assert!(init_mlp(0, 8, 1, sine(), 0).is_err());
        assert!(init_mlp(1, 0, 1, sine(), 0).is_err());
        assert!(init_mlp(1, 8, 2, sine(), 0).is_err());
    }

    #[test]
    fn fused_derivative_matches_separate() {
        for act in [sine(), Activation::Finer { omega0: 30.0 }] {
            for z in [-1.3, -0.2, 0.0, 0.05, 0.9] {
                let (a, d) = act.apply_with_derivative(z);
                assert!((a - act.apply(z)).abs() < 1e-15);
                assert!((d - act.derivative(z)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut p = init_mlp(2, 8, 3, sine(), 0).unwrap();
        for l in &mut p.layers {
            l.weight.fill(0.0);
            l.bias.fill(0.0);
        }
        let out = forward(&p, random_batch(5, 3, 0).coords.view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_unit_scalar_chain() {
        let p = MlpParams {
            layers: vec![
                Layer {
                    weight: array![[0.2, -0.1]],
                    bias: array![0.05],
                },
                Layer {
                    weight: array![[0.7]],
                    bias: array![0.1],
                },
            ],
            activation: sine(),
        };
        let x = 0.3;
        let y = -0.4;
        let expected = 0.7 * (30.0f64 * (0.2 * x - 0.1 * y + 0.05)).sin() + 0.1;
        let out = forward(&p, array![[x, y]].view()).unwrap();
        assert!((out[[0, 0]] - expected).abs() < 1e-15);

        let finer = MlpParams {
            activation: Activation::Finer { omega0: 30.0 },
            ..p
        };
        let z: f64 = 0.2 * x - 0.1 * y + 0.05;
        let expected = 0.7 * (30.0 * (z.abs() + 1.0) * z).sin() + 0.1;
        let out = forward(&finer, array![[x, y]].view()).unwrap();
        assert!((out[[0, 0]] - expected).abs() < 1e-15);
    }

    #[test]
    fn batched_equals_rowwise() {
        let p = init_mlp(2, 12, 3, sine(), 5).unwrap();
        let batch = random_batch(9, 3, 1);
        let all = forward(&p, batch.coords.view()).unwrap();
        for i in 0..9 {
            let one = forward(&p, batch.coords.slice(s![i..i + 1, ..])).unwrap();
            for c in 0..3 {
                assert!((one[[0, c]] - all[[i, c]]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn forward_dimension_mismatch() {
        let p = init_mlp(1, 4, 1, sine(), 0).unwrap();
        assert!(forward(&p, Array2::zeros((3, 3)).view()).is_err());
    }

    #[test]
    fn perfect_fit_has_zero_loss_and_gradient() {
        let p = init_mlp(2, 6, 3, sine(), 3).unwrap();
        let b = random_batch(7, 3, 2);
        let out = forward(&p, b.coords.view()).unwrap();
        let exact = CoordBatch::with_weights(b.coords.clone(), out, b.weights.clone()).unwrap();
        for weighted in [false, true] {
            let (loss, g) = loss_and_grad(&p, &exact, weighted).unwrap();
            assert_eq!(loss, 0.0);
            assert_eq!(g.max_abs(), 0.0);
        }
    }

    #[test]
    fn unit_weights_reduce_to_mse() {
        let p = init_mlp(2, 6, 3, sine(), 3).unwrap();
        let b = random_batch(11, 3, 4);
        let ones = CoordBatch::new(b.coords.clone(), b.targets.clone()).unwrap();
        let (lu, gu) = loss_and_grad(&p, &ones, false).unwrap();
        let (lw, gw) = loss_and_grad(&p, &ones, true).unwrap();
        assert!((lu - lw).abs() <= 1e-14);
        for (a, b) in gu.layers.iter().zip(&gw.layers) {
            for (x, y) in a.weight.iter().zip(b.weight.iter()) {
                assert!((x - y).abs() <= 1e-14);
            }
        }
        // Direct definition: mean over pixels of squared norms.
        let out = forward(&p, b.coords.view()).unwrap();
        let direct = (&out - &b.targets).mapv(|r| r * r).sum() / 11.0;
        assert!((lu - direct).abs() < 1e-14);
    }

    #[test]
    fn zero_weight_sum_is_an_error() {
        let p = init_mlp(1, 4, 1, sine(), 0).unwrap();
        let b = random_batch(3, 1, 0);
        let zero = CoordBatch::with_weights(
            b.coords.clone(),
            b.targets.clone(),
            Array2::zeros((3, 1)),
        )
        .unwrap();
        assert!(matches!(
            loss_and_grad(&p, &zero, true),
            Err(Error::DegenerateWeights(_))
        ));
        assert!(loss_and_grad(&p, &zero, false).is_ok());
    }

    #[test]
    fn blocked_reduction_matches_single_block() {
        // More rows than one block: compare against a one-row-at-a-time sum.
        let p = init_mlp(2, 5, 1, sine(), 8).unwrap();
        let b = random_batch(BLOCK_ROWS + 37, 1, 9);
        let (loss, grads) = loss_and_grad(&p, &b, true).unwrap();
        let scale = 1.0 / b.weights.sum();
        let mut sum = 0.0;
        let mut acc = Gradients::zeros_like(&p);
        for i in 0..b.len() {
            let (s, g) = block_loss_and_grad(&p, &b, i..i + 1, true, scale);
            sum += s;
            acc.accumulate(&g);
        }
        assert!((loss - sum * scale).abs() < 1e-12);
        for (a, b) in grads.layers.iter().zip(&acc.layers) {
            for (x, y) in a.weight.iter().zip(b.weight.iter()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn batch_validation() {
        let coords = array![[0.0, 2.0]];
        assert!(CoordBatch::new(coords, array![[0.5]]).is_err());
        assert!(CoordBatch::new(array![[0.0, 0.0]], array![[0.5], [0.5]]).is_err());
        assert!(CoordBatch::with_weights(array![[0.0, 0.0]], array![[0.5]], array![[-1.0]]).is_err());
    }
}
