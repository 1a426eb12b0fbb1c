//! CGAN training of the toy denoiser with a robustness penalty.
//!
//! Both networks are 7 fully-connected layers with ReLU after every layer
//! except the last; hidden width 16. The generator maps a measurement y to a
//! reconstruction, the discriminator maps a pair (x, y) to a logit and is
//! trained with the non-saturating loss plus an R1 gradient penalty on real
//! pairs. The generator objective adds `lambda` times the robustness loss
//! `E || f(Y) - f(Y + Z) ||^2` with `Z ~ N(0, sigma_z2)`.
//!
//! Everything is implemented with explicit batched forward/backward passes
//! and a hand-rolled Adam so training is a pure function of (model, config);
//! no global state, no hidden RNG.

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::linalg::Matrix;
use crate::model::{sample_joint, GaussianToyModel};
use crate::rng::{substream_seed, SplitMix64};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};

/// Width of every hidden layer.
pub const HIDDEN_WIDTH: usize = 16;
/// Number of affine layers in each network.
pub const AFFINE_LAYERS: usize = 7;

static NET_COUNTER: AtomicU64 = AtomicU64::new(1);

/// Architecture descriptor: `input_dim -> 16 -> ... -> 16 -> output_dim`
/// with [`AFFINE_LAYERS`] affine layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArch {
    pub input_dim: usize,
    pub output_dim: usize,
}

impl MlpArch {
    /// Generator: scalar measurement in, scalar reconstruction out.
    pub fn generator() -> Self {
        MlpArch { input_dim: 1, output_dim: 1 }
    }

    /// Discriminator: a pair (x, y) in, one logit out.
    pub fn discriminator() -> Self {
        MlpArch { input_dim: 2, output_dim: 1 }
    }

    /// The chain of (fan_in, fan_out) for the affine layers.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(AFFINE_LAYERS);
        dims.push((self.input_dim, HIDDEN_WIDTH));
        for _ in 0..AFFINE_LAYERS - 2 {
            dims.push((HIDDEN_WIDTH, HIDDEN_WIDTH));
        }
        dims.push((HIDDEN_WIDTH, self.output_dim));
        dims
    }
}

/// One affine layer: weight is `fan_in x fan_out`, bias has `fan_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Parameters of one MLP, plus bookkeeping that ties backward passes to the
/// forward cache they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub arch: MlpArch,
    pub layers: Vec<LayerParams>,
    #[serde(skip, default = "fresh_net_id")]
    net_id: u64,
    #[serde(skip, default)]
    revision: u64,
}

fn fresh_net_id() -> u64 {
    NET_COUNTER.fetch_add(1, Ordering::Relaxed)
}

impl MlpParams {
    pub fn input_dim(&self) -> usize {
        self.arch.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.arch.output_dim
    }

    fn bump_revision(&mut self) {
        self.revision += 1;
    }
}

/// Forward-pass cache: the input of every affine layer plus the final
/// output, all batched (rows = samples).
#[derive(Debug, Clone)]
pub struct ForwardCache {
    net_id: u64,
    revision: u64,
    /// `activations[l]` is the input to layer `l`; `activations[7]` is the
    /// network output.
    activations: Vec<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("cache holds the output")
    }

    /// The input of affine layer `l` (`l = 0` is the network input; for
    /// hidden layers this is the ReLU output of the previous layer).
    pub fn activations(&self, l: usize) -> &Matrix {
        &self.activations[l]
    }
}

/// Per-layer gradients mirroring [`MlpParams`], plus the gradient with
/// respect to the batched input.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub layers: Vec<LayerParams>,
    pub input_grad: Matrix,
}

impl MlpGradients {
    pub fn zeros_like(params: &MlpParams, batch: usize) -> Self {
        MlpGradients {
            layers: params
                .layers
                .iter()
                .map(|l| LayerParams {
                    weight: Matrix::zeros(l.weight.rows(), l.weight.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
            input_grad: Matrix::zeros(batch, params.arch.input_dim),
        }
    }

    /// `self += other * scale` on the parameter gradients.
    pub fn accumulate(&mut self, other: &MlpGradients, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weight.data_mut().iter_mut().zip(b.weight.data()) {
                *x += scale * y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += scale * y;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for l in &self.layers {
            for &x in l.weight.data() {
                m = m.max(x.abs());
            }
            for &x in &l.bias {
                m = m.max(x.abs());
            }
        }
        m
    }
}

/// He-style initialization: weights ~ N(0, 2 / fan_in), zero biases,
/// deterministic per seed.
pub fn init_mlp(arch: MlpArch, seed: u64) -> MlpParams {
    let mut rng = SplitMix64::new(seed);
    let layers = arch
        .layer_dims()
        .iter()
        .map(|&(fan_in, fan_out)| {
            let std = (2.0 / fan_in as f64).sqrt();
            let mut weight = Matrix::zeros(fan_in, fan_out);
            for i in 0..fan_in {
                for j in 0..fan_out {
                    weight.set(i, j, rng.next_gaussian(0.0, std));
                }
            }
            LayerParams {
                weight,
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    MlpParams {
        arch,
        layers,
        net_id: fresh_net_id(),
        revision: 0,
    }
}

/// Batched forward pass. `input` is `batch x input_dim`; ReLU after every
/// layer except the last.
pub fn mlp_forward(params: &MlpParams, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
    if input.cols() != params.arch.input_dim {
        return Err(Error::invalid(
            "input",
            format!("expected dim {}, got {}", params.arch.input_dim, input.cols()),
        ));
    }
    let batch = input.rows();
    let mut activations = Vec::with_capacity(AFFINE_LAYERS + 1);
    activations.push(input.clone());
    for (l, layer) in params.layers.iter().enumerate() {
        let is_last = l + 1 == params.layers.len();
        let a = activations.last().expect("nonempty");
        let fan_out = layer.weight.cols();
        let mut z = Matrix::zeros(batch, fan_out);
        for b in 0..batch {
            let arow = a.row(b);
            let zrow = z.row_mut(b);
            zrow.copy_from_slice(&layer.bias);
            for (k, &ak) in arow.iter().enumerate() {
                if ak == 0.0 {
                    continue;
                }
                let wrow = layer.weight.row(k);
                for j in 0..fan_out {
                    zrow[j] += ak * wrow[j];
                }
            }
        }
        if !is_last {
            for v in z.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        activations.push(z);
    }
    let output = activations.last().expect("output").clone();
    Ok((
        output,
        ForwardCache {
            net_id: params.net_id,
            revision: params.revision,
            activations,
        },
    ))
}

/// Exact reverse-mode gradients of `sum(output * grad_out)` with respect to
/// every parameter and the input.
pub fn mlp_backward(params: &MlpParams, cache: &ForwardCache, grad_out: &Matrix) -> Result<MlpGradients> {
    if cache.net_id != params.net_id || cache.revision != params.revision {
        return Err(Error::ContractViolation(
            "forward cache does not match the current parameters".into(),
        ));
    }
    let batch = cache.activations[0].rows();
    if grad_out.rows() != batch || grad_out.cols() != params.arch.output_dim {
        return Err(Error::invalid("grad_out", "shape must match the forward output"));
    }

    let mut grads = MlpGradients::zeros_like(params, batch);
    let mut delta = grad_out.clone();
    for l in (0..params.layers.len()).rev() {
        let a = &cache.activations[l];
        let layer = &params.layers[l];
        let fan_in = layer.weight.rows();
        let fan_out = layer.weight.cols();

        let gl = &mut grads.layers[l];
        for b in 0..batch {
            let arow = a.row(b);
            let drow = delta.row(b);
            for k in 0..fan_in {
                let ak = arow[k];
                if ak == 0.0 {
                    continue;
                }
                let gw = gl.weight.row_mut(k);
                for j in 0..fan_out {
                    gw[j] += ak * drow[j];
                }
            }
            for j in 0..fan_out {
                gl.bias[j] += drow[j];
            }
        }

        // delta for the previous layer: (delta . W^T), masked by ReLU.
        let mut prev = Matrix::zeros(batch, fan_in);
        for b in 0..batch {
            let drow = delta.row(b);
            let prow = prev.row_mut(b);
            for k in 0..fan_in {
                let wrow = layer.weight.row(k);
                let mut acc = 0.0;
                for j in 0..fan_out {
                    acc += drow[j] * wrow[j];
                }
                prow[k] = acc;
            }
        }
        if l > 0 {
            // The cached input of layer l is relu(z_{l-1}); the mask is its
            // positivity (relu' = 0 at exactly 0).
            for b in 0..batch {
                let arow = a.row(b);
                let prow = prev.row_mut(b);
                for k in 0..fan_in {
                    if arow[k] <= 0.0 {
                        prow[k] = 0.0;
                    }
                }
            }
        }
        delta = prev;
    }
    grads.input_grad = delta;
    Ok(grads)
}

fn softplus(x: f64) -> f64 {
    // log(1 + e^x), stable in both tails.
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Losses and gradients of one adversarial step on a batch of real pairs.
#[derive(Debug)]
pub struct GanStepEval {
    /// Non-saturating discriminator loss
    /// `-mean log s(D(x,y)) - mean log(1 - s(D(G(y),y)))`.
    pub d_loss: f64,
    /// Non-saturating generator loss `-mean log s(D(G(y),y))`.
    pub g_loss: f64,
    /// Gradients of `d_loss` with respect to the discriminator.
    pub d_grads: MlpGradients,
    /// Gradients of `g_loss` with respect to the generator.
    pub g_grads: MlpGradients,
}

/// Evaluates the conditional GAN losses on one batch.
///
/// The discriminator sees `(x, y)` as real and `(G(y), y)` as fake; the
/// generator gradient flows through the first coordinate of the fake pair.
pub fn gan_step_losses(
    discriminator: &MlpParams,
    generator: &MlpParams,
    batch: &[(f64, f64)],
) -> Result<GanStepEval> {
    let (d_loss, d_grads) = discriminator_losses(discriminator, generator, batch)?;
    let (g_loss, g_grads) = generator_adversarial_losses(discriminator, generator, batch)?;
    Ok(GanStepEval {
        d_loss,
        g_loss,
        d_grads,
        g_grads,
    })
}

/// `d_loss` and its discriminator gradients.
fn discriminator_losses(
    discriminator: &MlpParams,
    generator: &MlpParams,
    batch: &[(f64, f64)],
) -> Result<(f64, MlpGradients)> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::invalid("batch", "must be nonempty"));
    }
    let nf = n as f64;

    let ys = Matrix::from_vec(n, 1, batch.iter().map(|p| p.1).collect());
    let (fake, _gcache) = mlp_forward(generator, &ys)?;

    let mut real_pairs = Matrix::zeros(n, 2);
    let mut fake_pairs = Matrix::zeros(n, 2);
    for (b, &(x, y)) in batch.iter().enumerate() {
        real_pairs.set(b, 0, x);
        real_pairs.set(b, 1, y);
        fake_pairs.set(b, 0, fake.get(b, 0));
        fake_pairs.set(b, 1, y);
    }

    let (real_logits, real_cache) = mlp_forward(discriminator, &real_pairs)?;
    let (fake_logits, fake_cache) = mlp_forward(discriminator, &fake_pairs)?;

    let mut d_loss = 0.0;
    let mut grad_real = Matrix::zeros(n, 1);
    let mut grad_fake = Matrix::zeros(n, 1);
    for b in 0..n {
        let lr = real_logits.get(b, 0);
        let lf = fake_logits.get(b, 0);
        d_loss += softplus(-lr) + softplus(lf);
        grad_real.set(b, 0, -sigmoid(-lr) / nf);
        grad_fake.set(b, 0, sigmoid(lf) / nf);
    }
    d_loss /= nf;

    let mut d_grads = mlp_backward(discriminator, &real_cache, &grad_real)?;
    let fake_part = mlp_backward(discriminator, &fake_cache, &grad_fake)?;
    d_grads.accumulate(&fake_part, 1.0);
    Ok((d_loss, d_grads))
}

/// `g_loss` and its generator gradients (through the discriminator input).
fn generator_adversarial_losses(
    discriminator: &MlpParams,
    generator: &MlpParams,
    batch: &[(f64, f64)],
) -> Result<(f64, MlpGradients)> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::invalid("batch", "must be nonempty"));
    }
    let nf = n as f64;

    let ys = Matrix::from_vec(n, 1, batch.iter().map(|p| p.1).collect());
    let (fake, gcache) = mlp_forward(generator, &ys)?;

    let mut fake_pairs = Matrix::zeros(n, 2);
    for b in 0..n {
        fake_pairs.set(b, 0, fake.get(b, 0));
        fake_pairs.set(b, 1, ys.get(b, 0));
    }
    let (fake_logits, fake_cache) = mlp_forward(discriminator, &fake_pairs)?;

    let mut g_loss = 0.0;
    let mut grad_logits = Matrix::zeros(n, 1);
    for b in 0..n {
        let lf = fake_logits.get(b, 0);
        g_loss += softplus(-lf);
        grad_logits.set(b, 0, -sigmoid(-lf) / nf);
    }
    g_loss /= nf;

    let through_d = mlp_backward(discriminator, &fake_cache, &grad_logits)?;
    // Only the x-hat slot of the pair feeds back into the generator.
    let mut grad_fake = Matrix::zeros(n, 1);
    for b in 0..n {
        grad_fake.set(b, 0, through_d.input_grad.get(b, 0));
    }
    let g_grads = mlp_backward(generator, &gcache, &grad_fake)?;
    Ok((g_loss, g_grads))
}

/// R1 gradient penalty on real pairs, with the input gradient of the
/// discriminator approximated by a central finite-difference stencil over
/// its 2-D input (exact to O(h^2), four extra forwards per batch).
///
/// Returns `coeff * mean_i sum_k g_ik^2` and its parameter gradients,
/// obtained by backpropagating through every stencil forward.
pub fn r1_penalty(
    discriminator: &MlpParams,
    real_batch: &[(f64, f64)],
    h: f64,
    coeff: f64,
) -> Result<(f64, MlpGradients)> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", "finite-difference step must be positive"));
    }
    let n = real_batch.len();
    if n == 0 {
        return Err(Error::invalid("real_batch", "must be nonempty"));
    }
    let nf = n as f64;
    let dim = 2usize;

    // Forward the four shifted batches, keeping caches for the backward.
    let mut outputs = Vec::with_capacity(dim * 2);
    for k in 0..dim {
        for sign in [1.0f64, -1.0] {
            let mut shifted = Matrix::zeros(n, dim);
            for (b, &(x, y)) in real_batch.iter().enumerate() {
                shifted.set(b, 0, x);
                shifted.set(b, 1, y);
                let v = shifted.get(b, k) + sign * h;
                shifted.set(b, k, v);
            }
            outputs.push(mlp_forward(discriminator, &shifted)?);
        }
    }

    let mut penalty = 0.0;
    let mut fd = Matrix::zeros(n, dim);
    for k in 0..dim {
        let plus = &outputs[2 * k].0;
        let minus = &outputs[2 * k + 1].0;
        for b in 0..n {
            let g = (plus.get(b, 0) - minus.get(b, 0)) / (2.0 * h);
            fd.set(b, k, g);
            penalty += g * g;
        }
    }
    penalty = coeff * penalty / nf;

    let mut grads = MlpGradients::zeros_like(discriminator, n);
    for k in 0..dim {
        for (idx, sign) in [(2 * k, 1.0f64), (2 * k + 1, -1.0)] {
            let mut gout = Matrix::zeros(n, 1);
            for b in 0..n {
                gout.set(b, 0, sign * coeff * fd.get(b, k) / (h * nf));
            }
            let part = mlp_backward(discriminator, &outputs[idx].1, &gout)?;
            grads.accumulate(&part, 1.0);
        }
    }
    Ok((penalty, grads))
}

/// Robustness loss `mean_i || G(y_i) - G(y_i + z_i) ||^2` with fresh
/// perturbations `z_i ~ N(0, sigma_z2)` from the provided stream; gradients
/// flow through both evaluations.
pub fn robustness_loss(
    generator: &MlpParams,
    y_batch: &[f64],
    sigma_z2: f64,
    stream: &mut SplitMix64,
) -> Result<(f64, MlpGradients)> {
    if !(sigma_z2 > 0.0) {
        return Err(Error::invalid("sigma_z2", "perturbation variance must be positive"));
    }
    let n = y_batch.len();
    if n == 0 {
        return Err(Error::invalid("y_batch", "must be nonempty"));
    }
    let nf = n as f64;
    let sigma_z = sigma_z2.sqrt();

    let clean = Matrix::from_vec(n, 1, y_batch.to_vec());
    let mut perturbed = clean.clone();
    for b in 0..n {
        let z = stream.next_gaussian(0.0, sigma_z);
        perturbed.set(b, 0, perturbed.get(b, 0) + z);
    }

    let (out_clean, cache_clean) = mlp_forward(generator, &clean)?;
    let (out_pert, cache_pert) = mlp_forward(generator, &perturbed)?;

    let mut value = 0.0;
    let mut gdiff = Matrix::zeros(n, 1);
    for b in 0..n {
        let diff = out_clean.get(b, 0) - out_pert.get(b, 0);
        value += diff * diff;
        gdiff.set(b, 0, 2.0 * diff / nf);
    }
    value /= nf;

    let mut grads = mlp_backward(generator, &cache_clean, &gdiff)?;
    let mut neg = gdiff;
    for v in neg.data_mut() {
        *v = -*v;
    }
    let pert_part = mlp_backward(generator, &cache_pert, &neg)?;
    grads.accumulate(&pert_part, 1.0);
    Ok((value, grads))
}

/// Adam state: first/second moments mirroring the parameters, plus the step
/// counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<LayerParams>,
    v: Vec<LayerParams>,
    step: u64,
    beta1: f64,
    beta2: f64,
}

const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(params: &MlpParams, beta1: f64, beta2: f64) -> Self {
        let zeros = || {
            params
                .layers
                .iter()
                .map(|l| LayerParams {
                    weight: Matrix::zeros(l.weight.rows(), l.weight.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect::<Vec<_>>()
        };
        AdamState {
            m: zeros(),
            v: zeros(),
            step: 0,
            beta1,
            beta2,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update with bias correction.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut MlpParams,
    grads: &MlpGradients,
    lr: f64,
) -> Result<()> {
    if grads.layers.len() != params.layers.len() {
        return Err(Error::invalid("grads", "layer count mismatch"));
    }
    state.step += 1;
    let b1 = state.beta1;
    let b2 = state.beta2;
    let bc1 = 1.0 - b1.powi(state.step as i32);
    let bc2 = 1.0 - b2.powi(state.step as i32);

    for (l, grad) in grads.layers.iter().enumerate() {
        if grad.weight.rows() != params.layers[l].weight.rows()
            || grad.weight.cols() != params.layers[l].weight.cols()
        {
            return Err(Error::invalid("grads", format!("layer {l} shape mismatch")));
        }
        let pw = params.layers[l].weight.data_mut();
        let mw = state.m[l].weight.data_mut();
        let vw = state.v[l].weight.data_mut();
        for i in 0..pw.len() {
            let g = grad.weight.data()[i];
            mw[i] = b1 * mw[i] + (1.0 - b1) * g;
            vw[i] = b2 * vw[i] + (1.0 - b2) * g * g;
            pw[i] -= lr * (mw[i] / bc1) / ((vw[i] / bc2).sqrt() + ADAM_EPS);
        }
        let pb = &mut params.layers[l].bias;
        let mb = &mut state.m[l].bias;
        let vb = &mut state.v[l].bias;
        for i in 0..pb.len() {
            let g = grad.bias[i];
            mb[i] = b1 * mb[i] + (1.0 - b1) * g;
            vb[i] = b2 * vb[i] + (1.0 - b2) * g * g;
            pb[i] -= lr * (mb[i] / bc1) / ((vb[i] / bc2).sqrt() + ADAM_EPS);
        }
    }
    params.bump_revision();
    Ok(())
}

/// Training configuration.
///
/// Defaults are the desk-scale recipe (20k steps over 10k samples with the
/// learning-rate halving schedule scaled to match); `TrainConfig::paper()`
/// restores the full published recipe (100k steps over 100k samples).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Robustness coefficient (lambda >= 0).
    pub lambda: f64,
    /// Variance of the robustness perturbation Z.
    pub sigma_z2: f64,
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub r1_coeff: f64,
    /// Finite-difference step of the R1 stencil.
    pub r1_fd_step: f64,
    /// First step at which the learning rate is halved.
    pub lr_halve_start: usize,
    /// Halving period after the start.
    pub lr_halve_period: usize,
    /// Training-set size.
    pub n_train: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 0.0,
            sigma_z2: 0.2,
            steps: 20_000,
            batch: 128,
            lr: 1e-4,
            adam_beta1: 0.5,
            adam_beta2: 0.9,
            r1_coeff: 1.0,
            r1_fd_step: 1e-4,
            lr_halve_start: 10_000,
            lr_halve_period: 1_000,
            n_train: 10_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// The published full-scale recipe.
    pub fn paper() -> Self {
        TrainConfig {
            steps: 100_000,
            lr_halve_start: 50_000,
            lr_halve_period: 5_000,
            n_train: 100_000,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::invalid("lambda", "must be nonnegative"));
        }
        if !(self.sigma_z2 > 0.0) {
            return Err(Error::invalid("sigma_z2", "must be positive"));
        }
        if self.steps == 0 || self.batch == 0 || self.n_train == 0 {
            return Err(Error::invalid("steps/batch/n_train", "must be positive"));
        }
        if !(self.lr > 0.0) || !(self.r1_fd_step > 0.0) {
            return Err(Error::invalid("lr/r1_fd_step", "must be positive"));
        }
        if self.lr_halve_period == 0 {
            return Err(Error::invalid("lr_halve_period", "must be positive"));
        }
        Ok(())
    }

    /// Learning rate at a given step:
    /// `lr * 0.5^(floor((step - start) / period) + 1)` once `step >= start`.
    pub fn lr_at(&self, step: usize) -> f64 {
        if step < self.lr_halve_start {
            self.lr
        } else {
            let halvings = (step - self.lr_halve_start) / self.lr_halve_period + 1;
            self.lr * 0.5f64.powi(halvings as i32)
        }
    }
}

/// Which network a history record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Discriminator,
    Generator,
}

/// One half-step of the alternating loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub phase: Phase,
    /// d_loss or g_loss depending on the phase.
    pub loss: f64,
    /// R1 penalty (discriminator phase only).
    pub r1: Option<f64>,
    /// Robustness loss (generator phase only).
    pub robustness: Option<f64>,
    pub lr: f64,
}

/// Serializes a history to CSV, one row per paired step:
/// `step,d_loss,g_loss,r1,lr,robustness_loss`.
pub fn history_to_csv(history: &[StepRecord]) -> String {
    let mut out = String::from("step,d_loss,g_loss,r1,lr,robustness_loss\n");
    for pair in history.chunks(2) {
        if pair.len() < 2 {
            break;
        }
        let (d, g) = (&pair[0], &pair[1]);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d.step,
            d.loss,
            g.loss,
            d.r1.unwrap_or(f64::NAN),
            d.lr,
            g.robustness.unwrap_or(f64::NAN),
        ));
    }
    out
}

/// Trains the denoiser: one discriminator step then one generator step per
/// iteration. Returns the final generator wrapped as a deterministic
/// estimator plus the full per-half-step loss history (length `2 * steps`).
pub fn train_denoiser(
    model: &GaussianToyModel,
    cfg: &TrainConfig,
) -> Result<(Estimator, Vec<StepRecord>)> {
    cfg.validate()?;

    let data = sample_joint(model, cfg.n_train, substream_seed(cfg.seed, "train/data"))?;
    let mut generator = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut discriminator = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    let mut g_adam = AdamState::new(&generator, cfg.adam_beta1, cfg.adam_beta2);
    let mut d_adam = AdamState::new(&discriminator, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut z_stream = SplitMix64::new(substream_seed(cfg.seed, "train/z"));

    let mut history = Vec::with_capacity(2 * cfg.steps);
    let mut batch = vec![(0.0, 0.0); cfg.batch];

    for step in 0..cfg.steps {
        let lr = cfg.lr_at(step);
        for slot in batch.iter_mut() {
            let idx = batch_stream.next_below(cfg.n_train as u64) as usize;
            *slot = data.pairs[idx];
        }

        // Discriminator phase.
        let (d_loss, mut d_grads) = discriminator_losses(&discriminator, &generator, &batch)?;
        let (r1_value, r1_grads) = r1_penalty(&discriminator, &batch, cfg.r1_fd_step, cfg.r1_coeff)?;
        if !d_loss.is_finite() || !r1_value.is_finite() {
            return Err(Error::TrainingDiverged {
                step,
                which: "discriminator".into(),
            });
        }
        d_grads.accumulate(&r1_grads, 1.0);
        adam_step(&mut d_adam, &mut discriminator, &d_grads, lr)?;
        history.push(StepRecord {
            step,
            phase: Phase::Discriminator,
            loss: d_loss,
            r1: Some(r1_value),
            robustness: None,
            lr,
        });

        // Generator phase (against the updated discriminator).
        let (g_loss, mut g_grads) = generator_adversarial_losses(&discriminator, &generator, &batch)?;
        let mut rob_value = 0.0;
        if cfg.lambda > 0.0 {
            let ys: Vec<f64> = batch.iter().map(|p| p.1).collect();
            let (value, rob_grads) = robustness_loss(&generator, &ys, cfg.sigma_z2, &mut z_stream)?;
            rob_value = value;
            g_grads.accumulate(&rob_grads, cfg.lambda);
        }
        if !g_loss.is_finite() || !rob_value.is_finite() {
            return Err(Error::TrainingDiverged {
                step,
                which: "generator".into(),
            });
        }
        adam_step(&mut g_adam, &mut generator, &g_grads, lr)?;
        history.push(StepRecord {
            step,
            phase: Phase::Generator,
            loss: g_loss,
            r1: None,
            robustness: Some(rob_value),
            lr,
        });
    }

    Ok((Estimator::from_trained_mlp(generator)?, history))
}
