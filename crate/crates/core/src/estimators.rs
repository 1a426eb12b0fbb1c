//! The estimator family under study.
//!
//! Deterministic variants: the MMSE line `y / (1 + s^2)`, the
//! perfect-perceptual-quality line `y / sqrt(1 + s^2)`, a zigzag family that
//! sweeps the posterior quantile within measurement bins of width `delta`
//! (approaching the joint law as `delta -> 0` at the cost of slope ~ 1/delta),
//! and a trained MLP denoiser. The stochastic posterior-sampler reference is
//! also provided as an analytics baseline; every robustness-facing operation
//! rejects it.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::GaussianToyModel;
use crate::rng::SplitMix64;
use crate::special::norm_quantile;
use crate::training::{mlp_backward, mlp_forward, MlpParams};
use serde::{Deserialize, Serialize};
use std::sync::Mutex;

/// A tagged estimator `y -> x_hat`.
#[derive(Debug)]
pub enum Estimator {
    /// Minimum-MSE line `f(y) = y / (1 + sigma_n^2)`.
    Mmse { sigma_n: f64 },
    /// Lowest-MSE estimator with perfect marginal perceptual quality:
    /// `f(y) = y / sqrt(1 + sigma_n^2)`.
    Dmax { sigma_n: f64 },
    /// Stochastic reference: posterior mean plus fresh posterior-width noise
    /// per call. The only non-deterministic variant.
    PosteriorSampler {
        sigma_n: f64,
        seed: u64,
        stream: Mutex<SplitMix64>,
    },
    /// Deterministic posterior-quantile sweep in bins of width `delta`:
    /// `f(y) = m(y) + s * Phi^{-1}(q_clip + u(y) * (1 - 2 q_clip))` with
    /// `u(y) = (y - delta * floor(y / delta)) / delta`.
    Zigzag {
        sigma_n: f64,
        delta: f64,
        q_clip: f64,
    },
    /// A trained MLP denoiser (see the training module).
    TrainedMlp { params: MlpParams },
}

impl Clone for Estimator {
    fn clone(&self) -> Self {
        match self {
            Estimator::Mmse { sigma_n } => Estimator::Mmse { sigma_n: *sigma_n },
            Estimator::Dmax { sigma_n } => Estimator::Dmax { sigma_n: *sigma_n },
            Estimator::PosteriorSampler { sigma_n, seed, stream } => Estimator::PosteriorSampler {
                sigma_n: *sigma_n,
                seed: *seed,
                stream: Mutex::new(stream.lock().expect("stream lock").clone()),
            },
            Estimator::Zigzag { sigma_n, delta, q_clip } => Estimator::Zigzag {
                sigma_n: *sigma_n,
                delta: *delta,
                q_clip: *q_clip,
            },
            Estimator::TrainedMlp { params } => Estimator::TrainedMlp { params: params.clone() },
        }
    }
}

/// JSON-serializable descriptor sufficient to reconstruct an estimator
/// bit-exactly (the sampler's stream restarts from its seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum EstimatorDescriptor {
    Mmse { sigma_n: f64 },
    Dmax { sigma_n: f64 },
    PosteriorSampler { sigma_n: f64, seed: u64 },
    Zigzag { sigma_n: f64, delta: f64, q_clip: f64 },
    TrainedMlp { params: MlpParams },
}

/// Builds the MMSE estimator for the model.
pub fn make_mmse(model: &GaussianToyModel) -> Estimator {
    Estimator::Mmse { sigma_n: model.sigma_n() }
}

/// Builds the minimum-MSE perfect-perceptual-quality estimator.
pub fn make_dmax(model: &GaussianToyModel) -> Estimator {
    Estimator::Dmax { sigma_n: model.sigma_n() }
}

/// Builds the stochastic posterior-sampler reference.
pub fn make_posterior_sampler(model: &GaussianToyModel, seed: u64) -> Estimator {
    Estimator::PosteriorSampler {
        sigma_n: model.sigma_n(),
        seed,
        stream: Mutex::new(SplitMix64::new(seed)),
    }
}

/// Builds a zigzag estimator. Bins are anchored at multiples of `delta`
/// from the origin; `q_clip` bounds the swept quantile away from 0 and 1 so
/// the slope stays finite.
pub fn make_zigzag(model: &GaussianToyModel, delta: f64, q_clip: f64) -> Result<Estimator> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
    }
    if !(q_clip > 0.0 && q_clip < 0.5) {
        return Err(Error::invalid("q_clip", format!("must lie in (0, 0.5), got {q_clip}")));
    }
    Ok(Estimator::Zigzag {
        sigma_n: model.sigma_n(),
        delta,
        q_clip,
    })
}

impl Estimator {
    /// Wraps trained generator parameters; the network must map scalars to
    /// scalars.
    pub fn from_trained_mlp(params: MlpParams) -> Result<Estimator> {
        if params.input_dim() != 1 || params.output_dim() != 1 {
            return Err(Error::invalid("params", "trained estimator must map 1-D to 1-D"));
        }
        Ok(Estimator::TrainedMlp { params })
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Estimator::PosteriorSampler { .. })
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Estimator::Mmse { .. } => "mmse",
            Estimator::Dmax { .. } => "dmax",
            Estimator::PosteriorSampler { .. } => "posterior_sampler",
            Estimator::Zigzag { .. } => "zigzag",
            Estimator::TrainedMlp { .. } => "trained_mlp",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Estimator::TrainedMlp { params } => params.input_dim(),
            _ => 1,
        }
    }

    /// Evaluates the estimator. Deterministic variants always return the
    /// same output for the same input; the posterior sampler draws fresh
    /// noise from its internal stream on every call.
    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.input_dim() {
            return Err(Error::invalid(
                "y",
                format!("expected dim {}, got {}", self.input_dim(), y.len()),
            ));
        }
        match self {
            Estimator::Mmse { sigma_n } => {
                let s = 1.0 + sigma_n * sigma_n;
                Ok(vec![y[0] / s])
            }
            Estimator::Dmax { sigma_n } => {
                let s = (1.0 + sigma_n * sigma_n).sqrt();
                Ok(vec![y[0] / s])
            }
            Estimator::PosteriorSampler { sigma_n, stream, .. } => {
                let (mean, var) = posterior_of(*sigma_n, y[0]);
                let w = stream
                    .lock()
                    .expect("sampler stream")
                    .next_gaussian(0.0, var.sqrt());
                Ok(vec![mean + w])
            }
            Estimator::Zigzag { sigma_n, delta, q_clip } => {
                Ok(vec![zigzag_value(*sigma_n, *delta, *q_clip, y[0])])
            }
            Estimator::TrainedMlp { params } => {
                let input = Matrix::from_vec(1, y.len(), y.to_vec());
                let (out, _) = mlp_forward(params, &input)?;
                Ok(out.row(0).to_vec())
            }
        }
    }

    /// Jacobian of the estimator at `y` (output dim x input dim).
    ///
    /// Analytic for the linear variants, exact backpropagation for the
    /// trained MLP, central finite differences for the zigzag; the
    /// stochastic reference is rejected.
    pub fn input_gradient(&self, y: &[f64]) -> Result<Matrix> {
        if y.len() != self.input_dim() {
            return Err(Error::invalid(
                "y",
                format!("expected dim {}, got {}", self.input_dim(), y.len()),
            ));
        }
        match self {
            Estimator::Mmse { sigma_n } => {
                Ok(Matrix::from_vec(1, 1, vec![1.0 / (1.0 + sigma_n * sigma_n)]))
            }
            Estimator::Dmax { sigma_n } => Ok(Matrix::from_vec(
                1,
                1,
                vec![1.0 / (1.0 + sigma_n * sigma_n).sqrt()],
            )),
            Estimator::PosteriorSampler { .. } => Err(Error::ContractViolation(
                "input_gradient requires a deterministic estimator".into(),
            )),
            Estimator::Zigzag { sigma_n, delta, q_clip } => {
                // Central differences with h = max(1e-6, 1e-6 |y|).
                let h = 1e-6f64.max(1e-6 * y[0].abs());
                let plus = zigzag_value(*sigma_n, *delta, *q_clip, y[0] + h);
                let minus = zigzag_value(*sigma_n, *delta, *q_clip, y[0] - h);
                Ok(Matrix::from_vec(1, 1, vec![(plus - minus) / (2.0 * h)]))
            }
            Estimator::TrainedMlp { params } => {
                let input = Matrix::from_vec(1, y.len(), y.to_vec());
                let (out, cache) = mlp_forward(params, &input)?;
                let out_dim = out.cols();
                let mut jac = Matrix::zeros(out_dim, y.len());
                for k in 0..out_dim {
                    let mut grad_out = Matrix::zeros(1, out_dim);
                    grad_out.set(0, k, 1.0);
                    let grads = mlp_backward(params, &cache, &grad_out)?;
                    for j in 0..y.len() {
                        jac.set(k, j, grads.input_grad.get(0, j));
                    }
                }
                Ok(jac)
            }
        }
    }

    pub fn to_descriptor(&self) -> EstimatorDescriptor {
        match self {
            Estimator::Mmse { sigma_n } => EstimatorDescriptor::Mmse { sigma_n: *sigma_n },
            Estimator::Dmax { sigma_n } => EstimatorDescriptor::Dmax { sigma_n: *sigma_n },
            Estimator::PosteriorSampler { sigma_n, seed, .. } => EstimatorDescriptor::PosteriorSampler {
                sigma_n: *sigma_n,
                seed: *seed,
            },
            Estimator::Zigzag { sigma_n, delta, q_clip } => EstimatorDescriptor::Zigzag {
                sigma_n: *sigma_n,
                delta: *delta,
                q_clip: *q_clip,
            },
            Estimator::TrainedMlp { params } => EstimatorDescriptor::TrainedMlp {
                params: params.clone(),
            },
        }
    }

    pub fn from_descriptor(descriptor: EstimatorDescriptor) -> Result<Estimator> {
        let check_sigma = |sigma_n: f64| -> Result<()> {
            if !(sigma_n > 0.0) || !sigma_n.is_finite() {
                Err(Error::invalid("sigma_n", "must be positive"))
            } else {
                Ok(())
            }
        };
        match descriptor {
            EstimatorDescriptor::Mmse { sigma_n } => {
                check_sigma(sigma_n)?;
                Ok(Estimator::Mmse { sigma_n })
            }
            EstimatorDescriptor::Dmax { sigma_n } => {
                check_sigma(sigma_n)?;
                Ok(Estimator::Dmax { sigma_n })
            }
            EstimatorDescriptor::PosteriorSampler { sigma_n, seed } => {
                check_sigma(sigma_n)?;
                Ok(Estimator::PosteriorSampler {
                    sigma_n,
                    seed,
                    stream: Mutex::new(SplitMix64::new(seed)),
                })
            }
            EstimatorDescriptor::Zigzag { sigma_n, delta, q_clip } => {
                check_sigma(sigma_n)?;
                if !(delta > 0.0) {
                    return Err(Error::invalid("delta", "must be positive"));
                }
                if !(q_clip > 0.0 && q_clip < 0.5) {
                    return Err(Error::invalid("q_clip", "must lie in (0, 0.5)"));
                }
                Ok(Estimator::Zigzag { sigma_n, delta, q_clip })
            }
            EstimatorDescriptor::TrainedMlp { params } => Estimator::from_trained_mlp(params),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_descriptor()).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Estimator> {
        let descriptor: EstimatorDescriptor = serde_json::from_str(text)
            .map_err(|e| Error::invalid("descriptor", format!("malformed JSON: {e}")))?;
        Estimator::from_descriptor(descriptor)
    }
}

fn posterior_of(sigma_n: f64, y: f64) -> (f64, f64) {
    let s = 1.0 + sigma_n * sigma_n;
    (y / s, 1.0 - 1.0 / s)
}

/// The zigzag map: posterior mean plus the posterior width times a quantile
/// swept linearly within each measurement bin.
fn zigzag_value(sigma_n: f64, delta: f64, q_clip: f64, y: f64) -> f64 {
    let (mean, var) = posterior_of(sigma_n, y);
    let u = (y - delta * (y / delta).floor()) / delta;
    // u lies in [0, 1); clamp against roundoff at the bin edge.
    let u = u.clamp(0.0, 1.0 - f64::EPSILON);
    let q = q_clip + u * (1.0 - 2.0 * q_clip);
    mean + var.sqrt() * norm_quantile(q)
}
