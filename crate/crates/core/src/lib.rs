//! Numerical laboratory for the perception-robustness tradeoff of
//! deterministic restoration estimators.
//!
//! The crate builds a small, fully reproducible world around the additive
//! Gaussian denoising problem Y = X + N and finite discrete channels:
//!
//! - [`model`] — the probabilistic ground truth (sampling, posteriors);
//! - [`estimators`] — deterministic estimators under study (analytic MMSE,
//!   the perfect-perceptual-quality linear map, a tunable zigzag family, a
//!   trained MLP) plus the stochastic posterior-sampler reference;
//! - [`training`] — CGAN-with-robustness-penalty training of the MLP
//!   denoiser with manual backpropagation and Adam;
//! - [`transport`] — exact and entropic optimal transport, the joint
//!   perceptual index (JEMD) and the Gaussian Frechet/W2 closed form;
//! - [`robustness`] — Lipschitz lower-bound probing, I-FGSM attacks and
//!   farthest-point posterior exploration;
//! - [`analytics`] — conditional-MSE analytics, residual diagnostics and the
//!   tradeoff sweep runner;
//! - [`oracle`] — exhaustive verification of the Lipschitz lower bound on
//!   finite discrete models, including the certified proof constants.
//!
//! Everything takes explicit seeds and is deterministic; see [`rng`].

pub mod analytics;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod robustness;
pub mod special;
pub mod svg;
pub mod training;
pub mod transport;

pub use error::{Error, Result};
pub use linalg::Matrix;
