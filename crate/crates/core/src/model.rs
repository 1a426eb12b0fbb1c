//! The probabilistic worlds under study: a jointly Gaussian denoising toy
//! problem with closed-form posterior, and finite discrete joint models used
//! by the exhaustive theorem oracle.
//!
//! Gaussian toy problem: a source X ~ N(0,1) observed through additive noise
//! N ~ N(0, sigma_n^2), Y = X + N. The pair (X, Y) is jointly Gaussian with
//! mean (0,0) and covariance [[1, 1], [1, 1 + sigma_n^2]], and the posterior
//! X | Y=y is N(y / (1 + sigma_n^2), 1 - 1 / (1 + sigma_n^2)).

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

/// Normalization slack accepted when validating a discrete pmf.
pub const PMF_TOL: f64 = 1e-12;

/// The additive-Gaussian denoising world.
///
/// All values are immutable after construction; the type is freely shareable
/// across tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianToyModel {
    sigma_n: f64,
}

impl GaussianToyModel {
    /// Noise standard deviation.
    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    /// Noise variance sigma_n^2.
    pub fn noise_variance(&self) -> f64 {
        self.sigma_n * self.sigma_n
    }

    /// Variance of the measurement Y, i.e. 1 + sigma_n^2.
    pub fn y_variance(&self) -> f64 {
        1.0 + self.noise_variance()
    }

    /// Joint covariance of (X, Y): [[1, 1], [1, 1 + sigma_n^2]].
    pub fn joint_covariance(&self) -> [[f64; 2]; 2] {
        [[1.0, 1.0], [1.0, self.y_variance()]]
    }
}

/// Builds the Gaussian toy model. Rejects `sigma_n <= 0`: a noiseless channel
/// is invertible and the tradeoff under study degenerates.
pub fn gaussian_toy(sigma_n: f64) -> Result<GaussianToyModel> {
    if !(sigma_n > 0.0) || !sigma_n.is_finite() {
        return Err(Error::invalid(
            "sigma_n",
            format!("must be a positive finite real (got {sigma_n}); sigma_n = 0 makes the degradation invertible"),
        ));
    }
    Ok(GaussianToyModel { sigma_n })
}

/// Posterior parameters of X given Y = y: `(mean, variance)`.
///
/// mean = y / (1 + sigma_n^2), variance = 1 - 1 / (1 + sigma_n^2);
/// the variance does not depend on y.
pub fn posterior_params(model: &GaussianToyModel, y: f64) -> (f64, f64) {
    let s = model.y_variance();
    (y / s, 1.0 - 1.0 / s)
}

/// A finite i.i.d. sample of (x, y) pairs together with the seed that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalJointSample {
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
}

impl EmpiricalJointSample {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.1)
    }

    /// CSV serialization: header `x,y`, one row per pair, '.' decimal
    /// separator, shortest representation that round-trips the exact double.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.pairs.len() * 40 + 4);
        out.push_str("x,y\n");
        for (x, y) in &self.pairs {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line == "x,y") {
                continue;
            }
            let mut fields = line.split(',');
            let (x, y) = match (fields.next(), fields.next(), fields.next()) {
                (Some(x), Some(y), None) => (x, y),
                _ => {
                    return Err(Error::invalid(
                        "csv",
                        format!("line {} must have exactly two fields", lineno + 1),
                    ))
                }
            };
            let parse = |s: &str, name: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::invalid(name, format!("not a number at line {}", lineno + 1)))
            };
            pairs.push((parse(x, "x")?, parse(y, "y")?));
        }
        if pairs.is_empty() {
            return Err(Error::invalid("csv", "no data rows"));
        }
        Ok(EmpiricalJointSample { pairs, seed: 0 })
    }
}

/// Draws `n` i.i.d. pairs (x, y = x + noise) from the model.
///
/// Fully deterministic given the seed: x and the noise come from one
/// SplitMix64 stream in a fixed order.
pub fn sample_joint(model: &GaussianToyModel, n: usize, seed: u64) -> Result<EmpiricalJointSample> {
    if n == 0 {
        return Err(Error::invalid("n", "sample size must be at least 1"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.next_normal();
        let y = x + model.sigma_n * rng.next_normal();
        pairs.push((x, y));
    }
    Ok(EmpiricalJointSample { pairs, seed })
}

/// A finite-support joint pmf over a grid `x_vals x y_vals`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJointModel {
    pub x_vals: Vec<f64>,
    pub y_vals: Vec<f64>,
    /// Row-major |x_vals| x |y_vals| probabilities.
    pub pmf: Vec<Vec<f64>>,
}

impl DiscreteJointModel {
    pub fn n_x(&self) -> usize {
        self.x_vals.len()
    }

    pub fn n_y(&self) -> usize {
        self.y_vals.len()
    }

    /// Marginal distribution of Y (column sums).
    pub fn y_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_y()];
        for row in &self.pmf {
            for (j, p) in row.iter().enumerate() {
                m[j] += p;
            }
        }
        m
    }

    /// True when every positive-marginal column concentrates on a single x
    /// atom, i.e. the degradation is invertible and the tradeoff theorem's
    /// precondition fails.
    pub fn is_invertible(&self) -> bool {
        let marginal = self.y_marginal();
        for j in 0..self.n_y() {
            if marginal[j] <= 0.0 {
                continue;
            }
            let positive_atoms = (0..self.n_x()).filter(|&i| self.pmf[i][j] > 0.0).count();
            if positive_atoms >= 2 {
                return false;
            }
        }
        true
    }
}

/// Validates and constructs a discrete joint model.
pub fn discrete_model(x_vals: Vec<f64>, y_vals: Vec<f64>, pmf: Vec<Vec<f64>>) -> Result<DiscreteJointModel> {
    if x_vals.is_empty() || y_vals.is_empty() {
        return Err(Error::invalid("grid", "x_vals and y_vals must be nonempty"));
    }
    for (name, vals) in [("x_vals", &x_vals), ("y_vals", &y_vals)] {
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(name, "grid values must be finite"));
        }
        for w in vals.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid(name, "grid values must be sorted and distinct"));
            }
        }
    }
    if pmf.len() != x_vals.len() || pmf.iter().any(|row| row.len() != y_vals.len()) {
        return Err(Error::invalid("pmf", "shape must be |x_vals| x |y_vals|"));
    }
    let mut total = 0.0;
    for row in &pmf {
        for &p in row {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::invalid("pmf", format!("entries must be nonnegative, got {p}")));
            }
            total += p;
        }
    }
    if (total - 1.0).abs() > PMF_TOL {
        return Err(Error::invalid("pmf", format!("must sum to 1 within {PMF_TOL}, got {total}")));
    }
    Ok(DiscreteJointModel { x_vals, y_vals, pmf })
}

/// Posterior pmf over `x_vals` for the measurement atom `y_vals[y_index]`.
pub fn discrete_posterior(model: &DiscreteJointModel, y_index: usize) -> Result<Vec<f64>> {
    if y_index >= model.n_y() {
        return Err(Error::invalid("y_index", format!("out of range 0..{}", model.n_y())));
    }
    let marginal: f64 = (0..model.n_x()).map(|i| model.pmf[i][y_index]).sum();
    if marginal <= 0.0 {
        return Err(Error::UndefinedPosterior { y_index });
    }
    Ok((0..model.n_x()).map(|i| model.pmf[i][y_index] / marginal).collect())
}
