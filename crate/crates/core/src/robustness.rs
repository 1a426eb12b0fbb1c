//! Lipschitz lower-bound probing, I-FGSM adversarial perturbation, and
//! farthest-point posterior exploration.
//!
//! The probe statistic is the empirical average of
//! `K(y, y_adv) = ||f(y) - f(y_adv)||_2 / ||y - y_adv||_2`
//! over an evaluation set; it lower-bounds the true Lipschitz constant of
//! any deterministic estimator.

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::model::GaussianToyModel;
use crate::rng::{substream_seed, SplitMix64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Objective maximized by the I-FGSM loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackObjective {
    /// `|| f(y_t) - f(y) ||^2`: push the output away from the clean output.
    MaxOutputChange,
    /// The farthest-point-sampling spread loss against a list of previously
    /// harvested outputs.
    FpsSpread,
}

/// I-FGSM configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    /// L-infinity radius of the attack (and total step budget).
    pub alpha: f64,
    /// Update steps; each step moves `alpha / steps` per coordinate.
    pub steps: usize,
    pub objective: AttackObjective,
    pub seed: u64,
}

impl AttackConfig {
    pub fn new(alpha: f64, steps: usize) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        Ok(AttackConfig {
            alpha,
            steps,
            objective: AttackObjective::MaxOutputChange,
            seed: 0,
        })
    }
}

/// One cell of a tradeoff sweep: the control parameter with its measured
/// joint perceptual index and Lipschitz lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    /// Control parameter (lambda or delta).
    pub control: f64,
    pub jemd: f64,
    pub kbar: f64,
    pub n_eval: usize,
    pub seed: u64,
    /// Named diagnostics (across-seed deviations, divergence flags, ...).
    pub auxiliary: BTreeMap<String, f64>,
}

/// The probe ratio `||f(y1) - f(y2)|| / ||y1 - y2||` (L2 norms).
pub fn k_ratio(estimator: &Estimator, y1: &[f64], y2: &[f64]) -> Result<f64> {
    if estimator.is_stochastic() {
        return Err(Error::ContractViolation(
            "k_ratio requires a deterministic estimator".into(),
        ));
    }
    let dy = l2_distance(y1, y2)?;
    if dy == 0.0 {
        return Err(Error::invalid("y2", "probe points must differ"));
    }
    let f1 = estimator.evaluate(y1)?;
    let f2 = estimator.evaluate(y2)?;
    Ok(l2_distance(&f1, &f2)? / dy)
}

fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("points", "dimension mismatch"));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Lipschitz lower bound from random Gaussian perturbations: the mean of
/// `K(y, y + z)` over `n` measurements `y ~ p_Y` with `z ~ N(0, sigma_z2)`.
pub fn kbar_random(
    estimator: &Estimator,
    model: &GaussianToyModel,
    n: usize,
    sigma_z2: f64,
    seed: u64,
) -> Result<f64> {
    if estimator.is_stochastic() {
        return Err(Error::ContractViolation(
            "kbar_random requires a deterministic estimator".into(),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "evaluation set must be nonempty"));
    }
    if !(sigma_z2 > 0.0) {
        return Err(Error::invalid("sigma_z2", "perturbation variance must be positive"));
    }
    let sigma_y = model.y_variance().sqrt();
    let sigma_z = sigma_z2.sqrt();
    let mut rng = SplitMix64::new(seed);
    let mut total = 0.0;
    let mut used = 0usize;
    while used < n {
        let y = sigma_y * rng.next_normal();
        let z = sigma_z * rng.next_normal();
        if z == 0.0 {
            continue; // measure-zero event; skip rather than divide by zero
        }
        total += k_ratio(estimator, &[y], &[y + z])?;
        used += 1;
    }
    Ok(total / n as f64)
}

/// The basic iterated FGSM attack under an L-infinity budget:
/// `y_{t+1} = clip_{||.-y||_inf <= alpha}(y_t + (alpha/steps) * sign(grad))`.
///
/// Dispatches on `cfg.objective`; the FPS spread objective needs the list of
/// harvested outputs and is only reachable through [`fps_explore`].
pub fn ifgsm(estimator: &Estimator, y: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>> {
    match cfg.objective {
        AttackObjective::MaxOutputChange => attack_max_output_change(estimator, y, cfg),
        AttackObjective::FpsSpread => Err(Error::invalid(
            "objective",
            "the spread objective requires a harvest list; use fps_explore",
        )),
    }
}

/// Generic I-FGSM driver: `objective_grad(output, jacobian_data)` returns
/// the gradient of the objective with respect to the input.
///
/// `sign(0)` is taken as `+1`, so a flat objective (e.g. at the very first
/// step, where the output change is still zero) walks in the positive
/// direction instead of stalling.
fn ifgsm_generic<F>(estimator: &Estimator, y: &[f64], cfg: &AttackConfig, objective_grad: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    if estimator.is_stochastic() {
        return Err(Error::ContractViolation(
            "ifgsm requires a deterministic estimator".into(),
        ));
    }
    let dim = y.len();
    let step = cfg.alpha / cfg.steps as f64;
    let mut current = y.to_vec();
    for _ in 0..cfg.steps {
        let out = estimator.evaluate(&current)?;
        let jac = estimator.input_gradient(&current)?;
        let grad = objective_grad(&out, jac.data());
        for k in 0..dim {
            let direction = if grad[k] >= 0.0 { 1.0 } else { -1.0 };
            let moved = current[k] + step * direction;
            current[k] = moved.clamp(y[k] - cfg.alpha, y[k] + cfg.alpha);
        }
    }
    Ok(current)
}

/// Lipschitz lower bound with I-FGSM perturbations in place of random ones.
pub fn kbar_ifgsm(
    estimator: &Estimator,
    model: &GaussianToyModel,
    n: usize,
    cfg: &AttackConfig,
) -> Result<f64> {
    if estimator.is_stochastic() {
        return Err(Error::ContractViolation(
            "kbar_ifgsm requires a deterministic estimator".into(),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "evaluation set must be nonempty"));
    }
    let sigma_y = model.y_variance().sqrt();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut total = 0.0;
    let mut used = 0usize;
    while used < n {
        let y = sigma_y * rng.next_normal();
        let y_adv = attack_max_output_change(estimator, &[y], cfg)?;
        if y_adv[0] == y {
            continue;
        }
        total += k_ratio(estimator, &[y], &y_adv)?;
        used += 1;
    }
    Ok(total / n as f64)
}

/// I-FGSM maximizing `||f(y_t) - f(y)||^2`.
pub fn attack_max_output_change(estimator: &Estimator, y: &[f64], cfg: &AttackConfig) -> Result<Vec<f64>> {
    let clean = estimator.evaluate(y)?;
    let out_dim = clean.len();
    let in_dim = y.len();
    ifgsm_generic(estimator, y, cfg, move |out, jac| {
        let mut grad = vec![0.0; in_dim];
        for o in 0..out_dim {
            let coeff = 2.0 * (out[o] - clean[o]);
            for k in 0..in_dim {
                grad[k] += coeff * jac[o * in_dim + k];
            }
        }
        grad
    })
}

/// How the spread loss treats the list of already-harvested outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FpsLossMode {
    /// Average squared distance to every previous output (the evident
    /// intent of the exploration loop).
    AllPrevious,
    /// Squared distance to the most recent output only (the literal reading
    /// of the loop's loss line, whose repeated summand does not depend on
    /// the summation index).
    LastOnly,
}

/// Farthest-point exploration: harvests `samples` diverse outputs around one
/// measurement by repeatedly attacking within the L-infinity ball.
///
/// The first output is `f(y)` with no attack performed; each subsequent
/// output maximizes the spread loss against the list collected so far.
pub fn fps_explore(
    estimator: &Estimator,
    y: &[f64],
    samples: usize,
    cfg: &AttackConfig,
    mode: FpsLossMode,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if estimator.is_stochastic() {
        return Err(Error::ContractViolation(
            "fps_explore requires a deterministic estimator".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let in_dim = y.len();
    let first = estimator.evaluate(y)?;
    let out_dim = first.len();
    let mut harvested: Vec<(Vec<f64>, Vec<f64>)> = vec![(y.to_vec(), first)];

    for _ in 1..samples {
        let outputs: Vec<Vec<f64>> = harvested.iter().map(|p| p.1.clone()).collect();
        let y_adv = ifgsm_generic(estimator, y, cfg, |out, jac| {
            let mut grad = vec![0.0; in_dim];
            let targets: &[Vec<f64>] = match mode {
                FpsLossMode::AllPrevious => &outputs,
                FpsLossMode::LastOnly => std::slice::from_ref(outputs.last().expect("nonempty")),
            };
            let scale = 1.0 / targets.len() as f64;
            // d/dy mean_s || X[s] - f(y) ||^2 = -2 mean_s (X[s] - f(y)) . J
            for target in targets {
                for o in 0..out_dim {
                    let coeff = 2.0 * scale * (out[o] - target[o]);
                    for k in 0..in_dim {
                        grad[k] += coeff * jac[o * in_dim + k];
                    }
                }
            }
            grad
        })?;
        let out = estimator.evaluate(&y_adv)?;
        harvested.push((y_adv, out));
    }
    Ok(harvested)
}

/// Derives the substream seed for one evaluation index, so fan-out across
/// inputs is schedule-independent.
pub fn probe_seed(seed: u64, index: usize) -> u64 {
    substream_seed(seed, &format!("probe/{index}"))
}
