//! Exhaustive, exact verification of the Lipschitz lower bound on finite
//! discrete models.
//!
//! On a finite joint pmf every deterministic estimator is a map from the
//! measurement grid into the source grid, so all of them can be enumerated.
//! For each map the oracle computes its exact joint Wasserstein distance
//! (via `exact_ot`) and its discrete Lipschitz constant, certifies the
//! ill-posedness constants `(beta, k, p_sy)` by enumeration, evaluates the
//! bound `g(eps) = (beta - 2 t sqrt(eps)) / (2 t sqrt(eps))` with
//! `t = ((2 gamma^{p/2}) / (k p_sy))^{1/p}`, and asserts
//! `K >= max(0, g(W_p))` map by map. All norms are L2, making every
//! norm-equivalence constant in the bound exactly 1.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{discrete_posterior, DiscreteJointModel};
use crate::transport::exact_ot;
use serde::{Deserialize, Serialize};

/// Enumeration guard: at most this many maps.
pub const ENUMERATION_GUARD: u64 = 1_000_000;

/// Iterator over all deterministic maps `y_vals -> x_vals`, lexicographic in
/// the assignment tuple `(g(y_0), g(y_1), ...)`.
pub struct MapEnumeration {
    n_x: usize,
    n_y: usize,
    next_id: u64,
    total: u64,
}

impl Iterator for MapEnumeration {
    type Item = (u64, Vec<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_id >= self.total {
            return None;
        }
        let id = self.next_id;
        self.next_id += 1;
        let mut assignment = vec![0usize; self.n_y];
        let mut rem = id;
        for j in (0..self.n_y).rev() {
            assignment[j] = (rem % self.n_x as u64) as usize;
            rem /= self.n_x as u64;
        }
        Some((id, assignment))
    }
}

impl ExactSizeIterator for MapEnumeration {
    fn len(&self) -> usize {
        (self.total - self.next_id) as usize
    }
}

/// Streams every deterministic map on the model's grids.
pub fn enumerate_deterministic(model: &DiscreteJointModel) -> Result<MapEnumeration> {
    let maps = (model.n_x() as u128).checked_pow(model.n_y() as u32).unwrap_or(u128::MAX);
    if maps > ENUMERATION_GUARD as u128 {
        return Err(Error::EnumerationTooLarge {
            maps,
            guard: ENUMERATION_GUARD,
        });
    }
    Ok(MapEnumeration {
        n_x: model.n_x(),
        n_y: model.n_y(),
        next_id: 0,
        total: maps as u64,
    })
}

/// Discrete Lipschitz constant of a map: the maximum slope over pairs of
/// measurement atoms with positive marginal mass.
pub fn lipschitz_discrete(assignment: &[usize], model: &DiscreteJointModel) -> Result<f64> {
    if assignment.len() != model.n_y() {
        return Err(Error::invalid("assignment", "one x index per y atom required"));
    }
    let marginal = model.y_marginal();
    let support: Vec<usize> = (0..model.n_y()).filter(|&j| marginal[j] > 0.0).collect();
    if support.len() < 2 {
        return Err(Error::invalid(
            "model",
            "need at least two measurement atoms with positive marginal",
        ));
    }
    let mut k: f64 = 0.0;
    for (a, &j) in support.iter().enumerate() {
        for &l in support.iter().skip(a + 1) {
            let dx = (model.x_vals[assignment[j]] - model.x_vals[assignment[l]]).abs();
            let dy = (model.y_vals[j] - model.y_vals[l]).abs();
            k = k.max(dx / dy);
        }
    }
    Ok(k)
}

/// Exact `W_p` (L2 ground metric on the plane) between the model's joint
/// atoms and the map's output atoms `(g(y), y)`.
pub fn wasserstein_of_map(assignment: &[usize], model: &DiscreteJointModel, p: u32) -> Result<f64> {
    if assignment.len() != model.n_y() {
        return Err(Error::invalid("assignment", "one x index per y atom required"));
    }
    if p != 1 && p != 2 {
        return Err(Error::invalid("p", "supported orders are 1 and 2"));
    }

    // Source atoms: (x_i, y_j) with pmf mass; estimator atoms: (g(y_j), y_j)
    // with the y marginal.
    let mut src_atoms: Vec<(f64, f64)> = Vec::new();
    let mut src_mass: Vec<f64> = Vec::new();
    for i in 0..model.n_x() {
        for j in 0..model.n_y() {
            if model.pmf[i][j] > 0.0 {
                src_atoms.push((model.x_vals[i], model.y_vals[j]));
                src_mass.push(model.pmf[i][j]);
            }
        }
    }
    let marginal = model.y_marginal();
    let mut est_atoms: Vec<(f64, f64)> = Vec::new();
    let mut est_mass: Vec<f64> = Vec::new();
    for j in 0..model.n_y() {
        if marginal[j] > 0.0 {
            est_atoms.push((model.x_vals[assignment[j]], model.y_vals[j]));
            est_mass.push(marginal[j]);
        }
    }

    let mut cost = Matrix::zeros(src_atoms.len(), est_atoms.len());
    for (i, &(ax, ay)) in src_atoms.iter().enumerate() {
        for (j, &(bx, by)) in est_atoms.iter().enumerate() {
            let dist = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
            cost.set(i, j, if p == 1 { dist } else { dist * dist });
        }
    }
    let result = exact_ot(&src_mass, &est_mass, &cost)?;
    Ok(result.wp(p))
}

/// Certified ill-posedness constants of a non-invertible discrete model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Separation between the two witness posterior atoms.
    pub beta: f64,
    /// Posterior mass lower bound carried by each witness atom.
    pub k: f64,
    /// Probability of the certified measurement set.
    pub p_sy: f64,
    /// Indices of the certified measurement atoms.
    pub sy_indices: Vec<usize>,
    /// Per-certified-atom witness pair `(x index 1, x index 2)`.
    pub witnesses: Vec<(usize, usize)>,
}

/// Enumerates candidate `(beta, k)` over the finite sets of pairwise source
/// distances and posterior masses, keeps those certifying a positive-mass
/// measurement set, and returns the candidate maximizing the bound at
/// `epsilon = gamma` (the ordering is actually epsilon-free: it maximizes
/// `beta * (k * p_sy)^{1/p}`).
pub fn certify_constants(model: &DiscreteJointModel, p: u32, gamma: f64) -> Result<BoundConstants> {
    if model.is_invertible() {
        return Err(Error::ContractViolation(
            "the bound requires a non-invertible model".into(),
        ));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }

    let marginal = model.y_marginal();
    let posteriors: Vec<Option<Vec<f64>>> = (0..model.n_y())
        .map(|j| {
            if marginal[j] > 0.0 {
                discrete_posterior(model, j).ok()
            } else {
                None
            }
        })
        .collect();

    // Candidate separations and masses.
    let mut betas: Vec<f64> = Vec::new();
    for i in 0..model.n_x() {
        for l in (i + 1)..model.n_x() {
            let d = (model.x_vals[i] - model.x_vals[l]).abs();
            if d > 0.0 && !betas.iter().any(|&b| b == d) {
                betas.push(d);
            }
        }
    }
    let mut masses: Vec<f64> = Vec::new();
    for post in posteriors.iter().flatten() {
        for &m in post {
            if m > 0.0 && !masses.iter().any(|&x| x == m) {
                masses.push(m);
            }
        }
    }

    let mut best: Option<(f64, BoundConstants)> = None;
    for &beta in &betas {
        for &k in &masses {
            let mut sy_indices = Vec::new();
            let mut witnesses = Vec::new();
            let mut p_sy = 0.0;
            for (j, post) in posteriors.iter().enumerate() {
                let Some(post) = post else { continue };
                // A witness pair: two atoms with mass >= k separated >= beta.
                let mut found: Option<(usize, usize)> = None;
                'search: for a in 0..model.n_x() {
                    if post[a] < k {
                        continue;
                    }
                    for b in (a + 1)..model.n_x() {
                        if post[b] >= k && (model.x_vals[a] - model.x_vals[b]).abs() >= beta {
                            found = Some((a, b));
                            break 'search;
                        }
                    }
                }
                if let Some(pair) = found {
                    sy_indices.push(j);
                    witnesses.push(pair);
                    p_sy += marginal[j];
                }
            }
            if p_sy <= 0.0 {
                continue;
            }
            let candidate = BoundConstants {
                beta,
                k,
                p_sy,
                sy_indices,
                witnesses,
            };
            let score = bound_g(&candidate, p, gamma, gamma)?;
            if best.as_ref().map_or(true, |(s, _)| score > *s) {
                best = Some((score, candidate));
            }
        }
    }
    best.map(|(_, c)| c).ok_or_else(|| {
        Error::Numerical("no certifiable (beta, k) candidate found on a non-invertible model".into())
    })
}

/// The computable lower bound `g(epsilon) = (beta - 2 t sqrt(eps)) / (2 t sqrt(eps))`
/// with `t = ((2 gamma^{p/2}) / (k p_sy))^{1/p} * (1 + 1e-6)`, valid for
/// `0 < epsilon <= gamma`. May be non-positive (vacuous).
pub fn bound_g(constants: &BoundConstants, p: u32, epsilon: f64, gamma: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    if epsilon > gamma {
        return Err(Error::invalid(
            "epsilon",
            format!("must not exceed gamma ({epsilon} > {gamma})"),
        ));
    }
    if p != 1 && p != 2 {
        return Err(Error::invalid("p", "supported orders are 1 and 2"));
    }
    let t = t_for(constants, p, gamma);
    let scaled = 2.0 * t * epsilon.sqrt();
    Ok((constants.beta - scaled) / scaled)
}

fn t_for(constants: &BoundConstants, p: u32, gamma: f64) -> f64 {
    let pf = p as f64;
    ((2.0 * gamma.powf(pf / 2.0)) / (constants.k * constants.p_sy)).powf(1.0 / pf) * (1.0 + 1e-6)
}

/// How the proof's free radius `gamma` is chosen during verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaPolicy {
    /// One gamma for the whole run: the largest observed `W_p`.
    Global,
    /// Each map is checked at its own `gamma = W_p` (the loosest admissible
    /// choice for that map).
    PerMap,
}

/// Per-map verification record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub map_id: u64,
    pub assignment: Vec<usize>,
    pub wp: f64,
    pub lipschitz: f64,
    /// The evaluated bound `g(W_p)` (may be negative, i.e. vacuous).
    pub bound: f64,
    pub t: f64,
    pub satisfied: bool,
}

/// Full verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub p: u32,
    pub gamma_policy: GammaPolicy,
    /// The global gamma (largest observed `W_p`).
    pub gamma: f64,
    pub constants: BoundConstants,
    /// `t` evaluated at the global gamma.
    pub t: f64,
    pub records: Vec<MapRecord>,
    pub min_wp: f64,
    pub all_satisfied: bool,
}

impl TheoremReport {
    /// CSV rows `map_id,wp,k,g,satisfied`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("map_id,wp,k,g,satisfied\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.map_id, r.wp, r.lipschitz, r.bound, r.satisfied
            ));
        }
        out
    }

    /// JSON summary `{beta, k, p_sy, t, gamma, min_wp, all_satisfied}`.
    pub fn summary_json(&self) -> String {
        serde_json::json!({
            "beta": self.constants.beta,
            "k": self.constants.k,
            "p_sy": self.constants.p_sy,
            "t": self.t,
            "gamma": self.gamma,
            "min_wp": self.min_wp,
            "all_satisfied": self.all_satisfied,
            "p": self.p,
        })
        .to_string()
    }
}

/// Exhaustively verifies `K >= max(0, g(W_p))` for every deterministic map
/// on the model, plus `min W_p > 0`. Any violated assertion is returned as
/// an error carrying the counterexample map.
pub fn verify_theorem(
    model: &DiscreteJointModel,
    p: u32,
    gamma_policy: GammaPolicy,
) -> Result<TheoremReport> {
    if model.is_invertible() {
        return Err(Error::ContractViolation(
            "verification requires a non-invertible model".into(),
        ));
    }

    // Pass 1: exact W_p and K per map.
    let mut maps: Vec<(u64, Vec<usize>, f64, f64)> = Vec::new();
    for (id, assignment) in enumerate_deterministic(model)? {
        let wp = wasserstein_of_map(&assignment, model, p)?;
        let k = lipschitz_discrete(&assignment, model)?;
        maps.push((id, assignment, wp, k));
    }
    let gamma = maps.iter().map(|m| m.2).fold(0.0f64, f64::max);
    let min_wp = maps.iter().map(|m| m.2).fold(f64::INFINITY, f64::min);

    let constants = certify_constants(model, p, gamma)?;
    let t_global = t_for(&constants, p, gamma);

    // Pass 2: the bound, map by map.
    let mut records = Vec::with_capacity(maps.len());
    for (map_id, assignment, wp, lipschitz) in maps {
        let map_gamma = match gamma_policy {
            GammaPolicy::Global => gamma,
            GammaPolicy::PerMap => wp,
        };
        let bound = bound_g(&constants, p, wp, map_gamma)?;
        let satisfied = lipschitz >= bound.max(0.0);
        if !satisfied {
            return Err(Error::VerificationFailure {
                map_id,
                assignment,
                wp,
                lipschitz,
                bound,
            });
        }
        records.push(MapRecord {
            map_id,
            assignment,
            wp,
            lipschitz,
            bound,
            t: t_for(&constants, p, map_gamma),
            satisfied,
        });
    }

    if !(min_wp > 0.0) {
        let worst = records
            .iter()
            .min_by(|a, b| a.wp.partial_cmp(&b.wp).unwrap())
            .expect("nonempty enumeration");
        return Err(Error::VerificationFailure {
            map_id: worst.map_id,
            assignment: worst.assignment.clone(),
            wp: worst.wp,
            lipschitz: worst.lipschitz,
            bound: f64::INFINITY,
        });
    }

    Ok(TheoremReport {
        p,
        gamma_policy,
        gamma,
        constants,
        t: t_global,
        records,
        min_wp,
        all_satisfied: true,
    })
}

/// The discrete tradeoff frontier: `K` binned by `W_p`, where each bin
/// reports the smallest Lipschitz constant achievable at that joint
/// perceptual index *or any smaller one* (the Pareto lower envelope).
///
/// A raw per-bin minimum need not be monotone (the largest-`W_p` maps can
/// all be erratic); the frontier is the running minimum over bins from the
/// left, which is what "the achievable K within this perception budget"
/// means: tightening the budget can only force a larger constant.
pub fn lower_envelope(records: &[MapRecord], bins: usize) -> Vec<(f64, f64)> {
    if records.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = records.iter().map(|r| r.wp).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.wp).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        let min_k = records.iter().map(|r| r.lipschitz).fold(f64::INFINITY, f64::min);
        return vec![(lo, min_k)];
    }
    let width = (hi - lo) / bins as f64;
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(bins);
    for b in 0..bins {
        let left = lo + b as f64 * width;
        let right = if b + 1 == bins { hi + 1e-12 } else { left + width };
        let min_k = records
            .iter()
            .filter(|r| r.wp >= left && r.wp < right)
            .map(|r| r.lipschitz)
            .fold(f64::INFINITY, f64::min);
        raw.push((left + 0.5 * width, min_k));
    }
    // Running minima from the left, dropping empty bins.
    let mut best = f64::INFINITY;
    let mut out = Vec::with_capacity(bins);
    for &(center, min_k) in &raw {
        if min_k.is_finite() {
            best = best.min(min_k);
            out.push((center, best));
        }
    }
    out
}
