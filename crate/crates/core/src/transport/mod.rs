//! Optimal-transport distances: the measurement instrument for the joint
//! perceptual index and the oracle metric for the tradeoff bound.
//!
//! `exact_ot` solves the discrete transport linear program exactly through a
//! min-cost-flow formulation. Equal-weight instances of equal size reduce to
//! an assignment problem (a vertex of the Birkhoff polytope is optimal) and
//! take the Jonker-Volgenant path; everything else goes through the network
//! simplex. `sinkhorn` provides the entropic approximation for large point
//! counts, and `gaussian_w2` the closed form between Gaussians.

pub mod assignment;
pub mod network_simplex;
pub mod sinkhorn;

pub use sinkhorn::{sinkhorn, SinkhornResult};

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::linalg::{sym_sqrt, Matrix};
use crate::model::{sample_joint, GaussianToyModel};
use crate::rng::substream_seed;
use std::time::Instant;

/// Ground metric for cost matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ground {
    L1,
    L2,
}

/// A weighted empirical measure: `n` points in `d` dimensions with
/// nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet {
    points: Matrix,
    weights: Vec<f64>,
}

impl WeightedPointSet {
    pub fn new(points: Matrix, weights: Vec<f64>) -> Result<Self> {
        if points.rows() != weights.len() {
            return Err(Error::invalid("weights", "one weight per point required"));
        }
        if points.rows() == 0 {
            return Err(Error::invalid("points", "point set must be nonempty"));
        }
        if points.data().iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("points", "coordinates must be finite"));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid("weights", "weights must be nonnegative"));
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "weights",
                format!("weights must sum to 1 within 1e-12, got {sum}"),
            ));
        }
        Ok(WeightedPointSet { points, weights })
    }

    /// Uniform weights over the given points.
    pub fn uniform(points: Matrix) -> Result<Self> {
        let n = points.rows();
        if n == 0 {
            return Err(Error::invalid("points", "point set must be nonempty"));
        }
        let w = vec![1.0 / n as f64; n];
        WeightedPointSet::new(points, w)
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Merges exactly coincident points and drops zero-weight atoms, so
    /// degenerate inputs reach the solvers in general position.
    pub fn aggregated(&self) -> WeightedPointSet {
        let mut index: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for i in 0..self.len() {
            if self.weights[i] == 0.0 {
                continue;
            }
            let key: Vec<u64> = self.points.row(i).iter().map(|x| x.to_bits()).collect();
            match index.entry(key) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    weights[*e.get()] += self.weights[i];
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(points.len());
                    points.push(self.points.row(i).to_vec());
                    weights.push(self.weights[i]);
                }
            }
        }
        WeightedPointSet {
            points: Matrix::from_rows(&points),
            weights,
        }
    }
}

/// Exact or approximate transport solve outcome.
#[derive(Debug, Clone)]
pub struct TransportResult {
    /// Transport cost `sum plan_mass * cost` (equals `W_p^p` when the cost
    /// matrix is a p-th power of a ground metric).
    pub cost: f64,
    /// Sparse plan `(i, j, mass)`.
    pub plan: Vec<(usize, usize, f64)>,
    /// True for the exact LP solvers, false for Sinkhorn.
    pub exact: bool,
    /// Solver iterations (pivots or augmentations).
    pub iterations: usize,
    /// Wall-clock solve time in milliseconds.
    pub runtime_ms: f64,
}

impl TransportResult {
    /// The Wasserstein distance for the ground power `p` that built the
    /// cost matrix.
    pub fn wp(&self, p: u32) -> f64 {
        match p {
            1 => self.cost,
            2 => self.cost.max(0.0).sqrt(),
            _ => self.cost.max(0.0).powf(1.0 / p as f64),
        }
    }
}

/// Pairwise ground-metric costs raised to the power `p`:
/// `out[i][j] = ||a_i - b_j||_ground^p`.
pub fn cost_matrix(a: &WeightedPointSet, b: &WeightedPointSet, ground: Ground, p: u32) -> Result<Matrix> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(
            "points",
            format!("dimension mismatch: {} vs {}", a.dim(), b.dim()),
        ));
    }
    if p != 1 && p != 2 {
        return Err(Error::invalid("p", "supported powers are 1 and 2"));
    }
    let (n, m, d) = (a.len(), b.len(), a.dim());
    let mut out = Matrix::zeros(n, m);
    for i in 0..n {
        let ai = a.points.row(i);
        let row = out.row_mut(i);
        for j in 0..m {
            let bj = b.points.row(j);
            let dist = match ground {
                Ground::L1 => {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += (ai[k] - bj[k]).abs();
                    }
                    s
                }
                Ground::L2 => {
                    let mut s = 0.0;
                    for k in 0..d {
                        let diff = ai[k] - bj[k];
                        s += diff * diff;
                    }
                    s.sqrt()
                }
            };
            row[j] = if p == 1 { dist } else { dist * dist };
        }
    }
    Ok(out)
}

/// Exact discrete optimal transport between weighted atoms.
///
/// Zero-weight atoms are dropped before solving; plan indices refer to the
/// original inputs. Equal-size equal-weight instances are solved as an
/// assignment problem, everything else by network simplex.
pub fn exact_ot(mu: &[f64], nu: &[f64], cost: &Matrix) -> Result<TransportResult> {
    validate_weights("mu", mu)?;
    validate_weights("nu", nu)?;
    if cost.rows() != mu.len() || cost.cols() != nu.len() {
        return Err(Error::invalid("cost", "shape must be |mu| x |nu|"));
    }
    if cost.data().iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("cost", "entries must be finite"));
    }

    let start = Instant::now();
    // Drop zero-weight atoms, remembering original indices.
    let rows: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.len()).filter(|&j| nu[j] > 0.0).collect();
    let needs_compaction = rows.len() != mu.len() || cols.len() != nu.len();

    let n = rows.len();
    let m = cols.len();
    let equal_weight_square = n == m
        && rows.iter().all(|&i| (mu[i] - 1.0 / n as f64).abs() <= 1e-12)
        && cols.iter().all(|&j| (nu[j] - 1.0 / m as f64).abs() <= 1e-12);

    let compact_cost = if needs_compaction {
        let mut c = Matrix::zeros(n, m);
        for (ci, &i) in rows.iter().enumerate() {
            for (cj, &j) in cols.iter().enumerate() {
                c.set(ci, cj, cost.get(i, j));
            }
        }
        c
    } else {
        cost.clone()
    };

    let (plan, total_cost, iterations) = if equal_weight_square {
        let r = assignment::solve_assignment(&compact_cost);
        let mass = 1.0 / n as f64;
        let plan: Vec<(usize, usize, f64)> = r
            .row_to_col
            .iter()
            .enumerate()
            .map(|(i, &j)| (rows[i], cols[j], mass))
            .collect();
        (plan, r.total_cost * mass, r.augmentations)
    } else {
        let mu_c: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
        let nu_c: Vec<f64> = cols.iter().map(|&j| nu[j]).collect();
        let r = network_simplex::solve_transport(&mu_c, &nu_c, &compact_cost)?;
        let plan: Vec<(usize, usize, f64)> = r
            .plan
            .iter()
            .map(|&(i, j, w)| (rows[i], cols[j], w))
            .collect();
        (plan, r.total_cost, r.pivots)
    };

    Ok(TransportResult {
        cost: total_cost,
        plan,
        exact: true,
        iterations,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn validate_weights(name: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::invalid(name, "must be nonempty"));
    }
    if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::invalid(name, "weights must be nonnegative and finite"));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(name, format!("must sum to 1 within 1e-12, got {sum}")));
    }
    Ok(())
}

/// Closed-form 1-D W1 between equal-count equal-weight samples:
/// the mean absolute difference of the sorted values.
pub fn w1_sorted_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("b", format!("count mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::invalid("a", "must be nonempty"));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Solver selection for [`jemd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JemdSolver {
    Exact,
    /// Entropic approximation; epsilon is `epsilon_scale` times the median
    /// pairwise cost.
    Sinkhorn { epsilon_scale: f64 },
}

/// Sample pairing for the estimator side of [`jemd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JemdPairing {
    /// The estimator set uses an independent fresh y-sample (default;
    /// avoids the downward bias of reusing the reference draw).
    Independent,
    /// The estimator set reuses the same y draw as the reference set.
    Paired,
}

/// Options for the joint perceptual index measurement.
#[derive(Debug, Clone, Copy)]
pub struct JemdOptions {
    pub ground: Ground,
    pub p: u32,
    pub solver: JemdSolver,
    pub pairing: JemdPairing,
}

impl Default for JemdOptions {
    fn default() -> Self {
        JemdOptions {
            ground: Ground::L1,
            p: 1,
            solver: JemdSolver::Exact,
            pairing: JemdPairing::Independent,
        }
    }
}

/// Joint Earth Mover's Distance of a deterministic estimator: the empirical
/// W_p (default W1, L1 ground) between `n` reference pairs `(x, y)` and `n`
/// estimator pairs `(f(y'), y')`.
pub fn jemd(
    estimator: &Estimator,
    model: &GaussianToyModel,
    n: usize,
    seed: u64,
    opts: &JemdOptions,
) -> Result<f64> {
    if estimator.is_stochastic() {
        return Err(Error::ContractViolation(
            "jemd requires a deterministic estimator".into(),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "sample size must be at least 1"));
    }

    let reference = sample_joint(model, n, seed)?;
    let mut ref_rows = Vec::with_capacity(n);
    for &(x, y) in &reference.pairs {
        ref_rows.push(vec![x, y]);
    }

    let est_ys: Vec<f64> = match opts.pairing {
        JemdPairing::Paired => reference.ys().collect(),
        JemdPairing::Independent => {
            let fresh = sample_joint(model, n, substream_seed(seed, "jemd/fresh-y"))?;
            fresh.ys().collect()
        }
    };
    let mut est_rows = Vec::with_capacity(n);
    for &y in &est_ys {
        let out = estimator.evaluate(&[y])?;
        est_rows.push(vec![out[0], y]);
    }

    let a = WeightedPointSet::uniform(Matrix::from_rows(&ref_rows))?;
    let b = WeightedPointSet::uniform(Matrix::from_rows(&est_rows))?;
    let cost = cost_matrix(&a, &b, opts.ground, opts.p)?;

    let raw = match opts.solver {
        JemdSolver::Exact => exact_ot(a.weights(), b.weights(), &cost)?.cost,
        JemdSolver::Sinkhorn { epsilon_scale } => {
            let eps = epsilon_scale * median_positive(cost.data());
            sinkhorn(a.weights(), b.weights(), &cost, eps, 100_000, 1e-7)?.cost
        }
    };
    Ok(match opts.p {
        1 => raw,
        p => raw.max(0.0).powf(1.0 / p as f64),
    })
}

/// Median of the positive entries (used to scale the Sinkhorn epsilon).
pub fn median_positive(values: &[f64]) -> f64 {
    let mut pos: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    if pos.is_empty() {
        return 1.0;
    }
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pos[pos.len() / 2]
}

/// Exact W2 between two Gaussians:
/// `W2^2 = ||m1 - m2||^2 + tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2})`.
///
/// Matrix square roots use the symmetric eigendecomposition; eigenvalues in
/// `[-1e-10, 0)` are clamped to zero, anything lower is rejected as non-PSD.
pub fn gaussian_w2(mu1: &[f64], cov1: &Matrix, mu2: &[f64], cov2: &Matrix) -> Result<f64> {
    let d = mu1.len();
    if mu2.len() != d || cov1.rows() != d || cov1.cols() != d || cov2.rows() != d || cov2.cols() != d {
        return Err(Error::invalid("dimensions", "means and covariances must agree"));
    }
    const CLAMP: f64 = 1e-10;
    let root1 = sym_sqrt(cov1, CLAMP)?;
    let inner = root1.matmul(cov2).matmul(&root1);
    // Symmetrize against roundoff before the second root.
    let mut sym = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            sym.set(i, j, 0.5 * (inner.get(i, j) + inner.get(j, i)));
        }
    }
    let cross = sym_sqrt(&sym, CLAMP * (1.0 + sym.trace().abs()))?;
    let mean_sq: f64 = mu1.iter().zip(mu2).map(|(a, b)| (a - b) * (a - b)).sum();
    let w2_sq = mean_sq + cov1.trace() + cov2.trace() - 2.0 * cross.trace();
    Ok(w2_sq.max(0.0).sqrt())
}
