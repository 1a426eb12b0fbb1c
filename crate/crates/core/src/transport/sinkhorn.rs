//! Entropic optimal transport by Sinkhorn scaling with log-domain
//! stabilization.
//!
//! The scaling vectors are kept multiplicative for speed and absorbed into
//! log-domain potentials whenever they threaten to overflow, so the kernel
//! `exp((f_i + g_j - C_ij) / eps)` stays representable at arbitrarily small
//! regularization. An epsilon-scaling warm start (halving from a coarse
//! level down to the requested one) keeps the iteration count low exactly
//! where plain Sinkhorn stalls.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Result of an entropic transport solve.
#[derive(Debug, Clone)]
pub struct SinkhornResult {
    /// Transport cost `<P, C>` of the entropic plan (entropy term excluded).
    pub cost: f64,
    /// Dual potential on the `mu` side (log domain).
    pub potential_mu: Vec<f64>,
    /// Dual potential on the `nu` side (log domain).
    pub potential_nu: Vec<f64>,
    /// Whether the marginal violation dropped below `tol`.
    pub converged: bool,
    /// Scaling iterations performed (all epsilon levels included).
    pub iterations: usize,
    /// Final L1 marginal violation.
    pub marginal_error: f64,
}

/// When a scaling factor leaves `[exp(-ABSORB_LOG), exp(ABSORB_LOG)]` it is
/// absorbed into the log-domain potentials.
const ABSORB_LOG: f64 = 200.0;

pub fn sinkhorn(
    mu: &[f64],
    nu: &[f64],
    cost: &Matrix,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SinkhornResult> {
    let n = mu.len();
    let m = nu.len();
    assert_eq!(cost.rows(), n);
    assert_eq!(cost.cols(), m);
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if cost.data().iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("cost", "entries must be finite"));
    }
    for (name, w) in [("mu", mu), ("nu", nu)] {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(name, "weights must be nonnegative and sum to 1"));
        }
    }

    let max_cost = cost.data().iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    // Epsilon-scaling schedule: halve from a coarse level to the target.
    let mut levels = vec![epsilon];
    let mut level = epsilon;
    while level < max_cost / 4.0 {
        level *= 2.0;
        levels.push(level);
    }
    levels.reverse();

    let mut f = vec![0.0f64; n];
    let mut g = vec![0.0f64; m];
    let mut u = vec![1.0f64; n];
    let mut v = vec![1.0f64; m];
    let mut kernel = Matrix::zeros(n, m);

    let rebuild_kernel = |kernel: &mut Matrix, f: &[f64], g: &[f64], eps: f64| {
        for i in 0..n {
            let row = kernel.row_mut(i);
            for j in 0..m {
                row[j] = ((f[i] + g[j] - cost.get(i, j)) / eps).exp();
            }
        }
    };

    let mut iterations = 0usize;
    let mut converged = false;
    let n_levels = levels.len();

    'outer: for (li, &eps) in levels.iter().enumerate() {
        let last_level = li + 1 == n_levels;
        rebuild_kernel(&mut kernel, &f, &g, eps);
        u.iter_mut().for_each(|x| *x = 1.0);
        v.iter_mut().for_each(|x| *x = 1.0);
        // Coarse levels only warm up the potentials.
        let level_budget = if last_level { max_iters.saturating_sub(iterations) } else { 30 };

        for it in 0..level_budget {
            // u-update then v-update; zero denominators fall back to zero
            // scaling (empty row mass), which only happens for mu_i = 0.
            for i in 0..n {
                let row = kernel.row(i);
                let mut denom = 0.0;
                for j in 0..m {
                    denom += row[j] * v[j];
                }
                u[i] = if denom > 0.0 { mu[i] / denom } else { 0.0 };
            }
            for j in 0..m {
                let mut denom = 0.0;
                for i in 0..n {
                    denom += kernel.get(i, j) * u[i];
                }
                v[j] = if denom > 0.0 { nu[j] / denom } else { 0.0 };
            }
            iterations += 1;

            let overflow = u
                .iter()
                .chain(v.iter())
                .any(|&x| x > ABSORB_LOG.exp() || (x > 0.0 && x < (-ABSORB_LOG).exp()));
            if overflow {
                absorb(&mut f, &mut u, eps);
                absorb(&mut g, &mut v, eps);
                rebuild_kernel(&mut kernel, &f, &g, eps);
            }

            if last_level && (it % 10 == 9 || iterations >= max_iters) {
                let err = marginal_violation(&kernel, &u, &v, mu, nu);
                if err < tol {
                    converged = true;
                    break 'outer;
                }
                if iterations >= max_iters {
                    break 'outer;
                }
            }
        }
        absorb(&mut f, &mut u, eps);
        absorb(&mut g, &mut v, eps);
    }

    absorb(&mut f, &mut u, epsilon);
    absorb(&mut g, &mut v, epsilon);
    rebuild_kernel(&mut kernel, &f, &g, epsilon);
    let marginal_error = marginal_violation(&kernel, &vec![1.0; n], &vec![1.0; m], mu, nu);
    if marginal_error < tol {
        converged = true;
    }

    let mut transport_cost = 0.0;
    for i in 0..n {
        let row = kernel.row(i);
        for j in 0..m {
            transport_cost += row[j] * cost.get(i, j);
        }
    }

    Ok(SinkhornResult {
        cost: transport_cost,
        potential_mu: f,
        potential_nu: g,
        converged,
        iterations,
        marginal_error,
    })
}

fn absorb(potential: &mut [f64], scaling: &mut [f64], eps: f64) {
    for (p, s) in potential.iter_mut().zip(scaling.iter_mut()) {
        if *s > 0.0 {
            *p += eps * s.ln();
        }
        *s = 1.0;
    }
}

fn marginal_violation(kernel: &Matrix, u: &[f64], v: &[f64], mu: &[f64], nu: &[f64]) -> f64 {
    let n = mu.len();
    let m = nu.len();
    let mut err = 0.0;
    let mut col_sum = vec![0.0f64; m];
    for i in 0..n {
        let row = kernel.row(i);
        let mut row_sum = 0.0;
        for j in 0..m {
            let p = u[i] * row[j] * v[j];
            row_sum += p;
            col_sum[j] += p;
        }
        err += (row_sum - mu[i]).abs();
    }
    for j in 0..m {
        err += (col_sum[j] - nu[j]).abs();
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_measures_cost_vanishes_with_epsilon() {
        // Three distinct points, uniform weights, transported to themselves.
        let pts = [0.0f64, 1.0, 2.5];
        let mut cost = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                cost.set(i, j, (pts[i] - pts[j]).abs());
            }
        }
        let w = [1.0 / 3.0; 3];
        // Median positive cost is 1.5; epsilon = 1e-3 * median.
        let eps = 1e-3 * 1.5;
        let r = sinkhorn(&w, &w, &cost, eps, 20_000, 1e-9).unwrap();
        assert!(r.converged);
        assert!(r.cost.abs() <= 1e-3, "cost {} should be <= 1e-3", r.cost);
    }

    #[test]
    fn symmetric_inputs_give_symmetric_potentials() {
        // Costs within a few epsilon of each other keep the kernel well
        // connected, so the potential gauge is shared across all atoms (a
        // nearly-disconnected kernel would have one gauge per block).
        let pts = [0.0f64, 0.35, 0.95, 1.5];
        let mut cost = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                cost.set(i, j, (pts[i] - pts[j]).powi(2));
            }
        }
        let w = [0.25; 4];
        let r = sinkhorn(&w, &w, &cost, 0.3, 50_000, 1e-11).unwrap();
        assert!(r.converged);
        // Potentials are unique up to an additive gauge (f + c, g - c);
        // compare them centered.
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mf, mg) = (mean(&r.potential_mu), mean(&r.potential_nu));
        for (a, b) in r.potential_mu.iter().zip(&r.potential_nu) {
            assert!(
                ((a - mf) - (b - mg)).abs() < 1e-6,
                "centered potentials {} vs {}",
                a - mf,
                b - mg
            );
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let cost = Matrix::from_rows(&[vec![0.0]]);
        assert!(sinkhorn(&[1.0], &[1.0], &cost, 0.0, 10, 1e-6).is_err());
        assert!(sinkhorn(&[0.5], &[1.0], &cost, 0.1, 10, 1e-6).is_err());
    }

    #[test]
    fn non_convergence_is_flagged_not_fatal() {
        let cost = Matrix::from_rows(&[vec![0.0, 5.0], vec![5.0, 0.0]]);
        let w = [0.5, 0.5];
        let r = sinkhorn(&w, &w, &cost, 1e-4, 3, 1e-12).unwrap();
        assert!(!r.converged);
    }
}
