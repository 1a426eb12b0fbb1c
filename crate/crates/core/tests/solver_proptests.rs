//! Property tests for the transport solvers and the deterministic
//! estimator contracts.

use proptest::prelude::*;
use prlab_core::estimators::make_zigzag;
use prlab_core::linalg::Matrix;
use prlab_core::model::gaussian_toy;
use prlab_core::special::norm_quantile;
use prlab_core::transport::{cost_matrix, exact_ot, w1_sorted_1d, Ground, WeightedPointSet};

fn weights_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..1.0, n).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        let total: f64 = w.iter().sum();
        w[0] += 1.0 - total; // close the normalization exactly
        w
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Feasibility and cost consistency of the optimal plan on random
    /// rectangular instances with uneven weights.
    #[test]
    fn exact_ot_plans_are_feasible(
        n in 1usize..10,
        m in 1usize..10,
        seed in 0u64..1_000_000,
    ) {
        let mut rng = prlab_core::rng::SplitMix64::new(seed);
        let mu = {
            let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_unit_open()).collect();
            let s: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let total: f64 = w.iter().sum();
            w[0] += 1.0 - total;
            w
        };
        let nu = {
            let raw: Vec<f64> = (0..m).map(|_| 0.05 + rng.next_unit_open()).collect();
            let s: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let total: f64 = w.iter().sum();
            w[0] += 1.0 - total;
            w
        };
        let mut cost = Matrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                cost.set(i, j, rng.next_unit_open() * 7.0);
            }
        }
        let r = exact_ot(&mu, &nu, &cost).unwrap();
        let mut row = vec![0.0; n];
        let mut col = vec![0.0; m];
        let mut recomputed = 0.0;
        for &(i, j, mass) in &r.plan {
            prop_assert!(mass > 0.0);
            row[i] += mass;
            col[j] += mass;
            recomputed += mass * cost.get(i, j);
        }
        for (got, want) in row.iter().zip(&mu) {
            prop_assert!((got - want).abs() < 1e-9);
        }
        for (got, want) in col.iter().zip(&nu) {
            prop_assert!((got - want).abs() < 1e-9);
        }
        prop_assert!((recomputed - r.cost).abs() < 1e-9);
    }

    /// The 1-D sorted oracle and the LP agree for any equal-weight sample.
    #[test]
    fn one_dimensional_w1_routes_agree(
        xs in proptest::collection::vec(-50.0f64..50.0, 1..40),
        shift in -5.0f64..5.0,
    ) {
        let ys: Vec<f64> = xs.iter().map(|x| x * 0.7 + shift).collect();
        let a = WeightedPointSet::uniform(Matrix::from_rows(
            &xs.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
        )).unwrap();
        let b = WeightedPointSet::uniform(Matrix::from_rows(
            &ys.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
        )).unwrap();
        let cost = cost_matrix(&a, &b, Ground::L1, 1).unwrap();
        let lp = exact_ot(a.weights(), b.weights(), &cost).unwrap().cost;
        let sorted = w1_sorted_1d(&xs, &ys).unwrap();
        prop_assert!((lp - sorted).abs() < 1e-9 * (1.0 + sorted));
    }

    /// Normalized weight vectors survive the validation gate.
    #[test]
    fn weight_normalization_tolerance(w in weights_strategy(6)) {
        let cost = Matrix::zeros(6, 6);
        prop_assert!(exact_ot(&w, &w, &cost).is_ok());
    }

    /// Zigzag outputs stay inside the clipped posterior band everywhere.
    #[test]
    fn zigzag_band_invariant(
        y in -20.0f64..20.0,
        delta_exp in -4i32..1,
        q_exp in 1u32..5,
    ) {
        let delta = 2.0f64.powi(delta_exp);
        let q = 10.0f64.powi(-(q_exp as i32));
        let model = gaussian_toy(1.0).unwrap();
        let e = make_zigzag(&model, delta, q).unwrap();
        let out = e.evaluate(&[y]).unwrap()[0];
        let mean = y / 2.0;
        let s = 0.5f64.sqrt();
        prop_assert!(out >= mean + s * norm_quantile(q) - 1e-9);
        prop_assert!(out <= mean + s * norm_quantile(1.0 - q) + 1e-9);
    }
}
