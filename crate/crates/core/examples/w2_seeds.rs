use prlab_core::linalg::Matrix;
use prlab_core::rng::SplitMix64;
use prlab_core::transport::{cost_matrix, exact_ot, Ground, WeightedPointSet};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    for seed in 0..5u64 {
        let mut rng = SplitMix64::new(1000 + seed);
        let n = 4096;
        let mut rows_a = Vec::with_capacity(n);
        let mut rows_b = Vec::with_capacity(n);
        for _ in 0..n {
            rows_a.push(vec![rng.next_normal(), rng.next_normal()]);
            rows_b.push(vec![rng.next_normal() + 1.0, rng.next_normal()]);
        }
        let a = WeightedPointSet::uniform(Matrix::from_rows(&rows_a)).unwrap();
        let b = WeightedPointSet::uniform(Matrix::from_rows(&rows_b)).unwrap();
        let cost = cost_matrix(&a, &b, Ground::L2, 2).unwrap();
        let r = exact_ot(a.weights(), b.weights(), &cost).unwrap();
        println!("seed {seed}: W2 = {:.5} rel err {:.4}", r.wp(2), (r.wp(2) - 1.0).abs());
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
