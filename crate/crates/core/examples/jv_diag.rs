use prlab_core::linalg::Matrix;
use prlab_core::rng::SplitMix64;
use prlab_core::transport::assignment::solve_assignment;
use prlab_core::transport::{cost_matrix, Ground, WeightedPointSet};
use std::time::Instant;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2048);
    let mut rng = SplitMix64::new(1);
    let mut rows_a = Vec::new();
    let mut rows_b = Vec::new();
    for _ in 0..n {
        rows_a.push(vec![rng.next_normal(), rng.next_normal()]);
        rows_b.push(vec![rng.next_normal() + 1.0, rng.next_normal()]);
    }
    let a = WeightedPointSet::uniform(Matrix::from_rows(&rows_a)).unwrap();
    let b = WeightedPointSet::uniform(Matrix::from_rows(&rows_b)).unwrap();
    let cost = cost_matrix(&a, &b, Ground::L2, 2).unwrap();
    let t = Instant::now();
    let r = solve_assignment(&cost);
    println!(
        "n={n}: {:.2}s, augmentations (phase-3 rows) = {}, cost/n = {:.4}",
        t.elapsed().as_secs_f64(),
        r.augmentations,
        r.total_cost / n as f64
    );
}
