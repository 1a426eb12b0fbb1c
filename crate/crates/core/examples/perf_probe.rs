use prlab_core::linalg::Matrix;
use prlab_core::model::gaussian_toy;
use prlab_core::rng::SplitMix64;
use prlab_core::training::{train_denoiser, TrainConfig};
use prlab_core::transport::{cost_matrix, exact_ot, gaussian_w2, median_positive, sinkhorn, Ground, WeightedPointSet};
use std::time::Instant;

fn gaussian_cloud(rng: &mut SplitMix64, n: usize, dx: f64) -> WeightedPointSet {
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        rows.push(vec![rng.next_normal() + dx, rng.next_normal()]);
    }
    WeightedPointSet::uniform(Matrix::from_rows(&rows)).unwrap()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");

    if which == "all" || which == "w2" {
        // Criterion-2 shape: exact W2 between 4096-point clouds.
        let mut rng = SplitMix64::new(1);
        let a = gaussian_cloud(&mut rng, 4096, 0.0);
        let b = gaussian_cloud(&mut rng, 4096, 1.0);
        let t = Instant::now();
        let cost = cost_matrix(&a, &b, Ground::L2, 2).unwrap();
        let tc = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let r = exact_ot(a.weights(), b.weights(), &cost).unwrap();
        let w2 = r.wp(2);
        println!("w2 n=4096: cost_matrix {tc:.2}s solve {:.2}s w2={w2:.4} (closed form 1.0)", t.elapsed().as_secs_f64());
        let id = Matrix::identity(2);
        println!("  gaussian_w2 check: {}", gaussian_w2(&[0.0,0.0], &id, &[1.0,0.0], &id).unwrap());
    }

    if which == "all" || which == "jemd" {
        let mut rng = SplitMix64::new(2);
        let a = gaussian_cloud(&mut rng, 2000, 0.0);
        let b = gaussian_cloud(&mut rng, 2000, 0.3);
        let cost = cost_matrix(&a, &b, Ground::L1, 1).unwrap();
        let t = Instant::now();
        let r = exact_ot(a.weights(), b.weights(), &cost).unwrap();
        println!("jemd-shape n=2000: solve {:.2}s cost={:.4}", t.elapsed().as_secs_f64(), r.cost);
    }

    if which == "all" || which == "sinkhorn" {
        let mut rng = SplitMix64::new(3);
        for trial in 0..3 {
            let n = 512;
            let mut rows_a = Vec::new();
            let mut rows_b = Vec::new();
            for _ in 0..n {
                rows_a.push(vec![rng.next_normal(), rng.next_normal()]);
                rows_b.push(vec![rng.next_normal() + 0.7, rng.next_normal() - 0.2]);
            }
            let mut wa: Vec<f64> = (0..n).map(|_| 0.5 + rng.next_unit_open()).collect();
            let mut wb: Vec<f64> = (0..n).map(|_| 0.5 + rng.next_unit_open()).collect();
            let sa: f64 = wa.iter().sum(); wa.iter_mut().for_each(|w| *w /= sa);
            let sb: f64 = wb.iter().sum(); wb.iter_mut().for_each(|w| *w /= sb);
            let a = WeightedPointSet::new(Matrix::from_rows(&rows_a), wa).unwrap();
            let b = WeightedPointSet::new(Matrix::from_rows(&rows_b), wb).unwrap();
            let cost = cost_matrix(&a, &b, Ground::L2, 1).unwrap();
            let t = Instant::now();
            let exact = exact_ot(a.weights(), b.weights(), &cost).unwrap();
            let te = t.elapsed().as_secs_f64();
            let eps = 1e-2 * median_positive(cost.data());
            let t = Instant::now();
            let approx = sinkhorn(a.weights(), b.weights(), &cost, eps, 200_000, 1e-9).unwrap();
            let ts = t.elapsed().as_secs_f64();
            let rel = (approx.cost - exact.cost).abs() / exact.cost;
            println!(
                "sinkhorn n=512 trial {trial}: exact {te:.2}s ({} pivots) sinkhorn {ts:.2}s ({} iters, conv={}) rel_err {rel:.4}",
                exact.iterations, approx.iterations, approx.converged
            );
        }
    }

    if which == "all" || which == "train" {
        let model = gaussian_toy(1.0).unwrap();
        let cfg = TrainConfig { steps: 1000, seed: 0, lambda: 0.1, ..TrainConfig::default() };
        let t = Instant::now();
        let (_, hist) = train_denoiser(&model, &cfg).unwrap();
        let dt = t.elapsed().as_secs_f64();
        println!("train 1000 steps: {dt:.2}s -> 20k steps ~ {:.0}s; last d_loss {:.3}", dt * 20.0, hist[hist.len()-2].loss);
    }
}
