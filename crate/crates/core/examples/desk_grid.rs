use prlab_core::model::gaussian_toy;
use prlab_core::robustness::kbar_random;
use prlab_core::training::{train_denoiser, TrainConfig};
use prlab_core::transport::{jemd, JemdOptions};

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let r1: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    for lambda in [0.0, 0.3, 10.0] {
        for seed in [0u64, 1] {
            let cfg = TrainConfig { lambda, seed, r1_coeff: r1, ..TrainConfig::default() };
            match train_denoiser(&model, &cfg) {
                Ok((est, _)) => {
                    let j = jemd(&est, &model, 2000, 4242, &JemdOptions::default()).unwrap();
                    let k = kbar_random(&est, &model, 1000, 0.2, 7).unwrap();
                    println!("r1={r1} lambda={lambda:>4} seed={seed}: jemd {j:.4} kbar {k:.2}");
                }
                Err(e) => println!("r1={r1} lambda={lambda:>4} seed={seed}: DIVERGED {e}"),
            }
        }
    }
}
