use prlab_core::model::gaussian_toy;
use prlab_core::robustness::kbar_random;
use prlab_core::training::{train_denoiser, TrainConfig};
use prlab_core::transport::{jemd, JemdOptions};

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    for (label, steps, r1) in [
        ("r1=0.1  6k", 6000usize, 0.1f64),
        ("r1=0.02 6k", 6000, 0.02),
        ("r1=0.02 20k", 20000, 0.02),
        ("r1=0.1  20k", 20000, 0.1),
    ] {
        let cfg = TrainConfig {
            steps,
            lambda: 0.0,
            seed: 1,
            r1_coeff: r1,
            lr_halve_start: steps / 2,
            lr_halve_period: steps / 20,
            ..TrainConfig::default()
        };
        match train_denoiser(&model, &cfg) {
            Ok((est, _)) => {
                let j = jemd(&est, &model, 2000, 4242, &JemdOptions::default()).unwrap();
                let k = kbar_random(&est, &model, 500, 0.2, 7).unwrap();
                println!("{label}: jemd {j:.4} kbar {k:.2}");
            }
            Err(e) => println!("{label}: DIVERGED {e}"),
        }
    }
}
