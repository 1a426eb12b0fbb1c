use prlab_core::model::gaussian_toy;
use prlab_core::training::{train_denoiser, TrainConfig};
use prlab_core::transport::{jemd, JemdOptions};

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    // (label, steps, r1, lr, beta2)
    let grid: Vec<(&str, usize, f64, f64, f64)> = vec![
        ("baseline-4k", 4000, 1.0, 1e-4, 0.9),
        ("no-r1-4k", 4000, 0.0, 1e-4, 0.9),
        ("r1-0.1-4k", 4000, 0.1, 1e-4, 0.9),
        ("lr3e4-4k", 4000, 1.0, 3e-4, 0.9),
        ("beta2-999-4k", 4000, 1.0, 1e-4, 0.999),
        ("lr3e4-beta2-999-4k", 4000, 1.0, 3e-4, 0.999),
    ];
    for (label, steps, r1, lr, b2) in grid {
        let cfg = TrainConfig {
            steps,
            lambda: 0.0,
            seed: 1,
            r1_coeff: r1,
            lr,
            adam_beta2: b2,
            lr_halve_start: steps / 2,
            lr_halve_period: steps / 20,
            ..TrainConfig::default()
        };
        match train_denoiser(&model, &cfg) {
            Ok((est, hist)) => {
                let j = jemd(&est, &model, 2000, 4242, &JemdOptions::default()).unwrap();
                let tail_d: f64 = hist.iter().rev().filter(|r| matches!(r.phase, prlab_core::training::Phase::Discriminator)).take(200).map(|r| r.loss).sum::<f64>() / 200.0;
                println!("{label:>22}: jemd {j:.4} tail_d_loss {tail_d:.3}");
            }
            Err(e) => println!("{label:>22}: DIVERGED {e}"),
        }
    }
}
