use prlab_core::model::gaussian_toy;
use prlab_core::robustness::kbar_random;
use prlab_core::training::{train_denoiser, Phase, TrainConfig};
use prlab_core::transport::{jemd, JemdOptions};

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let cfg = TrainConfig { lambda: 0.0, seed: 1, ..TrainConfig::paper() };
    let (est, hist) = train_denoiser(&model, &cfg).unwrap();
    for w in hist.chunks(2 * 10_000) {
        let d: Vec<f64> = w.iter().filter(|r| matches!(r.phase, Phase::Discriminator)).map(|r| r.loss).collect();
        println!("steps {:>6}..: d_loss {:.4}", w[0].step, d.iter().sum::<f64>() / d.len() as f64);
    }
    for y in [-2.0f64, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
        println!("  f({y:+.1}) = {:+.3}", est.evaluate(&[y]).unwrap()[0]);
    }
    let j = jemd(&est, &model, 2000, 4242, &JemdOptions::default()).unwrap();
    let k = kbar_random(&est, &model, 1000, 0.2, 7).unwrap();
    println!("paper-scale lambda=0: jemd {j:.4} kbar {k:.2}");
}
