use prlab_core::estimators::Estimator;
use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::training::{train_denoiser, TrainConfig};
use prlab_core::transport::{jemd, JemdOptions};

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4000);
    let lambda: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let cfg = TrainConfig { steps, lambda, seed: 1, ..TrainConfig::default() };
    let (est, hist) = train_denoiser(&model, &cfg).unwrap();

    // Loss trajectory summary.
    for w in hist.chunks(2 * (steps / 10).max(1)) {
        let d: Vec<f64> = w.iter().filter(|r| matches!(r.phase, prlab_core::training::Phase::Discriminator)).map(|r| r.loss).collect();
        let g: Vec<f64> = w.iter().filter(|r| matches!(r.phase, prlab_core::training::Phase::Generator)).map(|r| r.loss).collect();
        let r1: f64 = w.iter().filter_map(|r| r.r1).sum::<f64>() / d.len() as f64;
        println!(
            "steps {:>6}..: d_loss {:.3} g_loss {:.3} r1 {:.3}",
            w[0].step,
            d.iter().sum::<f64>() / d.len() as f64,
            g.iter().sum::<f64>() / g.len() as f64,
            r1
        );
    }

    // Output geometry: slope stats and marginal moments.
    let sample = sample_joint(&model, 4000, 99).unwrap();
    let outs: Vec<f64> = sample.ys().map(|y| est.evaluate(&[y]).unwrap()[0]).collect();
    let mean = outs.iter().sum::<f64>() / outs.len() as f64;
    let var = outs.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / outs.len() as f64;
    println!("output mean {mean:.3} var {var:.3} (target: 0, 1)");
    for y in [-2.0f64, -1.0, 0.0, 1.0, 2.0] {
        let f = est.evaluate(&[y]).unwrap()[0];
        let slope = match &est { Estimator::TrainedMlp { .. } => est.input_gradient(&[y]).unwrap().get(0, 0), _ => 0.0 };
        println!("  f({y:+.1}) = {f:+.3}  slope {slope:+.2}");
    }
    let j = jemd(&est, &model, 2000, 4242, &JemdOptions::default()).unwrap();
    println!("jemd = {j:.4}");
}
