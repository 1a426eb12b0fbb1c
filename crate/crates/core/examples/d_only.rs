use prlab_core::linalg::Matrix;
use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::training::*;

fn main() {
    let r1c: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let model = gaussian_toy(1.0).unwrap();
    let cfg = TrainConfig { steps: 4000, seed: 1, r1_coeff: r1c, ..TrainConfig::default() };
    let data = sample_joint(&model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    let mut d_adam = AdamState::new(&d, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut batch = vec![(0.0, 0.0); cfg.batch];
    for step in 0..cfg.steps {
        for slot in batch.iter_mut() {
            let idx = batch_stream.next_below(cfg.n_train as u64) as usize;
            *slot = data.pairs[idx];
        }
        let eval = gan_step_losses(&d, &g, &batch).unwrap();
        let (r1v, r1g) = r1_penalty(&d, &batch, cfg.r1_fd_step, cfg.r1_coeff).unwrap();
        let mut dg = eval.d_grads;
        dg.accumulate(&r1g, 1.0);
        adam_step(&mut d_adam, &mut d, &dg, cfg.lr).unwrap();
        if step % 800 == 0 || step + 1 == cfg.steps {
            println!("step {step:>5}: d_loss {:.4} r1 {:.4}", eval.d_loss, r1v);
        }
    }
    // Fixed generator: frozen at init, so real vs fake are clearly distinct.
    let mut rows = Vec::new();
    for &(x, y) in data.pairs.iter().take(512) { rows.push(vec![x, y]); }
    let (out, _) = mlp_forward(&d, &Matrix::from_rows(&rows)).unwrap();
    let mean: f64 = out.data().iter().sum::<f64>() / 512.0;
    println!("mean real logit {mean:.3}");
}
