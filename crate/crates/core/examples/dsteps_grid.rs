use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::robustness::kbar_random;
use prlab_core::training::*;
use prlab_core::transport::{jemd, JemdOptions};
use prlab_core::estimators::Estimator;

fn train_ratio(cfg: &TrainConfig, d_steps: usize, d_lr_mult: f64) -> Estimator {
    let model = gaussian_toy(1.0).unwrap();
    let data = sample_joint(&model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let mut g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    let mut g_adam = AdamState::new(&g, cfg.adam_beta1, cfg.adam_beta2);
    let mut d_adam = AdamState::new(&d, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut batch = vec![(0.0, 0.0); cfg.batch];
    for step in 0..cfg.steps {
        let lr = cfg.lr_at(step);
        for _ in 0..d_steps {
            for slot in batch.iter_mut() {
                let idx = batch_stream.next_below(cfg.n_train as u64) as usize;
                *slot = data.pairs[idx];
            }
            let eval = gan_step_losses(&d, &g, &batch).unwrap();
            let (_, r1g) = r1_penalty(&d, &batch, cfg.r1_fd_step, cfg.r1_coeff).unwrap();
            let mut dg = eval.d_grads;
            dg.accumulate(&r1g, 1.0);
            adam_step(&mut d_adam, &mut d, &dg, lr * d_lr_mult).unwrap();
        }
        let eval2 = gan_step_losses(&d, &g, &batch).unwrap();
        adam_step(&mut g_adam, &mut g, &eval2.g_grads, lr).unwrap();
    }
    Estimator::from_trained_mlp(g).unwrap()
}

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    for (d_steps, dmult, r1, steps) in [
        (5usize, 1.0f64, 1.0f64, 6000usize),
        (5, 1.0, 0.1, 6000),
        (10, 1.0, 1.0, 4000),
        (5, 4.0, 1.0, 6000),
    ] {
        let cfg = TrainConfig { steps, lambda: 0.0, seed: 1, r1_coeff: r1,
            lr_halve_start: steps / 2, lr_halve_period: steps / 20, ..TrainConfig::default() };
        let est = train_ratio(&cfg, d_steps, dmult);
        let j = jemd(&est, &model, 2000, 4242, &JemdOptions::default()).unwrap();
        let k = kbar_random(&est, &model, 500, 0.2, 7).unwrap();
        println!("d_steps {d_steps} dmult {dmult} r1 {r1} steps {steps}: jemd {j:.4} kbar {k:.2}");
    }
}
