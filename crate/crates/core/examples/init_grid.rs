use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::robustness::kbar_random;
use prlab_core::training::*;
use prlab_core::transport::{jemd, JemdOptions};
use prlab_core::estimators::Estimator;

fn train_scaled(model: &prlab_core::model::GaussianToyModel, cfg: &TrainConfig, scale: f64) -> (Estimator, f64) {
    let data = sample_joint(model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let mut g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    for net in [&mut g, &mut d] {
        for layer in net.layers.iter_mut() {
            layer.weight.data_mut().iter_mut().for_each(|w| *w *= scale);
        }
    }
    let mut g_adam = AdamState::new(&g, cfg.adam_beta1, cfg.adam_beta2);
    let mut d_adam = AdamState::new(&d, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut batch = vec![(0.0, 0.0); cfg.batch];
    let mut last_d = 0.0;
    for step in 0..cfg.steps {
        let lr = cfg.lr_at(step);
        for slot in batch.iter_mut() {
            let idx = batch_stream.next_below(cfg.n_train as u64) as usize;
            *slot = data.pairs[idx];
        }
        let eval = gan_step_losses(&d, &g, &batch).unwrap();
        let (_, r1g) = r1_penalty(&d, &batch, cfg.r1_fd_step, cfg.r1_coeff).unwrap();
        let mut dg = eval.d_grads;
        dg.accumulate(&r1g, 1.0);
        adam_step(&mut d_adam, &mut d, &dg, lr).unwrap();
        let eval2 = gan_step_losses(&d, &g, &batch).unwrap();
        adam_step(&mut g_adam, &mut g, &eval2.g_grads, lr).unwrap();
        last_d = eval.d_loss;
    }
    (Estimator::from_trained_mlp(g).unwrap(), last_d)
}

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    for scale in [1.0f64, 0.3, 0.1] {
        for r1 in [1.0f64, 0.1] {
            let cfg = TrainConfig { steps: 6000, lambda: 0.0, seed: 1, r1_coeff: r1, ..TrainConfig::default() };
            let (est, last_d) = train_scaled(&model, &cfg, scale);
            let j = jemd(&est, &model, 2000, 4242, &JemdOptions::default()).unwrap();
            let k = kbar_random(&est, &model, 500, 0.2, 7).unwrap();
            println!("scale {scale:.1} r1 {r1:.1}: jemd {j:.4} kbar {k:.2} d_loss {last_d:.3}");
        }
    }
}
