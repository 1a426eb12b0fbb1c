use prlab_core::estimators::Estimator;
use prlab_core::linalg::Matrix;
use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::robustness::kbar_random;
use prlab_core::training::*;
use prlab_core::transport::{jemd, JemdOptions};

fn train_pre(cfg: &TrainConfig, pre_steps: usize, r1c: f64) -> Estimator {
    let model = gaussian_toy(1.0).unwrap();
    let data = sample_joint(&model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let mut g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    let mut g_adam = AdamState::new(&g, cfg.adam_beta1, cfg.adam_beta2);
    let mut d_adam = AdamState::new(&d, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut z_stream = SplitMix64::new(substream_seed(cfg.seed, "train/z"));
    let mut batch = vec![(0.0, 0.0); cfg.batch];
    for step in 0..cfg.steps {
        let lr = cfg.lr_at(step);
        for slot in batch.iter_mut() {
            let idx = batch_stream.next_below(cfg.n_train as u64) as usize;
            *slot = data.pairs[idx];
        }
        if step < pre_steps {
            // MSE warm start for the generator only.
            let ys = Matrix::from_vec(cfg.batch, 1, batch.iter().map(|p| p.1).collect());
            let (out, cache) = mlp_forward(&g, &ys).unwrap();
            let mut gout = Matrix::zeros(cfg.batch, 1);
            for b in 0..cfg.batch {
                gout.set(b, 0, 2.0 * (out.get(b, 0) - batch[b].0) / cfg.batch as f64);
            }
            let grads = mlp_backward(&g, &cache, &gout).unwrap();
            adam_step(&mut g_adam, &mut g, &grads, lr).unwrap();
            continue;
        }
        let eval = gan_step_losses(&d, &g, &batch).unwrap();
        let (_, r1g) = r1_penalty(&d, &batch, cfg.r1_fd_step, r1c).unwrap();
        let mut dg = eval.d_grads;
        dg.accumulate(&r1g, 1.0);
        adam_step(&mut d_adam, &mut d, &dg, lr).unwrap();
        let eval2 = gan_step_losses(&d, &g, &batch).unwrap();
        let mut gg = eval2.g_grads;
        if cfg.lambda > 0.0 {
            let ys: Vec<f64> = batch.iter().map(|p| p.1).collect();
            let (_, rg) = robustness_loss(&g, &ys, cfg.sigma_z2, &mut z_stream).unwrap();
            gg.accumulate(&rg, cfg.lambda);
        }
        adam_step(&mut g_adam, &mut g, &gg, lr).unwrap();
    }
    Estimator::from_trained_mlp(g).unwrap()
}

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let opts = JemdOptions::default();
    for r1c in [1.0f64, 0.1, 0.01] {
        for lambda in [0.0, 10.0] {
            for seed in [0u64, 1] {
                let cfg = TrainConfig { lambda, seed, ..TrainConfig::default() };
                let est = train_pre(&cfg, 2000, r1c);
                let j = jemd(&est, &model, 2000, 4242, &opts).unwrap();
                let k = kbar_random(&est, &model, 1000, 0.2, 7).unwrap();
                println!("pre2k r1={r1c} lam={lambda:>4} seed={seed}: jemd {j:.3} kbar {k:.2}");
            }
        }
    }
}
