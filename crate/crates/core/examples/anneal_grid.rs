use prlab_core::estimators::Estimator;
use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::robustness::kbar_random;
use prlab_core::training::*;
use prlab_core::transport::{jemd, JemdOptions};

#[allow(clippy::too_many_arguments)]
fn train_anneal(cfg: &TrainConfig, r1_start: f64, r1_end: f64) -> Estimator {
    let model = gaussian_toy(1.0).unwrap();
    let data = sample_joint(&model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let mut g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    let mut g_adam = AdamState::new(&g, cfg.adam_beta1, cfg.adam_beta2);
    let mut d_adam = AdamState::new(&d, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut z_stream = SplitMix64::new(substream_seed(cfg.seed, "train/z"));
    let mut batch = vec![(0.0, 0.0); cfg.batch];
    let decay = (r1_end / r1_start).powf(1.0 / cfg.steps as f64);
    let mut r1c = r1_start;
    for step in 0..cfg.steps {
        let lr = cfg.lr_at(step);
        for slot in batch.iter_mut() {
            let idx = batch_stream.next_below(cfg.n_train as u64) as usize;
            *slot = data.pairs[idx];
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
        r1c *= decay;
    }
    Estimator::from_trained_mlp(g).unwrap()
}

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let opts = JemdOptions::default();
    for (start, end) in [(1.0f64, 1e-3f64), (1.0, 1e-2), (0.3, 1e-3)] {
        for lambda in [0.0, 10.0] {
            for seed in [0u64, 1] {
                let cfg = TrainConfig { lambda, seed, ..TrainConfig::default() };
                let est = train_anneal(&cfg, start, end);
                let j = jemd(&est, &model, 2000, 4242, &opts).unwrap();
                let k = kbar_random(&est, &model, 1000, 0.2, 7).unwrap();
                println!("r1 {start}->{end} lam={lambda:>4} seed={seed}: jemd {j:.3} kbar {k:.2}");
            }
        }
    }
}
