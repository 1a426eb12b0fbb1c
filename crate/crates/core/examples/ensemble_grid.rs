use prlab_core::estimators::Estimator;
use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::robustness::kbar_random;
use prlab_core::training::*;
use prlab_core::transport::{jemd, JemdOptions};
use std::collections::VecDeque;

fn train_ensemble(cfg: &TrainConfig, r1c: f64, window: usize, every: usize) -> Estimator {
    let model = gaussian_toy(1.0).unwrap();
    let data = sample_joint(&model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let mut g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    let mut g_adam = AdamState::new(&g, cfg.adam_beta1, cfg.adam_beta2);
    let mut d_adam = AdamState::new(&d, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut z_stream = SplitMix64::new(substream_seed(cfg.seed, "train/z"));
    let mut batch = vec![(0.0, 0.0); cfg.batch];
    let mut snapshots: VecDeque<MlpParams> = VecDeque::new();
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

        if step % every == 0 {
            snapshots.push_back(d.clone());
            if snapshots.len() > window {
                snapshots.pop_front();
            }
        }

        // Generator: average adversarial loss over the snapshot ensemble
        // plus the current discriminator.
        let mut gg: Option<MlpGradients> = None;
        let mut count = 0.0;
        for dd in snapshots.iter().chain(std::iter::once(&d)) {
            let e = gan_step_losses(dd, &g, &batch).unwrap();
            match gg.as_mut() {
                None => gg = Some(e.g_grads),
                Some(acc) => acc.accumulate(&e.g_grads, 1.0),
            }
            count += 1.0;
        }
        let mut gg = gg.unwrap();
        for l in gg.layers.iter_mut() {
            l.weight.data_mut().iter_mut().for_each(|w| *w /= count);
            l.bias.iter_mut().for_each(|b| *b /= count);
        }
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
    for (r1c, window, every) in [(0.1f64, 4usize, 250usize), (0.01, 4, 250)] {
        for lambda in [0.0, 10.0] {
            for seed in [0u64, 1] {
                let cfg = TrainConfig { lambda, seed, ..TrainConfig::default() };
                let est = train_ensemble(&cfg, r1c, window, every);
                let j = jemd(&est, &model, 2000, 4242, &opts).unwrap();
                let k = kbar_random(&est, &model, 1000, 0.2, 7).unwrap();
                println!("ens w={window}/{every} r1={r1c} lam={lambda:>4} seed={seed}: jemd {j:.3} kbar {k:.2}");
            }
        }
    }
}
