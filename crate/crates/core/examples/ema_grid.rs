use prlab_core::estimators::{make_dmax, make_mmse, Estimator};
use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::robustness::kbar_random;
use prlab_core::training::*;
use prlab_core::transport::{jemd, JemdOptions};

fn train_ema(cfg: &TrainConfig, d_lr_mult: f64, ema_beta: f64) -> (Estimator, Estimator) {
    let model = gaussian_toy(1.0).unwrap();
    let data = sample_joint(&model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let mut g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
    let mut g_ema = g.clone();
    let mut g_adam = AdamState::new(&g, cfg.adam_beta1, cfg.adam_beta2);
    let mut d_adam = AdamState::new(&d, cfg.adam_beta1, cfg.adam_beta2);
    let mut batch_stream = SplitMix64::new(substream_seed(cfg.seed, "train/batches"));
    let mut batch = vec![(0.0, 0.0); cfg.batch];
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
        adam_step(&mut d_adam, &mut d, &dg, lr * d_lr_mult).unwrap();
        let eval2 = gan_step_losses(&d, &g, &batch).unwrap();
        adam_step(&mut g_adam, &mut g, &eval2.g_grads, lr).unwrap();
        for (le, l) in g_ema.layers.iter_mut().zip(&g.layers) {
            for (we, w) in le.weight.data_mut().iter_mut().zip(l.weight.data()) {
                *we = ema_beta * *we + (1.0 - ema_beta) * w;
            }
            for (be, b) in le.bias.iter_mut().zip(&l.bias) {
                *be = ema_beta * *be + (1.0 - ema_beta) * b;
            }
        }
    }
    (Estimator::from_trained_mlp(g).unwrap(), Estimator::from_trained_mlp(g_ema).unwrap())
}

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let opts = JemdOptions::default();
    println!("mmse jemd {:.4}", jemd(&make_mmse(&model), &model, 2000, 4242, &opts).unwrap());
    println!("dmax jemd {:.4}", jemd(&make_dmax(&model), &model, 2000, 4242, &opts).unwrap());
    for (r1, dmult, ema) in [(0.1f64, 4.0f64, 0.999f64), (0.1, 4.0, 0.9995), (0.3, 2.0, 0.999)] {
        for lambda in [0.0, 10.0] {
            for seed in [0u64, 1] {
                let cfg = TrainConfig { lambda, seed, r1_coeff: r1, ..TrainConfig::default() };
                let (last, ema_est) = train_ema(&cfg, dmult, ema);
                let jl = jemd(&last, &model, 2000, 4242, &opts).unwrap();
                let je = jemd(&ema_est, &model, 2000, 4242, &opts).unwrap();
                let ke = kbar_random(&ema_est, &model, 1000, 0.2, 7).unwrap();
                println!("r1={r1} dx{dmult} ema={ema} lam={lambda:>4} seed={seed}: last {jl:.3} ema {je:.3} kbar(ema) {ke:.2}");
            }
        }
    }
}
