use prlab_core::model::{gaussian_toy, sample_joint};
use prlab_core::rng::SplitMix64;
use prlab_core::training::*;
use prlab_core::linalg::Matrix;
use prlab_core::rng::substream_seed;

fn audit(params: &MlpParams, inputs: &Matrix, label: &str) {
    let (_, cache) = mlp_forward(params, inputs).unwrap();
    print!("{label}: active units per hidden layer:");
    for l in 1..AFFINE_LAYERS {
        let act = cache_activations(&cache, l);
        let width = act.cols();
        let mut active = 0;
        for j in 0..width {
            let any = (0..act.rows()).any(|b| act.get(b, j) > 0.0);
            if any { active += 1; }
        }
        print!(" {active}/{width}");
    }
    println!();
}

// Reach into the cache via its public output accessor workaround: re-run
// layer by layer manually instead.
fn cache_activations(cache: &ForwardCache, l: usize) -> &Matrix {
    cache.activations(l)
}

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let cfg = TrainConfig { steps: 4000, lambda: 0.0, seed: 1, ..TrainConfig::default() };
    // Re-run the training loop manually to keep both nets (train_denoiser
    // only returns the generator).
    let data = sample_joint(&model, cfg.n_train, substream_seed(cfg.seed, "train/data")).unwrap();
    let mut g = init_mlp(MlpArch::generator(), substream_seed(cfg.seed, "train/init/g"));
    let mut d = init_mlp(MlpArch::discriminator(), substream_seed(cfg.seed, "train/init/d"));
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
        adam_step(&mut d_adam, &mut d, &dg, lr).unwrap();
        let eval2 = gan_step_losses(&d, &g, &batch).unwrap();
        adam_step(&mut g_adam, &mut g, &eval2.g_grads, lr).unwrap();
    }
    let probe_g = Matrix::from_rows(&(0..256).map(|i| vec![-3.0 + 6.0 * i as f64 / 255.0]).collect::<Vec<_>>());
    let mut rows_d = Vec::new();
    for &(x, y) in data.pairs.iter().take(256) { rows_d.push(vec![x, y]); }
    let probe_d = Matrix::from_rows(&rows_d);
    audit(&g, &probe_g, "generator");
    audit(&d, &probe_d, "discriminator");
    // Discriminator response range over real pairs.
    let (out, _) = mlp_forward(&d, &probe_d).unwrap();
    let lo = out.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = out.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("discriminator logit range over real pairs: [{lo:.3}, {hi:.3}]");
}
