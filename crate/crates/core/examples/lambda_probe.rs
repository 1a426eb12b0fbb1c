use prlab_core::analytics::{spearman, tradeoff_sweep, SweepFamily, SweepOptions};
use prlab_core::estimators::make_mmse;
use prlab_core::model::gaussian_toy;
use prlab_core::rng::substream_seed;
use prlab_core::training::TrainConfig;
use prlab_core::transport::{jemd, JemdOptions};
use std::time::Instant;

fn main() {
    let model = gaussian_toy(1.0).unwrap();
    let t0 = Instant::now();
    let family = SweepFamily::Lambda {
        lambdas: vec![0.0, 0.03, 0.1, 0.3, 1.0, 10.0],
        base: TrainConfig::default(),
    };
    let opts = SweepOptions {
        n_metric: 2000,
        n_probe: 1000,
        seeds: vec![0, 1, 2],
        threads: 2,
        ..SweepOptions::default()
    };
    let outcome = tradeoff_sweep(&family, &model, &opts).unwrap();
    println!("sweep done in {:.0}s", t0.elapsed().as_secs_f64());
    print!("{}", outcome.to_csv());
    let means = outcome.seed_averages();
    let controls: Vec<f64> = means.iter().map(|m| m.0).collect();
    let jemds: Vec<f64> = means.iter().map(|m| m.1).collect();
    let kbars: Vec<f64> = means.iter().map(|m| m.2).collect();
    println!("spearman(lambda, kbar) = {:.3}", spearman(&controls, &kbars));
    println!("spearman(lambda, jemd) = {:.3}", spearman(&controls, &jemds));
    // MMSE baseline JEMD on the same metric streams as the sweep cells.
    for seed in [0u64, 1, 2] {
        let metric_seed = substream_seed(seed, "sweep/metric");
        let j = jemd(&make_mmse(&model), &model, 2000, metric_seed, &JemdOptions::default()).unwrap();
        println!("jemd(mmse) seed {seed} = {j:.4}");
    }
}
