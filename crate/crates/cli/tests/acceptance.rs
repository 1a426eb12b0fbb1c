//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `--nocapture`) and asserting its stated tolerances and
//! runtime budget.
//!
//! Heavy criteria serialize on a shared lock so wall-clock budgets are
//! meaningful on small machines.

use prlab_core::analytics::{
    conditional_mse_closed, conditional_mse_mc, residual_diagnostics, spearman, tradeoff_sweep,
    ClosedFormKind, SweepFamily, SweepOptions,
};
use prlab_core::estimators::{make_dmax, make_mmse, make_posterior_sampler, make_zigzag};
use prlab_core::linalg::Matrix;
use prlab_core::model::{discrete_model, gaussian_toy, DiscreteJointModel};
use prlab_core::oracle::{verify_theorem, GammaPolicy};
use prlab_core::rng::{substream_seed, SplitMix64};
use prlab_core::robustness::{fps_explore, AttackConfig, FpsLossMode};
use prlab_core::training::{
    gan_step_losses, init_mlp, mlp_backward, mlp_forward, r1_penalty, robustness_loss, MlpArch,
    TrainConfig, AFFINE_LAYERS,
};
use prlab_core::transport::{
    cost_matrix, exact_ot, gaussian_w2, jemd, median_positive, sinkhorn, w1_sorted_1d, Ground,
    JemdOptions, WeightedPointSet,
};
use std::sync::Mutex;
use std::time::{Duration, Instant};

static HEAVY: Mutex<()> = Mutex::new(());

fn report(criterion: u32, name: &str, ok: bool, detail: &str, elapsed: Duration) {
    println!(
        "ACCEPTANCE {criterion:02} ({name}): {} — {detail} [{:.1}s]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

fn random_cloud(rng: &mut SplitMix64, n: usize, d: usize, shift: f64) -> WeightedPointSet {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|k| rng.next_normal() + if k == 0 { shift } else { 0.0 })
                .collect()
        })
        .collect();
    WeightedPointSet::uniform(Matrix::from_rows(&rows)).unwrap()
}

/// Minimum over all permutation couplings of an equal-weight instance.
fn brute_force_assignment(cost: &Matrix) -> f64 {
    fn recurse(cost: &Matrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        let n = cost.rows();
        if row == n {
            *best = best.min(acc);
            return;
        }
        if acc >= *best {
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                recurse(cost, row + 1, used, acc + cost.get(row, j), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    recurse(cost, 0, &mut vec![false; cost.rows()], 0.0, &mut best);
    best / cost.rows() as f64
}

#[test]
fn criterion_01_exact_ot_correctness() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(101);
    let mut worst = 0.0f64;

    // 500 random equal-weight instances, n <= 6, d <= 2, against the
    // permutation brute force.
    for _ in 0..500 {
        let n = 1 + rng.next_below(6) as usize;
        let d = 1 + rng.next_below(2) as usize;
        let ground = if rng.next_below(2) == 0 { Ground::L1 } else { Ground::L2 };
        let p = if rng.next_below(2) == 0 { 1 } else { 2 };
        let shift = rng.next_normal();
        let a = random_cloud(&mut rng, n, d, 0.0);
        let b = random_cloud(&mut rng, n, d, shift);
        let cost = cost_matrix(&a, &b, ground, p).unwrap();
        let solver = exact_ot(a.weights(), b.weights(), &cost).unwrap().cost;
        let oracle = brute_force_assignment(&cost);
        worst = worst.max((solver - oracle).abs());
    }

    // 100 random 1-D instances, n = 256, against the sorted-order oracle.
    for _ in 0..100 {
        let n = 256;
        let xs: Vec<f64> = (0..n).map(|_| rng.next_normal() * 2.0).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.next_normal() + 0.5).collect();
        let a = WeightedPointSet::uniform(Matrix::from_rows(
            &xs.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
        ))
        .unwrap();
        let b = WeightedPointSet::uniform(Matrix::from_rows(
            &ys.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
        ))
        .unwrap();
        let cost = cost_matrix(&a, &b, Ground::L1, 1).unwrap();
        let solver = exact_ot(a.weights(), b.weights(), &cost).unwrap().cost;
        let oracle = w1_sorted_1d(&xs, &ys).unwrap();
        worst = worst.max((solver - oracle).abs());
    }

    let elapsed = start.elapsed();
    let ok = worst < 1e-9 && elapsed < Duration::from_secs(30);
    report(1, "exact OT vs brute force and sorted oracle", ok,
        &format!("max deviation {worst:.2e}"), elapsed);
    assert!(ok, "worst deviation {worst}, elapsed {elapsed:?}");
}

#[test]
fn criterion_02_gaussian_w2_oracle() {
    let _guard = HEAVY.lock().unwrap();
    let start = Instant::now();
    let closed = gaussian_w2(
        &[0.0, 0.0],
        &Matrix::identity(2),
        &[1.0, 0.0],
        &Matrix::identity(2),
    )
    .unwrap();
    assert!((closed - 1.0).abs() < 1e-12);

    let mut worst_rel = 0.0f64;
    for seed in 0..5u64 {
        let mut rng = SplitMix64::new(1000 + seed);
        let a = random_cloud(&mut rng, 4096, 2, 0.0);
        let b = random_cloud(&mut rng, 4096, 2, 1.0);
        let cost = cost_matrix(&a, &b, Ground::L2, 2).unwrap();
        let w2 = exact_ot(a.weights(), b.weights(), &cost).unwrap().wp(2);
        worst_rel = worst_rel.max((w2 - closed).abs() / closed);
    }
    let elapsed = start.elapsed();
    let ok = worst_rel < 0.05 && elapsed < Duration::from_secs(120);
    report(2, "empirical W2 vs Gaussian closed form", ok,
        &format!("max relative error {worst_rel:.4}"), elapsed);
    assert!(ok, "worst rel {worst_rel}, elapsed {elapsed:?}");
}

#[test]
fn criterion_03_sinkhorn_accuracy() {
    let _guard = HEAVY.lock().unwrap();
    let start = Instant::now();
    let mut rng = SplitMix64::new(303);
    let mut worst_rel = 0.0f64;
    for _ in 0..20 {
        let n = 512;
        let a_pts = random_cloud(&mut rng, n, 2, 0.0);
        let b_pts = random_cloud(&mut rng, n, 2, 0.7);
        // Random positive weights exercise the network-simplex route on the
        // exact side.
        let normalize = |raw: Vec<f64>| {
            let s: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let total: f64 = w.iter().sum();
            w[0] += 1.0 - total;
            w
        };
        let mu = normalize((0..n).map(|_| 0.5 + rng.next_unit_open()).collect());
        let nu = normalize((0..n).map(|_| 0.5 + rng.next_unit_open()).collect());
        let cost = cost_matrix(&a_pts, &b_pts, Ground::L2, 1).unwrap();
        let exact = exact_ot(&mu, &nu, &cost).unwrap().cost;
        let eps = 1e-2 * median_positive(cost.data());
        let approx = sinkhorn(&mu, &nu, &cost, eps, 200_000, 1e-9).unwrap();
        assert!(approx.converged, "sinkhorn failed to converge");
        worst_rel = worst_rel.max((approx.cost - exact).abs() / exact);
    }
    let elapsed = start.elapsed();
    let ok = worst_rel < 0.02;
    report(3, "sinkhorn vs exact at 1% median epsilon", ok,
        &format!("max relative error {worst_rel:.4}"), elapsed);
    assert!(ok, "worst rel {worst_rel}");
}

fn random_noninvertible_4x4(rng: &mut SplitMix64) -> DiscreteJointModel {
    let mut pmf = vec![vec![0.0; 4]; 4];
    let mut total = 0.0;
    for row in pmf.iter_mut() {
        for cell in row.iter_mut() {
            *cell = 0.05 + rng.next_unit_open();
            total += *cell;
        }
    }
    let mut acc = 0.0;
    for row in pmf.iter_mut() {
        for cell in row.iter_mut() {
            *cell /= total;
            acc += *cell;
        }
    }
    pmf[0][0] += 1.0 - acc;
    discrete_model(
        vec![0.0, 1.0, 2.0, 3.0],
        vec![0.0, 1.0, 2.0, 3.0],
        pmf,
    )
    .unwrap()
}

#[test]
fn criterion_04_theorem_oracle_exhaustive() {
    let start = Instant::now();
    let uniform = discrete_model(
        vec![0.0, 1.0],
        vec![0.0, 1.0],
        vec![vec![0.25, 0.25], vec![0.25, 0.25]],
    )
    .unwrap();

    let mut all_ok = true;
    let mut min_wp_seen = f64::INFINITY;
    let mut models: Vec<(String, DiscreteJointModel)> = vec![("uniform2x2".into(), uniform)];
    let mut rng = SplitMix64::new(404);
    for k in 0..10 {
        models.push((format!("random4x4/{k}"), random_noninvertible_4x4(&mut rng)));
    }
    for (name, model) in &models {
        let model_start = Instant::now();
        for p in [1u32, 2] {
            match verify_theorem(model, p, GammaPolicy::Global) {
                Ok(report) => {
                    assert!(report.all_satisfied);
                    min_wp_seen = min_wp_seen.min(report.min_wp);
                    if !(report.min_wp > 0.0) {
                        all_ok = false;
                    }
                }
                Err(e) => {
                    println!("  model {name} p={p} failed verification: {e}");
                    all_ok = false;
                }
            }
        }
        if model_start.elapsed() > Duration::from_secs(60) {
            all_ok = false;
        }
    }

    // Exit-status check through the binary on the uniform model.
    let dir = std::env::temp_dir().join(format!("prlab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model_path = dir.join("uniform2x2.json");
    std::fs::write(
        &model_path,
        r#"{"x_vals": [0.0, 1.0], "y_vals": [0.0, 1.0], "pmf": [[0.25, 0.25], [0.25, 0.25]]}"#,
    )
    .unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_prlab"))
        .args(["oracle", "--model"])
        .arg(&model_path)
        .arg("--out-dir")
        .arg(&dir)
        .status()
        .expect("oracle command runs");
    if !status.success() {
        all_ok = false;
    }
    std::fs::remove_dir_all(&dir).ok();

    let elapsed = start.elapsed();
    report(4, "exhaustive Lipschitz-bound verification", all_ok,
        &format!("11 models x p in {{1,2}}, min W_p {min_wp_seen:.4}, exit {status}"), elapsed);
    assert!(all_ok);
}

#[test]
fn criterion_05_zigzag_tradeoff() {
    let _guard = HEAVY.lock().unwrap();
    let start = Instant::now();
    let model = gaussian_toy(1.0).unwrap();
    let family = SweepFamily::Zigzag {
        deltas: vec![1.0, 0.5, 0.25, 0.125, 0.0625],
        q_clip: 1e-3,
    };
    let opts = SweepOptions {
        n_metric: 2000,
        n_probe: 1000,
        seeds: vec![0, 1, 2],
        threads: 2,
        ..SweepOptions::default()
    };
    let outcome = tradeoff_sweep(&family, &model, &opts).unwrap();

    let mut ok = outcome.cells.iter().all(|c| c.status == "ok");
    let mut detail = String::new();
    // Per-seed strict monotonicity along the grid plus the bound-direction
    // product check.
    for &seed in &opts.seeds {
        let cells: Vec<_> = outcome
            .cells
            .iter()
            .filter(|c| c.seed == seed)
            .filter_map(|c| c.point.as_ref())
            .collect();
        assert_eq!(cells.len(), 5);
        for w in cells.windows(2) {
            if !(w[1].jemd < w[0].jemd) {
                ok = false;
                detail = format!("seed {seed}: JEMD not strictly decreasing");
            }
            if !(w[1].kbar > w[0].kbar) {
                ok = false;
                detail = format!("seed {seed}: K-bar not strictly increasing");
            }
            let product_prev = w[0].kbar * w[0].jemd.sqrt();
            let product_next = w[1].kbar * w[1].jemd.sqrt();
            if !(product_next >= product_prev) {
                ok = false;
                detail = format!("seed {seed}: K*sqrt(JEMD) decreased along the grid");
            }
        }
    }
    let elapsed = start.elapsed();
    if ok {
        detail = format!(
            "15 cells ok; seed-mean endpoints jemd {:.3}->{:.3}",
            outcome.seed_averages().first().unwrap().1,
            outcome.seed_averages().last().unwrap().1
        );
    }
    let ok = ok && elapsed < Duration::from_secs(600);
    report(5, "zigzag tradeoff directions", ok, &detail, elapsed);
    assert!(ok, "{detail}; elapsed {elapsed:?}");
}

#[test]
fn criterion_06_trained_lambda_tradeoff() {
    let _guard = HEAVY.lock().unwrap();
    let start = Instant::now();
    let model = gaussian_toy(1.0).unwrap();
    let base = TrainConfig::default();
    let lambdas = vec![0.0, 0.03, 0.1, 0.3, 1.0, 10.0];
    let family = SweepFamily::Lambda {
        lambdas: lambdas.clone(),
        base,
    };
    let opts = SweepOptions {
        n_metric: 2000,
        n_probe: 1000,
        seeds: vec![0, 1, 2],
        threads: 2,
        ..SweepOptions::default()
    };
    let outcome = tradeoff_sweep(&family, &model, &opts).unwrap();
    let mut ok = outcome.cells.iter().all(|c| c.status == "ok");

    let means = outcome.seed_averages();
    let controls: Vec<f64> = means.iter().map(|m| m.0).collect();
    let jemds: Vec<f64> = means.iter().map(|m| m.1).collect();
    let kbars: Vec<f64> = means.iter().map(|m| m.2).collect();
    let rho_k = spearman(&controls, &kbars);
    let rho_j = spearman(&controls, &jemds);
    if !(rho_k <= -0.8) || !(rho_j >= 0.8) {
        ok = false;
    }

    // The lambda = 0 estimator must beat the analytic MMSE line on the same
    // evaluation sample (same metric substreams as the sweep cells).
    let mut lambda0_wins = 0;
    for &seed in &opts.seeds {
        let metric_seed = substream_seed(seed, "sweep/metric");
        let mmse_jemd = jemd(&make_mmse(&model), &model, opts.n_metric, metric_seed, &opts.jemd).unwrap();
        let cell = outcome
            .cells
            .iter()
            .find(|c| c.control == 0.0 && c.seed == seed)
            .and_then(|c| c.point.as_ref())
            .expect("lambda=0 cell");
        if cell.jemd < mmse_jemd {
            lambda0_wins += 1;
        }
    }
    if lambda0_wins < opts.seeds.len() {
        ok = false;
    }

    let elapsed = start.elapsed();
    let ok = ok && elapsed < Duration::from_secs(1800);
    report(6, "trained lambda tradeoff (desk scale)", ok,
        &format!(
            "spearman(lambda,kbar) {rho_k:.2}, spearman(lambda,jemd) {rho_j:.2}, lambda0 beats mmse on {lambda0_wins}/3 seeds"
        ),
        elapsed);
    assert!(ok, "rho_k {rho_k}, rho_j {rho_j}, wins {lambda0_wins}, elapsed {elapsed:?}");
}

#[test]
fn criterion_07_conditional_mse() {
    let start = Instant::now();
    let n = 100_000;
    let mut worst_sigma = 0.0f64;
    for (si, &sigma) in [0.5f64, 1.0, 2.0].iter().enumerate() {
        let model = gaussian_toy(sigma).unwrap();
        let estimators = [
            (ClosedFormKind::Mmse, make_mmse(&model)),
            (ClosedFormKind::Dmax, make_dmax(&model)),
            (
                ClosedFormKind::PosteriorSampler,
                make_posterior_sampler(&model, 900 + si as u64),
            ),
        ];
        for (kind, est) in &estimators {
            for (yi, &y) in [0.0f64, 1.0, 2.0, 3.0].iter().enumerate() {
                let closed = conditional_mse_closed(*kind, &model, y);
                let seed = 7000 + (si * 16 + yi) as u64;
                let mc = conditional_mse_mc(est, &model, y, n, seed).unwrap();
                // SE of the MC mean of a chi-square-like variable.
                let se = closed * (2.0f64 / n as f64).sqrt() * 1.5;
                let dev = (mc - closed).abs() / se;
                worst_sigma = worst_sigma.max(dev);
            }
        }
        // Exact closed-form identities.
        for y in [-2.0, 0.0, 0.7, 3.0] {
            let mmse = conditional_mse_closed(ClosedFormKind::Mmse, &model, y);
            let sampler = conditional_mse_closed(ClosedFormKind::PosteriorSampler, &model, y);
            let dmax = conditional_mse_closed(ClosedFormKind::Dmax, &model, y);
            assert!((sampler - 2.0 * mmse).abs() < 1e-12);
            let s = 1.0 + sigma * sigma;
            let excess = ((s.sqrt() - 1.0) / s).powi(2) * y * y;
            assert!((dmax - mmse - excess).abs() < 1e-12);
        }
    }
    let elapsed = start.elapsed();
    let ok = worst_sigma < 3.0;
    report(7, "conditional MSE closed forms vs Monte Carlo", ok,
        &format!("worst deviation {worst_sigma:.2} standard errors"), elapsed);
    assert!(ok, "worst {worst_sigma} SE");
}

#[test]
fn criterion_08_residual_diagnostics() {
    let start = Instant::now();
    let model = gaussian_toy(1.0).unwrap();
    let n = 10_000;
    let mut sampler_ok = 0;
    for seed in 0..5u64 {
        let sampler = make_posterior_sampler(&model, 5000 + seed);
        let rep = residual_diagnostics(&sampler, &model, n, 100 + seed).unwrap();
        if rep.ks_pvalue > 0.01 && rep.pearson_corr.abs() < 0.05 {
            sampler_ok += 1;
        }
    }
    let mmse = residual_diagnostics(&make_mmse(&model), &model, n, 9).unwrap();
    let dmax = residual_diagnostics(&make_dmax(&model), &model, n, 9).unwrap();
    let linear_ok =
        (mmse.pearson_corr - 1.0).abs() < 1e-9 && (dmax.pearson_corr - 1.0).abs() < 1e-9;

    let elapsed = start.elapsed();
    let ok = sampler_ok >= 4 && linear_ok;
    report(8, "residual noise diagnostics", ok,
        &format!("sampler clean on {sampler_ok}/5 seeds; linear corr 1 to 1e-9: {linear_ok}"), elapsed);
    assert!(ok);
}

#[test]
fn criterion_09_gradient_integrity() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(909);
    let mut configs = 0;
    let mut worst_det = 0.0f64; // deterministic paths, budget 1e-4
    let mut worst_sto = 0.0f64; // frozen-noise stochastic paths, budget 1e-3

    // MLP backward on random nets (deterministic).
    for seed in 0..10u64 {
        let mut params = init_mlp(MlpArch::discriminator(), 7000 + seed);
        let input = {
            let mut m = Matrix::zeros(4, 2);
            for v in m.data_mut() {
                *v = rng.next_normal();
            }
            m
        };
        let grad_out = {
            let mut m = Matrix::zeros(4, 1);
            for v in m.data_mut() {
                *v = rng.next_normal();
            }
            m
        };
        let (_, cache) = mlp_forward(&params, &input).unwrap();
        let grads = mlp_backward(&params, &cache, &grad_out).unwrap();
        for _ in 0..2 {
            let l = rng.next_below(AFFINE_LAYERS as u64) as usize;
            let len = params.layers[l].weight.data().len();
            let idx = rng.next_below(len as u64) as usize;
            let h = 1e-6;
            let objective = |p: &prlab_core::training::MlpParams| -> f64 {
                let (out, _) = mlp_forward(p, &input).unwrap();
                out.data().iter().zip(grad_out.data()).map(|(a, b)| a * b).sum()
            };
            let orig = params.layers[l].weight.data()[idx];
            params.layers[l].weight.data_mut()[idx] = orig + h;
            let plus = objective(&params);
            params.layers[l].weight.data_mut()[idx] = orig - h;
            let minus = objective(&params);
            params.layers[l].weight.data_mut()[idx] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let an = grads.layers[l].weight.data()[idx];
            worst_det = worst_det.max((fd - an).abs() / an.abs().max(fd.abs()).max(1e-6));
            configs += 1;
        }
    }

    // R1 stencil parameter gradients (deterministic objective).
    for seed in 0..10u64 {
        let mut d = init_mlp(MlpArch::discriminator(), 8000 + seed);
        let batch: Vec<(f64, f64)> = (0..6).map(|_| (rng.next_normal(), rng.next_normal())).collect();
        let (_, grads) = r1_penalty(&d, &batch, 1e-4, 1.0).unwrap();
        let l = rng.next_below(AFFINE_LAYERS as u64) as usize;
        let len = d.layers[l].weight.data().len();
        let idx = rng.next_below(len as u64) as usize;
        let h = 1e-6;
        let orig = d.layers[l].weight.data()[idx];
        d.layers[l].weight.data_mut()[idx] = orig + h;
        let plus = r1_penalty(&d, &batch, 1e-4, 1.0).unwrap().0;
        d.layers[l].weight.data_mut()[idx] = orig - h;
        let minus = r1_penalty(&d, &batch, 1e-4, 1.0).unwrap().0;
        d.layers[l].weight.data_mut()[idx] = orig;
        let fd = (plus - minus) / (2.0 * h);
        let an = grads.layers[l].weight.data()[idx];
        worst_det = worst_det.max((fd - an).abs() / an.abs().max(fd.abs()).max(1e-4));
        configs += 1;
    }

    // Adversarial (GAN) losses and the frozen-noise robustness loss.
    for seed in 0..10u64 {
        let mut d = init_mlp(MlpArch::discriminator(), 8100 + seed);
        let mut g = init_mlp(MlpArch::generator(), 8200 + seed);
        let batch: Vec<(f64, f64)> = (0..8).map(|_| (rng.next_normal(), rng.next_normal())).collect();
        let eval = gan_step_losses(&d, &g, &batch).unwrap();
        let h = 1e-5;
        {
            let l = rng.next_below(AFFINE_LAYERS as u64) as usize;
            let len = d.layers[l].weight.data().len();
            let idx = rng.next_below(len as u64) as usize;
            let orig = d.layers[l].weight.data()[idx];
            d.layers[l].weight.data_mut()[idx] = orig + h;
            let plus = gan_step_losses(&d, &g, &batch).unwrap().d_loss;
            d.layers[l].weight.data_mut()[idx] = orig - h;
            let minus = gan_step_losses(&d, &g, &batch).unwrap().d_loss;
            d.layers[l].weight.data_mut()[idx] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let an = eval.d_grads.layers[l].weight.data()[idx];
            worst_sto = worst_sto.max((fd - an).abs() / an.abs().max(fd.abs()).max(1e-4));
            configs += 1;
        }
        {
            let ys: Vec<f64> = batch.iter().map(|p| p.1).collect();
            let noise_seed = 9900 + seed;
            let (_, grads) =
                robustness_loss(&g, &ys, 0.2, &mut SplitMix64::new(noise_seed)).unwrap();
            let l = rng.next_below(AFFINE_LAYERS as u64) as usize;
            let len = g.layers[l].weight.data().len();
            let idx = rng.next_below(len as u64) as usize;
            let orig = g.layers[l].weight.data()[idx];
            g.layers[l].weight.data_mut()[idx] = orig + h;
            let plus = robustness_loss(&g, &ys, 0.2, &mut SplitMix64::new(noise_seed)).unwrap().0;
            g.layers[l].weight.data_mut()[idx] = orig - h;
            let minus = robustness_loss(&g, &ys, 0.2, &mut SplitMix64::new(noise_seed)).unwrap().0;
            g.layers[l].weight.data_mut()[idx] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let an = grads.layers[l].weight.data()[idx];
            worst_sto = worst_sto.max((fd - an).abs() / an.abs().max(fd.abs()).max(1e-4));
            configs += 1;
        }
    }

    let elapsed = start.elapsed();
    let ok = configs >= 50 && worst_det < 1e-4 && worst_sto < 1e-3;
    report(9, "analytic gradients vs finite differences", ok,
        &format!("{configs} configs; worst deterministic {worst_det:.2e}, worst frozen-noise {worst_sto:.2e}"),
        elapsed);
    assert!(ok, "det {worst_det}, sto {worst_sto}, configs {configs}");
}

#[test]
fn criterion_10_fps_exploration() {
    let start = Instant::now();
    let model = gaussian_toy(1.0).unwrap();
    let alpha = 0.1;
    let cfg = AttackConfig::new(alpha, 30).unwrap();
    let y = 0.2;

    // First sample equals f(y) bit-exactly, no attack performed.
    let zig = make_zigzag(&model, 0.05, 1e-3).unwrap();
    let clean = zig.evaluate(&[y]).unwrap();
    let harvest = fps_explore(&zig, &[y], 5, &cfg, FpsLossMode::AllPrevious).unwrap();
    let first_exact = harvest[0].1 == clean && harvest[0].0 == vec![y];

    let spread = |h: &[(Vec<f64>, Vec<f64>)]| {
        let mut s = 0.0f64;
        for i in 0..h.len() {
            for j in (i + 1)..h.len() {
                s = s.max((h[i].1[0] - h[j].1[0]).abs());
            }
        }
        s
    };
    let zig_spread = spread(&harvest);
    let ball_ok = harvest.iter().all(|(y_adv, _)| (y_adv[0] - y).abs() <= alpha + 1e-12);

    let mmse = make_mmse(&model);
    let mmse_harvest = fps_explore(&mmse, &[y], 5, &cfg, FpsLossMode::AllPrevious).unwrap();
    let mmse_spread = spread(&mmse_harvest);
    let mmse_ball_ok = mmse_harvest
        .iter()
        .all(|(y_adv, _)| (y_adv[0] - y).abs() <= alpha + 1e-12);

    let elapsed = start.elapsed();
    let ok = first_exact && zig_spread >= 1.0 && mmse_spread <= 2.0 * 0.5 * alpha + 1e-12 && ball_ok && mmse_ball_ok;
    report(10, "farthest-point posterior exploration", ok,
        &format!("zigzag spread {zig_spread:.2}, linear spread {mmse_spread:.3}"), elapsed);
    assert!(ok, "first_exact {first_exact}, zig {zig_spread}, mmse {mmse_spread}");
}
