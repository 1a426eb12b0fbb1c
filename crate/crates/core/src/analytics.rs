//! Closed-form and Monte-Carlo analytics: conditional MSE, residual-noise
//! diagnostics, and the tradeoff sweep runner.

use crate::error::{Error, Result};
use crate::estimators::{make_zigzag, Estimator};
use crate::model::{posterior_params, sample_joint, GaussianToyModel};
use crate::rng::{substream_seed, SplitMix64};
use crate::robustness::{kbar_random, TradeoffPoint};
use crate::special::{kolmogorov_sf, norm_cdf};
use crate::svg::{render_chart, ChartConfig, Series};
use crate::training::{train_denoiser, TrainConfig};
use crate::transport::{jemd, JemdOptions};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Estimators with a closed-form conditional MSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedFormKind {
    Mmse,
    PosteriorSampler,
    Dmax,
}

/// Exact conditional MSE `E[(X - Xhat)^2 | Y = y]`:
///
/// - MMSE: `1 - 1/(1 + s^2)` (the posterior variance, constant in y);
/// - posterior sampler: twice the posterior variance;
/// - Dmax: posterior variance plus `((sqrt(1+s^2)-1)/(1+s^2))^2 * y^2`.
pub fn conditional_mse_closed(kind: ClosedFormKind, model: &GaussianToyModel, y: f64) -> f64 {
    let s = model.y_variance();
    let posterior_var = 1.0 - 1.0 / s;
    match kind {
        ClosedFormKind::Mmse => posterior_var,
        ClosedFormKind::PosteriorSampler => 2.0 * posterior_var,
        ClosedFormKind::Dmax => {
            let coeff = (s.sqrt() - 1.0) / s;
            posterior_var + coeff * coeff * y * y
        }
    }
}

/// Monte-Carlo conditional MSE at a fixed measurement: draws `n` posterior
/// samples `x ~ p(X | Y=y)` and averages `(x - f(y))^2`. The stochastic
/// reference redraws its output on every trial.
pub fn conditional_mse_mc(
    estimator: &Estimator,
    model: &GaussianToyModel,
    y: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "sample count must be at least 1"));
    }
    let (mean, var) = posterior_params(model, y);
    let sd = var.sqrt();
    let mut rng = SplitMix64::new(seed);
    let mut total = 0.0;
    if estimator.is_stochastic() {
        for _ in 0..n {
            let x = mean + sd * rng.next_normal();
            let xhat = estimator.evaluate(&[y])?[0];
            total += (x - xhat) * (x - xhat);
        }
    } else {
        let xhat = estimator.evaluate(&[y])?[0];
        for _ in 0..n {
            let x = mean + sd * rng.next_normal();
            total += (x - xhat) * (x - xhat);
        }
    }
    Ok(total / n as f64)
}

/// One-sample Kolmogorov-Smirnov test against an arbitrary CDF.
///
/// Returns the sup-norm statistic and the asymptotic p-value
/// `Q(sqrt(n) * D)` from the Kolmogorov series.
pub fn ks_statistic<C: Fn(f64) -> f64>(sample: &[f64], cdf: C) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::invalid("sample", "must be nonempty"));
    }
    let n = sample.len();
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut stat: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        stat = stat.max((f - i as f64 / nf).abs());
        stat = stat.max(((i + 1) as f64 / nf - f).abs());
    }
    Ok((stat, kolmogorov_sf(nf.sqrt() * stat)))
}

/// Residual-noise diagnostics of an estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// KS statistic of `n_hat = y - x_hat` against `N(0, sigma_n^2)`.
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    /// Pearson correlation between the residual and the output.
    pub pearson_corr: f64,
    pub n: usize,
}

/// Draws `(x, y)` pairs, forms `x_hat` and the residual `n_hat = y - x_hat`,
/// and reports how well the residual matches the true noise law plus how
/// strongly it correlates with the output. A posterior sampler separates
/// signal from noise (residual ~ N(0, sigma_n^2), independent of the
/// output); any linear deterministic estimator has correlation exactly 1.
pub fn residual_diagnostics(
    estimator: &Estimator,
    model: &GaussianToyModel,
    n: usize,
    seed: u64,
) -> Result<ResidualReport> {
    if n < 100 {
        return Err(Error::invalid("n", "need at least 100 samples"));
    }
    let sample = sample_joint(model, n, seed)?;
    let mut residuals = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    for &(_, y) in &sample.pairs {
        let xhat = estimator.evaluate(&[y])?[0];
        residuals.push(y - xhat);
        outputs.push(xhat);
    }
    let sigma_n = model.sigma_n();
    let (stat, pvalue) = ks_statistic(&residuals, |t| norm_cdf(t / sigma_n))?;
    Ok(ResidualReport {
        ks_statistic: stat,
        ks_pvalue: pvalue,
        pearson_corr: pearson(&residuals, &outputs),
        n,
    })
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// Spearman rank correlation (average ranks on ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// The family a tradeoff sweep ranges over.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepFamily {
    /// Analytic zigzag estimators over a grid of bin widths.
    Zigzag { deltas: Vec<f64>, q_clip: f64 },
    /// Trained denoisers over a grid of robustness coefficients.
    Lambda { lambdas: Vec<f64>, base: TrainConfig },
}

impl SweepFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SweepFamily::Zigzag { .. } => "zigzag",
            SweepFamily::Lambda { .. } => "lambda",
        }
    }

    pub fn controls(&self) -> &[f64] {
        match self {
            SweepFamily::Zigzag { deltas, .. } => deltas,
            SweepFamily::Lambda { lambdas, .. } => lambdas,
        }
    }
}

/// Sweep configuration knobs.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Points per JEMD measurement.
    pub n_metric: usize,
    /// Probe inputs per Lipschitz lower bound.
    pub n_probe: usize,
    pub seeds: Vec<u64>,
    pub jemd: JemdOptions,
    /// Probe perturbation variance for trained estimators.
    pub probe_sigma_z2: f64,
    /// Zigzag probes perturb at `(scale * delta)^2` so the bound tracks the
    /// within-bin slope across the whole grid.
    pub zigzag_probe_scale: f64,
    /// Worker threads (cells are independent; ordering of the output does
    /// not depend on scheduling).
    pub threads: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            n_metric: 2000,
            n_probe: 1000,
            seeds: vec![0, 1, 2],
            jemd: JemdOptions::default(),
            probe_sigma_z2: 0.2,
            zigzag_probe_scale: 0.05,
            threads: std::thread::available_parallelism().map_or(1, |p| p.get()),
        }
    }
}

/// One sweep cell outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub control: f64,
    pub seed: u64,
    /// Present unless the cell failed.
    pub point: Option<TradeoffPoint>,
    /// `"ok"` or `"diverged:<step>"`.
    pub status: String,
}

/// Full sweep result, ordered by grid position then seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub family: String,
    pub cells: Vec<SweepCell>,
}

impl SweepOutcome {
    /// Seed-averaged `(control, mean jemd, mean kbar)` over successful
    /// cells, in grid order.
    pub fn seed_averages(&self) -> Vec<(f64, f64, f64)> {
        let mut order: Vec<f64> = Vec::new();
        let mut acc: BTreeMap<u64, (f64, f64, f64, f64)> = BTreeMap::new();
        for cell in &self.cells {
            if !order.contains(&cell.control) {
                order.push(cell.control);
            }
            if let Some(p) = &cell.point {
                let key = cell.control.to_bits();
                let entry = acc.entry(key).or_insert((0.0, 0.0, 0.0, cell.control));
                entry.0 += p.jemd;
                entry.1 += p.kbar;
                entry.2 += 1.0;
            }
        }
        order
            .iter()
            .filter_map(|c| {
                acc.get(&c.to_bits())
                    .map(|(j, k, n, control)| (*control, j / n, k / n))
            })
            .collect()
    }

    /// CSV rows `family,control,seed,jemd,kbar,jemd_sd,kbar_sd,status`; the
    /// deviation columns hold the across-seed standard deviation of the
    /// cell's control value (repeated on every row of that control).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,control,seed,jemd,kbar,jemd_sd,kbar_sd,status\n");
        for cell in &self.cells {
            let (jemd, kbar) = cell
                .point
                .as_ref()
                .map_or((f64::NAN, f64::NAN), |p| (p.jemd, p.kbar));
            let (jsd, ksd) = self.control_sd(cell.control);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                self.family, cell.control, cell.seed, jemd, kbar, jsd, ksd, cell.status
            ));
        }
        out
    }

    fn control_sd(&self, control: f64) -> (f64, f64) {
        let points: Vec<&TradeoffPoint> = self
            .cells
            .iter()
            .filter(|c| c.control == control)
            .filter_map(|c| c.point.as_ref())
            .collect();
        if points.len() < 2 {
            return (0.0, 0.0);
        }
        let n = points.len() as f64;
        let mj = points.iter().map(|p| p.jemd).sum::<f64>() / n;
        let mk = points.iter().map(|p| p.kbar).sum::<f64>() / n;
        let vj = points.iter().map(|p| (p.jemd - mj).powi(2)).sum::<f64>() / (n - 1.0);
        let vk = points.iter().map(|p| (p.kbar - mk).powi(2)).sum::<f64>() / (n - 1.0);
        (vj.sqrt(), vk.sqrt())
    }

    /// Renders the K-bar versus JEMD chart (per-seed points plus the
    /// seed-mean line).
    pub fn to_svg(&self, log_log: bool, timestamp: Option<String>) -> String {
        let mut cells_series = Series {
            label: format!("{} cells", self.family),
            points: Vec::new(),
            color: "lightsteelblue".into(),
        };
        for cell in &self.cells {
            if let Some(p) = &cell.point {
                cells_series.points.push((p.jemd, p.kbar));
            }
        }
        let mean_series = Series {
            label: "seed mean".into(),
            points: self.seed_averages().iter().map(|&(_, j, k)| (j, k)).collect(),
            color: "crimson".into(),
        };
        let cfg = ChartConfig {
            title: format!("Lipschitz lower bound vs joint perceptual index ({})", self.family),
            x_label: "JEMD".into(),
            y_label: "K-bar".into(),
            log_x: log_log,
            log_y: log_log,
            omit_timestamp: timestamp.is_none(),
            timestamp,
        };
        render_chart(&[cells_series, mean_series], &cfg)
    }
}

/// Runs the sweep: for every control value and seed, build (or train) the
/// estimator, measure JEMD and the Lipschitz lower bound, and emit one cell.
/// Training divergence marks the cell and the sweep continues.
pub fn tradeoff_sweep(
    family: &SweepFamily,
    model: &GaussianToyModel,
    opts: &SweepOptions,
) -> Result<SweepOutcome> {
    let controls = family.controls();
    if controls.is_empty() {
        return Err(Error::invalid("family", "control grid must be nonempty"));
    }
    if opts.seeds.is_empty() {
        return Err(Error::invalid("seeds", "need at least one seed"));
    }
    if opts.n_metric == 0 || opts.n_probe == 0 {
        return Err(Error::invalid("n_metric/n_probe", "must be positive"));
    }

    let jobs: Vec<(usize, f64, u64)> = controls
        .iter()
        .enumerate()
        .flat_map(|(ci, &c)| opts.seeds.iter().map(move |&s| (ci, c, s)))
        .collect();

    let worker = |&(_, control, seed): &(usize, f64, u64)| -> Result<SweepCell> {
        run_cell(family, model, opts, control, seed)
    };

    let threads = opts.threads.clamp(1, jobs.len());
    let mut cells: Vec<Option<SweepCell>> = vec![None; jobs.len()];
    if threads <= 1 {
        for (slot, job) in cells.iter_mut().zip(&jobs) {
            *slot = Some(worker(job)?);
        }
    } else {
        let results: Vec<Result<Vec<(usize, SweepCell)>>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let jobs = &jobs;
                handles.push(scope.spawn(move || {
                    let mut mine = Vec::new();
                    for (idx, job) in jobs.iter().enumerate().skip(t).step_by(threads) {
                        mine.push((idx, worker(job)?));
                    }
                    Ok(mine)
                }));
            }
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
        });
        for batch in results {
            for (idx, cell) in batch? {
                cells[idx] = Some(cell);
            }
        }
    }

    Ok(SweepOutcome {
        family: family.name().to_string(),
        cells: cells.into_iter().map(|c| c.expect("all cells filled")).collect(),
    })
}

fn run_cell(
    family: &SweepFamily,
    model: &GaussianToyModel,
    opts: &SweepOptions,
    control: f64,
    seed: u64,
) -> Result<SweepCell> {
    let metric_seed = substream_seed(seed, "sweep/metric");
    let probe_seed = substream_seed(seed, "sweep/probe");

    let (estimator, probe_sigma_z2, status_extra) = match family {
        SweepFamily::Zigzag { q_clip, .. } => {
            let e = make_zigzag(model, control, *q_clip)?;
            let sigma = (opts.zigzag_probe_scale * control).powi(2);
            (e, sigma, BTreeMap::new())
        }
        SweepFamily::Lambda { base, .. } => {
            let mut cfg = base.clone();
            cfg.lambda = control;
            cfg.seed = substream_seed(seed, &format!("sweep/train/lambda={control}"));
            match train_denoiser(model, &cfg) {
                Ok((e, history)) => {
                    let mut aux = BTreeMap::new();
                    if let Some(last) = history.last() {
                        aux.insert("final_lr".to_string(), last.lr);
                    }
                    (e, opts.probe_sigma_z2, aux)
                }
                Err(Error::TrainingDiverged { step, which }) => {
                    return Ok(SweepCell {
                        control,
                        seed,
                        point: None,
                        status: format!("diverged:{step}:{which}"),
                    });
                }
                Err(other) => return Err(other),
            }
        }
    };

    let jemd_value = jemd(&estimator, model, opts.n_metric, metric_seed, &opts.jemd)?;
    let kbar_value = kbar_random(&estimator, model, opts.n_probe, probe_sigma_z2, probe_seed)?;

    let mut auxiliary = status_extra;
    auxiliary.insert("probe_sigma_z2".to_string(), probe_sigma_z2);
    Ok(SweepCell {
        control,
        seed,
        point: Some(TradeoffPoint {
            control,
            jemd: jemd_value,
            kbar: kbar_value,
            n_eval: opts.n_metric,
            seed,
            auxiliary,
        }),
        status: "ok".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{make_dmax, make_mmse, make_posterior_sampler};
    use crate::model::gaussian_toy;

    #[test]
    fn closed_forms_reference_values() {
        let m = gaussian_toy(1.0).unwrap();
        assert_eq!(conditional_mse_closed(ClosedFormKind::Mmse, &m, 0.0), 0.5);
        assert_eq!(conditional_mse_closed(ClosedFormKind::Mmse, &m, 7.3), 0.5);
        assert_eq!(conditional_mse_closed(ClosedFormKind::PosteriorSampler, &m, -2.0), 1.0);
        assert_eq!(conditional_mse_closed(ClosedFormKind::Dmax, &m, 0.0), 0.5);
        let at2 = conditional_mse_closed(ClosedFormKind::Dmax, &m, 2.0);
        assert!((at2 - (3.5 - 2.0 * 2.0f64.sqrt())).abs() < 1e-12, "{at2}");
    }

    #[test]
    fn closed_form_identities_hold_exactly() {
        for sigma in [0.5, 1.0, 2.0, 3.7] {
            let m = gaussian_toy(sigma).unwrap();
            for y in [-3.0, 0.0, 0.4, 2.0] {
                let mmse = conditional_mse_closed(ClosedFormKind::Mmse, &m, y);
                let sampler = conditional_mse_closed(ClosedFormKind::PosteriorSampler, &m, y);
                assert!((sampler - 2.0 * mmse).abs() < 1e-12);
                let dmax = conditional_mse_closed(ClosedFormKind::Dmax, &m, y);
                let s = 1.0 + sigma * sigma;
                let excess = ((s.sqrt() - 1.0) / s).powi(2) * y * y;
                assert!((dmax - mmse - excess).abs() < 1e-12);
                assert!(dmax >= mmse - 1e-15);
                if y != 0.0 {
                    assert!(dmax > mmse);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_matches_closed_forms() {
        let m = gaussian_toy(1.0).unwrap();
        let n = 100_000;
        let targets = [
            (ClosedFormKind::Mmse, make_mmse(&m)),
            (ClosedFormKind::Dmax, make_dmax(&m)),
            (ClosedFormKind::PosteriorSampler, make_posterior_sampler(&m, 9)),
        ];
        for (kind, est) in targets {
            for y in [0.0, 1.0, 2.0] {
                let closed = conditional_mse_closed(kind, &m, y);
                let mc = conditional_mse_mc(&est, &m, y, n, 31).unwrap();
                // SE of a squared-error mean is about sqrt(2/n) * closed.
                let se = closed * (2.0 / n as f64).sqrt() * 1.5;
                assert!(
                    (mc - closed).abs() < 3.0 * se,
                    "{kind:?} at y={y}: mc {mc} vs closed {closed}"
                );
            }
        }
    }

    #[test]
    fn monte_carlo_single_draw_is_finite() {
        let m = gaussian_toy(1.0).unwrap();
        let mc = conditional_mse_mc(&make_mmse(&m), &m, 1.0, 1, 0).unwrap();
        assert!(mc.is_finite());
        assert!(conditional_mse_mc(&make_mmse(&m), &m, 1.0, 0, 0).is_err());
    }

    #[test]
    fn ks_reference_cases() {
        // Point mass at zero against the standard normal: D = 1/2.
        let zeros = vec![0.0; 1000];
        let (stat, _) = ks_statistic(&zeros, norm_cdf).unwrap();
        assert!((stat - 0.5).abs() < 1e-12);
        assert!(ks_statistic::<fn(f64) -> f64>(&[], norm_cdf).is_err());
    }

    #[test]
    fn ks_null_distribution_behaves() {
        // Samples genuinely drawn from the target: p-value should rarely be
        // tiny. 95+ of 100 seeds must clear 0.01.
        let mut clear = 0;
        for seed in 0..100 {
            let mut rng = SplitMix64::new(1000 + seed);
            let sample: Vec<f64> = (0..10_000).map(|_| rng.next_normal()).collect();
            let (stat, p) = ks_statistic(&sample, norm_cdf).unwrap();
            assert!((0.0..=1.0).contains(&stat));
            assert!((0.0..=1.0).contains(&p));
            if p > 0.01 {
                clear += 1;
            }
        }
        assert!(clear >= 95, "only {clear}/100 seeds cleared p > 0.01");
    }

    #[test]
    fn residuals_separate_sampler_from_linear_estimators() {
        let m = gaussian_toy(1.0).unwrap();
        let n = 10_000;

        let sampler = residual_diagnostics(&make_posterior_sampler(&m, 77), &m, n, 5).unwrap();
        assert!(sampler.ks_pvalue > 0.01, "sampler KS p {}", sampler.ks_pvalue);
        assert!(sampler.pearson_corr.abs() < 0.05, "sampler corr {}", sampler.pearson_corr);

        let mmse = residual_diagnostics(&make_mmse(&m), &m, n, 5).unwrap();
        assert!((mmse.pearson_corr - 1.0).abs() < 1e-9, "mmse corr {}", mmse.pearson_corr);
        let dmax = residual_diagnostics(&make_dmax(&m), &m, n, 5).unwrap();
        assert!((dmax.pearson_corr - 1.0).abs() < 1e-9);

        assert!(residual_diagnostics(&make_mmse(&m), &m, 50, 5).is_err());
    }

    #[test]
    fn spearman_reference_values() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 0.0, -5.0]), -1.0);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]);
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn zigzag_sweep_directions_at_small_scale() {
        let m = gaussian_toy(1.0).unwrap();
        let family = SweepFamily::Zigzag {
            deltas: vec![1.0, 0.5, 0.25],
            q_clip: 1e-3,
        };
        let opts = SweepOptions {
            n_metric: 400,
            n_probe: 300,
            seeds: vec![0, 1],
            threads: 2,
            ..SweepOptions::default()
        };
        let outcome = tradeoff_sweep(&family, &m, &opts).unwrap();
        assert_eq!(outcome.cells.len(), 6);
        assert!(outcome.cells.iter().all(|c| c.status == "ok"));

        let means = outcome.seed_averages();
        for w in means.windows(2) {
            assert!(w[1].1 < w[0].1, "jemd should fall along the grid: {means:?}");
            assert!(w[1].2 > w[0].2, "kbar should rise along the grid: {means:?}");
        }

        // Purity: rerunning yields identical bytes.
        let again = tradeoff_sweep(&family, &m, &opts).unwrap();
        assert_eq!(outcome.to_csv(), again.to_csv());

        // Single-threaded scheduling changes nothing.
        let serial = tradeoff_sweep(
            &family,
            &m,
            &SweepOptions {
                threads: 1,
                ..opts.clone()
            },
        )
        .unwrap();
        assert_eq!(outcome.to_csv(), serial.to_csv());
    }

    #[test]
    fn empty_grid_is_rejected() {
        let m = gaussian_toy(1.0).unwrap();
        let family = SweepFamily::Zigzag {
            deltas: vec![],
            q_clip: 1e-3,
        };
        assert!(tradeoff_sweep(&family, &m, &SweepOptions::default()).is_err());
    }

    #[test]
    fn csv_and_svg_render() {
        let m = gaussian_toy(1.0).unwrap();
        let family = SweepFamily::Zigzag {
            deltas: vec![0.5, 0.25],
            q_clip: 1e-3,
        };
        let opts = SweepOptions {
            n_metric: 200,
            n_probe: 100,
            seeds: vec![3],
            threads: 1,
            ..SweepOptions::default()
        };
        let outcome = tradeoff_sweep(&family, &m, &opts).unwrap();
        let csv = outcome.to_csv();
        assert!(csv.starts_with("family,control,seed,jemd,kbar,jemd_sd,kbar_sd,status\n"));
        assert_eq!(csv.lines().count(), 3);
        let svg = outcome.to_svg(false, None);
        assert!(svg.contains("JEMD"));
    }
}
