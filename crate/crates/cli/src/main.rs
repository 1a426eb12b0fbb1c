//! Command-line front end: reproducible experiment orchestration emitting
//! CSV/JSON/SVG artifacts, each paired with a config sidecar sufficient to
//! reproduce it byte-for-byte.

mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prlab_core::analytics::{residual_diagnostics, tradeoff_sweep, SweepFamily, SweepOptions};
use prlab_core::estimators::Estimator;
use prlab_core::linalg::Matrix;
use prlab_core::model::{discrete_model, gaussian_toy, DiscreteJointModel};
use prlab_core::oracle::{verify_theorem, GammaPolicy};
use prlab_core::rng::substream_seed;
use prlab_core::robustness::{fps_explore, kbar_ifgsm, kbar_random, AttackConfig, FpsLossMode};
use prlab_core::training::{history_to_csv, train_denoiser, TrainConfig};
use prlab_core::transport::{
    cost_matrix, exact_ot, median_positive, sinkhorn, Ground, JemdOptions, JemdPairing, JemdSolver,
    WeightedPointSet,
};
use prlab_core::Error as CoreError;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Master seed used when none is given; all substreams derive from it.
const DEFAULT_MASTER_SEED: u64 = 424_242;

/// Point count above which the `emd` and `sweep` commands switch from the
/// exact solver to Sinkhorn unless `--exact` forces it.
const EXACT_SOLVER_LIMIT: usize = 2000;

#[derive(Parser)]
#[command(
    name = "prlab",
    about = "Numerical laboratory for the perception-robustness tradeoff of deterministic estimators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed; every command derives named substreams from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default: $PRLAB_OUT, else the current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact or entropic earth mover's distance between two CSV point sets.
    Emd(EmdArgs),
    /// Train the CGAN denoiser with a robustness penalty.
    Train(TrainArgs),
    /// Lipschitz lower bound of an estimator.
    Kbar(KbarArgs),
    /// Farthest-point posterior exploration around one measurement.
    Fps(FpsArgs),
    /// Residual-noise diagnostics of an estimator.
    Diag(DiagArgs),
    /// Tradeoff sweep: joint perceptual index vs Lipschitz lower bound.
    Sweep(SweepArgs),
    /// Exhaustive verification of the Lipschitz bound on a discrete model.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct EmdArgs {
    /// First point set (CSV: one point per row, optional header).
    a: PathBuf,
    /// Second point set.
    b: PathBuf,
    #[arg(long, value_enum)]
    ground: Option<GroundArg>,
    #[arg(long)]
    p: Option<u32>,
    /// Force the exact solver regardless of size.
    #[arg(long)]
    exact: bool,
    /// Force the entropic solver.
    #[arg(long, conflicts_with = "exact")]
    sinkhorn: bool,
    /// Sinkhorn epsilon as a fraction of the median pairwise cost.
    #[arg(long)]
    epsilon_scale: Option<f64>,
    /// Output JSON path (default: stdout only).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize, Debug)]
#[serde(rename_all = "lowercase")]
enum GroundArg {
    L1,
    L2,
}

impl From<GroundArg> for Ground {
    fn from(g: GroundArg) -> Ground {
        match g {
            GroundArg::L1 => Ground::L1,
            GroundArg::L2 => Ground::L2,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    sigma_n: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Perturbation parameter of the robustness loss (a variance unless
    /// --z-std reinterprets it as a standard deviation).
    #[arg(long)]
    sigma_z2: Option<f64>,
    /// Interpret --sigma-z2 as a standard deviation.
    #[arg(long)]
    z_std: bool,
    #[arg(long)]
    r1_coeff: Option<f64>,
    #[arg(long)]
    n_train: Option<usize>,
    /// Use the full published recipe (100k steps over 100k samples).
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct KbarArgs {
    /// Estimator descriptor JSON.
    #[arg(long)]
    estimator: PathBuf,
    #[arg(long, value_enum)]
    method: Option<KbarMethod>,
    #[arg(long)]
    n: Option<usize>,
    /// Probe variance for the random method.
    #[arg(long)]
    sigma_z2: Option<f64>,
    /// Attack radius for the ifgsm method.
    #[arg(long)]
    alpha: Option<f64>,
    /// Attack steps for the ifgsm method.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    sigma_n: Option<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize, Debug, PartialEq)]
#[serde(rename_all = "lowercase")]
enum KbarMethod {
    Random,
    Ifgsm,
}

#[derive(Args)]
struct FpsArgs {
    #[arg(long)]
    estimator: PathBuf,
    /// The measurement to explore around.
    #[arg(long)]
    y: f64,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    t: Option<usize>,
    /// Use the literal spread loss (distance to the last output only).
    #[arg(long)]
    literal_loss: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DiagArgs {
    #[arg(long)]
    estimator: PathBuf,
    #[arg(long)]
    sigma_n: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Zigzag bin widths, e.g. 1,0.5,0.25,0.125,0.0625.
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    /// Robustness coefficients, e.g. 0,0.03,0.1,0.3,1,10.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    q_clip: Option<f64>,
    #[arg(long)]
    n_metric: Option<usize>,
    #[arg(long)]
    n_probe: Option<usize>,
    /// Sweep seeds, e.g. 0,1,2.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Reuse the reference y draw for the estimator set.
    #[arg(long)]
    paired: bool,
    /// Force the exact transport solver regardless of n-metric.
    #[arg(long)]
    exact: bool,
    /// Probe variance for trained estimators.
    #[arg(long)]
    probe_sigma_z2: Option<f64>,
    /// Zigzag probe standard deviation as a fraction of delta.
    #[arg(long)]
    zigzag_probe_scale: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Log-log axes in the SVG chart.
    #[arg(long)]
    log_log: bool,
    /// Embed a generation timestamp comment in the SVG.
    #[arg(long)]
    timestamp: bool,
    /// Training knobs for the lambda family.
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize, Debug, PartialEq)]
#[serde(rename_all = "lowercase")]
enum FamilyArg {
    Zigzag,
    Lambda,
}

#[derive(Args)]
struct OracleArgs {
    /// Discrete model JSON: {"x_vals": [...], "y_vals": [...], "pmf": [[...]]}.
    #[arg(long)]
    model: PathBuf,
    /// Wasserstein orders to verify.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<u32>>,
    #[arg(long, value_enum)]
    gamma_policy: Option<GammaPolicyArg>,
}

#[derive(Clone, Copy, ValueEnum, Serialize, Debug)]
#[serde(rename_all = "kebab-case")]
enum GammaPolicyArg {
    Global,
    PerMap,
}

/// Anything that should abort the run with a specific exit code.
enum RunError {
    /// Malformed input or config: exit 2.
    Usage(String),
    /// Verification failure, divergence, or I/O trouble: exit 1.
    Failure(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } => RunError::Usage(e.to_string()),
            other => RunError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Failure(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Values from the optional JSON config file; explicit flags take
/// precedence over these, which take precedence over built-in defaults.
struct FileConfig {
    value: serde_json::Value,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig, RunError> {
        let value = match path {
            None => serde_json::Value::Null,
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| RunError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| RunError::Usage(format!("malformed config {}: {e}", p.display())))?
            }
        };
        Ok(FileConfig { value })
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.value.get(key).and_then(|v| v.as_f64())
    }

    fn usize(&self, key: &str) -> Option<usize> {
        self.value.get(key).and_then(|v| v.as_u64()).map(|v| v as usize)
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.value.get(key).and_then(|v| v.as_u64())
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.value.get(key).and_then(|v| v.as_str())
    }

    fn f64_list(&self, key: &str) -> Option<Vec<f64>> {
        self.value
            .get(key)
            .and_then(|v| v.as_array())
            .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
    }

    fn u64_list(&self, key: &str) -> Option<Vec<u64>> {
        self.value
            .get(key)
            .and_then(|v| v.as_array())
            .map(|a| a.iter().filter_map(|x| x.as_u64()).collect())
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let master_seed = cli.seed.or_else(|| file.u64("seed")).unwrap_or(DEFAULT_MASTER_SEED);
    let out_dir = cli
        .out_dir
        .or_else(|| file.str("out_dir").map(PathBuf::from))
        .or_else(|| std::env::var_os("PRLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Emd(args) => cmd_emd(args, &file),
        Command::Train(args) => cmd_train(args, &file, master_seed, &out_dir),
        Command::Kbar(args) => cmd_kbar(args, &file, master_seed),
        Command::Fps(args) => cmd_fps(args, &file, master_seed),
        Command::Diag(args) => cmd_diag(args, &file, master_seed),
        Command::Sweep(args) => cmd_sweep(args, &file, master_seed, &out_dir),
        Command::Oracle(args) => cmd_oracle(args, &file, &out_dir),
    }
}

/// Reads a CSV point set: one point per row, comma-separated coordinates,
/// optional non-numeric header line.
fn read_point_csv(path: &Path) -> Result<WeightedPointSet, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Option<Vec<f64>> = line.split(',').map(|f| f.trim().parse::<f64>().ok()).collect();
        match parsed {
            Some(coords) => rows.push(coords),
            None if lineno == 0 => continue, // header
            None => {
                return Err(RunError::Usage(format!(
                    "{}: line {} is not numeric",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(RunError::Usage(format!("{}: no data rows", path.display())));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(RunError::Usage(format!("{}: inconsistent dimensions", path.display())));
    }
    let set = WeightedPointSet::uniform(Matrix::from_rows(&rows)).map_err(RunError::from)?;
    Ok(set.aggregated())
}

fn load_estimator(path: &Path) -> Result<Estimator, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Estimator::from_json(&text).map_err(RunError::from)
}

fn cmd_emd(args: EmdArgs, file: &FileConfig) -> Result<(), RunError> {
    let a = read_point_csv(&args.a)?;
    let b = read_point_csv(&args.b)?;
    let ground = args
        .ground
        .map(Ground::from)
        .or_else(|| match file.str("ground") {
            Some("l1") => Some(Ground::L1),
            Some("l2") => Some(Ground::L2),
            _ => None,
        })
        .unwrap_or(Ground::L1);
    let p = args.p.or_else(|| file.usize("p").map(|v| v as u32)).unwrap_or(1);
    let epsilon_scale = args
        .epsilon_scale
        .or_else(|| file.f64("epsilon_scale"))
        .unwrap_or(1e-2);

    let use_exact = if args.exact {
        true
    } else if args.sinkhorn {
        false
    } else {
        a.len().max(b.len()) <= EXACT_SOLVER_LIMIT
    };

    let cost = cost_matrix(&a, &b, ground, p).map_err(RunError::from)?;
    let start = std::time::Instant::now();
    let (value, exact_flag, iterations, converged) = if use_exact {
        let r = exact_ot(a.weights(), b.weights(), &cost).map_err(RunError::from)?;
        (r.cost, true, r.iterations, true)
    } else {
        let eps = epsilon_scale * median_positive(cost.data());
        let r = sinkhorn(a.weights(), b.weights(), &cost, eps, 200_000, 1e-9).map_err(RunError::from)?;
        (r.cost, false, r.iterations, r.converged)
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let ground_name = match ground {
        Ground::L1 => "l1",
        Ground::L2 => "l2",
    };
    let report = serde_json::json!({
        "cost": value,
        "p": p,
        "ground": ground_name,
        "exact": exact_flag,
        "iterations": iterations,
        "runtime_ms": runtime_ms,
        "converged": converged,
        "n_a": a.len(),
        "n_b": b.len(),
    });
    let config = serde_json::json!({
        "command": "emd",
        "a": args.a,
        "b": args.b,
        "ground": ground_name,
        "p": p,
        "exact": exact_flag,
        "epsilon_scale": epsilon_scale,
    });
    let body = format!("{}\n", serde_json::to_string_pretty(&report).expect("json"));
    match &args.output {
        Some(path) => {
            io::write_with_sidecar(path, &body, &config)?;
            println!("{body}");
        }
        None => print!("{body}"),
    }
    Ok(())
}

/// Resolves the training configuration shared by `train` and the lambda
/// sweep.
fn resolve_train_config(args: &TrainArgs, file: &FileConfig, seed: u64) -> TrainConfig {
    let mut cfg = if args.paper_scale {
        TrainConfig::paper()
    } else {
        TrainConfig::default()
    };
    cfg.lambda = args.lambda.or_else(|| file.f64("lambda")).unwrap_or(cfg.lambda);
    cfg.steps = args.steps.or_else(|| file.usize("steps")).unwrap_or(cfg.steps);
    cfg.batch = args.batch.or_else(|| file.usize("batch")).unwrap_or(cfg.batch);
    cfg.lr = args.lr.or_else(|| file.f64("lr")).unwrap_or(cfg.lr);
    cfg.r1_coeff = args.r1_coeff.or_else(|| file.f64("r1_coeff")).unwrap_or(cfg.r1_coeff);
    cfg.n_train = args.n_train.or_else(|| file.usize("n_train")).unwrap_or(cfg.n_train);
    let sigma_z = args.sigma_z2.or_else(|| file.f64("sigma_z2")).unwrap_or(cfg.sigma_z2);
    cfg.sigma_z2 = if args.z_std { sigma_z * sigma_z } else { sigma_z };
    cfg.seed = seed;
    cfg
}

fn cmd_train(args: TrainArgs, file: &FileConfig, master_seed: u64, out_dir: &Path) -> Result<(), RunError> {
    let sigma_n = args.sigma_n.or_else(|| file.f64("sigma_n")).unwrap_or(1.0);
    let model = gaussian_toy(sigma_n).map_err(RunError::from)?;
    let cfg = resolve_train_config(&args, file, substream_seed(master_seed, "train"));

    let (estimator, history) = train_denoiser(&model, &cfg).map_err(RunError::from)?;

    let sidecar = serde_json::json!({
        "command": "train",
        "sigma_n": sigma_n,
        "master_seed": master_seed,
        "train_config": cfg,
    });
    io::write_with_sidecar(&out_dir.join("history.csv"), &history_to_csv(&history), &sidecar)?;
    io::write_with_sidecar(
        &out_dir.join("estimator.json"),
        &format!("{}\n", estimator.to_json()),
        &sidecar,
    )?;
    println!(
        "trained lambda={} for {} steps; artifacts in {}",
        cfg.lambda,
        cfg.steps,
        out_dir.display()
    );
    Ok(())
}

fn cmd_kbar(args: KbarArgs, file: &FileConfig, master_seed: u64) -> Result<(), RunError> {
    let estimator = load_estimator(&args.estimator)?;
    let sigma_n = args.sigma_n.or_else(|| file.f64("sigma_n")).unwrap_or(1.0);
    let model = gaussian_toy(sigma_n).map_err(RunError::from)?;
    let method = args
        .method
        .or_else(|| match file.str("method") {
            Some("random") => Some(KbarMethod::Random),
            Some("ifgsm") => Some(KbarMethod::Ifgsm),
            _ => None,
        })
        .unwrap_or(KbarMethod::Random);
    let n = args.n.or_else(|| file.usize("n")).unwrap_or(1000);
    let sigma_z2 = args.sigma_z2.or_else(|| file.f64("sigma_z2")).unwrap_or(0.2);
    let alpha = args.alpha.or_else(|| file.f64("alpha")).unwrap_or(0.1);
    let steps = args.t.or_else(|| file.usize("t")).unwrap_or(10);
    let seed = substream_seed(master_seed, "kbar");

    let (kbar, method_name) = match method {
        KbarMethod::Random => (
            kbar_random(&estimator, &model, n, sigma_z2, seed).map_err(RunError::from)?,
            "random",
        ),
        KbarMethod::Ifgsm => {
            let mut cfg = AttackConfig::new(alpha, steps).map_err(RunError::from)?;
            cfg.seed = seed;
            (
                kbar_ifgsm(&estimator, &model, n, &cfg).map_err(RunError::from)?,
                "ifgsm",
            )
        }
    };

    let report = serde_json::json!({
        "kbar": kbar,
        "n": n,
        "alpha": if method == KbarMethod::Ifgsm { Some(alpha) } else { None },
        "T": if method == KbarMethod::Ifgsm { Some(steps) } else { None },
        "sigma_z2": if method == KbarMethod::Random { Some(sigma_z2) } else { None },
        "method": method_name,
        "sigma_n": sigma_n,
        "seed": seed,
    });
    let config = serde_json::json!({
        "command": "kbar",
        "estimator": args.estimator,
        "method": method_name,
        "n": n,
        "alpha": alpha,
        "t": steps,
        "sigma_z2": sigma_z2,
        "sigma_n": sigma_n,
        "master_seed": master_seed,
    });
    let body = format!("{}\n", serde_json::to_string_pretty(&report).expect("json"));
    match &args.output {
        Some(path) => {
            io::write_with_sidecar(path, &body, &config)?;
            println!("{body}");
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_fps(args: FpsArgs, file: &FileConfig, master_seed: u64) -> Result<(), RunError> {
    let estimator = load_estimator(&args.estimator)?;
    let samples = args.samples.or_else(|| file.usize("samples")).unwrap_or(5);
    let alpha = args.alpha.or_else(|| file.f64("alpha")).unwrap_or(0.1);
    let steps = args.t.or_else(|| file.usize("t")).unwrap_or(150);
    let mode = if args.literal_loss {
        FpsLossMode::LastOnly
    } else {
        FpsLossMode::AllPrevious
    };
    let mut cfg = AttackConfig::new(alpha, steps).map_err(RunError::from)?;
    cfg.seed = substream_seed(master_seed, "fps");

    let harvest = fps_explore(&estimator, &[args.y], samples, &cfg, mode).map_err(RunError::from)?;
    let mut csv = String::from("sample_index,y_adv,output\n");
    for (idx, (y_adv, out)) in harvest.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", idx, y_adv[0], out[0]));
    }
    let config = serde_json::json!({
        "command": "fps",
        "estimator": args.estimator,
        "y": args.y,
        "samples": samples,
        "alpha": alpha,
        "t": steps,
        "literal_loss": args.literal_loss,
        "master_seed": master_seed,
    });
    match &args.output {
        Some(path) => {
            io::write_with_sidecar(path, &csv, &config)?;
            println!("wrote {} samples to {}", harvest.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_diag(args: DiagArgs, file: &FileConfig, master_seed: u64) -> Result<(), RunError> {
    let estimator = load_estimator(&args.estimator)?;
    let sigma_n = args.sigma_n.or_else(|| file.f64("sigma_n")).unwrap_or(1.0);
    let model = gaussian_toy(sigma_n).map_err(RunError::from)?;
    let n = args.n.or_else(|| file.usize("n")).unwrap_or(10_000);
    let seed = substream_seed(master_seed, "diag");
    let report = residual_diagnostics(&estimator, &model, n, seed).map_err(RunError::from)?;
    let body = format!(
        "{}\n",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    let config = serde_json::json!({
        "command": "diag",
        "estimator": args.estimator,
        "sigma_n": sigma_n,
        "n": n,
        "master_seed": master_seed,
    });
    match &args.output {
        Some(path) => {
            io::write_with_sidecar(path, &body, &config)?;
            println!("{body}");
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs, file: &FileConfig, master_seed: u64, out_dir: &Path) -> Result<(), RunError> {
    let sigma_n = args.train.sigma_n.or_else(|| file.f64("sigma_n")).unwrap_or(1.0);
    let model = gaussian_toy(sigma_n).map_err(RunError::from)?;
    let n_metric = args.n_metric.or_else(|| file.usize("n_metric")).unwrap_or(2000);
    let n_probe = args.n_probe.or_else(|| file.usize("n_probe")).unwrap_or(1000);
    let seeds = args
        .seeds
        .or_else(|| file.u64_list("seeds"))
        .unwrap_or_else(|| vec![0, 1, 2]);
    let q_clip = args.q_clip.or_else(|| file.f64("q_clip")).unwrap_or(1e-3);

    let family = match args.family {
        FamilyArg::Zigzag => {
            let deltas = args
                .deltas
                .clone()
                .or_else(|| file.f64_list("deltas"))
                .unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
            SweepFamily::Zigzag { deltas, q_clip }
        }
        FamilyArg::Lambda => {
            let lambdas = args
                .lambdas
                .clone()
                .or_else(|| file.f64_list("lambdas"))
                .unwrap_or_else(|| vec![0.0, 0.03, 0.1, 0.3, 1.0, 10.0]);
            let base = resolve_train_config(&args.train, file, 0);
            SweepFamily::Lambda { lambdas, base }
        }
    };

    let solver = if args.exact || n_metric <= EXACT_SOLVER_LIMIT {
        JemdSolver::Exact
    } else {
        JemdSolver::Sinkhorn { epsilon_scale: 1e-2 }
    };
    let pairing = if args.paired {
        JemdPairing::Paired
    } else {
        JemdPairing::Independent
    };
    let sweep_seeds: Vec<u64> = seeds
        .iter()
        .map(|s| substream_seed(master_seed, &format!("sweep/seed/{s}")))
        .collect();
    let opts = SweepOptions {
        n_metric,
        n_probe,
        seeds: sweep_seeds,
        jemd: JemdOptions {
            ground: Ground::L1,
            p: 1,
            solver,
            pairing,
        },
        probe_sigma_z2: args
            .probe_sigma_z2
            .or_else(|| file.f64("probe_sigma_z2"))
            .unwrap_or(0.2),
        zigzag_probe_scale: args
            .zigzag_probe_scale
            .or_else(|| file.f64("zigzag_probe_scale"))
            .unwrap_or(0.05),
        threads: args
            .threads
            .or_else(|| file.usize("threads"))
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get())),
    };

    let outcome = tradeoff_sweep(&family, &model, &opts).map_err(RunError::from)?;

    let timestamp = if args.timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Some(format!("epoch:{secs}"))
    } else {
        None
    };
    let config = serde_json::json!({
        "command": "sweep",
        "family": outcome.family,
        "sigma_n": sigma_n,
        "controls": family.controls(),
        "q_clip": q_clip,
        "n_metric": n_metric,
        "n_probe": n_probe,
        "seeds": seeds,
        "paired": args.paired,
        "exact": matches!(solver, JemdSolver::Exact),
        "probe_sigma_z2": opts.probe_sigma_z2,
        "zigzag_probe_scale": opts.zigzag_probe_scale,
        "master_seed": master_seed,
        "log_log": args.log_log,
    });
    io::write_with_sidecar(&out_dir.join("sweep.csv"), &outcome.to_csv(), &config)?;
    io::write_with_sidecar(
        &out_dir.join("sweep.svg"),
        &outcome.to_svg(args.log_log, timestamp),
        &config,
    )?;

    let failed: Vec<&str> = outcome
        .cells
        .iter()
        .filter(|c| c.status != "ok")
        .map(|c| c.status.as_str())
        .collect();
    println!(
        "sweep {} over {} cells -> {}",
        outcome.family,
        outcome.cells.len(),
        out_dir.display()
    );
    if !failed.is_empty() {
        return Err(RunError::Failure(format!(
            "{} sweep cells failed: {failed:?}",
            failed.len()
        )));
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs, file: &FileConfig, out_dir: &Path) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", args.model.display())))?;
    let raw: DiscreteJointModel = serde_json::from_str(&text)
        .map_err(|e| RunError::Usage(format!("malformed model {}: {e}", args.model.display())))?;
    // Revalidate through the constructor.
    let model = discrete_model(raw.x_vals, raw.y_vals, raw.pmf).map_err(RunError::from)?;

    let orders = args.p.or_else(|| {
        file.u64_list("p")
            .map(|v| v.into_iter().map(|x| x as u32).collect())
    });
    let orders = orders.unwrap_or_else(|| vec![1, 2]);
    let policy = match args.gamma_policy.unwrap_or(GammaPolicyArg::Global) {
        GammaPolicyArg::Global => GammaPolicy::Global,
        GammaPolicyArg::PerMap => GammaPolicy::PerMap,
    };

    for &p in &orders {
        let report = verify_theorem(&model, p, policy).map_err(RunError::from)?;
        let config = serde_json::json!({
            "command": "oracle",
            "model": args.model,
            "p": p,
            "gamma_policy": format!("{policy:?}"),
        });
        io::write_with_sidecar(&out_dir.join(format!("oracle_p{p}.csv")), &report.to_csv(), &config)?;
        io::write_with_sidecar(
            &out_dir.join(format!("oracle_p{p}.json")),
            &format!("{}\n", report.summary_json()),
            &config,
        )?;
        println!(
            "p={p}: {} maps verified, min W_p = {:.6}, all_satisfied = {}",
            report.records.len(),
            report.min_wp,
            report.all_satisfied
        );
    }
    Ok(())
}
