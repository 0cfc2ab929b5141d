//! Command-line surface: data ingestion, fitting, residual extraction,
//! diagnostics, and simulation-table reproduction.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
//! failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use unlinked_iso::{
    benchmark_fit_config, fenchel_residuals, fit, l2_distance_sq, noise::read_longitudinal_csv,
    noise::read_residuals_csv, noise::read_single_column, rate_scan, run_table, simlab, Error,
    EstimatorKind, FitConfig, GroupedLevels, NoiseModel, Scenario, StepFunction, M0,
};

#[derive(Parser)]
#[command(name = "unlinked-iso", version, about = "Monotone regression from unlinked samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the monotone minimum-contrast estimator to unlinked x/y samples.
    Fit(FitArgs),
    /// Split longitudinal responses into unlinked responses and residuals.
    Residuals(ResidualArgs),
    /// Reproduce Monte Carlo MSE tables on synthetic scenarios.
    Simulate(SimulateArgs),
    /// Recompute optimality diagnostics for a stored fit.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct NoiseArgs {
    /// Laplace noise with the given scale parameter.
    #[arg(long, value_name = "LAMBDA")]
    laplace: Option<f64>,
    /// Gaussian noise with the given standard deviation.
    #[arg(long, value_name = "SIGMA")]
    gauss: Option<f64>,
    /// Empirical noise from a residual CSV (column `eps`).
    #[arg(long, value_name = "PATH")]
    residuals: Option<PathBuf>,
    /// Laplace noise with scale from the variance of a residual CSV.
    #[arg(long, value_name = "PATH")]
    laplace_from_residuals: Option<PathBuf>,
}

impl NoiseArgs {
    fn build(&self) -> Result<NoiseModel, Error> {
        let sources = usize::from(self.laplace.is_some())
            + usize::from(self.gauss.is_some())
            + usize::from(self.residuals.is_some())
            + usize::from(self.laplace_from_residuals.is_some());
        if sources != 1 {
            return Err(Error::Config(format!(
                "exactly one noise source must be given \
                 (--laplace, --gauss, --residuals, --laplace-from-residuals); got {sources}"
            )));
        }
        if let Some(scale) = self.laplace {
            return NoiseModel::laplace(scale);
        }
        if let Some(sd) = self.gauss {
            return NoiseModel::gaussian(sd);
        }
        if let Some(path) = &self.residuals {
            let sample = read_residuals_csv(path)?;
            return NoiseModel::empirical(sample, false);
        }
        let path = self.laplace_from_residuals.as_ref().expect("one source set");
        let sample = read_residuals_csv(path)?;
        NoiseModel::laplace_from_variance(mean_square(&sample))
    }
}

#[derive(Args)]
struct FitArgs {
    /// Covariate CSV with column `x`.
    #[arg(long, value_name = "PATH")]
    x: PathBuf,
    /// Response CSV with column `y`.
    #[arg(long, value_name = "PATH")]
    y: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Grouping tolerance (default: response range / (n^{2/3} · noise sd)).
    #[arg(long)]
    eps: Option<f64>,
    /// Stepsize (default: n_x / 2).
    #[arg(long)]
    eta: Option<f64>,
    /// Iteration count (default: 20 · n_x).
    #[arg(long)]
    iters: Option<usize>,
    /// Output path for the fit JSON.
    #[arg(long, default_value = "fit.json")]
    out: PathBuf,
    /// Optional path for a plotting grid CSV (`x,y`).
    #[arg(long)]
    grid_out: Option<PathBuf>,
    /// Grid resolution for --grid-out.
    #[arg(long, default_value_t = 200)]
    grid_points: usize,
}

#[derive(Args)]
struct ResidualArgs {
    /// Longitudinal CSV with columns `y1,y2`.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output CSV of unlinked responses (column `y`).
    #[arg(long, default_value = "ystar.csv")]
    ystar_out: PathBuf,
    /// Output CSV of noise residuals (column `eps`).
    #[arg(long, default_value = "eps.csv")]
    eps_out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Regression shape: lin, const, step2, step3, power, or all.
    #[arg(long)]
    m0: String,
    /// Noise family: laplace or gauss.
    #[arg(long)]
    noise: String,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
    /// Covariate sample size.
    #[arg(long)]
    n: usize,
    /// Response sample size (defaults to --n).
    #[arg(long)]
    ny: Option<usize>,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated estimators from {ulbdd, ulcs, ulquant, lmono}.
    #[arg(long, default_value = "ulbdd,ulcs,ulquant,lmono")]
    estimators: String,
    /// Output path for the table.
    #[arg(long, default_value = "table.csv")]
    out: PathBuf,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Run a windowed L1 rate scan over these comma-separated sizes instead
    /// of an MSE table.
    #[arg(long)]
    rate_ns: Option<String>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Fit JSON produced by the fit subcommand.
    #[arg(long, value_name = "PATH")]
    fit: PathBuf,
    /// Covariate CSV with column `x`.
    #[arg(long, value_name = "PATH")]
    x: PathBuf,
    /// Response CSV with column `y`.
    #[arg(long, value_name = "PATH")]
    y: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Optional step-function JSON of a reference function; adds the
    /// integrated squared distance between the fitted-value CDF and the
    /// reference-value CDF over the covariates.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output path for the diagnostics JSON (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Residuals(args) => cmd_residuals(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Diagnose(args) => cmd_diagnose(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("UNLINKED_ISO_THREADS") {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Unsupported(_) => 2,
        Error::Parse { .. }
        | Error::Io(_)
        | Error::EmptyInput(_)
        | Error::ShapeMismatch(_)
        | Error::InvalidParameter(_)
        | Error::MonotonicityViolation(_)
        | Error::AmbiguousFit(_) => 3,
        Error::NumericFailure { .. }
        | Error::Accuracy(_)
        | Error::IllPosed(_)
        | Error::Divergence(_) => 4,
    }
}

fn mean_square(sample: &[f64]) -> f64 {
    sample.iter().map(|e| e * e).sum::<f64>() / sample.len() as f64
}

fn cmd_fit(args: FitArgs) -> Result<(), Error> {
    let xs = read_single_column(&args.x, "x")?;
    let ys = read_single_column(&args.y, "y")?;
    let noise = args.noise.build()?;

    let mut config: FitConfig = benchmark_fit_config(xs.len(), &ys, &noise)?;
    if let Some(eps) = args.eps {
        config.eps = eps;
    }
    if let Some(eta) = args.eta {
        config.eta = eta;
    }
    if let Some(iters) = args.iters {
        config.max_iters = iters;
    }
    config.validate()?;

    let result = fit(&xs, &ys, &noise, &config)?;
    fs::write(
        &args.out,
        serde_json::to_string_pretty(&result.to_json()).expect("serializable"),
    )?;
    if let Some(grid_path) = &args.grid_out {
        write_grid_csv(grid_path, &result.fitted, args.grid_points)?;
    }
    println!(
        "fitted {} distinct levels in {} iterations; max Fenchel residual {:.6e}",
        result.levels.levels().len(),
        result.iterations_run,
        result.max_fenchel_residual
    );
    println!("fit written to {}", args.out.display());
    Ok(())
}

fn write_grid_csv(path: &Path, f: &StepFunction, points: usize) -> Result<(), Error> {
    let mut out = String::from("x,y\n");
    for (x, y) in f.sample_grid(points) {
        out.push_str(&format!("{x},{y}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

fn cmd_residuals(args: ResidualArgs) -> Result<(), Error> {
    let pairs = read_longitudinal_csv(&args.input)?;
    let (ystar, eps) = unlinked_iso::longitudinal_residuals(&pairs)?;

    let mut ycsv = String::from("y\n");
    for y in &ystar {
        ycsv.push_str(&format!("{y}\n"));
    }
    fs::write(&args.ystar_out, ycsv)?;

    let mut ecsv = String::from("eps\n");
    for e in &eps {
        ecsv.push_str(&format!("{e}\n"));
    }
    fs::write(&args.eps_out, ecsv)?;

    let variance = mean_square(&eps);
    let lambda = (variance / 2.0).sqrt();
    if lambda < 1e-8 {
        eprintln!(
            "warning: residuals are degenerate (variance {variance:.3e}); \
             Laplace scale floored at 1e-8"
        );
    }
    println!(
        "wrote {} responses to {} and residuals to {}; Laplace scale sqrt(var/2) = {:.6}",
        ystar.len(),
        args.ystar_out.display(),
        args.eps_out.display(),
        lambda.max(1e-8)
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let shapes: Vec<M0> = if args.m0 == "all" {
        M0::ALL.to_vec()
    } else {
        vec![args.m0.parse()?]
    };
    let noise = match args.noise.as_str() {
        "laplace" => NoiseModel::laplace(args.sd * (0.5f64).sqrt())?,
        "gauss" => NoiseModel::gaussian(args.sd)?,
        other => {
            return Err(Error::Config(format!(
                "unknown noise family `{other}` (expected laplace or gauss)"
            )))
        }
    };
    let estimators: Vec<EstimatorKind> = args
        .estimators
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    if estimators.is_empty() {
        return Err(Error::Config("no estimators selected".into()));
    }

    let scenarios: Vec<Scenario> = shapes
        .iter()
        .map(|m0| {
            let mut s = Scenario::new(*m0, noise.clone(), args.n, args.reps, args.seed)?;
            if let Some(ny) = args.ny {
                s.n_y = ny;
                s.validate()?;
            }
            Ok(s)
        })
        .collect::<Result<_, Error>>()?;

    if let Some(raw_ns) = &args.rate_ns {
        let ns: Vec<usize> = raw_ns
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad sample size `{s}`")))
            })
            .collect::<Result<_, _>>()?;
        let base = &scenarios[0];
        let (lo, hi) = base.support;
        let span = hi - lo;
        let window = (lo + 0.1 * span, hi - 0.1 * span);
        let medians = rate_scan(base, &ns, window)?;
        let mut out = String::from("n,median_windowed_l1\n");
        for (n, median) in ns.iter().zip(&medians) {
            out.push_str(&format!("{n},{median}\n"));
        }
        fs::write(&args.out, out)?;
        println!("rate scan written to {}", args.out.display());
        return Ok(());
    }

    let rows = run_table(&scenarios, &estimators)?;
    let rendered = match args.format.as_str() {
        "csv" => simlab::table_to_csv(&rows),
        "json" => serde_json::to_string_pretty(&rows).expect("serializable"),
        other => {
            return Err(Error::Config(format!(
                "unknown format `{other}` (expected csv or json)"
            )))
        }
    };
    fs::write(&args.out, rendered)?;
    for row in &rows {
        println!(
            "{} {}: mean MSE {:.4} (stderr {:.4}, reps {}, failures {})",
            row.scenario, row.estimator, row.mean_mse, row.mc_stderr, row.reps, row.failures
        );
    }
    println!("table written to {}", args.out.display());
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), Error> {
    let xs = read_single_column(&args.x, "x")?;
    let ys = read_single_column(&args.y, "y")?;
    let noise = args.noise.build()?;

    let raw = fs::read_to_string(&args.fit)?;
    let value: serde_json::Value = serde_json::from_str(&raw).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: format!("{}: {e}", args.fit.display()),
    })?;
    let fitted: StepFunction = serde_json::from_value(
        value.get("fitted").cloned().unwrap_or(value.clone()),
    )
    .map_err(|e| Error::Parse {
        line: 0,
        message: format!("{}: not a fit or step-function JSON: {e}", args.fit.display()),
    })?;

    let mut sorted_xs = xs.clone();
    sorted_xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut values: Vec<f64> = sorted_xs.iter().map(|x| fitted.eval(*x)).collect();
    values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let levels = GroupedLevels::from_sorted_values(&values)?;

    let residuals = fenchel_residuals(&levels, &ys, &noise);
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);

    let l2_to_truth = match &args.truth {
        None => None,
        Some(path) => {
            let raw = fs::read_to_string(path)?;
            let truth: StepFunction = serde_json::from_str(&raw).map_err(|e| Error::Parse {
                line: e.line() as u64,
                message: format!("{}: {e}", path.display()),
            })?;
            let fitted_cdf = StepFunction::pushforward_ecdf(&fitted, &xs)?;
            let truth_cdf = StepFunction::pushforward_ecdf(&truth, &xs)?;
            Some(l2_distance_sq(
                &fitted_cdf,
                &truth_cdf,
                (f64::NEG_INFINITY, f64::INFINITY),
            )?)
        }
    };

    let report = serde_json::json!({
        "levels": levels.levels(),
        "counts": levels.counts(),
        "residuals": residuals,
        "max_residual": max_residual,
        "l2_to_truth": l2_to_truth,
    });
    let rendered = serde_json::to_string_pretty(&report).expect("serializable");
    match &args.out {
        Some(path) => fs::write(path, rendered)?,
        None => println!("{rendered}"),
    }
    eprintln!("max Fenchel residual {max_residual:.6e}");
    Ok(())
}
