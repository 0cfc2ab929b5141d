//! Synthetic-data generators, the Monte Carlo MSE harness, and L1 rate scans.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{cs_estimator, pava, quantile_match, DeconvConfig};
use crate::error::{Error, Result};
use crate::fit::{fit, FitConfig};
use crate::noise::{NoiseKind, NoiseModel};
use crate::stepfn::StepFunction;

/// The benchmark regression shapes. Each is defined on a canonical `[0, 10]`
/// coordinate and mapped affinely onto the scenario support; `power` is
/// centered at the support midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M0 {
    Lin,
    Const,
    Step2,
    Step3,
    Power,
}

impl M0 {
    pub const ALL: [M0; 5] = [M0::Lin, M0::Const, M0::Step2, M0::Step3, M0::Power];

    pub fn name(&self) -> &'static str {
        match self {
            M0::Lin => "lin",
            M0::Const => "const",
            M0::Step2 => "step2",
            M0::Step3 => "step3",
            M0::Power => "power",
        }
    }

    pub fn eval(&self, x: f64, support: (f64, f64)) -> f64 {
        let u = 10.0 * (x - support.0) / (support.1 - support.0);
        match self {
            M0::Lin => u,
            M0::Const => 0.0,
            M0::Step2 => {
                if u < 5.0 {
                    2.0
                } else {
                    8.0
                }
            }
            M0::Step3 => {
                if u < 10.0 / 3.0 {
                    0.0
                } else if u < 20.0 / 3.0 {
                    5.0
                } else {
                    10.0
                }
            }
            M0::Power => {
                let v = u - 5.0;
                v.signum() * v.powi(4) / 120.0
            }
        }
    }
}

impl FromStr for M0 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lin" => Ok(M0::Lin),
            "const" => Ok(M0::Const),
            "step2" => Ok(M0::Step2),
            "step3" => Ok(M0::Step3),
            "power" => Ok(M0::Power),
            other => Err(Error::Config(format!(
                "unknown regression function `{other}` (expected lin, const, step2, step3, power)"
            ))),
        }
    }
}

impl fmt::Display for M0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One synthetic experiment: a regression shape, a noise model, sample sizes,
/// a support interval, and the Monte Carlo protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub m0: M0,
    pub noise: NoiseModel,
    pub n_x: usize,
    pub n_y: usize,
    pub support: (f64, f64),
    pub reps: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn new(m0: M0, noise: NoiseModel, n: usize, reps: usize, seed: u64) -> Result<Self> {
        let scenario = Scenario {
            m0,
            noise,
            n_x: n,
            n_y: n,
            support: (0.0, 10.0),
            reps,
            seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 || self.n_y < 2 {
            return Err(Error::Config("sample sizes must be at least 2".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("need at least one replication".into()));
        }
        if !(self.support.0 < self.support.1) {
            return Err(Error::Config("support must be nondegenerate".into()));
        }
        Ok(())
    }

    pub fn truth(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.m0.eval(x, self.support)
    }

    pub fn label(&self) -> String {
        let noise = match self.noise.kind() {
            NoiseKind::Laplace { .. } => "Laplace",
            NoiseKind::Gaussian { .. } => "Gauss",
            NoiseKind::Empirical { .. } => "Empirical",
        };
        format!("{}, {} (n={})", self.m0, noise, self.n_x)
    }
}

/// Draw one unlinked dataset. With equal sample sizes the responses are built
/// from the same covariate draw and then shuffled, so the pairing exists but
/// is hidden; this is the coupling under which in-sample MSE at the covariate
/// order statistics is meaningful for step-shaped truths. With unequal sizes
/// the responses come from an independent covariate draw.
/// Deterministic in `(seed, rep)` and independent of thread scheduling.
pub fn simulate_dataset(scenario: &Scenario, rep: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream_rng(scenario.seed, 2 * rep as u64);
    let xs = draw_uniform(&mut rng, scenario.n_x, scenario.support);
    let mut ys: Vec<f64> = if scenario.n_y == scenario.n_x {
        xs.iter()
            .map(|x| {
                scenario.m0.eval(*x, scenario.support) + sample_noise(&scenario.noise, &mut rng)
            })
            .collect()
    } else {
        let hidden = draw_uniform(&mut rng, scenario.n_y, scenario.support);
        hidden
            .iter()
            .map(|x| {
                scenario.m0.eval(*x, scenario.support) + sample_noise(&scenario.noise, &mut rng)
            })
            .collect()
    };
    // destroy the pairing explicitly
    for i in (1..ys.len()).rev() {
        let j = (rng.random::<u64>() % (i as u64 + 1)) as usize;
        ys.swap(i, j);
    }
    (xs, ys)
}

/// Draw a linked dataset of `n_x` pairs from the same scenario, on its own
/// substream; used by the oracle estimator that needs the pairing.
pub fn simulate_linked(scenario: &Scenario, rep: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream_rng(scenario.seed, 2 * rep as u64 + 1);
    let xs = draw_uniform(&mut rng, scenario.n_x, scenario.support);
    let ys = xs
        .iter()
        .map(|x| scenario.m0.eval(*x, scenario.support) + sample_noise(&scenario.noise, &mut rng))
        .collect();
    (xs, ys)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_uniform(rng: &mut ChaCha8Rng, n: usize, support: (f64, f64)) -> Vec<f64> {
    (0..n)
        .map(|_| support.0 + (support.1 - support.0) * rng.random::<f64>())
        .collect()
}

/// Fit configuration used by the MSE tables and rate scans: grouping
/// tolerance `(Y_(n) − Y_(1)) / (n^{2/3} σ)`, stepsize `n_x/2`, and `20·n_x`
/// iterations. The tolerance matches the level spacing of a classical
/// isotonic fit (blocks of about `n^{1/3}` points, hence about `n^{2/3}`
/// distinct levels); the coarser `n^{1/3}` heuristic
/// merges across genuine jumps and inflates table MSEs several-fold.
///
/// See [`crate::fit::default_eps`] for the plain heuristic.
pub fn benchmark_fit_config(n_x: usize, ys: &[f64], noise: &NoiseModel) -> Result<FitConfig> {
    if ys.len() < 2 {
        return Err(Error::EmptyInput("need at least 2 responses".into()));
    }
    let scale = noise.stddev();
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter("noise scale must be positive".into()));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for y in ys {
        lo = lo.min(*y);
        hi = hi.max(*y);
    }
    let eps = (hi - lo) / ((ys.len() as f64).powf(2.0 / 3.0) * scale);
    let mut config = FitConfig::new(eps.max(1e-8), 0.5 * n_x as f64, 20 * n_x)?;
    config.monitor_every = 0;
    Ok(config)
}

/// One draw from a noise model: inverse-CDF for Laplace, ziggurat for
/// Gaussian, resampling for empirical models.
pub fn sample_noise(noise: &NoiseModel, rng: &mut ChaCha8Rng) -> f64 {
    match noise.kind() {
        NoiseKind::Laplace { scale } => {
            let u: f64 = rng.random();
            if u < 0.5 {
                scale * (2.0 * u.max(f64::MIN_POSITIVE)).ln()
            } else {
                -scale * (2.0 * (1.0 - u)).ln()
            }
        }
        NoiseKind::Gaussian { stddev } => {
            rand_distr::Normal::new(0.0, *stddev).unwrap().sample(rng)
        }
        NoiseKind::Empirical { residuals, .. } => {
            residuals[(rng.random::<u64>() % residuals.len() as u64) as usize]
        }
    }
}

/// In-sample mean squared error `n⁻¹ Σ (m̂(X_i) − m₀(X_i))²`.
pub fn mse(estimate: &StepFunction, truth: impl Fn(f64) -> f64, xs: &[f64]) -> f64 {
    mse_fn(|x| estimate.eval(x), truth, xs)
}

/// MSE for any evaluable estimate (the quantile-matching baseline is
/// piecewise linear, not a step function).
pub fn mse_fn(estimate: impl Fn(f64) -> f64, truth: impl Fn(f64) -> f64, xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    xs.iter()
        .map(|x| {
            let d = estimate(*x) - truth(*x);
            d * d
        })
        .sum::<f64>()
        / n
}

/// The estimators the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// The minimum-contrast fit on unlinked data.
    UlBdd,
    /// The spectral-cutoff deconvolution estimator on unlinked data.
    UlCs,
    /// Quantile matching on unlinked data.
    UlQuant,
    /// Classical isotonic regression on linked data (the oracle).
    LMono,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::UlBdd,
        EstimatorKind::UlCs,
        EstimatorKind::UlQuant,
        EstimatorKind::LMono,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::UlBdd => "ulbdd",
            EstimatorKind::UlCs => "ulcs",
            EstimatorKind::UlQuant => "ulquant",
            EstimatorKind::LMono => "lmono",
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ulbdd" => Ok(EstimatorKind::UlBdd),
            "ulcs" => Ok(EstimatorKind::UlCs),
            "ulquant" => Ok(EstimatorKind::UlQuant),
            "lmono" => Ok(EstimatorKind::LMono),
            other => Err(Error::Config(format!(
                "unknown estimator `{other}` (expected ulbdd, ulcs, ulquant, lmono)"
            ))),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One (scenario, estimator) cell of an MSE table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseRow {
    pub scenario: String,
    pub estimator: String,
    pub mean_mse: f64,
    pub mc_stderr: f64,
    /// Replications contributing to the mean (failures excluded).
    pub reps: usize,
    pub failures: usize,
}

/// Run every estimator on every scenario over independent replications and
/// aggregate per-cell MSE means with Monte Carlo standard errors. Estimator
/// failures on a replication are counted and excluded from the mean.
pub fn run_table(scenarios: &[Scenario], estimators: &[EstimatorKind]) -> Result<Vec<MseRow>> {
    let mut rows = Vec::new();
    for scenario in scenarios {
        scenario.validate()?;
        let per_rep: Vec<Vec<std::result::Result<f64, String>>> = (0..scenario.reps)
            .into_par_iter()
            .map(|rep| {
                estimators
                    .iter()
                    .map(|kind| run_estimator(scenario, rep, *kind).map_err(|e| e.to_string()))
                    .collect()
            })
            .collect();

        for (col, kind) in estimators.iter().enumerate() {
            let values: Vec<f64> = per_rep
                .iter()
                .filter_map(|row| row[col].as_ref().ok())
                .copied()
                .collect();
            let failures = scenario.reps - values.len();
            let k = values.len();
            let (mean, stderr) = if k == 0 {
                (f64::NAN, f64::NAN)
            } else {
                let mean = values.iter().sum::<f64>() / k as f64;
                let var = if k > 1 {
                    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64
                } else {
                    0.0
                };
                (mean, (var / k as f64).sqrt())
            };
            rows.push(MseRow {
                scenario: scenario.label(),
                estimator: kind.name().to_string(),
                mean_mse: mean,
                mc_stderr: stderr,
                reps: k,
                failures,
            });
        }
    }
    Ok(rows)
}

fn run_estimator(scenario: &Scenario, rep: usize, kind: EstimatorKind) -> Result<f64> {
    let truth = scenario.truth();
    match kind {
        EstimatorKind::UlBdd => {
            let (xs, ys) = simulate_dataset(scenario, rep);
            let config = benchmark_fit_config(xs.len(), &ys, &scenario.noise)?;
            let result = fit(&xs, &ys, &scenario.noise, &config)?;
            Ok(mse(&result.fitted, truth, &xs))
        }
        EstimatorKind::UlCs => {
            let (xs, ys) = simulate_dataset(scenario, rep);
            let config = DeconvConfig::default_for(ys.len(), &scenario.noise, &ys)?;
            let est = cs_estimator(&xs, &ys, &scenario.noise, &config)?;
            Ok(mse(&est, truth, &xs))
        }
        EstimatorKind::UlQuant => {
            let (xs, ys) = simulate_dataset(scenario, rep);
            let matched = quantile_match(&xs, &ys)?;
            Ok(mse_fn(|x| matched.eval(x), truth, &xs))
        }
        EstimatorKind::LMono => {
            let (xs, ys) = simulate_linked(scenario, rep);
            let est = pava(&xs, &ys)?;
            Ok(mse(&est, truth, &xs))
        }
    }
}

/// Render MSE rows as CSV with a fixed header.
pub fn table_to_csv(rows: &[MseRow]) -> String {
    let mut out = String::from("scenario,estimator,mean_mse,mc_stderr,reps,failures\n");
    for r in rows {
        out.push_str(&format!(
            "\"{}\",{},{},{},{},{}\n",
            r.scenario, r.estimator, r.mean_mse, r.mc_stderr, r.reps, r.failures
        ));
    }
    out
}

/// Median windowed L1 error of the minimum-contrast fit for each sample size:
/// the average of `|m̂ − m₀|` over the covariates falling inside the window,
/// replicated and summarized by the median. The window must be interior to
/// the support.
pub fn rate_scan(base: &Scenario, ns: &[usize], window: (f64, f64)) -> Result<Vec<f64>> {
    base.validate()?;
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns.is_empty() {
        return Err(Error::Config("sample sizes must be increasing".into()));
    }
    if !(base.support.0 < window.0 && window.0 < window.1 && window.1 < base.support.1) {
        return Err(Error::Config(
            "rate-scan window must be interior to the support".into(),
        ));
    }
    let mut medians = Vec::with_capacity(ns.len());
    for &n in ns {
        let scenario = Scenario {
            n_x: n,
            n_y: n,
            ..base.clone()
        };
        let mut errors: Vec<f64> = (0..scenario.reps)
            .into_par_iter()
            .map(|rep| {
                let (xs, ys) = simulate_dataset(&scenario, rep);
                let config = benchmark_fit_config(xs.len(), &ys, &scenario.noise)?;
                let result = fit(&xs, &ys, &scenario.noise, &config)?;
                let truth = scenario.truth();
                let inside: Vec<f64> = xs
                    .iter()
                    .copied()
                    .filter(|x| (window.0..=window.1).contains(x))
                    .collect();
                Ok(inside
                    .iter()
                    .map(|x| (result.fitted.eval(*x) - truth(*x)).abs())
                    .sum::<f64>()
                    / inside.len().max(1) as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        errors.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = errors.len() / 2;
        let median = if errors.len() % 2 == 1 {
            errors[mid]
        } else {
            0.5 * (errors[mid - 1] + errors[mid])
        };
        medians.push(median);
    }
    Ok(medians)
}
