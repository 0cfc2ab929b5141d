//! Modified gradient descent over grouped levels: merge approximately equal
//! entries, share one gradient slot per group, and reconstruct a monotone
//! step function at the end.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseModel};
use crate::objective::{
    fenchel_residuals, gradient_raw, objective, objective_empirical, GroupedLevels,
    QuadratureConfig,
};
use crate::stepfn::StepFunction;

/// Starting vector for the descent.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// The sorted response vector; with unequal sample sizes, response
    /// quantiles at the covariate plotting positions.
    SortedResponses,
    /// A caller-supplied nondecreasing vector of length `n_x`.
    UserVector(Vec<f64>),
}

/// Hyperparameters of the descent. Deterministic: no randomness anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Grouping tolerance: adjacent entries within `eps` of the group start
    /// are merged into one level.
    pub eps: f64,
    /// Step size.
    pub eta: f64,
    /// Number of outer iterations.
    pub max_iters: usize,
    /// Gradient steps taken after each grouping pass.
    pub steps_per_group: usize,
    /// Stop when the monitored objective decrease falls below this
    /// threshold; 0 disables the rule and all `max_iters` iterations run.
    pub stop_tol: f64,
    /// Evaluate the objective every this many iterations (0 = never).
    pub monitor_every: usize,
    pub init: Init,
}

impl FitConfig {
    pub fn new(eps: f64, eta: f64, max_iters: usize) -> Result<Self> {
        let config = FitConfig {
            eps,
            eta,
            max_iters,
            steps_per_group: 1,
            stop_tol: 0.0,
            monitor_every: 0,
            init: Init::SortedResponses,
        };
        config.validate()?;
        Ok(config)
    }

    /// The defaults used by the simulation harness: heuristic `eps`,
    /// `eta = n_x/2`, and `20·n_x` iterations.
    pub fn defaults(n_x: usize, ys: &[f64], noise: &NoiseModel) -> Result<Self> {
        if n_x == 0 {
            return Err(Error::EmptyInput("covariate sample".into()));
        }
        FitConfig::new(default_eps(ys, noise.stddev())?, 0.5 * n_x as f64, 20 * n_x)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.steps_per_group == 0 {
            return Err(Error::Config("steps_per_group must be at least 1".into()));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::Config(format!(
                "stop_tol must be nonnegative, got {}",
                self.stop_tol
            )));
        }
        if let Init::UserVector(v) = &self.init {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config("init vector must be finite".into()));
            }
            if v.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Config("init vector must be nondecreasing".into()));
            }
        }
        Ok(())
    }
}

/// Heuristic grouping tolerance `(Y_(n) − Y_(1)) / (n^{1/3} σ)`, floored at
/// 1e-8 when the responses are constant.
pub fn default_eps(ys: &[f64], noise_scale: f64) -> Result<f64> {
    if ys.len() < 2 {
        return Err(Error::EmptyInput("need at least 2 responses for the eps heuristic".into()));
    }
    if !(noise_scale > 0.0) || !noise_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise scale must be positive, got {noise_scale}"
        )));
    }
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for y in ys {
        min = min.min(*y);
        max = max.max(*y);
    }
    let eps = (max - min) / ((ys.len() as f64).cbrt() * noise_scale);
    Ok(if eps > 0.0 { eps } else { 1e-8 })
}

/// Output of a fit: the reconstructed step function plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub fitted: StepFunction,
    pub levels: GroupedLevels,
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub max_fenchel_residual: f64,
    pub config_echo: FitConfig,
}

impl FitResult {
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct View<'a> {
            fitted: &'a StepFunction,
            iterations: usize,
            fenchel_residual: f64,
            objective_trace: &'a [f64],
        }
        serde_json::to_value(View {
            fitted: &self.fitted,
            iterations: self.iterations_run,
            fenchel_residual: self.max_fenchel_residual,
            objective_trace: &self.objective_trace,
        })
        .expect("fit result serialization cannot fail")
    }
}

/// Stall diagnostic from [`fit_with_trace_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCheck {
    pub stalled: bool,
    /// Iteration at which the third consecutive non-decreasing check fired.
    pub stall_iteration: Option<usize>,
}

/// Run the descent and return the reconstructed monotone fit.
pub fn fit(xs: &[f64], ys: &[f64], noise: &NoiseModel, config: &FitConfig) -> Result<FitResult> {
    run(xs, ys, noise, config, false).map(|(result, _)| result)
}

/// As [`fit`], but additionally asserts that the monitored objective keeps
/// improving. Three consecutive monitored checks that fail to improve on the
/// best value by at least 0.1% halt the run: if the state is near-stationary
/// (max optimality residual below 1e-2) that is convergence and the run stops
/// quietly, otherwise the stall flag is set. Requires `monitor_every ≥ 1`.
pub fn fit_with_trace_check(
    xs: &[f64],
    ys: &[f64],
    noise: &NoiseModel,
    config: &FitConfig,
) -> Result<(FitResult, TraceCheck)> {
    if config.monitor_every == 0 {
        return Err(Error::Config(
            "fit_with_trace_check needs monitor_every >= 1".into(),
        ));
    }
    run(xs, ys, noise, config, true)
}

fn run(
    xs: &[f64],
    ys: &[f64],
    noise: &NoiseModel,
    config: &FitConfig,
    trace_check: bool,
) -> Result<(FitResult, TraceCheck)> {
    config.validate()?;
    if xs.is_empty() {
        return Err(Error::EmptyInput("covariate sample".into()));
    }
    if ys.is_empty() {
        return Err(Error::EmptyInput("response sample".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("covariates must be finite".into()));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidParameter("responses must be finite".into()));
    }

    let mut sorted_xs = xs.to_vec();
    sorted_xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n_x = sorted_xs.len();

    let mut levels = initial_vector(&config.init, n_x, ys)?;
    let mut counts = vec![1usize; n_x];

    let quad = if noise.is_empirical() {
        None
    } else {
        Some(QuadratureConfig::for_noise(noise))
    };
    let monitored_objective = |levels: &[f64], counts: &[usize]| -> Result<f64> {
        let grouped = grouped_from_state(levels, counts)?;
        match (&quad, noise.kind()) {
            (Some(q), _) => objective(&grouped, ys, noise, q),
            (None, NoiseKind::Empirical { residuals, .. }) => {
                objective_empirical(&grouped, ys, residuals)
            }
            _ => unreachable!("quadrature config exists iff noise is parametric"),
        }
    };

    // A plateau alone does not distinguish convergence from a stepsize that
    // bounces around: the tie-breaker is stationarity of the current state.
    // "No progress" means failing to beat the best objective seen by a 0.1%
    // margin, which also catches slowly drifting oscillations.
    const STALL_RESIDUAL_TOL: f64 = 1e-2;
    const IMPROVEMENT_REL: f64 = 1e-3;

    let mut trace = Vec::new();
    let mut iterations_run = 0usize;
    let mut best = f64::INFINITY;
    let mut checks_without_improvement = 0usize;
    let mut check = TraceCheck {
        stalled: false,
        stall_iteration: None,
    };

    for iter in 1..=config.max_iters {
        iterations_run = iter;
        merge_to_fixpoint(&mut levels, &mut counts, config.eps);

        for _ in 0..config.steps_per_group {
            let grad = gradient_raw(&levels, &counts, ys, noise);
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NumericFailure {
                    iteration: iter,
                    message: "non-finite gradient".into(),
                });
            }
            for (level, g) in levels.iter_mut().zip(&grad) {
                *level -= config.eta * g;
            }
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::NumericFailure {
                iteration: iter,
                message: "non-finite level after step".into(),
            });
        }

        if config.monitor_every > 0 && iter % config.monitor_every == 0 {
            let value = monitored_objective(&levels, &counts)?;
            let decrease = trace.last().map_or(f64::INFINITY, |prev| prev - value);
            trace.push(value);
            if trace_check {
                let improved = !best.is_finite() || value < best - IMPROVEMENT_REL * best;
                if improved {
                    checks_without_improvement = 0;
                } else {
                    checks_without_improvement += 1;
                    if checks_without_improvement >= 3 {
                        let grouped = grouped_from_state(&levels, &counts)?;
                        let residual = fenchel_residuals(&grouped, ys, noise)
                            .into_iter()
                            .fold(0.0, f64::max);
                        if residual > STALL_RESIDUAL_TOL {
                            check.stalled = true;
                            check.stall_iteration = Some(iter);
                        }
                        break;
                    }
                }
            }
            best = best.min(value);
            if config.stop_tol > 0.0 && decrease < config.stop_tol {
                break;
            }
        }
    }

    // Reconstruct the full-length vector, reorder nondecreasing, and bind to
    // the sorted covariates.
    let mut full = Vec::with_capacity(n_x);
    for (level, count) in levels.iter().zip(&counts) {
        full.extend(std::iter::repeat(*level).take(*count));
    }
    full.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let domain = (sorted_xs[0], sorted_xs[n_x - 1]);
    let fitted = StepFunction::from_fitted(&sorted_xs, &full, domain)?;
    let final_levels = GroupedLevels::from_sorted_values(&full)?;
    let max_fenchel_residual = fenchel_residuals(&final_levels, ys, noise)
        .into_iter()
        .fold(0.0, f64::max);

    Ok((
        FitResult {
            fitted,
            levels: final_levels,
            objective_trace: trace,
            iterations_run,
            max_fenchel_residual,
            config_echo: config.clone(),
        },
        check,
    ))
}

fn initial_vector(init: &Init, n_x: usize, ys: &[f64]) -> Result<Vec<f64>> {
    match init {
        Init::SortedResponses => {
            let mut sorted_ys = ys.to_vec();
            sorted_ys.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted_ys.iter().any(|y| !y.is_finite()) {
                return Err(Error::InvalidParameter("responses must be finite".into()));
            }
            let n_y = sorted_ys.len();
            if n_x == n_y {
                return Ok(sorted_ys);
            }
            // Response quantiles at the covariate plotting positions; exact
            // order statistics are recovered when the sizes agree.
            Ok((0..n_x)
                .map(|i| {
                    let p = (i as f64 + 0.5) / n_x as f64;
                    let idx = ((p * n_y as f64).ceil() as usize).clamp(1, n_y) - 1;
                    sorted_ys[idx]
                })
                .collect())
        }
        Init::UserVector(v) => {
            if v.len() != n_x {
                return Err(Error::Config(format!(
                    "init vector has length {}, expected {n_x}",
                    v.len()
                )));
            }
            Ok(v.clone())
        }
    }
}

/// One grouping step of the descent: scan left to right, merging entries
/// while they stay within `eps` of the group start, and replace each group by
/// its count-weighted mean. Passes repeat until stable, so on exit adjacent
/// levels differ by more than `eps`.
fn merge_to_fixpoint(levels: &mut Vec<f64>, counts: &mut Vec<usize>, eps: f64) {
    loop {
        let before = levels.len();
        merge_pass(levels, counts, eps);
        if levels.len() == before {
            return;
        }
    }
}

fn merge_pass(levels: &mut Vec<f64>, counts: &mut Vec<usize>, eps: f64) {
    let n = levels.len();
    let mut out_levels = Vec::with_capacity(n);
    let mut out_counts = Vec::with_capacity(n);
    let mut start = 0usize;
    for j in 1..=n {
        if j == n || levels[j] - levels[start] > eps {
            let count: usize = counts[start..j].iter().sum();
            if j - start == 1 {
                out_levels.push(levels[start]);
            } else {
                let weighted: f64 = levels[start..j]
                    .iter()
                    .zip(&counts[start..j])
                    .map(|(v, c)| v * *c as f64)
                    .sum();
                out_levels.push(weighted / count as f64);
            }
            out_counts.push(count);
            start = j;
        }
    }
    *levels = out_levels;
    *counts = out_counts;
}

fn grouped_from_state(levels: &[f64], counts: &[usize]) -> Result<GroupedLevels> {
    let mut pairs: Vec<(f64, usize)> = levels.iter().copied().zip(counts.iter().copied()).collect();
    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(pairs.len());
    for (level, count) in pairs {
        match merged.last_mut() {
            Some((last, c)) if *last == level => *c += count,
            _ => merged.push((level, count)),
        }
    }
    GroupedLevels::new(
        merged.iter().map(|(l, _)| *l).collect(),
        merged.iter().map(|(_, c)| *c).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * rng.random::<f64>()
    }

    #[test]
    fn default_eps_heuristic() {
        let ys: Vec<f64> = (0..1000).map(|i| 8.0 * i as f64 / 999.0).collect();
        let eps = default_eps(&ys, 1.0).unwrap();
        assert!((eps - 0.8).abs() < 1e-12);
        let eps = default_eps(&ys, 2.0).unwrap();
        assert!((eps - 0.4).abs() < 1e-12);
        let eps = default_eps(&[3.0, 3.0, 3.0], 1.0).unwrap();
        assert_eq!(eps, 1e-8);
        assert!(default_eps(&[1.0], 1.0).is_err());
        assert!(default_eps(&[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::new(0.1, 1.0, 0).is_err());
        assert!(FitConfig::new(0.0, 1.0, 10).is_err());
        assert!(FitConfig::new(0.1, -1.0, 10).is_err());
        let mut config = FitConfig::new(0.1, 1.0, 10).unwrap();
        config.init = Init::UserVector(vec![2.0, 1.0]);
        assert!(config.validate().is_err());
    }

    #[test]
    fn merge_groups_by_distance_to_group_start() {
        let mut levels = vec![0.0, 0.3, 0.7, 2.0, 2.05];
        let mut counts = vec![1, 1, 1, 1, 1];
        merge_to_fixpoint(&mut levels, &mut counts, 0.5);
        // {0.0, 0.3} merge (0.7 exceeds eps from start 0.0), {2.0, 2.05} merge
        assert_eq!(counts, vec![2, 1, 2]);
        assert!((levels[0] - 0.15).abs() < 1e-15);
        assert!((levels[1] - 0.7).abs() < 1e-15);
        assert!((levels[2] - 2.025).abs() < 1e-15);
        // grouping soundness: adjacent levels now differ by more than eps
        assert!(levels.windows(2).all(|w| w[1] - w[0] > 0.5));
    }

    #[test]
    fn merge_uses_count_weighted_means() {
        let mut levels = vec![1.0, 2.0];
        let mut counts = vec![3, 1];
        merge_to_fixpoint(&mut levels, &mut counts, 1.0);
        assert_eq!(counts, vec![4]);
        assert!((levels[0] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn near_noiseless_fit_stays_at_sorted_responses() {
        // jittered grid keeps response gaps well above the noise scale
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..n)
            .map(|i| (i as f64 + 0.5 * rng.random::<f64>()) * 10.0 / n as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x).collect();
        let lambda = 1e-3;
        let noise = NoiseModel::laplace(lambda).unwrap();
        let mut config = FitConfig::new(1e-9, 0.5 * n as f64, 20 * n).unwrap();
        config.monitor_every = 0;
        let result = fit(&xs, &ys, &noise, &config).unwrap();

        let mut sorted_xs = xs.clone();
        sorted_xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut sorted_ys = ys.clone();
        sorted_ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let bound = 2.0 * lambda * (n as f64).ln();
        for (x, y) in sorted_xs.iter().zip(&sorted_ys) {
            assert!(
                (result.fitted.eval(*x) - y).abs() <= bound,
                "fitted strays from sorted responses at x = {x}"
            );
        }
    }

    #[test]
    fn fit_is_shift_equivariant() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 10.0)).collect();
        let noise = NoiseModel::laplace(1.0).unwrap();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| {
                let u: f64 = rng.random();
                let e = if u < 0.5 {
                    (2.0 * u.max(f64::MIN_POSITIVE)).ln()
                } else {
                    -(2.0 * (1.0 - u)).ln()
                };
                x + e
            })
            .collect();
        let config = FitConfig::new(0.8, 0.5 * n as f64, 400).unwrap();
        let base = fit(&xs, &ys, &noise, &config).unwrap();

        let c = 2.5;
        let ys_shifted: Vec<f64> = ys.iter().map(|y| y + c).collect();
        let shifted = fit(&xs, &ys_shifted, &noise, &config).unwrap();
        for x in &xs {
            assert!(
                (shifted.fitted.eval(*x) - base.fitted.eval(*x) - c).abs() <= 1e-10,
                "shift equivariance breaks at x = {x}"
            );
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 10.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let mut config = FitConfig::new(0.5, 15.0, 200).unwrap();
        config.monitor_every = 50;
        let a = fit(&xs, &ys, &noise, &config).unwrap();
        let b = fit(&xs, &ys, &noise, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grouped_descent_matches_ungrouped_while_no_merge_occurs() {
        // with eps = 0 and no exact ties the grouped state stays full length,
        // so the trajectory must coincide with plain per-entry descent
        let n = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 10.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 4.0)).collect();
        let noise = NoiseModel::laplace(1.0).unwrap();
        let iters = 50;
        let eta = 0.5 * n as f64;

        let config = FitConfig::new(f64::MIN_POSITIVE, eta, iters).unwrap();
        let grouped = fit(&xs, &ys, &noise, &config).unwrap();

        // ungrouped oracle: plain gradient descent on the full vector
        let mut state: Vec<f64> = {
            let mut s = ys.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            s
        };
        let ones = vec![1usize; n];
        for _ in 0..iters {
            let grad = gradient_raw(&state, &ones, &ys, &noise);
            for (m, g) in state.iter_mut().zip(&grad) {
                *m -= eta * g;
            }
        }
        state.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut sorted_xs = xs.clone();
        sorted_xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, oracle) in sorted_xs.iter().zip(&state) {
            assert_eq!(
                grouped.fitted.eval(*x),
                *oracle,
                "trajectories diverged at x = {x}"
            );
        }
    }

    #[test]
    fn grouping_soundness_counts_sum_to_n() {
        let n = 60;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 10.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let config = FitConfig::defaults(n, &ys, &noise).unwrap();
        let result = fit(&xs, &ys, &noise, &config).unwrap();
        assert_eq!(result.levels.n_x(), n);
        assert!(result
            .fitted
            .values()
            .windows(2)
            .all(|w| w[0] <= w[1]));
    }

    #[test]
    fn absurd_step_size_is_reported_not_silent() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 10.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 10.0)).collect();
        let noise = NoiseModel::laplace(1.0).unwrap();
        let mut config = FitConfig::new(0.5, 1e3, 2000).unwrap();
        config.monitor_every = 10;
        match fit_with_trace_check(&xs, &ys, &noise, &config) {
            Ok((_, check)) => assert!(check.stalled, "divergent run must flag a stall"),
            Err(Error::NumericFailure { .. }) => {}
            Err(other) => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn converged_run_does_not_stall() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 10.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let mut config = FitConfig::defaults(n, &ys, &noise).unwrap();
        config.monitor_every = 100;
        let (_, check) = fit_with_trace_check(&xs, &ys, &noise, &config).unwrap();
        assert!(!check.stalled);
    }

    #[test]
    fn trace_check_requires_monitoring() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let config = FitConfig::new(0.1, 1.0, 10).unwrap();
        assert!(matches!(
            fit_with_trace_check(&[1.0], &[1.0], &noise, &config),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let config = FitConfig::new(0.1, 1.0, 10).unwrap();
        assert!(matches!(
            fit(&[], &[1.0], &noise, &config),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            fit(&[1.0], &[], &noise, &config),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn nan_response_surfaces_as_error() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let config = FitConfig::new(0.1, 1.0, 10).unwrap();
        let err = fit(&[0.0, 1.0], &[0.0, f64::NAN], &noise, &config).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParameter(_) | Error::NumericFailure { .. }
        ));
    }

    #[test]
    fn unequal_sizes_use_response_quantiles_for_init() {
        let v = initial_vector(&Init::SortedResponses, 3, &[4.0, 1.0, 2.0, 3.0, 5.0, 6.0]).unwrap();
        // plotting positions 1/6, 3/6, 5/6 over six sorted responses
        assert_eq!(v, vec![1.0, 3.0, 5.0]);
        let v = initial_vector(&Init::SortedResponses, 4, &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn fit_result_json_shape() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let mut config = FitConfig::new(0.5, 1.0, 20).unwrap();
        config.monitor_every = 5;
        let result = fit(&[0.0, 1.0, 2.0], &[0.1, 0.9, 2.2], &noise, &config).unwrap();
        let json = result.to_json();
        assert!(json.get("fitted").is_some());
        assert!(json.get("iterations").is_some());
        assert!(json.get("fenchel_residual").is_some());
        assert!(json.get("objective_trace").is_some());
    }
}
