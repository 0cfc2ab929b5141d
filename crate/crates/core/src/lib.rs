//! Monotone regression from unlinked samples.
//!
//! The covariate and response samples are observed separately, with no
//! pairing information; only the distributional relation
//! `Y =d m(X) + ε` links them, for a nondecreasing `m` and a noise
//! distribution that is either known (Laplace or Gaussian) or estimated from
//! a residual sample. The estimator minimizes the integrated squared distance
//! between the response ECDF and the noise-convolved model CDF by gradient
//! descent over the distinct fitted levels.
//!
//! Modules:
//! - [`noise`]: noise models, the kernel `B(m) = E Φ_ε(ε + m)`, residual
//!   extraction from linked or longitudinal data;
//! - [`stepfn`]: monotone step functions, ECDFs, generalized inverses, exact
//!   squared-distance integrals;
//! - [`mod@objective`]: the criterion, its gradient, and stationarity
//!   residuals;
//! - [`mod@fit`]: the modified gradient descent over grouped levels;
//! - [`baselines`]: linked isotonic regression, quantile matching, and a
//!   spectral-cutoff deconvolution estimator;
//! - [`simlab`]: synthetic scenarios, the Monte Carlo MSE harness, rate scans.

pub mod baselines;
pub mod error;
pub mod fit;
pub mod noise;
pub mod objective;
pub mod simlab;
pub mod stepfn;

pub use baselines::{cs_estimator, deconv_cdf, pava, quantile_match, DeconvConfig, MatchedQuantiles};
pub use error::{Error, Result};
pub use fit::{default_eps, fit, fit_with_trace_check, FitConfig, FitResult, Init, TraceCheck};
pub use noise::{
    linked_residuals, longitudinal_residuals, NoiseKind, NoiseModel,
};
pub use objective::{
    fenchel_residuals, gradient, gradient_empirical, mixture_cdf, objective, objective_empirical,
    GroupedLevels, QuadratureConfig,
};
pub use simlab::{
    benchmark_fit_config, mse, mse_fn, rate_scan, run_table, simulate_dataset, simulate_linked,
    EstimatorKind, M0, MseRow, Scenario,
};
pub use stepfn::{l2_distance_sq, StepFunction};
