//! Noise-distribution abstraction: CDF, density, the convolution kernel
//! `B(m) = E Φ_ε(ε + m)`, and construction of empirical noise models from
//! residual samples.

use std::path::Path;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// The supported error-distribution families.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    /// Zero-centered Laplace with scale `λ > 0` (variance `2λ²`).
    Laplace { scale: f64 },
    /// Zero-centered Gaussian with standard deviation `σ > 0`.
    Gaussian { stddev: f64 },
    /// Empirical distribution of a residual sample (kept sorted ascending).
    Empirical { residuals: Vec<f64>, symmetrized: bool },
}

/// An error distribution together with optional smoothness metadata.
///
/// Values are immutable after construction; all operations are pure, so a
/// model can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    kind: NoiseKind,
    /// Ordinary-smoothness order of the density. Metadata only: it is read by
    /// the spectral-cutoff rule of the deconvolution baseline and by rate
    /// reporting, never by the optimizer. Laplace defaults to 2, matching the
    /// `|t|^{-2}` decay of its characteristic function.
    beta: Option<f64>,
}

impl NoiseModel {
    pub fn laplace(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Laplace scale must be positive and finite, got {scale}"
            )));
        }
        Ok(NoiseModel {
            kind: NoiseKind::Laplace { scale },
            beta: Some(2.0),
        })
    }

    pub fn gaussian(stddev: f64) -> Result<Self> {
        if !(stddev > 0.0) || !stddev.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Gaussian stddev must be positive and finite, got {stddev}"
            )));
        }
        Ok(NoiseModel {
            kind: NoiseKind::Gaussian { stddev },
            beta: None,
        })
    }

    /// Empirical noise model from a residual sample. With `symmetrize` the
    /// sample is augmented by its negation before sorting; off by default
    /// callers, since symmetry is assumed but not enforced.
    pub fn empirical(residuals: Vec<f64>, symmetrize: bool) -> Result<Self> {
        if residuals.is_empty() {
            return Err(Error::EmptyInput("empirical residual sample".into()));
        }
        if residuals.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter(
                "empirical residual sample contains non-finite values".into(),
            ));
        }
        let mut residuals = residuals;
        if symmetrize {
            let negated: Vec<f64> = residuals.iter().map(|r| -r).collect();
            residuals.extend(negated);
        }
        residuals.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(NoiseModel {
            kind: NoiseKind::Empirical {
                residuals,
                symmetrized: symmetrize,
            },
            beta: None,
        })
    }

    /// Laplace model with scale `√(variance/2)`, the rule used when only a
    /// residual variance estimate is available.
    pub fn laplace_from_variance(sample_variance: f64) -> Result<Self> {
        if !(sample_variance > 0.0) || !sample_variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive and finite, got {sample_variance}"
            )));
        }
        Self::laplace((sample_variance / 2.0).sqrt())
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        self.beta = Some(beta);
        Ok(self)
    }

    pub fn kind(&self) -> &NoiseKind {
        &self.kind
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self.kind, NoiseKind::Empirical { .. })
    }

    /// Standard deviation of the noise: `λ√2` for Laplace, `σ` for Gaussian,
    /// and the root mean square of the residual sample for empirical models
    /// (the noise is zero-mean by assumption). May be zero for a degenerate
    /// residual sample.
    pub fn stddev(&self) -> f64 {
        match &self.kind {
            NoiseKind::Laplace { scale } => scale * SQRT_2,
            NoiseKind::Gaussian { stddev } => *stddev,
            NoiseKind::Empirical { residuals, .. } => {
                let n = residuals.len() as f64;
                (residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt()
            }
        }
    }

    /// CDF `Φ_ε(z)`. Total function: the empirical kind returns the
    /// right-continuous empirical distribution of the residual sample.
    pub fn cdf(&self, z: f64) -> f64 {
        match &self.kind {
            NoiseKind::Laplace { scale } => {
                if z <= 0.0 {
                    0.5 * (z / scale).exp()
                } else {
                    1.0 - 0.5 * (-z / scale).exp()
                }
            }
            NoiseKind::Gaussian { stddev } => standard_normal_cdf(z / stddev),
            NoiseKind::Empirical { residuals, .. } => {
                let count = residuals.partition_point(|r| *r <= z);
                count as f64 / residuals.len() as f64
            }
        }
    }

    /// Density `f_ε(z)`. Only defined for the parametric kinds: the empirical
    /// gradient path works with `B̂` and never needs a density estimate.
    pub fn pdf(&self, z: f64) -> Result<f64> {
        match &self.kind {
            NoiseKind::Laplace { scale } => Ok((-z.abs() / scale).exp() / (2.0 * scale)),
            NoiseKind::Gaussian { stddev } => {
                let u = z / stddev;
                Ok(INV_SQRT_2PI * (-0.5 * u * u).exp() / stddev)
            }
            NoiseKind::Empirical { .. } => Err(Error::Unsupported(
                "empirical noise models carry no density".into(),
            )),
        }
    }

    /// The kernel `B(m) = E Φ_ε(ε + m)`.
    ///
    /// Closed forms: Laplace `e^{m/λ}(1/2 + |m|/(4λ))` for `m ≤ 0` and
    /// `1 − e^{−m/λ}(1/2 + m/(4λ))` for `m ≥ 0`; Gaussian `Φ(m/(σ√2))`.
    /// Empirical models return the plug-in average `n⁻¹ Σ Φ̂(ε*_i + m)`,
    /// evaluated exactly by counting pairs of residuals.
    pub fn bee(&self, m: f64) -> f64 {
        match &self.kind {
            NoiseKind::Laplace { scale } => {
                if m <= 0.0 {
                    (m / scale).exp() * (0.5 + (-m) / (4.0 * scale))
                } else {
                    1.0 - (-m / scale).exp() * (0.5 + m / (4.0 * scale))
                }
            }
            NoiseKind::Gaussian { stddev } => standard_normal_cdf(m / (stddev * SQRT_2)),
            NoiseKind::Empirical { residuals, .. } => {
                // n⁻² #{(i,j) : ε_i ≤ ε_j + m}, via a forward sweep over the
                // sorted sample (the thresholds ε_j + m are nondecreasing).
                let n = residuals.len();
                let mut below = 0usize;
                let mut total = 0usize;
                for &e in residuals {
                    let t = e + m;
                    while below < n && residuals[below] <= t {
                        below += 1;
                    }
                    total += below;
                }
                total as f64 / (n * n) as f64
            }
        }
    }

    /// Antiderivative `A(z) = ∫_{−∞}^z Φ_ε(t) dt` for the parametric kinds.
    /// Used for exact segment integrals and tail bounds in the objective.
    pub(crate) fn cdf_antiderivative(&self, z: f64) -> Option<f64> {
        match &self.kind {
            NoiseKind::Laplace { scale } => Some(if z <= 0.0 {
                0.5 * scale * (z / scale).exp()
            } else {
                z + 0.5 * scale * (-z / scale).exp()
            }),
            NoiseKind::Gaussian { stddev } => {
                let u = z / stddev;
                Some(z * standard_normal_cdf(u) + stddev * INV_SQRT_2PI * (-0.5 * u * u).exp())
            }
            NoiseKind::Empirical { .. } => None,
        }
    }

    /// Upper bound on `∫_{−∞}^z Φ_ε(t)² dt` for `z ≤ 0`, used for tail
    /// control of the squared-distance criterion. Exact for Laplace;
    /// a Mills-ratio bound for Gaussian.
    pub(crate) fn cdf_sq_tail_bound(&self, z: f64) -> Option<f64> {
        debug_assert!(z <= 0.0);
        match &self.kind {
            NoiseKind::Laplace { scale } => Some(scale / 8.0 * (2.0 * z / scale).exp()),
            NoiseKind::Gaussian { stddev } => {
                let v = -z / stddev;
                if v < 1.0 {
                    self.cdf_antiderivative(z)
                } else {
                    // Φ(−v)² ≤ e^{−v²} for v ≥ 1, and ∫_v^∞ e^{−u²} du ≤ e^{−v²}/(2v)
                    Some(stddev * (-v * v).exp() / (2.0 * v))
                }
            }
            NoiseKind::Empirical { .. } => None,
        }
    }

    /// Characteristic function of the noise density, real-valued by symmetry.
    /// `None` for empirical models.
    pub fn characteristic(&self, t: f64) -> Option<f64> {
        match &self.kind {
            NoiseKind::Laplace { scale } => Some(1.0 / (1.0 + scale * scale * t * t)),
            NoiseKind::Gaussian { stddev } => Some((-0.5 * stddev * stddev * t * t).exp()),
            NoiseKind::Empirical { .. } => None,
        }
    }
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Split repeated responses `(y1, y2)` into unlinked responses
/// `y* = (y1 + y2)/2` and noise residuals `ε* = (y1 − y2)/2`.
pub fn longitudinal_residuals(pairs: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("longitudinal pairs".into()));
    }
    let ystar = pairs.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let epsstar = pairs.iter().map(|(a, b)| 0.5 * (a - b)).collect();
    Ok((ystar, epsstar))
}

/// Residuals of a classical isotonic (least-squares) fit on a linked
/// subsample, for use as a noise sample. The fit residuals sum to zero.
pub fn linked_residuals(linked_xs: &[f64], linked_ys: &[f64]) -> Result<Vec<f64>> {
    if linked_xs.len() != linked_ys.len() {
        return Err(Error::ShapeMismatch(format!(
            "linked samples have lengths {} and {}",
            linked_xs.len(),
            linked_ys.len()
        )));
    }
    if linked_xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "linked residuals need at least 2 pairs".into(),
        ));
    }
    let fit = crate::baselines::pava(linked_xs, linked_ys)?;
    Ok(linked_xs
        .iter()
        .zip(linked_ys)
        .map(|(x, y)| y - fit.eval(*x))
        .collect())
}

/// Read a residual sample from a single-column CSV with header `eps`.
pub fn read_residuals_csv(path: &Path) -> Result<Vec<f64>> {
    read_single_column(path, "eps")
}

/// Read longitudinal response pairs from a two-column CSV with headers `y1,y2`.
pub fn read_longitudinal_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_open_error)?;
    let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
    let i1 = column_index(&headers, "y1")?;
    let i2 = column_index(&headers, "y2")?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let y1 = parse_field(&record, i1, "y1", line)?;
        let y2 = parse_field(&record, i2, "y2", line)?;
        out.push((y1, y2));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

/// Read one named float column from a CSV file with a header row.
pub fn read_single_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_open_error)?;
    let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
    let idx = column_index(&headers, column)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        out.push(parse_field(&record, idx, column, line)?);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column `{name}` in header row"),
        })
}

fn parse_field(record: &csv::StringRecord, idx: usize, column: &str, line: u64) -> Result<f64> {
    let raw = record.get(idx).ok_or_else(|| Error::Parse {
        line,
        message: format!("row has no `{column}` field"),
    })?;
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{raw}` in column `{column}` as a number"),
    })
}

fn csv_open_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => csv_error(&e),
    }
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Simpson quadrature of ∫ Φ_ε(y) f_ε(y − m) dy, split at the density and
    // CDF kinks so each piece is smooth. Independent of the closed forms.
    fn bee_by_quadrature(model: &NoiseModel, m: f64) -> f64 {
        let s = model.stddev();
        let lo = (m.min(0.0)) - 60.0 * s;
        let hi = (m.max(0.0)) + 60.0 * s;
        let mut cuts = vec![lo, 0.0, m, hi];
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += simpson(|y| model.cdf(y) * model.pdf(y - m).unwrap(), w[0], w[1], 4096);
        }
        total
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        if b <= a {
            return 0.0;
        }
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn laplace_cdf_values() {
        let m = NoiseModel::laplace(1.0).unwrap();
        assert_abs_diff_eq!(m.cdf(0.0), 0.5);
        assert_abs_diff_eq!(m.cdf(1.0), 1.0 - 0.5 * (-1.0f64).exp(), epsilon = 1e-15);
        // cross-check the closed form against quadrature of the density
        let by_quad = 0.5 + simpson(|z| m.pdf(z).unwrap(), 0.0, 1.0, 2048);
        assert_abs_diff_eq!(m.cdf(1.0), by_quad, epsilon = 1e-10);
    }

    #[test]
    fn empirical_cdf_is_right_continuous() {
        let m = NoiseModel::empirical(vec![-1.0, 1.0], false).unwrap();
        assert_abs_diff_eq!(m.cdf(0.0), 0.5);
        assert_abs_diff_eq!(m.cdf(-1.0), 0.5);
        assert_abs_diff_eq!(m.cdf(-1.0 - 1e-12), 0.0);
        assert_abs_diff_eq!(m.cdf(1.0), 1.0);
    }

    #[test]
    fn pdf_values() {
        assert_abs_diff_eq!(NoiseModel::laplace(1.0).unwrap().pdf(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(
            NoiseModel::gaussian(1.0).unwrap().pdf(0.0).unwrap(),
            0.3989422804014327,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            NoiseModel::laplace(2.0).unwrap().pdf(-2.0).unwrap(),
            (-1.0f64).exp() / 4.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pdf_rejected_for_empirical() {
        let m = NoiseModel::empirical(vec![0.0], false).unwrap();
        assert!(matches!(m.pdf(0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pdf_integrates_to_one() {
        for model in [
            NoiseModel::laplace(0.7).unwrap(),
            NoiseModel::gaussian(1.3).unwrap(),
        ] {
            let s = model.stddev();
            let total = simpson(|z| model.pdf(z).unwrap(), -40.0 * s, 0.0, 8192)
                + simpson(|z| model.pdf(z).unwrap(), 0.0, 40.0 * s, 8192);
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn bee_at_zero_is_half() {
        for model in [
            NoiseModel::laplace(0.5).unwrap(),
            NoiseModel::laplace(2.0).unwrap(),
            NoiseModel::gaussian(1.0).unwrap(),
        ] {
            assert_abs_diff_eq!(model.bee(0.0), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn bee_closed_forms() {
        let lap = NoiseModel::laplace(1.0).unwrap();
        assert_abs_diff_eq!(lap.bee(-1.0), 0.75 * (-1.0f64).exp(), epsilon = 1e-15);
        let gau = NoiseModel::gaussian(1.0).unwrap();
        assert_abs_diff_eq!(gau.bee(1.0), 0.7602499389065233, epsilon = 1e-12);
    }

    #[test]
    fn bee_matches_quadrature_on_grid() {
        // unit-test sized version of the full acceptance sweep
        for model in [
            NoiseModel::laplace(1.0).unwrap(),
            NoiseModel::gaussian(0.5).unwrap(),
        ] {
            let mut m = -10.0;
            while m <= 10.0 {
                assert_abs_diff_eq!(model.bee(m), bee_by_quadrature(&model, m), epsilon = 1e-8);
                m += 2.5;
            }
        }
    }

    #[test]
    fn bee_symmetry_and_monotonicity() {
        for model in [
            NoiseModel::laplace(0.8).unwrap(),
            NoiseModel::gaussian(1.7).unwrap(),
        ] {
            let mut prev = -1.0;
            let mut m = -6.0;
            while m <= 6.0 {
                let b = model.bee(m);
                assert!((model.bee(m) + model.bee(-m) - 1.0).abs() < 1e-12);
                assert!(b >= prev);
                prev = b;
                m += 0.25;
            }
        }
    }

    #[test]
    fn empirical_bee_matches_plugin_average() {
        let sample = vec![-1.5, -0.2, 0.1, 0.4, 2.0];
        let model = NoiseModel::empirical(sample.clone(), false).unwrap();
        for m in [-2.0, -0.3, 0.0, 0.15, 1.0, 3.0] {
            let direct: f64 =
                sample.iter().map(|e| model.cdf(e + m)).sum::<f64>() / sample.len() as f64;
            assert_abs_diff_eq!(model.bee(m), direct, epsilon = 1e-15);
        }
    }

    #[test]
    fn empirical_bee_converges_to_laplace_closed_form() {
        use rand::Rng;
        use rand::SeedableRng;
        let truth = NoiseModel::laplace(1.0).unwrap();
        // average the sup gap over a few draws per size so a lucky small
        // sample cannot break the trend
        let mut gaps = Vec::new();
        for size in [100usize, 1000, 10_000] {
            let mut avg = 0.0;
            for seed in 0..4u64 {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42 + seed);
                let sample: Vec<f64> = (0..size)
                    .map(|_| {
                        let u: f64 = rng.random();
                        if u < 0.5 {
                            (2.0 * u.max(f64::MIN_POSITIVE)).ln()
                        } else {
                            -(2.0 * (1.0 - u)).ln()
                        }
                    })
                    .collect();
                let emp = NoiseModel::empirical(sample, false).unwrap();
                let mut gap: f64 = 0.0;
                let mut m = -3.0;
                while m <= 3.0 {
                    gap = gap.max((emp.bee(m) - truth.bee(m)).abs());
                    m += 0.1;
                }
                avg += gap;
            }
            gaps.push(avg / 4.0);
        }
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "gaps not shrinking: {gaps:?}");
    }

    #[test]
    fn laplace_from_variance_rule() {
        let m = NoiseModel::laplace_from_variance(2.0).unwrap();
        assert!(matches!(m.kind(), NoiseKind::Laplace { scale } if (scale - 1.0).abs() < 1e-15));
        let m = NoiseModel::laplace_from_variance(8.0).unwrap();
        assert!(matches!(m.kind(), NoiseKind::Laplace { scale } if (scale - 2.0).abs() < 1e-15));
        assert!(NoiseModel::laplace_from_variance(0.0).is_err());
    }

    #[test]
    fn longitudinal_residual_formulas() {
        let (ys, eps) = longitudinal_residuals(&[(4.0, 2.0)]).unwrap();
        assert_eq!(ys, vec![3.0]);
        assert_eq!(eps, vec![1.0]);

        let (ys, eps) = longitudinal_residuals(&[(7.0, 7.0)]).unwrap();
        assert_eq!(ys, vec![7.0]);
        assert_eq!(eps, vec![0.0]);

        let (ys, eps) = longitudinal_residuals(&[(0.0, 2.0), (2.0, 0.0)]).unwrap();
        assert_eq!(ys, vec![1.0, 1.0]);
        assert_eq!(eps, vec![-1.0, 1.0]);

        assert!(matches!(longitudinal_residuals(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn linked_residuals_from_isotonic_fit() {
        let r = linked_residuals(&[1.0, 2.0], &[0.0, 2.0]).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);

        let r = linked_residuals(&[1.0, 2.0], &[2.0, 0.0]).unwrap();
        assert_eq!(r, vec![1.0, -1.0]);

        assert!(linked_residuals(&[1.0], &[5.0]).is_err());
        assert!(matches!(
            linked_residuals(&[1.0, 2.0], &[1.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn linked_residuals_sum_to_zero() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 4.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + ((x * 7.3).sin())).collect();
        let r = linked_residuals(&xs, &ys).unwrap();
        assert!(r.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn symmetrized_empirical_doubles_sample() {
        let m = NoiseModel::empirical(vec![1.0, 2.0], true).unwrap();
        match m.kind() {
            NoiseKind::Empirical { residuals, symmetrized } => {
                assert!(*symmetrized);
                assert_eq!(residuals, &vec![-2.0, -1.0, 1.0, 2.0]);
            }
            _ => panic!("wrong kind"),
        }
    }
}
