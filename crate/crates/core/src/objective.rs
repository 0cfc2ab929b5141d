//! The minimum-contrast criterion, its closed-form gradient over grouped
//! levels, and the stationarity residuals used as an optimality diagnostic.

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::stepfn::StepFunction;

/// Distinct fitted values together with their multiplicities. This is the
/// compressed state the optimizer iterates on: entries of the full fitted
/// vector that share a value share a gradient, so one slot per value suffices.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedLevels {
    levels: Vec<f64>,
    counts: Vec<usize>,
}

impl GroupedLevels {
    pub fn new(levels: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptyInput("grouped levels".into()));
        }
        if levels.len() != counts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} levels but {} counts",
                levels.len(),
                counts.len()
            )));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter("levels must be finite".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MonotonicityViolation(
                "levels must be strictly increasing".into(),
            ));
        }
        if counts.iter().any(|c| *c == 0) {
            return Err(Error::InvalidParameter("counts must be positive".into()));
        }
        Ok(GroupedLevels { levels, counts })
    }

    /// Group a sorted fitted vector by exact equality of adjacent entries.
    pub fn from_sorted_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("grouped levels".into()));
        }
        let mut levels = Vec::new();
        let mut counts = Vec::new();
        for &v in values {
            match levels.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    levels.push(v);
                    counts.push(1);
                }
            }
        }
        GroupedLevels::new(levels, counts)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Total number of covariate slots represented, `Σ counts`.
    pub fn n_x(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Expand back to the full-length sorted fitted vector.
    pub fn expand(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_x());
        for (level, count) in self.levels.iter().zip(&self.counts) {
            out.extend(std::iter::repeat(*level).take(*count));
        }
        out
    }
}

/// Settings for the numerical evaluation of the criterion. The integration
/// window spans the data and level hulls plus `range_padding` on each side;
/// the mass outside is controlled by an analytic tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub range_padding: f64,
    pub points: usize,
    pub tail_tolerance: f64,
}

impl QuadratureConfig {
    pub fn new(range_padding: f64, points: usize, tail_tolerance: f64) -> Result<Self> {
        if !(range_padding > 0.0) || !range_padding.is_finite() {
            return Err(Error::InvalidParameter("padding must be positive".into()));
        }
        if points < 64 {
            return Err(Error::InvalidParameter("need at least 64 quadrature points".into()));
        }
        if !(tail_tolerance > 0.0) {
            return Err(Error::InvalidParameter("tail tolerance must be positive".into()));
        }
        Ok(QuadratureConfig {
            range_padding,
            points,
            tail_tolerance,
        })
    }

    /// Default window of 12 noise scales with 4096 panels, which keeps the
    /// tail bound far below the finite-difference tolerances used in tests.
    pub fn for_noise(noise: &NoiseModel) -> Self {
        let scale = noise.stddev().max(f64::MIN_POSITIVE);
        QuadratureConfig {
            range_padding: 12.0 * scale,
            points: 4096,
            tail_tolerance: 1e-8,
        }
    }
}

/// The model mixture CDF `y ↦ n_x⁻¹ Σ_k count_k Φ_ε(y − level_k)`.
pub fn mixture_cdf(levels: &GroupedLevels, noise: &NoiseModel, y: f64) -> f64 {
    let n = levels.n_x() as f64;
    levels
        .levels()
        .iter()
        .zip(levels.counts())
        .map(|(m, c)| *c as f64 * noise.cdf(y - m))
        .sum::<f64>()
        / n
}

/// Integrated squared distance between the response ECDF and the model
/// mixture CDF, for parametric noise.
///
/// The squared difference is expanded into three terms: the two involving the
/// piecewise-constant ECDF are integrated exactly with the closed-form
/// antiderivative of `Φ_ε`, and the remaining smooth mixture-squared term by
/// composite Simpson. An analytic bound on the mass outside the window is
/// checked against `tail_tolerance`.
pub fn objective(
    levels: &GroupedLevels,
    ys: &[f64],
    noise: &NoiseModel,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if ys.is_empty() {
        return Err(Error::EmptyInput("response sample".into()));
    }
    if noise.is_empirical() {
        return Err(Error::Unsupported(
            "quadrature objective needs parametric noise; use objective_empirical".into(),
        ));
    }

    let mut sorted_ys = ys.to_vec();
    sorted_ys.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n_y = sorted_ys.len() as f64;
    let lvl = levels.levels();
    let lo = sorted_ys[0].min(lvl[0]) - quad.range_padding;
    let hi = sorted_ys[sorted_ys.len() - 1].max(lvl[lvl.len() - 1]) + quad.range_padding;

    // ∫ tail (mixture)² + (1−mixture)² outside [lo, hi]; both arguments are
    // ≤ −padding by construction, and by symmetry the right tail reduces to
    // the same squared-CDF bound.
    let n_x = levels.n_x() as f64;
    let mut tail = 0.0;
    for (m, c) in lvl.iter().zip(levels.counts()) {
        let t_left = noise.cdf_sq_tail_bound(lo - m).expect("parametric noise");
        let t_right = noise.cdf_sq_tail_bound(m - hi).expect("parametric noise");
        tail += *c as f64 * (t_left + t_right);
    }
    tail /= n_x;
    if tail > quad.tail_tolerance {
        return Err(Error::Accuracy(format!(
            "quadrature tail bound {tail:.3e} exceeds tolerance {:.3e}; increase range_padding",
            quad.tail_tolerance
        )));
    }

    // ECDF segment boundaries inside the window.
    let mut bounds = Vec::with_capacity(sorted_ys.len() + 2);
    bounds.push(lo);
    bounds.extend_from_slice(&sorted_ys);
    bounds.push(hi);

    // ∫ H_n² and ∫ H_n · mixture, both exact per segment.
    let mixture_integral = |t: f64| -> f64 {
        lvl.iter()
            .zip(levels.counts())
            .map(|(m, c)| *c as f64 * noise.cdf_antiderivative(t - m).expect("parametric noise"))
            .sum::<f64>()
            / n_x
    };
    let mut ecdf_sq = 0.0;
    let mut cross = 0.0;
    for (j, w) in bounds.windows(2).enumerate() {
        let level = j as f64 / n_y;
        if w[1] > w[0] {
            ecdf_sq += level * level * (w[1] - w[0]);
            cross += level * (mixture_integral(w[1]) - mixture_integral(w[0]));
        }
    }

    // ∫ mixture² by composite Simpson, split at the levels: the Laplace
    // density has a kink there, and integrating across it would degrade the
    // composite rule by orders of magnitude.
    let mixture_sq = |y: f64| {
        let v = mixture_cdf(levels, noise, y);
        v * v
    };
    let mut cuts: Vec<f64> = Vec::with_capacity(lvl.len() + 2);
    cuts.push(lo);
    cuts.extend(lvl.iter().copied().filter(|m| *m > lo && *m < hi));
    cuts.push(hi);
    let total_len = hi - lo;
    let mut mixture_sq_int = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let share = (quad.points as f64 * (b - a) / total_len).ceil() as usize;
        let panels = share.max(8) + share.max(8) % 2;
        let h = (b - a) / panels as f64;
        let mut sum = mixture_sq(a) + mixture_sq(b);
        for i in 1..panels {
            let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += weight * mixture_sq(a + i as f64 * h);
        }
        mixture_sq_int += sum * h / 3.0;
    }

    Ok((ecdf_sq - 2.0 * cross + mixture_sq_int).max(0.0))
}

/// The same criterion under an empirical noise model, computed exactly: both
/// CDFs are step functions, so the squared distance reduces to a finite sum.
pub fn objective_empirical(levels: &GroupedLevels, ys: &[f64], eps_star: &[f64]) -> Result<f64> {
    if ys.is_empty() {
        return Err(Error::EmptyInput("response sample".into()));
    }
    if eps_star.is_empty() {
        return Err(Error::EmptyInput("residual sample".into()));
    }
    let response_cdf = StepFunction::ecdf(ys)?;
    let model_cdf = empirical_mixture_step(levels, eps_star)?;
    crate::stepfn::l2_distance_sq(&response_cdf, &model_cdf, (f64::NEG_INFINITY, f64::INFINITY))
}

fn empirical_mixture_step(levels: &GroupedLevels, eps_star: &[f64]) -> Result<StepFunction> {
    let mut atoms: Vec<(f64, usize)> =
        Vec::with_capacity(levels.levels().len() * eps_star.len());
    for (m, c) in levels.levels().iter().zip(levels.counts()) {
        for e in eps_star {
            atoms.push((m + e, *c));
        }
    }
    atoms.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total = (levels.n_x() * eps_star.len()) as f64;
    let first = atoms[0].0;
    let mut knots = vec![first - 1.0];
    let mut values = vec![0.0];
    let mut cum = 0usize;
    let mut i = 0;
    while i < atoms.len() {
        let pos = atoms[i].0;
        let mut weight = 0usize;
        while i < atoms.len() && atoms[i].0 == pos {
            weight += atoms[i].1;
            i += 1;
        }
        cum += weight;
        knots.push(pos);
        values.push(cum as f64 / total);
    }
    let hi = *knots.last().unwrap();
    StepFunction::new(knots, values, (first - 1.0, hi.max(first - 1.0)))
}

/// Partial derivative of the criterion with respect to each distinct level,
/// one entry per level:
///
/// `(2/n_x)·[1 − n_y⁻¹ Σ_β Φ_ε(Y_β − m_i)] − (2/n_x²)·Σ_α count_α B(m_i − m_α)`
///
/// This is the derivation-consistent form whose stationary points are exactly
/// the per-level optimality conditions checked by [`fenchel_residuals`].
pub fn gradient(levels: &GroupedLevels, ys: &[f64], noise: &NoiseModel) -> Vec<f64> {
    gradient_raw(levels.levels(), levels.counts(), ys, noise)
}

/// Gradient over a raw (not necessarily ordered) value/count decomposition.
/// The iteration state of the optimizer may transiently violate monotonicity,
/// so this kernel makes no ordering assumption.
pub(crate) fn gradient_raw(
    levels: &[f64],
    counts: &[usize],
    ys: &[f64],
    noise: &NoiseModel,
) -> Vec<f64> {
    let n_x = counts.iter().sum::<usize>() as f64;
    let n_y = ys.len() as f64;
    levels
        .iter()
        .map(|m_i| {
            let data_mass: f64 = ys.iter().map(|y| noise.cdf(y - m_i)).sum();
            let model_mass: f64 = levels
                .iter()
                .zip(counts)
                .map(|(m_a, c)| *c as f64 * noise.bee(m_i - m_a))
                .sum();
            (2.0 / n_x) * (1.0 - data_mass / n_y) - (2.0 / (n_x * n_x)) * model_mass
        })
        .collect()
}

/// Plug-in gradient when the noise CDF is replaced by the empirical CDF of a
/// residual sample (and `B` by its plug-in average).
pub fn gradient_empirical(
    levels: &GroupedLevels,
    ys: &[f64],
    eps_star: &[f64],
) -> Result<Vec<f64>> {
    if eps_star.is_empty() {
        return Err(Error::EmptyInput("residual sample".into()));
    }
    let model = NoiseModel::empirical(eps_star.to_vec(), false)?;
    Ok(gradient(levels, ys, &model))
}

/// Per-level optimality residuals
/// `|1 − n_y⁻¹ Σ_β Φ_ε(Y_β − m_k) − n_x⁻¹ Σ_j count_j B(m_k − level_j)|`.
/// All residuals vanish at a stationary point; componentwise they equal
/// `(n_x/2)·|gradient|`.
pub fn fenchel_residuals(levels: &GroupedLevels, ys: &[f64], noise: &NoiseModel) -> Vec<f64> {
    let n_x = levels.n_x() as f64;
    let n_y = ys.len() as f64;
    levels
        .levels()
        .iter()
        .map(|m_k| {
            let data_mass: f64 = ys.iter().map(|y| noise.cdf(y - m_k)).sum();
            let model_mass: f64 = levels
                .levels()
                .iter()
                .zip(levels.counts())
                .map(|(m_j, c)| *c as f64 * noise.bee(m_k - m_j))
                .sum();
            (1.0 - data_mass / n_y - model_mass / n_x).abs()
        })
        .collect()
}
