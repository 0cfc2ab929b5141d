//! Comparison estimators: linked isotonic regression (the oracle that sees
//! the pairing), quantile matching, and a spectral-cutoff deconvolution
//! estimator of the quantile-composition form.

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::stepfn::StepFunction;

/// Least-squares monotone fit of linked pairs via pool-adjacent-violators.
/// Responses at tied covariates are averaged first. Equals the max-min
/// formula `m̂(X_(i)) = max_{j≤i} min_{k≥i} mean(Y_(j..k))`.
pub fn pava(xs: &[f64], ys: &[f64]) -> Result<StepFunction> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} covariates but {} responses",
            xs.len(),
            ys.len()
        )));
    }
    if xs.is_empty() {
        return Err(Error::EmptyInput("linked sample".into()));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("linked sample must be finite".into()));
    }

    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_unstable_by(|a, b| xs[*a].partial_cmp(&xs[*b]).unwrap());

    // collapse tied covariates to one weighted observation
    let mut distinct_xs: Vec<f64> = Vec::new();
    let mut means: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let x = xs[order[i]];
        let mut sum = 0.0;
        let mut count = 0.0;
        while i < order.len() && xs[order[i]] == x {
            sum += ys[order[i]];
            count += 1.0;
            i += 1;
        }
        distinct_xs.push(x);
        means.push(sum / count);
        weights.push(count);
    }

    // weighted PAVA over the distinct design points
    let mut block_value: Vec<f64> = Vec::with_capacity(means.len());
    let mut block_weight: Vec<f64> = Vec::with_capacity(means.len());
    let mut block_len: Vec<usize> = Vec::with_capacity(means.len());
    for (v, w) in means.iter().zip(&weights) {
        block_value.push(*v);
        block_weight.push(*w);
        block_len.push(1);
        while block_value.len() > 1 {
            let last = block_value.len() - 1;
            if block_value[last - 1] <= block_value[last] {
                break;
            }
            let merged_w = block_weight[last - 1] + block_weight[last];
            let merged_v = (block_value[last - 1] * block_weight[last - 1]
                + block_value[last] * block_weight[last])
                / merged_w;
            block_value[last - 1] = merged_v;
            block_weight[last - 1] = merged_w;
            block_len[last - 1] += block_len[last];
            block_value.pop();
            block_weight.pop();
            block_len.pop();
        }
    }

    let mut fitted = Vec::with_capacity(distinct_xs.len());
    for (v, len) in block_value.iter().zip(&block_len) {
        fitted.extend(std::iter::repeat(*v).take(*len));
    }
    let domain = (distinct_xs[0], *distinct_xs.last().unwrap());
    StepFunction::from_fitted(&distinct_xs, &fitted, domain)
}

/// Sorted covariates paired with sorted responses; evaluation interpolates
/// linearly between the matched points with flat extension outside.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedQuantiles {
    points: Vec<(f64, f64)>,
}

impl MatchedQuantiles {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Render the matched points as `x,y` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let idx = pts.partition_point(|(px, _)| *px < x);
        let (x0, y0) = pts[idx - 1];
        let (x1, y1) = pts[idx];
        if x1 == x0 {
            y1
        } else {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

/// Pair the empirical quantiles of the covariate and response samples. With
/// unequal lengths, the longer sample's quantile function is interpolated at
/// the shorter sample's plotting positions `(i − 0.5)/n`.
pub fn quantile_match(xs: &[f64], ys: &[f64]) -> Result<MatchedQuantiles> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyInput("quantile matching needs both samples".into()));
    }
    let mut sx = xs.to_vec();
    sx.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sy = ys.to_vec();
    sy.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let points = if sx.len() == sy.len() {
        sx.into_iter().zip(sy).collect()
    } else {
        let n = sx.len().min(sy.len());
        (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                (quantile_at(&sx, p), quantile_at(&sy, p))
            })
            .collect()
    };
    Ok(MatchedQuantiles { points })
}

// Hazen-type interpolation of the empirical quantile function: order
// statistic j sits at probability (j − 0.5)/n.
fn quantile_at(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = p * n as f64 - 0.5;
    if h <= 0.0 {
        return sorted[0];
    }
    if h >= (n - 1) as f64 {
        return sorted[n - 1];
    }
    let j = h.floor() as usize;
    let g = h - j as f64;
    sorted[j] + g * (sorted[j + 1] - sorted[j])
}

/// Settings for the spectral-cutoff deconvolution estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DeconvConfig {
    /// Frequency truncation point of the inversion integral.
    pub cutoff: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    /// Simpson panels for the inversion integral over `[0, cutoff]`.
    pub spectral_points: usize,
}

impl DeconvConfig {
    pub fn new(cutoff: f64, grid: (f64, f64, usize)) -> Result<Self> {
        let config = DeconvConfig {
            cutoff,
            grid_lo: grid.0,
            grid_hi: grid.1,
            grid_points: grid.2,
            spectral_points: 4096,
        };
        config.validate()?;
        Ok(config)
    }

    /// Rate-flavored default cutoff: `n^{1/(2β+1)}` in noise-scale units for
    /// ordinary-smooth (Laplace) noise, `√(2 ln n)/σ` for Gaussian noise. The
    /// grid covers the response range plus one noise scale on each side.
    pub fn default_for(n: usize, noise: &NoiseModel, ys: &[f64]) -> Result<Self> {
        if ys.is_empty() {
            return Err(Error::EmptyInput("response sample".into()));
        }
        let scale = noise.stddev();
        let cutoff = match noise.kind() {
            crate::noise::NoiseKind::Laplace { scale } => {
                let beta = noise.beta().unwrap_or(2.0);
                (n as f64).powf(1.0 / (2.0 * beta + 1.0)) / scale
            }
            crate::noise::NoiseKind::Gaussian { stddev } => {
                (2.0 * (n as f64).ln()).sqrt() / stddev
            }
            crate::noise::NoiseKind::Empirical { .. } => {
                return Err(Error::Unsupported(
                    "deconvolution needs a parametric noise model".into(),
                ))
            }
        };
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for y in ys {
            lo = lo.min(*y);
            hi = hi.max(*y);
        }
        DeconvConfig::new(cutoff, (lo - scale, hi + scale, 512))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::InvalidParameter("cutoff must be positive".into()));
        }
        if self.grid_points < 16 {
            return Err(Error::InvalidParameter("need at least 16 grid points".into()));
        }
        if !(self.grid_lo < self.grid_hi) {
            return Err(Error::InvalidParameter("grid interval must be nondegenerate".into()));
        }
        if self.spectral_points < 64 {
            return Err(Error::InvalidParameter("need at least 64 spectral panels".into()));
        }
        Ok(())
    }
}

/// Spectral-cutoff estimate of the CDF of `m₀(X)` from the response sample:
/// invert the empirical characteristic function divided by the noise
/// characteristic function, truncate at the cutoff, clip to `[0, 1]`, and
/// monotonize left to right with a running maximum.
pub fn deconv_cdf(ys: &[f64], noise: &NoiseModel, config: &DeconvConfig) -> Result<StepFunction> {
    config.validate()?;
    if ys.is_empty() {
        return Err(Error::EmptyInput("response sample".into()));
    }
    if noise.is_empirical() {
        return Err(Error::Unsupported(
            "deconvolution needs a parametric noise model".into(),
        ));
    }
    let cf_at_cutoff = noise.characteristic(config.cutoff).expect("parametric noise");
    if cf_at_cutoff.abs() < 1e-12 {
        return Err(Error::IllPosed(format!(
            "noise characteristic function is {cf_at_cutoff:.3e} at the cutoff {}",
            config.cutoff
        )));
    }

    let n = ys.len() as f64;
    let panels = config.spectral_points + config.spectral_points % 2;
    let dt = config.cutoff / panels as f64;
    let mean_y = ys.iter().sum::<f64>() / n;

    // empirical characteristic function and the spectral weight at each node
    let mut nodes = Vec::with_capacity(panels + 1);
    for j in 0..=panels {
        let t = j as f64 * dt;
        if j == 0 {
            nodes.push((0.0, 0.0, 0.0, 0.0));
            continue;
        }
        let mut cos_sum = 0.0;
        let mut sin_sum = 0.0;
        for y in ys {
            let (s, c) = (t * y).sin_cos();
            cos_sum += c;
            sin_sum += s;
        }
        let weight = 1.0 / (t * noise.characteristic(t).expect("parametric noise"));
        nodes.push((t, cos_sum / n, sin_sum / n, weight));
    }

    // Gil-Pelaez inversion at x: 1/2 − π⁻¹ ∫₀ᵀ Im[e^{-itx} ψ̂(t)]/(t φ_ε(t)) dt,
    // with the integrand's t→0 limit mean(Y) − x.
    let simpson_weight = |j: usize| -> f64 {
        if j == 0 || j == panels {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let raw_at = |x: f64| -> f64 {
        let mut sum = 0.0;
        for (j, (t, ecf_cos, ecf_sin, weight)) in nodes.iter().enumerate() {
            let integrand = if j == 0 {
                mean_y - x
            } else {
                let (sx, cx) = (t * x).sin_cos();
                (ecf_sin * cx - ecf_cos * sx) * weight
            };
            sum += simpson_weight(j) * integrand;
        }
        0.5 - (sum * dt / 3.0) / std::f64::consts::PI
    };

    let mut knots = Vec::with_capacity(config.grid_points);
    let mut values = Vec::with_capacity(config.grid_points);
    let mut running_max = 0.0f64;
    for i in 0..config.grid_points {
        let x = if i == config.grid_points - 1 {
            config.grid_hi
        } else {
            config.grid_lo
                + (config.grid_hi - config.grid_lo) * i as f64 / (config.grid_points - 1) as f64
        };
        let clipped = raw_at(x).clamp(0.0, 1.0);
        running_max = running_max.max(clipped);
        knots.push(x);
        values.push(running_max);
    }
    StepFunction::new(knots, values, (config.grid_lo, config.grid_hi))
}

/// Deconvolution estimator of the regression function: at each sorted
/// covariate, the generalized inverse of the deconvolved CDF is evaluated at
/// the empirical covariate CDF level. Endpoint values that leave the response
/// range by more than 3 noise scales are winsorized to the adjacent interior
/// fitted values.
pub fn cs_estimator(
    xs: &[f64],
    ys: &[f64],
    noise: &NoiseModel,
    config: &DeconvConfig,
) -> Result<StepFunction> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("covariate sample".into()));
    }
    let cdf = deconv_cdf(ys, noise, config)?;

    let mut sorted_xs = xs.to_vec();
    sorted_xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted_xs.len();
    let mut fitted: Vec<f64> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let x = sorted_xs[i];
        let mut j = i;
        while j < n && sorted_xs[j] == x {
            j += 1;
        }
        let level = j as f64 / n as f64; // F_n(x) over all ties at x
        let value = cdf.generalized_inverse(level);
        for _ in i..j {
            fitted.push(value);
        }
        i = j;
    }

    if n >= 3 {
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for y in ys {
            y_lo = y_lo.min(*y);
            y_hi = y_hi.max(*y);
        }
        let slack = 3.0 * noise.stddev();
        if fitted[0] < y_lo - slack || fitted[0] > y_hi + slack {
            fitted[0] = fitted[1];
        }
        if fitted[n - 1] > y_hi + slack || fitted[n - 1] < y_lo - slack {
            fitted[n - 1] = fitted[n - 2];
        }
    }

    let domain = (sorted_xs[0], sorted_xs[n - 1]);
    StepFunction::from_fitted(&sorted_xs, &fitted, domain)
}
