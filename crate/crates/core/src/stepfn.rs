//! Monotone step functions, empirical CDFs, generalized inverses, and exact
//! integrals of squared differences of step functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nondecreasing, right-continuous, piecewise-constant function on a
/// bounded interval.
///
/// `values[i]` holds on `[knots[i], knots[i+1])`; the first value extends to
/// the left of `knots[0]` and the last extends to the right of the final
/// knot, so evaluation is total on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    domain: [f64; 2],
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::EmptyInput("step function needs at least one knot".into()));
        }
        if knots.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "step function knots and values must be finite".into(),
            ));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::MonotonicityViolation(
                "step function values must be nondecreasing".into(),
            ));
        }
        let (lo, hi) = domain;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidParameter(format!("invalid domain [{lo}, {hi}]")));
        }
        if lo > knots[0] || *knots.last().unwrap() > hi {
            return Err(Error::InvalidParameter(
                "domain must contain all knots".into(),
            ));
        }
        Ok(StepFunction {
            knots,
            values,
            domain: [lo, hi],
        })
    }

    /// Step function taking value `theta[i]` on `[xs[i], xs[i+1])`, extended
    /// flat on both sides. Duplicated design points with equal fitted values
    /// collapse to one knot; distinct fitted values at one design point are
    /// inconsistent (a function cannot take two values at one point).
    pub fn from_fitted(sorted_xs: &[f64], theta: &[f64], domain: (f64, f64)) -> Result<Self> {
        if sorted_xs.is_empty() {
            return Err(Error::EmptyInput("fitted step function needs design points".into()));
        }
        if sorted_xs.len() != theta.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} design points but {} fitted values",
                sorted_xs.len(),
                theta.len()
            )));
        }
        if sorted_xs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("design points must be sorted".into()));
        }
        if theta.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::MonotonicityViolation(
                "fitted values must be nondecreasing".into(),
            ));
        }
        let mut knots: Vec<f64> = Vec::with_capacity(sorted_xs.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted_xs.len());
        for (x, t) in sorted_xs.iter().zip(theta) {
            match knots.last() {
                Some(last_x) if last_x == x => {
                    if *values.last().unwrap() != *t {
                        return Err(Error::AmbiguousFit(format!(
                            "design point {x} carries distinct fitted values"
                        )));
                    }
                }
                _ => {
                    knots.push(*x);
                    values.push(*t);
                }
            }
        }
        StepFunction::new(knots, values, domain)
    }

    /// Right-continuous empirical CDF of a sample. The function is 0 strictly
    /// left of the smallest atom (an explicit leading knot pins that level).
    pub fn ecdf(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyInput("ecdf of an empty sample".into()));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("ecdf sample must be finite".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len() as f64;
        let first = sorted[0];
        let mut knots = vec![first - 1.0];
        let mut values = vec![0.0];
        let mut seen = 0usize;
        let mut i = 0usize;
        while i < sorted.len() {
            let atom = sorted[i];
            let mut j = i;
            while j < sorted.len() && sorted[j] == atom {
                j += 1;
            }
            seen += j - i;
            knots.push(atom);
            values.push(seen as f64 / n);
            i = j;
        }
        let hi = *sorted.last().unwrap();
        StepFunction::new(knots, values, (first - 1.0, hi.max(first - 1.0)))
    }

    /// Empirical CDF of `{m(x_i)}`, the pushforward of the design points
    /// through a fitted function.
    pub fn pushforward_ecdf(m: &StepFunction, xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyInput("pushforward of an empty sample".into()));
        }
        let mapped: Vec<f64> = xs.iter().map(|x| m.eval(*x)).collect();
        StepFunction::ecdf(&mapped)
    }

    /// Right-continuous evaluation with flat extension beyond the extreme knots.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.knots.partition_point(|k| *k <= x);
        if idx == 0 {
            self.values[0]
        } else {
            self.values[idx - 1]
        }
    }

    /// Generalized inverse `inf{x ∈ domain : f(x) ≥ y}`, with the infimum of
    /// an empty set mapped to the upper end of the domain.
    pub fn generalized_inverse(&self, y: f64) -> f64 {
        if self.values[0] >= y {
            return self.domain[0];
        }
        let idx = self.values.partition_point(|v| *v < y);
        if idx == self.values.len() {
            self.domain[1]
        } else {
            self.knots[idx]
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain[0], self.domain[1])
    }

    /// Uniform sampling of the function over its domain, for plotting export.
    pub fn sample_grid(&self, points: usize) -> Vec<(f64, f64)> {
        let points = points.max(2);
        let (lo, hi) = self.domain();
        (0..points)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
                (x, self.eval(x))
            })
            .collect()
    }
}

/// Exact `∫_window (f − g)² dw` over the merged-knot partition.
///
/// Either window end may be infinite; this is only admissible when the two
/// functions agree on the corresponding flat tail, otherwise the integral
/// diverges.
pub fn l2_distance_sq(f: &StepFunction, g: &StepFunction, window: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = window;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidParameter(format!("invalid window [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(0.0);
    }
    if lo == f64::NEG_INFINITY {
        let tail = f.values[0] - g.values[0];
        if tail != 0.0 {
            return Err(Error::Divergence(
                "left tails differ on an infinite window".into(),
            ));
        }
        lo = f.knots[0].min(g.knots[0]);
    }
    if hi == f64::INFINITY {
        let tail = f.values.last().unwrap() - g.values.last().unwrap();
        if tail != 0.0 {
            return Err(Error::Divergence(
                "right tails differ on an infinite window".into(),
            ));
        }
        hi = f.knots.last().unwrap().max(*g.knots.last().unwrap());
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter("window must not be NaN".into()));
    }
    if lo >= hi {
        return Ok(0.0);
    }

    let mut cuts: Vec<f64> = Vec::with_capacity(f.knots.len() + g.knots.len() + 2);
    cuts.push(lo);
    for &k in f.knots.iter().chain(g.knots.iter()) {
        if k > lo && k < hi {
            cuts.push(k);
        }
    }
    cuts.push(hi);
    cuts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        // The integrand is constant on (w[0], w[1]); both functions are
        // right-continuous so evaluating at the left endpoint is exact.
        let d = f.eval(w[0]) - g.eval(w[0]);
        total += d * d * len;
    }
    Ok(total)
}
