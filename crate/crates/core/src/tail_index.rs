//! Extreme value index estimation from truncated samples.
//!
//! The estimator weights the top `k` log-excesses over `X_{n-k:n}` by
//! `F_n(X_{n-i+1:n}) / C_n(X_{n-i+1:n})`, where `F_n` is the product-limit
//! df. For complete data under the Lynden-Bell variant every weight is 1
//! and the estimator is exactly Hill's.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::product_limit::{ProductLimitFit, Variant};
use crate::quadrature::{integrate_positive_axis, Tolerance};
use crate::stats::normal_quantile;
use crate::truncation::TruncatedSample;

pub const DEFAULT_THETA: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailIndexEstimate {
    pub gamma1_hat: f64,
    pub k: usize,
    pub variant: Variant,
    pub gamma2_hat: Option<f64>,
    pub k2: Option<usize>,
    pub sigma2_hat: Option<f64>,
    pub ci: Option<ConfidenceInterval>,
    pub n: usize,
    pub warnings: Vec<String>,
}

impl TailIndexEstimate {
    /// True when a plug-in `gamma2_hat` exists and does not exceed `gamma1_hat`.
    pub fn model_violation(&self) -> bool {
        self.gamma2_hat.is_some_and(|g2| g2 <= self.gamma1_hat)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, min: 1, max: n.saturating_sub(1) });
    }
    Ok(())
}

/// `gamma1_hat` with the `k` largest observations, from a fitted estimator.
pub fn gamma1_from_fit(fit: &ProductLimitFit, k: usize) -> Result<f64> {
    let n = fit.n();
    check_k(k, n)?;
    let xs = fit.sorted_x();
    let threshold = xs[n - k - 1];
    let mut weight_sum = 0.0;
    let mut weighted_logs = 0.0;
    for j in (n - k..n).rev() {
        let w = fit.df_at(j) / fit.c_n_at(j);
        weight_sum += w;
        weighted_logs += w * (xs[j] / threshold).ln();
    }
    if !(weight_sum > 0.0) {
        return Err(Error::DegenerateTail(format!("weights of the top {k} atoms sum to zero")));
    }
    Ok(weighted_logs / weight_sum)
}

/// `gamma1_hat(k)` for every `k` in `1..=k_max`; index 0 is unused (NaN).
pub fn gamma1_path(fit: &ProductLimitFit, k_max: usize) -> Result<Vec<f64>> {
    let n = fit.n();
    check_k(k_max, n)?;
    let xs = fit.sorted_x();
    let mut path = vec![f64::NAN; k_max + 1];
    let mut weight_sum = 0.0;
    let mut weighted_logs = 0.0;
    for k in 1..=k_max {
        let j = n - k;
        let w = fit.df_at(j) / fit.c_n_at(j);
        weight_sum += w;
        weighted_logs += w * xs[j].ln();
        path[k] = weighted_logs / weight_sum - xs[n - k - 1].ln();
    }
    Ok(path)
}

pub fn gamma1_estimate(sample: &TruncatedSample, k: usize, variant: Variant) -> Result<TailIndexEstimate> {
    let fit = ProductLimitFit::fit(sample, variant);
    let gamma1_hat = gamma1_from_fit(&fit, k)?;
    Ok(TailIndexEstimate {
        gamma1_hat,
        k,
        variant,
        gamma2_hat: None,
        k2: None,
        sigma2_hat: None,
        ci: None,
        n: sample.len(),
        warnings: Vec::new(),
    })
}

fn sorted_descending(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(domain(format!("values must be finite and positive, found {v}")));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Classical Hill estimator `k^-1 sum_{i<=k} log(X_{n-i+1:n} / X_{n-k:n})`.
pub fn hill(values: &[f64], k: usize) -> Result<f64> {
    check_k(k, values.len())?;
    let v = sorted_descending(values)?;
    let threshold = v[k];
    Ok(v[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64)
}

/// Hill estimates for every `k` in `1..=k_max`; index 0 is NaN.
pub fn hill_path(values: &[f64], k_max: usize) -> Result<Vec<f64>> {
    check_k(k_max, values.len())?;
    let v = sorted_descending(values)?;
    let mut path = vec![f64::NAN; k_max + 1];
    let mut log_sum = 0.0;
    for k in 1..=k_max {
        log_sum += v[k - 1].ln();
        path[k] = log_sum / k as f64 - v[k].ln();
    }
    Ok(path)
}

/// Asymptotic variance of `sqrt(k)(gamma1_hat - gamma1)`:
/// `gamma^2 (1 + r)(1 + r^2) / (1 - r)^3` with `r = gamma1/gamma2`.
pub fn asymptotic_variance(gamma1: f64, gamma2: f64) -> Result<f64> {
    if !(gamma1 > 0.0 && gamma1.is_finite() && gamma2.is_finite()) {
        return Err(domain(format!("tail indices must be finite and positive ({gamma1}, {gamma2})")));
    }
    if gamma1 >= gamma2 {
        return Err(Error::ModelViolation(format!(
            "asymptotic variance needs gamma1 < gamma2, got {gamma1} >= {gamma2}"
        )));
    }
    let r = gamma1 / gamma2;
    let gamma = gamma1 * gamma2 / (gamma1 + gamma2);
    Ok(gamma * gamma * (1.0 + r) * (1.0 + r * r) / (1.0 - r).powi(3))
}

/// Normal interval `gamma1_hat +- z sigma_hat / sqrt(k)`; the asymptotic
/// bias is taken as zero.
pub fn confidence_interval(
    estimate: &TailIndexEstimate,
    gamma2_hat: f64,
    level: f64,
) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) && level != 0.0 {
        return Err(domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let sigma2 = asymptotic_variance(estimate.gamma1_hat, gamma2_hat)?;
    let z = if level == 0.0 { 0.0 } else { normal_quantile(0.5 * (1.0 + level)) };
    let half = z * (sigma2 / estimate.k as f64).sqrt();
    Ok(ConfidenceInterval {
        level,
        lower: estimate.gamma1_hat - half,
        upper: estimate.gamma1_hat + half,
    })
}

/// Hill on the observed Y's, which carry the truncation index gamma2.
pub fn estimate_gamma2(sample: &TruncatedSample, k2: usize) -> Result<f64> {
    hill(&sample.ys(), k2)
}

/// Default `(k_min, k_max)` for `n` observations: `ceil(sqrt(n))` and
/// `min(floor(0.95 n) - 1, n - 2)`.
///
/// With `k_min = 2` the criterion is identically zero at `k = 2` (one term,
/// measured against its own median), so the search would never leave it.
/// Growing `k_min` like `sqrt(n)` keeps `k -> inf` and `k/n -> 0`.
pub fn default_k_range(n: usize) -> Result<(usize, usize)> {
    let k_max = ((0.95 * n as f64).floor() as usize).saturating_sub(1).min(n.saturating_sub(2));
    if k_max <= 2 {
        return Err(Error::DegenerateTail(format!(
            "{n} observations are too few for automatic selection of k"
        )));
    }
    let k_min = ((n as f64).sqrt().ceil() as usize).clamp(2, k_max - 1);
    Ok((k_min, k_max))
}

#[derive(Clone, Copy, PartialEq)]
struct Ordered(f64);
impl Eq for Ordered {}
impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streaming median over two heaps.
#[derive(Default)]
struct RunningMedian {
    low: BinaryHeap<Ordered>,
    high: BinaryHeap<Reverse<Ordered>>,
}

impl RunningMedian {
    fn push(&mut self, v: f64) {
        match self.low.peek() {
            Some(top) if v > top.0 => self.high.push(Reverse(Ordered(v))),
            _ => self.low.push(Ordered(v)),
        }
        if self.low.len() > self.high.len() + 1 {
            let t = self.low.pop().unwrap();
            self.high.push(Reverse(t));
        } else if self.high.len() > self.low.len() {
            let Reverse(t) = self.high.pop().unwrap();
            self.low.push(t);
        }
    }

    fn median(&self) -> f64 {
        let lo = self.low.peek().unwrap().0;
        if self.low.len() > self.high.len() {
            lo
        } else {
            0.5 * (lo + self.high.peek().unwrap().0 .0)
        }
    }
}

/// Reiss–Thomas choice of `k` from an estimator path (`path[i]` is the
/// estimate with `i` upper order statistics):
///
/// ```text
/// k* = argmin_{k_min <= k <= k_max} k^-1 sum_{i=2}^{k} i^theta |path[i] - median(path[2..=k])|
/// ```
///
/// Ties go to the smaller `k`.
pub fn reiss_thomas_argmin(path: &[f64], theta: f64, k_min: usize, k_max: usize) -> Result<usize> {
    if !(0.0..=0.5).contains(&theta) {
        return Err(domain(format!("theta must lie in [0, 0.5], got {theta}")));
    }
    if k_min < 2 || k_min >= k_max || k_max >= path.len() {
        return Err(domain(format!(
            "invalid k range [{k_min}, {k_max}] for a path of length {}",
            path.len()
        )));
    }
    let weights: Vec<f64> = (0..=k_max).map(|i| (i as f64).powf(theta)).collect();
    let mut running = RunningMedian::default();
    let mut best = (f64::INFINITY, k_min);
    for k in 2..=k_max {
        running.push(path[k]);
        if k < k_min {
            continue;
        }
        let med = running.median();
        let spread: f64 = (2..=k).map(|i| weights[i] * (path[i] - med).abs()).sum();
        let score = spread / k as f64;
        if score < best.0 {
            best = (score, k);
        }
    }
    Ok(best.1)
}

pub fn select_k_from_fit(fit: &ProductLimitFit, theta: f64, k_min: usize, k_max: usize) -> Result<usize> {
    if k_min < 2 || k_min >= k_max || k_max >= fit.n() {
        return Err(domain(format!("need 2 <= k_min < k_max < n, got [{k_min}, {k_max}], n = {}", fit.n())));
    }
    let path = gamma1_path(fit, k_max)?;
    reiss_thomas_argmin(&path, theta, k_min, k_max)
}

pub fn select_k_reiss_thomas(
    sample: &TruncatedSample,
    variant: Variant,
    theta: f64,
    k_min: usize,
    k_max: usize,
) -> Result<usize> {
    select_k_from_fit(&ProductLimitFit::fit(sample, variant), theta, k_min, k_max)
}

/// Reiss–Thomas `k` for the Hill estimator of a complete sample.
pub fn select_k_hill(values: &[f64], theta: f64, k_min: usize, k_max: usize) -> Result<usize> {
    if k_min < 2 || k_min >= k_max || k_max >= values.len() {
        return Err(domain(format!(
            "need 2 <= k_min < k_max < n, got [{k_min}, {k_max}], n = {}",
            values.len()
        )));
    }
    let path = hill_path(values, k_max)?;
    reiss_thomas_argmin(&path, theta, k_min, k_max)
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    pub variant: Variant,
    /// Fixed `k`; selected by Reiss–Thomas when `None`.
    pub k: Option<usize>,
    /// Fixed `k` for the plug-in gamma2 estimate.
    pub k2: Option<usize>,
    pub theta: f64,
    pub level: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { variant: Variant::Woodroofe, k: None, k2: None, theta: DEFAULT_THETA, level: 0.95 }
    }
}

/// Full estimation: `k` selection, `gamma1_hat`, plug-in `gamma2_hat`,
/// variance and confidence interval when the plug-in is admissible.
pub fn estimate(sample: &TruncatedSample, opts: &EstimateOptions) -> Result<TailIndexEstimate> {
    let n = sample.len();
    let fit = ProductLimitFit::fit(sample, opts.variant);
    let k = match opts.k {
        Some(k) => k,
        None => {
            let (lo, hi) = default_k_range(n)?;
            select_k_from_fit(&fit, opts.theta, lo, hi)?
        }
    };
    let gamma1_hat = gamma1_from_fit(&fit, k)?;
    let mut est = TailIndexEstimate {
        gamma1_hat,
        k,
        variant: opts.variant,
        gamma2_hat: None,
        k2: None,
        sigma2_hat: None,
        ci: None,
        n,
        warnings: Vec::new(),
    };
    if !(gamma1_hat > 0.0 && gamma1_hat.is_finite()) {
        return Err(Error::DegenerateTail(format!("gamma1_hat = {gamma1_hat} with k = {k}")));
    }

    let ys = sample.ys();
    if ys.iter().any(|y| !y.is_finite()) {
        est.warnings.push("non-finite y values: no plug-in gamma2 estimate or interval".into());
        return Ok(est);
    }
    let k2 = match opts.k2 {
        Some(k2) => k2,
        None => match default_k_range(n) {
            Ok((lo, hi)) => select_k_hill(&ys, opts.theta, lo, hi)?,
            Err(_) => {
                est.warnings.push("too few observations to select k2".into());
                return Ok(est);
            }
        },
    };
    let gamma2_hat = estimate_gamma2(sample, k2)?;
    est.gamma2_hat = Some(gamma2_hat);
    est.k2 = Some(k2);
    if gamma2_hat <= gamma1_hat {
        est.warnings.push(format!(
            "model violation: gamma2_hat = {gamma2_hat} <= gamma1_hat = {gamma1_hat}; no confidence interval"
        ));
        return Ok(est);
    }
    est.sigma2_hat = Some(asymptotic_variance(gamma1_hat, gamma2_hat)?);
    est.ci = Some(confidence_interval(&est, gamma2_hat, opts.level)?);
    est.warnings.push("interval ignores the asymptotic bias term".into());
    Ok(est)
}

/// `Gamma_{n,k}(g, alpha)` for complete data:
/// `[k^-1 sum g(i/(k+1)) log(X_{n-i+1:n}/X_{n-k:n})^alpha] / int_0^1 g(x) (-log x)^alpha dx`.
pub fn generalized_statistic_complete<G: Fn(f64) -> f64>(
    values: &[f64],
    k: usize,
    g: G,
    alpha: f64,
) -> Result<f64> {
    check_k(k, values.len())?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    let v = sorted_descending(values)?;
    let threshold = v[k];
    let numerator = (1..=k)
        .map(|i| g(i as f64 / (k as f64 + 1.0)) * (v[i - 1] / threshold).ln().powf(alpha))
        .sum::<f64>()
        / k as f64;
    // x = e^-u turns the denominator into int_0^inf g(e^-u) u^alpha e^-u du.
    let denominator = integrate_positive_axis(
        |u| g((-u).exp()) * u.powf(alpha) * (-u).exp(),
        0.0,
        Tolerance::relative(1e-10),
    )?
    .value;
    if !(denominator.abs() > 1e-300) {
        return Err(Error::Numeric("weight integral vanishes".into()));
    }
    Ok(numerator / denominator)
}
