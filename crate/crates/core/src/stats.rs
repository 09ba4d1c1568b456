//! Summary statistics shared by the Monte Carlo drivers.

use statrs::distribution::{ContinuousCDF, Normal};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        iter.into_iter().for_each(|v| s.add(v));
        s
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss = values.iter().map(|v| (v - m) * (v - m)).collect::<CompensatedSum>();
    ss.value() / (values.len() as f64 - 1.0)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Anderson–Darling statistic for normality with mean and variance
/// estimated from the data, including the small-sample factor
/// `1 + 0.75/n + 2.25/n^2`. Reject at level 0.01 when it exceeds
/// [`AD_CRITICAL_1PCT`].
pub fn anderson_darling_normal(values: &[f64]) -> f64 {
    let n = values.len();
    let m = mean(values);
    let sd = variance(values).sqrt();
    let normal = Normal::standard();
    let mut z: Vec<f64> = values.iter().map(|v| (v - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        let lo = normal.cdf(z[i]).max(1e-300);
        let hi = normal.sf(z[n - 1 - i]).max(1e-300);
        acc.add((2.0 * i as f64 + 1.0) * (lo.ln() + hi.ln()));
    }
    let a2 = -nf - acc.value() / nf;
    a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf))
}

pub const AD_CRITICAL_1PCT: f64 = 1.035;
