//! Product-limit estimation of the truncated law.
//!
//! With `C_n(z) = n^-1 #{i : X_i <= z <= Y_i}`, the Woodroofe estimator is
//!
//! ```text
//! F_n(x) = prod_{i : X_i > x} exp(-1 / (n C_n(X_i)))
//! ```
//!
//! and the Lynden-Bell estimator replaces each factor by `1 - 1/(n C_n(X_i))`.
//! Both are right-continuous step functions with a jump at every observed X.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::truncation::TruncatedSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Exponential product-limit estimator.
    #[default]
    Woodroofe,
    LyndenBell,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Woodroofe => "woodroofe",
            Variant::LyndenBell => "lynden-bell",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "woodroofe" => Ok(Variant::Woodroofe),
            "lynden-bell" | "lyndenbell" => Ok(Variant::LyndenBell),
            other => Err(domain(format!("unknown product-limit variant '{other}'"))),
        }
    }
}

/// One jump point of the fitted step function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub x: f64,
    /// `C_n` at the atom.
    pub c_n: f64,
    /// df value at the atom, including the atom's own jump.
    pub df: f64,
}

/// `C_n(z)`: fraction of pairs with `x_i <= z <= y_i`.
pub fn empirical_c(sample: &TruncatedSample, z: f64) -> f64 {
    let at_risk = sample.pairs().iter().filter(|&&(x, y)| x <= z && z <= y).count();
    at_risk as f64 / sample.len() as f64
}

/// A fitted product-limit estimator. Immutable; queries are `O(log n)`.
#[derive(Debug, Clone)]
pub struct ProductLimitFit {
    variant: Variant,
    xs: Vec<f64>,
    at_risk: Vec<usize>,
    // hazard_tail[j] = sum_{m >= j} 1/(n C_n(x_(m))), hazard_tail[n] = 0
    hazard_tail: Vec<f64>,
    // df_tail[j] = product of factors over positions m >= j
    df_tail: Vec<f64>,
}

impl ProductLimitFit {
    /// Tied X values are kept as separate atoms in input order, each with
    /// the at-risk count it would have under an infinitesimal upward jitter.
    pub fn fit(sample: &TruncatedSample, variant: Variant) -> Self {
        let n = sample.len();
        let mut xs = sample.xs();
        xs.sort_by(f64::total_cmp);
        let mut ys = sample.ys();
        ys.sort_by(f64::total_cmp);

        // Any y_i < x_(j) belongs to an atom ranked below j, so the count
        // (j + 1) - #{y < x_(j)} is at least 1.
        let at_risk: Vec<usize> = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| j + 1 - ys.partition_point(|&y| y < x))
            .collect();

        let mut hazard_tail = vec![0.0; n + 1];
        let mut df_tail = vec![1.0; n + 1];
        for j in (0..n).rev() {
            let h = 1.0 / at_risk[j] as f64;
            hazard_tail[j] = hazard_tail[j + 1] + h;
            df_tail[j] = match variant {
                Variant::Woodroofe => (-hazard_tail[j]).exp(),
                Variant::LyndenBell => df_tail[j + 1] * (1.0 - h),
            };
        }
        Self { variant, xs, at_risk, hazard_tail, df_tail }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    /// Observed X values in increasing order.
    pub fn sorted_x(&self) -> &[f64] {
        &self.xs
    }

    pub fn atom(&self, j: usize) -> Atom {
        Atom { x: self.xs[j], c_n: self.c_n_at(j), df: self.df_at(j) }
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (0..self.n()).map(|j| self.atom(j))
    }

    /// `C_n` at the atom of rank `j` (0-based, increasing order).
    pub fn c_n_at(&self, j: usize) -> f64 {
        self.at_risk[j] as f64 / self.n() as f64
    }

    /// df at the atom of rank `j`, i.e. the product over higher-ranked atoms.
    pub fn df_at(&self, j: usize) -> f64 {
        self.df_tail[j + 1]
    }

    fn rank_above(&self, x: f64) -> usize {
        self.xs.partition_point(|&v| v <= x)
    }

    pub fn df(&self, x: f64) -> f64 {
        self.df_tail[self.rank_above(x)]
    }

    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.df(x)
    }

    /// `Lambda_n(x) = sum over atoms > x of 1/(n C_n(atom))`.
    pub fn cumulative_hazard(&self, x: f64) -> f64 {
        self.hazard_tail[self.rank_above(x)]
    }

    /// The tail product-limit process on `grid`, thresholded at `X_{n-k:n}`:
    /// `sqrt(k) (Fbar_n(x X_{n-k:n}) / Fbar_n(X_{n-k:n}) - x^(-1/gamma1))`.
    pub fn tail_process(&self, k: usize, gamma1: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        let n = self.n();
        if k <= 1 || k >= n {
            return Err(Error::KOutOfRange { k, min: 2, max: n.saturating_sub(1) });
        }
        if !(gamma1 > 0.0 && gamma1.is_finite()) {
            return Err(domain(format!("gamma1 must be positive, got {gamma1}")));
        }
        let threshold = self.xs[n - k - 1];
        let base = self.survival(threshold);
        if !(base > 0.0) {
            return Err(Error::DegenerateTail(format!(
                "product-limit survival vanishes at the threshold {threshold}"
            )));
        }
        let root_k = (k as f64).sqrt();
        grid.iter()
            .map(|&x| {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(domain(format!("tail process grid point {x} must be positive")));
                }
                let ratio = self.survival(x * threshold) / base;
                Ok((x, root_k * (ratio - x.powf(-1.0 / gamma1))))
            })
            .collect()
    }
}
