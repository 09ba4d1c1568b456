//! Gaussian limits of the tail product-limit process and of the estimator.
//!
//! Every functional here is linear in the Wiener path. A path is stored on
//! a knot set (a uniform grid of step `1/m`, plus a dyadic refinement of the
//! first cell generated by Brownian-bridge sampling), and integrals of the
//! form `int_0^c s^p (log s)^j W(s) ds` are evaluated exactly for the
//! piecewise-linear interpolant of the knots. That turns each functional
//! into a fixed weight vector which is prepared once and applied to many
//! paths.
//!
//! The integrands behave like `s^(p + 1/2)` near 0, integrable whenever
//! `p > -3/2`, i.e. `gamma/gamma2 < 1/2`, which `gamma1 < gamma2` ensures.

use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng;
use crate::stats::CompensatedSum;
use crate::tail_index::asymptotic_variance;

/// Dyadic levels used to refine `[0, 1/m]`.
pub const DEFAULT_HEAD_LEVELS: usize = 96;
/// Equal pieces per dyadic head cell `[h 2^-j, h 2^(1-j)]`.
pub const DEFAULT_HEAD_SPLIT: usize = 8;

/// Knots shared by all paths of an ensemble.
///
/// Layout: `0`, then `h 2^-L`, then for each dyadic cell from the finest
/// up, `split - 1` interior knots and the cell's right end; the last right
/// end is `h = 1/m`, followed by the uniform knots `2/m, ..., 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    m: usize,
    head_levels: usize,
    head_split: usize,
    knots: Vec<f64>,
}

impl PathGrid {
    pub fn new(m: usize, head_levels: usize) -> Result<Arc<Self>> {
        Self::with_head(m, head_levels, DEFAULT_HEAD_SPLIT)
    }

    pub fn with_head(m: usize, head_levels: usize, head_split: usize) -> Result<Arc<Self>> {
        if m < 2 {
            return Err(domain(format!("path resolution m must be at least 2, got {m}")));
        }
        if head_split == 0 {
            return Err(domain("head cells need at least one piece"));
        }
        let h = 1.0 / m as f64;
        let mut knots = Vec::with_capacity(m + head_levels * head_split + 1);
        knots.push(0.0);
        if head_levels > 0 {
            knots.push(h * 0.5f64.powi(head_levels as i32));
            for level in (1..=head_levels).rev() {
                let (a, b) = (h * 0.5f64.powi(level as i32), h * 0.5f64.powi(level as i32 - 1));
                knots.extend((1..head_split).map(|i| a + (b - a) * i as f64 / head_split as f64));
                if level > 1 {
                    knots.push(b);
                }
            }
        }
        knots.extend((1..=m).map(|j| j as f64 / m as f64));
        Ok(Arc::new(Self { m, head_levels, head_split, knots }))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn head_levels(&self) -> usize {
        self.head_levels
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Index of the knot `j/m`.
    fn uniform_index(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            self.head_levels * self.head_split + j
        }
    }

    /// Index of the dyadic knot `h 2^-level`, `0 <= level <= head_levels`.
    fn dyadic_index(&self, level: usize) -> usize {
        1 + (self.head_levels - level) * self.head_split
    }
}

/// A standard Wiener trajectory on `[0, 1]`, linear between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    grid: Arc<PathGrid>,
    values: Vec<f64>,
}

impl WienerPath {
    /// Samples a path: `m` iid `N(0, 1/m)` increments on the uniform grid,
    /// then bridge midpoints of `[0, 1/m]` down the dyadic levels, then the
    /// interior knots of each dyadic cell by sequential bridge sampling.
    pub fn simulate(grid: &Arc<PathGrid>, seed: u64) -> Self {
        let mut rng = rng::stream(seed, rng::purpose::WIENER);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let m = grid.m;
        let k = &grid.knots;
        let mut values = vec![0.0; k.len()];
        let sd = (1.0 / m as f64).sqrt();
        let mut w = 0.0;
        for j in 1..=m {
            w += sd * normal();
            values[grid.uniform_index(j)] = w;
        }
        let l = grid.head_levels;
        let mut right = values[grid.dyadic_index(0)];
        let mut span = 1.0 / m as f64;
        for level in 1..=l {
            let mid = 0.5 * right + 0.5 * span.sqrt() * normal();
            values[grid.dyadic_index(level)] = mid;
            right = mid;
            span *= 0.5;
        }
        for level in 1..=l {
            let (lo, hi) = (grid.dyadic_index(level), grid.dyadic_index(level - 1));
            let (tr, wr) = (k[hi], values[hi]);
            for i in lo + 1..hi {
                let (tl, wl) = (k[i - 1], values[i - 1]);
                let t = k[i];
                let frac = (t - tl) / (tr - tl);
                let var = (t - tl) * (tr - t) / (tr - tl);
                values[i] = wl + frac * (wr - wl) + var.sqrt() * normal();
            }
        }
        Self { grid: Arc::clone(grid), values }
    }

    pub fn zero(grid: &Arc<PathGrid>) -> Self {
        Self { grid: Arc::clone(grid), values: vec![0.0; grid.knots.len()] }
    }

    /// Builds a path from values at every knot; `values[0]` must be 0.
    pub fn from_values(grid: &Arc<PathGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.knots.len() {
            return Err(domain(format!(
                "expected {} knot values, got {}",
                grid.knots.len(),
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(domain("a Wiener path starts at 0"));
        }
        Ok(Self { grid: Arc::clone(grid), values })
    }

    pub fn grid(&self) -> &Arc<PathGrid> {
        &self.grid
    }

    pub fn knots(&self) -> &[f64] {
        &self.grid.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values on the uniform grid `j/m`, `j = 0..=m`.
    pub fn uniform_values(&self) -> Vec<f64> {
        (0..=self.grid.m).map(|j| self.values[self.grid.uniform_index(j)]).collect()
    }

    pub fn at(&self, s: f64) -> f64 {
        let k = &self.grid.knots;
        let s = s.clamp(0.0, 1.0);
        let i = k.partition_point(|&t| t <= s).clamp(1, k.len() - 1);
        let (a, b) = (k[i - 1], k[i]);
        let lam = (s - a) / (b - a);
        self.values[i - 1] * (1.0 - lam) + self.values[i] * lam
    }

    pub fn add(&self, other: &WienerPath) -> Result<WienerPath> {
        if self.grid != other.grid {
            return Err(domain("paths live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: Arc::clone(&self.grid), values })
    }
}

/// `m`-step path with the default head refinement.
pub fn simulate_wiener(m: usize, seed: u64) -> Result<WienerPath> {
    Ok(WienerPath::simulate(&PathGrid::new(m, DEFAULT_HEAD_LEVELS)?, seed))
}

/// A linear functional `W -> sum_j weights[j] W(knot_j)`.
#[derive(Debug, Clone)]
pub struct PathFunctional {
    weights: Vec<f64>,
}

impl PathFunctional {
    fn zeros(grid: &PathGrid) -> Self {
        Self { weights: vec![0.0; grid.knots.len()] }
    }

    pub fn apply(&self, path: &WienerPath) -> f64 {
        debug_assert_eq!(self.weights.len(), path.values.len());
        self.weights
            .iter()
            .zip(&path.values)
            .map(|(w, v)| w * v)
            .collect::<CompensatedSum>()
            .value()
    }

    fn add_point(&mut self, knots: &[f64], s: f64, coef: f64) {
        let i = knots.partition_point(|&t| t <= s).clamp(1, knots.len() - 1);
        let (a, b) = (knots[i - 1], knots[i]);
        let lam = (s - a) / (b - a);
        self.weights[i - 1] += coef * (1.0 - lam);
        self.weights[i] += coef * lam;
    }

    /// Adds `coef * int_0^upper s^p (log s)^[with_log] W(s) ds`, exact for
    /// the linear interpolant. Requires `p > -2`.
    fn add_power_integral(&mut self, knots: &[f64], upper: f64, p: f64, with_log: bool, coef: f64) {
        // first cell: W(s) = W_1 s / t_1, and int_0^b s^(p+1) converges
        let t1 = knots[1];
        let b = upper.min(t1);
        self.weights[1] += coef * antiderivative(p + 1.0, with_log, b) / t1;
        for i in 1..knots.len() - 1 {
            let (a, b_full) = (knots[i], knots[i + 1]);
            if a >= upper {
                break;
            }
            let b = b_full.min(upper);
            let h = b_full - a;
            let m0 = antiderivative(p, with_log, b) - antiderivative(p, with_log, a);
            let m1 = antiderivative(p + 1.0, with_log, b) - antiderivative(p + 1.0, with_log, a);
            self.weights[i] += coef * (b_full * m0 - m1) / h;
            self.weights[i + 1] += coef * (m1 - a * m0) / h;
        }
    }
}

/// Antiderivative of `s^q` (or `s^q log s`), vanishing at 0 when `q > -1`.
fn antiderivative(q: f64, with_log: bool, s: f64) -> f64 {
    let r = q + 1.0;
    if s == 0.0 {
        return 0.0;
    }
    let ls = s.ln();
    if r == 0.0 {
        return if with_log { 0.5 * ls * ls } else { ls };
    }
    let sr = s.powf(r);
    if with_log {
        sr * (ls / r - 1.0 / (r * r))
    } else {
        sr / r
    }
}

fn check_indices(gamma1: f64, gamma2: f64) -> Result<f64> {
    if !(gamma1 > 0.0 && gamma2 > 0.0 && gamma1.is_finite() && gamma2.is_finite()) {
        return Err(domain(format!("tail indices must be positive, got ({gamma1}, {gamma2})")));
    }
    if gamma1 >= gamma2 {
        return Err(Error::ModelViolation(format!(
            "limit process needs gamma1 < gamma2, got {gamma1} >= {gamma2}"
        )));
    }
    Ok(gamma1 * gamma2 / (gamma1 + gamma2))
}

/// `Gamma(x; W)` prepared for a fixed `x` and grid.
///
/// ```text
/// Gamma(x; W) = (gamma/gamma1) x^(-1/gamma1) { x^(1/gamma) W(x^(-1/gamma)) - W(1) }
///   + (gamma/(gamma1+gamma2)) x^(-1/gamma1) int_0^1 s^(-gamma/gamma2 - 1)
///       { x^(1/gamma) W(x^(-1/gamma) s) - W(s) } ds
/// ```
///
/// The paths live on `[0, 1]`, so `x >= 1` is required.
#[derive(Debug, Clone)]
pub struct GammaProcess {
    prefactor: f64,
    scaled: PathFunctional,
    base: PathFunctional,
}

impl GammaProcess {
    pub fn new(x: f64, gamma1: f64, gamma2: f64, grid: &PathGrid) -> Result<Self> {
        let gamma = check_indices(gamma1, gamma2)?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(domain(format!("Gamma(x; W) needs x > 0, got {x}")));
        }
        if x < 1.0 {
            return Err(domain(format!(
                "Gamma(x; W) reads W at x^(-1/gamma) > 1 for x = {x} < 1, outside the path"
            )));
        }
        let a = gamma / gamma2;
        let p = -a - 1.0;
        let c = x.powf(-1.0 / gamma);
        let point_coef = gamma / gamma1;
        let integral_coef = gamma / (gamma1 + gamma2);
        let knots = grid.knots();

        // int_0^1 s^p W(cs) ds = c^a int_0^c r^p W(r) dr
        let mut scaled = PathFunctional::zeros(grid);
        scaled.add_point(knots, c, point_coef * x.powf(1.0 / gamma));
        scaled.add_power_integral(knots, c, p, false, integral_coef * x.powf((1.0 - a) / gamma));

        let mut base = PathFunctional::zeros(grid);
        base.add_point(knots, 1.0, point_coef);
        base.add_power_integral(knots, 1.0, p, false, integral_coef);

        Ok(Self { prefactor: x.powf(-1.0 / gamma1), scaled, base })
    }

    pub fn apply(&self, path: &WienerPath) -> f64 {
        self.prefactor * (self.scaled.apply(path) - self.base.apply(path))
    }
}

pub fn gamma_process(x: f64, path: &WienerPath, gamma1: f64, gamma2: f64) -> Result<f64> {
    Ok(GammaProcess::new(x, gamma1, gamma2, path.grid())?.apply(path))
}

/// The centred limit of `sqrt(k)(gamma1_hat - gamma1)`:
/// `-gamma W(1) + gamma/(gamma1+gamma2) int_0^1 (gamma2 - gamma1 - gamma log s) s^(-gamma/gamma2 - 1) W(s) ds`.
#[derive(Debug, Clone)]
pub struct LimitingRv {
    functional: PathFunctional,
}

impl LimitingRv {
    pub fn new(gamma1: f64, gamma2: f64, grid: &PathGrid) -> Result<Self> {
        let gamma = check_indices(gamma1, gamma2)?;
        let p = -gamma / gamma2 - 1.0;
        let coef = gamma / (gamma1 + gamma2);
        let knots = grid.knots();
        let mut f = PathFunctional::zeros(grid);
        f.add_point(knots, 1.0, -gamma);
        f.add_power_integral(knots, 1.0, p, false, coef * (gamma2 - gamma1));
        f.add_power_integral(knots, 1.0, p, true, -coef * gamma);
        Ok(Self { functional: f })
    }

    pub fn apply(&self, path: &WienerPath) -> f64 {
        self.functional.apply(path)
    }
}

pub fn limiting_rv(path: &WienerPath, gamma1: f64, gamma2: f64) -> Result<f64> {
    Ok(LimitingRv::new(gamma1, gamma2, path.grid())?.apply(path))
}

/// `(Delta1, Delta2, Delta3) = (int s^(rho-2) W, int s^(rho-2) W log s, W(1))`.
#[derive(Debug, Clone)]
pub struct DeltaFunctionals {
    parts: [PathFunctional; 3],
}

impl DeltaFunctionals {
    pub fn new(rho: f64, grid: &PathGrid) -> Result<Self> {
        check_rho(rho)?;
        let knots = grid.knots();
        let mut d1 = PathFunctional::zeros(grid);
        d1.add_power_integral(knots, 1.0, rho - 2.0, false, 1.0);
        let mut d2 = PathFunctional::zeros(grid);
        d2.add_power_integral(knots, 1.0, rho - 2.0, true, 1.0);
        let mut d3 = PathFunctional::zeros(grid);
        d3.add_point(knots, 1.0, 1.0);
        Ok(Self { parts: [d1, d2, d3] })
    }

    pub fn apply(&self, path: &WienerPath) -> [f64; 3] {
        [self.parts[0].apply(path), self.parts[1].apply(path), self.parts[2].apply(path)]
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.5 && rho.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("rho must exceed 1/2, got {rho}")))
    }
}

/// Second moments of `(Delta1, Delta2, Delta3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaMoments {
    pub d1d1: f64,
    pub d2d2: f64,
    pub d3d3: f64,
    pub d1d2: f64,
    pub d1d3: f64,
    pub d2d3: f64,
}

impl DeltaMoments {
    pub fn as_array(&self) -> [f64; 6] {
        [self.d1d1, self.d2d2, self.d3d3, self.d1d2, self.d1d3, self.d2d3]
    }
}

/// Closed-form second moments of the Delta functionals.
pub fn delta_moments(rho: f64) -> Result<DeltaMoments> {
    check_rho(rho)?;
    let t = 2.0 * rho - 1.0;
    Ok(DeltaMoments {
        d1d1: 2.0 / (rho * t),
        d2d2: 2.0 * (4.0 * rho - 1.0) / (rho * rho * t.powi(3)),
        d3d3: 1.0,
        d1d2: (1.0 - 4.0 * rho) / (rho * rho * t * t),
        d1d3: 1.0 / rho,
        d2d3: -1.0 / (rho * rho),
    })
}

/// `E[Delta^2]` for `Delta = a Delta1 + b Delta2 - Delta3`.
pub fn assembled_delta_variance(a: f64, b: f64, rho: f64) -> Result<f64> {
    let m = delta_moments(rho)?;
    Ok(a * a * m.d1d1 + b * b * m.d2d2 + m.d3d3 + 2.0 * a * b * m.d1d2
        - 2.0 * a * m.d1d3
        - 2.0 * b * m.d2d3)
}

/// `(a, b, rho)` of the variance decomposition for `(gamma1, gamma2)`.
pub fn delta_coefficients(gamma1: f64, gamma2: f64) -> Result<(f64, f64, f64)> {
    let gamma = check_indices(gamma1, gamma2)?;
    Ok((
        (gamma2 - gamma1) / (gamma1 + gamma2),
        -gamma / (gamma1 + gamma2),
        1.0 - gamma / gamma2,
    ))
}

/// Monte Carlo summary of the limiting variable, exported as JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub gamma1: f64,
    pub gamma2: f64,
    pub n_paths: usize,
    pub m: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `variance`.
    pub std_error: f64,
    /// Standard error of `mean`.
    pub mean_std_error: f64,
    pub sigma2_closed_form: f64,
}

fn path_seed(seed: u64, index: usize) -> u64 {
    rng::derive_seed(seed, &[index as u64])
}

/// Sample mean and variance of the limiting variable over `n_paths`
/// independent paths. Results do not depend on the rayon pool size.
pub fn mc_variance(gamma1: f64, gamma2: f64, n_paths: usize, m: usize, seed: u64) -> Result<EnsembleSummary> {
    if n_paths < 1000 {
        return Err(domain(format!("need at least 1000 paths, got {n_paths}")));
    }
    let grid = PathGrid::new(m, DEFAULT_HEAD_LEVELS)?;
    let functional = LimitingRv::new(gamma1, gamma2, &grid)?;
    let draws: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| functional.apply(&WienerPath::simulate(&grid, path_seed(seed, i))))
        .collect();

    let nf = n_paths as f64;
    let mean = draws.iter().copied().collect::<CompensatedSum>().value() / nf;
    let m2 = draws.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().value() / nf;
    let m4 = draws.iter().map(|v| (v - mean).powi(4)).collect::<CompensatedSum>().value() / nf;
    let variance = m2 * nf / (nf - 1.0);
    Ok(EnsembleSummary {
        gamma1,
        gamma2,
        n_paths,
        m,
        mean,
        variance,
        std_error: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        mean_std_error: (variance / nf).sqrt(),
        sigma2_closed_form: asymptotic_variance(gamma1, gamma2)?,
    })
}

/// Monte Carlo second moments of `(Delta1, Delta2, Delta3)`.
pub fn mc_delta_moments(rho: f64, n_paths: usize, m: usize, seed: u64) -> Result<DeltaMoments> {
    if n_paths == 0 {
        return Err(domain("need at least one path"));
    }
    let grid = PathGrid::new(m, DEFAULT_HEAD_LEVELS)?;
    let functionals = DeltaFunctionals::new(rho, &grid)?;
    let draws: Vec<[f64; 3]> = (0..n_paths)
        .into_par_iter()
        .map(|i| functionals.apply(&WienerPath::simulate(&grid, path_seed(seed, i))))
        .collect();
    let nf = n_paths as f64;
    let moment = |i: usize, j: usize| {
        draws.iter().map(|d| d[i] * d[j]).collect::<CompensatedSum>().value() / nf
    };
    Ok(DeltaMoments {
        d1d1: moment(0, 0),
        d2d2: moment(1, 1),
        d3d3: moment(2, 2),
        d1d2: moment(0, 1),
        d1d3: moment(0, 2),
        d2d3: moment(1, 2),
    })
}
