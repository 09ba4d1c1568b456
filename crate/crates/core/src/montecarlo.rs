//! Replicated simulation study over truncated Burr samples.
//!
//! Each replicate draws `N` pairs, keeps the observed ones, selects `k` by
//! Reiss–Thomas and records the estimate. Replicate seeds are derived from
//! the master seed and the cell's parameters (not its position), so rows do
//! not change when cells are reordered or run on a different number of
//! workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::product_limit::{ProductLimitFit, Variant};
use crate::rng::derive_seed;
use crate::stats::CompensatedSum;
use crate::tail_index::{default_k_range, gamma1_from_fit, select_k_from_fit, DEFAULT_THETA};
use crate::truncation::{gamma2_for_target_p, TruncationModel};

/// Replicates with fewer observed pairs are dropped.
pub const MIN_OBSERVED: usize = 10;

fn default_delta() -> f64 {
    0.25
}

fn default_theta() -> f64 {
    DEFAULT_THETA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    /// Target observed fraction `p = gamma2/(gamma1 + gamma2)`.
    pub p: f64,
    pub gamma1: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Sizes `N` of the untruncated samples.
    #[serde(rename = "N")]
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub cells: Vec<CellSpec>,
    pub replicates: usize,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default = "default_theta")]
    pub theta: f64,
    pub master_seed: u64,
}

/// A violated constraint, located by JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub pointer: String,
    pub message: String,
}

impl StudyConfig {
    /// Every constraint violation in the config.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut push = |pointer: String, message: &str| {
            out.push(ConfigIssue { pointer, message: message.to_string() })
        };
        if self.cells.is_empty() {
            push("/cells".into(), "at least one cell is required");
        }
        if self.replicates == 0 {
            push("/replicates".into(), "must be at least 1");
        }
        if !(0.0..=0.5).contains(&self.theta) {
            push("/theta".into(), "must lie in [0, 0.5]");
        }
        for (i, c) in self.cells.iter().enumerate() {
            if !(c.p > 0.0 && c.p < 1.0) {
                push(format!("/cells/{i}/p"), "must lie in (0, 1)");
            }
            if !(c.gamma1 > 0.0 && c.gamma1.is_finite()) {
                push(format!("/cells/{i}/gamma1"), "must be positive");
            }
            if !(c.delta > 0.0 && c.delta.is_finite()) {
                push(format!("/cells/{i}/delta"), "must be positive");
            }
            if c.sizes.is_empty() {
                push(format!("/cells/{i}/N"), "at least one sample size is required");
            }
            for (j, &n) in c.sizes.iter().enumerate() {
                if n == 0 {
                    push(format!("/cells/{i}/N/{j}"), "must be at least 1");
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            return Ok(());
        }
        Err(domain(
            issues
                .iter()
                .map(|i| format!("{}: {}", i.pointer, i.message))
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }

    /// The reference grid: `delta = 1/4`, `gamma1 in {0.6, 0.8}`,
    /// `p in {0.7, 0.8, 0.9}`, `N in {200, 300, 500, 1000, 1500, 2000}`.
    pub fn burr_grid(replicates: usize, master_seed: u64) -> Self {
        let sizes = vec![200, 300, 500, 1000, 1500, 2000];
        let mut cells = Vec::new();
        for p in [0.7, 0.8, 0.9] {
            for gamma1 in [0.6, 0.8] {
                cells.push(CellSpec { p, gamma1, delta: 0.25, sizes: sizes.clone() });
            }
        }
        Self { cells, replicates, variant: Variant::Woodroofe, theta: DEFAULT_THETA, master_seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub p: f64,
    pub gamma1: f64,
    pub delta: f64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub mean_n: f64,
    pub mean_k_star: f64,
    /// `|mean(gamma1_hat) - gamma1|`.
    pub abs_bias: f64,
    pub rmse: f64,
    pub completed: usize,
    pub replicates: usize,
}

impl StudyRow {
    pub fn completion_rate(&self) -> f64 {
        self.completed as f64 / self.replicates as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicate {
    pub n: usize,
    pub k_star: usize,
    pub gamma1_hat: f64,
}

/// Parameters of one table cell at one sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRun {
    pub p: f64,
    pub gamma1: f64,
    pub delta: f64,
    pub big_n: usize,
    pub replicates: usize,
    pub variant: Variant,
    pub theta: f64,
}

impl CellRun {
    /// Seed of this cell under `master_seed`, keyed on its parameters.
    pub fn seed(&self, master_seed: u64) -> u64 {
        derive_seed(
            master_seed,
            &[self.p.to_bits(), self.gamma1.to_bits(), self.delta.to_bits(), self.big_n as u64],
        )
    }
}

/// One replicate; `None` when the sample is degenerate.
pub fn run_replicate(model: &TruncationModel, cell: &CellRun, seed: u64) -> Option<Replicate> {
    let sample = model.sample_truncated(cell.big_n, seed).ok()?;
    let n = sample.len();
    if n < MIN_OBSERVED {
        return None;
    }
    let fit = ProductLimitFit::fit(&sample, cell.variant);
    let (k_min, k_max) = default_k_range(n).ok()?;
    let k_star = select_k_from_fit(&fit, cell.theta, k_min, k_max).ok()?;
    let gamma1_hat = gamma1_from_fit(&fit, k_star).ok()?;
    gamma1_hat.is_finite().then_some(Replicate { n, k_star, gamma1_hat })
}

/// All replicates of a cell, in replicate order.
pub fn cell_replicates(cell: &CellRun, seed: u64) -> Result<Vec<Option<Replicate>>> {
    if cell.replicates == 0 {
        return Err(domain("replicates must be at least 1"));
    }
    if cell.big_n == 0 {
        return Err(domain("N must be at least 1"));
    }
    let gamma2 = gamma2_for_target_p(cell.gamma1, cell.p)?;
    let model = TruncationModel::burr_pair(cell.delta, cell.gamma1, gamma2)?;
    Ok((0..cell.replicates)
        .into_par_iter()
        .map(|r| run_replicate(&model, cell, derive_seed(seed, &[r as u64])))
        .collect())
}

pub fn run_cell(cell: &CellRun, seed: u64) -> Result<StudyRow> {
    let reps = cell_replicates(cell, seed)?;
    let done: Vec<Replicate> = reps.into_iter().flatten().collect();
    if done.is_empty() {
        return Err(Error::DegenerateTail(format!(
            "cell p = {}, gamma1 = {}, N = {}: every replicate was degenerate",
            cell.p, cell.gamma1, cell.big_n
        )));
    }
    let count = done.len() as f64;
    let sum = |f: &dyn Fn(&Replicate) -> f64| done.iter().map(f).collect::<CompensatedSum>().value();
    let mean_hat = sum(&|r| r.gamma1_hat) / count;
    let mse = sum(&|r| (r.gamma1_hat - cell.gamma1).powi(2)) / count;
    Ok(StudyRow {
        p: cell.p,
        gamma1: cell.gamma1,
        delta: cell.delta,
        big_n: cell.big_n,
        mean_n: sum(&|r| r.n as f64) / count,
        mean_k_star: sum(&|r| r.k_star as f64) / count,
        abs_bias: (mean_hat - cell.gamma1).abs(),
        rmse: mse.sqrt(),
        completed: done.len(),
        replicates: cell.replicates,
    })
}

/// Runs every (cell, N) in configured order on the current rayon pool.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let mut rows = Vec::new();
    for (i, c) in config.cells.iter().enumerate() {
        for &big_n in &c.sizes {
            let cell = CellRun {
                p: c.p,
                gamma1: c.gamma1,
                delta: c.delta,
                big_n,
                replicates: config.replicates,
                variant: config.variant,
                theta: config.theta,
            };
            let row = run_cell(&cell, cell.seed(config.master_seed)).map_err(|e| match e {
                Error::DegenerateTail(m) => Error::DegenerateTail(format!("cell {i}: {m}")),
                other => other,
            })?;
            rows.push(row);
        }
    }
    Ok(StudyReport { rows })
}

/// [`run_study`] on a dedicated pool of `threads` workers.
pub fn run_study_with_threads(config: &StudyConfig, threads: usize) -> Result<StudyReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    pool.install(|| run_study(config))
}
