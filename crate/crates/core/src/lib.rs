//! Tail index estimation for randomly right-truncated heavy-tailed data.
//!
//! The crate estimates the extreme value index `gamma1` of a variable `X`
//! that is only observed when `X <= Y` for an independent truncating `Y`.
//! The estimator is a Hill-type statistic built on the product-limit
//! estimator of the truncated law; [`limit_process`] simulates its Gaussian
//! limit and [`montecarlo`] replicates a Burr simulation study.

pub mod distributions;
pub mod error;
pub mod io;
pub mod limit_process;
pub mod montecarlo;
pub mod product_limit;
pub mod quadrature;
pub mod rng;
pub mod runs;
pub mod stats;
pub mod tail_index;
pub mod truncation;

pub use distributions::{Family, HeavyTailModel};
pub use error::{Error, Result};
pub use limit_process::{
    delta_moments, gamma_process, limiting_rv, mc_variance, simulate_wiener, EnsembleSummary, WienerPath,
};
pub use montecarlo::{run_cell, run_study, CellRun, CellSpec, StudyConfig, StudyReport, StudyRow};
pub use product_limit::{empirical_c, ProductLimitFit, Variant};
pub use tail_index::{
    asymptotic_variance, confidence_interval, estimate, estimate_gamma2, gamma1_estimate, hill,
    select_k_reiss_thomas, EstimateOptions, TailIndexEstimate,
};
pub use truncation::{gamma2_for_target_p, TruncatedSample, TruncationModel};
