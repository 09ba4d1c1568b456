//! Command execution with run manifests.
//!
//! Each command writes its outputs and a manifest next to the primary
//! output (`<output>.manifest.json`). The manifest records every parameter,
//! the seeds, the library version and SHA-256 digests of inputs and
//! outputs, so [`replay`] can re-run the command and confirm the outputs
//! are reproduced byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{read_sample_csv, write_fit_csv, write_json, write_report_csv, write_trace_csv};
use crate::limit_process::mc_variance;
use crate::montecarlo::{run_study_with_threads, StudyConfig};
use crate::product_limit::{ProductLimitFit, Variant};
use crate::tail_index::{default_k_range, estimate, gamma1_path, EstimateOptions, TailIndexEstimate, DEFAULT_THETA};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateRun {
    pub input: PathBuf,
    pub output: PathBuf,
    #[serde(default)]
    pub variant: Variant,
    pub k: Option<usize>,
    pub k2: Option<usize>,
    pub theta: f64,
    pub level: f64,
    /// Estimator path `k,gamma1_hat` over the search range.
    pub trace: Option<PathBuf>,
    /// Per-atom product-limit export `x,c_n,df`.
    pub fit: Option<PathBuf>,
}

impl EstimateRun {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            output: output.into(),
            variant: Variant::Woodroofe,
            k: None,
            k2: None,
            theta: DEFAULT_THETA,
            level: 0.95,
            trace: None,
            fit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRun {
    pub config: StudyConfig,
    /// Source of `config`, recorded as an input when present.
    pub config_file: Option<PathBuf>,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitCheckRun {
    pub gamma1: f64,
    pub gamma2: f64,
    pub paths: usize,
    pub m: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum RunSpec {
    Estimate(EstimateRun),
    Simulate(SimulateRun),
    LimitCheck(LimitCheckRun),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub run: RunSpec,
    pub seeds: Vec<u64>,
    pub version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitCheckReport {
    pub gamma1: f64,
    pub gamma2: f64,
    pub n_paths: usize,
    pub m: usize,
    pub mc_mean: f64,
    pub mc_variance: f64,
    pub sigma2_closed_form: f64,
    pub relative_error: f64,
    pub std_error: f64,
}

/// What a run produced, beyond the files themselves.
#[derive(Debug, Clone)]
pub enum RunResult {
    Estimate(TailIndexEstimate),
    Simulate { rows: usize },
    LimitCheck(LimitCheckReport),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: RunResult,
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn digest(path: &Path) -> Result<FileDigest> {
    Ok(FileDigest { path: path.to_path_buf(), sha256: sha256_file(path)? })
}

pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?
        .install(f)
}

impl RunSpec {
    fn inputs(&self) -> Vec<&Path> {
        match self {
            RunSpec::Estimate(r) => vec![r.input.as_path()],
            RunSpec::Simulate(r) => r.config_file.iter().map(|p| p.as_path()).collect(),
            RunSpec::LimitCheck(_) => vec![],
        }
    }

    fn outputs(&self) -> Vec<&Path> {
        match self {
            RunSpec::Estimate(r) => {
                let mut v = vec![r.output.as_path()];
                v.extend(r.trace.as_deref());
                v.extend(r.fit.as_deref());
                v
            }
            RunSpec::Simulate(r) => vec![r.csv.as_path(), r.json.as_path()],
            RunSpec::LimitCheck(r) => vec![r.output.as_path()],
        }
    }

    fn seeds(&self) -> Vec<u64> {
        match self {
            RunSpec::Estimate(_) => vec![],
            RunSpec::Simulate(r) => vec![r.config.master_seed],
            RunSpec::LimitCheck(r) => vec![r.seed],
        }
    }

    fn primary_output(&self) -> &Path {
        self.outputs()[0]
    }
}

fn run_estimate(r: &EstimateRun) -> Result<RunResult> {
    let sample = read_sample_csv(File::open(&r.input)?)?;
    if sample.len() < 3 {
        return Err(Error::InvalidSample(format!("need at least 3 rows, found {}", sample.len())));
    }
    let opts = EstimateOptions { variant: r.variant, k: r.k, k2: r.k2, theta: r.theta, level: r.level };
    let est = estimate(&sample, &opts)?;
    write_json(&est, create(&r.output)?)?;
    let fit = ProductLimitFit::fit(&sample, r.variant);
    if let Some(path) = &r.trace {
        let (k_min, k_max) = default_k_range(sample.len())?;
        let path_values = gamma1_path(&fit, k_max)?;
        let trace: Vec<(usize, f64)> = (k_min..=k_max).map(|k| (k, path_values[k])).collect();
        write_trace_csv(&trace, create(path)?)?;
    }
    if let Some(path) = &r.fit {
        write_fit_csv(&fit, create(path)?)?;
    }
    Ok(RunResult::Estimate(est))
}

fn run_simulate(r: &SimulateRun) -> Result<RunResult> {
    let report = run_study_with_threads(&r.config, r.threads)?;
    write_report_csv(&report, create(&r.csv)?)?;
    write_json(&report, create(&r.json)?)?;
    Ok(RunResult::Simulate { rows: report.rows.len() })
}

fn run_limit_check(r: &LimitCheckRun) -> Result<RunResult> {
    let s = with_pool(r.threads, || mc_variance(r.gamma1, r.gamma2, r.paths, r.m, r.seed))?;
    let report = LimitCheckReport {
        gamma1: s.gamma1,
        gamma2: s.gamma2,
        n_paths: s.n_paths,
        m: s.m,
        mc_mean: s.mean,
        mc_variance: s.variance,
        sigma2_closed_form: s.sigma2_closed_form,
        relative_error: (s.variance - s.sigma2_closed_form).abs() / s.sigma2_closed_form,
        std_error: s.std_error,
    };
    write_json(&report, create(&r.output)?)?;
    Ok(RunResult::LimitCheck(report))
}

/// Runs a command, writes its outputs and its manifest.
pub fn execute(spec: &RunSpec) -> Result<RunOutcome> {
    let started = chrono::Utc::now().to_rfc3339();
    let inputs = spec.inputs().into_iter().map(digest).collect::<Result<Vec<_>>>()?;
    let result = match spec {
        RunSpec::Estimate(r) => run_estimate(r)?,
        RunSpec::Simulate(r) => run_simulate(r)?,
        RunSpec::LimitCheck(r) => run_limit_check(r)?,
    };
    let outputs = spec.outputs().into_iter().map(digest).collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        run: spec.clone(),
        seeds: spec.seeds(),
        version: VERSION.to_string(),
        inputs,
        outputs,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
    };
    let manifest_path = manifest_path_for(spec.primary_output());
    write_json(&manifest, create(&manifest_path)?)?;
    Ok(RunOutcome { result, manifest, manifest_path })
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Outcome of re-running a manifest.
#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub outcome: RunOutcome,
    /// Outputs whose digest differs from the recorded one.
    pub mismatched: Vec<PathBuf>,
}

impl ReplayReport {
    pub fn reproduced(&self) -> bool {
        self.mismatched.is_empty()
    }
}

/// Re-runs the command recorded in a manifest and compares output digests.
/// Inputs must still match their recorded digests.
pub fn replay(manifest_path: &Path) -> Result<ReplayReport> {
    let recorded = read_manifest(manifest_path)?;
    for input in &recorded.inputs {
        let now = sha256_file(&input.path)?;
        if now != input.sha256 {
            return Err(Error::InvalidSample(format!(
                "input {} changed since the recorded run (sha256 {now}, recorded {})",
                input.path.display(),
                input.sha256
            )));
        }
    }
    let outcome = execute(&recorded.run)?;
    let mismatched = recorded
        .outputs
        .iter()
        .zip(&outcome.manifest.outputs)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.path.clone())
        .collect();
    Ok(ReplayReport { outcome, mismatched })
}

/// Writes `text` to `path`; convenience for tests and scripts.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}
