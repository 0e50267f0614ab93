//! Command implementations behind the `overlap-entangle` binary: `run`,
//! `scan` and `reconstruct`. Every number in a report comes from a library
//! call; this layer only wires configs to the pipeline and writes files.

pub mod config;
pub mod matrix_io;

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::density::DensityMatrix;
use crate::entanglement::{self, ClassificationReport, TargetState};
use crate::error::Error;
use crate::reduce::{self, DelayModel, GramMatrix};
use crate::tomography::{self, CountsTable, MleOptions};
use crate::transform;
use config::{build_gram, ExperimentConfig, TransformConfig, ValidatedConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: String,
    pub origin: Option<String>,
    pub field: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn config(origin: &str, field: impl Into<String>, code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            origin: Some(origin.into()),
            field: Some(field.into()),
            message: message.into(),
            exit_code: EXIT_VALIDATION,
        }
    }

    pub fn from_error(origin: &str, field: &str, e: Error) -> Self {
        let mut err = Self::from(e);
        err.origin = Some(origin.into());
        err.field = Some(field.into());
        err
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: "io-error".into(),
            origin: Some(path.display().to_string()),
            field: None,
            message: e.to_string(),
            exit_code: EXIT_VALIDATION,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: "usage".into(),
            origin: None,
            field: None,
            message: message.into(),
            exit_code: EXIT_VALIDATION,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: e.code().into(),
            origin: None,
            field: None,
            message: e.to_string(),
            exit_code: if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]", self.code)?;
        if let Some(o) = &self.origin {
            write!(f, ": {o}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ": {field}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Witness results with phases in units of π.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub fidelity_ghz: f64,
    pub fidelity_w_max: f64,
    pub phi1_pi: f64,
    pub phi2_pi: f64,
    pub ghz_witness_passed: bool,
    pub w_witness_passed: bool,
    pub offdiag_norm: f64,
    pub verdict: String,
}

impl From<&ClassificationReport> for Classification {
    fn from(r: &ClassificationReport) -> Self {
        Self {
            fidelity_ghz: r.fidelity_ghz,
            fidelity_w_max: r.fidelity_w_max,
            phi1_pi: r.phi1 / std::f64::consts::PI,
            phi2_pi: r.phi2 / std::f64::consts::PI,
            ghz_witness_passed: r.ghz_witness_passed,
            w_witness_passed: r.w_witness_passed,
            offdiag_norm: r.offdiag_norm,
            verdict: r.verdict.as_str().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographySummary {
    pub shots: u64,
    pub seed: u64,
    pub settings: usize,
    pub counts_file: MatrixFile,
    pub density_matrix: MatrixFile,
    pub mle_iterations: usize,
    pub mle_converged: bool,
    pub log_likelihood: f64,
    /// Uhlmann fidelity between the reconstruction and the simulated state.
    pub fidelity_to_theory: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub num_particles: usize,
    pub num_modes: usize,
    pub p_success: f64,
    pub density_matrix: MatrixFile,
    pub witness_margin: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tomography: Option<TomographySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructReport {
    pub tool: String,
    pub version: String,
    pub counts_sha256: String,
    pub num_qubits: usize,
    pub shots_per_setting: u64,
    pub settings: usize,
    pub density_matrix: MatrixFile,
    pub mle_iterations: usize,
    pub mle_converged: bool,
    pub log_likelihood: f64,
    pub fidelity_ghz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_w_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi1_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi2_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub value: f64,
    pub p_success: f64,
    pub fidelity_ghz: Option<f64>,
    pub fidelity_w_max: Option<f64>,
    pub phi1_pi: Option<f64>,
    pub phi2_pi: Option<f64>,
    pub ghz_witness_passed: Option<bool>,
    pub w_witness_passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanParameter {
    /// Uniform pairwise overlap `g`.
    Overlap,
    /// Delay of particle `i` (0-based; written `L1`, `L2`, … on the command line).
    Delay(usize),
    /// A GHZ amplitude magnitude; its row partner keeps the row normalized.
    Amplitude(String),
}

impl std::str::FromStr for ScanParameter {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "g" || s == "overlap" {
            return Ok(ScanParameter::Overlap);
        }
        if let Some(i) = s.strip_prefix('L').and_then(|i| i.parse::<usize>().ok()) {
            if i >= 1 {
                return Ok(ScanParameter::Delay(i - 1));
            }
        }
        if transform::GhzParams::balanced().get(s).is_some() {
            return Ok(ScanParameter::Amplitude(s.into()));
        }
        Err(CliError {
            code: "unknown-parameter".into(),
            origin: None,
            field: Some("--param".into()),
            message: format!("'{s}' is not scannable; use g, L<i> (1-based delay) or a GHZ amplitude name"),
            exit_code: EXIT_VALIDATION,
        })
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<MatrixFile, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(MatrixFile {
        path: name.into(),
        sha256: sha256_hex(contents.as_bytes()),
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Flattens nested JSON objects to `key,value` lines.
fn to_key_value_csv(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, child, out);
                }
            }
            Value::String(s) => out.push((prefix.into(), s.clone())),
            Value::Null => out.push((prefix.into(), String::new())),
            other => out.push((prefix.into(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

pub fn render<T: Serialize>(report: &T, format: OutputFormat) -> String {
    let value = serde_json::to_value(report).expect("reports serialize");
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("reports serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => to_key_value_csv(&value),
    }
}

pub fn render_scan(rows: &[ScanRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut out = String::from(
                "value,p_success,fidelity_ghz,fidelity_w_max,phi1_pi,phi2_pi,ghz_witness_passed,w_witness_passed\n",
            );
            let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
            let optb = |x: Option<bool>| x.map_or(String::new(), |v| v.to_string());
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.value,
                    r.p_success,
                    opt(r.fidelity_ghz),
                    opt(r.fidelity_w_max),
                    opt(r.phi1_pi),
                    opt(r.phi2_pi),
                    optb(r.ghz_witness_passed),
                    optb(r.w_witness_passed)
                ));
            }
            out
        }
    }
}

fn classification_for(rho: &DensityMatrix, margin: f64) -> Result<Option<ClassificationReport>, CliError> {
    if rho.num_qubits() != 3 {
        return Ok(None);
    }
    Ok(Some(entanglement::classify_with_margin(rho, margin)?))
}

pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: OutputFormat,
}

fn load_validated(path: &Path, seed: Option<u64>) -> Result<(ValidatedConfig, String), CliError> {
    let origin = path.display().to_string();
    let mut cfg = ExperimentConfig::load(path)?;
    if let (Some(seed), Some(t)) = (seed, cfg.tomography.as_mut()) {
        t.seed = seed;
    }
    let validated = cfg.validate(&origin)?;
    Ok((validated, origin))
}

fn resolve_out_dir(cli: &Option<PathBuf>, cfg: &ExperimentConfig, config_path: &Path) -> PathBuf {
    if let Some(d) = cli {
        return d.clone();
    }
    match cfg.output.as_ref().and_then(|o| o.dir.as_ref()) {
        Some(d) => config_path.parent().unwrap_or(Path::new(".")).join(d),
        None => PathBuf::from("."),
    }
}

/// `run`: simulate, classify, optionally round-trip through tomography, and persist.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let (cfg, _) = load_validated(config_path, opts.seed)?;
    let out_dir = resolve_out_dir(&opts.out_dir, &cfg.raw, config_path);
    ensure_dir(&out_dir)?;

    let (rho, p_success) = reduce::simulate(&cfg.spec, &cfg.gram)?;
    let margin = cfg.raw.witness_margin;
    let classification = classification_for(&rho, margin)?;
    let density_matrix = write_file(&out_dir, "rho.txt", &matrix_io::write_matrix(rho.matrix()))?;

    let tomography = match (&cfg.raw.tomography, &cfg.settings) {
        (Some(t), Some(settings)) => {
            let counts = tomography::simulate_counts(&rho, settings, t.shots, t.seed)?;
            let counts_file = write_file(&out_dir, "counts.csv", &tomography::write_counts(&counts))?;
            let mut mle_opts = MleOptions::default();
            if let Some(m) = t.max_iters {
                mle_opts.max_iters = m;
            }
            if let Some(tol) = t.tol {
                mle_opts.tol = tol;
            }
            let mle = tomography::reconstruct_mle(&counts, &mle_opts)?;
            let mle_file = write_file(&out_dir, "rho_mle.txt", &matrix_io::write_matrix(mle.rho.matrix()))?;
            Some(TomographySummary {
                shots: t.shots,
                seed: t.seed,
                settings: settings.len(),
                counts_file,
                density_matrix: mle_file,
                mle_iterations: mle.iterations,
                mle_converged: mle.converged,
                log_likelihood: mle.log_likelihood,
                fidelity_to_theory: entanglement::fidelity_mixed(&mle.rho, &rho)?,
                classification: classification_for(&mle.rho, margin)?.as_ref().map(Classification::from),
            })
        }
        _ => None,
    };

    let report = RunReport {
        tool: "overlap-entangle".into(),
        version: crate::VERSION.into(),
        config_hash: cfg.raw.hash(),
        name: cfg.raw.name.clone(),
        case: cfg.raw.case.clone(),
        num_particles: cfg.spec.num_particles(),
        num_modes: cfg.spec.num_modes(),
        p_success,
        density_matrix,
        witness_margin: margin,
        classification: classification.as_ref().map(Classification::from),
        tomography,
    };
    write_file(
        &out_dir,
        &format!("report.{}", opts.format.extension()),
        &render(&report, opts.format),
    )?;
    Ok(report)
}

pub struct ScanOptions {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Evenly spaced points including both ends; a single step is just `from`.
pub fn scan_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError {
            code: "invalid-input".into(),
            origin: None,
            field: Some("--steps".into()),
            message: "steps must be at least 1".into(),
            exit_code: EXIT_VALIDATION,
        });
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(CliError::usage("scan range must be finite"));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
        .collect())
}

/// `scan`: sweep one parameter and tabulate success probability, fidelities and witnesses.
pub fn scan(config_path: &Path, opts: &ScanOptions) -> Result<Vec<ScanRow>, CliError> {
    let parameter: ScanParameter = opts.parameter.parse()?;
    let values = scan_values(opts.from, opts.to, opts.steps)?;
    let (cfg, origin) = load_validated(config_path, None)?;
    let n = cfg.spec.num_particles();

    match &parameter {
        ScanParameter::Delay(i) => {
            if cfg.raw.distinguishability.delays.is_none() {
                return Err(CliError::config(
                    &origin,
                    "distinguishability.delays",
                    "unknown-parameter",
                    "delay scans need a delays-based distinguishability config",
                ));
            }
            if *i >= n {
                return Err(CliError::usage(format!(
                    "delay L{} out of range for {n} particles",
                    i + 1
                )));
            }
        }
        ScanParameter::Amplitude(_) if !matches!(cfg.raw.transform, TransformConfig::Ghz { .. }) => {
            return Err(CliError::usage("amplitude scans need the ghz preset"));
        }
        _ => {}
    }

    let margin = cfg.raw.witness_margin;
    let rows = values
        .par_iter()
        .map(|&value| {
            let (spec, gram) = match &parameter {
                ScanParameter::Overlap => (cfg.spec.clone(), GramMatrix::uniform(n, value)?),
                ScanParameter::Delay(i) => {
                    let d = &cfg.raw.distinguishability;
                    let mut delays = d.delays.clone().expect("checked above");
                    delays[*i] = value;
                    let model = DelayModel::new(d.coherence_length.expect("validated"), delays)?;
                    (cfg.spec.clone(), GramMatrix::from_delays(&model))
                }
                ScanParameter::Amplitude(name) => {
                    let TransformConfig::Ghz {
                        alpha1,
                        alpha2,
                        beta2,
                        beta3,
                        gamma1,
                        gamma3,
                    } = &cfg.raw.transform
                    else {
                        unreachable!("checked above")
                    };
                    let mut p = config::ghz_params(*alpha1, *alpha2, *beta2, *beta3, *gamma1, *gamma3);
                    p.set_with_partner(name, value)?;
                    let gram = build_gram(&cfg.raw.distinguishability, n).map_err(|(_, e)| e)?;
                    (transform::ghz_preset(&p)?, gram)
                }
            };
            let (rho, p_success) = reduce::simulate(&spec, &gram)?;
            let c = classification_for(&rho, margin)?.as_ref().map(Classification::from);
            Ok(ScanRow {
                value,
                p_success,
                fidelity_ghz: c.as_ref().map(|c| c.fidelity_ghz),
                fidelity_w_max: c.as_ref().map(|c| c.fidelity_w_max),
                phi1_pi: c.as_ref().map(|c| c.phi1_pi),
                phi2_pi: c.as_ref().map(|c| c.phi2_pi),
                ghz_witness_passed: c.as_ref().map(|c| c.ghz_witness_passed),
                w_witness_passed: c.as_ref().map(|c| c.w_witness_passed),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    if let Some(dir) = &opts.out_dir {
        ensure_dir(dir)?;
        write_file(
            dir,
            &format!("scan.{}", opts.format.extension()),
            &render_scan(&rows, opts.format),
        )?;
    }
    Ok(rows)
}

pub struct ReconstructOptions {
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub mle: MleOptions,
}

pub fn load_counts(path: &Path) -> Result<CountsTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    tomography::parse_counts(&text).map_err(|e| {
        let mut err = CliError::from(e);
        err.origin = Some(path.display().to_string());
        err
    })
}

/// `reconstruct`: MLE from a counts file, persisted with GHZ and phase-optimized W fidelities.
pub fn reconstruct(counts_path: &Path, opts: &ReconstructOptions) -> Result<ReconstructReport, CliError> {
    let text = std::fs::read_to_string(counts_path).map_err(|e| CliError::io(counts_path, e))?;
    let counts = load_counts(counts_path)?;
    let mle = tomography::reconstruct_mle(&counts, &opts.mle).map_err(|e| {
        let mut err = CliError::from(e);
        err.origin = Some(counts_path.display().to_string());
        err
    })?;
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&out_dir)?;
    let density_matrix = write_file(&out_dir, "rho_mle.txt", &matrix_io::write_matrix(mle.rho.matrix()))?;
    let fidelity_ghz = entanglement::fidelity_pure(&mle.rho, &TargetState::ghz(counts.num_qubits))?;
    let classification = classification_for(&mle.rho, 0.0)?;
    let report = ReconstructReport {
        tool: "overlap-entangle".into(),
        version: crate::VERSION.into(),
        counts_sha256: sha256_hex(text.as_bytes()),
        num_qubits: counts.num_qubits,
        shots_per_setting: counts.shots_per_setting,
        settings: counts.entries.len(),
        density_matrix,
        mle_iterations: mle.iterations,
        mle_converged: mle.converged,
        log_likelihood: mle.log_likelihood,
        fidelity_ghz,
        fidelity_w_max: classification.as_ref().map(|c| c.fidelity_w_max),
        phi1_pi: classification.as_ref().map(|c| c.phi1 / std::f64::consts::PI),
        phi2_pi: classification.as_ref().map(|c| c.phi2 / std::f64::consts::PI),
        verdict: classification.as_ref().map(|c| c.verdict.as_str().to_string()),
    };
    write_file(
        &out_dir,
        &format!("reconstruct.{}", opts.format.extension()),
        &render(&report, opts.format),
    )?;
    Ok(report)
}
