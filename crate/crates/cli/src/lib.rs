//! Batch front end: load an ensemble, then validate it, certify a given
//! measurement, or optimize one.

pub mod format;

use std::path::{Path, PathBuf};

use mindisc::iteration::{run, IterationConfig, IterationTrace};
use mindisc::model::{success_probability, Ensemble, Povm, Tolerances, ValidationReport};
use mindisc::optimality::{certify, GapCertificate, ResidualReport, DEFAULT_P_GRID};
use mindisc::random::random_ensemble;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::format::{
    ensure_valid, write_json, write_trace_csv, CertificateFile, EnsembleFile, PovmFile,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: at `{field}`: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    #[error("{0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(mindisc::Error),

    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 for output I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse { .. } | Self::Validation(_) | Self::Read { .. } => 2,
            Self::Numerical(_) => 3,
            Self::Write { .. } => 1,
        }
    }
}

impl From<mindisc::Error> for CliError {
    fn from(e: mindisc::Error) -> Self {
        match e {
            mindisc::Error::NoConvergence { .. } => Self::Numerical(e),
            other => Self::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Init {
    Uniform,
    /// Square-root measurement.
    Srm,
    /// Read from `--povm`.
    File,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSource {
    File(PathBuf),
    /// Shifted-basis ensemble on `C^m`.
    Shifted(usize),
    /// Random full-rank ensemble of `m` states on `C^d`.
    Random { d: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PovmSource {
    File(PathBuf),
    /// `M_k = |k+1><k+1|` (only for shifted-basis ensembles).
    Shifted,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ensemble: EnsembleSource,
    pub povm: Option<PovmSource>,
    pub tol: f64,
    pub max_iters: Option<usize>,
    pub line_search: bool,
    pub init: Init,
    pub p_grid: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ensemble: EnsembleSource::Shifted(2),
            povm: None,
            tol: 1e-8,
            max_iters: None,
            line_search: true,
            init: Init::Uniform,
            p_grid: DEFAULT_P_GRID.to_vec(),
            output_dir: PathBuf::from("."),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Validation(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CliError::Validation(format!(
                "--p-grid values must lie in [0, 1], got {:?}",
                self.p_grid
            )));
        }
        Ok(())
    }

    fn iteration_config(&self) -> IterationConfig {
        IterationConfig {
            tol: self.tol,
            max_iters: self.max_iters,
            line_search: self.line_search,
            p_grid: self.p_grid.clone(),
        }
    }
}

/// Loads the ensemble without enforcing its invariants.
fn load_ensemble_unchecked(cfg: &RunConfig) -> Result<Ensemble, CliError> {
    match &cfg.ensemble {
        EnsembleSource::File(path) => EnsembleFile::read(path)?.to_ensemble_unchecked(),
        EnsembleSource::Shifted(m) if *m >= 2 => Ok(Ensemble::shifted_basis(*m)),
        EnsembleSource::Shifted(m) => Err(CliError::Validation(format!(
            "--example-shifted needs m >= 2, got {m}"
        ))),
        EnsembleSource::Random { d, m } if *d >= 1 && *m >= 2 => {
            Ok(random_ensemble(*d, *m, &mut ChaCha8Rng::seed_from_u64(cfg.seed)))
        }
        EnsembleSource::Random { d, m } => Err(CliError::Validation(format!(
            "--example-random needs d >= 1 and m >= 2, got {d}x{m}"
        ))),
    }
}

pub fn load_ensemble(cfg: &RunConfig) -> Result<Ensemble, CliError> {
    let e = load_ensemble_unchecked(cfg)?;
    ensure_valid(e.validate(&Tolerances::default()), "ensemble")?;
    Ok(e)
}

fn load_povm_unchecked(cfg: &RunConfig) -> Result<Option<Povm>, CliError> {
    match &cfg.povm {
        None => Ok(None),
        Some(PovmSource::File(path)) => Ok(Some(PovmFile::read(path)?.to_povm_unchecked()?)),
        Some(PovmSource::Shifted) => match cfg.ensemble {
            EnsembleSource::Shifted(m) => Ok(Some(Povm::shifted_basis(m))),
            _ => Err(CliError::Validation(
                "--povm-shifted requires --example-shifted".into(),
            )),
        },
    }
}

fn load_povm(cfg: &RunConfig, e: &Ensemble) -> Result<Povm, CliError> {
    let m = load_povm_unchecked(cfg)?
        .ok_or_else(|| CliError::Validation("a measurement is required (--povm or --povm-shifted)".into()))?;
    ensure_valid(m.validate_for(e, &Tolerances::default()), "measurement")?;
    Ok(m)
}

#[derive(Debug)]
pub struct ValidateOutcome {
    pub ensemble: ValidationReport,
    pub povm: Option<ValidationReport>,
}

impl ValidateOutcome {
    pub fn passed(&self) -> bool {
        self.ensemble.passed() && self.povm.as_ref().is_none_or(|r| r.passed())
    }
}

/// Runs every invariant check and reports all of them, failing or not.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidateOutcome, CliError> {
    let e = load_ensemble_unchecked(cfg)?;
    let tol = Tolerances::default();
    let ensemble = e.validate(&tol);
    let povm = load_povm_unchecked(cfg)?.map(|m| m.validate_for(&e, &tol));
    Ok(ValidateOutcome { ensemble, povm })
}

pub fn certificate_file(
    p_succ: f64,
    residuals: &ResidualReport,
    cert: &GapCertificate,
    termination_reason: Option<&str>,
) -> CertificateFile {
    CertificateFile {
        p_succ,
        gap_lower: cert.lower,
        gap_upper: cert.upper,
        alpha_scalar: residuals.alpha_scalar,
        p_used: cert.p_used,
        dim_used: cert.dim_used,
        termination_reason: termination_reason.map(str::to_owned),
    }
}

fn prepare_output_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })
}

/// Certifies the measurement given by `cfg.povm` and writes
/// `certificate.json`.
pub fn cmd_certify(cfg: &RunConfig) -> Result<CertificateFile, CliError> {
    cfg.check()?;
    let e = load_ensemble(cfg)?;
    let m = load_povm(cfg, &e)?;
    let (r, cert) = certify(&e, &m, &cfg.p_grid)?;
    let file = certificate_file(success_probability(&e, &m)?, &r, &cert, None);
    prepare_output_dir(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("certificate.json"), &file)?;
    Ok(file)
}

#[derive(Debug)]
pub struct OptimizeOutcome {
    pub trace: IterationTrace,
    pub certificate: CertificateFile,
}

/// Runs the iteration and writes `trace.csv`, `final_povm.json` and
/// `certificate.json`.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<OptimizeOutcome, CliError> {
    cfg.check()?;
    let e = load_ensemble(cfg)?;
    let m0 = match cfg.init {
        Init::Uniform => Povm::uniform(e.dim(), e.len())?,
        Init::Srm => Povm::square_root_measurement(&e)?,
        Init::File => load_povm(cfg, &e)?,
    };
    let trace = run(&e, &m0, &cfg.iteration_config())?;
    let r = mindisc::optimality::residuals(&e, &trace.final_povm)?;
    let certificate = certificate_file(
        trace.final_p_succ,
        &r,
        &trace.certificate,
        Some(trace.termination_reason.as_str()),
    );

    prepare_output_dir(&cfg.output_dir)?;
    write_trace_csv(&cfg.output_dir.join("trace.csv"), &trace)?;
    write_json(
        &cfg.output_dir.join("final_povm.json"),
        &PovmFile::from_povm(&trace.final_povm, e.labels()),
    )?;
    write_json(&cfg.output_dir.join("certificate.json"), &certificate)?;
    Ok(OptimizeOutcome { trace, certificate })
}
