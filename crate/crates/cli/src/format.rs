//! On-disk formats.
//!
//! Matrices are row-major arrays of `[re, im]` pairs. Every float is written
//! with 17 significant digits so files reload bit-exactly.
//!
//! ```json
//! {"dim": 2, "states": [{"label": "zero", "prior": 0.5, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}]}
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use mindisc::iteration::IterationTrace;
use mindisc::linalg::{ComplexMatrix, HermitianMatrix, C64};
use mindisc::model::{Ensemble, Povm, Tolerances, ValidationReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

/// Tolerance on `max |A - A^H|` for matrices read from disk.
const FILE_HERMITIAN_TOL: f64 = 1e-9;

pub type MatrixEntries = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub dim: usize,
    pub states: Vec<StateEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    #[serde(default)]
    pub label: Option<String>,
    pub prior: f64,
    /// Unit-trace density matrix.
    pub matrix: MatrixEntries,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub dim: usize,
    pub elements: Vec<ElementEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementEntry {
    #[serde(default)]
    pub label: Option<String>,
    pub matrix: MatrixEntries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub p_succ: f64,
    pub gap_lower: f64,
    pub gap_upper: f64,
    pub alpha_scalar: f64,
    pub p_used: f64,
    pub dim_used: usize,
    /// `null` when no optimization ran.
    pub termination_reason: Option<String>,
}

pub fn encode_matrix(m: &ComplexMatrix) -> MatrixEntries {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn decode_matrix(entries: &MatrixEntries, dim: usize, field: &str) -> Result<HermitianMatrix, CliError> {
    if entries.len() != dim || entries.iter().any(|r| r.len() != dim) {
        return Err(CliError::Validation(format!(
            "{field}: expected a {dim}x{dim} matrix"
        )));
    }
    let rows: Vec<Vec<C64>> = entries
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    let m = ComplexMatrix::from_rows(&rows).map_err(|e| CliError::Validation(format!("{field}: {e}")))?;
    HermitianMatrix::new(m, FILE_HERMITIAN_TOL).map_err(|e| CliError::Validation(format!("{field}: {e}")))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_reader(BufReader::new(file));
    serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let field = err.path().to_string();
        let inner = err.into_inner();
        CliError::Parse {
            path: path.display().to_string(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })
}

impl EnsembleFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        let labels = default_labels(e.labels(), e.len(), "rho");
        Self {
            dim: e.dim(),
            states: e
                .states()
                .iter()
                .zip(labels)
                .map(|(rho, label)| {
                    let prior = rho.trace();
                    let unit = if prior > 0.0 { rho.scale(1.0 / prior) } else { rho.clone() };
                    StateEntry {
                        label: Some(label),
                        prior,
                        matrix: encode_matrix(&unit),
                    }
                })
                .collect(),
        }
    }

    /// Builds the prior-weighted ensemble without checking the ensemble
    /// invariants (see [`Ensemble::validate`]). Structural problems (shape,
    /// Hermiticity, unit trace of each matrix) are errors.
    pub fn to_ensemble_unchecked(&self) -> Result<Ensemble, CliError> {
        let tol = Tolerances::default();
        let mut states = Vec::with_capacity(self.states.len());
        for (k, s) in self.states.iter().enumerate() {
            let field = format!("states[{k}].matrix");
            let rho = decode_matrix(&s.matrix, self.dim, &field)?;
            let tr = rho.trace();
            if (tr - 1.0).abs() > tol.trace_tol {
                return Err(CliError::Validation(format!(
                    "{field}: density matrix has trace {tr}, expected 1"
                )));
            }
            if !(s.prior.is_finite() && s.prior >= 0.0) {
                return Err(CliError::Validation(format!(
                    "states[{k}].prior: {} is not a probability",
                    s.prior
                )));
            }
            states.push(rho.scale(s.prior));
        }
        if states.is_empty() {
            return Err(CliError::Validation("states: ensemble is empty".into()));
        }
        let e = Ensemble::new_unchecked(states).map_err(|e| CliError::Validation(e.to_string()))?;
        let labels: Vec<String> = self
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| s.label.clone().unwrap_or_else(|| format!("rho{k}")))
            .collect();
        e.with_labels(labels).map_err(|e| CliError::Validation(e.to_string()))
    }
}

/// Reads an ensemble file and checks every ensemble invariant.
pub fn parse_ensemble_file(path: &Path) -> Result<Ensemble, CliError> {
    let e = EnsembleFile::read(path)?.to_ensemble_unchecked()?;
    ensure_valid(e.validate(&Tolerances::default()), "ensemble")?;
    Ok(e)
}

pub fn ensure_valid(report: ValidationReport, what: &str) -> Result<(), CliError> {
    if report.passed() {
        return Ok(());
    }
    let detail = report
        .failures()
        .map(|c| format!("{} (residual {:e} > {:e})", c.detail, c.residual, c.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    Err(CliError::Validation(format!("invalid {what}: {detail}")))
}

impl PovmFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn from_povm(m: &Povm, labels: Option<&[String]>) -> Self {
        Self {
            dim: m.dim(),
            elements: m
                .elements()
                .iter()
                .zip(default_labels(labels, m.len(), "M"))
                .map(|(el, label)| ElementEntry {
                    label: Some(label),
                    matrix: encode_matrix(el),
                })
                .collect(),
        }
    }

    pub fn to_povm_unchecked(&self) -> Result<Povm, CliError> {
        let elements = self
            .elements
            .iter()
            .enumerate()
            .map(|(k, el)| decode_matrix(&el.matrix, self.dim, &format!("elements[{k}].matrix")))
            .collect::<Result<Vec<_>, _>>()?;
        if elements.is_empty() {
            return Err(CliError::Validation("elements: measurement is empty".into()));
        }
        Povm::new_unchecked(elements).map_err(|e| CliError::Validation(e.to_string()))
    }
}

fn default_labels(labels: Option<&[String]>, n: usize, prefix: &str) -> Vec<String> {
    match labels {
        Some(l) if l.len() == n => l.to_vec(),
        _ => (0..n).map(|k| format!("{prefix}{k}")).collect(),
    }
}

/// Pretty JSON with every float written as `{:.16e}`.
struct FixedDigits(PrettyFormatter<'static>);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json_string(value)).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_certificate(path: &Path) -> Result<CertificateFile, CliError> {
    read_json(path)
}

/// `step,p_succ,t_max,ell,alpha,wall_ms`: one row per step. `p_succ` is the
/// value after the step, `t_max` the violation that drove it.
pub fn write_trace_csv(path: &Path, trace: &IterationTrace) -> Result<(), CliError> {
    let write_err = |e: csv::Error| CliError::Write {
        path: path.display().to_string(),
        source: io::Error::other(e),
    };
    let file = File::create(path).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["step", "p_succ", "t_max", "ell", "alpha", "wall_ms"])
        .map_err(write_err)?;
    for s in &trace.steps {
        w.write_record([
            s.step_index.to_string(),
            format!("{:.16e}", s.p_succ_after),
            format!("{:.16e}", s.t_max),
            s.ell.to_string(),
            format!("{:.16e}", s.alpha_used),
            format!("{:.6}", s.wall_time.as_secs_f64() * 1e3),
        ])
        .map_err(write_err)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}
