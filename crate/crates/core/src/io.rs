//! JSON documents for operators, measures, model specifications, vectors and
//! reports, plus the flat CSV plot table.
//!
//! Every document is an object whose first field is `kind`. Matrices are
//! lists of rows. Floats are written in the shortest form that parses back to
//! the same `f64`, so a write followed by a read is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianMeasure, McReport, TruncatedConditioning};
use crate::oblique::Certificates;
use crate::operator::{validate_psd, Matrix, SubspaceSplit, SymPosOperator, Vector};
use crate::serde_matrix;
use crate::shorting::{ShortDiagnostics, ShortMethod};
use crate::truncation::{
    ConvergenceReport, DecreasingApproximationReport, ModelSpec, MonotonicityWitness, PlotRow,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Document {
    Operator(OperatorDoc),
    Measure(MeasureDoc),
    ModelSpec(ModelSpecDoc),
    Vector(VectorDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Operator(_) => "operator",
            Document::Measure(_) => "measure",
            Document::ModelSpec(_) => "model-spec",
            Document::Vector(_) => "vector",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub dim: usize,
    pub n1: usize,
    #[serde(
        default,
        with = "serde_matrix::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub basis: Option<Matrix>,
    #[serde(with = "serde_matrix")]
    pub entries: Matrix,
    /// Known short block, used by the self-test.
    #[serde(
        default,
        with = "serde_matrix::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub expected_short: Option<Matrix>,
}

fn build_split(dim: usize, n1: usize, basis: &Option<Matrix>) -> Result<SubspaceSplit> {
    match basis {
        Some(b) => {
            if b.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.nrows(),
                });
            }
            SubspaceSplit::with_basis(n1, b.clone())
        }
        None => SubspaceSplit::new(dim, n1),
    }
}

fn check_entries(dim: usize, m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    Ok(())
}

impl OperatorDoc {
    pub fn new(op: &SymPosOperator, split: &SubspaceSplit) -> Self {
        Self {
            note: None,
            dim: op.dim(),
            n1: split.n1(),
            basis: split.basis().cloned(),
            entries: op.entries().clone(),
            expected_short: None,
        }
    }

    pub fn to_parts(&self, tol_sym: f64, tol_psd: f64) -> Result<(SymPosOperator, SubspaceSplit)> {
        check_entries(self.dim, &self.entries)?;
        let op = validate_psd(&self.entries, tol_sym, tol_psd)?;
        let split = build_split(self.dim, self.n1, &self.basis)?;
        Ok((op, split))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub dim: usize,
    pub n1: usize,
    #[serde(
        default,
        with = "serde_matrix::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub basis: Option<Matrix>,
    /// Covariance.
    #[serde(with = "serde_matrix")]
    pub entries: Matrix,
    pub mean: Vec<f64>,
}

impl MeasureDoc {
    pub fn new(mu: &GaussianMeasure) -> Self {
        Self {
            note: None,
            dim: mu.dim(),
            n1: mu.split().n1(),
            basis: mu.split().basis().cloned(),
            entries: mu.cov().entries().clone(),
            mean: mu.mean().as_slice().to_vec(),
        }
    }

    pub fn to_measure(&self, tol_sym: f64, tol_psd: f64) -> Result<GaussianMeasure> {
        check_entries(self.dim, &self.entries)?;
        let cov = validate_psd(&self.entries, tol_sym, tol_psd)?;
        let split = build_split(self.dim, self.n1, &self.basis)?;
        GaussianMeasure::new(Vector::from_vec(self.mean.clone()), cov, split)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpecDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub model: ModelSpec,
    /// Mean over H1 followed by leading H2 coordinates, zero-padded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    /// Truncation size of the reference short; defaults to the largest
    /// scheduled size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub values: Vec<f64>,
}

pub fn parse_document(text: &str) -> Result<Document> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_document(path: &Path) -> Result<Document> {
    let text = fs::read_to_string(path)?;
    parse_document(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn write_plot_table(path: &Path, rows: &[PlotRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_plot_table(path: &Path) -> Result<Vec<PlotRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!("checked io kind"),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortReport {
    pub method: ShortMethod,
    pub dim: usize,
    pub n1: usize,
    /// H1 block in split coordinates.
    #[serde(with = "serde_matrix")]
    pub shorted_block: Matrix,
    /// Full short in original coordinates.
    #[serde(with = "serde_matrix")]
    pub shorted: Matrix,
    pub diagnostics: ShortDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub dim: usize,
    pub n1: usize,
    #[serde(with = "serde_matrix")]
    pub q_hat: Matrix,
    /// `Q` in original coordinates.
    #[serde(with = "serde_matrix")]
    pub projection: Matrix,
    pub certificates: Certificates,
    pub projection_identity_defect: f64,
    pub inverse_identity_defect: f64,
    pub congruence_defect: f64,
    #[serde(with = "serde_matrix")]
    pub shorted_block: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub t: Vec<f64>,
    /// Conditional mean in original coordinates.
    pub mean: Vec<f64>,
    pub mean_h1: Vec<f64>,
    #[serde(with = "serde_matrix")]
    pub cond_cov: Matrix,
    #[serde(with = "serde_matrix")]
    pub q_hat_adj: Matrix,
    pub method: ShortMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub cases: usize,
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Report {
    Short(ShortReport),
    Projection(ProjectionReport),
    Condition(ConditionReport),
    TruncatedCondition(TruncatedConditioning),
    Convergence(ConvergenceReport),
    DecreasingApproximation(DecreasingApproximationReport),
    Monotonicity(MonotonicityWitness),
    McVerify(McReport),
    Selftest(SelftestReport),
}

pub fn parse_report(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
