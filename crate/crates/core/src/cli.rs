//! Batch front end behind the `shorted` binary.
//!
//! One job per process: read the input documents, run one command, write one
//! report (to `--output` or stdout). `converge` also writes the plot table
//! next to the report, as `<output stem>.plot.csv`.
//!
//! Exit status: 0 success, 1 validation or usage error, 2 numerical failure
//! (including a failed self-test), 3 I/O error.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::error::{Error, Result};
use crate::gaussian::{condition, condition_truncated, mc_verify};
use crate::io::{
    read_document, to_json, write_plot_table, ConditionReport, Document, MeasureDoc, ModelSpecDoc,
    OperatorDoc, ProjectionReport, Report, ShortReport, VectorDoc,
};
use crate::oblique::{
    build_special_projection_with, congruence_defect, projection_identity_defect,
    short_via_projection, verify_inverse_identity,
};
use crate::operator::{Vector, DEFAULT_RANK_TOL, DEFAULT_TOL_PSD, DEFAULT_TOL_SYM};
use crate::selftest::{render_table, run_selftest, KnownCase, SelftestFixtures};
use crate::shorting::{
    default_eps_schedule, short, short_pseudo_with, short_regularized, short_schur,
};
use crate::truncation::{
    convergence_study_with_reference, decreasing_approximation_study, PlotRow, TruncationSchedule,
};

/// Default truncation sizes for `converge` and truncated `condition`.
pub const DEFAULT_SCHEDULE: [usize; 7] = [4, 8, 16, 32, 64, 128, 256];
pub const DEFAULT_MC_COUNT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Short,
    Project,
    Condition,
    Converge,
    Mcverify,
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Schur,
    Pseudo,
    Regularized,
    Oblique,
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "shorted",
    version,
    about = "Shorted operators and Gaussian conditioning"
)]
pub struct JobConfig {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Input document; repeat for commands taking several.
    #[arg(long = "input")]
    pub input: Vec<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Truncation sizes, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<usize>>,
    /// Epsilon values, comma separated and strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL_SYM)]
    pub tol_sym: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_PSD)]
    pub tol_psd: f64,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
}

/// What a job produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub plot: Option<Vec<PlotRow>>,
    /// Text for the terminal (the self-test table).
    pub summary: Option<String>,
}

impl Outcome {
    fn report(report: Report) -> Self {
        Self {
            report,
            plot: None,
            summary: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match &self.report {
            Report::Selftest(r) if !r.passed => 2,
            _ => 0,
        }
    }
}

/// Plot table path for a report path: `dir/name.json` → `dir/name.plot.csv`.
pub fn plot_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.plot.csv"))
}

fn documents(config: &JobConfig) -> Result<Vec<Document>> {
    config.input.iter().map(|p| read_document(p)).collect()
}

fn one<'a, T>(
    docs: &'a [Document],
    kind: &str,
    pick: impl Fn(&'a Document) -> Option<&'a T>,
) -> Result<&'a T> {
    let found: Vec<&T> = docs.iter().filter_map(pick).collect();
    match found.as_slice() {
        [x] => Ok(x),
        [] => Err(Error::InvalidArgument(format!("expected one {kind} input"))),
        _ => Err(Error::InvalidArgument(format!(
            "expected exactly one {kind} input"
        ))),
    }
}

fn operator_doc(docs: &[Document]) -> Result<&OperatorDoc> {
    one(docs, "operator", |d| match d {
        Document::Operator(x) => Some(x),
        _ => None,
    })
}

fn measure_doc(docs: &[Document]) -> Result<&MeasureDoc> {
    one(docs, "measure", |d| match d {
        Document::Measure(x) => Some(x),
        _ => None,
    })
}

fn model_doc(docs: &[Document]) -> Result<&ModelSpecDoc> {
    one(docs, "model-spec", |d| match d {
        Document::ModelSpec(x) => Some(x),
        _ => None,
    })
}

fn vector_doc(docs: &[Document]) -> Result<&VectorDoc> {
    one(docs, "vector", |d| match d {
        Document::Vector(x) => Some(x),
        _ => None,
    })
}

fn schedule(config: &JobConfig, n1: usize) -> Result<TruncationSchedule> {
    let sizes = config
        .schedule
        .clone()
        .unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
    TruncationSchedule::with_default_probes(sizes, n1, config.seed.unwrap_or(0))
}

pub fn run(config: &JobConfig) -> Result<Outcome> {
    let docs = documents(config)?;
    match config.command {
        Command::Short => run_short(config, &docs),
        Command::Project => run_project(config, &docs),
        Command::Condition => run_condition(config, &docs),
        Command::Converge => run_converge(config, &docs),
        Command::Mcverify => {
            let mu = measure_doc(&docs)?.to_measure(config.tol_sym, config.tol_psd)?;
            let count = config.count.unwrap_or(DEFAULT_MC_COUNT);
            let r = mc_verify(&mu, count, config.seed.unwrap_or(0))?;
            Ok(Outcome::report(Report::McVerify(r)))
        }
        Command::Selftest => run_selftest_job(config, &docs),
    }
}

fn run_short(config: &JobConfig, docs: &[Document]) -> Result<Outcome> {
    let (a, split) = operator_doc(docs)?.to_parts(config.tol_sym, config.tol_psd)?;
    let result = match config.method.unwrap_or(MethodArg::Auto) {
        MethodArg::Auto => short(&a, &split)?,
        MethodArg::Schur => short_schur(&a, &split)?,
        MethodArg::Pseudo => short_pseudo_with(&a, &split, config.rank_tol)?,
        MethodArg::Regularized => {
            let eps = config.eps.clone().unwrap_or_else(default_eps_schedule);
            short_regularized(&a, &split, &eps)?
        }
        MethodArg::Oblique => {
            let q = build_special_projection_with(&a, &split, config.rank_tol)?;
            short_via_projection(&a, &q)?
        }
    };
    Ok(Outcome::report(Report::Short(ShortReport {
        method: result.method,
        dim: a.dim(),
        n1: split.n1(),
        shorted_block: result.block.clone(),
        shorted: result.shorted.entries().clone(),
        diagnostics: result.diagnostics,
    })))
}

fn run_project(config: &JobConfig, docs: &[Document]) -> Result<Outcome> {
    let (a, split) = operator_doc(docs)?.to_parts(config.tol_sym, config.tol_psd)?;
    let q = build_special_projection_with(&a, &split, config.rank_tol)?;
    let shorted = short_via_projection(&a, &q)?;
    Ok(Outcome::report(Report::Projection(ProjectionReport {
        dim: a.dim(),
        n1: split.n1(),
        projection: q.to_original(),
        projection_identity_defect: projection_identity_defect(&a, &q)?,
        inverse_identity_defect: verify_inverse_identity(&q),
        congruence_defect: congruence_defect(&a, &q, &shorted)?,
        shorted_block: shorted.block,
        certificates: q.certificates.clone(),
        q_hat: q.q_hat,
    })))
}

fn run_condition(config: &JobConfig, docs: &[Document]) -> Result<Outcome> {
    let t = &vector_doc(docs)?.values;
    if docs.iter().any(|d| matches!(d, Document::ModelSpec(_))) {
        let spec = model_doc(docs)?;
        let model = spec.model.build()?;
        let schedule = schedule(config, model.n1())?;
        let mean = spec.mean.clone().unwrap_or_default();
        let out = condition_truncated(&model, &mean, t, &schedule, spec.reference_n)?;
        return Ok(Outcome::report(Report::TruncatedCondition(out)));
    }
    let mu = measure_doc(docs)?.to_measure(config.tol_sym, config.tol_psd)?;
    let tv = Vector::from_vec(t.clone());
    let (mean, law) = condition(&mu, &tv)?;
    Ok(Outcome::report(Report::Condition(ConditionReport {
        t: t.clone(),
        mean: mean.as_slice().to_vec(),
        mean_h1: law.mean_h1(&tv)?.as_slice().to_vec(),
        cond_cov: law.cond_cov.block.clone(),
        q_hat_adj: law.q_hat_adj.clone(),
        method: law.cond_cov.method,
    })))
}

fn run_converge(config: &JobConfig, docs: &[Document]) -> Result<Outcome> {
    if docs.iter().any(|d| matches!(d, Document::Operator(_))) {
        let (a, split) = operator_doc(docs)?.to_parts(config.tol_sym, config.tol_psd)?;
        let eps = config.eps.clone().unwrap_or_else(default_eps_schedule);
        let r = decreasing_approximation_study(&a, &split, &eps)?;
        return Ok(Outcome::report(Report::DecreasingApproximation(r)));
    }
    let spec = model_doc(docs)?;
    let model = spec.model.build()?;
    let schedule = schedule(config, model.n1())?;
    let report = convergence_study_with_reference(&model, &schedule, spec.reference_n)?;
    Ok(Outcome {
        plot: Some(report.plot_rows()),
        report: Report::Convergence(report),
        summary: None,
    })
}

fn run_selftest_job(config: &JobConfig, docs: &[Document]) -> Result<Outcome> {
    let mut fixtures = SelftestFixtures::default();
    if let Some(seed) = config.seed {
        fixtures.seed = seed;
    }
    if !docs.is_empty() {
        fixtures.known = docs
            .iter()
            .enumerate()
            .map(|(i, d)| match d {
                Document::Operator(doc) => {
                    let expected = doc.expected_short.clone().ok_or_else(|| {
                        Error::InvalidArgument(format!("self-test input {i} has no expected_short"))
                    })?;
                    let (operator, split) = doc.to_parts(config.tol_sym, config.tol_psd)?;
                    let name = doc.note.clone().unwrap_or_else(|| format!("input-{i}"));
                    Ok(KnownCase {
                        name,
                        operator,
                        split,
                        expected,
                    })
                }
                other => Err(Error::InvalidArgument(format!(
                    "self-test inputs must be operators, got {}",
                    other.kind()
                ))),
            })
            .collect::<Result<_>>()?;
    }
    let report = run_selftest(&fixtures);
    Ok(Outcome {
        summary: Some(render_table(&report)),
        report: Report::Selftest(report),
        plot: None,
    })
}

/// Writes the report (and plot table) for an outcome.
pub fn emit(config: &JobConfig, outcome: &Outcome) -> Result<()> {
    let text = to_json(&outcome.report)?;
    match &config.output {
        Some(path) => {
            std::fs::write(path, text)?;
            if let Some(rows) = &outcome.plot {
                write_plot_table(&plot_path(path), rows)?;
            }
        }
        None if outcome.summary.is_none() => print!("{text}"),
        None => {}
    }
    if let Some(summary) = &outcome.summary {
        print!("{summary}");
    }
    Ok(())
}

/// Parses arguments, runs the job and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match JobConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&config).and_then(|o| emit(&config, &o).map(|_| o)) {
        Ok(outcome) => {
            let code = outcome.exit_code();
            if let Report::Selftest(r) = &outcome.report {
                for s in r.suites.iter().filter(|s| !s.passed) {
                    eprintln!("error: self-test suite {} failed", s.suite);
                }
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
