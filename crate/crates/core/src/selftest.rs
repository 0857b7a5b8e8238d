//! Fixed-seed self-test run by `shorted --command selftest`.
//!
//! Each suite reduces to a worst normalized defect compared with a limit.
//! Output depends only on the fixtures, so repeated runs print the same
//! table.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::{SelftestReport, SuiteResult};
use crate::oblique::{
    build_special_projection, congruence_defect, projection_identity_defect, short_via_projection,
    verify_inverse_identity,
};
use crate::operator::{
    operator_norm, partition, psd, sup_norm, Matrix, SubspaceSplit, SymPosOperator,
    DEFAULT_RANK_TOL,
};
use crate::random::{gaussian_vector, mixed_short_instance, psd_of_rank, short_instance};
use crate::shorting::{
    a22_spectrum, default_eps_schedule, short, short_pseudo, short_regularized, short_schur,
    ShortedResult, SCHUR_CONDITION_LIMIT,
};

#[derive(Clone, Debug)]
pub struct KnownCase {
    pub name: String,
    pub operator: SymPosOperator,
    pub split: SubspaceSplit,
    pub expected: Matrix,
}

#[derive(Clone, Debug)]
pub struct SelftestFixtures {
    pub seed: u64,
    pub instances: usize,
    pub known: Vec<KnownCase>,
}

impl Default for SelftestFixtures {
    fn default() -> Self {
        let case =
            |name: &str, rows: usize, entries: &[f64], n1: usize, expected: &[f64]| KnownCase {
                name: name.into(),
                operator: psd(&Matrix::from_row_slice(rows, rows, entries))
                    .expect("bundled case is PSD"),
                split: SubspaceSplit::new(rows, n1).expect("bundled split"),
                expected: Matrix::from_row_slice(n1, n1, expected),
            };
        Self {
            seed: 0x5eed,
            instances: 40,
            known: vec![
                case("two-by-two", 2, &[2.0, 1.0, 1.0, 1.0], 1, &[1.0]),
                case(
                    "identity",
                    3,
                    &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                    1,
                    &[1.0],
                ),
                case(
                    "singular",
                    3,
                    &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
                    1,
                    &[0.0],
                ),
            ],
        }
    }
}

/// Largest pairwise operator-norm gap between the Schur (when `cond(A22)` is
/// below the gate), pseudoinverse, regularized and projection routes.
pub fn oracle_agreement(
    a: &SymPosOperator,
    split: &SubspaceSplit,
) -> Result<(f64, Vec<ShortedResult>)> {
    let mut results = Vec::with_capacity(4);
    let spec = a22_spectrum(a, &partition(a, split)?, DEFAULT_RANK_TOL);
    if spec.numerical_rank > 0 && spec.condition() < SCHUR_CONDITION_LIMIT {
        results.push(short_schur(a, split)?);
    }
    results.push(short_pseudo(a, split)?);
    results.push(short_regularized(a, split, &default_eps_schedule())?);
    let q = build_special_projection(a, split)?;
    results.push(short_via_projection(a, &q)?);
    let mut worst: f64 = 0.0;
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            worst = worst.max(operator_norm(&(&results[i].block - &results[j].block)));
        }
    }
    Ok((worst, results))
}

struct Suite {
    name: &'static str,
    limit: f64,
    cases: usize,
    worst: f64,
}

impl Suite {
    fn new(name: &'static str, limit: f64) -> Self {
        Self {
            name,
            limit,
            cases: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, value: f64) {
        self.cases += 1;
        self.worst = if value.is_nan() {
            f64::NAN
        } else {
            self.worst.max(value)
        };
    }

    fn fail(&mut self) {
        self.record(f64::INFINITY);
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            suite: self.name.into(),
            cases: self.cases,
            worst: self.worst,
            limit: self.limit,
            passed: self.cases > 0 && self.worst <= self.limit,
        }
    }
}

pub fn run_selftest(fixtures: &SelftestFixtures) -> SelftestReport {
    let mut known = Suite::new("known-answer", 1e-10);
    for case in &fixtures.known {
        match short(&case.operator, &case.split) {
            Ok(r) if r.block.shape() == case.expected.shape() => known
                .record(sup_norm(&(&r.block - &case.expected)) / (1.0 + case.operator.sup_norm())),
            _ => known.fail(),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(fixtures.seed);
    let mut oracles = Suite::new("shorting-oracles", 1e-6);
    let mut e1 = Suite::new("projection-identity", 1e-8);
    let mut inverse = Suite::new("inverse-identity", 1e-10);
    let mut congruence = Suite::new("congruence", 1e-8);
    for _ in 0..fixtures.instances {
        let inst = mixed_short_instance(&mut rng, 2, 10);
        let (a, split) = (&inst.operator, &inst.split);
        let scale = a.sup_norm().max(f64::MIN_POSITIVE);
        match oracle_agreement(a, split) {
            Ok((gap, _)) => oracles.record(gap / scale),
            Err(_) => oracles.fail(),
        }
        match build_special_projection(a, split) {
            Ok(q) => {
                match projection_identity_defect(a, &q) {
                    Ok(d) => e1.record(d / scale),
                    Err(_) => e1.fail(),
                }
                let qn = sup_norm(&q.q_full);
                inverse.record(verify_inverse_identity(&q) / (1.0 + qn * qn));
                match short(a, split).and_then(|s| congruence_defect(a, &q, &s)) {
                    Ok(d) => congruence.record(d / scale),
                    Err(_) => congruence.fail(),
                }
            }
            Err(_) => {
                e1.fail();
                inverse.fail();
                congruence.fail();
            }
        }
    }

    let mut reid = Suite::new("reid", 1e-10);
    for k in 0..fixtures.instances {
        let n = 2 + k % 8;
        let a22 = psd_of_rank(&mut rng, n, 1 + k % n);
        let y = gaussian_vector(&mut rng, n);
        let ay = &a22 * &y;
        let lhs = ay.norm_squared();
        let rhs = operator_norm(&a22) * y.dot(&ay);
        reid.record(((lhs - rhs) / (1.0 + rhs.abs())).max(0.0));
    }

    let mut nesting = Suite::new("nesting", 1e-8);
    for _ in 0..fixtures.instances {
        let dim = 6;
        let inst = short_instance(&mut rng, dim, 4, 2, 3, 1.0);
        let a = &inst.operator;
        let outer = SubspaceSplit::new(dim, 4).expect("valid split");
        let inner = SubspaceSplit::new(dim, 2).expect("valid split");
        let defect = short(a, &outer).and_then(|t| {
            let iterated = short(&t.shorted, &inner)?;
            let direct = short(a, &inner)?;
            Ok(sup_norm(
                &(iterated.shorted.entries() - direct.shorted.entries()),
            ))
        });
        match defect {
            Ok(d) => nesting.record(d / a.sup_norm().max(f64::MIN_POSITIVE)),
            Err(_) => nesting.fail(),
        }
    }

    let suites: Vec<SuiteResult> = [known, oracles, e1, inverse, congruence, reid, nesting]
        .into_iter()
        .map(Suite::finish)
        .collect();
    let passed = suites.iter().all(|s| s.passed);
    SelftestReport { suites, passed }
}

/// Fixed-width pass/fail table.
pub fn render_table(report: &SelftestReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} {:>6} {:>12} {:>10}  result",
        "suite", "cases", "worst", "limit"
    );
    for s in &report.suites {
        let _ = writeln!(
            out,
            "{:<22} {:>6} {:>12.3e} {:>10.1e}  {}",
            s.suite,
            s.cases,
            s.worst,
            s.limit,
            if s.passed { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        out,
        "overall: {}",
        if report.passed { "PASS" } else { "FAIL" }
    );
    out
}
