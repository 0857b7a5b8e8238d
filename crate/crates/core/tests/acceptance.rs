//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::Cholesky;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shorted_ops::gaussian::{condition, mc_verify, GaussianMeasure};
use shorted_ops::oblique::{
    build_special_projection, congruence_defect, projection_identity_defect,
    verify_inverse_identity,
};
use shorted_ops::operator::{
    loewner_leq, min_eigenvalue, operator_norm, psd, sup_norm, vec_sup_norm, Matrix, SubspaceSplit,
    Vector,
};
use shorted_ops::random::{
    gaussian_vector, mixed_short_instance, orthogonal, psd_of_rank, short_instance, unit_vector,
};
use shorted_ops::selftest::oracle_agreement;
use shorted_ops::shorting::{short, variational_value};
use shorted_ops::truncation::{
    convergence_study_with_reference, decreasing_approximation_study, make_coupled_family,
    non_monotone_witness, truncation_monotonicity, TruncationSchedule, Verdict,
};

struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn seeded(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce_0000 + tag)
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(f64::MIN_POSITIVE)
}

fn oracle_agreement_criterion(out: &mut Outcome) {
    let mut rng = seeded(1);
    let mut worst: f64 = 0.0;
    let mut worst_known: f64 = 0.0;
    let mut ranks = [false; 12];
    let mut failures = 0;
    for _ in 0..200 {
        let inst = mixed_short_instance(&mut rng, 2, 12);
        let scale = inst.operator.sup_norm();
        match oracle_agreement(&inst.operator, &inst.split) {
            Ok((gap, results)) => {
                worst = worst.max(rel(gap, scale));
                ranks[results[0].diagnostics.a22_rank.min(11)] = true;
                for r in &results {
                    worst_known = worst_known.max(rel(
                        operator_norm(&(&r.block - &inst.expected_short)),
                        scale,
                    ));
                }
            }
            Err(e) => {
                eprintln!("  oracle failure: {e}");
                failures += 1;
            }
        }
    }
    out.check(
        format!("all routes succeed ({failures} failures)"),
        failures == 0,
    );
    out.check(
        format!("pairwise gap {worst:.2e} <= 1e-6 ||A||"),
        worst <= 1e-6,
    );
    out.check(
        format!("gap to constructed short {worst_known:.2e} <= 1e-6 ||A||"),
        worst_known <= 1e-6,
    );
    out.check(
        "A22 rank 0 and full rank both covered",
        ranks[0] && ranks.iter().skip(1).any(|&r| r),
    );
}

fn variational_criterion(out: &mut Outcome) {
    let mut rng = seeded(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let inst = mixed_short_instance(&mut rng, 2, 12);
        let (a, split) = (&inst.operator, &inst.split);
        let s_block = short(a, split).expect("short").block;
        for _ in 0..10 {
            let s = unit_vector(&mut rng, split.n1());
            let quad = s.dot(&(&s_block * &s));
            let inf = variational_value(a, split, &s).expect("variational");
            worst = worst.max(rel((quad - inf).abs(), quad.abs().max(a.sup_norm())));
        }
    }
    out.check(
        format!("|<S s,s> - inf| {worst:.2e} <= 1e-8 relative"),
        worst <= 1e-8,
    );
}

fn identities_criterion(out: &mut Outcome) {
    let mut rng = seeded(3);
    let (mut e1, mut inv, mut cong): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let inst = mixed_short_instance(&mut rng, 2, 12);
        let (a, split) = (&inst.operator, &inst.split);
        let scale = a.sup_norm();
        let q = build_special_projection(a, split).expect("projection");
        e1 = e1.max(rel(projection_identity_defect(a, &q).unwrap(), scale));
        let qn = sup_norm(&q.q_full);
        inv = inv.max(verify_inverse_identity(&q) / (1.0 + qn * qn));
        let s = short(a, split).expect("short");
        cong = cong.max(rel(congruence_defect(a, &q, &s).unwrap(), scale));
    }
    out.check(
        format!("||AE - E^T A E|| {e1:.2e} <= 1e-8 ||A||"),
        e1 <= 1e-8,
    );
    out.check(
        format!("inverse identity {inv:.2e} <= 1e-10 (1 + ||Q||^2)"),
        inv <= 1e-10,
    );
    out.check(format!("congruence {cong:.2e} <= 1e-8 ||C||"), cong <= 1e-8);
}

fn random_rotated_splits(rng: &mut ChaCha8Rng, dim: usize) -> (SubspaceSplit, SubspaceSplit) {
    let basis = orthogonal(rng, dim);
    let outer = rng.random_range(2..dim);
    let inner = rng.random_range(1..outer);
    (
        SubspaceSplit::with_basis(inner, basis.clone()).unwrap(),
        SubspaceSplit::with_basis(outer, basis).unwrap(),
    )
}

fn order_criterion(out: &mut Outcome) {
    let mut rng = seeded(4);
    let mut monotone_ok = 0;
    let mut worst_mono = f64::INFINITY;
    for _ in 0..100 {
        let inst = mixed_short_instance(&mut rng, 2, 10);
        let dim = inst.operator.dim();
        let rank = rng.random_range(0..=dim);
        let bump = psd_of_rank(&mut rng, dim, rank) * inst.operator.sup_norm().max(1e-3);
        let b = psd(&(inst.operator.entries() + bump)).unwrap();
        let sa = short(&inst.operator, &inst.split).unwrap();
        let sb = short(&b, &inst.split).unwrap();
        worst_mono = worst_mono.min(min_eigenvalue(
            &(sb.shorted.entries() - sa.shorted.entries()),
        ));
        if loewner_leq(&sa.shorted, &sb.shorted, 1e-9).unwrap() {
            monotone_ok += 1;
        }
    }
    out.check(
        format!("monotone on {monotone_ok}/100 pairs (min eig {worst_mono:.2e})"),
        monotone_ok == 100,
    );

    let mut worst_nest: f64 = 0.0;
    for _ in 0..50 {
        let dim = rng.random_range(3..=10);
        let rank = rng.random_range(1..=dim);
        let a = psd(&psd_of_rank(&mut rng, dim, rank)).unwrap();
        let (inner, outer) = random_rotated_splits(&mut rng, dim);
        let direct = short(&a, &inner).unwrap();
        let iterated = short(&short(&a, &outer).unwrap().shorted, &inner).unwrap();
        let via_intersection = shorted_ops::shorting::short_nested(&a, &inner, &outer).unwrap();
        let d1 = sup_norm(&(direct.shorted.entries() - iterated.shorted.entries()));
        let d2 = sup_norm(&(via_intersection.shorted.entries() - direct.shorted.entries()));
        worst_nest = worst_nest.max(rel(d1.max(d2), a.sup_norm()));
    }
    out.check(
        format!("nesting defect {worst_nest:.2e} <= 1e-8 ||A||"),
        worst_nest <= 1e-8,
    );

    let mut worst_idem: f64 = 0.0;
    for _ in 0..50 {
        let inst = mixed_short_instance(&mut rng, 2, 12);
        let s = short(&inst.operator, &inst.split).unwrap();
        let ss = short(&s.shorted, &inst.split).unwrap();
        worst_idem = worst_idem.max(sup_norm(&(ss.shorted.entries() - s.shorted.entries())));
    }
    out.check(
        format!("idempotence defect {worst_idem:.2e} <= 1e-10"),
        worst_idem <= 1e-10,
    );
}

fn gaussian_oracle_criterion(out: &mut Outcome) {
    let mut rng = seeded(5);
    let (mut mean_err, mut cov_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let dim = rng.random_range(2..=10);
        let n1 = rng.random_range(1..dim);
        let n2 = dim - n1;
        let short_rank = rng.random_range(0..=n1);
        let inst = short_instance(&mut rng, dim, n1, n2, short_rank, 1.0);
        let c = inst.operator.entries();
        let m = gaussian_vector(&mut rng, dim);
        let t = gaussian_vector(&mut rng, n2) * 2.0;
        let mu =
            GaussianMeasure::new(m.clone(), inst.operator.clone(), inst.split.clone()).unwrap();
        let (mean_t, law) = condition(&mu, &t).unwrap();

        let c12 = c.view((0, n1), (n1, n2)).into_owned();
        let c22 = c.view((n1, n1), (n2, n2)).into_owned();
        let chol = Cholesky::new(c22).expect("invertible C22");
        let m1 = m.rows(0, n1).into_owned();
        let m2 = m.rows(n1, n2).into_owned();
        let oracle_mean = &m1 + &c12 * chol.solve(&(&t - &m2));
        let oracle_cov = c.view((0, 0), (n1, n1)) - &c12 * chol.solve(&c12.transpose());

        let mean_scale = vec_sup_norm(&oracle_mean).max(vec_sup_norm(&m) + vec_sup_norm(&t));
        mean_err = mean_err.max(rel(
            vec_sup_norm(&(mean_t.rows(0, n1) - &oracle_mean)),
            mean_scale,
        ));
        cov_err = cov_err.max(rel(
            sup_norm(&(&law.cond_cov.block - &oracle_cov)),
            sup_norm(&oracle_cov).max(sup_norm(c)),
        ));
    }
    out.check(
        format!("mean vs textbook {mean_err:.2e} <= 1e-8 relative"),
        mean_err <= 1e-8,
    );
    out.check(
        format!("covariance vs textbook {cov_err:.2e} <= 1e-8 relative"),
        cov_err <= 1e-8,
    );

    let c = psd(&Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
    let mu = GaussianMeasure::centered(c, SubspaceSplit::new(2, 1).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for t in [2.0, -1.0, 0.0, 3.5] {
        let (mean, law) = condition(&mu, &Vector::from_vec(vec![t])).unwrap();
        worst = worst
            .max((mean[0] - 0.5 * t).abs())
            .max((law.cond_cov.block[0] - 0.75).abs());
    }
    out.check(
        format!("bivariate rho = 0.5 defect {worst:.2e} <= 1e-12"),
        worst <= 1e-12,
    );
}

fn mc_criterion(out: &mut Outcome) {
    let mut rng = seeded(6);
    let dim = 8;
    let inst = short_instance(&mut rng, dim, 3, 4, 2, 1.5);
    let mean = gaussian_vector(&mut rng, dim);
    let mu = GaussianMeasure::new(mean, inst.operator.clone(), inst.split.clone()).unwrap();
    let bound = 0.01 * (1.0 + inst.operator.sup_norm());
    let seed = 2026;

    let full = mc_verify(&mu, 1_000_000, seed).unwrap();
    out.check(
        format!(
            "cross-cov {:.2e} <= {bound:.2e}",
            full.residual_cross_cov_norm
        ),
        full.residual_cross_cov_norm <= bound,
    );
    out.check(
        format!(
            "cond-cov error {:.2e} <= {bound:.2e}",
            full.residual_cov_error
        ),
        full.residual_cov_error <= bound,
    );

    // Average over independent replicates so each count uses 10⁶ draws in
    // total; the 10⁶ level is the single run above.
    let error_at = |count: usize| -> f64 {
        let reps = 1_000_000 / count;
        (0..reps)
            .map(|r| {
                let rep = mc_verify(&mu, count, seed + 1 + r as u64).unwrap();
                rep.residual_cross_cov_norm + rep.residual_cov_error
            })
            .sum::<f64>()
            / reps as f64
    };
    let e4 = error_at(10_000);
    let e5 = error_at(100_000);
    let e6 = full.residual_cross_cov_norm + full.residual_cov_error;
    let ratio = e4 / e6;
    out.check(
        format!("error 1e4 {e4:.2e}, 1e5 {e5:.2e}, 1e6 {e6:.2e}: ratio {ratio:.2} in [5, 20]"),
        (5.0..=20.0).contains(&ratio),
    );
}

fn truncation_criterion(out: &mut Outcome) {
    let (alpha, beta) = (2.0, 1.5);
    let model = make_coupled_family(alpha, beta).unwrap();
    let schedule = TruncationSchedule::doubling(4, 256, 1, 7).unwrap();
    let report = convergence_study_with_reference(&model, &schedule, Some(512)).unwrap();

    let weak = (0..schedule.probes.len()).all(|p| {
        let gaps = report.probe_gaps(p);
        let tail = &gaps[gaps.len() - 2..];
        tail[1] < tail[0]
    });
    out.check("weak-probe gaps decrease over the last 3 entries", weak);

    let dists = report.trace_distances();
    out.check(
        "trace-norm distance decreases throughout",
        dists.windows(2).all(|w| w[1] < w[0]),
    );

    // Closed form: the H1 short of Aⁿ is c0 − Σ_{k≤n} k^(β−2α).
    let tail_sum = |n: usize| -> f64 {
        (n + 1..=512)
            .map(|k| (k as f64).powf(beta - 2.0 * alpha))
            .sum()
    };
    let closed_form = report
        .records
        .iter()
        .map(|r| {
            rel(
                (r.trace_norm_dist_to_ref - tail_sum(r.n)).abs(),
                tail_sum(r.n),
            )
        })
        .fold(0.0, f64::max);
    out.check(
        format!("distances match closed form ({closed_form:.1e} relative)"),
        closed_form < 1e-8,
    );

    let last = *dists.last().unwrap();
    out.check(
        format!("final trace distance {last:.4e} < 1e-4"),
        last < 1e-4,
    );
    out.check(
        "compatibility solve succeeds at every n",
        report.records.iter().all(|r| r.compatible),
    );
}

fn incompatibility_criterion(out: &mut Outcome) {
    let model = make_coupled_family(0.8, 1.2).unwrap();
    let schedule = TruncationSchedule::doubling(4, 256, 1, 7).unwrap();
    let report = convergence_study_with_reference(&model, &schedule, None).unwrap();
    let norms = report.q_hat_norms();
    out.check(
        "q_hat_norm strictly increasing",
        norms.windows(2).all(|w| w[1] > w[0]),
    );
    let growth = norms.last().unwrap() / norms[0];
    out.check(format!("growth factor {growth:.1} > 2"), growth > 2.0);
    out.check(
        format!("verdict {:?}", report.verdict),
        report.verdict == Verdict::QHatDiverging,
    );
}

fn decreasing_criterion(out: &mut Outcome) {
    let mut rng = seeded(9);
    let eps = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10];
    let eps_min = 1e-10;
    let mut monotone = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..50 {
        let dim = rng.random_range(2..=12);
        let n1 = rng.random_range(1..dim);
        let a22_rank = rng.random_range(0..=dim - n1);
        let short_rank = rng.random_range(0..=n1);
        let inst = short_instance(&mut rng, dim, n1, a22_rank, short_rank, 1.0);
        let r = decreasing_approximation_study(&inst.operator, &inst.split, &eps).unwrap();
        if r.monotone {
            monotone += 1;
        }
        worst_ratio = worst_ratio.max(r.final_op_gap / (10.0 * eps_min * dim as f64));
    }
    out.check(
        format!("Loewner nonincreasing on {monotone}/50"),
        monotone == 50,
    );
    out.check(
        format!("final gap / (10 eps_min dim) = {worst_ratio:.2} < 1"),
        worst_ratio < 1.0,
    );
}

fn witness_criterion(out: &mut Outcome) {
    let sizes = [1, 2, 4, 8];
    let first = truncation_monotonicity(&non_monotone_witness(), &sizes).unwrap();
    let second = truncation_monotonicity(&non_monotone_witness(), &sizes).unwrap();
    out.check(
        format!(
            "min eig of S(A^{}) - S(A^{}) = {:.3e} < -1e-6",
            first.short_pair.0, first.short_pair.1, first.min_short_increment_eig
        ),
        first.min_short_increment_eig < -1e-6,
    );
    out.check("identical across runs", first == second);
}

type Criterion = (&'static str, fn(&mut Outcome), Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "three-way shorting oracle agreement",
            oracle_agreement_criterion,
            Duration::from_secs(10),
        ),
        (
            "variational identity",
            variational_criterion,
            Duration::from_secs(5),
        ),
        (
            "algebraic identities",
            identities_criterion,
            Duration::from_secs(5),
        ),
        ("order properties", order_criterion, Duration::from_secs(10)),
        (
            "Gaussian conditioning vs classical oracle",
            gaussian_oracle_criterion,
            Duration::from_secs(5),
        ),
        (
            "Monte Carlo normal correlation",
            mc_criterion,
            Duration::from_secs(60),
        ),
        (
            "truncation convergence",
            truncation_criterion,
            Duration::from_secs(60),
        ),
        (
            "incompatibility surrogate",
            incompatibility_criterion,
            Duration::from_secs(60),
        ),
        (
            "decreasing approximation",
            decreasing_criterion,
            Duration::from_secs(10),
        ),
        (
            "non-monotone truncation witness",
            witness_criterion,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let mut out = Outcome::new();
        let start = Instant::now();
        run(&mut out);
        let elapsed = start.elapsed();
        out.check(
            format!(
                "runtime {:.2}s < {}s",
                elapsed.as_secs_f64(),
                budget.as_secs()
            ),
            elapsed < *budget,
        );
        let ok = out.passed();
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2}: {name}",
            if ok { "PASS" } else { "FAIL" },
            k + 1
        );
        for (what, pass) in &out.checks {
            println!("       [{}] {what}", if *pass { "ok" } else { "FAILED" });
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
