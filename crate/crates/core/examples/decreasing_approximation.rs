//! Shorts of A + εI decrease to the short of A as ε shrinks.

use shorted_ops::operator::{psd, Matrix, SubspaceSplit};
use shorted_ops::truncation::decreasing_approximation_study;

fn main() -> shorted_ops::Result<()> {
    let a = psd(&Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]))?;
    let split = SubspaceSplit::new(2, 1)?;
    let report = decreasing_approximation_study(&a, &split, &[1.0, 0.1, 0.01, 1e-4, 1e-8])?;
    for r in &report.records {
        println!(
            "ε {:>7.0e}  S {:.10}  gap {:.3e}",
            r.eps,
            r.shorted_block[(0, 0)],
            r.op_dist_to_limit
        );
    }
    println!(
        "limit {}  monotone {}",
        report.limit_block[(0, 0)],
        report.monotone
    );
    Ok(())
}
