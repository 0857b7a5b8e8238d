//! A coupled family whose Q̂ grows without bound while the shorts still
//! converge weakly.

use shorted_ops::truncation::{convergence_study, make_coupled_family, TruncationSchedule};

fn main() -> shorted_ops::Result<()> {
    let model = make_coupled_family(0.8, 1.2)?;
    let schedule = TruncationSchedule::doubling(4, 1024, 1, 11)?;
    let report = convergence_study(&model, &schedule)?;
    for r in &report.records {
        println!(
            "n {:>5}  ‖Q̂‖ {:>9.3}  probe gaps {:?}",
            r.n,
            r.q_hat_norm,
            r.weak_probe_values
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect::<Vec<_>>()
        );
    }
    let norms = report.q_hat_norms();
    println!(
        "growth {:.1}x  diverging {}  weak {}",
        norms[norms.len() - 1] / norms[0],
        report.q_hat_diverging,
        report.weak_converging
    );
    Ok(())
}
