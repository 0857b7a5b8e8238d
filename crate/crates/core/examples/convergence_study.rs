//! Truncation study of a trace-class coupled family. Writes the report and
//! plot table to the system temp directory.

use shorted_ops::io::{write_json, write_plot_table, Report};
use shorted_ops::truncation::{
    convergence_study_with_reference, make_coupled_family, TruncationSchedule,
};

fn main() -> shorted_ops::Result<()> {
    let model = make_coupled_family(2.0, 1.5)?;
    let schedule = TruncationSchedule::doubling(4, 256, 1, 7)?;
    let report = convergence_study_with_reference(&model, &schedule, Some(512))?;

    println!(
        "{:>5} {:>12} {:>12} {:>10}",
        "n", "op dist", "trace dist", "‖Q̂‖"
    );
    for r in &report.records {
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>10.4}",
            r.n, r.op_norm_dist_to_ref, r.trace_norm_dist_to_ref, r.q_hat_norm
        );
    }
    println!("verdict {:?}", report.verdict);

    let dir = std::env::temp_dir();
    let json = dir.join("coupled-study.json");
    write_plot_table(&dir.join("coupled-study.plot.csv"), &report.plot_rows())?;
    write_json(&json, &Report::Convergence(report))?;
    println!("wrote {}", json.display());
    Ok(())
}
