//! Truncations grow in the Loewner order but their shorts need not.

use shorted_ops::truncation::{non_monotone_witness, truncation_monotonicity};

fn main() -> shorted_ops::Result<()> {
    let model = non_monotone_witness();
    let w = truncation_monotonicity(&model, &[1, 2, 4, 8])?;
    println!("sizes {:?}", w.sizes);
    println!(
        "min eig of Aⁿ⁺ − Aⁿ (padded) {:.3e}",
        w.min_truncation_increment_eig
    );
    println!(
        "min eig of S(A^{}) − S(A^{}) {:.3e}",
        w.short_pair.1, w.short_pair.0, w.min_short_increment_eig
    );
    Ok(())
}
