//! Builds the special oblique projection for a singular A22 and checks the
//! identities it satisfies.

use shorted_ops::oblique::{
    build_special_projection, compatibility_report, congruence_defect, projection_identity_defect,
    short_via_projection, verify_inverse_identity,
};
use shorted_ops::operator::{psd, Matrix, SubspaceSplit};
use shorted_ops::shorting::short;

fn main() -> shorted_ops::Result<()> {
    // A22 has rank 1 and A21 lies in its range.
    let a = psd(&Matrix::from_row_slice(
        3,
        3,
        &[3.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    ))?;
    let split = SubspaceSplit::new(3, 1)?;

    let compat = compatibility_report(&a, &split)?;
    println!(
        "compatible {}  rank(A22) {}  solve residual {:.1e}",
        compat.compatible, compat.a22_rank, compat.solve_residual
    );

    let q = build_special_projection(&a, &split)?;
    println!("Q̂ = {}", q.q_hat);
    println!("certificates {:?}", q.certificates);

    let s = short(&a, &split)?;
    println!(
        "S(A) via projection {}",
        short_via_projection(&a, &q)?.block
    );
    println!("S(A) direct         {}", s.block);
    println!(
        "defects: A Q = Q* A Q {:.1e}, inverse identity {:.1e}, congruence {:.1e}",
        projection_identity_defect(&a, &q)?,
        verify_inverse_identity(&q),
        congruence_defect(&a, &q, &s)?
    );
    Ok(())
}
