//! Shorts one operator by every route and prints the block and diagnostics.

use shorted_ops::operator::{psd, Matrix, SubspaceSplit};
use shorted_ops::shorting::{
    default_eps_schedule, short, short_pseudo, short_regularized, short_schur, variational_value,
};
use shorted_ops::Vector;

fn main() -> shorted_ops::Result<()> {
    let a = psd(&Matrix::from_row_slice(
        3,
        3,
        &[4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 2.0],
    ))?;
    let split = SubspaceSplit::new(3, 1)?;

    let routes = [
        ("auto", short(&a, &split)?),
        ("schur", short_schur(&a, &split)?),
        ("pseudo", short_pseudo(&a, &split)?),
        (
            "regularized",
            short_regularized(&a, &split, &default_eps_schedule())?,
        ),
    ];
    for (name, r) in &routes {
        println!(
            "{name:<12} S(A) = {:.15}  method {:?}  rank(A22) {}  A - S min eig {:.1e}",
            r.block[(0, 0)],
            r.method,
            r.diagnostics.a22_rank,
            r.diagnostics.loewner_gap_eig
        );
    }

    // inf over s in H2 of <A(e + s), e + s>
    let e = Vector::from_vec(vec![1.0]);
    println!(
        "variational  S(A) = {:.15}",
        variational_value(&a, &split, &e)?
    );
    Ok(())
}
