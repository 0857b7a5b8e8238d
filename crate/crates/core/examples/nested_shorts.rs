//! Shorting to an intersection equals shorting twice.

use shorted_ops::operator::{psd, sup_norm, Matrix, SubspaceSplit};
use shorted_ops::shorting::{intersect, short, short_nested};

fn main() -> shorted_ops::Result<()> {
    let a = psd(&Matrix::from_fn(5, 5, |i, j| {
        1.0 / (1.0 + i as f64 + j as f64)
    }))?;
    let s = SubspaceSplit::coordinates(5, &[0, 1, 2])?;
    let t = SubspaceSplit::coordinates(5, &[1, 2, 3])?;
    let both = intersect(&s, &t)?;
    println!("dim(S ∩ T) = {}", both.n1());

    let direct = short_nested(&a, &s, &t)?;
    let iterated = short(&short(&a, &t)?.shorted, &s)?;
    println!("direct   {}", direct.shorted.entries());
    println!(
        "S(T(A)) differs by {:.2e}",
        sup_norm(&(direct.shorted.entries() - iterated.shorted.entries()))
    );
    Ok(())
}
