//! Maps compositions to Euclidean coordinates and back to a check on the
//! contrast matrix.

use simplex_means::compositional::{helmert_submatrix, helmert_transform, CompositionalSample};

fn main() -> simplex_means::Result<()> {
    let h = helmert_submatrix(4)?;
    println!("Helmert sub-matrix for D = 4:\n{h:.4}");
    println!(
        "max |HH' - I| = {:.2e}",
        (&h * h.transpose() - nalgebra::DMatrix::identity(3, 3)).amax()
    );

    let x = CompositionalSample::from_rows(vec![
        vec![0.10, 0.20, 0.30, 0.40],
        vec![0.25, 0.25, 0.25, 0.25],
        vec![0.40, 0.30, 0.20, 0.10],
    ])?;
    let y = helmert_transform(&x);
    println!("coordinates (one row per composition):\n{:.4}", y.matrix());
    // The balanced composition sits at the origin.
    assert!(y.row(1).amax() < 1e-15);
    Ok(())
}
