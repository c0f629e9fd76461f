//! Matrix inversion over the Novikov field: the constant-part
//! invertibility criterion, exact determinants, and truncated inversion.
//!
//! Run with `cargo run --example matrix_inversion`.

use morsenov::novikov::{NovikovMatrix, NovikovScalar};
use morsenov::ratio::ratio;

fn main() {
    // A matrix passes the criterion when every exponent is nonnegative,
    // off-diagonal entries have no constant term, and diagonal constant
    // terms are nonzero. Such a matrix is always invertible.
    let t = |num: i64, den: i64| NovikovScalar::monomial(ratio(num, den), ratio(1, 1));
    let matrix = NovikovMatrix::from_rows(vec![
        vec![NovikovScalar::from_int(2), t(1, 2), NovikovScalar::zero()],
        vec![NovikovScalar::zero(), NovikovScalar::from_int(-1), t(1, 1)],
        vec![t(2, 1), NovikovScalar::zero(), NovikovScalar::from_int(3)],
    ]);
    println!("matrix:\n{matrix}");

    let criterion = matrix.invertibility_criterion().expect("square matrix");
    println!("criterion holds: {}", criterion.holds());

    // The determinant is exact, and its constant term is the product of the
    // diagonal constant terms — the reason the criterion suffices.
    let det = matrix.det().expect("square matrix");
    println!("det = {det}");

    let thru = ratio(4, 1);
    let inverse = matrix.invert(&thru).expect("criterion matrices invert");
    println!("inverse through exponent 4:\n{inverse}");

    let product = matrix.mul(&inverse).expect("shapes match");
    let identity = NovikovMatrix::identity(3);
    assert!(product.agrees_with(&identity, &thru));
    println!("matrix · inverse agrees with the identity through exponent 4: ok");

    // Breaking the hypotheses is reported entry by entry.
    let mut broken = matrix.clone();
    broken.set(0, 1, NovikovScalar::from_int(5));
    let report = broken.invertibility_criterion().expect("square matrix");
    println!("after planting a constant in (0,1):");
    for violation in &report.violations {
        println!("  {violation}");
    }
}
