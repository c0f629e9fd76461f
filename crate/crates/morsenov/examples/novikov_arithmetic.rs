//! Field arithmetic in the Novikov field: exact sums and products,
//! truncation to a cutoff, and inversion of a formal series.
//!
//! Run with `cargo run --example novikov_arithmetic`.

use morsenov::novikov::NovikovScalar;
use morsenov::ratio::ratio;

fn main() {
    // Scalars are finite sums Σ λ_r·T^r with rational coefficients λ_r and
    // rational exponents r.
    let a = NovikovScalar::from_terms([
        (ratio(0, 1), ratio(2, 1)),
        (ratio(1, 2), ratio(-3, 1)),
        (ratio(2, 1), ratio(1, 1)),
    ]);
    let b = NovikovScalar::from_terms([(ratio(0, 1), ratio(1, 1)), (ratio(1, 2), ratio(1, 1))]);
    println!("a        = {a}");
    println!("b        = {b}");

    // Arithmetic on exact scalars is exact: nothing is rounded, nothing is
    // dropped.
    println!("a + b    = {}", a.add(&b));
    println!("a·b      = {}", a.mul(&b));
    println!("a − a    = {}", a.sub(&a));

    // Truncation keeps the terms at or below a cutoff and records the
    // cutoff, so later comparisons know how far the value can be trusted.
    let cutoff = ratio(1, 1);
    println!("a|₁      = {}", a.truncated(&cutoff));

    // A scalar with a nonzero leading term is invertible as a formal
    // series; the inverse is computed through a requested exponent.
    let thru = ratio(3, 1);
    let inv = b.invert(&thru).expect("leading term 1 is invertible");
    println!("b⁻¹      = {inv}");

    // Multiplying back gives 1 through the cutoff — the O(T^>3) tail is the
    // only part the truncated inverse cannot see.
    let product = b.mul(&inv);
    println!("b·b⁻¹    = {product}");
    assert!(product.agrees_with(&NovikovScalar::one(), &thru));
    println!("b·b⁻¹ agrees with 1 through exponent 3: ok");
}
