//! Exact rational helpers: parsing and printing in the `p/q` text form used
//! by every JSON document in this crate.
//!
//! Rationals are always kept in lowest terms (`num_rational::BigRational`
//! reduces on construction). The text form is `"p"` for integers and `"p/q"`
//! otherwise, with an optional leading `-` and no whitespace, so a value has
//! exactly one rendering and documents are byte-reproducible.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Parse an exact rational from `p` or `p/q` text (optional leading `-`).
///
/// Returns `None` on empty input, a zero denominator, or malformed digits.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num_str.parse().ok()?;
    let den: BigInt = den_str.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Render a rational in lowest terms as `p` or `p/q`.
pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Convenience constructor for a rational from an integer pair.
///
/// # Panics
/// Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "rational denominator must be nonzero");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for an integer-valued rational.
pub fn int_ratio(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// True if `r` is a (possibly negative) integer.
pub fn is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}

/// Render with an explicit sign, used by human-readable scalar formatting.
pub fn format_signed(r: &BigRational) -> String {
    if r.is_negative() {
        format!("- {}", format_ratio(&-r.clone()))
    } else {
        format!("+ {}", format_ratio(r))
    }
}
