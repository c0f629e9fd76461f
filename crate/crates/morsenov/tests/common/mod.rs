//! Shared random generators for the integration suites: seeded, so every
//! run exercises the same inputs.

use morsenov::novikov::{NovikovMatrix, NovikovScalar};
use morsenov::ratio::ratio;
use rand::Rng;

/// A random exact scalar: up to `max_terms` terms with small rational
/// exponents (denominators 1..=4) and small rational coefficients.
pub fn random_scalar(rng: &mut impl Rng, max_terms: usize) -> NovikovScalar {
    let n = rng.gen_range(0..=max_terms);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let num = rng.gen_range(-12i64..=12);
        let den = rng.gen_range(1i64..=4);
        let cnum = rng.gen_range(-9i64..=9);
        let cden = rng.gen_range(1i64..=5);
        pairs.push((ratio(num, den), ratio(cnum, cden)));
    }
    NovikovScalar::from_terms(pairs)
}

/// A random exact scalar guaranteed nonzero.
pub fn random_nonzero_scalar(rng: &mut impl Rng, max_terms: usize) -> NovikovScalar {
    loop {
        let s = random_scalar(rng, max_terms);
        if !s.is_zero_exact() {
            return s;
        }
    }
}

/// A random scalar with strictly positive valuation (possibly zero).
pub fn random_positive_valuation_scalar(
    rng: &mut impl Rng,
    max_terms: usize,
) -> NovikovScalar {
    let n = rng.gen_range(0..=max_terms);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let num = rng.gen_range(1i64..=10);
        let den = rng.gen_range(1i64..=4);
        let cnum = rng.gen_range(-9i64..=9);
        let cden = rng.gen_range(1i64..=5);
        pairs.push((ratio(num, den), ratio(cnum, cden)));
    }
    NovikovScalar::from_terms(pairs)
}

/// A random `n×n` matrix satisfying the invertibility criterion: only
/// nonnegative exponents, off-diagonal entries of positive valuation,
/// diagonal constant terms nonzero.
pub fn random_criterion_matrix(rng: &mut impl Rng, n: usize) -> NovikovMatrix {
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let tail = random_positive_valuation_scalar(rng, 2);
            if i == j {
                let mut c = 0i64;
                while c == 0 {
                    c = rng.gen_range(-6i64..=6);
                }
                row.push(NovikovScalar::from_int(c).add(&tail));
            } else {
                row.push(tail);
            }
        }
        rows.push(row);
    }
    NovikovMatrix::from_rows(rows)
}

/// A random exact matrix with no structural constraints.
#[allow(dead_code)] // each test target uses its own subset of these generators
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> NovikovMatrix {
    let mut grid = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for _ in 0..cols {
            row.push(random_scalar(rng, 3));
        }
        grid.push(row);
    }
    NovikovMatrix::from_rows(grid)
}
