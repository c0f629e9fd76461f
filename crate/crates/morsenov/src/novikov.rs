//! Exact arithmetic in the Novikov field Λ and matrix algebra over it.
//!
//! An element of Λ is a formal sum `Σ λ_r·T^r` with rational coefficients
//! `λ_r` and rational exponents `r`, subject to the finiteness condition that
//! only finitely many terms lie below any exponent bound. This module
//! represents the computable fragment: finite sums, optionally carrying a
//! *cutoff* `C` meaning "coefficients are exact for every exponent `≤ C` and
//! unspecified above". Exponents are restricted to ℚ so that order
//! comparisons are exactly decidable; every algebraic identity consumed
//! downstream survives this restriction.
//!
//! Truncation propagates soundly through arithmetic:
//!
//! - `a + b` is exact for exponents up to the minimum of the cutoffs present;
//! - `a · b` with `a` known through `C` and `b` of valuation `v` is exact for
//!   exponents up to `C + v` (and symmetrically), because an unknown term of
//!   `a` above `C` can only influence product exponents above `C + v`;
//! - a truncated scalar with empty support is only ever reported "zero up to
//!   the cutoff", never asserted zero.
//!
//! Recomputing any operation with a larger cutoff never changes coefficients
//! at exponents at or below the smaller cutoff.
//!
//! [`NovikovMatrix`] supplies determinants, a sufficient invertibility
//! criterion (nonnegative exponents, off-diagonal entries of positive
//! valuation, diagonal constant terms nonzero — such a matrix reduces at
//! exponent zero to an invertible diagonal matrix, and a cofactor induction
//! shows the determinant's constant term is the product of the diagonal
//! constant terms), truncated inversion by Gaussian elimination with
//! valuation-minimal pivoting, and a division-free rank with certified
//! pivot/zero decisions.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ratio::{format_ratio, parse_ratio};

/// Exponent of a formal term `T^r`: an exact rational, ordered exactly.
pub type Exponent = BigRational;

/// Errors produced by Novikov arithmetic and matrix algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NovikovError {
    /// Inversion of the exact zero scalar.
    #[error("cannot invert the zero scalar")]
    ZeroInversion,
    /// A truncation prevented determining the result to the requested cutoff.
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    /// A square-matrix operation was applied to a non-square matrix.
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    /// The matrix has zero determinant at full available precision.
    #[error("matrix is singular: {0}")]
    SingularMatrix(String),
    /// Incompatible dimensions in a matrix operation.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

/// A computable Novikov-field element: finitely many exact terms plus an
/// optional cutoff.
///
/// Invariants maintained by every constructor and operation:
/// - no stored coefficient is zero;
/// - if a cutoff is present, every stored exponent is `≤` the cutoff;
/// - a scalar without cutoff is an exact element of Λ with finite support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NovikovScalar {
    terms: BTreeMap<Exponent, BigRational>,
    cutoff: Option<Exponent>,
}

impl NovikovScalar {
    /// The exact zero element (empty support, no cutoff).
    pub fn zero() -> Self {
        NovikovScalar {
            terms: BTreeMap::new(),
            cutoff: None,
        }
    }

    /// The multiplicative unit `1·T^0`.
    pub fn one() -> Self {
        Self::monomial(BigRational::zero(), BigRational::one())
    }

    /// A single term `coeff·T^exp` (exact zero if `coeff == 0`).
    pub fn monomial(exp: Exponent, coeff: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        NovikovScalar {
            terms,
            cutoff: None,
        }
    }

    /// The constant scalar `r·T^0`.
    pub fn from_ratio(r: BigRational) -> Self {
        Self::monomial(BigRational::zero(), r)
    }

    /// The constant scalar `n·T^0`.
    pub fn from_int(n: i64) -> Self {
        Self::from_ratio(BigRational::from_integer(n.into()))
    }

    /// Build from `(exponent, coefficient)` pairs; repeated exponents are
    /// summed and zero coefficients dropped.
    pub fn from_terms(pairs: impl IntoIterator<Item = (Exponent, BigRational)>) -> Self {
        let mut terms: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        for (e, c) in pairs {
            let entry = terms.entry(e).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        NovikovScalar {
            terms,
            cutoff: None,
        }
    }

    /// Impose a cutoff, discarding terms above it. If the scalar already has
    /// a smaller cutoff, the smaller one is kept.
    pub fn with_cutoff(mut self, cutoff: Exponent) -> Self {
        let eff = match self.cutoff.take() {
            Some(old) => old.min(cutoff),
            None => cutoff,
        };
        self.terms.retain(|e, _| *e <= eff);
        self.cutoff = Some(eff);
        self
    }

    /// Truncate to `cutoff` (same as [`with_cutoff`](Self::with_cutoff) but
    /// by reference).
    pub fn truncated(&self, cutoff: &Exponent) -> Self {
        self.clone().with_cutoff(cutoff.clone())
    }

    /// Stored terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn cutoff(&self) -> Option<&Exponent> {
        self.cutoff.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.cutoff.is_none()
    }

    /// True exactly for the exact zero element.
    pub fn is_zero_exact(&self) -> bool {
        self.terms.is_empty() && self.cutoff.is_none()
    }

    /// True if no terms are stored: exact zero, or "zero up to the cutoff"
    /// when a cutoff is present. The two cases are deliberately not
    /// identified; use [`is_zero_exact`](Self::is_zero_exact) to assert true
    /// vanishing.
    pub fn has_empty_support(&self) -> bool {
        self.terms.is_empty()
    }

    /// Least exponent with nonzero coefficient; `None` for empty support.
    pub fn valuation(&self) -> Option<&Exponent> {
        self.terms.keys().next()
    }

    /// A lower bound for the true valuation usable under truncation: the
    /// stored valuation if any term exists, the cutoff for a truncated empty
    /// scalar, and `None` (= +∞) for the exact zero.
    fn valuation_lower_bound(&self) -> Option<Exponent> {
        match self.valuation() {
            Some(v) => Some(v.clone()),
            None => self.cutoff.clone(),
        }
    }

    /// Coefficient at `exp`: `Some(0)` when the coefficient is known to
    /// vanish, `None` when `exp` lies beyond the cutoff and is unspecified.
    pub fn coeff_at(&self, exp: &Exponent) -> Option<BigRational> {
        if let Some(c) = self.terms.get(exp) {
            return Some(c.clone());
        }
        match &self.cutoff {
            Some(cut) if exp > cut => None,
            _ => Some(BigRational::zero()),
        }
    }

    /// Coefficient of `T^0`, when determined.
    pub fn constant_term(&self) -> Option<BigRational> {
        self.coeff_at(&BigRational::zero())
    }

    /// The value as an exact rational constant: `Some(q)` when the scalar
    /// is exact and supported only at exponent 0 (or empty), `None` for
    /// anything truncated or genuinely `T`-dependent.
    pub fn as_constant(&self) -> Option<BigRational> {
        if !self.is_exact() {
            return None;
        }
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (exp, coeff) = self.terms.iter().next().expect("one term");
                if exp.is_zero() {
                    Some(coeff.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Termwise sum. The result cutoff is the minimum of the cutoffs
    /// present (absent when both operands are exact); cancelled terms are
    /// dropped.
    pub fn add(&self, other: &Self) -> Self {
        let cutoff = match (&self.cutoff, &other.cutoff) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        };
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        if let Some(cut) = &cutoff {
            terms.retain(|e, _| e <= cut);
        }
        NovikovScalar { terms, cutoff }
    }

    pub fn neg(&self) -> Self {
        NovikovScalar {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product `Σ_t (Σ_{r+s=t} a_r·b_s)·T^t`.
    ///
    /// Exact when both factors are exact. When a factor carries cutoff `C`,
    /// the unknown part of that factor (exponents `> C`) can only reach
    /// product exponents above `C + v` where `v` is the other factor's
    /// valuation, so the result is exact through `C + v` and truncated there.
    /// Multiplication by the exact zero is exactly zero.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero_exact() || other.is_zero_exact() {
            return Self::zero();
        }
        let mut bounds: Vec<Exponent> = Vec::new();
        if let (Some(c), Some(v)) = (&self.cutoff, other.valuation_lower_bound()) {
            bounds.push(c.clone() + v);
        }
        if let (Some(c), Some(v)) = (&other.cutoff, self.valuation_lower_bound()) {
            bounds.push(c.clone() + v);
        }
        let cutoff = bounds.into_iter().min();

        let mut terms: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if let Some(cut) = &cutoff {
                    // Both maps iterate in increasing exponent order, so once
                    // a product exponent exceeds the cutoff the rest of the
                    // inner row does too.
                    if e > *cut {
                        break;
                    }
                }
                let entry = terms.entry(e).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        NovikovScalar { terms, cutoff }
    }

    /// Multiply by an exact rational constant.
    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            // Zero times an unknown tail is exactly zero.
            return Self::zero();
        }
        NovikovScalar {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * r)).collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    /// Multiply by the monomial `T^exp` (shifts every exponent and the
    /// cutoff by `exp`).
    pub fn shift(&self, exp: &Exponent) -> Self {
        NovikovScalar {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e + exp, c.clone()))
                .collect(),
            cutoff: self.cutoff.as_ref().map(|c| c + exp),
        }
    }

    /// Multiplicative inverse `b` with `a·b = 1` determined through the
    /// requested `cutoff`: every coefficient of `a·b − 1` at exponents
    /// `≤ cutoff` both exists and vanishes.
    ///
    /// Writes `a = λ_v·T^v·(1 + u)` with `val(u) > 0` and sums the geometric
    /// series `(1 + u)^{-1} = Σ (-u)^k`. For `val(a) < 0` the returned
    /// scalar carries the cutoff `cutoff − val(a)`: the extra precision is
    /// exactly what the product needs to be determined through `cutoff`.
    /// An exact single-term scalar inverts exactly (no cutoff).
    ///
    /// # Errors
    /// - [`NovikovError::ZeroInversion`] if `a` is the exact zero;
    /// - [`NovikovError::InsufficientPrecision`] if `a` is truncated with an
    ///   empty support (its valuation is unknown), or if `a`'s own cutoff is
    ///   smaller than `cutoff + max(0, −val(a)) + 2·val(a)`, the region the
    ///   computation needs.
    pub fn invert(&self, cutoff: &Exponent) -> Result<Self, NovikovError> {
        if self.terms.is_empty() {
            return match &self.cutoff {
                None => Err(NovikovError::ZeroInversion),
                Some(c) => Err(NovikovError::InsufficientPrecision(format!(
                    "scalar is zero up to T^{} with unknown valuation",
                    format_ratio(c)
                ))),
            };
        }
        let v = self.valuation().expect("nonempty support").clone();
        let lead = self.terms[&v].clone();

        if self.is_exact() && self.terms.len() == 1 {
            // λ·T^v inverts exactly to λ^{-1}·T^{-v}.
            return Ok(Self::monomial(-v, lead.recip()));
        }

        // Result cutoff: `cutoff` itself, extended by |val(a)| when the
        // valuation is negative so that a·b stays determined through
        // `cutoff` (the product cutoff is result_cutoff + val(a)).
        let result_cutoff = if v < BigRational::zero() {
            cutoff - &v
        } else {
            cutoff.clone()
        };

        if let Some(own) = &self.cutoff {
            let needed = &result_cutoff + &v + &v;
            if *own < needed {
                return Err(NovikovError::InsufficientPrecision(format!(
                    "inverting to cutoff {} needs the input exact through T^{}, \
                     but it is only known through T^{}",
                    format_ratio(cutoff),
                    format_ratio(&needed),
                    format_ratio(own)
                )));
            }
        }

        // Normalize to 1 + u with val(u) > 0, known through `inner` at least.
        let inner = &result_cutoff + &v;
        let normalized = self
            .scale(&lead.recip())
            .shift(&-v.clone())
            .truncated(&inner);
        let u = normalized.sub(&Self::one());
        debug_assert!(u
            .valuation()
            .map(|uv| uv > &BigRational::zero())
            .unwrap_or(true));

        let mut sum = Self::one().with_cutoff(inner.clone());
        let mut power = Self::one();
        let minus_u = u.neg();
        loop {
            power = power.mul(&minus_u).truncated(&inner);
            if power.has_empty_support() {
                break;
            }
            sum = sum.add(&power);
        }

        let result = sum.scale(&lead.recip()).shift(&-v);
        Ok(result.truncated(&result_cutoff))
    }

    /// True when both scalars are determined through `thru` and all
    /// coefficients at exponents `≤ thru` agree.
    pub fn agrees_with(&self, other: &Self, thru: &Exponent) -> bool {
        let known = |s: &Self| s.cutoff.as_ref().map(|c| c >= thru).unwrap_or(true);
        if !known(self) || !known(other) {
            return false;
        }
        let exps: std::collections::BTreeSet<&Exponent> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|e| *e <= thru)
            .collect();
        exps.into_iter().all(|e| {
            self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
                == other.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
        })
    }

    /// True when every determined coefficient at exponents `≤ thru` vanishes.
    pub fn vanishes_through(&self, thru: &Exponent) -> bool {
        self.cutoff.as_ref().map(|c| c >= thru).unwrap_or(true)
            && self.terms.keys().all(|e| e > thru)
    }

    /// JSON form: `{"terms": [{"exp", "coeff"}], "cutoff"?}` with terms in
    /// increasing exponent order and rationals in lowest terms.
    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert(
            "terms".into(),
            Value::Array(
                self.terms
                    .iter()
                    .map(|(e, c)| {
                        json!({"exp": format_ratio(e), "coeff": format_ratio(c)})
                    })
                    .collect(),
            ),
        );
        if let Some(c) = &self.cutoff {
            obj.insert("cutoff".into(), Value::String(format_ratio(c)));
        }
        Value::Object(obj)
    }

    /// Compact JSON form used inside matrix documents: a bare `"p/q"` string
    /// for exact constants, the full object otherwise.
    pub fn to_json_compact(&self) -> Value {
        if self.is_exact()
            && self
                .terms
                .keys()
                .all(|e| e.is_zero())
        {
            let c = self
                .terms
                .values()
                .next()
                .cloned()
                .unwrap_or_else(BigRational::zero);
            return Value::String(format_ratio(&c));
        }
        self.to_json()
    }

    /// Parse either the full object form or a bare rational (string or
    /// integer number), the latter denoting an exact constant.
    pub fn from_json(value: &Value) -> Result<Self, String> {
        match value {
            Value::String(s) => {
                let r = parse_ratio(s).ok_or_else(|| format!("invalid rational {s:?}"))?;
                Ok(Self::from_ratio(r))
            }
            Value::Number(n) => {
                let i = n
                    .as_i64()
                    .ok_or_else(|| format!("non-integer numeric scalar {n}"))?;
                Ok(Self::from_int(i))
            }
            Value::Object(obj) => {
                let terms = obj
                    .get("terms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| "scalar object needs a \"terms\" array".to_string())?;
                let mut pairs = Vec::new();
                for t in terms {
                    let exp = t
                        .get("exp")
                        .and_then(Value::as_str)
                        .and_then(parse_ratio)
                        .ok_or_else(|| format!("term missing valid \"exp\": {t}"))?;
                    let coeff = t
                        .get("coeff")
                        .and_then(Value::as_str)
                        .and_then(parse_ratio)
                        .ok_or_else(|| format!("term missing valid \"coeff\": {t}"))?;
                    pairs.push((exp, coeff));
                }
                let mut scalar = Self::from_terms(pairs);
                if let Some(c) = obj.get("cutoff") {
                    let cut = c
                        .as_str()
                        .and_then(parse_ratio)
                        .ok_or_else(|| format!("invalid cutoff {c}"))?;
                    scalar = scalar.with_cutoff(cut);
                }
                Ok(scalar)
            }
            other => Err(format!("cannot read a Novikov scalar from {other}")),
        }
    }
}

impl fmt::Display for NovikovScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            for (i, (e, c)) in self.terms.iter().enumerate() {
                let body = if e.is_zero() {
                    format_ratio(&c.abs())
                } else if c.abs().is_one() {
                    format!("T^({})", format_ratio(e))
                } else {
                    format!("{}·T^({})", format_ratio(&c.abs()), format_ratio(e))
                };
                if i == 0 {
                    if c.is_negative() {
                        write!(f, "-{body}")?;
                    } else {
                        write!(f, "{body}")?;
                    }
                } else if c.is_negative() {
                    write!(f, " - {body}")?;
                } else {
                    write!(f, " + {body}")?;
                }
            }
        }
        if let Some(cut) = &self.cutoff {
            write!(f, " + O(T^>{})", format_ratio(cut))?;
        }
        Ok(())
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $inherent:ident) => {
        impl std::ops::$trait for &NovikovScalar {
            type Output = NovikovScalar;
            fn $method(self, rhs: &NovikovScalar) -> NovikovScalar {
                self.$inherent(rhs)
            }
        }
        impl std::ops::$trait for NovikovScalar {
            type Output = NovikovScalar;
            fn $method(self, rhs: NovikovScalar) -> NovikovScalar {
                NovikovScalar::$inherent(&self, &rhs)
            }
        }
    };
}
scalar_binop!(Add, add, add);
scalar_binop!(Sub, sub, sub);
scalar_binop!(Mul, mul, mul);

impl std::ops::Neg for &NovikovScalar {
    type Output = NovikovScalar;
    fn neg(self) -> NovikovScalar {
        NovikovScalar::neg(self)
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// Why the invertibility criterion failed at one entry.
#[derive(Debug, Clone, PartialEq)]
pub enum CriterionViolation {
    /// Entry `(row, col)` stores a term with a negative exponent.
    NegativeExponent { row: usize, col: usize, exp: Exponent },
    /// Off-diagonal entry `(row, col)` has a nonzero constant term.
    OffDiagonalConstant {
        row: usize,
        col: usize,
        coeff: BigRational,
    },
    /// Diagonal entry `index` has zero constant term.
    ZeroDiagonalConstant { index: usize },
    /// Entry `(row, col)` is truncated below exponent 0, so its constant
    /// term is undetermined.
    UndeterminedConstant { row: usize, col: usize },
}

impl fmt::Display for CriterionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionViolation::NegativeExponent { row, col, exp } => write!(
                f,
                "entry ({row},{col}) has a term at negative exponent {}",
                format_ratio(exp)
            ),
            CriterionViolation::OffDiagonalConstant { row, col, coeff } => write!(
                f,
                "off-diagonal entry ({row},{col}) has nonzero constant term {}",
                format_ratio(coeff)
            ),
            CriterionViolation::ZeroDiagonalConstant { index } => {
                write!(f, "diagonal entry ({index},{index}) has zero constant term")
            }
            CriterionViolation::UndeterminedConstant { row, col } => write!(
                f,
                "entry ({row},{col}) is truncated below exponent 0; constant term unknown"
            ),
        }
    }
}

/// Result of [`NovikovMatrix::invertibility_criterion`].
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub violations: Vec<CriterionViolation>,
}

impl CriterionReport {
    /// True iff all three hypotheses of the criterion hold.
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds(),
            "violations": self
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>(),
        })
    }
}

/// Outcome of a division-free rank computation over Λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult {
    /// Number of pivots found (a lower bound when not certified).
    pub rank: usize,
    /// True when every pivot and zero decision was determined exactly or at
    /// exponents at or below the supplied cutoff.
    pub certified: bool,
}

/// A dense matrix with Novikov-scalar entries, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NovikovMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<NovikovScalar>,
}

impl NovikovMatrix {
    /// Zero matrix of the given shape.
    pub fn zero(rows: usize, cols: usize) -> Self {
        NovikovMatrix {
            rows,
            cols,
            entries: vec![NovikovScalar::zero(); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, NovikovScalar::one());
        }
        m
    }

    /// Build from rows.
    ///
    /// # Panics
    /// Panics if rows have unequal lengths.
    pub fn from_rows(rows: Vec<Vec<NovikovScalar>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map(Vec::len).unwrap_or(0);
        assert!(
            rows.iter().all(|r| r.len() == ncols),
            "all rows must have equal length"
        );
        NovikovMatrix {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &NovikovScalar {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: NovikovScalar) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Horizontal concatenation `[self | other]`.
    ///
    /// # Panics
    /// Panics if row counts differ.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hcat needs equal row counts");
        let mut m = Self::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Result<Self, NovikovError> {
        if self.cols != other.rows {
            return Err(NovikovError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = NovikovScalar::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, NovikovError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NovikovError::ShapeMismatch(format!(
                "{}x{} plus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).add(other.get(i, j)));
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NovikovError> {
        self.add(&other.map(NovikovScalar::neg))
    }

    /// Apply a scalar transformation entrywise.
    pub fn map(&self, f: impl Fn(&NovikovScalar) -> NovikovScalar) -> Self {
        NovikovMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// True when every entry agrees with `other` through exponent `thru`.
    pub fn agrees_with(&self, other: &Self, thru: &Exponent) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.agrees_with(b, thru))
    }

    /// True when every determined coefficient at exponents `≤ thru` vanishes.
    pub fn vanishes_through(&self, thru: &Exponent) -> bool {
        self.entries.iter().all(|e| e.vanishes_through(thru))
    }

    /// True when every entry carries no cutoff.
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(NovikovScalar::is_exact)
    }

    /// Exact determinant by cofactor expansion along the first row.
    ///
    /// Finite sums are closed under determinants, so exact entries give an
    /// exact result; truncated entries propagate their cutoffs through the
    /// expansion.
    ///
    /// # Errors
    /// [`NovikovError::NonSquare`] for non-square input.
    pub fn det(&self) -> Result<NovikovScalar, NovikovError> {
        if !self.is_square() {
            return Err(NovikovError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let cols: Vec<usize> = (0..self.cols).collect();
        Ok(self.det_minor(0, &cols))
    }

    fn det_minor(&self, row: usize, cols: &[usize]) -> NovikovScalar {
        if cols.is_empty() {
            return NovikovScalar::one();
        }
        if cols.len() == 1 {
            return self.get(row, cols[0]).clone();
        }
        let mut acc = NovikovScalar::zero();
        for (k, &col) in cols.iter().enumerate() {
            let entry = self.get(row, col);
            if entry.is_zero_exact() {
                continue;
            }
            let rest: Vec<usize> = cols
                .iter()
                .copied()
                .filter(|&c| c != col)
                .collect();
            let minor = self.det_minor(row + 1, &rest);
            let signed = if k % 2 == 0 { minor } else { minor.neg() };
            acc = acc.add(&entry.mul(&signed));
        }
        acc
    }

    /// Sufficient invertibility criterion over Λ: every entry has
    /// nonnegative exponents only, off-diagonal entries have zero constant
    /// term (strictly positive valuation), and each diagonal entry has a
    /// nonzero constant term. At exponent zero such a matrix is an
    /// invertible diagonal matrix over ℚ, and the constant term of its
    /// determinant is the product of the diagonal constant terms.
    ///
    /// # Errors
    /// [`NovikovError::NonSquare`] for non-square input.
    pub fn invertibility_criterion(&self) -> Result<CriterionReport, NovikovError> {
        if !self.is_square() {
            return Err(NovikovError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut violations = Vec::new();
        let zero = BigRational::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let entry = self.get(i, j);
                for (e, _) in entry.terms() {
                    if *e < zero {
                        violations.push(CriterionViolation::NegativeExponent {
                            row: i,
                            col: j,
                            exp: e.clone(),
                        });
                    }
                }
                match entry.constant_term() {
                    None => violations.push(CriterionViolation::UndeterminedConstant {
                        row: i,
                        col: j,
                    }),
                    Some(c) => {
                        if i == j && c.is_zero() {
                            violations
                                .push(CriterionViolation::ZeroDiagonalConstant { index: i });
                        } else if i != j && !c.is_zero() {
                            violations.push(CriterionViolation::OffDiagonalConstant {
                                row: i,
                                col: j,
                                coeff: c,
                            });
                        }
                    }
                }
            }
        }
        Ok(CriterionReport { violations })
    }

    /// Inverse, exact through the requested `cutoff`, by Gauss–Jordan
    /// elimination with valuation-minimal pivoting (ties broken by lowest
    /// row index) — the pivot of least valuation loses the least precision
    /// on division.
    ///
    /// Internally retries with increasing working precision until the
    /// result is determined through `cutoff`; this always terminates for
    /// exact inputs because the precision lost to pivot divisions is fixed
    /// while the working cutoff grows.
    ///
    /// # Errors
    /// - [`NovikovError::NonSquare`];
    /// - [`NovikovError::SingularMatrix`] when the determinant is zero at
    ///   full available precision;
    /// - [`NovikovError::InsufficientPrecision`] when input truncation
    ///   prevents a pivot decision or the requested cutoff.
    pub fn invert(&self, cutoff: &Exponent) -> Result<Self, NovikovError> {
        if !self.is_square() {
            return Err(NovikovError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }

        // Precondition from the contract: the determinant must be nonzero
        // detectably. For exact inputs this decides singularity outright.
        let det = self.det()?;
        if det.has_empty_support() {
            return match det.cutoff() {
                None => Err(NovikovError::SingularMatrix(
                    "determinant is exactly zero".into(),
                )),
                Some(c) => Err(NovikovError::InsufficientPrecision(format!(
                    "determinant vanishes up to T^{}; inversion undecidable at this precision",
                    format_ratio(c)
                ))),
            };
        }

        // Working-precision slack: pivot inversions and multiplications by
        // negative-valuation entries each move the determined range; retry
        // with more slack until the requested cutoff is reached.
        let min_val = self
            .entries
            .iter()
            .filter_map(NovikovScalar::valuation)
            .min()
            .cloned()
            .unwrap_or_else(BigRational::zero);
        let neg_span = if min_val < BigRational::zero() {
            -min_val
        } else {
            BigRational::zero()
        };
        let unit = BigRational::one() + BigRational::from_integer((n as i64).into()) * neg_span;

        let mut last_err = None;
        for attempt in 0..6u32 {
            let slack = &unit * BigRational::from_integer((1i64 << attempt).into())
                - &unit;
            let working = cutoff + &slack;
            match self.gauss_jordan(&working) {
                Ok(inv) => {
                    let ok = inv.entries.iter().all(|e| {
                        e.cutoff().map(|c| c >= cutoff).unwrap_or(true)
                    });
                    if ok {
                        return Ok(inv.map(|e| e.truncated(cutoff)));
                    }
                    last_err = Some(NovikovError::InsufficientPrecision(format!(
                        "inverse not determined through T^{} at working precision T^{}",
                        format_ratio(cutoff),
                        format_ratio(&working)
                    )));
                    if !self.entries.iter().all(NovikovScalar::is_exact) {
                        break;
                    }
                }
                Err(e @ NovikovError::InsufficientPrecision(_)) => {
                    last_err = Some(e);
                    if !self.entries.iter().all(NovikovScalar::is_exact) {
                        break;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or_else(|| {
            NovikovError::InsufficientPrecision("inversion failed to converge".into())
        }))
    }

    /// One Gauss–Jordan pass at a fixed working cutoff.
    fn gauss_jordan(&self, working: &Exponent) -> Result<Self, NovikovError> {
        let n = self.rows;
        let mut left = self.clone();
        let mut right = Self::identity(n);

        for col in 0..n {
            let pivot_row = Self::select_pivot(&left, col, col, n)?;
            if pivot_row != col {
                for j in 0..n {
                    left.entries.swap(col * n + j, pivot_row * n + j);
                    right.entries.swap(col * n + j, pivot_row * n + j);
                }
            }
            let pivot_inv = left.get(col, col).invert(working)?;
            for j in 0..n {
                left.set(col, j, left.get(col, j).mul(&pivot_inv));
                right.set(col, j, right.get(col, j).mul(&pivot_inv));
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let factor = left.get(i, col).clone();
                if factor.is_zero_exact() {
                    continue;
                }
                for j in 0..n {
                    let l = left.get(i, j).sub(&factor.mul(left.get(col, j)));
                    left.set(i, j, l);
                    let r = right.get(i, j).sub(&factor.mul(right.get(col, j)));
                    right.set(i, j, r);
                }
            }
        }
        Ok(right)
    }

    /// Choose the valuation-minimal pivot in `col` among rows
    /// `from..limit`, ties broken by lowest row index.
    fn select_pivot(
        m: &Self,
        col: usize,
        from: usize,
        limit: usize,
    ) -> Result<usize, NovikovError> {
        let mut best: Option<(Exponent, usize)> = None;
        let mut truncated_empty: Option<Exponent> = None;
        for i in from..limit {
            let entry = m.get(i, col);
            match entry.valuation() {
                Some(v) => {
                    let better = match &best {
                        None => true,
                        Some((bv, _)) => v < bv,
                    };
                    if better {
                        best = Some((v.clone(), i));
                    }
                }
                None => {
                    if let Some(c) = entry.cutoff() {
                        truncated_empty = Some(match truncated_empty {
                            None => c.clone(),
                            Some(t) => t.min(c.clone()),
                        });
                    }
                }
            }
        }
        match best {
            Some((v, i)) => {
                // A truncated empty entry with cutoff below the chosen
                // valuation could hide a smaller-valuation pivot.
                if let Some(t) = truncated_empty {
                    if t < v {
                        return Err(NovikovError::InsufficientPrecision(format!(
                            "pivot choice in column {col} undecided: an entry is \
                             zero only up to T^{} but the best pivot valuation is {}",
                            format_ratio(&t),
                            format_ratio(&v)
                        )));
                    }
                }
                Ok(i)
            }
            None => match truncated_empty {
                Some(t) => Err(NovikovError::InsufficientPrecision(format!(
                    "column {col} is zero up to T^{}; pivot existence undecidable",
                    format_ratio(&t)
                ))),
                None => Err(NovikovError::SingularMatrix(format!(
                    "column {col} is exactly zero below the pivot row"
                ))),
            },
        }
    }

    /// Rank over the field Λ by division-free elimination with
    /// valuation-minimal pivoting: rows are combined as
    /// `row_i ← pivot·row_i − entry_i·row_pivot`, which never divides and so
    /// keeps exact inputs exact.
    ///
    /// The result is certified when every decision was sound: each pivot is
    /// a stored (hence exactly known) nonzero term at an exponent within
    /// `cutoff` when one is supplied, and every entry passed over as zero is
    /// exactly zero. A truncated empty entry forces an uncertified result
    /// (the reported rank is then a lower bound).
    pub fn rank(&self, cutoff: Option<&Exponent>) -> RankResult {
        let mut m = self.clone();
        let mut certified = true;
        let mut pivot_row = 0usize;

        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            // Valuation-minimal stored pivot; record whether truncated
            // empties could hide a better one (rank is unaffected by pivot
            // choice, so that alone does not decertify).
            let mut best: Option<(Exponent, usize)> = None;
            let mut saw_truncated_empty = false;
            for i in pivot_row..m.rows {
                let entry = m.get(i, col);
                match entry.valuation() {
                    Some(v) => {
                        let better = match &best {
                            None => true,
                            Some((bv, _)) => v < bv,
                        };
                        if better {
                            best = Some((v.clone(), i));
                        }
                    }
                    None => {
                        if entry.cutoff().is_some() {
                            saw_truncated_empty = true;
                        }
                    }
                }
            }
            let Some((val, row)) = best else {
                if saw_truncated_empty {
                    // The column might still contain a pivot beyond the
                    // truncation; the zero decision is not determined.
                    certified = false;
                }
                continue;
            };
            if let Some(cut) = cutoff {
                if val > *cut {
                    certified = false;
                }
            }
            if row != pivot_row {
                for j in 0..m.cols {
                    m.entries.swap(pivot_row * m.cols + j, row * m.cols + j);
                }
            }
            let pivot = m.get(pivot_row, col).clone();
            for i in (pivot_row + 1)..m.rows {
                let entry = m.get(i, col).clone();
                if entry.is_zero_exact() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = pivot
                        .mul(m.get(i, j))
                        .sub(&entry.mul(m.get(pivot_row, j)));
                    m.set(i, j, v);
                }
            }
            pivot_row += 1;
        }
        RankResult {
            rank: pivot_row,
            certified,
        }
    }

    /// JSON form `{"matrix": [[scalar]]}` with compact entries.
    pub fn to_json(&self) -> Value {
        json!({
            "matrix": (0..self.rows)
                .map(|i| {
                    (0..self.cols)
                        .map(|j| self.get(i, j).to_json_compact())
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        })
    }

    /// Parse `{"matrix": [[scalar]]}` or a bare `[[scalar]]` array.
    pub fn from_json(value: &Value) -> Result<Self, String> {
        let grid = match value {
            Value::Object(obj) => obj
                .get("matrix")
                .ok_or_else(|| "matrix document needs a \"matrix\" key".to_string())?,
            v @ Value::Array(_) => v,
            other => return Err(format!("cannot read a matrix from {other}")),
        };
        let rows = grid
            .as_array()
            .ok_or_else(|| "\"matrix\" must be an array of rows".to_string())?;
        let mut parsed: Vec<Vec<NovikovScalar>> = Vec::with_capacity(rows.len());
        for row in rows {
            let cells = row
                .as_array()
                .ok_or_else(|| "matrix rows must be arrays".to_string())?;
            let mut r = Vec::with_capacity(cells.len());
            for cell in cells {
                r.push(NovikovScalar::from_json(cell)?);
            }
            parsed.push(r);
        }
        let width = parsed.first().map(Vec::len).unwrap_or(0);
        if parsed.iter().any(|r| r.len() != width) {
            return Err("matrix rows have unequal lengths".into());
        }
        Ok(Self::from_rows(parsed))
    }
}

impl fmt::Display for NovikovMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[ ")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}
