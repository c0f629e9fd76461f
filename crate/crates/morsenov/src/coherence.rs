//! Finite systems of rational counts over named critical points, closed
//! orbits, and weight classes.
//!
//! A [`CountSystem`] is pure bookkeeping: a table of gradings and indices
//! ([`IndexData`]), plus finitely many rational counts, each stored at the
//! tuple of identifiers it refers to. Index formulas dictate *where* a
//! count may be stored at all; three executable identities —
//! [`CountSystem::check_iota_claim`], [`CountSystem::check_h_claim`], and
//! [`CountSystem::check_triangularity`] — dictate how stored counts must
//! relate. A system that passes all three induces honest linear algebra:
//! [`CountSystem::build_maps`] assembles the differential, the two
//! comparison maps, the endomorphism `iota`, and the homotopy operator
//! over the Novikov field, with each count weighted by `T^{ω(A)}` for its
//! class `A`.
//!
//! [`morse_mirror`] runs the dictionary in reverse: it synthesises, from a
//! finite chain complex with integer differential, the unique minimal
//! count system whose induced `iota` is the identity — the fixture every
//! verification route must accept.
//!
//! [`run_pipeline`] chains everything: claims, map construction, the
//! chain-map and homotopy identities at matrix level (a second route over
//! the same data, deliberately not collapsed into the first), certified
//! invertibility, and finally the generator lower bound with its
//! replayable certificate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::chain::{
    arnold_bound, check_chain_map, check_chain_homotopy, ArnoldCertificate, ArnoldInputs,
    ChainComplex, ChainError, Degree, Generator, GradedModule, LinearMap,
};
use crate::homology::{rational_cycle_representatives, HomologyError};
use crate::novikov::{Exponent, NovikovMatrix, NovikovScalar};
use crate::ratio::{format_ratio, int_ratio, parse_ratio};
use crate::report::{VerificationReport, Violation};

/// The identifier every system's zero class must carry.
pub const ZERO_CLASS: &str = "0";

/// Errors from building, loading, or running a count system.
#[derive(Debug, Error)]
pub enum CoherenceError {
    /// A tuple referred to an identifier absent from the index data.
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    /// Structurally invalid data: duplicate ids, bad ranges, missing zero
    /// class, a non-additive sum table, or a malformed document.
    #[error("malformed count system: {0}")]
    Malformed(String),
    /// A count was stored at a tuple whose index formula forbids it; the
    /// message names the formula and its value.
    #[error("misplaced count: {0}")]
    MisplacedCount(String),
    /// A pipeline stage failed; `stage` names it.
    #[error("stage {stage:?} failed: {detail}")]
    Stage { stage: String, detail: String },
    /// A chain-level operation failed.
    #[error(transparent)]
    Chain(#[from] ChainError),
    /// Rational homology of the point complex could not be computed.
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// One weight class: an identifier, an integer `c1`, and an exact
/// rational weight `omega`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub id: String,
    pub c1: i64,
    pub omega: BigRational,
}

/// Gradings and indices for a system's three kinds of names: critical
/// points `p` with grading `|p|`, orbits `γ` with an integer `CZ(γ)`, and
/// weight classes `A` with `c1(A)` and `ω(A)`, together with a finite,
/// user-declared addition table on classes.
///
/// The table always contains the identity rows `0 + A = A + 0 = A`;
/// declared rows are symmetrised, and each must be additive in both `c1`
/// and `ω`. Pairs outside the table simply have no declared sum, and any
/// sum ranging over decompositions of a class treats them as contributing
/// nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexData {
    dim_m: i64,
    crit: Vec<(String, i64)>,
    orbits: Vec<(String, i64)>,
    classes: Vec<ClassInfo>,
    /// Declared rows, canonicalised: identity rows dropped, `a <= b`.
    declared_sums: Vec<(String, String, String)>,
    /// Full lookup table including identity rows and both orders.
    sums: BTreeMap<(String, String), String>,
    crit_grading: BTreeMap<String, i64>,
    orbit_cz: BTreeMap<String, i64>,
    class_info: BTreeMap<String, (i64, BigRational)>,
}

fn check_unique<'a>(kind: &str, ids: impl Iterator<Item = &'a str>) -> Result<(), CoherenceError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CoherenceError::Malformed(format!(
                "duplicate {kind} identifier {id:?}"
            )));
        }
    }
    Ok(())
}

impl IndexData {
    /// Validate and canonicalise index data.
    ///
    /// Requirements: `dim_m` even and positive; identifiers unique within
    /// each kind; every critical-point grading within `0..=dim_m`; a class
    /// named `"0"` with `c1 = 0` and `ω = 0`; every declared sum row
    /// additive in `c1` and `ω` and consistent with every other row.
    pub fn new(
        dim_m: i64,
        crit: Vec<(String, i64)>,
        orbits: Vec<(String, i64)>,
        classes: Vec<ClassInfo>,
        class_sums: Vec<(String, String, String)>,
    ) -> Result<Self, CoherenceError> {
        if dim_m <= 0 || dim_m % 2 != 0 {
            return Err(CoherenceError::Malformed(format!(
                "dim_M must be even and positive, got {dim_m}"
            )));
        }
        check_unique("critical-point", crit.iter().map(|(id, _)| id.as_str()))?;
        check_unique("orbit", orbits.iter().map(|(id, _)| id.as_str()))?;
        check_unique("class", classes.iter().map(|c| c.id.as_str()))?;
        for (id, g) in &crit {
            if *g < 0 || *g > dim_m {
                return Err(CoherenceError::Malformed(format!(
                    "critical point {id:?} has grading {g}, outside 0..={dim_m}"
                )));
            }
        }
        match classes.iter().find(|c| c.id == ZERO_CLASS) {
            None => {
                return Err(CoherenceError::Malformed(format!(
                    "classes must contain the zero class {ZERO_CLASS:?}"
                )))
            }
            Some(zero) => {
                if zero.c1 != 0 || !zero.omega.is_zero() {
                    return Err(CoherenceError::Malformed(format!(
                        "the zero class must have c1 = 0 and omega = 0, got c1 = {}, omega = {}",
                        zero.c1,
                        format_ratio(&zero.omega)
                    )));
                }
            }
        }

        let mut crit = crit;
        crit.sort();
        let mut orbits = orbits;
        orbits.sort();
        let mut classes = classes;
        classes.sort_by(|a, b| a.id.cmp(&b.id));

        let crit_grading: BTreeMap<String, i64> = crit.iter().cloned().collect();
        let orbit_cz: BTreeMap<String, i64> = orbits.iter().cloned().collect();
        let class_info: BTreeMap<String, (i64, BigRational)> = classes
            .iter()
            .map(|c| (c.id.clone(), (c.c1, c.omega.clone())))
            .collect();

        // Identity rows first, then declared rows, symmetrised; any
        // disagreement between rows for the same ordered pair is an error.
        let mut sums: BTreeMap<(String, String), String> = BTreeMap::new();
        for c in &classes {
            sums.insert((ZERO_CLASS.into(), c.id.clone()), c.id.clone());
            sums.insert((c.id.clone(), ZERO_CLASS.into()), c.id.clone());
        }
        let mut declared: BTreeSet<(String, String, String)> = BTreeSet::new();
        for (a, b, total) in &class_sums {
            for id in [a, b, total] {
                if !class_info.contains_key(id) {
                    return Err(CoherenceError::UnknownIdentifier(id.clone()));
                }
            }
            let (c1_a, om_a) = &class_info[a];
            let (c1_b, om_b) = &class_info[b];
            let (c1_t, om_t) = &class_info[total];
            if c1_a + c1_b != *c1_t || &(om_a + om_b) != om_t {
                return Err(CoherenceError::Malformed(format!(
                    "sum row {a} + {b} = {total} is not additive: c1 gives {} + {} = {} and omega gives {} + {} = {}",
                    c1_a, c1_b, c1_t,
                    format_ratio(om_a), format_ratio(om_b), format_ratio(om_t)
                )));
            }
            for (x, y) in [(a.clone(), b.clone()), (b.clone(), a.clone())] {
                if let Some(prev) = sums.get(&(x.clone(), y.clone())) {
                    if prev != total {
                        return Err(CoherenceError::Malformed(format!(
                            "conflicting sums for {x} + {y}: {prev} and {total}"
                        )));
                    }
                } else {
                    sums.insert((x, y), total.clone());
                }
            }
            if a != ZERO_CLASS && b != ZERO_CLASS {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                declared.insert((lo.clone(), hi.clone(), total.clone()));
            }
        }

        Ok(IndexData {
            dim_m,
            crit,
            orbits,
            classes,
            declared_sums: declared.into_iter().collect(),
            sums,
            crit_grading,
            orbit_cz,
            class_info,
        })
    }

    /// The even positive ambient dimension `dim_M`.
    pub fn dim_m(&self) -> i64 {
        self.dim_m
    }

    /// Critical points `(id, grading)`, sorted by id.
    pub fn crit(&self) -> &[(String, i64)] {
        &self.crit
    }

    /// Orbits `(id, CZ)`, sorted by id.
    pub fn orbits(&self) -> &[(String, i64)] {
        &self.orbits
    }

    /// Classes, sorted by id.
    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    /// Grading `|p|` of a critical point.
    pub fn grading(&self, p: &str) -> Result<i64, CoherenceError> {
        self.crit_grading
            .get(p)
            .copied()
            .ok_or_else(|| CoherenceError::UnknownIdentifier(p.into()))
    }

    /// `CZ(γ)` of an orbit.
    pub fn cz(&self, gamma: &str) -> Result<i64, CoherenceError> {
        self.orbit_cz
            .get(gamma)
            .copied()
            .ok_or_else(|| CoherenceError::UnknownIdentifier(gamma.into()))
    }

    /// `c1(A)` of a class.
    pub fn c1(&self, a: &str) -> Result<i64, CoherenceError> {
        self.class_info
            .get(a)
            .map(|(c1, _)| *c1)
            .ok_or_else(|| CoherenceError::UnknownIdentifier(a.into()))
    }

    /// `ω(A)` of a class.
    pub fn omega(&self, a: &str) -> Result<BigRational, CoherenceError> {
        self.class_info
            .get(a)
            .map(|(_, om)| om.clone())
            .ok_or_else(|| CoherenceError::UnknownIdentifier(a.into()))
    }

    /// The declared sum `a + b`, if the table has one (identity rows
    /// included).
    pub fn class_sum(&self, a: &str, b: &str) -> Option<&str> {
        self.sums
            .get(&(a.to_string(), b.to_string()))
            .map(String::as_str)
    }

    /// All ordered pairs `(a_plus, a_minus)` whose declared sum is `a`,
    /// in sorted order.
    pub fn decompositions(&self, a: &str) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for x in &self.classes {
            for y in &self.classes {
                if self.class_sum(&x.id, &y.id) == Some(a) {
                    out.push((x.id.clone(), y.id.clone()));
                }
            }
        }
        out
    }

    /// `index_pss(p, γ, A) = CZ(γ) + 2·c1(A) − dim_M/2 + |p|`.
    pub fn index_pss(&self, p: &str, gamma: &str, a: &str) -> Result<i64, CoherenceError> {
        Ok(self.cz(gamma)? + 2 * self.c1(a)? - self.dim_m / 2 + self.grading(p)?)
    }

    /// `index_ssp(γ, p, A) = −CZ(γ) + 2·c1(A) + dim_M/2 − |p|`.
    pub fn index_ssp(&self, gamma: &str, p: &str, a: &str) -> Result<i64, CoherenceError> {
        Ok(-self.cz(gamma)? + 2 * self.c1(a)? + self.dim_m / 2 - self.grading(p)?)
    }

    /// `index_iota(p₋, p₊, A) = 2·c1(A) + |p₋| − |p₊|`.
    pub fn index_iota(&self, p_minus: &str, p_plus: &str, a: &str) -> Result<i64, CoherenceError> {
        Ok(2 * self.c1(a)? + self.grading(p_minus)? - self.grading(p_plus)?)
    }

    /// `index_h(p₋, p₊, A) = index_iota(p₋, p₊, A) + 1`.
    pub fn index_h(&self, p_minus: &str, p_plus: &str, a: &str) -> Result<i64, CoherenceError> {
        Ok(self.index_iota(p_minus, p_plus, a)? + 1)
    }
}

/// `(−1)^g` as an exact rational.
fn grading_sign(g: i64) -> BigRational {
    if g.rem_euclid(2) == 1 {
        int_ratio(-1)
    } else {
        int_ratio(1)
    }
}

type PairKey = (String, String);
type TripleKey = (String, String, String);

/// A finite system of counts over an [`IndexData`].
///
/// Five families are stored, each only at tuples where its index formula
/// evaluates to the required value (the setters reject anything else,
/// naming the formula):
///
/// | family    | tuple          | stored at                  |
/// |-----------|----------------|----------------------------|
/// | `m`       | `(p, q)`       | `\|p\| − \|q\| = 1`        |
/// | `z_iota`  | `(p₋, p₊, A)`  | `index_iota = 0`           |
/// | `z_plus`  | `(p, γ, A)`    | `index_pss = 0`            |
/// | `z_minus` | `(γ, p, A)`    | `index_ssp = 0`            |
/// | `z_h`     | `(p₋, p₊, A)`  | `index_h = 0`              |
///
/// Lookups at unstored tuples return zero. Serialisation is deterministic:
/// tuples are kept sorted, and [`CountSystem::to_json`] of equal systems is
/// byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSystem {
    index: IndexData,
    morse_counts: BTreeMap<PairKey, i64>,
    iota_counts: BTreeMap<TripleKey, BigRational>,
    plus_counts: BTreeMap<TripleKey, BigRational>,
    minus_counts: BTreeMap<TripleKey, BigRational>,
    h_counts: BTreeMap<TripleKey, BigRational>,
}

/// The linear algebra a count system induces over the Novikov field.
///
/// `points` is the graded module on the critical points (sorted by id, so
/// every matrix below is in lexicographic basis order); `orbits` is the
/// ungraded module on the orbits. Each count contributes its value times
/// `T^{ω(A)}` to one matrix entry. `iota` and `pss` are emitted through
/// [`LinearMap::sign_adjust`]; `ssp`, `h`, and `d` are the raw tables.
#[derive(Debug, Clone)]
pub struct BuiltMaps {
    pub points: GradedModule,
    pub orbits: GradedModule,
    /// Degree −1 endomorphism of `points` with integer entries.
    pub d: LinearMap,
    /// `points → orbits`, column signs adjusted by source grading.
    pub pss: LinearMap,
    /// `orbits → points`, raw.
    pub ssp: LinearMap,
    /// Endomorphism of `points`, column signs adjusted by source grading.
    pub iota: LinearMap,
    /// Endomorphism of `points`, raw.
    pub h: LinearMap,
}

impl CountSystem {
    /// An empty system over the given index data.
    pub fn new(index: IndexData) -> Self {
        CountSystem {
            index,
            morse_counts: BTreeMap::new(),
            iota_counts: BTreeMap::new(),
            plus_counts: BTreeMap::new(),
            minus_counts: BTreeMap::new(),
            h_counts: BTreeMap::new(),
        }
    }

    /// The index data the counts live over.
    pub fn index_data(&self) -> &IndexData {
        &self.index
    }

    /// Store `m(p, q)`; requires `|p| − |q| = 1`.
    pub fn set_morse(&mut self, p: &str, q: &str, count: i64) -> Result<(), CoherenceError> {
        let drop = self.index.grading(p)? - self.index.grading(q)?;
        if drop != 1 {
            return Err(CoherenceError::MisplacedCount(format!(
                "m({p}, {q}) sits at grading drop |p| - |q| = {drop}; \
                 m counts must be stored at |p| - |q| = 1"
            )));
        }
        self.morse_counts.insert((p.into(), q.into()), count);
        Ok(())
    }

    /// Store `z_iota(p₋, p₊, A)`; requires `index_iota = 0`.
    pub fn set_z_iota(
        &mut self,
        p_minus: &str,
        p_plus: &str,
        a: &str,
        count: BigRational,
    ) -> Result<(), CoherenceError> {
        let idx = self.index.index_iota(p_minus, p_plus, a)?;
        if idx != 0 {
            return Err(CoherenceError::MisplacedCount(format!(
                "z_iota({p_minus}, {p_plus}, {a}) sits at \
                 index_iota = 2*c1(A) + |p_minus| - |p_plus| = {idx}; \
                 z_iota counts must be stored at index_iota = 0"
            )));
        }
        self.iota_counts
            .insert((p_minus.into(), p_plus.into(), a.into()), count);
        Ok(())
    }

    /// Store `z_plus(p, γ, A)`; requires `index_pss = 0`.
    pub fn set_z_plus(
        &mut self,
        p: &str,
        gamma: &str,
        a: &str,
        count: BigRational,
    ) -> Result<(), CoherenceError> {
        let idx = self.index.index_pss(p, gamma, a)?;
        if idx != 0 {
            return Err(CoherenceError::MisplacedCount(format!(
                "z_plus({p}, {gamma}, {a}) sits at \
                 index_pss = CZ(gamma) + 2*c1(A) - dim_M/2 + |p| = {idx}; \
                 z_plus counts must be stored at index_pss = 0"
            )));
        }
        self.plus_counts
            .insert((p.into(), gamma.into(), a.into()), count);
        Ok(())
    }

    /// Store `z_minus(γ, p, A)`; requires `index_ssp = 0`.
    pub fn set_z_minus(
        &mut self,
        gamma: &str,
        p: &str,
        a: &str,
        count: BigRational,
    ) -> Result<(), CoherenceError> {
        let idx = self.index.index_ssp(gamma, p, a)?;
        if idx != 0 {
            return Err(CoherenceError::MisplacedCount(format!(
                "z_minus({gamma}, {p}, {a}) sits at \
                 index_ssp = -CZ(gamma) + 2*c1(A) + dim_M/2 - |p| = {idx}; \
                 z_minus counts must be stored at index_ssp = 0"
            )));
        }
        self.minus_counts
            .insert((gamma.into(), p.into(), a.into()), count);
        Ok(())
    }

    /// Store `z_h(p₋, p₊, A)`; requires `index_h = 0`.
    pub fn set_z_h(
        &mut self,
        p_minus: &str,
        p_plus: &str,
        a: &str,
        count: BigRational,
    ) -> Result<(), CoherenceError> {
        let idx = self.index.index_h(p_minus, p_plus, a)?;
        if idx != 0 {
            return Err(CoherenceError::MisplacedCount(format!(
                "z_h({p_minus}, {p_plus}, {a}) sits at \
                 index_h = index_iota + 1 = {idx}; \
                 z_h counts must be stored at index_h = 0"
            )));
        }
        self.h_counts
            .insert((p_minus.into(), p_plus.into(), a.into()), count);
        Ok(())
    }

    /// `m(p, q)`, zero when unstored.
    pub fn morse(&self, p: &str, q: &str) -> i64 {
        self.morse_counts
            .get(&(p.to_string(), q.to_string()))
            .copied()
            .unwrap_or(0)
    }

    fn triple(
        map: &BTreeMap<TripleKey, BigRational>,
        a: &str,
        b: &str,
        c: &str,
    ) -> BigRational {
        map.get(&(a.to_string(), b.to_string(), c.to_string()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// `z_iota(p₋, p₊, A)`, zero when unstored.
    pub fn z_iota(&self, p_minus: &str, p_plus: &str, a: &str) -> BigRational {
        Self::triple(&self.iota_counts, p_minus, p_plus, a)
    }

    /// `z_plus(p, γ, A)`, zero when unstored.
    pub fn z_plus(&self, p: &str, gamma: &str, a: &str) -> BigRational {
        Self::triple(&self.plus_counts, p, gamma, a)
    }

    /// `z_minus(γ, p, A)`, zero when unstored.
    pub fn z_minus(&self, gamma: &str, p: &str, a: &str) -> BigRational {
        Self::triple(&self.minus_counts, gamma, p, a)
    }

    /// `z_h(p₋, p₊, A)`, zero when unstored.
    pub fn z_h(&self, p_minus: &str, p_plus: &str, a: &str) -> BigRational {
        Self::triple(&self.h_counts, p_minus, p_plus, a)
    }

    /// Check, at every tuple `(p₋, p₊, A)` with `index_iota = 1`, that
    ///
    /// ```text
    /// Σ_{|q| = |p₋|−1} m(p₋, q)·z_iota(q, p₊, A)
    ///   + Σ_{|q| = |p₊|+1} z_iota(p₋, q, A)·m(q, p₊)  =  0.
    /// ```
    pub fn check_iota_claim(&self) -> VerificationReport {
        let idx = &self.index;
        let mut violations = Vec::new();
        for (pm, g_minus) in idx.crit() {
            for (pp, g_plus) in idx.crit() {
                for class in idx.classes() {
                    let a = &class.id;
                    if 2 * class.c1 + g_minus - g_plus != 1 {
                        continue;
                    }
                    let mut residual = BigRational::zero();
                    for (q, g_q) in idx.crit() {
                        if *g_q == g_minus - 1 {
                            residual +=
                                int_ratio(self.morse(pm, q)) * self.z_iota(q, pp, a);
                        }
                        if *g_q == g_plus + 1 {
                            residual +=
                                self.z_iota(pm, q, a) * int_ratio(self.morse(q, pp));
                        }
                    }
                    if !residual.is_zero() {
                        violations.push(Violation::new(
                            [pm.as_str(), pp.as_str(), a.as_str()],
                            format_ratio(&residual),
                        ));
                    }
                }
            }
        }
        VerificationReport::new("iota-claim", violations)
    }

    /// Check, at every tuple `(p₋, p₊, A)` with `index_h = 1`, that
    ///
    /// ```text
    /// (−1)^{|p₋|} z_iota(p₋, p₊, A)
    ///   = (−1)^{|p₋|} Σ_{γ, A₊+A₋=A} z_plus(p₋, γ, A₊)·z_minus(γ, p₊, A₋)
    ///     + Σ_q z_h(p₋, q, A)·m(q, p₊) + Σ_q m(p₋, q)·z_h(q, p₊, A),
    /// ```
    ///
    /// where the middle sum ranges over ordered pairs in the declared
    /// addition table (pairs with no declared sum contribute nothing).
    pub fn check_h_claim(&self) -> VerificationReport {
        let idx = &self.index;
        let mut violations = Vec::new();
        for (pm, g_minus) in idx.crit() {
            for (pp, g_plus) in idx.crit() {
                for class in idx.classes() {
                    let a = &class.id;
                    if 2 * class.c1 + g_minus - g_plus + 1 != 1 {
                        continue;
                    }
                    let sign = grading_sign(*g_minus);
                    let mut rhs = BigRational::zero();
                    for (a_plus, a_minus) in idx.decompositions(a) {
                        for (gamma, _) in idx.orbits() {
                            rhs += &sign
                                * self.z_plus(pm, gamma, &a_plus)
                                * self.z_minus(gamma, pp, &a_minus);
                        }
                    }
                    for (q, _) in idx.crit() {
                        rhs += self.z_h(pm, q, a) * int_ratio(self.morse(q, pp));
                        rhs += int_ratio(self.morse(pm, q)) * self.z_h(q, pp, a);
                    }
                    let residual = &sign * self.z_iota(pm, pp, a) - rhs;
                    if !residual.is_zero() {
                        violations.push(Violation::new(
                            [pm.as_str(), pp.as_str(), a.as_str()],
                            format_ratio(&residual),
                        ));
                    }
                }
            }
        }
        VerificationReport::new("h-claim", violations)
    }

    /// Check the three conditions that make the induced `iota` matrix
    /// unit-triangular with respect to valuation:
    ///
    /// 1. `z_iota(p₋, p₊, A) = 0` whenever `A ≠ 0` and `ω(A) ≤ 0`;
    /// 2. `z_iota(p₋, p₊, 0) = 0` whenever `p₋ ≠ p₊`;
    /// 3. `z_iota(p, p, 0) ≠ 0` for every critical point `p`.
    pub fn check_triangularity(&self) -> VerificationReport {
        let idx = &self.index;
        let mut violations = Vec::new();
        for ((pm, pp, a), value) in &self.iota_counts {
            if value.is_zero() {
                continue;
            }
            if a != ZERO_CLASS {
                let omega = idx.omega(a).expect("stored class is known");
                if !omega.is_positive() {
                    violations.push(Violation::new(
                        [pm.as_str(), pp.as_str(), a.as_str()],
                        format_ratio(value),
                    ));
                }
            } else if pm != pp {
                violations.push(Violation::new(
                    [pm.as_str(), pp.as_str(), a.as_str()],
                    format_ratio(value),
                ));
            }
        }
        for (p, _) in idx.crit() {
            if self.z_iota(p, p, ZERO_CLASS).is_zero() {
                violations.push(Violation::new([p.as_str(), p.as_str(), ZERO_CLASS], "0"));
            }
        }
        VerificationReport::new("triangularity", violations)
    }

    /// The three claim checks, in their canonical order.
    pub fn check_claims(&self) -> Vec<VerificationReport> {
        vec![
            self.check_iota_claim(),
            self.check_h_claim(),
            self.check_triangularity(),
        ]
    }

    /// Assemble the induced linear algebra over the Novikov field.
    ///
    /// Basis order is lexicographic in both modules. Every count
    /// contributes `count · T^{ω(A)}` to the entry `(target, source)` its
    /// tuple names; `d` uses the integer `m` counts without weights and is
    /// checked homogeneous of degree −1.
    pub fn build_maps(&self) -> Result<BuiltMaps, CoherenceError> {
        let idx = &self.index;
        let points = GradedModule::new(
            idx.crit()
                .iter()
                .map(|(id, g)| Generator::new(id.clone(), *g))
                .collect(),
        )?;
        let orbits = GradedModule::new(
            idx.orbits()
                .iter()
                .map(|(id, _)| Generator::ungraded(id.clone()))
                .collect(),
        )?;
        let point_pos: BTreeMap<&str, usize> = idx
            .crit()
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.as_str(), i))
            .collect();
        let orbit_pos: BTreeMap<&str, usize> = idx
            .orbits()
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.as_str(), i))
            .collect();
        let n = points.rank();
        let k = orbits.rank();

        let mut d_mat = NovikovMatrix::zero(n, n);
        for ((p, q), count) in &self.morse_counts {
            d_mat.set(
                point_pos[q.as_str()],
                point_pos[p.as_str()],
                NovikovScalar::from_int(*count),
            );
        }

        let weighted = |mat: &mut NovikovMatrix, row: usize, col: usize, a: &str, v: &BigRational| {
            let omega: Exponent = idx.omega(a).expect("stored class is known");
            let term = NovikovScalar::monomial(omega, v.clone());
            let sum = mat.get(row, col).add(&term);
            mat.set(row, col, sum);
        };

        let mut iota_mat = NovikovMatrix::zero(n, n);
        for ((pm, pp, a), v) in &self.iota_counts {
            weighted(
                &mut iota_mat,
                point_pos[pp.as_str()],
                point_pos[pm.as_str()],
                a,
                v,
            );
        }
        let mut pss_mat = NovikovMatrix::zero(k, n);
        for ((p, gamma, a), v) in &self.plus_counts {
            weighted(
                &mut pss_mat,
                orbit_pos[gamma.as_str()],
                point_pos[p.as_str()],
                a,
                v,
            );
        }
        let mut ssp_mat = NovikovMatrix::zero(n, k);
        for ((gamma, p, a), v) in &self.minus_counts {
            weighted(
                &mut ssp_mat,
                point_pos[p.as_str()],
                orbit_pos[gamma.as_str()],
                a,
                v,
            );
        }
        let mut h_mat = NovikovMatrix::zero(n, n);
        for ((pm, pp, a), v) in &self.h_counts {
            weighted(
                &mut h_mat,
                point_pos[pp.as_str()],
                point_pos[pm.as_str()],
                a,
                v,
            );
        }

        let d = LinearMap::new(points.clone(), points.clone(), Degree::Graded(-1), d_mat)?;
        let iota = LinearMap::new(points.clone(), points.clone(), Degree::Ungraded, iota_mat)?
            .sign_adjust()?;
        let pss = LinearMap::new(points.clone(), orbits.clone(), Degree::Ungraded, pss_mat)?
            .sign_adjust()?;
        let ssp = LinearMap::new(orbits.clone(), points.clone(), Degree::Ungraded, ssp_mat)?;
        let h = LinearMap::new(points.clone(), points.clone(), Degree::Ungraded, h_mat)?;
        Ok(BuiltMaps {
            points,
            orbits,
            d,
            pss,
            ssp,
            iota,
            h,
        })
    }

    /// Deterministic JSON form; equal systems serialise byte-identically.
    ///
    /// ```text
    /// {
    ///   "dim_M": 2,
    ///   "crit":       [{"id": "p0", "index": 2}, ...],
    ///   "orbits":     [{"id": "gamma_p0", "cz": -1}, ...],
    ///   "classes":    [{"id": "0", "c1": 0, "omega": "0"}, ...],
    ///   "class_sums": [{"a": "A", "b": "B", "sum": "C"}, ...],
    ///   "morse":      [{"from": "p1", "to": "p3", "count": 0}, ...],
    ///   "z_iota":     [{"from": "p0", "to": "p0", "class": "0", "count": "1"}, ...],
    ///   "z_plus":     [...], "z_minus": [...], "z_h": [...]
    /// }
    /// ```
    pub fn to_json(&self) -> Value {
        let idx = &self.index;
        let triples = |map: &BTreeMap<TripleKey, BigRational>| -> Vec<Value> {
            map.iter()
                .map(|((a, b, c), v)| {
                    json!({ "from": a, "to": b, "class": c, "count": format_ratio(v) })
                })
                .collect()
        };
        json!({
            "dim_M": idx.dim_m,
            "crit": idx.crit.iter()
                .map(|(id, g)| json!({ "id": id, "index": g }))
                .collect::<Vec<_>>(),
            "orbits": idx.orbits.iter()
                .map(|(id, cz)| json!({ "id": id, "cz": cz }))
                .collect::<Vec<_>>(),
            "classes": idx.classes.iter()
                .map(|c| json!({ "id": c.id, "c1": c.c1, "omega": format_ratio(&c.omega) }))
                .collect::<Vec<_>>(),
            "class_sums": idx.declared_sums.iter()
                .map(|(a, b, s)| json!({ "a": a, "b": b, "sum": s }))
                .collect::<Vec<_>>(),
            "morse": self.morse_counts.iter()
                .map(|((p, q), c)| json!({ "from": p, "to": q, "count": c }))
                .collect::<Vec<_>>(),
            "z_iota": triples(&self.iota_counts),
            "z_plus": triples(&self.plus_counts),
            "z_minus": triples(&self.minus_counts),
            "z_h": triples(&self.h_counts),
        })
    }

    /// Load a system from the JSON form produced by
    /// [`CountSystem::to_json`]. Unknown top-level or row fields are
    /// rejected; counts stored at tuples their index formula forbids are
    /// rejected with the formula named; array order in the document is
    /// irrelevant (the result is canonicalised).
    pub fn from_json(value: &Value) -> Result<Self, CoherenceError> {
        let obj = as_object(value, "count system")?;
        const KNOWN: [&str; 10] = [
            "dim_M", "crit", "orbits", "classes", "class_sums", "morse", "z_iota", "z_plus",
            "z_minus", "z_h",
        ];
        for key in obj.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(CoherenceError::Malformed(format!(
                    "unrecognised field {key:?} (known fields: {})",
                    KNOWN.join(", ")
                )));
            }
        }
        let dim_m = obj
            .get("dim_M")
            .and_then(Value::as_i64)
            .ok_or_else(|| CoherenceError::Malformed("dim_M must be an integer".into()))?;

        let mut crit = Vec::new();
        for row in rows(obj, "crit")? {
            let row = RowReader::new(row, "crit", &["id", "index"])?;
            crit.push((row.string("id")?, row.integer("index")?));
        }
        let mut orbits = Vec::new();
        for row in rows(obj, "orbits")? {
            let row = RowReader::new(row, "orbits", &["id", "cz"])?;
            orbits.push((row.string("id")?, row.integer("cz")?));
        }
        let mut classes = Vec::new();
        for row in rows(obj, "classes")? {
            let row = RowReader::new(row, "classes", &["id", "c1", "omega"])?;
            classes.push(ClassInfo {
                id: row.string("id")?,
                c1: row.integer("c1")?,
                omega: row.rational("omega")?,
            });
        }
        let mut class_sums = Vec::new();
        for row in rows(obj, "class_sums")? {
            let row = RowReader::new(row, "class_sums", &["a", "b", "sum"])?;
            class_sums.push((row.string("a")?, row.string("b")?, row.string("sum")?));
        }
        let index = IndexData::new(dim_m, crit, orbits, classes, class_sums)?;
        let mut system = CountSystem::new(index);

        for row in rows(obj, "morse")? {
            let row = RowReader::new(row, "morse", &["from", "to", "count"])?;
            let (p, q) = (row.string("from")?, row.string("to")?);
            if system.morse_counts.contains_key(&(p.clone(), q.clone())) {
                return Err(CoherenceError::Malformed(format!(
                    "duplicate morse row ({p}, {q})"
                )));
            }
            system.set_morse(&p, &q, row.integer("count")?)?;
        }
        type Setter = fn(&mut CountSystem, &str, &str, &str, BigRational) -> Result<(), CoherenceError>;
        let families: [(&str, Setter); 4] = [
            ("z_iota", CountSystem::set_z_iota),
            ("z_plus", CountSystem::set_z_plus),
            ("z_minus", CountSystem::set_z_minus),
            ("z_h", CountSystem::set_z_h),
        ];
        for (field, set) in families {
            let mut seen = BTreeSet::new();
            for row in rows(obj, field)? {
                let row = RowReader::new(row, field, &["from", "to", "class", "count"])?;
                let key = (row.string("from")?, row.string("to")?, row.string("class")?);
                if !seen.insert(key.clone()) {
                    return Err(CoherenceError::Malformed(format!(
                        "duplicate {field} row ({}, {}, {})",
                        key.0, key.1, key.2
                    )));
                }
                set(&mut system, &key.0, &key.1, &key.2, row.rational("count")?)?;
            }
        }
        Ok(system)
    }
}

fn as_object<'v>(value: &'v Value, what: &str) -> Result<&'v Map<String, Value>, CoherenceError> {
    value
        .as_object()
        .ok_or_else(|| CoherenceError::Malformed(format!("{what} must be a JSON object")))
}

/// The rows of an array field; a missing field reads as empty.
fn rows<'v>(
    obj: &'v Map<String, Value>,
    field: &str,
) -> Result<Vec<&'v Value>, CoherenceError> {
    match obj.get(field) {
        None => Ok(Vec::new()),
        Some(v) => v
            .as_array()
            .map(|a| a.iter().collect())
            .ok_or_else(|| CoherenceError::Malformed(format!("{field} must be an array"))),
    }
}

/// Strict reader for one row object: every listed field must be present
/// and typed, and no other field may appear.
struct RowReader<'v> {
    obj: &'v Map<String, Value>,
    context: &'static str,
}

impl<'v> RowReader<'v> {
    fn new(
        row: &'v Value,
        context: &'static str,
        fields: &[&str],
    ) -> Result<Self, CoherenceError> {
        let obj = as_object(row, context)?;
        for key in obj.keys() {
            if !fields.contains(&key.as_str()) {
                return Err(CoherenceError::Malformed(format!(
                    "unrecognised field {key:?} in a {context} row (expected: {})",
                    fields.join(", ")
                )));
            }
        }
        for field in fields {
            if !obj.contains_key(*field) {
                return Err(CoherenceError::Malformed(format!(
                    "a {context} row is missing the field {field:?}"
                )));
            }
        }
        Ok(RowReader { obj, context })
    }

    fn string(&self, field: &str) -> Result<String, CoherenceError> {
        self.obj
            .get(field)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                CoherenceError::Malformed(format!(
                    "{field} in a {} row must be a string",
                    self.context
                ))
            })
    }

    fn integer(&self, field: &str) -> Result<i64, CoherenceError> {
        self.obj.get(field).and_then(Value::as_i64).ok_or_else(|| {
            CoherenceError::Malformed(format!(
                "{field} in a {} row must be an integer",
                self.context
            ))
        })
    }

    /// A rational, written either as an integer or as a `"p/q"` string.
    fn rational(&self, field: &str) -> Result<BigRational, CoherenceError> {
        let v = self.obj.get(field).expect("field presence already checked");
        if let Some(n) = v.as_i64() {
            return Ok(int_ratio(n));
        }
        v.as_str()
            .and_then(parse_ratio)
            .ok_or_else(|| {
                CoherenceError::Malformed(format!(
                    "{field} in a {} row must be an integer or a \"p/q\" string",
                    self.context
                ))
            })
    }
}

/// Synthesise the minimal count system of a finite chain complex with
/// integer differential: one orbit per critical point with
/// `CZ(γ_p) = dim_M/2 − |p|`, the zero class only, and counts
///
/// ```text
/// z_iota(p, p, 0) = (−1)^{|p|},   z_plus(p, γ_p, 0) = (−1)^{|p|},
/// z_minus(γ_p, p, 0) = 1,         z_h = 0,
/// ```
///
/// with `m` read off the differential. `dim_M` is the maximal grading
/// rounded up to even, at least 2. The result passes all three claim
/// checks and induces `iota = id`, `ssp ∘ pss = id`, `h = 0`.
pub fn morse_mirror(complex: &ChainComplex) -> Result<CountSystem, CoherenceError> {
    let module = complex.module();
    let crit: Vec<(String, i64)> = module
        .generators()
        .iter()
        .map(|g| {
            let grading = g.grading.expect("chain complexes are fully graded");
            (g.id.clone(), grading)
        })
        .collect();
    let max_grading = crit.iter().map(|(_, g)| *g).max().unwrap_or(0);
    let dim_m = (max_grading + max_grading.rem_euclid(2)).max(2);
    let orbits: Vec<(String, i64)> = crit
        .iter()
        .map(|(id, g)| (format!("gamma_{id}"), dim_m / 2 - g))
        .collect();
    let classes = vec![ClassInfo {
        id: ZERO_CLASS.into(),
        c1: 0,
        omega: BigRational::zero(),
    }];
    let index = IndexData::new(dim_m, crit.clone(), orbits, classes, Vec::new())?;
    let mut system = CountSystem::new(index);

    let matrix = complex.differential().matrix();
    for (p, _) in &crit {
        for (q, _) in &crit {
            let entry = matrix.get(
                module.index_of(q).expect("generator is in its own module"),
                module.index_of(p).expect("generator is in its own module"),
            );
            if entry.is_zero_exact() {
                continue;
            }
            let count = entry
                .as_constant()
                .filter(|c| c.is_integer())
                .and_then(|c| c.to_integer().to_i64())
                .ok_or_else(|| {
                    CoherenceError::Malformed(format!(
                        "mirror requires an integer differential, but d[{q}, {p}] = {entry}"
                    ))
                })?;
            system.set_morse(p, q, count)?;
        }
    }
    for (p, g) in &crit {
        let sign = grading_sign(*g);
        let gamma = format!("gamma_{p}");
        system.set_z_iota(p, p, ZERO_CLASS, sign.clone())?;
        system.set_z_plus(p, &gamma, ZERO_CLASS, sign)?;
        system.set_z_minus(&gamma, p, ZERO_CLASS, int_ratio(1))?;
    }
    Ok(system)
}

/// The aggregate outcome of [`run_pipeline`]: every stage report in the
/// order it ran, the replayable bound certificate, and the bound itself.
#[derive(Debug, Clone)]
pub struct PipelineVerdict {
    /// Reports in stage order: iota-claim, h-claim, triangularity,
    /// chain-map, iota-invertibility, chain-homotopy. All passing — a
    /// failing stage aborts the pipeline instead.
    pub reports: Vec<VerificationReport>,
    /// The replayed hypothesis chain behind the bound.
    pub certificate: ArnoldCertificate,
    /// The derived lower bound on generator count.
    pub bound: usize,
}

impl PipelineVerdict {
    /// `{"bound", "certificate", "stages"}` with deterministic ordering.
    pub fn to_json(&self) -> Value {
        json!({
            "bound": self.bound,
            "certificate": self.certificate.to_json(),
            "stages": self.reports.iter().map(VerificationReport::to_json).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for PipelineVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for report in &self.reports {
            writeln!(f, "{}", report.summary())?;
        }
        write!(f, "bound: {}", self.bound)
    }
}

fn stage_err(stage: &str, detail: impl ToString) -> CoherenceError {
    CoherenceError::Stage {
        stage: stage.into(),
        detail: detail.to_string(),
    }
}

/// Run the whole verification chain on a count system and derive the
/// generator lower bound.
///
/// Stages, in order, each aborting with its name on failure:
///
/// 1. `iota-claim`, `h-claim`, `triangularity` — the count identities;
/// 2. `build-maps` — assembly of the induced linear algebra;
/// 3. `differential` — `d ∘ d = 0` for the point complex;
/// 4. `chain-map` — `iota ∘ d = d ∘ iota` at matrix level;
/// 5. `invertibility` — the valuation criterion on `iota`'s matrix in
///    lexicographic basis order (its hypotheses are exactly what
///    triangularity establishes);
/// 6. `chain-homotopy` — `iota − ssp∘pss = d∘h + h∘d` at matrix level;
/// 7. `arnold-bound` — cycle representatives from the rational point
///    complex, then the certified bound `Σ betti`.
///
/// The matrix-level checks re-verify at a coarser resolution what the
/// claim checks verified per class; both routes run unconditionally.
pub fn run_pipeline(
    system: &CountSystem,
    betti: &[usize],
    cutoff: &Exponent,
) -> Result<PipelineVerdict, CoherenceError> {
    let mut reports = Vec::new();
    for report in system.check_claims() {
        if !report.passed() {
            return Err(stage_err(report.identity(), report.summary()));
        }
        reports.push(report);
    }

    let maps = system
        .build_maps()
        .map_err(|e| stage_err("build-maps", e))?;
    let complex = ChainComplex::new(maps.points.clone(), maps.d.clone())
        .map_err(|e| stage_err("differential", e))?;

    let chain_map = check_chain_map(&maps.iota, &maps.d, &maps.d, cutoff)
        .map_err(|e| stage_err("chain-map", e))?;
    if !chain_map.passed() {
        return Err(stage_err("chain-map", chain_map.summary()));
    }
    reports.push(chain_map);

    let criterion = maps
        .iota
        .matrix()
        .invertibility_criterion()
        .map_err(|e| stage_err("invertibility", e))?;
    if !criterion.holds() {
        return Err(stage_err(
            "invertibility",
            criterion
                .violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    reports.push(VerificationReport::new("iota-invertibility", Vec::new()));

    let round_trip = maps
        .ssp
        .after(&maps.pss)
        .map_err(|e| stage_err("chain-homotopy", e))?;
    let homotopy = check_chain_homotopy(&maps.iota, &round_trip, &maps.h, &maps.d, &maps.d, cutoff)
        .map_err(|e| stage_err("chain-homotopy", e))?;
    if !homotopy.passed() {
        return Err(stage_err("chain-homotopy", homotopy.summary()));
    }
    reports.push(homotopy);

    let representatives =
        rational_cycle_representatives(&complex).map_err(|e| stage_err("arnold-bound", e))?;
    let cycles: Vec<Vec<NovikovScalar>> = representatives
        .iter()
        .map(|(_, column)| crate::chain::rational_chain(column))
        .collect();
    let certificate = arnold_bound(&ArnoldInputs {
        betti,
        cycles: &cycles,
        pss: &maps.pss,
        ssp: &maps.ssp,
        iota: &maps.iota,
        homotopy: &maps.h,
        d: &maps.d,
        cutoff: cutoff.clone(),
    })
    .map_err(|e| stage_err("arnold-bound", e))?;

    Ok(PipelineVerdict {
        reports,
        bound: certificate.bound,
        certificate,
    })
}
