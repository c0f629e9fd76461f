//! Finite graded modules, linear maps, and chain-level verification.
//!
//! A [`GradedModule`] is a finite free module with named generators, each
//! optionally carrying an integer grading (and, for complexes produced by
//! the flow engine, the coordinates of the underlying critical point). A
//! [`LinearMap`] stores its source and target modules, a degree tag, and a
//! matrix of Novikov scalars whose column `j` is the image of the `j`-th
//! source generator. [`ChainComplex`] packages a module with a square-zero
//! degree −1 differential.
//!
//! On top of these the module provides the checks the verification pipeline
//! replays mechanically: chain-map and anticommutation residuals,
//! chain-homotopy residuals, certified ranks over the Novikov field, and
//! [`arnold_bound`], which chains the checks into a lower bound for the
//! number of generators of a complex mapped onto by the given cycles.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::novikov::{
    Exponent, NovikovError, NovikovMatrix, NovikovScalar, RankResult,
};
use crate::report::{VerificationReport, Violation};

/// Errors raised by module and map constructors and by the bound machine.
#[derive(Debug, Error)]
pub enum ChainError {
    #[error("duplicate generator id {0:?}")]
    DuplicateGenerator(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("module mismatch: {0}")]
    ModuleMismatch(String),
    #[error("degree violation: {0}")]
    DegreeViolation(String),
    #[error("generator {0:?} has no grading, but the operation needs one")]
    UngradedGenerator(String),
    #[error("differential does not square to zero: {0}")]
    DifferentialSquareNonzero(String),
    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
}

/// One named generator of a free module.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub grading: Option<i64>,
    /// Ambient coordinates of the critical point this generator came from,
    /// when it came from the flow engine.
    pub coords: Option<Vec<f64>>,
}

impl Generator {
    pub fn new(id: impl Into<String>, grading: i64) -> Self {
        Generator {
            id: id.into(),
            grading: Some(grading),
            coords: None,
        }
    }

    pub fn ungraded(id: impl Into<String>) -> Self {
        Generator {
            id: id.into(),
            grading: None,
            coords: None,
        }
    }

    pub fn with_coords(mut self, coords: Vec<f64>) -> Self {
        self.coords = Some(coords);
        self
    }

    fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), json!(self.id));
        if let Some(g) = self.grading {
            obj.insert("grading".into(), json!(g));
        }
        if let Some(c) = &self.coords {
            obj.insert("coords".into(), json!(c));
        }
        Value::Object(obj)
    }

    fn from_json(v: &Value) -> Result<Self, ChainError> {
        let obj = v
            .as_object()
            .ok_or_else(|| ChainError::Malformed("generator must be an object".into()))?;
        let id = obj
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| ChainError::Malformed("generator needs a string \"id\"".into()))?
            .to_string();
        let grading = match obj.get("grading") {
            None | Some(Value::Null) => None,
            Some(g) => Some(g.as_i64().ok_or_else(|| {
                ChainError::Malformed(format!("grading of {id:?} must be an integer"))
            })?),
        };
        let coords = match obj.get("coords") {
            None | Some(Value::Null) => None,
            Some(Value::Array(items)) => {
                let mut c = Vec::with_capacity(items.len());
                for item in items {
                    c.push(item.as_f64().ok_or_else(|| {
                        ChainError::Malformed(format!("coords of {id:?} must be numbers"))
                    })?);
                }
                Some(c)
            }
            Some(_) => {
                return Err(ChainError::Malformed(format!(
                    "coords of {id:?} must be an array"
                )))
            }
        };
        Ok(Generator {
            id,
            grading,
            coords,
        })
    }
}

/// A finite free module with named, optionally graded generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedModule {
    generators: Vec<Generator>,
}

impl GradedModule {
    pub fn new(generators: Vec<Generator>) -> Result<Self, ChainError> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &generators {
            if !seen.insert(g.id.clone()) {
                return Err(ChainError::DuplicateGenerator(g.id.clone()));
            }
        }
        Ok(GradedModule { generators })
    }

    /// Graded module from `(id, grading)` pairs.
    pub fn graded<I, S>(pairs: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        Self::new(
            pairs
                .into_iter()
                .map(|(id, g)| Generator::new(id, g))
                .collect(),
        )
    }

    /// Ungraded module from generator ids.
    pub fn ungraded<I, S>(ids: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(ids.into_iter().map(Generator::ungraded).collect())
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &Generator {
        &self.generators[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.id == id)
    }

    /// Grading of generator `i`, or an error naming it when absent.
    pub fn grading(&self, i: usize) -> Result<i64, ChainError> {
        self.generators[i]
            .grading
            .ok_or_else(|| ChainError::UngradedGenerator(self.generators[i].id.clone()))
    }

    pub fn is_fully_graded(&self) -> bool {
        self.generators.iter().all(|g| g.grading.is_some())
    }

    /// Indices of generators with the given grading, in module order.
    pub fn indices_of_grading(&self, g: i64) -> Vec<usize> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, gen)| gen.grading == Some(g))
            .map(|(i, _)| i)
            .collect()
    }

    /// Inclusive grading range over all generators, if any are graded.
    pub fn grading_range(&self) -> Option<(i64, i64)> {
        let gradings: Vec<i64> = self.generators.iter().filter_map(|g| g.grading).collect();
        let min = *gradings.iter().min()?;
        let max = *gradings.iter().max()?;
        Some((min, max))
    }

    /// Same generators, same gradings — the compatibility test used when
    /// composing maps and assembling complexes.
    pub fn same_basis(&self, other: &GradedModule) -> bool {
        self.generators.len() == other.generators.len()
            && self
                .generators
                .iter()
                .zip(&other.generators)
                .all(|(a, b)| a.id == b.id && a.grading == b.grading)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.generators.iter().map(Generator::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self, ChainError> {
        let items = v
            .as_array()
            .ok_or_else(|| ChainError::Malformed("generator list must be an array".into()))?;
        let mut generators = Vec::with_capacity(items.len());
        for item in items {
            generators.push(Generator::from_json(item)?);
        }
        Self::new(generators)
    }
}

/// Degree tag of a linear map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    /// Homogeneous: sends grading `g` to grading `g + shift`.
    Graded(i64),
    /// No degree constraint is claimed or enforced.
    Ungraded,
}

impl Degree {
    fn compose(self, other: Degree) -> Degree {
        match (self, other) {
            (Degree::Graded(a), Degree::Graded(b)) => Degree::Graded(a + b),
            _ => Degree::Ungraded,
        }
    }

    fn to_json(self) -> Value {
        match self {
            Degree::Graded(d) => json!(d),
            Degree::Ungraded => Value::Null,
        }
    }
}

/// A Λ-linear map between free modules. Column `j` of the matrix is the
/// image of the `j`-th source generator expanded in the target basis.
#[derive(Debug, Clone)]
pub struct LinearMap {
    source: GradedModule,
    target: GradedModule,
    degree: Degree,
    matrix: NovikovMatrix,
}

impl LinearMap {
    /// Build a map, checking the matrix shape and, for a graded degree,
    /// that every entry pairing gradings off the declared shift is exactly
    /// zero.
    pub fn new(
        source: GradedModule,
        target: GradedModule,
        degree: Degree,
        matrix: NovikovMatrix,
    ) -> Result<Self, ChainError> {
        if matrix.nrows() != target.rank() || matrix.ncols() != source.rank() {
            return Err(ChainError::ShapeMismatch(format!(
                "matrix is {}x{} but target has {} generators and source has {}",
                matrix.nrows(),
                matrix.ncols(),
                target.rank(),
                source.rank()
            )));
        }
        if let Degree::Graded(shift) = degree {
            for i in 0..target.rank() {
                for j in 0..source.rank() {
                    let (gt, gs) = match (target.generators[i].grading, source.generators[j].grading)
                    {
                        (Some(gt), Some(gs)) => (gt, gs),
                        _ => continue,
                    };
                    if gt != gs + shift && !matrix.get(i, j).is_zero_exact() {
                        return Err(ChainError::DegreeViolation(format!(
                            "entry ({}, {}) maps grading {} to grading {} under declared degree {}",
                            target.generators[i].id, source.generators[j].id, gs, gt, shift
                        )));
                    }
                }
            }
        }
        Ok(LinearMap {
            source,
            target,
            degree,
            matrix,
        })
    }

    /// Identity on a module (degree 0).
    pub fn identity(module: &GradedModule) -> Self {
        LinearMap {
            source: module.clone(),
            target: module.clone(),
            degree: Degree::Graded(0),
            matrix: NovikovMatrix::identity(module.rank()),
        }
    }

    /// Zero map with the given degree tag.
    pub fn zero(source: &GradedModule, target: &GradedModule, degree: Degree) -> Self {
        LinearMap {
            source: source.clone(),
            target: target.clone(),
            degree,
            matrix: NovikovMatrix::zero(target.rank(), source.rank()),
        }
    }

    pub fn source(&self) -> &GradedModule {
        &self.source
    }

    pub fn target(&self) -> &GradedModule {
        &self.target
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn matrix(&self) -> &NovikovMatrix {
        &self.matrix
    }

    /// `self ∘ inner` (apply `inner` first).
    pub fn after(&self, inner: &LinearMap) -> Result<LinearMap, ChainError> {
        if !inner.target.same_basis(&self.source) {
            return Err(ChainError::ModuleMismatch(
                "inner map's target does not match outer map's source".into(),
            ));
        }
        Ok(LinearMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            degree: self.degree.compose(inner.degree),
            matrix: self.matrix.mul(&inner.matrix)?,
        })
    }

    /// Entrywise difference of two maps with identical source and target.
    /// The degree tag is kept when both agree and dropped otherwise.
    pub fn sub(&self, other: &LinearMap) -> Result<LinearMap, ChainError> {
        if !self.source.same_basis(&other.source) || !self.target.same_basis(&other.target) {
            return Err(ChainError::ModuleMismatch(
                "subtraction needs identical source and target modules".into(),
            ));
        }
        let degree = if self.degree == other.degree {
            self.degree
        } else {
            Degree::Ungraded
        };
        Ok(LinearMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree,
            matrix: self.matrix.sub(&other.matrix)?,
        })
    }

    /// Scale column `j` by `(−1)^{grading of source generator j}`. Errors
    /// when some source generator has no grading.
    pub fn sign_adjust(&self) -> Result<LinearMap, ChainError> {
        let mut matrix = self.matrix.clone();
        for j in 0..self.source.rank() {
            let g = self.source.grading(j)?;
            if g.rem_euclid(2) == 1 {
                for i in 0..self.target.rank() {
                    matrix.set(i, j, matrix.get(i, j).neg());
                }
            }
        }
        Ok(LinearMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            matrix,
        })
    }

    /// Infer the degree tag from the nonzero pattern: the unique shift
    /// compatible with every nonzero entry, when the modules are fully
    /// graded and such a shift exists; `Ungraded` otherwise. A zero matrix
    /// infers degree 0.
    pub fn infer_degree(
        source: &GradedModule,
        target: &GradedModule,
        matrix: &NovikovMatrix,
    ) -> Degree {
        if !source.is_fully_graded() || !target.is_fully_graded() {
            return Degree::Ungraded;
        }
        let mut shift: Option<i64> = None;
        for i in 0..target.rank() {
            for j in 0..source.rank() {
                if matrix.get(i, j).is_zero_exact() {
                    continue;
                }
                let s = target.generators[i].grading.unwrap()
                    - source.generators[j].grading.unwrap();
                match shift {
                    None => shift = Some(s),
                    Some(prev) if prev == s => {}
                    Some(_) => return Degree::Ungraded,
                }
            }
        }
        Degree::Graded(shift.unwrap_or(0))
    }

    /// `{"source", "target", "degree", "matrix"}` with `degree: null` for
    /// ungraded maps.
    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "degree": self.degree.to_json(),
            "matrix": self.matrix.to_json()["matrix"],
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ChainError> {
        let obj = v
            .as_object()
            .ok_or_else(|| ChainError::Malformed("linear map must be an object".into()))?;
        let source = GradedModule::from_json(
            obj.get("source")
                .ok_or_else(|| ChainError::Malformed("linear map needs \"source\"".into()))?,
        )?;
        let target = GradedModule::from_json(
            obj.get("target")
                .ok_or_else(|| ChainError::Malformed("linear map needs \"target\"".into()))?,
        )?;
        let degree = match obj.get("degree") {
            None | Some(Value::Null) => Degree::Ungraded,
            Some(d) => Degree::Graded(d.as_i64().ok_or_else(|| {
                ChainError::Malformed("degree must be an integer or null".into())
            })?),
        };
        let matrix = NovikovMatrix::from_json(
            obj.get("matrix")
                .ok_or_else(|| ChainError::Malformed("linear map needs \"matrix\"".into()))?,
        )
        .map_err(|e| ChainError::Malformed(e.to_string()))?;
        Self::new(source, target, degree, matrix)
    }
}

impl fmt::Display for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "map {} -> {} ({}):",
            self.source.rank(),
            self.target.rank(),
            match self.degree {
                Degree::Graded(d) => format!("degree {d}"),
                Degree::Ungraded => "ungraded".into(),
            }
        )?;
        write!(f, "{}", self.matrix)
    }
}

/// A free module carrying a square-zero differential of degree −1.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    module: GradedModule,
    d: LinearMap,
}

impl ChainComplex {
    /// Assemble a complex, checking that the differential is an
    /// endomorphism of `module` of degree −1 and that `d ∘ d` vanishes:
    /// exactly where entries are exact, and through the recorded cutoff
    /// where they are truncated.
    pub fn new(module: GradedModule, d: LinearMap) -> Result<Self, ChainError> {
        if !module.is_fully_graded() {
            let missing = module
                .generators()
                .iter()
                .find(|g| g.grading.is_none())
                .expect("some grading is missing");
            return Err(ChainError::UngradedGenerator(missing.id.clone()));
        }
        if !d.source.same_basis(&module) || !d.target.same_basis(&module) {
            return Err(ChainError::ModuleMismatch(
                "differential must be an endomorphism of the complex's module".into(),
            ));
        }
        if d.degree != Degree::Graded(-1) {
            return Err(ChainError::DegreeViolation(
                "differential must have degree -1".into(),
            ));
        }
        let square = d.matrix.mul(&d.matrix)?;
        for i in 0..square.nrows() {
            for j in 0..square.ncols() {
                let entry = square.get(i, j);
                if entry.is_exact() {
                    if !entry.is_zero_exact() {
                        return Err(ChainError::DifferentialSquareNonzero(format!(
                            "(d∘d)[{}, {}] = {}",
                            module.generators[i].id, module.generators[j].id, entry
                        )));
                    }
                } else if !entry.has_empty_support() {
                    return Err(ChainError::DifferentialSquareNonzero(format!(
                        "(d∘d)[{}, {}] = {}",
                        module.generators[i].id, module.generators[j].id, entry
                    )));
                }
            }
        }
        Ok(ChainComplex { module, d })
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    pub fn differential(&self) -> &LinearMap {
        &self.d
    }

    /// The block of `d` mapping grading `g` to grading `g − 1`, together
    /// with the generator indices of the source (grading `g`) block.
    pub fn graded_block(&self, g: i64) -> (NovikovMatrix, Vec<usize>) {
        let cols = self.module.indices_of_grading(g);
        let rows = self.module.indices_of_grading(g - 1);
        let mut block = NovikovMatrix::zero(rows.len(), cols.len());
        for (bi, &i) in rows.iter().enumerate() {
            for (bj, &j) in cols.iter().enumerate() {
                block.set(bi, bj, self.d.matrix.get(i, j).clone());
            }
        }
        (block, cols)
    }

    /// `{"generators": [...], "differential": [[...]]}` — the chain-complex
    /// document format shared by the flow engine and the command line.
    pub fn to_json(&self) -> Value {
        json!({
            "generators": self.module.to_json(),
            "differential": self.d.matrix.to_json()["matrix"],
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ChainError> {
        let obj = v
            .as_object()
            .ok_or_else(|| ChainError::Malformed("chain complex must be an object".into()))?;
        let module = GradedModule::from_json(
            obj.get("generators")
                .ok_or_else(|| ChainError::Malformed("chain complex needs \"generators\"".into()))?,
        )?;
        let matrix = NovikovMatrix::from_json(
            obj.get("differential")
                .ok_or_else(|| ChainError::Malformed("chain complex needs \"differential\"".into()))?,
        )
        .map_err(|e| ChainError::Malformed(e.to_string()))?;
        let d = LinearMap::new(module.clone(), module.clone(), Degree::Graded(-1), matrix)?;
        Self::new(module, d)
    }
}

/// Collect the nonzero (through `thru`) entries of a residual matrix as
/// violations labelled by `[target_id, source_id]`.
fn residual_violations(
    residual: &NovikovMatrix,
    source: &GradedModule,
    target: &GradedModule,
    thru: &Exponent,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    for i in 0..residual.nrows() {
        for j in 0..residual.ncols() {
            let entry = residual.get(i, j);
            if !entry.vanishes_through(thru) {
                violations.push(Violation::new(
                    [target.generators()[i].id.clone(), source.generators()[j].id.clone()],
                    entry,
                ));
            }
        }
    }
    violations
}

/// Check `φ ∘ d_source = d_target ∘ φ` through exponent `thru`.
pub fn check_chain_map(
    phi: &LinearMap,
    d_source: &LinearMap,
    d_target: &LinearMap,
    thru: &Exponent,
) -> Result<VerificationReport, ChainError> {
    let lhs = phi.after(d_source)?;
    let rhs = d_target.after(phi)?;
    let residual = lhs.matrix.sub(&rhs.matrix)?;
    Ok(VerificationReport::new(
        "chain-map",
        residual_violations(&residual, &lhs.source, &lhs.target, thru),
    ))
}

/// Check the anticommutation `φ ∘ d_source = −(d_target ∘ φ)` through
/// `thru` — the identity a column-sign flip obeys instead of the chain-map
/// identity.
pub fn check_anticommutation(
    phi: &LinearMap,
    d_source: &LinearMap,
    d_target: &LinearMap,
    thru: &Exponent,
) -> Result<VerificationReport, ChainError> {
    let lhs = phi.after(d_source)?;
    let rhs = d_target.after(phi)?;
    let residual = lhs.matrix.add(&rhs.matrix)?;
    Ok(VerificationReport::new(
        "anticommutation",
        residual_violations(&residual, &lhs.source, &lhs.target, thru),
    ))
}

/// Check that `h` is a chain homotopy from `f` to `g`, i.e.
/// `f − g − d_target ∘ h − h ∘ d_source = 0` through `thru`.
pub fn check_chain_homotopy(
    f: &LinearMap,
    g: &LinearMap,
    h: &LinearMap,
    d_source: &LinearMap,
    d_target: &LinearMap,
    thru: &Exponent,
) -> Result<VerificationReport, ChainError> {
    let dh = d_target.after(h)?;
    let hd = h.after(d_source)?;
    let residual = f
        .matrix
        .sub(&g.matrix)?
        .sub(&dh.matrix)?
        .sub(&hd.matrix)?;
    Ok(VerificationReport::new(
        "chain-homotopy",
        residual_violations(&residual, &f.source, &f.target, thru),
    ))
}

/// Certified column rank of a map's matrix over the Novikov field; zero
/// decisions on truncated entries are only trusted through `cutoff`.
pub fn lambda_rank(matrix: &NovikovMatrix, cutoff: Option<&Exponent>) -> RankResult {
    matrix.rank(cutoff)
}

/// One verified step of the bound computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateStep {
    pub name: String,
    pub detail: String,
}

/// The replayable certificate produced by [`arnold_bound`]: every
/// hypothesis that was checked, in order, and the resulting bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArnoldCertificate {
    pub bound: usize,
    pub steps: Vec<CertificateStep>,
}

impl ArnoldCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "bound": self.bound,
            "steps": self
                .steps
                .iter()
                .map(|s| json!({ "name": s.name, "detail": s.detail }))
                .collect::<Vec<_>>(),
        })
    }
}

/// Inputs to [`arnold_bound`]. `cycles` are columns in the basis of the
/// graded complex's module; `pss` maps that module to the module being
/// bounded, `ssp` maps back, `iota` and `homotopy` are endomorphisms of the
/// graded module, and `d` is its differential.
pub struct ArnoldInputs<'a> {
    pub betti: &'a [usize],
    pub cycles: &'a [Vec<NovikovScalar>],
    pub pss: &'a LinearMap,
    pub ssp: &'a LinearMap,
    pub iota: &'a LinearMap,
    pub homotopy: &'a LinearMap,
    pub d: &'a LinearMap,
    pub cutoff: Exponent,
}

fn certified_rank(matrix: &NovikovMatrix, cutoff: &Exponent) -> Result<usize, ChainError> {
    let result = matrix.rank(Some(cutoff));
    if !result.certified {
        return Err(ChainError::Novikov(NovikovError::InsufficientPrecision(
            "rank computation could not be certified at the requested cutoff".into(),
        )));
    }
    Ok(result.rank)
}

/// Derive the generator lower bound by mechanically replaying the chain of
/// hypotheses:
///
/// 1. the supplied chains are cycles (`d·c = 0` through the cutoff);
/// 2. they are independent modulo boundaries (certified rank count);
/// 3. `iota` is a chain map and is invertible (valuation criterion on the
///    lexicographically ordered basis, falling back to an explicit inverse
///    verified on both sides);
/// 4. `iota ≃ ssp ∘ pss` via `homotopy`, at least on the supplied cycles;
/// 5. therefore the cycle images under `iota` stay independent modulo
///    boundaries, and their `pss`-images have certified full rank `k` in
///    the target — which the target's generator count must then bound.
///
/// Any failed hypothesis aborts with [`ChainError::HypothesisFailure`]
/// naming the failed precondition. On success the certificate records each
/// step and the bound `k = Σ betti`.
pub fn arnold_bound(inputs: &ArnoldInputs) -> Result<ArnoldCertificate, ChainError> {
    let ArnoldInputs {
        betti,
        cycles,
        pss,
        ssp,
        iota,
        homotopy,
        d,
        cutoff,
    } = inputs;
    let module = &d.source;
    let n = module.rank();
    let k: usize = betti.iter().sum();
    let mut steps = Vec::new();

    if cycles.len() != k {
        return Err(ChainError::HypothesisFailure(format!(
            "expected {} cycles (sum of Betti numbers) but {} were supplied",
            k,
            cycles.len()
        )));
    }
    for (j, c) in cycles.iter().enumerate() {
        if c.len() != n {
            return Err(ChainError::HypothesisFailure(format!(
                "cycle {} has {} coordinates but the module has {} generators",
                j,
                c.len(),
                n
            )));
        }
    }
    let mut cycle_matrix = NovikovMatrix::zero(n, k);
    for (j, c) in cycles.iter().enumerate() {
        for (i, entry) in c.iter().enumerate() {
            cycle_matrix.set(i, j, entry.clone());
        }
    }
    steps.push(CertificateStep {
        name: "inputs".into(),
        detail: format!("{k} cycles over a module with {n} generators"),
    });

    // 1. Cycles.
    let dc = d.matrix.mul(&cycle_matrix)?;
    if !dc.vanishes_through(cutoff) {
        return Err(ChainError::HypothesisFailure(
            "supplied chains are not cycles: d·c has a nonzero coefficient within the cutoff"
                .into(),
        ));
    }
    steps.push(CertificateStep {
        name: "cycles".into(),
        detail: format!("d·c_j = 0 through exponent {cutoff} for all {k} chains"),
    });

    // 2. Independence modulo boundaries: rank [C | D] = k + rank D.
    let rank_d = certified_rank(&d.matrix, cutoff)?;
    let stacked = cycle_matrix.hcat(&d.matrix);
    let rank_stacked = certified_rank(&stacked, cutoff)?;
    if rank_stacked != k + rank_d {
        return Err(ChainError::HypothesisFailure(format!(
            "cycles are not independent modulo boundaries: rank [C|d] = {rank_stacked}, expected {k} + {rank_d}"
        )));
    }
    steps.push(CertificateStep {
        name: "independence".into(),
        detail: format!("rank [C|d] = {rank_stacked} = {k} + rank d ({rank_d}), certified"),
    });

    // 3a. iota is a chain map.
    let iota_chain = check_chain_map(iota, d, d, cutoff)?;
    if !iota_chain.passed() {
        return Err(ChainError::HypothesisFailure(format!(
            "iota is not a chain map: {}",
            iota_chain.summary()
        )));
    }
    steps.push(CertificateStep {
        name: "iota chain map".into(),
        detail: format!("iota∘d − d∘iota = 0 through exponent {cutoff}"),
    });

    // 3b. iota is invertible: valuation criterion on the lexicographically
    // ordered basis, else an explicit verified inverse.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| module.generators[a].id.cmp(&module.generators[b].id));
    let mut permuted = NovikovMatrix::zero(n, n);
    for (pi, &i) in order.iter().enumerate() {
        for (pj, &j) in order.iter().enumerate() {
            permuted.set(pi, pj, iota.matrix.get(i, j).clone());
        }
    }
    let criterion = permuted.invertibility_criterion()?;
    let invertibility_detail = if criterion.holds() {
        "valuation criterion holds on the lexicographically ordered basis".to_string()
    } else {
        let inverse = iota
            .matrix
            .invert(cutoff)
            .map_err(|e| ChainError::HypothesisFailure(format!("iota not invertible: {e}")))?;
        let left = inverse.mul(&iota.matrix)?;
        let right = iota.matrix.mul(&inverse)?;
        let id = NovikovMatrix::identity(n);
        if !left.agrees_with(&id, cutoff) || !right.agrees_with(&id, cutoff) {
            return Err(ChainError::HypothesisFailure(
                "iota not invertible: computed inverse fails to verify on both sides".into(),
            ));
        }
        "explicit inverse verified on both sides through the cutoff".to_string()
    };
    steps.push(CertificateStep {
        name: "iota invertible".into(),
        detail: invertibility_detail,
    });

    // 4. Homotopy identity on the cycles:
    //    iota·C − ssp·(pss·C) − d·(h·C) − h·(d·C) = 0.
    let pss_c = pss.matrix.mul(&cycle_matrix)?;
    let round_trip = ssp.matrix.mul(&pss_c)?;
    let dh = d.matrix.mul(&homotopy.matrix.mul(&cycle_matrix)?)?;
    let hd = homotopy.matrix.mul(&dc)?;
    let residual = iota
        .matrix
        .mul(&cycle_matrix)?
        .sub(&round_trip)?
        .sub(&dh)?
        .sub(&hd)?;
    if !residual.vanishes_through(cutoff) {
        return Err(ChainError::HypothesisFailure(
            "homotopy identity fails on the supplied cycles within the cutoff".into(),
        ));
    }
    steps.push(CertificateStep {
        name: "homotopy on cycles".into(),
        detail: format!(
            "iota·c − ssp∘pss·c − d∘h·c − h∘d·c = 0 through exponent {cutoff}"
        ),
    });

    // 5a. iota-images of the cycles stay independent modulo boundaries.
    let iota_c = iota.matrix.mul(&cycle_matrix)?;
    let stacked_iota = iota_c.hcat(&d.matrix);
    let rank_stacked_iota = certified_rank(&stacked_iota, cutoff)?;
    if rank_stacked_iota != k + rank_d {
        return Err(ChainError::HypothesisFailure(format!(
            "iota-images of the cycles are not independent modulo boundaries: rank = {rank_stacked_iota}, expected {}",
            k + rank_d
        )));
    }
    steps.push(CertificateStep {
        name: "iota-image independence".into(),
        detail: format!("rank [iota·C|d] = {rank_stacked_iota}, certified"),
    });

    // 5b. The pss-images have full rank k in the bounded module.
    let rank_pss_c = certified_rank(&pss_c, cutoff)?;
    if rank_pss_c != k {
        return Err(ChainError::HypothesisFailure(format!(
            "pss-images of the cycles have rank {rank_pss_c} < {k} in the target module"
        )));
    }
    let target_rank = pss.target.rank();
    if target_rank < k {
        return Err(ChainError::HypothesisFailure(format!(
            "target module has only {target_rank} generators but carries {k} independent images"
        )));
    }
    steps.push(CertificateStep {
        name: "surjection onto images".into(),
        detail: format!(
            "rank pss·C = {k} certified, so the target's {target_rank} generators number at least {k}"
        ),
    });

    steps.push(CertificateStep {
        name: "bound".into(),
        detail: format!("generator count ≥ {k} = Σ betti"),
    });
    Ok(ArnoldCertificate { bound: k, steps })
}

/// Convenience: interpret a rational matrix column as a Λ-chain vector.
pub fn rational_chain(column: &[BigRational]) -> Vec<NovikovScalar> {
    column
        .iter()
        .map(|r| {
            if r.is_zero() {
                NovikovScalar::zero()
            } else {
                NovikovScalar::from_ratio(r.clone())
            }
        })
        .collect()
}
