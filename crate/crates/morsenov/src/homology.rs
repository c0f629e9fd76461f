//! Independent homology oracle: exact rational linear algebra and small
//! cubical-style cell complexes for the catalog manifolds.
//!
//! The flow engine is numerical; this module is not. Cell complexes for the
//! catalog models are built combinatorially (a circle with `r` vertices and
//! `r` edges, a globe with two poles and `r` meridians and `r` lunes, and
//! tensor products of those), their boundary matrices live over ℚ with
//! exact `BigRational` arithmetic, and Betti numbers come out of exact
//! Gaussian elimination. The results are used as ground truth against the
//! numerically computed complexes and as the `betti` input of the bound
//! machine.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::chain::ChainComplex;
use crate::morse::model::MorseModel;
use crate::novikov::Exponent;

/// Errors from complex construction and rank computations.
#[derive(Debug, Error)]
pub enum HomologyError {
    #[error("resolution must be at least 1, got {0}")]
    InvalidResolution(usize),
    #[error("boundary does not square to zero: {0}")]
    BoundarySquareNonzero(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("entry is not an exact rational constant: {0}")]
    NonRationalEntries(String),
    #[error("grading {0} is negative; homology ranks are indexed from 0")]
    NegativeGrading(i64),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
}

/// Dense matrix over ℚ with exact arithmetic, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self, HomologyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(HomologyError::ShapeMismatch(
                "rows have unequal lengths".into(),
            ));
        }
        Ok(QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigRational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix, HomologyError> {
        if self.cols != other.rows {
            return Err(HomologyError::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = QMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j).clone();
                        out.set(i, j, cur + a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn hcat(&self, other: &QMatrix) -> Result<QMatrix, HomologyError> {
        if self.rows != other.rows {
            return Err(HomologyError::ShapeMismatch(format!(
                "cannot join {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = QMatrix::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Reduced row echelon form together with the pivot column indices.
    fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // Largest-magnitude pivot keeps intermediate numerators small.
            let pivot_row = (row..m.rows)
                .filter(|&i| !m.get(i, col).is_zero())
                .max_by(|&a, &b| m.get(a, col).abs().cmp(&m.get(b, col).abs()));
            let Some(p) = pivot_row else { continue };
            if p != row {
                for j in 0..m.cols {
                    m.data.swap(row * m.cols + j, p * m.cols + j);
                }
            }
            let inv = m.get(row, col).clone().recip();
            for j in col..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for i in 0..m.rows {
                if i == row || m.get(i, col).is_zero() {
                    continue;
                }
                let factor = m.get(i, col).clone();
                for j in col..m.cols {
                    let v = m.get(i, j) - &factor * m.get(row, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel (column vectors), one per free column of
    /// the reduced form; deterministic in the input.
    pub fn kernel_basis(&self) -> Vec<Vec<BigRational>> {
        let (r, pivots) = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![BigRational::zero(); self.cols];
            v[free] = BigRational::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -r.get(prow, free).clone();
            }
            basis.push(v);
        }
        basis
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Betti numbers `b_0, …, b_dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        json!(self.0)
    }
}

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// A finite cell complex with rational boundary matrices, as produced by
/// the combinatorial builders for the catalog manifolds.
#[derive(Debug, Clone)]
pub struct CubicalComplex {
    /// Number of cells in each degree `0..=dim`.
    cells: Vec<usize>,
    /// `boundaries[k]` maps degree `k+1` cells to degree `k` cells.
    boundaries: Vec<QMatrix>,
}

impl CubicalComplex {
    /// Assemble and validate: shapes line up and every composite
    /// `∂_k ∘ ∂_{k+1}` is exactly zero.
    pub fn new(cells: Vec<usize>, boundaries: Vec<QMatrix>) -> Result<Self, HomologyError> {
        if cells.is_empty() {
            return Err(HomologyError::ShapeMismatch(
                "a complex needs at least degree 0".into(),
            ));
        }
        if boundaries.len() + 1 != cells.len() {
            return Err(HomologyError::ShapeMismatch(format!(
                "{} boundary matrices for {} degrees",
                boundaries.len(),
                cells.len()
            )));
        }
        for (k, b) in boundaries.iter().enumerate() {
            if b.nrows() != cells[k] || b.ncols() != cells[k + 1] {
                return Err(HomologyError::ShapeMismatch(format!(
                    "boundary from degree {} is {}x{}, expected {}x{}",
                    k + 1,
                    b.nrows(),
                    b.ncols(),
                    cells[k],
                    cells[k + 1]
                )));
            }
        }
        for k in 0..boundaries.len().saturating_sub(1) {
            let square = boundaries[k].mul(&boundaries[k + 1])?;
            if !square.is_zero() {
                return Err(HomologyError::BoundarySquareNonzero(format!(
                    "degrees {} -> {} -> {}",
                    k + 2,
                    k + 1,
                    k
                )));
            }
        }
        Ok(CubicalComplex { cells, boundaries })
    }

    pub fn dim(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn cell_counts(&self) -> &[usize] {
        &self.cells
    }

    /// Boundary matrix out of degree `k` (for `1 ≤ k ≤ dim`).
    pub fn boundary(&self, k: usize) -> &QMatrix {
        &self.boundaries[k - 1]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// A circle subdivided into `resolution` vertices and edges; edge `i`
    /// runs from vertex `i` to vertex `i+1 (mod r)`, so at resolution 1 the
    /// single edge is a loop with zero boundary.
    pub fn circle(resolution: usize) -> Result<Self, HomologyError> {
        if resolution == 0 {
            return Err(HomologyError::InvalidResolution(resolution));
        }
        let r = resolution;
        let mut d1 = QMatrix::zero(r, r);
        for e in 0..r {
            let head = (e + 1) % r;
            let tail = e;
            // A loop edge (r = 1) has head = tail and cancels to zero.
            let v = d1.get(head, e) + BigRational::one();
            d1.set(head, e, v);
            let v = d1.get(tail, e) - BigRational::one();
            d1.set(tail, e, v);
        }
        Self::new(vec![r, r], vec![d1])
    }

    /// The 2-sphere. At resolution 1 this is the minimal CW-style model
    /// (one vertex, one 2-cell, both boundaries zero); at resolution `r ≥ 2`
    /// it is the globe with two poles, `r` meridian edges from south to
    /// north, and `r` lune faces between consecutive meridians.
    pub fn sphere2(resolution: usize) -> Result<Self, HomologyError> {
        match resolution {
            0 => Err(HomologyError::InvalidResolution(resolution)),
            1 => Self::new(
                vec![1, 0, 1],
                vec![QMatrix::zero(1, 0), QMatrix::zero(0, 1)],
            ),
            r => {
                // Vertices: 0 = north, 1 = south.
                let mut d1 = QMatrix::zero(2, r);
                for e in 0..r {
                    d1.set(0, e, BigRational::one());
                    d1.set(1, e, -BigRational::one());
                }
                let mut d2 = QMatrix::zero(r, r);
                for f in 0..r {
                    let v = d2.get(f, f) + BigRational::one();
                    d2.set(f, f, v);
                    let g = (f + 1) % r;
                    let v = d2.get(g, f) - BigRational::one();
                    d2.set(g, f, v);
                }
                Self::new(vec![2, r, r], vec![d1, d2])
            }
        }
    }

    /// Tensor product with the usual graded sign: a product cell `x ⊗ y`
    /// with `deg x = p` has boundary `∂x ⊗ y + (−1)^p x ⊗ ∂y`. Cells of
    /// each degree are ordered by left degree, then left index, then right
    /// index.
    pub fn tensor(&self, other: &CubicalComplex) -> Result<CubicalComplex, HomologyError> {
        let dim = self.dim() + other.dim();
        // Index map: position of (p, ia, ib) within degree k = p + q.
        let pos = |k: usize, p: usize, ia: usize, ib: usize| -> usize {
            let q = k - p;
            let mut offset = 0;
            for pp in 0..p {
                if k - pp <= other.dim() {
                    offset += self.cells[pp] * other.cells[k - pp];
                }
            }
            offset + ia * other.cells[q] + ib
        };
        let mut cells = vec![0usize; dim + 1];
        for (k, cell) in cells.iter_mut().enumerate() {
            for p in 0..=k.min(self.dim()) {
                let q = k - p;
                if q <= other.dim() {
                    *cell += self.cells[p] * other.cells[q];
                }
            }
        }
        let mut boundaries = Vec::with_capacity(dim);
        for k in 1..=dim {
            let mut d = QMatrix::zero(cells[k - 1], cells[k]);
            for p in 0..=k.min(self.dim()) {
                let q = k - p;
                if q > other.dim() {
                    continue;
                }
                let sign = if p % 2 == 0 {
                    BigRational::one()
                } else {
                    -BigRational::one()
                };
                for ia in 0..self.cells[p] {
                    for ib in 0..other.cells[q] {
                        let col = pos(k, p, ia, ib);
                        if p >= 1 {
                            let da = self.boundary(p);
                            for ra in 0..self.cells[p - 1] {
                                let coeff = da.get(ra, ia);
                                if !coeff.is_zero() {
                                    let row = pos(k - 1, p - 1, ra, ib);
                                    let v = d.get(row, col) + coeff;
                                    d.set(row, col, v);
                                }
                            }
                        }
                        if q >= 1 {
                            let db = other.boundary(q);
                            for rb in 0..other.cells[q - 1] {
                                let coeff = db.get(rb, ib);
                                if !coeff.is_zero() {
                                    let row = pos(k - 1, p, ia, rb);
                                    let v = d.get(row, col) + &sign * coeff;
                                    d.set(row, col, v);
                                }
                            }
                        }
                    }
                }
            }
            boundaries.push(d);
        }
        Self::new(cells, boundaries)
    }

    /// Cell complex for a catalog model at the given resolution: circles
    /// tensored for tori, the globe family for the sphere, and tensor
    /// products for product models.
    pub fn for_model(model: &MorseModel, resolution: usize) -> Result<Self, HomologyError> {
        if resolution == 0 {
            return Err(HomologyError::InvalidResolution(resolution));
        }
        match model {
            MorseModel::Sphere2 => Self::sphere2(resolution),
            MorseModel::Torus(n) => {
                let circle = Self::circle(resolution)?;
                let mut out = circle.clone();
                for _ in 1..*n {
                    out = out.tensor(&circle)?;
                }
                Ok(out)
            }
            MorseModel::Product(a, b) => {
                Self::for_model(a, resolution)?.tensor(&Self::for_model(b, resolution)?)
            }
        }
    }

    /// Betti numbers by exact rank-nullity: `b_k = c_k − rank ∂_k − rank ∂_{k+1}`.
    pub fn betti(&self) -> BettiVector {
        let dim = self.dim();
        let ranks: Vec<usize> = self.boundaries.iter().map(QMatrix::rank).collect();
        let mut betti = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let rank_out = if k >= 1 { ranks[k - 1] } else { 0 };
            let rank_in = if k < dim { ranks[k] } else { 0 };
            betti.push(self.cells[k] - rank_out - rank_in);
        }
        BettiVector(betti)
    }
}

/// Top grading, per-degree generator index lists, and the rational blocks
/// `d_g : degree g → degree g−1` for `g = 1..=max`.
type RationalBlocks = (i64, Vec<Vec<usize>>, Vec<QMatrix>);

/// Extract the graded rational blocks of a complex whose differential
/// entries are exact rational constants.
fn rational_blocks(complex: &ChainComplex) -> Result<RationalBlocks, HomologyError> {
    let module = complex.module();
    let (min, max) = module
        .grading_range()
        .expect("chain complexes are fully graded");
    if min < 0 {
        return Err(HomologyError::NegativeGrading(min));
    }
    let matrix = complex.differential().matrix();
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            if matrix.get(i, j).as_constant().is_none() {
                return Err(HomologyError::NonRationalEntries(format!(
                    "entry ({}, {}) is {}",
                    module.generators()[i].id,
                    module.generators()[j].id,
                    matrix.get(i, j)
                )));
            }
        }
    }
    let indices: Vec<Vec<usize>> = (0..=max)
        .map(|g| module.indices_of_grading(g))
        .collect();
    let mut blocks = Vec::new();
    for g in 1..=max {
        let rows = &indices[(g - 1) as usize];
        let cols = &indices[g as usize];
        let mut block = QMatrix::zero(rows.len(), cols.len());
        for (bi, &i) in rows.iter().enumerate() {
            for (bj, &j) in cols.iter().enumerate() {
                block.set(bi, bj, matrix.get(i, j).as_constant().unwrap());
            }
        }
        blocks.push(block);
    }
    Ok((max, indices, blocks))
}

/// Betti numbers of a chain complex whose differential is rational,
/// computed by exact elimination degree by degree.
pub fn betti_of_rational_complex(complex: &ChainComplex) -> Result<BettiVector, HomologyError> {
    let (max, indices, blocks) = rational_blocks(complex)?;
    let ranks: Vec<usize> = blocks.iter().map(QMatrix::rank).collect();
    let mut betti = Vec::with_capacity(max as usize + 1);
    for g in 0..=max as usize {
        let rank_out = if g >= 1 { ranks[g - 1] } else { 0 };
        let rank_in = if g < max as usize { ranks[g] } else { 0 };
        betti.push(indices[g].len() - rank_out - rank_in);
    }
    Ok(BettiVector(betti))
}

/// Homology ranks of a Λ-coefficient complex via certified Novikov-field
/// ranks: `b_g = n_g − rank d_g − rank d_{g+1}`. Fails with
/// [`HomologyError::InsufficientPrecision`] when any block's rank cannot be
/// certified at the supplied cutoff.
pub fn homology_rank_lambda(
    complex: &ChainComplex,
    cutoff: &Exponent,
) -> Result<BettiVector, HomologyError> {
    let module = complex.module();
    let (min, max) = module
        .grading_range()
        .expect("chain complexes are fully graded");
    if min < 0 {
        return Err(HomologyError::NegativeGrading(min));
    }
    let mut ranks = Vec::new();
    for g in 1..=max {
        let (block, _) = complex.graded_block(g);
        let result = block.rank(Some(cutoff));
        if !result.certified {
            return Err(HomologyError::InsufficientPrecision(format!(
                "rank of the degree {g} block could not be certified at cutoff {cutoff}"
            )));
        }
        ranks.push(result.rank);
    }
    let mut betti = Vec::with_capacity(max as usize + 1);
    for g in 0..=max {
        let n_g = module.indices_of_grading(g).len();
        let rank_out = if g >= 1 { ranks[(g - 1) as usize] } else { 0 };
        let rank_in = if g < max { ranks[g as usize] } else { 0 };
        betti.push(n_g - rank_out - rank_in);
    }
    Ok(BettiVector(betti))
}

/// For a rational complex, produce explicit cycle representatives of a
/// homology basis: for each degree `g`, kernel vectors of `d_g` extended by
/// greedy selection to be independent modulo the image of `d_{g+1}`,
/// embedded back into full module coordinates. Returned in ascending
/// degree, deterministic in the input.
pub fn rational_cycle_representatives(
    complex: &ChainComplex,
) -> Result<Vec<(i64, Vec<BigRational>)>, HomologyError> {
    let (max, indices, blocks) = rational_blocks(complex)?;
    let n = complex.module().rank();
    let mut out = Vec::new();
    for g in 0..=max as usize {
        let n_g = indices[g].len();
        // Kernel of the outgoing block (everything is a cycle in degree 0).
        let kernel: Vec<Vec<BigRational>> = if g >= 1 {
            blocks[g - 1].kernel_basis()
        } else {
            (0..n_g)
                .map(|i| {
                    let mut v = vec![BigRational::zero(); n_g];
                    v[i] = BigRational::one();
                    v
                })
                .collect()
        };
        // Image of the incoming block.
        let image = if g < max as usize {
            blocks[g].clone()
        } else {
            QMatrix::zero(n_g, 0)
        };
        let mut span = image.clone();
        let mut span_rank = span.rank();
        for v in kernel {
            let mut candidate = QMatrix::zero(n_g, span.ncols() + 1);
            for (i, value) in v.iter().enumerate() {
                for j in 0..span.ncols() {
                    candidate.set(i, j, span.get(i, j).clone());
                }
                candidate.set(i, span.ncols(), value.clone());
            }
            let r = candidate.rank();
            if r > span_rank {
                span = candidate;
                span_rank = r;
                let mut full = vec![BigRational::zero(); n];
                for (bi, &i) in indices[g].iter().enumerate() {
                    full[i] = v[bi].clone();
                }
                out.push((g as i64, full));
            }
        }
    }
    Ok(out)
}
