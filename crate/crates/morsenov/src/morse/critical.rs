//! Locating and classifying the critical points of a catalog model.
//!
//! The search runs intrinsic Newton iteration from a deterministic seed
//! grid, deduplicates the converged results, and compares the count with
//! the number the catalog function is known to have; if they disagree the
//! grid is refined a bounded number of times before the search gives up.
//! Each accepted point is classified by the eigendecomposition of the
//! intrinsic Hessian expressed in an orthonormal tangent frame.

use nalgebra::{DMatrix, DVector};

use super::flow::FlowConfig;
use super::model::MorseModel;
use super::MorseError;

/// A nondegenerate critical point with its spectral data.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    /// `p0`, `p1`, … in lexicographic order of wrapped coordinates.
    pub id: String,
    /// Canonical (wrapped) ambient coordinates.
    pub coords: Vec<f64>,
    /// Morse index: number of negative Hessian eigenvalues.
    pub index: usize,
    /// Value of the Morse function at the point.
    pub value: f64,
    /// Hessian eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors in ambient coordinates, aligned with
    /// `eigenvalues`; each has its largest-magnitude component positive.
    pub frame: Vec<Vec<f64>>,
}

impl CriticalPoint {
    /// Eigenvectors spanning the unstable (descending) directions, i.e.
    /// those with negative eigenvalues — the first `index` frame vectors.
    pub fn unstable_frame(&self) -> &[Vec<f64>] {
        &self.frame[..self.index]
    }

    /// Eigenvectors spanning the stable directions.
    pub fn stable_frame(&self) -> &[Vec<f64>] {
        &self.frame[self.index..]
    }
}

/// Intrinsic gradient norm (the ambient norm of the tangent gradient).
pub(crate) fn grad_norm(model: &MorseModel, x: &[f64]) -> f64 {
    model.grad(x).iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Newton iteration for `∇f = 0` in tangent coordinates. Returns the
/// converged point, or `None` when the iteration leaves its basin or the
/// Hessian solve fails (the caller just moves on to the next seed).
fn newton_from_seed(model: &MorseModel, seed: &[f64], cfg: &FlowConfig) -> Option<Vec<f64>> {
    let dim = model.dim();
    let mut x = seed.to_vec();
    model.project(&mut x);
    for _ in 0..60 {
        let g = model.grad(&x);
        if grad_norm(model, &x) < cfg.newton_tol {
            return Some(x);
        }
        let frame = model.tangent_frame(&x);
        let mut h = DMatrix::zeros(dim, dim);
        let mut rhs = DVector::zeros(dim);
        for a in 0..dim {
            rhs[a] = -frame[a].iter().zip(&g).map(|(u, gi)| u * gi).sum::<f64>();
            for b in a..dim {
                let v = model.hessian_bilinear(&x, &frame[a], &frame[b]);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        let step = h.lu().solve(&rhs)?;
        if !step.iter().all(|c| c.is_finite()) || step.norm() > 0.5 {
            return None;
        }
        for (a, coeff) in step.iter().enumerate() {
            for (i, c) in x.iter_mut().enumerate() {
                *c += coeff * frame[a][i];
            }
        }
        model.project(&mut x);
    }
    None
}

/// Morse index, ascending eigenvalues, and the orthonormal eigenframe at a
/// converged point.
type Classification = (usize, Vec<f64>, Vec<Vec<f64>>);

/// Spectral classification at a converged point. Degenerate spectra (an
/// eigenvalue inside the configured tolerance band around zero) are
/// reported as errors rather than being rounded either way.
fn classify(model: &MorseModel, x: &[f64], cfg: &FlowConfig) -> Result<Classification, MorseError> {
    let dim = model.dim();
    let frame = model.tangent_frame(x);
    let mut h = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in a..dim {
            let v = model.hessian_bilinear(x, &frame[a], &frame[b]);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    let eigen = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim);
    for &k in &order {
        let lambda = eigen.eigenvalues[k];
        if lambda.abs() < cfg.degeneracy_tol {
            return Err(MorseError::DegenerateCritical {
                coords: model.wrap(x),
                eigenvalue: lambda,
            });
        }
        eigenvalues.push(lambda);
        // Ambient eigenvector through the frame, sign-canonicalized.
        let mut v = vec![0.0; x.len()];
        for (a, u) in frame.iter().enumerate() {
            let coeff = eigen.eigenvectors[(a, k)];
            for (i, c) in v.iter_mut().enumerate() {
                *c += coeff * u[i];
            }
        }
        let lead = v
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if lead < 0.0 {
            for c in v.iter_mut() {
                *c = -*c;
            }
        }
        vectors.push(v);
    }
    let index = eigenvalues.iter().filter(|&&l| l < 0.0).count();
    Ok((index, eigenvalues, vectors))
}

/// Run the full search: Newton from every seed, deduplicate, compare with
/// the catalog count, refine if needed, then classify and sort.
pub fn find_critical_points(
    model: &MorseModel,
    cfg: &FlowConfig,
) -> Result<Vec<CriticalPoint>, MorseError> {
    let expected = model.expected_critical_count();
    let mut found: Vec<Vec<f64>> = Vec::new();
    for refinement in 0..=cfg.max_refinements {
        found.clear();
        for seed in model.seed_points(refinement) {
            let Some(x) = newton_from_seed(model, &seed, cfg) else {
                continue;
            };
            let wrapped = model.wrap(&x);
            if found
                .iter()
                .all(|p| model.distance(p, &wrapped) > cfg.dedup_tol)
            {
                found.push(wrapped);
            }
        }
        if found.len() == expected {
            break;
        }
    }
    if found.len() != expected {
        return Err(MorseError::IncompleteSearch {
            found: found.len(),
            expected,
        });
    }

    // Deterministic order: lexicographic in rounded wrapped coordinates.
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c * 1e9).round() as i64).collect() };
    found.sort_by_key(|a| key(a));

    let mut points = Vec::with_capacity(found.len());
    for (i, coords) in found.into_iter().enumerate() {
        let (index, eigenvalues, frame) = classify(model, &coords, cfg)?;
        points.push(CriticalPoint {
            id: format!("p{i}"),
            value: model.f(&coords),
            coords,
            index,
            eigenvalues,
            frame,
        });
    }
    Ok(points)
}
