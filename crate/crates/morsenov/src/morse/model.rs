//! The built-in catalog of closed manifolds with closed-form Morse data.
//!
//! Three families are supported, closed under finite products:
//!
//! - `sphere2` — the round unit sphere S² ⊂ ℝ³ with the height function
//!   `f(x, y, z) = z`; two critical points (south pole, index 0; north pole,
//!   index 2).
//! - `torus_n` — the flat torus (ℝ/ℤ)ⁿ with the separable cosine function
//!   `f(x) = Σ_i cos(2π·x_i)`; 2ⁿ critical points, one for each choice of
//!   coordinate in {0, 1/2}, with Morse index the number of coordinates at 0.
//! - products — `f = f₁ ⊕ f₂` on the product manifold with the product
//!   metric; critical points multiply and indices add.
//!
//! Points live in ambient coordinates: a torus factor contributes its `n`
//! periodic coordinates (flows run in the universal cover; wrapping is only
//! applied for display and distance), a sphere factor contributes three
//! embedding coordinates constrained to the unit sphere. Gradients are
//! tangent vectors in ambient coordinates, and the intrinsic Hessian is
//! exposed as a bilinear form on tangent vectors, which is all the Newton
//! search and the classification step need.

use std::fmt;

use thiserror::Error;

/// Errors recognizing a model name.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelParseError {
    #[error("unknown model {0:?}; expected sphere2, torus_<n>, or products joined with '*'")]
    Unknown(String),
    #[error("torus dimension must be at least 1")]
    ZeroTorus,
}

/// A catalog manifold with its built-in Morse function and metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorseModel {
    /// Round unit 2-sphere with the height function `z`.
    Sphere2,
    /// Flat n-torus with `Σ cos(2π·x_i)`.
    Torus(usize),
    /// Product manifold with the sum function and product metric.
    Product(Box<MorseModel>, Box<MorseModel>),
}

impl MorseModel {
    /// Parse `sphere2`, `torus_<n>` (aliases `sphere2_height`,
    /// `torus_<n>_cosine` accepted), or products joined with `*`.
    pub fn parse(name: &str) -> Result<Self, ModelParseError> {
        let parts: Vec<&str> = name.split('*').map(str::trim).collect();
        let mut factors = Vec::with_capacity(parts.len());
        for part in parts {
            factors.push(Self::parse_atom(part)?);
        }
        let mut iter = factors.into_iter();
        let first = iter.next().ok_or_else(|| ModelParseError::Unknown(name.into()))?;
        Ok(iter.fold(first, |acc, f| {
            MorseModel::Product(Box::new(acc), Box::new(f))
        }))
    }

    fn parse_atom(name: &str) -> Result<Self, ModelParseError> {
        match name {
            "sphere2" | "sphere2_height" => Ok(MorseModel::Sphere2),
            _ => {
                let rest = name
                    .strip_prefix("torus_")
                    .ok_or_else(|| ModelParseError::Unknown(name.into()))?;
                let digits = rest.strip_suffix("_cosine").unwrap_or(rest);
                let n: usize = digits
                    .parse()
                    .map_err(|_| ModelParseError::Unknown(name.into()))?;
                if n == 0 {
                    return Err(ModelParseError::ZeroTorus);
                }
                Ok(MorseModel::Torus(n))
            }
        }
    }

    /// Canonical name (`sphere2`, `torus_2`, `torus_1*sphere2`, …).
    pub fn name(&self) -> String {
        match self {
            MorseModel::Sphere2 => "sphere2".into(),
            MorseModel::Torus(n) => format!("torus_{n}"),
            MorseModel::Product(a, b) => format!("{}*{}", a.name(), b.name()),
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            MorseModel::Sphere2 => 2,
            MorseModel::Torus(n) => *n,
            MorseModel::Product(a, b) => a.dim() + b.dim(),
        }
    }

    /// Number of ambient coordinates a point carries.
    pub fn ambient_dim(&self) -> usize {
        match self {
            MorseModel::Sphere2 => 3,
            MorseModel::Torus(n) => *n,
            MorseModel::Product(a, b) => a.ambient_dim() + b.ambient_dim(),
        }
    }

    /// Euler characteristic (used as a cross-check on Betti vectors).
    pub fn euler_characteristic(&self) -> i64 {
        match self {
            MorseModel::Sphere2 => 2,
            MorseModel::Torus(_) => 0,
            MorseModel::Product(a, b) => a.euler_characteristic() * b.euler_characteristic(),
        }
    }

    /// The number of critical points the catalog function is known to have.
    pub fn expected_critical_count(&self) -> usize {
        match self {
            MorseModel::Sphere2 => 2,
            MorseModel::Torus(n) => 1usize << n,
            MorseModel::Product(a, b) => {
                a.expected_critical_count() * b.expected_critical_count()
            }
        }
    }

    /// True when every connecting trajectory between index-adjacent critical
    /// points lies in a single coordinate circle, which is what the sign
    /// evaluation relies on. Cosine tori are separable, the sphere has no
    /// index-adjacent pairs, and products inherit the property.
    pub fn supports_signs(&self) -> bool {
        match self {
            MorseModel::Sphere2 | MorseModel::Torus(_) => true,
            MorseModel::Product(a, b) => a.supports_signs() && b.supports_signs(),
        }
    }

    /// Morse function value.
    pub fn f(&self, x: &[f64]) -> f64 {
        match self {
            MorseModel::Sphere2 => x[2],
            MorseModel::Torus(n) => (0..*n).map(|i| (TAU * x[i]).cos()).sum(),
            MorseModel::Product(a, b) => {
                let (xa, xb) = x.split_at(a.ambient_dim());
                a.f(xa) + b.f(xb)
            }
        }
    }

    /// Intrinsic gradient as a tangent vector in ambient coordinates.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MorseModel::Sphere2 => {
                // Project ∇z = e₃ onto the tangent plane at x.
                let z = x[2];
                vec![-z * x[0], -z * x[1], 1.0 - z * x[2]]
            }
            MorseModel::Torus(n) => (0..*n).map(|i| -TAU * (TAU * x[i]).sin()).collect(),
            MorseModel::Product(a, b) => {
                let (xa, xb) = x.split_at(a.ambient_dim());
                let mut g = a.grad(xa);
                g.extend(b.grad(xb));
                g
            }
        }
    }

    /// Intrinsic (covariant) Hessian of `f` at `x` as a bilinear form on
    /// tangent vectors `u`, `v` given in ambient coordinates.
    ///
    /// For the flat torus this is the coordinate Hessian
    /// `diag(−4π²·cos(2π·x_i))`; for the height function on the round
    /// sphere it is `−z·⟨u, v⟩`.
    pub fn hessian_bilinear(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match self {
            MorseModel::Sphere2 => {
                let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                -x[2] * dot
            }
            MorseModel::Torus(n) => (0..*n)
                .map(|i| -TAU * TAU * (TAU * x[i]).cos() * u[i] * v[i])
                .sum(),
            MorseModel::Product(a, b) => {
                let k = a.ambient_dim();
                a.hessian_bilinear(&x[..k], &u[..k], &v[..k])
                    + b.hessian_bilinear(&x[k..], &u[k..], &v[k..])
            }
        }
    }

    /// An orthonormal basis of the tangent space at `x`, each vector in
    /// ambient coordinates. Deterministic in `x`.
    pub fn tangent_frame(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match self {
            MorseModel::Sphere2 => sphere_tangent_frame(x),
            MorseModel::Torus(n) => (0..*n)
                .map(|i| {
                    let mut e = vec![0.0; *n];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            MorseModel::Product(a, b) => {
                let (xa, xb) = x.split_at(a.ambient_dim());
                let ka = a.ambient_dim();
                let kb = b.ambient_dim();
                let mut frame = Vec::with_capacity(self.dim());
                for u in a.tangent_frame(xa) {
                    let mut v = u;
                    v.extend(std::iter::repeat(0.0).take(kb));
                    frame.push(v);
                }
                for u in b.tangent_frame(xb) {
                    let mut v = vec![0.0; ka];
                    v.extend(u);
                    frame.push(v);
                }
                frame
            }
        }
    }

    /// Re-impose the manifold constraints after an ambient step (normalize
    /// sphere factors; torus coordinates are left in the universal cover).
    pub fn project(&self, x: &mut [f64]) {
        match self {
            MorseModel::Sphere2 => {
                let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if norm > 0.0 {
                    for c in x.iter_mut() {
                        *c /= norm;
                    }
                }
            }
            MorseModel::Torus(_) => {}
            MorseModel::Product(a, b) => {
                let k = a.ambient_dim();
                let (xa, xb) = x.split_at_mut(k);
                a.project(xa);
                b.project(xb);
            }
        }
    }

    /// Canonical representative: torus coordinates wrapped into [0, 1),
    /// sphere coordinates normalized.
    pub fn wrap(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.wrap_in_place(&mut out);
        out
    }

    fn wrap_in_place(&self, x: &mut [f64]) {
        match self {
            MorseModel::Sphere2 => self.project(x),
            MorseModel::Torus(n) => {
                for c in x.iter_mut().take(*n) {
                    *c = c.rem_euclid(1.0);
                    // Collapse the seam so 1.0 − 1e−16 and 0.0 agree.
                    if (*c - 1.0).abs() < 1e-12 {
                        *c = 0.0;
                    }
                }
            }
            MorseModel::Product(a, b) => {
                let k = a.ambient_dim();
                let (xa, xb) = x.split_at_mut(k);
                a.wrap_in_place(xa);
                b.wrap_in_place(xb);
            }
        }
    }

    /// Geodesic-equivalent distance: wrap-aware Euclidean on torus factors,
    /// chordal on sphere factors, ℓ² across factors.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.distance_sq(x, y).sqrt()
    }

    fn distance_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            MorseModel::Sphere2 => (0..3).map(|i| (x[i] - y[i]).powi(2)).sum(),
            MorseModel::Torus(n) => (0..*n)
                .map(|i| {
                    let d = (x[i] - y[i]).rem_euclid(1.0);
                    d.min(1.0 - d).powi(2)
                })
                .sum(),
            MorseModel::Product(a, b) => {
                let k = a.ambient_dim();
                a.distance_sq(&x[..k], &y[..k]) + b.distance_sq(&x[k..], &y[k..])
            }
        }
    }

    /// The ambient-coordinate layout: one block per circle coordinate and
    /// one per sphere factor, in order.
    pub fn factor_blocks(&self) -> Vec<FactorBlock> {
        let mut blocks = Vec::new();
        self.collect_blocks(0, &mut blocks);
        blocks
    }

    fn collect_blocks(&self, offset: usize, blocks: &mut Vec<FactorBlock>) {
        match self {
            MorseModel::Sphere2 => blocks.push(FactorBlock {
                offset,
                len: 3,
                kind: FactorKind::Sphere,
            }),
            MorseModel::Torus(n) => {
                for i in 0..*n {
                    blocks.push(FactorBlock {
                        offset: offset + i,
                        len: 1,
                        kind: FactorKind::Circle,
                    });
                }
            }
            MorseModel::Product(a, b) => {
                a.collect_blocks(offset, blocks);
                b.collect_blocks(offset + a.ambient_dim(), blocks);
            }
        }
    }

    /// Difference vector `x − y` respecting the manifold structure: each
    /// circle coordinate is reduced to the representative in [−1/2, 1/2),
    /// sphere coordinates subtract componentwise.
    pub fn displacement(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        for block in self.factor_blocks() {
            if block.kind == FactorKind::Circle {
                let c = &mut d[block.offset];
                *c -= c.round();
            }
        }
        d
    }

    /// Deterministic seed points for the critical-point search. Refinement
    /// level `r` multiplies the per-factor density.
    pub fn seed_points(&self, refinement: u32) -> Vec<Vec<f64>> {
        match self {
            MorseModel::Sphere2 => {
                let n = 40 * (1usize << refinement);
                fibonacci_sphere(n)
            }
            MorseModel::Torus(n) => {
                let g = grid_side(*n) * (1usize << refinement);
                let mut seeds = vec![vec![]];
                for _ in 0..*n {
                    let mut next = Vec::with_capacity(seeds.len() * g);
                    for s in &seeds {
                        for k in 0..g {
                            let mut t = s.clone();
                            // Offset keeps seeds away from the lattice where
                            // the coordinate Hessian degenerates.
                            t.push((k as f64 + 0.37) / g as f64);
                            next.push(t);
                        }
                    }
                    seeds = next;
                }
                seeds
            }
            MorseModel::Product(a, b) => {
                let sa = a.seed_points(refinement);
                let sb = b.seed_points(refinement);
                let mut seeds = Vec::with_capacity(sa.len() * sb.len());
                for pa in &sa {
                    for pb in &sb {
                        let mut s = pa.clone();
                        s.extend_from_slice(pb);
                        seeds.push(s);
                    }
                }
                seeds
            }
        }
    }
}

impl fmt::Display for MorseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl std::str::FromStr for MorseModel {
    type Err = ModelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MorseModel::parse(s)
    }
}

/// Kind of an ambient-coordinate block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// One periodic coordinate of a torus factor.
    Circle,
    /// Three embedding coordinates of a sphere factor.
    Sphere,
}

/// One contiguous slice of the ambient coordinates.
#[derive(Debug, Clone, Copy)]
pub struct FactorBlock {
    pub offset: usize,
    pub len: usize,
    pub kind: FactorKind,
}

const TAU: f64 = std::f64::consts::TAU;

/// Per-axis seed-grid side for an n-torus, chosen so the total seed count
/// stays moderate in higher dimensions.
fn grid_side(n: usize) -> usize {
    match n {
        1 => 8,
        2 => 7,
        3 => 5,
        _ => 4,
    }
}

/// Deterministic quasi-uniform points on the unit sphere.
fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = TAU * (i as f64 / golden).fract();
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Orthonormal tangent frame on the sphere, deterministic in `x`: start from
/// the coordinate axis least aligned with `x` and Gram–Schmidt.
fn sphere_tangent_frame(x: &[f64]) -> Vec<Vec<f64>> {
    let mut axis = [0.0f64; 3];
    let (k, _) = x
        .iter()
        .map(|c| c.abs())
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three components");
    axis[k] = 1.0;
    // u1 = normalize(axis − ⟨axis,x⟩x), u2 = x × u1.
    let dot = axis[0] * x[0] + axis[1] * x[1] + axis[2] * x[2];
    let mut u1 = [
        axis[0] - dot * x[0],
        axis[1] - dot * x[1],
        axis[2] - dot * x[2],
    ];
    let norm = (u1[0] * u1[0] + u1[1] * u1[1] + u1[2] * u1[2]).sqrt();
    for c in u1.iter_mut() {
        *c /= norm;
    }
    let u2 = [
        x[1] * u1[2] - x[2] * u1[1],
        x[2] * u1[0] - x[0] * u1[2],
        x[0] * u1[1] - x[1] * u1[0],
    ];
    vec![u1.to_vec(), u2.to_vec()]
}
