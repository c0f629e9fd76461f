//! # morsenov
//!
//! Exact linear algebra over the Novikov field, numerically computed Morse
//! complexes on a small catalog of closed manifolds, and a verifier for
//! coherent systems of signed moduli counts, ending in a mechanically checked
//! Arnold-type lower bound on the number of generators of a Floer-style module.
//!
//! The crate is organized as five library modules plus a thin CLI (shipped as
//! the separate `morsenov-cli` package):
//!
//! - [`novikov`] — the Novikov field Λ of finite formal sums `Σ λ_r·T^r` with
//!   exact rational coefficients and exponents, truncation-aware arithmetic,
//!   and matrix algebra over Λ including a constant-part invertibility
//!   criterion and truncated matrix inversion.
//! - [`morse`] — a numerical Morse engine: critical points of built-in Morse
//!   functions found by Newton iteration, negative gradient flow integrated
//!   with an adaptive Runge–Kutta scheme, signed counts of connecting
//!   trajectories, and assembly of the Morse chain complex.
//! - [`homology`] — an independent Betti-number oracle built from cubical/CW
//!   cell structures with exact rational rank computations, plus homology
//!   ranks of chain complexes over Λ with certified pivot decisions.
//! - [`chain`] — graded free Λ-modules, Λ-linear maps, chain-map and
//!   chain-homotopy verification, Λ-rank, and the deduction engine that turns
//!   a verified chain homotopy into a lower bound on generator counts.
//! - [`coherence`] — abstract count systems (Morse counts plus four families
//!   of moduli counts indexed by critical points, orbits, and homology-class
//!   labels), the boundary identities they must satisfy, construction of the
//!   associated Λ-linear maps, a consistent toy generator mirroring any Morse
//!   complex, and the end-to-end verification pipeline.
//!
//! Start with the runnable examples (`cargo run --example <name>`); each one
//! demonstrates a major capability end to end:
//!
//! | example              | shows                                              |
//! |----------------------|----------------------------------------------------|
//! | `novikov_arithmetic` | field arithmetic, truncation, series inversion     |
//! | `matrix_inversion`   | invertibility criterion and truncated inversion    |
//! | `morse_complex`      | critical points, flows, counts, the complex        |
//! | `betti_oracle`       | cubical Betti numbers vs the Morse complex         |
//! | `chain_homotopy`     | chain-map/homotopy checks and the sign adjustment  |
//! | `count_verification` | boundary identities on a count system              |
//! | `arnold_pipeline`    | full pipeline from a mirrored complex to the bound |
//!
//! All algebra is exact (arbitrary-precision rationals); all analysis is
//! double-precision with pinned tolerances. Every operation is a pure
//! function of immutable inputs and safe to call concurrently.

pub mod chain;
pub mod coherence;
pub mod homology;
pub mod morse;
pub mod novikov;
pub mod ratio;
pub mod report;
