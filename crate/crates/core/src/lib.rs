//! Parabolic flows of real `(p,p)`-forms on flat complex tori.
//!
//! The crate evolves
//!
//! ```text
//! dφ/dt = f(Λ(X[φ] + (i∂∂̄φ + χ) ∧ ω^{p-1})) - ψ
//! ```
//!
//! on `ℂⁿ/(ℤ+iℤ)ⁿ` with the flat metric, where `Λ` are the eigenvalues of a
//! `(p,p)`-form with respect to `ω` and `f` is a symmetric concave cone
//! function (`σ_k^{1/k}` or `log ρ_k`). Alongside the solver it ships the
//! pointwise algebra the flow is built from, and checks for the structural
//! facts the flow relies on: positivity of the linearization, the refined
//! ellipticity floor, tangent-cone ranks, the maximum principle and the
//! exponential decay of the oscillation of `φ_t`.
//!
//! Module map:
//!
//! - [`multiindex`]: ordered index set of increasing `p`-tuples and its signs.
//! - [`ppalgebra`]: coefficient matrices of `(p,p)`-forms, wedge with
//!   `ω^{p-1}`, generalized eigenvalues.
//! - [`conefun`]: `σ_k^{1/k}` and `log ρ_k`, their cones, gradients and
//!   structure checks.
//! - [`linop`]: `F^{IJ̄}`, `G^{ij̄}`, the refined floor and the lower-order
//!   coefficients of the linearized operator.
//! - [`torusflow`]: spectral discretization, Heun time stepping and runtime
//!   monitors.
//! - [`harness`]: scenario configuration, lemma suites, reports and the CLI
//!   entry points.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod conefun;
pub mod error;
pub mod harness;
pub mod linop;
pub mod multiindex;
pub mod ppalgebra;
pub mod torusflow;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
