//! Variational discretizations for the one dimensional singularly perturbed
//! convection-diffusion problem
//!
//! ```text
//! -eps u''(x) + u'(x) = f(x)  on (0,1),   u(0) = u(1) = 0.
//! ```
//!
//! The crate implements and cross-compares four methods on uniform meshes:
//! the standard linear Galerkin discretization, the saddle point least
//! squares (SPLS) P1-P2 discretization, and two upwinding Petrov-Galerkin
//! (UPG) discretizations whose test spaces are enriched with quadratic or
//! exponential cell bubbles. Alongside the solvers it provides the optimal
//! trial norms of each method, oscillation diagnostics, and the closed-form
//! expressions that describe how the exponential scheme degenerates once
//! `exp(-h/eps)` underflows in floating point.
//!
//! Module map:
//! - [`mesh`]: uniform meshes and P1/P2 finite element functions.
//! - [`bubbles`]: quadratic and exponential bubble families with exact moments.
//! - [`quadrature`]: Gauss-Legendre panels and layer-graded integration.
//! - [`norms`]: the operator `T`, continuous and discrete optimal trial norms.
//! - [`assembly`]: tridiagonal stencils, dual vectors, and the SPLS block system.
//! - [`solvers`]: Thomas elimination, forward substitution, Schur complement solve.
//! - [`analytic`]: closed-form solutions and forcing presets.
//! - [`experiments`]: end-to-end solves, error records, convergence and underflow studies.
//!
//! All numerics are generic over the scalar type through the [`Real`] trait
//! (`f32` or `f64`); the aliases at the crate root pin the common
//! double-precision instantiation.

pub mod analytic;
pub mod assembly;
pub mod bubbles;
mod dense;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod norms;
pub mod quadrature;
pub mod solvers;

pub use analytic::{exact_f1, ExactSolution, Forcing};
pub use assembly::{SplsSystem, TriDiag};
pub use bubbles::BubbleSpec;
pub use error::{Error, Result};
pub use experiments::{solve_method, Method, RunRecord, SolveOptions};
pub use mesh::{P1Function, P2Function, UniformMesh};
pub use norms::MethodNorm;
pub use solvers::Solution;

use num_traits::{Float, FromPrimitive, NumAssignOps};
use std::fmt::{Debug, Display};

/// Floating point scalar the library is generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumAssignOps + Debug + Display {}

impl<T> Real for T where T: Float + FromPrimitive + NumAssignOps + Debug + Display {}

/// Converts an `f64` constant into the working scalar type.
pub(crate) fn cast<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant must be representable in the scalar type")
}

/// Converts a count into the working scalar type.
pub(crate) fn cast_usize<S: Real>(n: usize) -> S {
    S::from_usize(n).expect("count must be representable in the scalar type")
}

/// Double-precision aliases for the main types.
pub type Mesh64 = mesh::UniformMesh<f64>;
pub type P1Function64 = mesh::P1Function<f64>;
pub type P2Function64 = mesh::P2Function<f64>;
pub type BubbleSpec64 = bubbles::BubbleSpec<f64>;
pub type TriDiag64 = assembly::TriDiag<f64>;
pub type RunRecord64 = experiments::RunRecord<f64>;
