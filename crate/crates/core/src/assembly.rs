//! Stencil and right-hand-side assembly for the four discretizations.
//!
//! The bubble UPG system reduces to the tridiagonal stencil
//! `(-d/h - 1/2, 2d/h, -d/h + 1/2)` with effective diffusion
//! `d = eps + h*b1`; `b1 = 0` recovers the standard linear scheme. All P1/P2
//! polynomial integrals use exact closed forms, so the stencils are
//! bit-stable; `stencil_from_quadrature` re-derives them numerically as a
//! test oracle only.

use crate::bubbles::{BubbleKind, BubbleSpec};
use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::mesh::UniformMesh;
use crate::quadrature::QuadRule;
use crate::{cast, Real};

/// Tridiagonal matrix as its three coefficient sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiag<S> {
    lower: Vec<S>,
    diag: Vec<S>,
    upper: Vec<S>,
}

impl<S: Real> TriDiag<S> {
    pub fn new(lower: Vec<S>, diag: Vec<S>, upper: Vec<S>) -> Result<Self> {
        let m = diag.len();
        if m == 0 {
            return Err(Error::Parameter("empty tridiagonal matrix".into()));
        }
        if lower.len() + 1 != m || upper.len() + 1 != m {
            return Err(Error::Parameter(format!(
                "band lengths ({}, {}, {}) are not (m-1, m, m-1)",
                lower.len(),
                m,
                upper.len()
            )));
        }
        Ok(TriDiag { lower, diag, upper })
    }

    /// Constant-band matrix `tridiag(lo, di, up)` of size `m`.
    pub fn constant(lo: S, di: S, up: S, m: usize) -> Result<Self> {
        TriDiag::new(
            vec![lo; m.saturating_sub(1)],
            vec![di; m],
            vec![up; m.saturating_sub(1)],
        )
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[S] {
        &self.lower
    }

    pub fn diag(&self) -> &[S] {
        &self.diag
    }

    pub fn upper(&self) -> &[S] {
        &self.upper
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        let m = self.dim();
        debug_assert_eq!(x.len(), m);
        (0..m)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Max-norm residual `|A x - rhs|_inf`.
    pub fn residual_inf(&self, x: &[S], rhs: &[S]) -> S {
        self.matvec(x)
            .iter()
            .zip(rhs)
            .map(|(&ax, &b)| (ax - b).abs())
            .fold(S::zero(), S::max)
    }
}

/// UPG stencil `tridiag(-d/h - 1/2, 2d/h, -d/h + 1/2)` of size `m = n - 1`,
/// with `d/h = eps/h + b1`. Every interior row sums to zero.
pub fn stencil_upg<S: Real>(eps: S, h: S, b1: S, m: usize) -> Result<TriDiag<S>> {
    if m < 1 {
        return Err(Error::Parameter(format!("stencil size {m} must be >= 1")));
    }
    if eps <= S::zero() || h <= S::zero() || b1 < S::zero() {
        return Err(Error::Parameter(format!(
            "stencil needs eps > 0, h > 0, b1 >= 0; got ({eps}, {h}, {b1})"
        )));
    }
    let half = cast::<S>(0.5);
    let r = eps / h + b1;
    TriDiag::constant(-r - half, cast::<S>(2.0) * r, -r + half, m)
}

/// Exponential-bubble stencil in its published form
/// `tridiag(-l0, 1/g0, -u0)`, computed from `(g0, l0, u0)` directly so the
/// saturated regime degenerates bit-exactly to `tridiag(-1, 1, 0)`.
pub fn stencil_exponential<S: Real>(spec: &BubbleSpec<S>, m: usize) -> Result<TriDiag<S>> {
    if m < 1 {
        return Err(Error::Parameter(format!("stencil size {m} must be >= 1")));
    }
    match spec.kind {
        BubbleKind::Exponential { g0, l0, u0, .. } => {
            TriDiag::constant(-l0, g0.recip(), -u0, m)
        }
        BubbleKind::Quadratic { .. } => Err(Error::Parameter(
            "exponential stencil requested for a quadratic bubble".into(),
        )),
    }
}

/// Dual vector of the standard discretization: entry `j = (f, phi_j)` by
/// per-cell Gauss-Legendre quadrature.
pub fn rhs_standard<S: Real, F: Fn(S) -> S>(
    f: F,
    mesh: &UniformMesh<S>,
    quad_order: usize,
) -> Result<Vec<S>> {
    let rule = QuadRule::new(quad_order)?;
    let h = mesh.h();
    let mut rhs = Vec::with_capacity(mesh.interior_count());
    for j in 1..mesh.n() {
        let xl = mesh.node(j - 1);
        let xj = mesh.node(j);
        let xr = mesh.node(j + 1);
        let rising = rule.apply(&|x| f(x) * (x - xl) / h, xl, xj)?;
        let falling = rule.apply(&|x| f(x) * (xr - x) / h, xj, xr)?;
        rhs.push(rising + falling);
    }
    Ok(rhs)
}

/// Analytic dual vector for constant forcing: `(c, phi_j) = c*h`, and the
/// bubble contributions cancel exactly for any bubble family.
pub fn rhs_const<S: Real>(c: S, mesh: &UniformMesh<S>) -> Vec<S> {
    vec![c * mesh.h(); mesh.interior_count()]
}

/// Integral of `f * B_i` over the support cell `[x_{i-1}, x_i]`.
fn bubble_dual<S: Real, F: Fn(S) -> S>(
    f: &F,
    mesh: &UniformMesh<S>,
    spec: &BubbleSpec<S>,
    rule: &QuadRule<S>,
    i: usize,
) -> Result<S> {
    let left = mesh.node(i - 1);
    let right = mesh.node(i);
    let panels = if spec.is_exponential() { 8 } else { 2 };
    // Sample the bubble on the reference cell offset so translated cells
    // produce bitwise-identical bubble values.
    rule.apply_panels(
        &|x| f(x) * spec.eval((x - left).max(S::zero()).min(spec.h)).unwrap(),
        left,
        right,
        panels,
    )
}

/// Dual vector of the bubble UPG discretization:
/// entry `j = (f, phi_j) + (f, B_j) - (f, B_{j+1})`.
pub fn rhs_upg<S: Real, F: Fn(S) -> S>(
    f: F,
    mesh: &UniformMesh<S>,
    spec: &BubbleSpec<S>,
    quad_order: usize,
) -> Result<Vec<S>> {
    let rule = QuadRule::new(quad_order)?;
    let mut standard = rhs_standard(&f, mesh, quad_order)?;
    let dual: Vec<S> = (1..=mesh.n())
        .map(|i| bubble_dual(&f, mesh, spec, &rule, i))
        .collect::<Result<_>>()?;
    for (j, entry) in standard.iter_mut().enumerate() {
        *entry += dual[j] - dual[j + 1];
    }
    Ok(standard)
}

/// The SPLS block system on the P2 test space (hats then cell bubbles):
/// `A` is the test-space stiffness, `B` carries
/// `b(v, q) = eps*a0(q, v) + (q', v)`, and `F` the dual vector.
#[derive(Debug, Clone)]
pub struct SplsSystem<S> {
    mesh: UniformMesh<S>,
    pub a: Matrix<S>,
    pub b: Matrix<S>,
    pub f: Vec<S>,
    pub eps: S,
}

impl<S: Real> SplsSystem<S> {
    pub fn mesh(&self) -> &UniformMesh<S> {
        &self.mesh
    }

    pub fn dim_test(&self) -> usize {
        2 * self.mesh.n() - 1
    }

    pub fn dim_trial(&self) -> usize {
        self.mesh.n() - 1
    }
}

/// Assembles the SPLS system for trial P1 and test P1 + quadratic cell
/// bubbles `B_i = 4 phi_{i-1} phi_i`. `eps = 0` builds the simplified
/// system `(w', v') + (u', v) = (f, v)`.
///
/// Exact blocks: hat-hat stiffness `tridiag(-1, 2, -1)/h`, bubble-bubble
/// diagonal `16/(3h)`, hat-bubble coupling zero (cell bubbles are
/// a0-orthogonal to linears on uniform meshes).
pub fn assemble_spls<S: Real, F: Fn(S) -> S>(
    f: F,
    mesh: &UniformMesh<S>,
    eps: S,
    quad_order: usize,
) -> Result<SplsSystem<S>> {
    if eps < S::zero() {
        return Err(Error::Parameter(format!("eps = {eps} must be >= 0")));
    }
    let n = mesh.n();
    let h = mesh.h();
    let nh = n - 1;
    let dim = 2 * n - 1;
    let bubble = BubbleSpec::quadratic(S::one(), h)?;
    let b1 = bubble.b1; // = 2/3

    let mut a = Matrix::zeros(dim, dim);
    let two = cast::<S>(2.0);
    for j in 0..nh {
        a.set(j, j, two / h);
        if j + 1 < nh {
            a.set(j, j + 1, -h.recip());
            a.set(j + 1, j, -h.recip());
        }
    }
    let bubble_energy = cast::<S>(16.0) / (cast::<S>(3.0) * h);
    for i in 0..n {
        a.set(nh + i, nh + i, bubble_energy);
    }

    let mut b = Matrix::zeros(dim, nh);
    let half = cast::<S>(0.5);
    for j in 0..nh {
        // Test hat phi_{j+1} against trial hats.
        b.set(j, j, eps * two / h);
        if j + 1 < nh {
            b.set(j, j + 1, -eps / h + half);
            b.set(j + 1, j, -eps / h - half);
        }
    }
    for i in 1..=n {
        // Test bubble B_i: a0 part vanishes, (q', B_i) = +-b1.
        let row = nh + i - 1;
        if i >= 2 {
            b.set(row, i - 2, -b1);
        }
        if i <= nh {
            b.set(row, i - 1, b1);
        }
    }

    let rule = QuadRule::new(quad_order)?;
    let mut dual = rhs_standard(&f, mesh, quad_order)?;
    for i in 1..=n {
        dual.push(bubble_dual(&f, mesh, &bubble, &rule, i)?);
    }

    Ok(SplsSystem {
        mesh: mesh.clone(),
        a,
        b,
        f: dual,
        eps,
    })
}

fn hat_value<S: Real>(mesh: &UniformMesh<S>, k: usize, x: S) -> S {
    let h = mesh.h();
    let xk = mesh.node(k);
    let d = (x - xk).abs();
    if d >= h {
        S::zero()
    } else {
        S::one() - d / h
    }
}

fn hat_deriv<S: Real>(mesh: &UniformMesh<S>, k: usize, x: S) -> S {
    let h = mesh.h();
    if x > mesh.node(k - 1) && x < mesh.node(k) {
        h.recip()
    } else if x > mesh.node(k) && x < mesh.node(k + 1) {
        -h.recip()
    } else {
        S::zero()
    }
}

fn bubble_value<S: Real>(mesh: &UniformMesh<S>, spec: &BubbleSpec<S>, i: usize, x: S) -> S {
    if x <= mesh.node(i - 1) || x >= mesh.node(i) {
        S::zero()
    } else {
        spec.eval(x - mesh.node(i - 1)).unwrap()
    }
}

fn bubble_deriv_at<S: Real>(mesh: &UniformMesh<S>, spec: &BubbleSpec<S>, i: usize, x: S) -> S {
    if x <= mesh.node(i - 1) || x >= mesh.node(i) {
        S::zero()
    } else {
        spec.deriv(x - mesh.node(i - 1)).unwrap()
    }
}

/// Numerically assembled UPG stencil, testing
/// `b(g_j, phi_k) = eps*(phi_k', g_j') + (phi_k', g_j)` against the test
/// basis `g_j = phi_j + B_j - B_{j+1}`. Oracle for [`stencil_upg`].
pub fn stencil_from_quadrature<S: Real>(
    eps: S,
    mesh: &UniformMesh<S>,
    spec: &BubbleSpec<S>,
    quad_order: usize,
) -> Result<TriDiag<S>> {
    if quad_order < 8 {
        return Err(Error::Parameter(format!(
            "stencil quadrature needs order >= 8, got {quad_order}"
        )));
    }
    let m = mesh.interior_count();
    let rule = QuadRule::new(quad_order)?;
    let panels = if spec.is_exponential() { 8 } else { 2 };

    let g_val = |j: usize, x: S| {
        hat_value(mesh, j, x) + bubble_value(mesh, spec, j, x)
            - bubble_value(mesh, spec, j + 1, x)
    };
    let g_der = |j: usize, x: S| {
        hat_deriv(mesh, j, x) + bubble_deriv_at(mesh, spec, j, x)
            - bubble_deriv_at(mesh, spec, j + 1, x)
    };

    let entry = |j: usize, k: usize| -> Result<S> {
        let lo = mesh.node(k.min(j) - 1);
        let hi = mesh.node((k.max(j) + 1).min(mesh.n()));
        let cells = ((hi - lo) / mesh.h()).round().to_usize().unwrap_or(1);
        let mut acc = S::zero();
        for c in 0..cells {
            let a = lo + mesh.h() * crate::cast_usize::<S>(c);
            let b = if c + 1 == cells {
                hi
            } else {
                lo + mesh.h() * crate::cast_usize::<S>(c + 1)
            };
            acc += rule.apply_panels(
                &|x| {
                    eps * hat_deriv(mesh, k, x) * g_der(j, x)
                        + hat_deriv(mesh, k, x) * g_val(j, x)
                },
                a,
                b,
                panels,
            )?;
        }
        Ok(acc)
    };

    let mut lower = Vec::with_capacity(m - 1);
    let mut diag = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m - 1);
    for j in 1..=m {
        diag.push(entry(j, j)?);
        if j >= 2 {
            lower.push(entry(j, j - 1)?);
        }
        if j < m {
            upper.push(entry(j, j + 1)?);
        }
    }
    TriDiag::new(lower, diag, upper)
}
