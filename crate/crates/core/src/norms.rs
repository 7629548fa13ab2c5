//! The representation operator `T`, the continuous optimal trial norm, the
//! discrete optimal seminorm, and the per-method discrete optimal norms.
//!
//! `T` represents the convection term against the `H1_0` inner product:
//! `Tu(x) = x * ubar - integral_0^x u(s) ds` with `ubar = integral_0^1 u`.
//! Its seminorm satisfies `|Tu|^2 = ||u||^2 - ubar^2`, which is the tail of
//! the continuous optimal trial norm
//! `||u||_*^2 = eps^2 |u|^2 + ||u||^2 - ubar^2`.
//!
//! The discrete counterpart projects `Tu` onto the P1 space; on a uniform
//! mesh that collapses to the explicit cell-average formula
//! `|u|_{*,h}^2 = (1/n) sum_i m_i^2 - (integral u)^2` with `m_i` the cell
//! averages, implemented here in its centered (variance) form so the result
//! is nonnegative by construction. `projection_oracle` keeps the original
//! elliptic-projection route alive as an independent cross-check.

use crate::assembly::TriDiag;
use crate::bubbles::BubbleSpec;
use crate::error::Result;
use crate::mesh::{cell_averages_fn, P1Function, UniformMesh};
use crate::quadrature::{integrate, QuadRule};
use crate::solvers::thomas_solve;
use crate::{cast, cast_usize, Real};

/// `Tu` for a P1 function or a general integrable function.
pub struct TRepresentation<'a, S: Real> {
    mesh: &'a UniformMesh<S>,
    mean: S,
    /// Cumulative integrals of the source at the mesh nodes.
    cum: Vec<S>,
    source: TSource<'a, S>,
}

enum TSource<'a, S: Real> {
    P1(&'a P1Function<S>),
    General { f: &'a dyn Fn(S) -> S, order: usize },
}

impl<'a, S: Real> TRepresentation<'a, S> {
    pub fn mean(&self) -> S {
        self.mean
    }

    /// Primitive `integral_0^x u(s) ds`; exact piecewise quadratic for P1
    /// sources, per-cell Gauss-Legendre otherwise.
    pub fn primitive(&self, x: S) -> Result<S> {
        let i = self.mesh.cell_of(x)?;
        let partial = match &self.source {
            TSource::P1(u) => {
                let h = self.mesh.h();
                let a = u.node_value(i);
                let b = u.node_value(i + 1);
                let xi = (x - self.mesh.node(i)) / h;
                h * (a * xi + (b - a) * xi * xi / cast(2.0))
            }
            TSource::General { f, order } => integrate(f, self.mesh.node(i), x, *order)?,
        };
        Ok(self.cum[i] + partial)
    }

    /// `Tu(x) = x * ubar - integral_0^x u`.
    pub fn eval(&self, x: S) -> Result<S> {
        Ok(x * self.mean - self.primitive(x)?)
    }

    /// `(Tu)'(x) = ubar - u(x)`.
    pub fn deriv(&self, x: S) -> Result<S> {
        let ux = match &self.source {
            TSource::P1(u) => u.eval(x)?,
            TSource::General { f, .. } => f(x),
        };
        Ok(self.mean - ux)
    }

    /// Direct `|Tu|^2` as the H1 seminorm of this representation, by
    /// quadrature of `(ubar - u)^2`. Cross-checks `||u||^2 - ubar^2`.
    pub fn h1_seminorm_sq(&self, quad_order: usize) -> Result<S> {
        let rule = QuadRule::new(quad_order)?;
        let mut acc = S::zero();
        for i in 0..self.mesh.n() {
            acc += rule.apply(
                &|x| {
                    let d = self.deriv(x).unwrap();
                    d * d
                },
                self.mesh.node(i),
                self.mesh.node(i + 1),
            )?;
        }
        Ok(acc)
    }
}

/// `T` applied to a P1 function; mean and primitive are exact.
pub fn t_action<'a, S: Real>(u: &'a P1Function<S>) -> TRepresentation<'a, S> {
    let mesh = u.mesh();
    let h = mesh.h();
    let half = cast::<S>(0.5);
    let mut cum = Vec::with_capacity(mesh.n() + 1);
    cum.push(S::zero());
    let mut acc = S::zero();
    for i in 1..=mesh.n() {
        acc += h * half * (u.node_value(i - 1) + u.node_value(i));
        cum.push(acc);
    }
    TRepresentation {
        mesh,
        mean: u.mean(),
        cum,
        source: TSource::P1(u),
    }
}

/// `T` applied to a general function; the primitive accumulates per-cell
/// Gauss-Legendre panels.
pub fn t_action_fn<'a, S: Real>(
    f: &'a dyn Fn(S) -> S,
    mesh: &'a UniformMesh<S>,
    quad_order: usize,
) -> Result<TRepresentation<'a, S>> {
    let rule = QuadRule::new(quad_order)?;
    let mut cum = Vec::with_capacity(mesh.n() + 1);
    cum.push(S::zero());
    let mut acc = S::zero();
    for i in 1..=mesh.n() {
        acc += rule.apply(&f, mesh.node(i - 1), mesh.node(i))?;
        cum.push(acc);
    }
    Ok(TRepresentation {
        mesh,
        mean: acc,
        cum,
        source: TSource::General { f, order: quad_order },
    })
}

fn clamp_nonneg<S: Real>(v: S) -> S {
    if v < S::zero() {
        S::zero()
    } else {
        v
    }
}

/// `|Tu|^2 = ||u||^2 - ubar^2`, exact for P1 inputs.
pub fn t_norm_sq<S: Real>(u: &P1Function<S>) -> S {
    let mean = u.mean();
    clamp_nonneg(u.l2_norm_sq() - mean * mean)
}

/// `|Tu|^2` for a general function via quadrature of `u^2` and `u`.
pub fn t_norm_sq_fn<S: Real>(
    f: &dyn Fn(S) -> S,
    mesh: &UniformMesh<S>,
    quad_order: usize,
) -> Result<S> {
    let rule = QuadRule::new(quad_order)?;
    let mut l2 = S::zero();
    let mut mean = S::zero();
    for i in 0..mesh.n() {
        let (a, b) = (mesh.node(i), mesh.node(i + 1));
        l2 += rule.apply(
            &|x| {
                let v = f(x);
                v * v
            },
            a,
            b,
        )?;
        mean += rule.apply(&f, a, b)?;
    }
    Ok(clamp_nonneg(l2 - mean * mean))
}

/// Continuous optimal trial norm
/// `||u||_* = sqrt(eps^2 |u|^2 + ||u||^2 - ubar^2)`.
pub fn continuous_star_norm<S: Real>(u: &P1Function<S>, eps: S) -> S {
    (eps * eps * u.h1_seminorm_sq() + t_norm_sq(u)).sqrt()
}

/// Continuous optimal trial norm for a general `H1_0` function given its
/// derivative.
pub fn continuous_star_norm_fn<S: Real>(
    f: &dyn Fn(S) -> S,
    df: &dyn Fn(S) -> S,
    eps: S,
    mesh: &UniformMesh<S>,
    quad_order: usize,
) -> Result<S> {
    let rule = QuadRule::new(quad_order)?;
    let mut h1 = S::zero();
    for i in 0..mesh.n() {
        h1 += rule.apply(
            &|x| {
                let d = df(x);
                d * d
            },
            mesh.node(i),
            mesh.node(i + 1),
        )?;
    }
    Ok((eps * eps * h1 + t_norm_sq_fn(f, mesh, quad_order)?).sqrt())
}

/// The explicit discrete optimal seminorm squared from precomputed cell
/// averages: the variance `(1/n) sum (m_i - mbar)^2`, algebraically equal
/// to `(1/n) sum m_i^2 - (integral u)^2` on a uniform mesh.
pub fn discrete_star_seminorm_sq_from_averages<S: Real>(averages: &[S]) -> S {
    let n = cast_usize::<S>(averages.len());
    let mbar = averages.iter().fold(S::zero(), |a, &m| a + m) / n;
    averages
        .iter()
        .map(|&m| {
            let d = m - mbar;
            d * d
        })
        .fold(S::zero(), |a, v| a + v)
        / n
}

/// `|u|_{*,h}^2` for a P1 function, from its exact cell averages.
pub fn discrete_star_seminorm_sq<S: Real>(u: &P1Function<S>) -> S {
    discrete_star_seminorm_sq_from_averages(&u.cell_averages())
}

/// `|u|_{*,h}^2` for a general integrable function.
pub fn discrete_star_seminorm_sq_fn<S: Real>(
    f: &dyn Fn(S) -> S,
    mesh: &UniformMesh<S>,
    quad_order: usize,
) -> Result<S> {
    let averages = cell_averages_fn(f, mesh, quad_order)?;
    Ok(discrete_star_seminorm_sq_from_averages(&averages))
}

/// `|P_h T u|^2` through the elliptic projection system itself: assemble
/// `a_0(P_h Tu, phi_j) = a_0(Tu, phi_j)`, solve, and return the H1
/// seminorm squared of the projection. Test oracle for
/// [`discrete_star_seminorm_sq`].
pub fn projection_oracle<S: Real>(u: &P1Function<S>) -> Result<S> {
    let mesh = u.mesh();
    let m = mesh.interior_count();
    let h = mesh.h();
    // a_0(Tu, phi_j) = m_{j+1} - m_j with m_i the exact cell averages.
    let avgs = u.cell_averages();
    let rhs: Vec<S> = (1..=m).map(|j| avgs[j] - avgs[j - 1]).collect();
    let two = cast::<S>(2.0);
    let stiffness = TriDiag::new(
        vec![-h.recip(); m.saturating_sub(1)],
        vec![two / h; m],
        vec![-h.recip(); m.saturating_sub(1)],
    )?;
    let sol = thomas_solve(&stiffness, &rhs)?;
    let proj = P1Function::new(mesh.clone(), sol.coeffs)?;
    Ok(proj.h1_seminorm_sq())
}

/// Ingredients every method norm is assembled from.
#[derive(Debug, Clone, Copy)]
pub struct NormParts<S> {
    pub h1_semi_sq: S,
    pub star_h_sq: S,
    pub l2_sq: S,
    pub mean: S,
}

impl<S: Real> NormParts<S> {
    /// Exact parts of a P1 function.
    pub fn of_p1(u: &P1Function<S>) -> Self {
        NormParts {
            h1_semi_sq: u.h1_seminorm_sq(),
            star_h_sq: discrete_star_seminorm_sq(u),
            l2_sq: u.l2_norm_sq(),
            mean: u.mean(),
        }
    }
}

/// Identifies the discrete optimal trial norm of one method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodNorm<S> {
    /// Standard linear: `eps^2 |u|^2 + |u|^2_{*,h}`.
    Linear { eps: S },
    /// Bubble UPG: `(d^2 |u|^2 + |u|^2_{*,h}) / (1 + b2)`.
    Upg { d: S, one_plus_b2: S },
    /// SPLS P1-P2: coincides with the continuous star norm.
    Spls { eps: S },
}

impl<S: Real> MethodNorm<S> {
    pub fn linear(eps: S) -> Self {
        MethodNorm::Linear { eps }
    }

    pub fn upg(bubble: &BubbleSpec<S>, eps: S) -> Self {
        MethodNorm::Upg {
            d: bubble.effective_diffusion(eps),
            one_plus_b2: S::one() + bubble.b2,
        }
    }

    pub fn spls(eps: S) -> Self {
        MethodNorm::Spls { eps }
    }
}

/// The method's discrete optimal trial norm from precomputed parts.
pub fn method_star_norm_from_parts<S: Real>(parts: &NormParts<S>, norm: &MethodNorm<S>) -> S {
    match *norm {
        MethodNorm::Linear { eps } => {
            (eps * eps * parts.h1_semi_sq + parts.star_h_sq).sqrt()
        }
        MethodNorm::Upg { d, one_plus_b2 } => {
            ((d * d * parts.h1_semi_sq + parts.star_h_sq) / one_plus_b2).sqrt()
        }
        MethodNorm::Spls { eps } => {
            let tail = clamp_nonneg(parts.l2_sq - parts.mean * parts.mean);
            (eps * eps * parts.h1_semi_sq + tail).sqrt()
        }
    }
}

/// The method's discrete optimal trial norm of a P1 function, exact.
pub fn method_star_norm<S: Real>(u: &P1Function<S>, norm: &MethodNorm<S>) -> S {
    method_star_norm_from_parts(&NormParts::of_p1(u), norm)
}
