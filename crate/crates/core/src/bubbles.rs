//! Bubble families on the reference cell `[0, h]` used to enrich the
//! Petrov-Galerkin test space.
//!
//! Two families are supported, each with closed-form moments
//! `b1 = (1/h) * integral of B` and `b2 = h * integral of (B')^2`:
//!
//! - quadratic, `B(x) = (4 beta / h^2) x (h - x)`, with `b1 = 2 beta / 3`
//!   and `b2 = 16 beta^2 / 3`;
//! - exponential, the solution of `-eps B'' - B' = 1/h`, `B(0) = B(h) = 0`,
//!   namely `B(x) = l0 (1 - exp(-x/eps)) - x/h`.
//!
//! Every exponential is evaluated through `exp(-t)` with `t >= 0`, so large
//! `h/eps` saturates `g0 = tanh(h/2eps)` to exactly 1.0 instead of
//! overflowing; the `g0_saturated` flag makes that regime machine-checkable.

use crate::error::{Error, Result};
use crate::quadrature::QuadRule;
use crate::{cast, Real};

/// Squared quasi-optimality factor `1 + b2` printed for the quadratic
/// family at `beta = 1`.
pub const BETA1_ONE_PLUS_B2: f64 = 19.0 / 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum BubbleKind<S> {
    Quadratic {
        beta: S,
    },
    Exponential {
        eps: S,
        g0: S,
        l0: S,
        u0: S,
        /// Effective diffusion `d = eps + h*b1 = h / (2 g0)`.
        d: S,
        saturated: bool,
    },
}

/// One bubble family on a cell of width `h`, with its moments.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleSpec<S> {
    pub kind: BubbleKind<S>,
    pub h: S,
    pub b1: S,
    pub b2: S,
}

impl<S: Real> BubbleSpec<S> {
    /// Quadratic bubble `B(x) = (4 beta / h^2) x (h - x)`.
    pub fn quadratic(beta: S, h: S) -> Result<Self> {
        if beta <= S::zero() || h <= S::zero() {
            return Err(Error::Parameter(format!(
                "quadratic bubble needs beta > 0 and h > 0, got beta = {beta}, h = {h}"
            )));
        }
        let b1 = cast::<S>(2.0) * beta / cast(3.0);
        let b2 = cast::<S>(16.0) * beta * beta / cast(3.0);
        Ok(BubbleSpec {
            kind: BubbleKind::Quadratic { beta },
            h,
            b1,
            b2,
        })
    }

    /// Exponential bubble solving `-eps B'' - B' = 1/h` on `[0, h]`.
    ///
    /// `g0 = tanh(h/2eps)` is computed as `(1 - q) / (1 + q)` with
    /// `q = exp(-h/eps)`, never through `exp(+h/2eps)`.
    pub fn exponential(eps: S, h: S) -> Result<Self> {
        if eps <= S::zero() || h <= S::zero() {
            return Err(Error::Parameter(format!(
                "exponential bubble needs eps > 0 and h > 0, got eps = {eps}, h = {h}"
            )));
        }
        let q = (-h / eps).exp();
        let g0 = (S::one() - q) / (S::one() + q);
        let two = cast::<S>(2.0);
        let l0 = (S::one() + g0) / (two * g0);
        let u0 = (S::one() - g0) / (two * g0);
        let b1 = (two * g0).recip() - eps / h;
        let b2 = g0.recip() * h / (two * eps) - S::one();
        let d = h / (two * g0);
        let saturated = g0 == S::one();
        Ok(BubbleSpec {
            kind: BubbleKind::Exponential {
                eps,
                g0,
                l0,
                u0,
                d,
                saturated,
            },
            h,
            b1,
            b2,
        })
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, BubbleKind::Exponential { .. })
    }

    pub fn g0(&self) -> Option<S> {
        match self.kind {
            BubbleKind::Exponential { g0, .. } => Some(g0),
            BubbleKind::Quadratic { .. } => None,
        }
    }

    /// True iff the computed `g0` equals 1.0 bit-exactly.
    pub fn g0_saturated(&self) -> bool {
        match self.kind {
            BubbleKind::Exponential { saturated, .. } => saturated,
            BubbleKind::Quadratic { .. } => false,
        }
    }

    /// `d = eps + h * b1`. For the exponential family built with the same
    /// `eps` this equals `h / (2 g0)`, which is returned directly.
    pub fn effective_diffusion(&self, eps: S) -> S {
        match self.kind {
            BubbleKind::Exponential { d, .. } => d,
            BubbleKind::Quadratic { .. } => eps + self.h * self.b1,
        }
    }

    /// Bubble value on `[0, h]`.
    pub fn eval(&self, x: S) -> Result<S> {
        if x < S::zero() || x > self.h {
            return Err(Error::Domain(format!(
                "x = {x} outside the bubble cell [0, {}]",
                self.h
            )));
        }
        Ok(match self.kind {
            BubbleKind::Quadratic { beta } => {
                cast::<S>(4.0) * beta / (self.h * self.h) * x * (self.h - x)
            }
            BubbleKind::Exponential { eps, l0, .. } => {
                // 1 - exp(-x/eps) through exp_m1 for small x/eps.
                l0 * (-(-x / eps).exp_m1()) - x / self.h
            }
        })
    }

    /// Analytic derivative of the bubble.
    pub fn deriv(&self, x: S) -> Result<S> {
        if x < S::zero() || x > self.h {
            return Err(Error::Domain(format!(
                "x = {x} outside the bubble cell [0, {}]",
                self.h
            )));
        }
        Ok(match self.kind {
            BubbleKind::Quadratic { beta } => {
                cast::<S>(4.0) * beta / (self.h * self.h) * (self.h - cast::<S>(2.0) * x)
            }
            BubbleKind::Exponential { eps, l0, .. } => {
                l0 * (-x / eps).exp() / eps - self.h.recip()
            }
        })
    }

    /// Analytic second derivative of the bubble.
    pub fn second_deriv(&self, x: S) -> Result<S> {
        if x < S::zero() || x > self.h {
            return Err(Error::Domain(format!(
                "x = {x} outside the bubble cell [0, {}]",
                self.h
            )));
        }
        Ok(match self.kind {
            BubbleKind::Quadratic { beta } => {
                -cast::<S>(8.0) * beta / (self.h * self.h)
            }
            BubbleKind::Exponential { eps, l0, .. } => -l0 * (-x / eps).exp() / (eps * eps),
        })
    }

    /// Moments `(b1, b2)` recomputed by quadrature of the bubble and of its
    /// analytic derivative, as an oracle for the closed forms.
    pub fn moments_by_quadrature(&self, quad_order: usize) -> Result<(S, S)> {
        let rule = QuadRule::new(quad_order)?;
        let panels = if self.is_exponential() { 8 } else { 2 };
        let ib = rule.apply_panels(&|x| self.eval(x).unwrap(), S::zero(), self.h, panels)?;
        let idb = rule.apply_panels(
            &|x| {
                let d = self.deriv(x).unwrap();
                d * d
            },
            S::zero(),
            self.h,
            panels,
        )?;
        Ok((ib / self.h, idb * self.h))
    }
}

/// The quadratic-bubble parameter that zeroes the stencil's super-diagonal,
/// `beta = (3/4)(1 - 2 eps / h)`; requires `h > 2.6 eps`.
pub fn special_beta<S: Real>(eps: S, h: S) -> Result<S> {
    if eps <= S::zero() || h <= S::zero() {
        return Err(Error::Parameter(format!(
            "special beta needs eps > 0 and h > 0, got eps = {eps}, h = {h}"
        )));
    }
    let threshold = cast::<S>(2.6) * eps;
    if h <= threshold {
        return Err(Error::Validity(format!(
            "special beta needs h > 2.6*eps, got h = {h} <= {threshold}"
        )));
    }
    Ok(cast::<S>(0.75) * (S::one() - cast::<S>(2.0) * eps / h))
}

/// Evaluates `eps^2 + h^2/pi^2 <= (eps + h*b1)^2` verbatim; true means the
/// UPG error theorem's hypothesis holds for this configuration.
pub fn check_h_restriction<S: Real>(eps: S, h: S, b1: S) -> bool {
    let pi = cast::<S>(std::f64::consts::PI);
    let d = eps + h * b1;
    eps * eps + h * h / (pi * pi) <= d * d
}
