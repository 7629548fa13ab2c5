//! Closed-form exact solutions, stable boundary-layer evaluation, forcing
//! presets, and reference solutions for general forcing.
//!
//! For `f = 1` the exact solution is
//! `u(x) = x - (exp(x/eps) - 1) / (exp(1/eps) - 1)`, evaluated here in the
//! overflow-free form `x - exp((x-1)/eps) (1 - exp(-x/eps)) / (1 - exp(-1/eps))`.
//! Ground truth for other forcings is the exponential-bubble UPG solve on a
//! fine mesh, which is nodally exact up to the quadrature error of its dual
//! vector.

use crate::assembly::{rhs_const, rhs_upg, stencil_exponential};
use crate::bubbles::BubbleSpec;
use crate::error::{Error, Result};
use crate::mesh::{P1Function, UniformMesh};
use crate::quadrature::QuadRule;
use crate::solvers::thomas_solve;
use crate::{cast, Real};

/// Built-in forcing functions for the right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing<S> {
    /// `f(x) = c`; `c = 1` is the nonzero-mean study case.
    Const(S),
    /// `f(x) = cos(2 pi x)`, the zero-mean study case.
    Cos2Pi,
    /// `f(x) = x`.
    Linear,
    /// Polynomial with coefficients in ascending degree order.
    Poly(Vec<S>),
}

impl<S: Real> Forcing<S> {
    pub fn eval(&self, x: S) -> S {
        match self {
            Forcing::Const(c) => *c,
            Forcing::Cos2Pi => (cast::<S>(2.0 * std::f64::consts::PI) * x).cos(),
            Forcing::Linear => x,
            Forcing::Poly(coeffs) => coeffs
                .iter()
                .rev()
                .fold(S::zero(), |acc, &c| acc * x + c),
        }
    }

    /// Analytic antiderivative `w(x) = integral_0^x f(t) dt`.
    pub fn primitive(&self, x: S) -> S {
        match self {
            Forcing::Const(c) => *c * x,
            Forcing::Cos2Pi => {
                let two_pi = cast::<S>(2.0 * std::f64::consts::PI);
                (two_pi * x).sin() / two_pi
            }
            Forcing::Linear => x * x / cast(2.0),
            Forcing::Poly(coeffs) => {
                let mut acc = S::zero();
                for (k, &c) in coeffs.iter().enumerate().rev() {
                    acc = acc * x + c / crate::cast_usize::<S>(k + 1);
                }
                acc * x
            }
        }
    }

    /// `integral_0^1 f`.
    pub fn integral(&self) -> S {
        self.primitive(S::one())
    }

    /// Sup norm on `[0, 1]`; sampled on a fine grid for polynomials.
    pub fn sup_norm(&self) -> S {
        match self {
            Forcing::Const(c) => c.abs(),
            Forcing::Cos2Pi => S::one(),
            Forcing::Linear => S::one(),
            Forcing::Poly(_) => {
                let samples = 2001;
                (0..=samples)
                    .map(|k| {
                        self.eval(crate::cast_usize::<S>(k) / crate::cast_usize::<S>(samples))
                            .abs()
                    })
                    .fold(S::zero(), S::max)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Forcing::Const(c) => *c == S::zero(),
            Forcing::Poly(coeffs) => coeffs.iter().all(|&c| c == S::zero()),
            _ => false,
        }
    }

    /// The constant value when the forcing is constant.
    pub fn as_const(&self) -> Option<S> {
        match self {
            Forcing::Const(c) => Some(*c),
            Forcing::Poly(coeffs) => {
                if coeffs.iter().skip(1).all(|&c| c == S::zero()) {
                    Some(coeffs.first().copied().unwrap_or(S::zero()))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Forcing::Const(c) if *c == S::one() => "const1".to_string(),
            Forcing::Const(c) => format!("const:{c}"),
            Forcing::Cos2Pi => "cos2pi".to_string(),
            Forcing::Linear => "linear".to_string(),
            Forcing::Poly(coeffs) => {
                let parts: Vec<String> = coeffs.iter().map(|c| format!("{c}")).collect();
                format!("poly:{}", parts.join(";"))
            }
        }
    }

    /// Parses `const1`, `cos2pi`, `linear`, a comma-separated coefficient
    /// list (constant term first), or the labels this type emits
    /// (`const:<v>`, `poly:c0;c1;...`).
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "const1" => return Ok(Forcing::Const(S::one())),
            "cos2pi" => return Ok(Forcing::Cos2Pi),
            "linear" => return Ok(Forcing::Linear),
            _ => {}
        }
        let body = text
            .strip_prefix("poly:")
            .or_else(|| text.strip_prefix("const:"))
            .unwrap_or(text);
        let coeffs: Vec<S> = body
            .split([',', ';'])
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map(|v| cast::<S>(v))
                    .map_err(|_| Error::Parameter(format!("cannot parse forcing '{text}'")))
            })
            .collect::<Result<_>>()?;
        if coeffs.is_empty() {
            return Err(Error::Parameter("empty forcing coefficient list".into()));
        }
        if coeffs.len() == 1 {
            Ok(Forcing::Const(coeffs[0]))
        } else {
            Ok(Forcing::Poly(coeffs))
        }
    }
}

fn check_unit_interval<S: Real>(x: S) -> Result<()> {
    if x < S::zero() || x > S::one() {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Exact solution for `f = 1`, in the overflow-free form; finite for all
/// `eps >= 1e-14`.
pub fn exact_f1<S: Real>(eps: S, x: S) -> Result<S> {
    check_unit_interval(x)?;
    if eps <= S::zero() {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    // 1 - exp(-t) computed through exp_m1 for accuracy at large eps.
    let num = -(-x / eps).exp_m1();
    let den = -(-S::one() / eps).exp_m1();
    Ok(x - ((x - S::one()) / eps).exp() * num / den)
}

/// Derivative of [`exact_f1`]:
/// `u'(x) = 1 - exp((x-1)/eps) / (eps (1 - exp(-1/eps)))`.
pub fn exact_f1_deriv<S: Real>(eps: S, x: S) -> Result<S> {
    check_unit_interval(x)?;
    let den = -(-S::one() / eps).exp_m1();
    Ok(S::one() - ((x - S::one()) / eps).exp() / (eps * den))
}

/// Second derivative of [`exact_f1`].
pub fn exact_f1_second_deriv<S: Real>(eps: S, x: S) -> Result<S> {
    check_unit_interval(x)?;
    let den = -(-S::one() / eps).exp_m1();
    Ok(-((x - S::one()) / eps).exp() / (eps * eps * den))
}

/// `|u|^2 = integral of (u')^2` for the `f = 1` solution:
/// `(1 + E) / (2 eps (1 - E)) - 1` with `E = exp(-1/eps)`.
pub fn exact_f1_energy_sq<S: Real>(eps: S) -> S {
    let e1 = (-S::one() / eps).exp();
    (S::one() + e1) / (cast::<S>(2.0) * eps * (S::one() - e1)) - S::one()
}

/// Squared H1-seminorm error of the ramp `u_{h,c}(x_j) = x_j` that the
/// computed exponential scheme produces once `g0` saturates:
/// `1/(2 eps) (1+E)/(1-E) - (2/h)(1-E_h)/(1-E) + 1/h` with `E = exp(-1/eps)`
/// and `E_h = exp(-h/eps)`; approximately `1/(2 eps) - 1/h`.
pub fn energy_error_f1_underflow<S: Real>(eps: S, h: S) -> Result<S> {
    if eps <= S::zero() || h <= S::zero() {
        return Err(Error::Parameter(format!(
            "energy error needs eps > 0 and h > 0, got ({eps}, {h})"
        )));
    }
    let two = cast::<S>(2.0);
    let e1 = (-S::one() / eps).exp();
    let one_minus_e1 = -(-S::one() / eps).exp_m1();
    let one_minus_eh = -(-h / eps).exp_m1();
    Ok((S::one() + e1) / (two * eps * one_minus_e1) - two / h * one_minus_eh / one_minus_e1
        + h.recip())
}

/// Nodal deviation bound `|u_j - w(x_j)| <= ||f||_inf (2 - 2 eps/h) h` of
/// the special quadratic-bubble scheme; requires `h > 2.6 eps`.
pub fn special_case_nodal_bound<S: Real>(f_sup: S, eps: S, h: S) -> Result<S> {
    let threshold = cast::<S>(2.6) * eps;
    if h <= threshold {
        return Err(Error::Validity(format!(
            "nodal bound needs h > 2.6*eps, got h = {h} <= {threshold}"
        )));
    }
    let two = cast::<S>(2.0);
    Ok(f_sup * (two - two * eps / h) * h)
}

/// Cumulative integral `w(x) = integral_0^x f`, accumulated over
/// mesh-aligned Gauss-Legendre panels; exact for polynomials of degree
/// `<= 2*quad_order - 1`.
pub fn primitive_w<S: Real, F: Fn(S) -> S>(
    f: F,
    x: S,
    mesh: &UniformMesh<S>,
    quad_order: usize,
) -> Result<S> {
    check_unit_interval(x)?;
    let rule = QuadRule::new(quad_order)?;
    let mut acc = S::zero();
    for i in 0..mesh.n() {
        let a = mesh.node(i);
        let b = mesh.node(i + 1);
        if x <= a {
            break;
        }
        acc += rule.apply(&f, a, b.min(x))?;
    }
    Ok(acc)
}

/// Ground truth a solve is measured against.
#[derive(Debug, Clone)]
pub enum ExactSolution<S> {
    /// Zero forcing: the solution vanishes identically.
    Zero,
    /// `f = scale`: `scale` times the closed-form `f = 1` solution.
    ConstScaled { eps: S, scale: S },
    /// Fine-mesh nodally exact reference, interpolated linearly in between.
    Reference { fine: P1Function<S> },
}

impl<S: Real> ExactSolution<S> {
    pub fn eval(&self, x: S) -> Result<S> {
        match self {
            ExactSolution::Zero => {
                check_unit_interval(x)?;
                Ok(S::zero())
            }
            ExactSolution::ConstScaled { eps, scale } => Ok(*scale * exact_f1(*eps, x)?),
            ExactSolution::Reference { fine } => fine.eval(x),
        }
    }

    pub fn deriv(&self, x: S) -> Result<S> {
        match self {
            ExactSolution::Zero => {
                check_unit_interval(x)?;
                Ok(S::zero())
            }
            ExactSolution::ConstScaled { eps, scale } => Ok(*scale * exact_f1_deriv(*eps, x)?),
            ExactSolution::Reference { fine } => fine.deriv(x),
        }
    }

    pub fn as_reference(&self) -> Option<&P1Function<S>> {
        match self {
            ExactSolution::Reference { fine } => Some(fine),
            _ => None,
        }
    }
}

/// Fine-mesh exponential-bubble UPG solve used as ground truth for general
/// forcing. Requires `n_ref >= 512` and `n_ref * eps >= 4` so the layer is
/// resolved, unless `acknowledge_layer` accepts an under-resolved reference.
pub fn reference_solution<S: Real>(
    f: &Forcing<S>,
    eps: S,
    n_ref: usize,
    acknowledge_layer: bool,
) -> Result<ExactSolution<S>> {
    if f.is_zero() {
        return Ok(ExactSolution::Zero);
    }
    if !acknowledge_layer {
        if n_ref < 512 {
            return Err(Error::Validity(format!(
                "reference mesh n_ref = {n_ref} < 512; refine or acknowledge the layer"
            )));
        }
        if crate::cast_usize::<S>(n_ref) * eps < cast(4.0) {
            return Err(Error::Validity(format!(
                "n_ref * eps = {} < 4: the reference cannot resolve the layer; \
                 increase n_ref or acknowledge the layer",
                crate::cast_usize::<S>(n_ref) * eps
            )));
        }
    }
    let mesh = UniformMesh::new(n_ref)?;
    let bubble = BubbleSpec::exponential(eps, mesh.h())?;
    let matrix = stencil_exponential(&bubble, mesh.interior_count())?;
    let rhs = match f.as_const() {
        Some(c) => rhs_const(c, &mesh),
        // High-order dual: nodal exactness holds up to this quadrature error.
        None => rhs_upg(|x| f.eval(x), &mesh, &bubble, 16)?,
    };
    let sol = thomas_solve(&matrix, &rhs)?;
    Ok(ExactSolution::Reference {
        fine: P1Function::new(mesh, sol.coeffs)?,
    })
}
