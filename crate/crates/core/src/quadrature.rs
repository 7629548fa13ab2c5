//! Gauss-Legendre quadrature: single panels, composite panels, and
//! layer-graded integration for boundary-layer integrands.

use crate::error::{Error, Result};
use crate::mesh::UniformMesh;
use crate::{cast, cast_usize, Real};

/// Largest supported Gauss-Legendre order.
pub const MAX_ORDER: usize = 32;

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct QuadRule<S> {
    order: usize,
    points: Vec<S>,
    weights: Vec<S>,
}

impl<S: Real> QuadRule<S> {
    /// Builds the rule of the given order (number of points, 1..=32).
    ///
    /// Nodes are found by Newton iteration on the Legendre polynomial. The
    /// constructor checks that the weights sum to the interval length and,
    /// for orders up to 20, that even monomials up to degree `2*order - 2`
    /// integrate exactly.
    pub fn new(order: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::Parameter(format!(
                "quadrature order {order} outside 1..={MAX_ORDER}"
            )));
        }
        let mut points = vec![S::zero(); order];
        let mut weights = vec![S::zero(); order];
        let pi: S = cast(std::f64::consts::PI);
        let n_s = cast_usize::<S>(order);
        for k in 0..order {
            // Tricomi-type initial guess, then Newton on P_n.
            let mut x = (pi * (cast_usize::<S>(k) + cast(0.75)) / (n_s + cast(0.5))).cos();
            let mut dp = S::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(order, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() <= S::epsilon() * (S::one() + x.abs()) {
                    let (p2, d2) = legendre_with_deriv(order, x);
                    dp = d2;
                    x -= p2 / d2;
                    break;
                }
            }
            points[k] = -x; // ascending order
            weights[k] = cast::<S>(2.0) / ((S::one() - x * x) * dp * dp);
        }
        points.reverse();
        weights.reverse();
        let rule = QuadRule {
            order,
            points,
            weights,
        };
        rule.self_check()?;
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    fn self_check(&self) -> Result<()> {
        let guard = cast::<S>(500.0) * S::epsilon();
        let sum = self.weights.iter().fold(S::zero(), |a, &w| a + w);
        if (sum - cast(2.0)).abs() > guard {
            return Err(Error::Parameter(format!(
                "quadrature weights of order {} sum to {} instead of 2",
                self.order, sum
            )));
        }
        if self.order <= 20 {
            // Odd monomials vanish by symmetry; check the even ones.
            let mut deg = 0usize;
            while deg + 2 <= 2 * self.order {
                let exact = cast::<S>(2.0) / cast_usize::<S>(deg + 1);
                let mut val = S::zero();
                for (&x, &w) in self.points.iter().zip(&self.weights) {
                    val += w * x.powi(deg as i32);
                }
                if (val - exact).abs() > guard * (S::one() + exact.abs()) {
                    return Err(Error::Parameter(format!(
                        "order-{} rule misses degree-{} exactness: {} vs {}",
                        self.order, deg, val, exact
                    )));
                }
                deg += 2;
            }
        }
        Ok(())
    }

    /// Applies the rule on `[a, b]`; errors on a non-finite sample.
    pub fn apply<F: Fn(S) -> S>(&self, f: &F, a: S, b: S) -> Result<S> {
        let half = (b - a) / cast(2.0);
        let mid = (a + b) / cast(2.0);
        let mut acc = S::zero();
        for (&t, &w) in self.points.iter().zip(&self.weights) {
            let x = mid + half * t;
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("integrand at x = {x}")));
            }
            acc += w * v;
        }
        Ok(acc * half)
    }

    /// Composite application on `panels` equal subintervals of `[a, b]`.
    pub fn apply_panels<F: Fn(S) -> S>(&self, f: &F, a: S, b: S, panels: usize) -> Result<S> {
        let m = panels.max(1);
        let width = (b - a) / cast_usize(m);
        let mut acc = S::zero();
        for i in 0..m {
            let left = a + width * cast_usize(i);
            let right = if i + 1 == m { b } else { a + width * cast_usize(i + 1) };
            acc += self.apply(f, left, right)?;
        }
        Ok(acc)
    }
}

fn legendre_with_deriv<S: Real>(n: usize, x: S) -> (S, S) {
    let mut p0 = S::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, S::zero());
    }
    for k in 2..=n {
        let k_s = cast_usize::<S>(k);
        let p2 = ((cast::<S>(2.0) * k_s - S::one()) * x * p1 - (k_s - S::one()) * p0) / k_s;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let n_s = cast_usize::<S>(n);
    let d = n_s * (x * p1 - p0) / (x * x - S::one());
    (p1, d)
}

/// Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate<S: Real, F: Fn(S) -> S>(f: F, a: S, b: S, order: usize) -> Result<S> {
    if a > b {
        return Err(Error::Domain(format!("integration bounds {a} > {b}")));
    }
    QuadRule::new(order)?.apply(&f, a, b)
}

/// Composite Gauss-Legendre integral over `panels` equal subintervals.
pub fn integrate_panels<S: Real, F: Fn(S) -> S>(
    f: F,
    a: S,
    b: S,
    order: usize,
    panels: usize,
) -> Result<S> {
    if a > b {
        return Err(Error::Domain(format!("integration bounds {a} > {b}")));
    }
    QuadRule::new(order)?.apply_panels(&f, a, b, panels)
}

/// Integrates over a fixed breakpoint partition, bisecting every subinterval
/// per level until two successive levels agree to `rel_tol` relative.
///
/// The roundoff escape accepts a level once the change is far below the
/// first level's magnitude, which keeps identically-zero integrands from
/// chasing noise.
pub fn adaptive_breakpoints<S: Real, F: Fn(S) -> S>(
    f: &F,
    breakpoints: &[S],
    order: usize,
    rel_tol: S,
    context: &str,
) -> Result<S> {
    const MAX_LEVELS: usize = 20;
    let rule = QuadRule::new(order)?;
    let mut last = S::zero();
    let mut previous = S::zero();
    let mut first_scale = S::zero();
    for level in 0..MAX_LEVELS {
        let splits = 1usize << level;
        let mut acc = S::zero();
        for w in breakpoints.windows(2) {
            acc += rule.apply_panels(f, w[0], w[1], splits)?;
        }
        if level == 0 {
            first_scale = S::one() + acc.abs();
        } else {
            let diff = (acc - last).abs();
            let rel_ok = diff <= rel_tol * acc.abs().max(last.abs());
            let noise_ok = diff <= cast::<S>(100.0) * S::epsilon() * first_scale;
            if rel_ok || noise_ok {
                return Ok(acc);
            }
        }
        previous = last;
        last = acc;
    }
    Err(Error::ToleranceNotMet {
        context: context.to_string(),
        last: last.to_f64().unwrap_or(f64::NAN),
        previous: previous.to_f64().unwrap_or(f64::NAN),
    })
}

/// Width of the graded region in front of the outflow boundary `x = 1`.
pub fn layer_width<S: Real>(eps: S) -> S {
    let half = cast::<S>(0.5);
    if eps >= cast(std::f64::consts::E.recip()) {
        return half;
    }
    (cast::<S>(8.0) * eps * eps.recip().ln()).min(half)
}

/// Geometrically graded points of `[1 - delta, 1]`, halving toward `x = 1`
/// with a width floor of `1e-3 * eps`.
fn graded_points<S: Real>(eps: S, delta: S) -> Vec<S> {
    let one = S::one();
    let floor = (cast::<S>(1e-3) * eps).max(S::min_positive_value());
    let mut pts = vec![one - delta];
    let mut w = delta;
    while w / cast(2.0) > floor {
        w /= cast(2.0);
        pts.push(one - w);
    }
    pts.push(one);
    pts
}

fn merge_sorted<S: Real>(a: &[S], b: &[S]) -> Vec<S> {
    let mut all: Vec<S> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).expect("breakpoints must be ordered"));
    all.dedup_by(|x, y| (*x - *y).abs() <= S::epsilon());
    all
}

/// Integrates `f` over `[0, 1]` with geometric grading into the boundary
/// layer at `x = 1`, refining until two levels agree to `1e-10` relative.
pub fn layer_graded_integrate<S: Real, F: Fn(S) -> S>(f: F, eps: S, order: usize) -> Result<S> {
    if eps <= S::zero() {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    let delta = layer_width(eps);
    let pts = merge_sorted(&[S::zero()], &graded_points(eps, delta));
    adaptive_breakpoints(&f, &pts, order, cast(1e-10), "layer-graded integration")
}

/// Layer-graded integration with panels additionally aligned to the mesh
/// nodes, for integrands with kinks there (errors of P1 functions).
pub fn layer_graded_integrate_aligned<S: Real, F: Fn(S) -> S>(
    f: F,
    eps: S,
    order: usize,
    mesh: &UniformMesh<S>,
) -> Result<S> {
    if eps <= S::zero() {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    let delta = layer_width(eps);
    let pts = merge_sorted(mesh.nodes(), &graded_points(eps, delta));
    adaptive_breakpoints(&f, &pts, order, cast(1e-10), "layer-graded integration")
}

/// Adaptive integral over one cell `[a, b]`, grading geometrically where the
/// cell overlaps the boundary layer.
pub(crate) fn cell_integral_graded<S: Real, F: Fn(S) -> S>(
    f: &F,
    a: S,
    b: S,
    eps: S,
    order: usize,
) -> Result<S> {
    let delta = layer_width(eps);
    let start = S::one() - delta;
    let mut pts: Vec<S> = vec![a];
    if b > start {
        for p in graded_points(eps, delta) {
            if p > a && p < b {
                pts.push(p);
            }
        }
    }
    pts.push(b);
    let pts = merge_sorted(&pts, &[]);
    adaptive_breakpoints(f, &pts, order, cast(1e-10), "graded cell integral")
}
