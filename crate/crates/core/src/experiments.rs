//! End-to-end solves: assembles and solves one method at one parameter
//! point, measures every error norm against ground truth, and drives
//! convergence and underflow studies.
//!
//! Ground truth is the closed form for constant forcing and the fine-mesh
//! exponential-bubble reference otherwise. Errors against the closed form
//! are integrated with layer-graded quadrature; errors against a reference
//! are exact P1 computations on the fine mesh.

use crate::analytic::{reference_solution, ExactSolution, Forcing};
use crate::assembly::{
    assemble_spls, rhs_const, rhs_standard, rhs_upg, stencil_exponential, stencil_upg,
};
use crate::bubbles::{check_h_restriction, special_beta, BubbleSpec};
use crate::error::{Error, Result};
use crate::mesh::{P1Function, UniformMesh};
use crate::norms::{
    discrete_star_seminorm_sq_from_averages, method_star_norm_from_parts, MethodNorm, NormParts,
};
use crate::quadrature::{cell_integral_graded, layer_graded_integrate_aligned};
use crate::solvers::{spls_solve, thomas_solve};
use crate::{cast_usize, Real};

/// Quadratic-bubble parameter selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaChoice<S> {
    Fixed(S),
    /// `beta = (3/4)(1 - 2 eps/h)`, zeroing the stencil's super-diagonal.
    Special,
}

/// One of the four discretizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method<S> {
    Linear,
    Spls,
    UpgQuad(BetaChoice<S>),
    UpgExp,
}

impl<S: Real> Method<S> {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::Spls => "spls",
            Method::UpgQuad(_) => "upg_quad",
            Method::UpgExp => "upg_exp",
        }
    }
}

/// Knobs shared by all experiment drivers.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Gauss-Legendre order for dual vectors and error integrals.
    pub quad_order: usize,
    /// Target reference mesh size (rounded up to a multiple of `n`).
    pub n_ref: usize,
    /// Compute dual vectors by quadrature even for constant forcing.
    pub force_quadrature_dual: bool,
    /// Accept a reference mesh that does not resolve the layer.
    pub acknowledge_layer: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            quad_order: 8,
            n_ref: 1024,
            force_quadrature_dual: false,
            acknowledge_layer: false,
        }
    }
}

/// Oscillation diagnostics of a discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation<S> {
    pub sign_changes: usize,
    pub total_variation: S,
}

/// One solve's parameters, errors, and diagnostics.
#[derive(Debug, Clone)]
pub struct RunRecord<S> {
    pub method: Method<S>,
    pub epsilon: S,
    pub n: usize,
    pub h: S,
    /// Resolved quadratic-bubble parameter; `None` for other methods.
    pub beta: Option<S>,
    pub forcing: String,
    pub err_h1: S,
    pub err_l2: S,
    pub err_star: S,
    pub err_star_h: S,
    pub quasi_opt_ratio: S,
    /// True when the interpolant error vanished and the ratio defaulted to 1.
    pub quasi_opt_degenerate: bool,
    pub oscillation: Oscillation<S>,
    pub g0_saturated: Option<bool>,
    pub restriction_ok: Option<bool>,
    pub residual_inf: S,
    pub solution: P1Function<S>,
}

/// Counts strict sign alternations of the first differences of the nodal
/// values (boundary zeros included) in excess of the single turn a
/// physical profile has, plus the total variation.
///
/// A solution that rises and falls back to the outflow boundary once has
/// exactly one alternation, so it counts zero; every additional wiggle
/// adds one.
pub fn oscillation_diagnostic<S: Real>(u: &P1Function<S>) -> Oscillation<S> {
    let n = u.mesh().n();
    let diffs: Vec<S> = (0..n)
        .map(|i| u.node_value(i + 1) - u.node_value(i))
        .collect();
    let total_variation = diffs.iter().fold(S::zero(), |acc, d| acc + d.abs());
    let alternations = diffs
        .windows(2)
        .filter(|w| w[0] * w[1] < S::zero())
        .count();
    Oscillation {
        sign_changes: alternations.saturating_sub(1),
        total_variation,
    }
}

fn clamp_nonneg<S: Real>(v: S) -> S {
    if v < S::zero() {
        S::zero()
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy)]
struct ErrNorms<S> {
    h1: S,
    l2: S,
    star: S,
    star_h: S,
}

fn norms_from_parts<S: Real>(parts: NormParts<S>, eps: S, mnorm: &MethodNorm<S>) -> ErrNorms<S> {
    let star =
        (eps * eps * parts.h1_semi_sq + clamp_nonneg(parts.l2_sq - parts.mean * parts.mean)).sqrt();
    ErrNorms {
        h1: parts.h1_semi_sq.sqrt(),
        l2: parts.l2_sq.sqrt(),
        star,
        star_h: method_star_norm_from_parts(&parts, mnorm),
    }
}

/// All error norms of `truth - approx`, with the discrete seminorm taken
/// over the cells of `approx`'s (coarse) mesh.
fn error_norms<S: Real>(
    truth: &ExactSolution<S>,
    approx: &P1Function<S>,
    eps: S,
    mnorm: &MethodNorm<S>,
    quad_order: usize,
) -> Result<ErrNorms<S>> {
    let mesh = approx.mesh();
    match truth {
        ExactSolution::Zero => Ok(norms_from_parts(NormParts::of_p1(approx), eps, mnorm)),
        ExactSolution::Reference { fine } => {
            let factor = fine.mesh().n() / mesh.n();
            if factor * mesh.n() != fine.mesh().n() {
                return Err(Error::Parameter(format!(
                    "reference mesh {} is not a refinement of n = {}",
                    fine.mesh().n(),
                    mesh.n()
                )));
            }
            let lifted = approx.refine(factor)?;
            let diff: Vec<S> = fine
                .coeffs()
                .iter()
                .zip(lifted.coeffs())
                .map(|(&a, &b)| a - b)
                .collect();
            let e = P1Function::new(fine.mesh().clone(), diff)?;
            let fine_avgs = e.cell_averages();
            let coarse_avgs: Vec<S> = (0..mesh.n())
                .map(|i| {
                    fine_avgs[i * factor..(i + 1) * factor]
                        .iter()
                        .fold(S::zero(), |a, &v| a + v)
                        / cast_usize::<S>(factor)
                })
                .collect();
            let parts = NormParts {
                h1_semi_sq: e.h1_seminorm_sq(),
                star_h_sq: discrete_star_seminorm_sq_from_averages(&coarse_avgs),
                l2_sq: e.l2_norm_sq(),
                mean: e.mean(),
            };
            Ok(norms_from_parts(parts, eps, mnorm))
        }
        ExactSolution::ConstScaled { .. } => {
            let e = |x: S| truth.eval(x).unwrap() - approx.eval(x).unwrap();
            let de = |x: S| truth.deriv(x).unwrap() - approx.deriv(x).unwrap();
            let h1_sq = layer_graded_integrate_aligned(
                |x| {
                    let d = de(x);
                    d * d
                },
                eps,
                quad_order,
                mesh,
            )?;
            let l2_sq = layer_graded_integrate_aligned(
                |x| {
                    let v = e(x);
                    v * v
                },
                eps,
                quad_order,
                mesh,
            )?;
            let mean = layer_graded_integrate_aligned(e, eps, quad_order, mesh)?;
            let mut avgs = Vec::with_capacity(mesh.n());
            for i in 0..mesh.n() {
                let v = cell_integral_graded(&e, mesh.node(i), mesh.node(i + 1), eps, quad_order)?;
                avgs.push(v / mesh.h());
            }
            let parts = NormParts {
                h1_semi_sq: h1_sq,
                star_h_sq: discrete_star_seminorm_sq_from_averages(&avgs),
                l2_sq,
                mean,
            };
            Ok(norms_from_parts(parts, eps, mnorm))
        }
    }
}

fn dual_vector<S: Real>(
    forcing: &Forcing<S>,
    mesh: &UniformMesh<S>,
    bubble: Option<&BubbleSpec<S>>,
    options: &SolveOptions,
) -> Result<Vec<S>> {
    if let (Some(c), false) = (forcing.as_const(), options.force_quadrature_dual) {
        return Ok(rhs_const(c, mesh));
    }
    match bubble {
        Some(spec) => rhs_upg(|x| forcing.eval(x), mesh, spec, options.quad_order),
        None => rhs_standard(|x| forcing.eval(x), mesh, options.quad_order),
    }
}

fn ground_truth<S: Real>(
    forcing: &Forcing<S>,
    eps: S,
    n: usize,
    options: &SolveOptions,
) -> Result<ExactSolution<S>> {
    if forcing.is_zero() {
        return Ok(ExactSolution::Zero);
    }
    if let Some(c) = forcing.as_const() {
        return Ok(ExactSolution::ConstScaled { eps, scale: c });
    }
    let base = options.n_ref.max(512);
    let n_ref = n * base.div_ceil(n);
    reference_solution(forcing, eps, n_ref, options.acknowledge_layer)
}

/// Assembles, solves, and measures one method at one parameter point.
pub fn solve_method<S: Real>(
    method: Method<S>,
    eps: S,
    n: usize,
    forcing: &Forcing<S>,
    options: &SolveOptions,
) -> Result<RunRecord<S>> {
    if eps <= S::zero() {
        return Err(Error::Validity(format!("eps = {eps} must be positive")));
    }
    let mesh = UniformMesh::new(n)?;
    let h = mesh.h();
    let m = mesh.interior_count();

    let mut beta = None;
    let mut g0_saturated = None;
    let mut restriction_ok = None;

    let (solution, residual_inf, mnorm) = match method {
        Method::Linear => {
            let matrix = stencil_upg(eps, h, S::zero(), m)?;
            let rhs = dual_vector(forcing, &mesh, None, options)?;
            let sol = thomas_solve(&matrix, &rhs)?;
            (
                P1Function::new(mesh.clone(), sol.coeffs)?,
                sol.residual_inf,
                MethodNorm::linear(eps),
            )
        }
        Method::UpgQuad(choice) => {
            let b = match choice {
                BetaChoice::Fixed(b) => b,
                BetaChoice::Special => special_beta(eps, h)?,
            };
            beta = Some(b);
            let spec = BubbleSpec::quadratic(b, h)?;
            restriction_ok = Some(check_h_restriction(eps, h, spec.b1));
            let matrix = stencil_upg(eps, h, spec.b1, m)?;
            let rhs = dual_vector(forcing, &mesh, Some(&spec), options)?;
            let sol = thomas_solve(&matrix, &rhs)?;
            let mnorm = MethodNorm::upg(&spec, eps);
            (
                P1Function::new(mesh.clone(), sol.coeffs)?,
                sol.residual_inf,
                mnorm,
            )
        }
        Method::UpgExp => {
            let spec = BubbleSpec::exponential(eps, h)?;
            g0_saturated = Some(spec.g0_saturated());
            restriction_ok = Some(check_h_restriction(eps, h, spec.b1));
            let matrix = stencil_exponential(&spec, m)?;
            let rhs = dual_vector(forcing, &mesh, Some(&spec), options)?;
            let sol = thomas_solve(&matrix, &rhs)?;
            let mnorm = MethodNorm::upg(&spec, eps);
            (
                P1Function::new(mesh.clone(), sol.coeffs)?,
                sol.residual_inf,
                mnorm,
            )
        }
        Method::Spls => {
            let sys = assemble_spls(|x| forcing.eval(x), &mesh, eps, options.quad_order)?;
            let sol = spls_solve(&sys)?;
            (sol.u, sol.residual_inf, MethodNorm::spls(eps))
        }
    };

    let truth = ground_truth(forcing, eps, n, options)?;
    let errs = error_norms(&truth, &solution, eps, &mnorm, options.quad_order)?;
    let interpolant = P1Function::interpolate(|x| truth.eval(x).unwrap(), &mesh)?;
    let interp_errs = error_norms(&truth, &interpolant, eps, &mnorm, options.quad_order)?;
    let (quasi_opt_ratio, quasi_opt_degenerate) = if interp_errs.star_h == S::zero() {
        (S::one(), true)
    } else {
        (errs.star_h / interp_errs.star_h, false)
    };

    let oscillation = oscillation_diagnostic(&solution);
    Ok(RunRecord {
        method,
        epsilon: eps,
        n,
        h,
        beta,
        forcing: forcing.label(),
        err_h1: errs.h1,
        err_l2: errs.l2,
        err_star: errs.star,
        err_star_h: errs.star_h,
        quasi_opt_ratio,
        quasi_opt_degenerate,
        oscillation,
        g0_saturated,
        restriction_ok,
        residual_inf,
        solution,
    })
}

/// Error ratio `||u - u_h|| / ||u - u_I||` in the method's own norm; the
/// flag reports the zero-interpolant-error convention.
pub fn quasi_optimality_probe<S: Real>(
    method: Method<S>,
    eps: S,
    n: usize,
    forcing: &Forcing<S>,
    options: &SolveOptions,
) -> Result<(S, bool)> {
    let record = solve_method(method, eps, n, forcing, options)?;
    Ok((record.quasi_opt_ratio, record.quasi_opt_degenerate))
}

/// Which error the convergence fit tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSelector {
    H1,
    L2,
    Star,
    StarH,
}

impl NormSelector {
    pub fn pick<S: Real>(&self, record: &RunRecord<S>) -> S {
        match self {
            NormSelector::H1 => record.err_h1,
            NormSelector::L2 => record.err_l2,
            NormSelector::Star => record.err_star,
            NormSelector::StarH => record.err_star_h,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "h1" => Ok(NormSelector::H1),
            "l2" => Ok(NormSelector::L2),
            "star" => Ok(NormSelector::Star),
            "star-h" | "star_h" => Ok(NormSelector::StarH),
            other => Err(Error::Parameter(format!("unknown norm selector '{other}'"))),
        }
    }
}

/// Records across a mesh sequence plus the fitted convergence rate.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy<S> {
    pub records: Vec<RunRecord<S>>,
    /// Least-squares slope of `log(error)` vs `log(h)`; `None` when an
    /// error vanished and the rate is undefined.
    pub rate: Option<S>,
}

/// Runs the method across `n_list` and fits the convergence rate in the
/// selected norm.
pub fn convergence_study<S: Real>(
    method: Method<S>,
    eps: S,
    n_list: &[usize],
    forcing: &Forcing<S>,
    selector: NormSelector,
    options: &SolveOptions,
) -> Result<ConvergenceStudy<S>> {
    if n_list.len() < 3 {
        return Err(Error::Parameter(format!(
            "convergence study needs >= 3 mesh sizes, got {}",
            n_list.len()
        )));
    }
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Parameter(
            "mesh sizes must be strictly increasing".into(),
        ));
    }
    let mut records = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let record = solve_method(method, eps, n, forcing, options).map_err(|e| {
            Error::Validity(format!(
                "convergence study aborted at n = {n} with {} of {} records done: {e}",
                records.len(),
                n_list.len()
            ))
        })?;
        records.push(record);
    }
    let rate = fit_rate(&records, selector);
    Ok(ConvergenceStudy { records, rate })
}

fn fit_rate<S: Real>(records: &[RunRecord<S>], selector: NormSelector) -> Option<S> {
    let mut xs = Vec::with_capacity(records.len());
    let mut ys = Vec::with_capacity(records.len());
    for r in records {
        let err = selector.pick(r);
        if err <= S::zero() {
            return None;
        }
        xs.push(r.h.ln());
        ys.push(err.ln());
    }
    let n = cast_usize::<S>(xs.len());
    let xbar = xs.iter().fold(S::zero(), |a, &v| a + v) / n;
    let ybar = ys.iter().fold(S::zero(), |a, &v| a + v) / n;
    let mut num = S::zero();
    let mut den = S::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    Some(num / den)
}

/// One row of the underflow study for the exponential scheme.
#[derive(Debug, Clone)]
pub struct UnderflowRow<S> {
    pub epsilon: S,
    pub g0: S,
    pub g0_saturated: bool,
    /// Interior stencil row `(lower, diag, upper)`.
    pub stencil_row: (S, S, S),
    /// Nodal solution for `f = 1` with the analytic dual vector.
    pub nodal: Vec<S>,
    /// `max_j |u_j - x_j|` against the ramp the saturated scheme produces.
    pub max_ramp_deviation: S,
}

/// Solves the exponential scheme for `f = 1` across `eps_list` on the mesh
/// with `n` cells, recording how the stencil degenerates as `exp(-h/eps)`
/// underflows.
pub fn underflow_probe<S: Real>(eps_list: &[S], n: usize) -> Result<Vec<UnderflowRow<S>>> {
    let mesh = UniformMesh::new(n)?;
    let h = mesh.h();
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let spec = BubbleSpec::exponential(eps, h)?;
        let matrix = stencil_exponential(&spec, mesh.interior_count())?;
        let rhs = rhs_const(S::one(), &mesh);
        let sol = thomas_solve(&matrix, &rhs)?;
        let max_ramp_deviation = sol
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &u)| (u - mesh.node(j + 1)).abs())
            .fold(S::zero(), S::max);
        rows.push(UnderflowRow {
            epsilon: eps,
            g0: spec.g0().expect("exponential bubble"),
            g0_saturated: spec.g0_saturated(),
            stencil_row: (matrix.lower()[0], matrix.diag()[0], matrix.upper()[0]),
            nodal: sol.coeffs,
            max_ramp_deviation,
        });
    }
    Ok(rows)
}
