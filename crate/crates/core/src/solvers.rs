//! Linear algebra for the discrete systems: tridiagonal elimination, the
//! forward sweep for the lower-bidiagonal special case, and the SPLS
//! Schur-complement solve.
//!
//! The tridiagonal sweep does not pivot; all systems produced by the
//! discretizations are diagonally dominant or triangular, and a
//! pivot-magnitude guard raises instead of proceeding silently.

use crate::assembly::{SplsSystem, TriDiag};
use crate::dense::Cholesky;
use crate::error::{Error, Result};
use crate::mesh::{P1Function, P2Function};
use crate::{cast, Real};

/// One solve's coefficients together with its max-norm residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S> {
    pub coeffs: Vec<S>,
    pub residual_inf: S,
}

fn pivot_guard<S: Real>() -> S {
    // 1e-300 in f64; underflows to zero for narrower scalars, which keeps
    // the guard meaningful as "nonzero pivot".
    cast::<S>(1e-300).max(S::zero())
}

/// Thomas elimination for a tridiagonal system.
pub fn thomas_solve<S: Real>(m: &TriDiag<S>, rhs: &[S]) -> Result<Solution<S>> {
    let dim = m.dim();
    if rhs.len() != dim {
        return Err(Error::Parameter(format!(
            "rhs length {} does not match matrix size {dim}",
            rhs.len()
        )));
    }
    let guard = pivot_guard::<S>();
    let mut diag = m.diag().to_vec();
    let mut b = rhs.to_vec();
    for i in 1..dim {
        let pivot = diag[i - 1];
        if pivot.abs() <= guard {
            return Err(Error::SingularPivot(i - 1));
        }
        let factor = m.lower()[i - 1] / pivot;
        diag[i] -= factor * m.upper()[i - 1];
        b[i] = b[i] - factor * b[i - 1];
    }
    if diag[dim - 1].abs() <= guard {
        return Err(Error::SingularPivot(dim - 1));
    }
    let mut x = vec![S::zero(); dim];
    x[dim - 1] = b[dim - 1] / diag[dim - 1];
    for i in (0..dim - 1).rev() {
        x[i] = (b[i] - m.upper()[i] * x[i + 1]) / diag[i];
    }
    let residual_inf = m.residual_inf(&x, rhs);
    Ok(Solution {
        coeffs: x,
        residual_inf,
    })
}

/// O(m) forward sweep for a lower-bidiagonal matrix (zero super-diagonal).
pub fn forward_solve_bidiagonal<S: Real>(m: &TriDiag<S>, rhs: &[S]) -> Result<Solution<S>> {
    let dim = m.dim();
    if rhs.len() != dim {
        return Err(Error::Parameter(format!(
            "rhs length {} does not match matrix size {dim}",
            rhs.len()
        )));
    }
    let tol = cast::<S>(1e-14);
    if let Some((i, &v)) = m
        .upper()
        .iter()
        .enumerate()
        .find(|(_, v)| v.abs() > tol)
    {
        return Err(Error::Contract(format!(
            "forward solve needs a zero super-diagonal; entry {i} is {v}"
        )));
    }
    let guard = pivot_guard::<S>();
    let mut x = vec![S::zero(); dim];
    for i in 0..dim {
        if m.diag()[i].abs() <= guard {
            return Err(Error::SingularPivot(i));
        }
        let mut v = rhs[i];
        if i > 0 {
            v -= m.lower()[i - 1] * x[i - 1];
        }
        x[i] = v / m.diag()[i];
    }
    let residual_inf = m.residual_inf(&x, rhs);
    Ok(Solution {
        coeffs: x,
        residual_inf,
    })
}

/// The SPLS saddle-point solution pair.
#[derive(Debug, Clone)]
pub struct SplsSolution<S> {
    pub w: P2Function<S>,
    pub u: P1Function<S>,
    pub residual_inf: S,
}

/// Solves the SPLS block system through the Schur complement:
/// `(B^T A^-1 B) u = B^T A^-1 F`, then `w = A^-1 (F - B u)`.
pub fn spls_solve<S: Real>(sys: &SplsSystem<S>) -> Result<SplsSolution<S>> {
    let dim = sys.dim_test();
    let nh = sys.dim_trial();
    let chol_a = Cholesky::new(&sys.a)
        .map_err(|e| Error::Contract(format!("SPLS test-space stiffness not SPD: {e}")))?;

    // Schur complement by nh right-hand-side solves against A.
    let mut schur = crate::dense::Matrix::zeros(nh, nh);
    let mut a_inv_b: Vec<Vec<S>> = Vec::with_capacity(nh);
    for k in 0..nh {
        let col: Vec<S> = (0..dim).map(|i| sys.b.get(i, k)).collect();
        a_inv_b.push(chol_a.solve(&col));
    }
    for j in 0..nh {
        for k in 0..nh {
            let mut v = S::zero();
            for i in 0..dim {
                v += sys.b.get(i, j) * a_inv_b[k][i];
            }
            schur.set(j, k, v);
        }
    }
    let a_inv_f = chol_a.solve(&sys.f);
    let rhs_u: Vec<S> = (0..nh)
        .map(|j| {
            (0..dim).fold(S::zero(), |acc, i| acc + sys.b.get(i, j) * a_inv_f[i])
        })
        .collect();

    let chol_s = Cholesky::new(&schur).map_err(|_| {
        Error::Contract("Schur complement factorization failed: discrete inf-sup violation".into())
    })?;
    let u_coeffs = chol_s.solve(&rhs_u);

    let bu = sys.b.matvec(&u_coeffs);
    let mut f_minus_bu = sys.f.clone();
    for (v, &b) in f_minus_bu.iter_mut().zip(&bu) {
        *v -= b;
    }
    let w_coeffs = chol_a.solve(&f_minus_bu);

    // Block residuals: A w + B u - F and B^T w.
    let aw = sys.a.matvec(&w_coeffs);
    let mut res = S::zero();
    for i in 0..dim {
        res = res.max((aw[i] + bu[i] - sys.f[i]).abs());
    }
    for v in sys.b.transpose_matvec(&w_coeffs) {
        res = res.max(v.abs());
    }

    let mesh = sys.mesh().clone();
    let u = P1Function::new(mesh.clone(), u_coeffs)?;
    let w = P2Function::new(
        mesh,
        w_coeffs[..nh].to_vec(),
        w_coeffs[nh..].to_vec(),
    )?;
    Ok(SplsSolution {
        w,
        u,
        residual_inf: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_spls, stencil_upg};
    use crate::mesh::UniformMesh;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    /// Dense Gaussian elimination with partial pivoting, test oracle only.
    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut v = b[row];
            for k in row + 1..n {
                v -= a[row][k] * x[k];
            }
            x[row] = v / a[row][row];
        }
        x
    }

    fn to_dense(m: &TriDiag<f64>) -> Vec<Vec<f64>> {
        let n = m.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = m.diag()[i];
            if i > 0 {
                a[i][i - 1] = m.lower()[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = m.upper()[i];
            }
        }
        a
    }

    #[test]
    fn identity_returns_rhs() {
        let m = TriDiag::<f64>::constant(0.0, 1.0, 0.0, 4).unwrap();
        let rhs = vec![1.0, -2.0, 3.5, 0.25];
        let sol = thomas_solve(&m, &rhs).unwrap();
        assert_eq!(sol.coeffs, rhs);
        assert_eq!(sol.residual_inf, 0.0);
    }

    #[test]
    fn bidiagonal_ramp_solution() {
        let h = 0.1;
        let m = TriDiag::<f64>::constant(-1.0, 1.0, 0.0, 9).unwrap();
        let rhs = vec![h; 9];
        for sol in [
            thomas_solve(&m, &rhs).unwrap(),
            forward_solve_bidiagonal(&m, &rhs).unwrap(),
        ] {
            for (j, &u) in sol.coeffs.iter().enumerate() {
                assert!((u - (j + 1) as f64 * h).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn thomas_matches_dense_oracle_on_standard_stencil() {
        let m = stencil_upg::<f64>(1.0, 0.25, 0.0, 3).unwrap();
        let rhs = vec![0.25; 3];
        let sol = thomas_solve(&m, &rhs).unwrap();
        let oracle = gauss_solve(to_dense(&m), rhs.clone());
        for (a, b) in sol.coeffs.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn thomas_matches_dense_oracle_on_random_systems() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.random_range(2..40);
            // Diagonally dominant random bands.
            let lower: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            let upper: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            let diag: Vec<f64> = (0..n)
                .map(|_| rng.random_range(2.5..4.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = TriDiag::<f64>::new(lower, diag, upper).unwrap();
            let sol = thomas_solve(&m, &rhs).unwrap();
            let oracle = gauss_solve(to_dense(&m), rhs.clone());
            for (a, b) in sol.coeffs.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            assert!(sol.residual_inf <= 1e-10 * (1.0 + 1.0));
        }
    }

    #[test]
    fn forward_solve_contract_and_oracle() {
        let m = TriDiag::<f64>::constant(-0.5, 1.0, 0.25, 4).unwrap();
        assert!(matches!(
            forward_solve_bidiagonal(&m, &[0.0; 4]),
            Err(Error::Contract(_))
        ));

        let m = TriDiag::<f64>::constant(-1.0, 1.0, 0.0, 4).unwrap();
        let sol = forward_solve_bidiagonal(&m, &[0.0; 4]).unwrap();
        assert!(sol.coeffs.iter().all(|&v| v == 0.0));

        let mut rng = StdRng::seed_from_u64(19);
        let n = 50;
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..3.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = TriDiag::<f64>::new(lower, diag, vec![0.0; n - 1]).unwrap();
        let sol = forward_solve_bidiagonal(&m, &rhs).unwrap();
        let oracle = gauss_solve(to_dense(&m), rhs);
        for (a, b) in sol.coeffs.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn forward_and_thomas_agree_on_bidiagonal() {
        let mut rng = StdRng::seed_from_u64(29);
        let n = 30;
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.5..1.5)).collect();
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..2.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = TriDiag::<f64>::new(lower, diag, vec![0.0; n - 1]).unwrap();
        let a = forward_solve_bidiagonal(&m, &rhs).unwrap();
        let b = thomas_solve(&m, &rhs).unwrap();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((x - y).abs() <= 1e-13 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn zero_pivot_is_reported_with_index() {
        // Elimination turns the second pivot into exactly zero.
        let m = TriDiag::<f64>::new(vec![1.0, 1.0], vec![1.0, 1.0, 1.0], vec![1.0, 1.0]).unwrap();
        match thomas_solve(&m, &[1.0, 1.0, 1.0]) {
            Err(Error::SingularPivot(i)) => assert_eq!(i, 1),
            other => panic!("expected singular pivot, got {other:?}"),
        }
    }

    #[test]
    fn spls_zero_forcing_gives_zero_pair() {
        let mesh = UniformMesh::<f64>::new(8).unwrap();
        let sys = assemble_spls(|_| 0.0, &mesh, 0.1, 8).unwrap();
        let sol = spls_solve(&sys).unwrap();
        assert!(sol.u.coeffs().iter().all(|&v| v.abs() < 1e-14));
        assert!(sol.w.linear_coeffs().iter().all(|&v| v.abs() < 1e-14));
        assert!(sol.w.bubble_coeffs().iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn spls_residuals_stay_small() {
        let mesh = UniformMesh::<f64>::new(16).unwrap();
        let sys = assemble_spls(|x: f64| (2.0 * std::f64::consts::PI * x).cos(), &mesh, 0.1, 12)
            .unwrap();
        let sol = spls_solve(&sys).unwrap();
        let fmax = sys.f.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(sol.residual_inf <= 1e-9 * (1.0 + fmax));
    }

    #[test]
    fn simplified_spls_is_solvable_for_zero_mean_forcing() {
        let mesh = UniformMesh::<f64>::new(12).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let sys = assemble_spls(|x: f64| (two_pi * x).cos(), &mesh, 0.0, 10).unwrap();
        let sol = spls_solve(&sys).unwrap();
        let fmax = sys.f.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(sol.residual_inf <= 1e-10 * (1.0 + fmax));
    }

    #[test]
    fn spls_w_vanishes_for_data_in_range() {
        // Replace the dual vector by B*q: the least-squares residual is then
        // zero, so w = 0 and u = q.
        let mesh = UniformMesh::<f64>::new(8).unwrap();
        let mut sys = assemble_spls(|_| 1.0, &mesh, 0.2, 8).unwrap();
        let mut rng = StdRng::seed_from_u64(41);
        let q: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        sys.f = sys.b.matvec(&q);
        let sol = spls_solve(&sys).unwrap();
        assert!(sol.w.h1_seminorm() <= 1e-9);
        for (u, want) in sol.u.coeffs().iter().zip(&q) {
            assert!((u - want).abs() < 1e-10);
        }
    }
}
