//! Property tests over randomized inputs.

use convdiff::assembly::TriDiag;
use convdiff::bubbles::BubbleSpec;
use convdiff::mesh::{P1Function, UniformMesh};
use convdiff::norms::discrete_star_seminorm_sq;
use convdiff::solvers::thomas_solve;
use proptest::prelude::*;

fn p1_strategy() -> impl Strategy<Value = P1Function<f64>> {
    (2usize..40).prop_flat_map(|n| {
        prop::collection::vec(-2.0f64..2.0, n - 1).prop_map(move |coeffs| {
            P1Function::new(UniformMesh::new(n).unwrap(), coeffs).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn quadratic_moments_match_quadrature(beta in 0.05f64..3.0, h in 0.01f64..1.0) {
        let b = BubbleSpec::quadratic(beta, h).unwrap();
        let (b1, b2) = b.moments_by_quadrature(8).unwrap();
        prop_assert!((b1 - b.b1).abs() <= 1e-11 * (1.0 + b.b1.abs()));
        prop_assert!((b2 - b.b2).abs() <= 1e-11 * (1.0 + b.b2.abs()));
    }

    #[test]
    fn poincare_bounds_l2_by_h1(u in p1_strategy()) {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        prop_assert!(u.l2_norm_sq() <= u.h1_seminorm_sq() / pi2 * (1.0 + 1e-9));
    }

    #[test]
    fn discrete_seminorm_below_l2(u in p1_strategy()) {
        let semi = discrete_star_seminorm_sq(&u);
        prop_assert!(semi >= 0.0);
        prop_assert!(semi <= u.l2_norm_sq() + 1e-12);
    }

    #[test]
    fn thomas_residuals_stay_small(
        n in 2usize..50,
        seed in prop::collection::vec(-1.0f64..1.0, 150),
    ) {
        // Diagonally dominant bands drawn from the seed pool.
        let lower: Vec<f64> = seed[..n - 1].to_vec();
        let upper: Vec<f64> = seed[50..50 + n - 1].to_vec();
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + seed[100 + i]).collect();
        let rhs: Vec<f64> = (0..n).map(|i| seed[50 + i]).collect();
        let m = TriDiag::new(lower, diag, upper).unwrap();
        let sol = thomas_solve(&m, &rhs).unwrap();
        prop_assert!(sol.residual_inf <= 1e-12 * (1.0 + 1.0));
    }
}
