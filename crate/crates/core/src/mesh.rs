//! Uniform meshes on `[0, 1]` and the P1 / P2 finite element functions.
//!
//! P1 functions store only their interior nodal values; the homogeneous
//! Dirichlet boundary values are implicit. All polynomial integrals (H1
//! seminorm, L2 norm, mean, cell averages) use exact closed forms.

use crate::error::{Error, Result};
use crate::quadrature::QuadRule;
use crate::{cast, cast_usize, Real};

/// `n` equal cells on `[0, 1]` with nodes `x_j = j*h`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformMesh<S> {
    n: usize,
    h: S,
    nodes: Vec<S>,
}

impl<S: Real> UniformMesh<S> {
    /// Builds the mesh with `n >= 2` cells.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("cell count {n} must be >= 2")));
        }
        let h = S::one() / cast_usize::<S>(n);
        let mut nodes: Vec<S> = (0..=n).map(|j| cast_usize::<S>(j) * h).collect();
        nodes[0] = S::zero();
        nodes[n] = S::one();
        let drift = (cast_usize::<S>(n) * h - S::one()).abs();
        if drift > cast::<S>(4.0) * S::epsilon() {
            return Err(Error::Parameter(format!(
                "n*h drifts from 1 by {drift} for n = {n}"
            )));
        }
        Ok(UniformMesh { n, h, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> S {
        self.h
    }

    pub fn nodes(&self) -> &[S] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> S {
        self.nodes[j]
    }

    /// Number of interior nodes, `n - 1`.
    pub fn interior_count(&self) -> usize {
        self.n - 1
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` containing `x`; nodes resolve
    /// to the cell on their right, except `x = 1` which lands in the last.
    pub fn cell_of(&self, x: S) -> Result<usize> {
        if x < S::zero() || x > S::one() {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let mut i = (x / self.h)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.n - 1);
        while i > 0 && x < self.nodes[i] {
            i -= 1;
        }
        while i + 1 < self.n && x >= self.nodes[i + 1] {
            i += 1;
        }
        Ok(i)
    }
}

/// Continuous piecewise linear function with zero boundary values, stored
/// as its `n - 1` interior nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct P1Function<S> {
    mesh: UniformMesh<S>,
    coeffs: Vec<S>,
}

impl<S: Real> P1Function<S> {
    pub fn new(mesh: UniformMesh<S>, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != mesh.interior_count() {
            return Err(Error::Parameter(format!(
                "{} coefficients for a mesh with {} interior nodes",
                coeffs.len(),
                mesh.interior_count()
            )));
        }
        Ok(P1Function { mesh, coeffs })
    }

    pub fn zero(mesh: UniformMesh<S>) -> Self {
        let m = mesh.interior_count();
        P1Function {
            mesh,
            coeffs: vec![S::zero(); m],
        }
    }

    /// Samples `f` at the interior nodes; boundary values of `f` are ignored.
    pub fn interpolate<F: Fn(S) -> S>(f: F, mesh: &UniformMesh<S>) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(mesh.interior_count());
        for j in 1..mesh.n() {
            let v = f(mesh.node(j));
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "interpolated function at node x = {}",
                    mesh.node(j)
                )));
            }
            coeffs.push(v);
        }
        P1Function::new(mesh.clone(), coeffs)
    }

    pub fn mesh(&self) -> &UniformMesh<S> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Nodal value including the implicit boundary zeros, `j = 0..=n`.
    pub fn node_value(&self, j: usize) -> S {
        if j == 0 || j == self.mesh.n() {
            S::zero()
        } else {
            self.coeffs[j - 1]
        }
    }

    /// Piecewise linear interpolant value; exact at nodes.
    pub fn eval(&self, x: S) -> Result<S> {
        let i = self.mesh.cell_of(x)?;
        let a = self.node_value(i);
        let b = self.node_value(i + 1);
        let xi = (x - self.mesh.node(i)) / self.mesh.h();
        Ok(a + (b - a) * xi)
    }

    /// Slope on the cell containing `x` (constant per cell).
    pub fn deriv(&self, x: S) -> Result<S> {
        let i = self.mesh.cell_of(x)?;
        Ok((self.node_value(i + 1) - self.node_value(i)) / self.mesh.h())
    }

    /// `sqrt( sum_i (u_i - u_{i-1})^2 / h )`, exact for P1.
    pub fn h1_seminorm(&self) -> S {
        self.h1_seminorm_sq().sqrt()
    }

    pub fn h1_seminorm_sq(&self) -> S {
        let h = self.mesh.h();
        let mut acc = S::zero();
        for i in 1..=self.mesh.n() {
            let d = self.node_value(i) - self.node_value(i - 1);
            acc += d * d / h;
        }
        acc
    }

    /// Exact L2 norm through the P1 mass quadratic form.
    pub fn l2_norm(&self) -> S {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> S {
        let h = self.mesh.h();
        let third = cast::<S>(3.0).recip();
        let mut acc = S::zero();
        for i in 1..=self.mesh.n() {
            let a = self.node_value(i - 1);
            let b = self.node_value(i);
            acc += h * third * (a * a + a * b + b * b);
        }
        acc
    }

    /// Exact integral over `[0, 1]` (h times the sum of interior values).
    pub fn mean(&self) -> S {
        self.mesh.h() * self.coeffs.iter().fold(S::zero(), |acc, &c| acc + c)
    }

    /// Exact cell averages, `(left + right) / 2` per cell.
    pub fn cell_averages(&self) -> Vec<S> {
        let half = cast::<S>(0.5);
        (1..=self.mesh.n())
            .map(|i| (self.node_value(i - 1) + self.node_value(i)) * half)
            .collect()
    }

    /// Values at the nodes of a mesh refined `factor` times, as a new
    /// P1 function representing the same piecewise linear function.
    pub fn refine(&self, factor: usize) -> Result<P1Function<S>> {
        if factor == 0 {
            return Err(Error::Parameter("refinement factor must be >= 1".into()));
        }
        let fine = UniformMesh::new(self.mesh.n() * factor)?;
        let fac = cast_usize::<S>(factor);
        let mut coeffs = Vec::with_capacity(fine.interior_count());
        for j in 1..fine.n() {
            let coarse = j / factor;
            let rem = j % factor;
            let a = self.node_value(coarse);
            let v = if rem == 0 {
                a
            } else {
                let b = self.node_value(coarse + 1);
                a + (b - a) * cast_usize::<S>(rem) / fac
            };
            coeffs.push(v);
        }
        P1Function::new(fine, coeffs)
    }
}

/// Cell averages `(1/h) * integral of f over each cell` by Gauss-Legendre
/// quadrature; exact up to roundoff for polynomials of degree
/// `<= 2*quad_order - 1`.
pub fn cell_averages_fn<S: Real, F: Fn(S) -> S>(
    f: F,
    mesh: &UniformMesh<S>,
    quad_order: usize,
) -> Result<Vec<S>> {
    let rule = QuadRule::new(quad_order.max(1))?;
    let mut avgs = Vec::with_capacity(mesh.n());
    for i in 1..=mesh.n() {
        let v = rule.apply(&f, mesh.node(i - 1), mesh.node(i))?;
        avgs.push(v / mesh.h());
    }
    Ok(avgs)
}

/// Continuous piecewise quadratic function with zero boundary values, split
/// into a P1 part plus one quadratic cell bubble `B_i = 4 phi_{i-1} phi_i`
/// per cell. Dimension `2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct P2Function<S> {
    mesh: UniformMesh<S>,
    linear_coeffs: Vec<S>,
    bubble_coeffs: Vec<S>,
}

impl<S: Real> P2Function<S> {
    pub fn new(mesh: UniformMesh<S>, linear_coeffs: Vec<S>, bubble_coeffs: Vec<S>) -> Result<Self> {
        if linear_coeffs.len() != mesh.interior_count() || bubble_coeffs.len() != mesh.n() {
            return Err(Error::Parameter(format!(
                "P2 coefficient lengths ({}, {}) do not match mesh with n = {}",
                linear_coeffs.len(),
                bubble_coeffs.len(),
                mesh.n()
            )));
        }
        Ok(P2Function {
            mesh,
            linear_coeffs,
            bubble_coeffs,
        })
    }

    pub fn mesh(&self) -> &UniformMesh<S> {
        &self.mesh
    }

    pub fn linear_coeffs(&self) -> &[S] {
        &self.linear_coeffs
    }

    pub fn bubble_coeffs(&self) -> &[S] {
        &self.bubble_coeffs
    }

    pub fn dim(&self) -> usize {
        2 * self.mesh.n() - 1
    }

    fn linear_node_value(&self, j: usize) -> S {
        if j == 0 || j == self.mesh.n() {
            S::zero()
        } else {
            self.linear_coeffs[j - 1]
        }
    }

    pub fn eval(&self, x: S) -> Result<S> {
        let i = self.mesh.cell_of(x)?;
        let a = self.linear_node_value(i);
        let b = self.linear_node_value(i + 1);
        let xi = (x - self.mesh.node(i)) / self.mesh.h();
        let four = cast::<S>(4.0);
        Ok(a + (b - a) * xi + self.bubble_coeffs[i] * four * xi * (S::one() - xi))
    }

    /// Exact H1 seminorm squared. Quadratic cell bubbles are
    /// a0-orthogonal to the linear part on uniform meshes, so the two
    /// contributions add.
    pub fn h1_seminorm_sq(&self) -> S {
        let h = self.mesh.h();
        let mut acc = S::zero();
        for i in 1..=self.mesh.n() {
            let d = self.linear_node_value(i) - self.linear_node_value(i - 1);
            acc += d * d / h;
        }
        let bubble_energy = cast::<S>(16.0) / (cast::<S>(3.0) * h);
        for &c in &self.bubble_coeffs {
            acc += c * c * bubble_energy;
        }
        acc
    }

    pub fn h1_seminorm(&self) -> S {
        self.h1_seminorm_sq().sqrt()
    }
}
