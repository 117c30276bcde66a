//! The omega = 0 electric problem: div(sigma grad w) = 0 with Dirichlet
//! boundary potential, discretized as the SPD 7-point variable-coefficient
//! scheme div_e2n(sigma_edge * grad w) on nodes.

use ndarray::Array3;
use num_complex::Complex64;

use crate::calculus::{div_edge_to_node, grad};
use crate::error::{Error, Result};
use crate::field::{RealCellField, ScalarField, ScalarLoc, VectorField};
use crate::grid::Grid;
use crate::illum::Illumination;
use crate::material::cell_to_edge;
use crate::solve::{krylov, LinOp};
use crate::tol;

type C = Complex64;

/// Solution of the static conductivity problem.
#[derive(Debug, Clone)]
pub struct StaticSolution {
    /// Scalar potential on nodes.
    pub w: ScalarField,
    /// E0 = grad w on edges; curl E0 = 0 to machine precision.
    pub e0: VectorField,
    /// Relative algebraic residual of the discrete elliptic system.
    pub relative_residual: f64,
    pub iterations: usize,
}

/// Matrix-free SPD operator x -> -div(sigma grad x) on interior nodes.
pub(crate) struct ConductivityOp {
    grid: Grid,
    sigma_edge: [Array3<f64>; 3],
}

impl ConductivityOp {
    pub(crate) fn new(grid: Grid, sigma: &RealCellField) -> Self {
        let sigma_edge = [
            cell_to_edge(sigma, 0),
            cell_to_edge(sigma, 1),
            cell_to_edge(sigma, 2),
        ];
        Self { grid, sigma_edge }
    }

    pub(crate) fn interior_count(&self) -> usize {
        let m = self.grid.n() - 1;
        m * m * m
    }

    pub(crate) fn gather(&self, full: &ScalarField, out: &mut [C]) {
        let n = self.grid.n();
        let mut idx = 0;
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    out[idx] = full.data[[i, j, k]];
                    idx += 1;
                }
            }
        }
    }

    pub(crate) fn scatter(&self, x: &[C], full: &mut ScalarField) {
        let n = self.grid.n();
        let mut idx = 0;
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    full.data[[i, j, k]] = x[idx];
                    idx += 1;
                }
            }
        }
    }

    /// Apply the full operator -div(sigma grad .) to a complete node field
    /// (boundary values included) and return interior values.
    pub(crate) fn apply_full(&self, w: &ScalarField, out: &mut [C]) {
        let mut e = grad(w).expect("node layout");
        for axis in 0..3 {
            let s = &self.sigma_edge[axis];
            for (v, sv) in e.component_mut(axis).iter_mut().zip(s.iter()) {
                *v *= *sv;
            }
        }
        let d = div_edge_to_node(&e).expect("edge layout");
        let n = self.grid.n();
        let mut idx = 0;
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    out[idx] = -d.data[[i, j, k]];
                    idx += 1;
                }
            }
        }
    }

    /// Inverse Jacobi diagonal of the SPD interior system.
    fn inv_diag(&self) -> Vec<C> {
        let n = self.grid.n();
        let ihh = 1.0 / (self.grid.h() * self.grid.h());
        let mut out = Vec::with_capacity(self.interior_count());
        for i in 1..n {
            for j in 1..n {
                for k in 1..n {
                    let s = self.sigma_edge[0][[i, j, k]]
                        + self.sigma_edge[0][[i - 1, j, k]]
                        + self.sigma_edge[1][[i, j, k]]
                        + self.sigma_edge[1][[i, j - 1, k]]
                        + self.sigma_edge[2][[i, j, k]]
                        + self.sigma_edge[2][[i, j, k - 1]];
                    out.push(C::new(1.0 / (s * ihh), 0.0));
                }
            }
        }
        out
    }
}

impl LinOp for ConductivityOp {
    fn len(&self) -> usize {
        self.interior_count()
    }

    fn apply(&self, x: &[C], y: &mut [C]) {
        let mut full = ScalarField::zeros(self.grid, ScalarLoc::Node);
        self.scatter(x, &mut full);
        self.apply_full(&full, y);
    }
}

/// Dirichlet data sampled at boundary nodes; interior zero.
pub(crate) fn boundary_lift(grid: Grid, psi: impl Fn([f64; 3]) -> C) -> ScalarField {
    let n = grid.n();
    let mut w = ScalarField::zeros(grid, ScalarLoc::Node);
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                let on_boundary = i == 0 || i == n || j == 0 || j == n || k == 0 || k == n;
                if on_boundary {
                    w.data[[i, j, k]] = psi(grid.node(i, j, k));
                }
            }
        }
    }
    w
}

/// Solve div(sigma grad w) = -f, w = dirichlet on the boundary. The plain
/// conductivity problem has f = 0; manufactured-solution studies pass a
/// node-sampled source.
pub fn solve_conductivity_with_source(
    grid: Grid,
    sigma: &RealCellField,
    dirichlet: impl Fn([f64; 3]) -> C,
    source: Option<&ScalarField>,
) -> Result<StaticSolution> {
    if sigma.min() <= 0.0 {
        return Err(Error::InvalidMaterial(format!(
            "sigma must be positive (min = {})",
            sigma.min()
        )));
    }
    let op = ConductivityOp::new(grid, sigma);
    let m = op.interior_count();

    // rhs = f_int - A w_bc
    let w_bc = boundary_lift(grid, &dirichlet);
    let mut rhs = vec![C::default(); m];
    op.apply_full(&w_bc, &mut rhs);
    for v in rhs.iter_mut() {
        *v = -*v;
    }
    if let Some(f) = source {
        if f.loc != ScalarLoc::Node {
            return Err(Error::LayoutMismatch {
                expected: "Node".into(),
                got: format!("{:?}", f.loc),
            });
        }
        let mut f_int = vec![C::default(); m];
        op.gather(f, &mut f_int);
        for (r, fi) in rhs.iter_mut().zip(&f_int) {
            *r += fi;
        }
    }

    let dinv = op.inv_diag();
    let mut x = vec![C::default(); m];
    let stats = krylov::cg(&op, &rhs, &mut x, Some(&dinv), tol::ELLIPTIC_REL, 20_000)?;

    let mut w = w_bc;
    op.scatter(&x, &mut w);
    let e0 = grad(&w)?;
    Ok(StaticSolution {
        w,
        e0,
        relative_residual: stats.relative_residual,
        iterations: stats.iterations,
    })
}

/// Solve the conductivity problem for a polynomial illumination potential.
pub fn solve_conductivity(
    grid: Grid,
    sigma: &RealCellField,
    psi: &Illumination,
) -> Result<StaticSolution> {
    let pot = psi.potential();
    solve_conductivity_with_source(grid, sigma, |x| pot.eval(x), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::curl_edge_to_face;
    use crate::solve::dense;

    #[test]
    fn uniform_sigma_linear_potential_is_exact() {
        // sigma = 1, psi = x1: w = x1 and E0 = e1 exactly
        let g = Grid::with_default_margin(8).unwrap();
        let sigma = RealCellField::constant(g, 1.0);
        let sol = solve_conductivity(g, &sigma, &Illumination::basis(0)).unwrap();
        let n = g.n();
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let want = C::new(g.coord(i), 0.0);
                    assert!((sol.w.data[[i, j, k]] - want).norm() < 1e-9);
                }
            }
        }
        for v in sol.e0.x.iter() {
            assert!((v - C::new(1.0, 0.0)).norm() < 1e-8);
        }
        assert!(sol.e0.y.iter().all(|v| v.norm() < 1e-8));
    }

    #[test]
    fn harmonic_bilinear_potential_with_constant_sigma() {
        // psi = x1 x2 is harmonic; any constant sigma reproduces it
        let g = Grid::with_default_margin(8).unwrap();
        let sigma = RealCellField::constant(g, 3.7);
        let psi = Illumination::parse("grad:x1*x2").unwrap();
        let sol = solve_conductivity(g, &sigma, &psi).unwrap();
        let n = g.n();
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let x = g.node(i, j, k);
                    let want = C::new(x[0] * x[1], 0.0);
                    assert!(
                        (sol.w.data[[i, j, k]] - want).norm() < 1e-9,
                        "node {i},{j},{k}"
                    );
                }
            }
        }
    }

    #[test]
    fn e0_is_curl_free() {
        let g = Grid::with_default_margin(8).unwrap();
        let sigma = RealCellField::from_fn(g, |x| {
            1.0 + 0.5
                * (-((x[0] - 0.4).powi(2) + (x[1] - 0.6).powi(2) + (x[2] - 0.5).powi(2)) / 0.02)
                    .exp()
        });
        let sol = solve_conductivity(g, &sigma, &Illumination::basis(1)).unwrap();
        let c = curl_edge_to_face(&sol.e0).unwrap();
        assert!(c.linf() <= crate::tol::MIMETIC_REL * sol.e0.linf() / g.h() / g.h());
    }

    #[test]
    fn matches_dense_lu_oracle_on_coarse_grid() {
        // bump sigma on a 12^3 grid against a direct solve of the same
        // discrete system
        let g = Grid::with_default_margin(12).unwrap();
        let sigma = RealCellField::from_fn(g, |x| {
            1.0 + 0.5
                * (-((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) + (x[2] - 0.5).powi(2)) / 0.02)
                    .exp()
        });
        let sol = solve_conductivity(g, &sigma, &Illumination::basis(0)).unwrap();

        let op = ConductivityOp::new(g, &sigma);
        let m = op.interior_count();
        let w_bc = boundary_lift(g, |x| C::new(x[0], 0.0));
        let mut rhs = vec![C::default(); m];
        op.apply_full(&w_bc, &mut rhs);
        for v in rhs.iter_mut() {
            *v = -*v;
        }
        let x_direct = dense::solve(&op, &rhs).unwrap();

        let mut x_cg = vec![C::default(); m];
        op.gather(&sol.w, &mut x_cg);
        let num: f64 = x_cg
            .iter()
            .zip(&x_direct)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = x_direct.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den <= 1e-8, "relative L2 difference {}", num / den);
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        let g = Grid::with_default_margin(8).unwrap();
        let mut sigma = RealCellField::constant(g, 1.0);
        sigma.data[[0, 0, 0]] = -0.1;
        assert!(solve_conductivity(g, &sigma, &Illumination::basis(0)).is_err());
    }
}
