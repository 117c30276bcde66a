//! The omega = 0 magnetic problem solved by first-order-system least
//! squares: minimize ||curl H - sigma E0||^2 + ||div(mu H)||^2 over face
//! fields H with the normal trace mu H . nu pinned to zero on the boundary
//! (boundary faces carry exactly that trace, so the penalty term of the
//! objective is zero by construction and the least-squares system stays
//! consistent with the elliptic residual of E0).

use num_complex::Complex64;

use crate::calculus::{
    average_face_to_cell, curl_face_to_edge, curl_face_to_edge_transpose, div_face_to_cell,
    div_face_to_cell_transpose, zero_boundary_edges,
};
use crate::error::{Error, Result};
use crate::field::{FieldKind, Layout, RealCellField, ScalarField, VectorField};
use crate::grid::Grid;
use crate::material::{cell_to_edge, cell_to_face};
use crate::solve::{dot, norm};

type C = Complex64;

#[derive(Debug, Clone)]
pub struct StaticMagneticSolution {
    /// H0 on faces (normal boundary trace identically zero).
    pub h_face: VectorField,
    /// H0 interpolated to cell centers.
    pub h_cell: VectorField,
    /// Discrete L2 norm of curl H0 - sigma E0 over interior edges.
    pub curl_residual: f64,
    /// Discrete L2 norm of div(mu H0).
    pub div_residual: f64,
    /// Least-squares objective at start and end, and per-iteration values.
    pub objective_initial: f64,
    pub objective_final: f64,
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

struct Fosls {
    grid: Grid,
    mu_face: [ndarray::Array3<f64>; 3],
    data: VectorField, // sigma E0 on edges, boundary edges zeroed
}

impl Fosls {
    fn zero_boundary_faces(&self, h: &mut VectorField) {
        let n = self.grid.n();
        for j in 0..n {
            for k in 0..n {
                h.x[[0, j, k]] = C::default();
                h.x[[n, j, k]] = C::default();
            }
        }
        for i in 0..n {
            for k in 0..n {
                h.y[[i, 0, k]] = C::default();
                h.y[[i, n, k]] = C::default();
            }
        }
        for i in 0..n {
            for j in 0..n {
                h.z[[i, j, 0]] = C::default();
                h.z[[i, j, n]] = C::default();
            }
        }
    }

    fn mu_times(&self, h: &VectorField) -> VectorField {
        let mut out = h.clone();
        for axis in 0..3 {
            for (v, m) in out.component_mut(axis).iter_mut().zip(self.mu_face[axis].iter()) {
                *v *= *m;
            }
        }
        out
    }

    /// Residual blocks (curl H - data, div(mu H)).
    fn residual(&self, h: &VectorField) -> (VectorField, ScalarField) {
        let c = curl_face_to_edge(h).expect("face layout");
        let r1 = c.sub(&self.data).expect("shapes");
        let r2 = div_face_to_cell(&self.mu_times(h)).expect("face layout");
        (r1, r2)
    }

    fn objective(&self, h: &VectorField) -> f64 {
        let (r1, r2) = self.residual(h);
        let h3 = self.grid.h().powi(3);
        h3 * (r1.l2().powi(2) + r2.data.iter().map(|v| v.norm_sqr()).sum::<f64>())
    }

    /// Normal operator N = R^T R restricted to interior faces.
    fn normal_apply(&self, h: &VectorField) -> VectorField {
        let c = curl_face_to_edge(h).expect("face layout");
        let a = curl_face_to_edge_transpose(&c).expect("edge layout");
        let d = div_face_to_cell(&self.mu_times(h)).expect("face layout");
        let b = self.mu_times(&div_face_to_cell_transpose(&d).expect("cell layout"));
        let mut out = a.add(&b).expect("shapes");
        self.zero_boundary_faces(&mut out);
        out
    }

    fn normal_rhs(&self) -> VectorField {
        let mut rhs = curl_face_to_edge_transpose(&self.data).expect("edge layout");
        self.zero_boundary_faces(&mut rhs);
        rhs
    }
}

fn flat_dot(a: &VectorField, b: &VectorField) -> C {
    let mut s = C::default();
    for axis in 0..3 {
        s += dot(
            a.component(axis).as_slice().expect("contiguous"),
            b.component(axis).as_slice().expect("contiguous"),
        );
    }
    s
}

fn flat_norm(a: &VectorField) -> f64 {
    let mut s = 0.0;
    for axis in 0..3 {
        s += norm(a.component(axis).as_slice().expect("contiguous")).powi(2);
    }
    s.sqrt()
}

/// Solve the FOSLS system for H0 given E0 from the conductivity solve.
pub fn solve_static_magnetic(
    grid: Grid,
    mu: &RealCellField,
    sigma: &RealCellField,
    e0: &VectorField,
) -> Result<StaticMagneticSolution> {
    e0.expect_layout(Layout::Edge)?;
    if mu.min() <= 0.0 {
        return Err(Error::InvalidMaterial("mu must be positive".into()));
    }

    // sigma E0 with the same edge averaging as the elliptic operator, so
    // the least-squares data is discretely consistent
    let mut data = e0.clone();
    for axis in 0..3 {
        let s = cell_to_edge(sigma, axis);
        for (v, sv) in data.component_mut(axis).iter_mut().zip(s.iter()) {
            *v *= *sv;
        }
    }
    zero_boundary_edges(&mut data);

    let fosls = Fosls {
        grid,
        mu_face: [cell_to_face(mu, 0), cell_to_face(mu, 1), cell_to_face(mu, 2)],
        data,
    };

    // CG on the normal equations, tracking the true objective
    let mut h = VectorField::zeros(grid, Layout::Face);
    let rhs = fosls.normal_rhs();
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = flat_dot(&r, &r);
    let rhs_norm = flat_norm(&rhs).max(f64::MIN_POSITIVE);

    let objective_initial = fosls.objective(&h);
    let mut history = vec![objective_initial];
    let mut iterations = 0;
    let max_iter = 20_000;
    let target = 1e-26 * objective_initial.max(f64::MIN_POSITIVE);

    for it in 1..=max_iter {
        let ap = fosls.normal_apply(&p);
        let pap = flat_dot(&p, &ap);
        if pap.norm() < 1e-300 {
            break;
        }
        let alpha = rr / pap;
        h = h.add(&p.scaled(alpha))?;
        r = r.sub(&ap.scaled(alpha))?;
        let obj = fosls.objective(&h);
        history.push(obj);
        iterations = it;
        let rr_new = flat_dot(&r, &r);
        if obj <= target || flat_norm(&r) <= 1e-14 * rhs_norm {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        p = r.add(&p.scaled(beta))?;
    }

    let (r1, r2) = fosls.residual(&h);
    let h3s = grid.h().powi(3).sqrt();
    let curl_residual = r1.l2() * h3s;
    let div_residual = r2.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() * h3s;
    let objective_final = fosls.objective(&h);
    let h_cell = average_face_to_cell(&h)?.with_kind(FieldKind::Magnetic);

    Ok(StaticMagneticSolution {
        h_face: h.with_kind(FieldKind::Magnetic),
        h_cell,
        curl_residual,
        div_residual,
        objective_initial,
        objective_final,
        objective_history: history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::conductivity::solve_conductivity;
    use crate::illum::Illumination;

    #[test]
    fn zero_data_gives_zero_minimizer() {
        let g = Grid::with_default_margin(7).unwrap();
        let mu = RealCellField::constant(g, 1.0);
        let sigma = RealCellField::constant(g, 1.0);
        let e0 = VectorField::zeros(g, Layout::Edge);
        let sol = solve_static_magnetic(g, &mu, &sigma, &e0).unwrap();
        assert_eq!(sol.h_face.linf(), 0.0);
        assert_eq!(sol.objective_final, 0.0);
    }

    #[test]
    fn unit_e0_residuals_are_small() {
        // sigma = 1, E0 = e1: both FOSLS residual blocks below 1e-6
        let g = Grid::with_default_margin(8).unwrap();
        let mu = RealCellField::constant(g, 1.0);
        let sigma = RealCellField::constant(g, 1.0);
        let sol_e = solve_conductivity(g, &sigma, &Illumination::basis(0)).unwrap();
        let sol = solve_static_magnetic(g, &mu, &sigma, &sol_e.e0).unwrap();
        assert!(sol.curl_residual <= 1e-6, "curl residual {}", sol.curl_residual);
        assert!(sol.div_residual <= 1e-6, "div residual {}", sol.div_residual);
    }

    #[test]
    fn objective_decreases_monotonically_and_collapses() {
        let g = Grid::with_default_margin(8).unwrap();
        let mu = RealCellField::constant(g, 1.0);
        let sigma = RealCellField::from_fn(g, |x| {
            1.0 + 0.3 * (-((x[0] - 0.5).powi(2) + (x[1] - 0.4).powi(2) + (x[2] - 0.6).powi(2)) / 0.05).exp()
        });
        let sol_e = solve_conductivity(g, &sigma, &Illumination::basis(2)).unwrap();
        let sol = solve_static_magnetic(g, &mu, &sigma, &sol_e.e0).unwrap();
        // monotone up to roundoff jitter at the floor
        for w in sol.objective_history.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-6) + 1e-16 * sol.objective_initial,
                "objective increased: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(
            sol.objective_final <= crate::tol::FOSLS_REL * sol.objective_initial,
            "objective {} of initial {}",
            sol.objective_final,
            sol.objective_initial
        );
    }
}
