//! Material coefficients: mu, eps, sigma as cell-centered scalar fields
//! plus the reference conductivity and ellipticity bounds.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{RealCellField, ScalarField, ScalarLoc};
use crate::grid::Grid;

type C = Complex64;

/// Gaussian bump perturbation of one coefficient:
/// amplitude * exp(-|x - center|^2 / width^2).
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let r2 = (0..3).map(|a| (x[a] - self.center[a]).powi(2)).sum::<f64>();
        self.amplitude * (-r2 / (self.width * self.width)).exp()
    }
}

/// Which coefficient a bump perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientId {
    Mu,
    Eps,
    Sigma,
    /// Electro-seismic coupling coefficient.
    Coupling,
}

impl CoefficientId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Self::Mu),
            "eps" => Ok(Self::Eps),
            "sigma" => Ok(Self::Sigma),
            "l" | "coupling" => Ok(Self::Coupling),
            other => Err(Error::Parse(format!("unknown coefficient '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Mu => "mu",
            Self::Eps => "eps",
            Self::Sigma => "sigma",
            Self::Coupling => "l",
        }
    }
}

/// Analytic description of a coefficient family: constants plus named
/// Gaussian bumps. Sampled onto cell centers to build `MaterialParams`.
#[derive(Debug, Clone)]
pub struct MaterialSpec {
    pub mu0: f64,
    pub eps0: f64,
    pub sigma0: f64,
    /// Reference conductivity (the unperturbed background).
    pub sigma_ref: f64,
    pub bumps: Vec<(CoefficientId, Bump)>,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        Self { mu0: 1.0, eps0: 1.0, sigma0: 1.0, sigma_ref: 1.0, bumps: Vec::new() }
    }
}

impl MaterialSpec {
    pub fn eval(&self, id: CoefficientId, x: [f64; 3]) -> f64 {
        let base = match id {
            CoefficientId::Mu => self.mu0,
            CoefficientId::Eps => self.eps0,
            CoefficientId::Sigma => self.sigma0,
            CoefficientId::Coupling => 1.0,
        };
        base + self
            .bumps
            .iter()
            .filter(|(bid, _)| *bid == id)
            .map(|(_, b)| b.eval(x))
            .sum::<f64>()
    }

    pub fn sample(&self, grid: Grid) -> Result<MaterialParams> {
        let mu = RealCellField::from_fn(grid, |x| self.eval(CoefficientId::Mu, x));
        let eps = RealCellField::from_fn(grid, |x| self.eval(CoefficientId::Eps, x));
        let sigma = RealCellField::from_fn(grid, |x| self.eval(CoefficientId::Sigma, x));
        MaterialParams::new(grid, mu, eps, sigma, self.sigma_ref)
    }
}

/// Isotropic scalar coefficients on the grid with their ellipticity bounds.
#[derive(Debug, Clone)]
pub struct MaterialParams {
    pub grid: Grid,
    pub mu: RealCellField,
    pub eps: RealCellField,
    pub sigma: RealCellField,
    /// Reference conductivity used by the omega = 0 systems.
    pub sigma_ref: RealCellField,
    /// Pointwise lower bound over mu, eps, sigma.
    pub lambda_min: f64,
    /// Pointwise upper bound over mu, eps, sigma.
    pub lambda_max: f64,
}

impl MaterialParams {
    pub fn new(
        grid: Grid,
        mu: RealCellField,
        eps: RealCellField,
        sigma: RealCellField,
        sigma_ref: f64,
    ) -> Result<Self> {
        for (name, f) in [("mu", &mu), ("eps", &eps), ("sigma", &sigma)] {
            let lo = f.min();
            if !lo.is_finite() || lo <= 0.0 {
                return Err(Error::InvalidMaterial(format!(
                    "{name} must be strictly positive everywhere (min = {lo})"
                )));
            }
        }
        if sigma_ref <= 0.0 {
            return Err(Error::InvalidMaterial(format!(
                "sigma_ref must be positive (got {sigma_ref})"
            )));
        }
        let lambda_min = mu.min().min(eps.min()).min(sigma.min());
        let lambda_max = mu.max().max(eps.max()).max(sigma.max());
        Ok(Self {
            grid,
            mu,
            eps,
            sigma,
            sigma_ref: RealCellField::constant(grid, sigma_ref),
            lambda_min,
            lambda_max,
        })
    }

    pub fn constant(grid: Grid, mu: f64, eps: f64, sigma: f64) -> Result<Self> {
        Self::new(
            grid,
            RealCellField::constant(grid, mu),
            RealCellField::constant(grid, eps),
            RealCellField::constant(grid, sigma),
            sigma,
        )
    }

    /// Admittivity q_omega = omega*eps + i*sigma as a cell field.
    /// Its imaginary part is sigma, bounded below by lambda_min.
    pub fn q_cell(&self, omega: f64) -> ScalarField {
        let mut q = ScalarField::zeros(self.grid, ScalarLoc::Cell);
        for ((dst, e), s) in q
            .data
            .iter_mut()
            .zip(self.eps.data.iter())
            .zip(self.sigma.data.iter())
        {
            *dst = C::new(omega * e, *s);
        }
        q
    }

    /// True q at one cell, for seeding reconstructions from ground truth.
    pub fn q_at(&self, omega: f64, cell: (usize, usize, usize)) -> C {
        let idx = [cell.0, cell.1, cell.2];
        C::new(omega * self.eps.data[idx], self.sigma.data[idx])
    }
}

/// Average a cell coefficient onto the interior faces with normal `axis`
/// (two adjacent cells). Boundary faces keep the single adjacent value.
pub fn cell_to_face(field: &RealCellField, axis: usize) -> ndarray::Array3<f64> {
    let g = field.grid;
    let n = g.n();
    let mut out = ndarray::Array3::zeros(g.face_dims(axis));
    let d = &field.data;
    let dims = out.dim();
    for i in 0..dims.0 {
        for j in 0..dims.1 {
            for k in 0..dims.2 {
                let (lo, hi) = match axis {
                    0 => ((i.saturating_sub(1), j, k), (i.min(n - 1), j, k)),
                    1 => ((i, j.saturating_sub(1), k), (i, j.min(n - 1), k)),
                    _ => ((i, j, k.saturating_sub(1)), (i, j, k.min(n - 1))),
                };
                let plane = match axis {
                    0 => i,
                    1 => j,
                    _ => k,
                };
                out[[i, j, k]] = if plane == 0 {
                    d[[hi.0, hi.1, hi.2]]
                } else if plane == n {
                    d[[lo.0, lo.1, lo.2]]
                } else {
                    0.5 * (d[[lo.0, lo.1, lo.2]] + d[[hi.0, hi.1, hi.2]])
                };
            }
        }
    }
    out
}

/// Average a cell coefficient onto the edges along `axis` (up to four
/// adjacent cells; fewer on the boundary).
pub fn cell_to_edge(field: &RealCellField, axis: usize) -> ndarray::Array3<f64> {
    let g = field.grid;
    let n = g.n();
    let mut out = ndarray::Array3::zeros(g.edge_dims(axis));
    let d = &field.data;
    let dims = out.dim();
    let clamp = |v: usize| v.min(n - 1);
    for i in 0..dims.0 {
        for j in 0..dims.1 {
            for k in 0..dims.2 {
                // the two transverse indices of the edge select up to 4 cells
                let (t1, t2, along) = match axis {
                    0 => (j, k, i),
                    1 => (i, k, j),
                    _ => (i, j, k),
                };
                let mut acc = 0.0;
                let mut count = 0.0;
                for da in [-1isize, 0] {
                    for db in [-1isize, 0] {
                        let a = t1 as isize + da;
                        let b = t2 as isize + db;
                        if a < 0 || b < 0 || a >= n as isize || b >= n as isize {
                            continue;
                        }
                        let (a, b) = (a as usize, b as usize);
                        let idx = match axis {
                            0 => [clamp(along), a, b],
                            1 => [a, clamp(along), b],
                            _ => [a, b, clamp(along)],
                        };
                        acc += d[idx];
                        count += 1.0;
                    }
                }
                out[[i, j, k]] = acc / count;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_sigma() {
        let g = Grid::with_default_margin(8).unwrap();
        let mu = RealCellField::constant(g, 1.0);
        let eps = RealCellField::constant(g, 1.0);
        let sigma = RealCellField::constant(g, 0.0);
        assert!(MaterialParams::new(g, mu, eps, sigma, 1.0).is_err());
    }

    #[test]
    fn bump_spec_samples_and_bounds() {
        let g = Grid::with_default_margin(8).unwrap();
        let spec = MaterialSpec {
            bumps: vec![(
                CoefficientId::Sigma,
                Bump { center: [0.5; 3], width: 0.2, amplitude: 0.1 },
            )],
            ..Default::default()
        };
        let p = spec.sample(g).unwrap();
        assert!(p.lambda_min >= 1.0);
        assert!(p.lambda_max <= 1.1 + 1e-12);
        // q has positive imaginary part everywhere
        let q = p.q_cell(0.7);
        assert!(q.data.iter().all(|v| v.im > 0.0));
    }

    #[test]
    fn averaging_preserves_constants() {
        let g = Grid::with_default_margin(7).unwrap();
        let f = RealCellField::constant(g, 2.5);
        for axis in 0..3 {
            assert!(cell_to_face(&f, axis).iter().all(|v| (v - 2.5).abs() < 1e-15));
            assert!(cell_to_edge(&f, axis).iter().all(|v| (v - 2.5).abs() < 1e-15));
        }
    }

    #[test]
    fn interior_edge_average_uses_four_cells() {
        let g = Grid::with_default_margin(7).unwrap();
        let f = RealCellField::from_fn(g, |x| x[1]);
        let ex = cell_to_edge(&f, 0);
        // at an interior x-edge the four neighbor cells average to the
        // node-plane coordinate
        let want = g.coord(2);
        assert!((ex[[1, 2, 3]] - want).abs() < 1e-14);
    }
}
