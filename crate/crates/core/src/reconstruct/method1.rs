//! First magnetic method.
//!
//! From three measured H fields, the 3x6 matrix
//!   M = [curl H^1 x e1, curl H^1 x e2, ..., curl H^3 x e1, curl H^3 x e2]
//! and the row vector v = ((H^1)_1, (H^1)_2, ..., (H^3)_1, (H^3)_2) give
//! the transport equation
//!   grad q = -q (lap v) M^+ - q^2 omega v M^+,
//! integrated over the cover with q = omega eps + i sigma.

use nalgebra::SMatrix;
use ndarray::Array3;
use num_complex::Complex64;

use crate::cellops;
use crate::error::{Error, Result};
use crate::field::{Layout, VectorField};
use crate::frequency::CoverReport;
use crate::forward::synth::SyntheticDataset;
use crate::reconstruct::linalg::{cross_product_matrix, right_inverse_3x6, sigma_min_3x6};
use crate::reconstruct::transport::{
    integrate_over_cover, ReconstructionReport, SeedValue, TransportData, TransportSystem,
    UnknownKind,
};
use crate::tol;

type C = Complex64;
type Row6 = SMatrix<C, 1, 6>;

/// Stencil depth of the method-1 coefficients on top of the data cells.
pub const METHOD1_DEPTH: usize = cellops::STENCIL_DEPTH;

pub(crate) fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

/// Assemble the transport system for one frequency from three measured
/// H fields at cell centers. `s_lin_frac` scales the median conditioning
/// into the admissibility floor.
pub fn build_m1(
    h: [&VectorField; 3],
    omega: f64,
    s_lin_frac: f64,
    presmooth: Option<f64>,
) -> Result<TransportSystem> {
    for f in &h {
        f.expect_layout(Layout::Cell)?;
    }
    let grid = h[0].grid;
    let depth = grid.band_range(METHOD1_DEPTH).map(|_| METHOD1_DEPTH)?;

    let smoothed: Option<[VectorField; 3]> = match presmooth {
        Some(w) => Some([
            cellops::gaussian_smooth(h[0], w)?,
            cellops::gaussian_smooth(h[1], w)?,
            cellops::gaussian_smooth(h[2], w)?,
        ]),
        None => None,
    };
    let hs: [&VectorField; 3] = match &smoothed {
        Some(s) => [&s[0], &s[1], &s[2]],
        None => h,
    };

    let curls = [
        cellops::curl(hs[0])?,
        cellops::curl(hs[1])?,
        cellops::curl(hs[2])?,
    ];
    let laps = [
        cellops::laplacian(hs[0])?,
        cellops::laplacian(hs[1])?,
        cellops::laplacian(hs[2])?,
    ];

    let dims = grid.cell_dims();
    let mut condition = Array3::zeros(dims);
    let mut cond_values = Vec::new();
    for (i, j, k) in grid.band_cells(depth)? {
        let g = [
            curls[0].at_cell(i, j, k),
            curls[1].at_cell(i, j, k),
            curls[2].at_cell(i, j, k),
        ];
        let smin = sigma_min_3x6(&cross_product_matrix(&g));
        condition[[i, j, k]] = smin;
        cond_values.push(smin);
    }
    let s_lin = s_lin_frac * median(cond_values);

    let mut a = VectorField::zeros(grid, Layout::Cell);
    let mut b = VectorField::zeros(grid, Layout::Cell);
    let mut admissible = Array3::from_elem(dims, false);
    for (i, j, k) in grid.band_cells(depth)? {
        if !(condition[[i, j, k]] > s_lin) {
            continue;
        }
        let g = [
            curls[0].at_cell(i, j, k),
            curls[1].at_cell(i, j, k),
            curls[2].at_cell(i, j, k),
        ];
        let m = cross_product_matrix(&g);
        let pinv = match right_inverse_3x6(&m, s_lin) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let mut v = Row6::zeros();
        let mut lap_v = Row6::zeros();
        for (fi, (hf, lf)) in hs.iter().zip(&laps).enumerate() {
            let hv = hf.at_cell(i, j, k);
            let lv = lf.at_cell(i, j, k);
            v[(0, 2 * fi)] = hv[0];
            v[(0, 2 * fi + 1)] = hv[1];
            lap_v[(0, 2 * fi)] = lv[0];
            lap_v[(0, 2 * fi + 1)] = lv[1];
        }
        let a_row = lap_v * pinv;
        let b_row = v * pinv;
        for axis in 0..3 {
            a.component_mut(axis)[[i, j, k]] = a_row[(0, axis)];
            b.component_mut(axis)[[i, j, k]] = b_row[(0, axis)];
        }
        admissible[[i, j, k]] = true;
    }

    Ok(TransportSystem {
        grid,
        omega,
        depth,
        data: TransportData::Method1 { a, b },
        admissible,
        condition,
        s_lin,
    })
}

/// Options shared by the magnetic reconstructions.
#[derive(Debug, Clone)]
pub struct MagneticOptions {
    pub s_lin_frac: f64,
    /// Gaussian pre-smoothing width in cells for noisy data; off by
    /// default.
    pub presmooth: Option<f64>,
}

impl Default for MagneticOptions {
    fn default() -> Self {
        Self { s_lin_frac: tol::SLIN_FRACTION, presmooth: None }
    }
}

/// Run the full first-method reconstruction over a cover.
pub fn integrate_method1(
    dataset: &SyntheticDataset,
    cover: &CoverReport,
    seed: &SeedValue,
    options: &MagneticOptions,
) -> Result<ReconstructionReport> {
    if dataset.set.illuminations.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "method 1 needs 3 illuminations, dataset has {}",
            dataset.set.illuminations.len()
        )));
    }
    let mut systems = Vec::new();
    let mut masks = Vec::new();
    for (idx, &omega) in cover.selected.iter().enumerate() {
        let records = dataset.records_at(omega);
        if records.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "dataset lacks the 3 records at omega = {omega}"
            )));
        }
        let sys = build_m1(
            [&records[0].h_cell, &records[1].h_cell, &records[2].h_cell],
            omega,
            options.s_lin_frac,
            options.presmooth,
        )?;
        systems.push(sys);
        masks.push(cover.masks[idx].clone());
    }
    let mut report =
        integrate_over_cover(dataset.truth.grid, &systems, &masks, seed, UnknownKind::Admittivity)?;
    report.compute_metrics(&dataset.truth.eps, &dataset.truth.sigma, None);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn parallel_curls_leave_mask_empty() {
        // all H fields equal: the cross-product matrix is rank deficient
        let g = Grid::with_default_margin(8).unwrap();
        let h = VectorField::from_fn(g, Layout::Cell, |axis, x| {
            C::new(x[(axis + 1) % 3], 0.5 * x[axis])
        });
        let sys = build_m1([&h, &h, &h], 1.0, tol::SLIN_FRACTION, None).unwrap();
        assert!(sys.admissible.iter().all(|v| !v));
    }

    #[test]
    fn independent_linear_fields_give_full_mask() {
        // H^i with curl H^i = e_i: H = (0, 0, x2), (x3, 0, 0), (0, x1, 0)
        let g = Grid::with_default_margin(8).unwrap();
        let mk = |f: fn([f64; 3]) -> [f64; 3]| {
            VectorField::from_fn(g, Layout::Cell, move |axis, x| C::new(f(x)[axis], 0.0))
        };
        let h1 = mk(|x| [0.0, 0.0, x[1]]);
        let h2 = mk(|x| [x[2], 0.0, 0.0]);
        let h3 = mk(|x| [0.0, x[0], 0.0]);
        let sys = build_m1([&h1, &h2, &h3], 1.0, tol::SLIN_FRACTION, None).unwrap();
        for (i, j, k) in g.band_cells(sys.depth).unwrap() {
            assert!(sys.admissible[[i, j, k]]);
            assert!(sys.condition[[i, j, k]] > 0.5);
        }
    }
}
