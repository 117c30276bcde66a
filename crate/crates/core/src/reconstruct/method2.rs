//! Second magnetic method and the shared linear transport builder.
//!
//! With w_i = curl H^i (magnetic data) or w_i = D^i (electro-seismic
//! data), the 3x3 matrix M = [eta(w1,w2) eta(w3,w4) eta(w5,w6)] and the
//! row vector (gamma(w1,w2), gamma(w3,w4), gamma(w5,w6)) give
//!   grad z = z (gamma_1, gamma_2, gamma_3) M^-1,
//! where z = q for the magnetic case and z = L for the coupling.

use ndarray::Array3;
use num_complex::Complex64;

use crate::cellops;
use crate::error::{Error, Result};
use crate::field::{Layout, VectorField};
use crate::forward::synth::SyntheticDataset;
use crate::frequency::CoverReport;
use crate::functionals::{eta, gamma};
use crate::reconstruct::linalg::Mat3;
use crate::reconstruct::method1::{median, MagneticOptions};
use crate::reconstruct::transport::{
    integrate_over_cover, ReconstructionReport, SeedValue, TransportData, TransportSystem,
    UnknownKind,
};

type C = Complex64;

/// What the six measured fields are.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M2Mode {
    /// w_i = curl H^i computed from cell-centered magnetic data.
    MagneticCurlH,
    /// w_i = D^i used directly (electro-seismic first step).
    ElectroSeismicD,
}

/// Stencil depth of the method-2 coefficients on top of the data cells.
pub fn m2_depth(mode: M2Mode) -> usize {
    match mode {
        // curl (1) + eta/gamma (1)
        M2Mode::MagneticCurlH => 2 * cellops::STENCIL_DEPTH,
        // eta/gamma (1) directly on the data
        M2Mode::ElectroSeismicD => cellops::STENCIL_DEPTH,
    }
}

/// Assemble the linear transport system for one frequency from six
/// measured cell fields.
pub fn build_m2(
    fields: [&VectorField; 6],
    mode: M2Mode,
    omega: f64,
    s_lin_frac: f64,
    presmooth: Option<f64>,
) -> Result<TransportSystem> {
    for f in &fields {
        f.expect_layout(Layout::Cell)?;
    }
    let grid = fields[0].grid;
    let depth = m2_depth(mode);
    grid.band_range(depth)?;

    let smoothed: Option<Vec<VectorField>> = match presmooth {
        Some(w) => Some(
            fields
                .iter()
                .map(|f| cellops::gaussian_smooth(f, w))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let input: Vec<&VectorField> = match &smoothed {
        Some(s) => s.iter().collect(),
        None => fields.to_vec(),
    };

    let w: Vec<VectorField> = match mode {
        M2Mode::MagneticCurlH => input
            .iter()
            .map(|h| cellops::curl(h))
            .collect::<Result<_>>()?,
        M2Mode::ElectroSeismicD => input.iter().map(|d| (*d).clone()).collect(),
    };

    let cols = [
        eta(&w[0], &w[1])?,
        eta(&w[2], &w[3])?,
        eta(&w[4], &w[5])?,
    ];
    let rhs = [
        gamma(&w[0], &w[1])?,
        gamma(&w[2], &w[3])?,
        gamma(&w[4], &w[5])?,
    ];

    let dims = grid.cell_dims();
    let mut condition = Array3::zeros(dims);
    let mut cond_values = Vec::new();
    let mat_at = |i: usize, j: usize, k: usize| -> Mat3 {
        let mut m = Mat3::zeros();
        for (c, col) in cols.iter().enumerate() {
            let v = col.at_cell(i, j, k);
            for r in 0..3 {
                m[(r, c)] = v[r];
            }
        }
        m
    };
    for (i, j, k) in grid.band_cells(depth)? {
        let det = mat_at(i, j, k).determinant().norm();
        condition[[i, j, k]] = det;
        cond_values.push(det);
    }
    let s_lin = s_lin_frac * median(cond_values);

    let mut g = VectorField::zeros(grid, Layout::Cell);
    let mut admissible = Array3::from_elem(dims, false);
    for (i, j, k) in grid.band_cells(depth)? {
        if !(condition[[i, j, k]] > s_lin) {
            continue;
        }
        let m = mat_at(i, j, k);
        let Some(inv) = m.try_inverse() else { continue };
        // row vector (gamma_1, gamma_2, gamma_3) times M^-1
        let gv = [
            rhs[0].data[[i, j, k]],
            rhs[1].data[[i, j, k]],
            rhs[2].data[[i, j, k]],
        ];
        for axis in 0..3 {
            let mut acc = C::default();
            for (r, gr) in gv.iter().enumerate() {
                acc += gr * inv[(r, axis)];
            }
            g.component_mut(axis)[[i, j, k]] = acc;
        }
        admissible[[i, j, k]] = true;
    }

    Ok(TransportSystem {
        grid,
        omega,
        depth,
        data: TransportData::LinearInZ { g },
        admissible,
        condition,
        s_lin,
    })
}

/// Run the full second-method reconstruction over a cover.
pub fn integrate_method2(
    dataset: &SyntheticDataset,
    cover: &CoverReport,
    seed: &SeedValue,
    options: &MagneticOptions,
) -> Result<ReconstructionReport> {
    if dataset.set.illuminations.len() != 6 {
        return Err(Error::InvalidArgument(format!(
            "method 2 needs 6 illuminations, dataset has {}",
            dataset.set.illuminations.len()
        )));
    }
    let mut systems = Vec::new();
    let mut masks = Vec::new();
    for (idx, &omega) in cover.selected.iter().enumerate() {
        let records = dataset.records_at(omega);
        if records.len() != 6 {
            return Err(Error::InvalidArgument(format!(
                "dataset lacks the 6 records at omega = {omega}"
            )));
        }
        let h: Vec<&VectorField> = records.iter().map(|r| &r.h_cell).collect();
        let sys = build_m2(
            [h[0], h[1], h[2], h[3], h[4], h[5]],
            M2Mode::MagneticCurlH,
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
    use crate::illum;
    use crate::tol;

    #[test]
    fn identical_fields_give_empty_mask() {
        let g = Grid::with_default_margin(8).unwrap();
        let f = VectorField::from_fn(g, Layout::Cell, |axis, x| {
            C::new(x[axis] * x[(axis + 1) % 3], x[(axis + 2) % 3])
        });
        let sys = build_m2(
            [&f, &f, &f, &f, &f, &f],
            M2Mode::ElectroSeismicD,
            1.0,
            tol::SLIN_FRACTION,
            None,
        )
        .unwrap();
        assert!(sys.condition.iter().all(|v| *v == 0.0));
        assert!(sys.admissible.iter().all(|v| !v));
    }

    #[test]
    fn static_sextuple_gives_unit_condition_in_es_mode() {
        // the standard sextuple's eta columns reduce to the basis, so
        // |det M| = 1 and the coefficient vector vanishes
        let g = Grid::with_default_margin(8).unwrap();
        let fields: Vec<VectorField> = illum::standard_sextuple()
            .iter()
            .map(|ill| VectorField::sample_poly(g, Layout::Cell, &ill.vector_field()))
            .collect();
        let refs: Vec<&VectorField> = fields.iter().collect();
        let sys = build_m2(
            [refs[0], refs[1], refs[2], refs[3], refs[4], refs[5]],
            M2Mode::ElectroSeismicD,
            1.0,
            tol::SLIN_FRACTION,
            None,
        )
        .unwrap();
        for (i, j, k) in g.band_cells(sys.depth).unwrap() {
            assert!((sys.condition[[i, j, k]] - 1.0).abs() < 1e-10);
            assert!(sys.admissible[[i, j, k]]);
            if let TransportData::LinearInZ { g: ref coeff } = sys.data {
                for axis in 0..3 {
                    assert!(coeff.component(axis)[[i, j, k]].norm() < 1e-10);
                }
            }
        }
    }
}
