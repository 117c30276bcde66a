//! Electro-seismic reconstruction.
//!
//! Step 1 recovers the coupling L from the D fields with the linear
//! transport machinery (L satisfies the same equation as q, with w = D).
//! Step 2 inverts the data pointwise: E = L^-1 D. Step 3 extracts q from
//! the pointwise relation omega q E^1 = curl curl E^1 by least squares
//! over the three components (weighted by |E^1| through the normal
//! equations), gated by the second condition of the zeta3 cover. Step 4
//! splits q into eps = Re q / omega and sigma = Im q.

use ndarray::Array3;
use num_complex::Complex64;

use crate::cellops;
use crate::error::{Error, Result};
use crate::field::{Layout, VectorField};
use crate::forward::synth::SyntheticDataset;
use crate::frequency::CoverReport;
use crate::reconstruct::method2::{build_m2, M2Mode};
use crate::reconstruct::transport::{
    integrate_over_cover, ReconstructionReport, SeedValue, TransportSystem, UnknownKind,
};
use crate::tol;

type C = Complex64;

#[derive(Debug, Clone)]
pub struct EsOptions {
    pub s_lin_frac: f64,
    pub presmooth: Option<f64>,
    /// Optional known (eps, sigma) at a reference cell; the recovered
    /// values there are compared and the relative mismatch reported.
    pub reference: Option<((usize, usize, usize), f64, f64)>,
}

impl Default for EsOptions {
    fn default() -> Self {
        Self { s_lin_frac: tol::SLIN_FRACTION, presmooth: None, reference: None }
    }
}

fn d_fields<'a>(
    dataset: &'a SyntheticDataset,
    omega: f64,
) -> Result<Vec<&'a VectorField>> {
    let records = dataset.records_at(omega);
    if records.len() != 6 {
        return Err(Error::InvalidArgument(format!(
            "electro-seismic pipeline needs 6 records at omega = {omega}, found {}",
            records.len()
        )));
    }
    records
        .iter()
        .map(|r| {
            r.d_cell.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "record ({omega}, {}) carries no D field",
                    r.illumination_id
                ))
            })
        })
        .collect()
}

/// Full electro-seismic pipeline over a zeta3 cover.
pub fn electroseismic_pipeline(
    dataset: &SyntheticDataset,
    cover: &CoverReport,
    seed_l: &SeedValue,
    options: &EsOptions,
) -> Result<ReconstructionReport> {
    let grid = dataset.truth.grid;
    let n = grid.n();

    // step 1: recover L from the D fields
    let mut systems: Vec<TransportSystem> = Vec::new();
    let mut masks = Vec::new();
    for (idx, &omega) in cover.selected.iter().enumerate() {
        let d = d_fields(dataset, omega)?;
        let sys = build_m2(
            [d[0], d[1], d[2], d[3], d[4], d[5]],
            M2Mode::ElectroSeismicD,
            omega,
            options.s_lin_frac,
            options.presmooth,
        )?;
        systems.push(sys);
        masks.push(cover.masks[idx].clone());
    }
    let l_report =
        integrate_over_cover(grid, &systems, &masks, seed_l, UnknownKind::Coupling)?;
    let l = l_report
        .coupling
        .as_ref()
        .expect("coupling run returns the coupling field");
    let l_mask = &l_report.recovered;
    if l.iter().zip(l_mask.iter()).any(|(v, m)| *m && *v <= 0.0) {
        let (cell, _) = l
            .indexed_iter()
            .zip(l_mask.iter())
            .find(|((_, v), m)| **m && **v <= 0.0)
            .expect("checked above");
        return Err(Error::NonPhysicalQ(cell.0 .0, cell.0 .1, cell.0 .2, 0.0));
    }

    // steps 2-4 per frequency, averaged where several frequencies are
    // admissible at a cell
    let dims = grid.cell_dims();
    let mut eps_acc = Array3::<f64>::zeros(dims);
    let mut sigma_acc = Array3::<f64>::zeros(dims);
    let mut counts = Array3::<f64>::zeros(dims);
    let mut frequency_used = l_report.frequency_used.clone();

    // a cell needs its full stencil neighborhood of recovered L values
    let l_interior = |i: usize, j: usize, k: usize| -> bool {
        if i == 0 || j == 0 || k == 0 || i + 1 >= n || j + 1 >= n || k + 1 >= n {
            return false;
        }
        for di in -1isize..=1 {
            for dj in -1isize..=1 {
                for dk in -1isize..=1 {
                    let (a, b, c) = (
                        (i as isize + di) as usize,
                        (j as isize + dj) as usize,
                        (k as isize + dk) as usize,
                    );
                    if !l_mask[[a, b, c]] {
                        return false;
                    }
                }
            }
        }
        true
    };

    for (idx, &omega) in cover.selected.iter().enumerate() {
        let d = d_fields(dataset, omega)?;
        // E^1 = L^-1 D^1 wherever L is recovered
        let mut e1 = VectorField::zeros(grid, Layout::Cell);
        for axis in 0..3 {
            let comp = e1.component_mut(axis);
            for ((v, dv), (lv, m)) in comp
                .iter_mut()
                .zip(d[0].component(axis).iter())
                .zip(l.iter().zip(l_mask.iter()))
            {
                if *m {
                    *v = dv / *lv;
                }
            }
        }
        let cc = cellops::curl_curl(&e1)?;
        let mask = &cover.masks[idx];
        for (i, j, k) in grid.band_cells(cover.depth.max(1))? {
            if !mask[[i, j, k]] || !l_interior(i, j, k) {
                continue;
            }
            let ev = e1.at_cell(i, j, k);
            let cv = cc.at_cell(i, j, k);
            let denom: f64 = ev.iter().map(|v| v.norm_sqr()).sum();
            if denom <= 0.0 {
                continue; // condition 2 of zeta3 already guards this
            }
            let num: C = ev.iter().zip(&cv).map(|(e, c)| e.conj() * c).sum();
            let q = num / (omega * denom);
            if q.im <= 0.0 {
                continue;
            }
            eps_acc[[i, j, k]] += q.re / omega;
            sigma_acc[[i, j, k]] += q.im;
            counts[[i, j, k]] += 1.0;
            frequency_used[[i, j, k]] = omega;
        }
    }

    let mut eps = Array3::zeros(dims);
    let mut sigma = Array3::zeros(dims);
    let mut recovered = Array3::from_elem(dims, false);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if counts[[i, j, k]] > 0.0 {
                    eps[[i, j, k]] = eps_acc[[i, j, k]] / counts[[i, j, k]];
                    sigma[[i, j, k]] = sigma_acc[[i, j, k]] / counts[[i, j, k]];
                    recovered[[i, j, k]] = true;
                }
            }
        }
    }

    let reference_mismatch = options.reference.map(|((i, j, k), eps_ref, sigma_ref)| {
        if recovered[[i, j, k]] {
            (
                (eps[[i, j, k]] - eps_ref).abs() / eps_ref.abs().max(f64::MIN_POSITIVE),
                (sigma[[i, j, k]] - sigma_ref).abs() / sigma_ref.abs().max(f64::MIN_POSITIVE),
            )
        } else {
            (f64::INFINITY, f64::INFINITY)
        }
    });

    let mut report = ReconstructionReport {
        grid,
        eps,
        sigma,
        coupling: l_report.coupling.clone(),
        recovered,
        frequency_used,
        visit_order: l_report.visit_order.clone(),
        unrecovered_cells: l_report.unrecovered_cells,
        divergent_cells: l_report.divergent_cells.clone(),
        coupling_recovered: Some(l_report.recovered.clone()),
        reference_mismatch,
        metrics: None,
    };
    report.compute_metrics(
        &dataset.truth.eps,
        &dataset.truth.sigma,
        dataset.coupling_truth.as_ref(),
    );
    Ok(report)
}
