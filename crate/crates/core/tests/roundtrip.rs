//! Inverse-crime round trips at moderate resolution: synthesize internal
//! data from known coefficients, certify a cover, reconstruct, compare.

use mfmax_core::forward::{synthesize_measurements, MeasurementSet, SynthOptions};
use mfmax_core::frequency::{scan, select_cover, CoverPolicy, FrequencyGrid, ScanOptions};
use mfmax_core::functionals::ZetaId;
use mfmax_core::illum;
use mfmax_core::material::{Bump, CoefficientId, MaterialSpec};
use mfmax_core::reconstruct::{
    electroseismic_pipeline, integrate_method1, integrate_method2, EsOptions, SeedValue,
};
use mfmax_core::reconstruct::method1::MagneticOptions;
use mfmax_core::{Grid, MaterialParams, RealCellField};

fn bumpy_params(grid: Grid, sig_amp: f64, eps_amp: f64) -> MaterialParams {
    let spec = MaterialSpec {
        bumps: vec![
            (
                CoefficientId::Sigma,
                Bump { center: [0.45, 0.55, 0.5], width: 0.3, amplitude: sig_amp },
            ),
            (
                CoefficientId::Eps,
                Bump { center: [0.6, 0.4, 0.45], width: 0.35, amplitude: eps_amp },
            ),
        ],
        ..Default::default()
    };
    spec.sample(grid).unwrap()
}

fn seed_cell(grid: Grid) -> (usize, usize, usize) {
    let c = grid.n() / 2;
    (c, c, c)
}

fn truth_seed(params: &MaterialParams, cell: (usize, usize, usize)) -> SeedValue {
    SeedValue::eps_sigma(
        cell,
        params.eps.data[[cell.0, cell.1, cell.2]],
        params.sigma.data[[cell.0, cell.1, cell.2]],
    )
}

#[test]
fn method1_roundtrip_recovers_constant_coefficients() {
    // constant coefficients: the transport right-hand side cancels
    // analytically, so recovered q is uniform up to discretization error
    let grid = Grid::with_default_margin(12).unwrap();
    let params = MaterialParams::constant(grid, 1.0, 1.0, 1.0).unwrap();
    let freq = FrequencyGrid::new(0.5, 2.0, 2).unwrap();
    let cover = select_cover(
        &scan(&params, &illum::basis_triple(), ZetaId::Zeta1, &freq, &ScanOptions::default())
            .unwrap(),
        &CoverPolicy::default(),
    )
    .unwrap();
    let set = MeasurementSet::new(cover.selected.clone(), illum::basis_triple()).unwrap();
    let ds = synthesize_measurements(&params, &set, &SynthOptions::default()).unwrap();
    let report = integrate_method1(
        &ds,
        &cover,
        &truth_seed(&params, seed_cell(grid)),
        &MagneticOptions::default(),
    )
    .unwrap();
    let m = report.metrics.as_ref().unwrap();
    println!(
        "method1 constant n=12: eps {:.3e}, sigma {:.3e}, cells {}",
        m.linf_rel_eps, m.linf_rel_sigma, m.cells_compared
    );
    assert!(m.cells_compared > 0);
    assert!(m.linf_rel_eps <= 1e-2, "eps error {}", m.linf_rel_eps);
    assert!(m.linf_rel_sigma <= 1e-2, "sigma error {}", m.linf_rel_sigma);
}

#[test]
fn method1_roundtrip_recovers_smooth_bumps() {
    let grid = Grid::with_default_margin(16).unwrap();
    let params = bumpy_params(grid, 0.2, 0.15);
    let freq = FrequencyGrid::new(0.5, 2.0, 4).unwrap();
    let cover = select_cover(
        &scan(&params, &illum::basis_triple(), ZetaId::Zeta1, &freq, &ScanOptions::default())
            .unwrap(),
        &CoverPolicy::default(),
    )
    .unwrap();
    let set = MeasurementSet::new(cover.selected.clone(), illum::basis_triple()).unwrap();
    let ds = synthesize_measurements(&params, &set, &SynthOptions::default()).unwrap();
    let report = integrate_method1(
        &ds,
        &cover,
        &truth_seed(&params, seed_cell(grid)),
        &MagneticOptions::default(),
    )
    .unwrap();
    let m = report.metrics.as_ref().unwrap();
    println!(
        "method1 bumps n=16: eps {:.3e}, sigma {:.3e}, cells {}, unrecovered {}",
        m.linf_rel_eps, m.linf_rel_sigma, m.cells_compared, report.unrecovered_cells
    );
    assert!(m.linf_rel_sigma <= 0.10, "sigma error {}", m.linf_rel_sigma);
    assert!(m.linf_rel_eps <= 0.10, "eps error {}", m.linf_rel_eps);
}

#[test]
fn method2_roundtrip_recovers_smooth_bumps() {
    let grid = Grid::with_default_margin(16).unwrap();
    let params = bumpy_params(grid, 0.2, 0.15);
    let freq = FrequencyGrid::new(0.5, 2.0, 4).unwrap();
    let cover = select_cover(
        &scan(
            &params,
            &illum::standard_sextuple(),
            ZetaId::Zeta2,
            &freq,
            &ScanOptions::default(),
        )
        .unwrap(),
        &CoverPolicy::default(),
    )
    .unwrap();
    let set = MeasurementSet::new(cover.selected.clone(), illum::standard_sextuple()).unwrap();
    let ds = synthesize_measurements(&params, &set, &SynthOptions::default()).unwrap();
    let report = integrate_method2(
        &ds,
        &cover,
        &truth_seed(&params, seed_cell(grid)),
        &MagneticOptions::default(),
    )
    .unwrap();
    let m = report.metrics.as_ref().unwrap();
    println!(
        "method2 bumps n=16: eps {:.3e}, sigma {:.3e}, cells {}, unrecovered {}",
        m.linf_rel_eps, m.linf_rel_sigma, m.cells_compared, report.unrecovered_cells
    );
    assert!(m.linf_rel_sigma <= 0.10, "sigma error {}", m.linf_rel_sigma);
    assert!(m.linf_rel_eps <= 0.10, "eps error {}", m.linf_rel_eps);
}

#[test]
fn electroseismic_roundtrip_recovers_coupling_and_coefficients() {
    let grid = Grid::with_default_margin(16).unwrap();
    let params = bumpy_params(grid, 0.2, 0.15);
    let l_truth = RealCellField::from_fn(grid, |x| {
        1.0 + 0.3
            * (-((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) + (x[2] - 0.55).powi(2)) / 0.09)
                .exp()
    });
    let freq = FrequencyGrid::new(0.5, 2.0, 4).unwrap();
    let cover = select_cover(
        &scan(
            &params,
            &illum::standard_sextuple(),
            ZetaId::Zeta3,
            &freq,
            &ScanOptions::default(),
        )
        .unwrap(),
        &CoverPolicy::default(),
    )
    .unwrap();
    let set = MeasurementSet::new(cover.selected.clone(), illum::standard_sextuple()).unwrap();
    let options = SynthOptions { coupling: Some(l_truth.clone()), ..Default::default() };
    let ds = synthesize_measurements(&params, &set, &options).unwrap();

    let cell = seed_cell(grid);
    let seed = SeedValue::coupling(cell, l_truth.data[[cell.0, cell.1, cell.2]]);
    let es_opts = EsOptions {
        reference: Some((
            cell,
            params.eps.data[[cell.0, cell.1, cell.2]],
            params.sigma.data[[cell.0, cell.1, cell.2]],
        )),
        ..Default::default()
    };
    let report = electroseismic_pipeline(&ds, &cover, &seed, &es_opts).unwrap();
    let m = report.metrics.as_ref().unwrap();
    println!(
        "es bumps n=16: L {:.3e}, eps {:.3e}, sigma {:.3e}, cells {}, ref mismatch {:?}",
        m.linf_rel_coupling.unwrap_or(f64::NAN),
        m.linf_rel_eps,
        m.linf_rel_sigma,
        m.cells_compared,
        report.reference_mismatch
    );
    assert!(m.linf_rel_coupling.unwrap() <= 0.10);
    assert!(m.linf_rel_sigma <= 0.10, "sigma error {}", m.linf_rel_sigma);
    assert!(m.linf_rel_eps <= 0.10, "eps error {}", m.linf_rel_eps);
}

#[test]
fn wrong_seed_shifts_the_reconstruction() {
    let grid = Grid::with_default_margin(12).unwrap();
    let params = MaterialParams::constant(grid, 1.0, 1.0, 1.0).unwrap();
    let freq = FrequencyGrid::new(0.5, 2.0, 2).unwrap();
    let cover = select_cover(
        &scan(&params, &illum::basis_triple(), ZetaId::Zeta1, &freq, &ScanOptions::default())
            .unwrap(),
        &CoverPolicy::default(),
    )
    .unwrap();
    let set = MeasurementSet::new(cover.selected.clone(), illum::basis_triple()).unwrap();
    let ds = synthesize_measurements(&params, &set, &SynthOptions::default()).unwrap();
    let cell = seed_cell(grid);
    let wrong = SeedValue::eps_sigma(cell, 2.0, 2.0);
    let report =
        integrate_method1(&ds, &cover, &wrong, &MagneticOptions::default()).unwrap();
    let m = report.metrics.as_ref().unwrap();
    assert!(
        m.linf_rel_sigma > 0.5,
        "doubled seed must show up as a large mismatch, got {}",
        m.linf_rel_sigma
    );
}
