//! On-disk layout of datasets, scans, covers and reconstruction reports.
//!
//! Field files are VTK structured points; descriptors are key-value text.
//! File names use frequency/illumination indices; the descriptor maps them
//! back to values and ids.

use std::path::Path;

use mfmax_core::error::{Error, Result};
use mfmax_core::field::FieldKind;
use mfmax_core::forward::synth::{
    MeasurementRecord, MeasurementSet, NoiseDescriptor, SyntheticDataset,
};
use mfmax_core::frequency::{components, CoverReport, ScanResult};
use mfmax_core::functionals::{ConditionField, ZetaId};
use mfmax_core::illum::Illumination;
use mfmax_core::io::kv::{KvReader, KvWriter};
use mfmax_core::io::vtk::VtkCellData;
use mfmax_core::material::MaterialParams;
use mfmax_core::reconstruct::ReconstructionReport;
use mfmax_core::{Grid, RealCellField};

use crate::manifest::ManifestBuilder;

pub const DATASET_FORMAT: &str = "mfmax-dataset-v1";
pub const SCAN_FORMAT: &str = "mfmax-scan-v1";
pub const COVER_FORMAT: &str = "mfmax-cover-v1";
pub const REPORT_FORMAT: &str = "mfmax-report-v1";

fn omega_index(frequencies: &[f64], omega: f64) -> usize {
    frequencies
        .iter()
        .position(|w| *w == omega)
        .expect("record frequency always comes from the set")
}

/// Write a dataset directory; returns the list of files written.
pub fn save_dataset(
    b: &mut ManifestBuilder,
    ds: &SyntheticDataset,
) -> Result<()> {
    let grid = ds.truth.grid;

    let mut truth = VtkCellData::new(grid);
    truth.push_real_scalar("mu", &ds.truth.mu.data);
    truth.push_real_scalar("eps", &ds.truth.eps.data);
    truth.push_real_scalar("sigma", &ds.truth.sigma.data);
    if let Some(l) = &ds.coupling_truth {
        truth.push_real_scalar("coupling", &l.data);
    }
    truth.write(&b.dir().join("truth.vtk"), "ground-truth coefficients")?;
    b.add("truth.vtk");

    let mut w = KvWriter::new(DATASET_FORMAT);
    w.set("grid.n", grid.n());
    w.set("grid.margin", grid.margin());
    w.set_f64("noise.level", ds.noise.level);
    w.set("noise.seed", ds.noise.seed);
    w.set("coupling_present", ds.coupling_truth.is_some());
    w.set("omega_count", ds.set.frequencies.len());
    for (i, omega) in ds.set.frequencies.iter().enumerate() {
        w.set_f64(&format!("omega.{i}"), *omega);
    }
    w.set("illumination_count", ds.set.illuminations.len());
    for (i, ill) in ds.set.illuminations.iter().enumerate() {
        w.set(&format!("illumination.{i}"), &ill.id);
    }
    w.set("record_count", ds.records.len());
    for (r, rec) in ds.records.iter().enumerate() {
        let wi = omega_index(&ds.set.frequencies, rec.omega);
        let ii = ds
            .set
            .illuminations
            .iter()
            .position(|ill| ill.id == rec.illumination_id)
            .expect("record illumination always comes from the set");
        let file = format!("rec_w{wi}_i{ii}.vtk");
        let mut data = VtkCellData::new(grid);
        data.push_complex_vector("h", &rec.h_cell)?;
        if let Some(d) = &rec.d_cell {
            data.push_complex_vector("d", d)?;
        }
        data.write(&b.dir().join(&file), "internal measurement")?;
        b.add(&file);
        w.set(&format!("record.{r}.omega_index"), wi);
        w.set(&format!("record.{r}.illumination_index"), ii);
        w.set(&format!("record.{r}.file"), &file);
        w.set_f64(&format!("record.{r}.residual"), rec.solver_residual);
    }
    b.write_text("dataset.txt", &w.into_string())?;
    Ok(())
}

pub fn load_dataset(dir: &Path, grid: Grid, mu_fallback: f64) -> Result<SyntheticDataset> {
    let text = std::fs::read_to_string(dir.join("dataset.txt"))?;
    let mut r = KvReader::parse(&text)?;
    let format = r.required("format")?;
    if format != DATASET_FORMAT {
        return Err(Error::Parse(format!("dataset format '{format}'")));
    }
    let n = r.required_usize("grid.n")?;
    let margin = r.required_usize("grid.margin")?;
    if n != grid.n() || margin != grid.margin() {
        return Err(Error::Parse(format!(
            "dataset grid {n}/{margin} does not match config grid {}/{}",
            grid.n(),
            grid.margin()
        )));
    }
    let noise = NoiseDescriptor {
        level: r.required_f64("noise.level")?,
        seed: r.required_usize("noise.seed")? as u64,
    };
    let coupling_present = r.required("coupling_present")? == "true";

    let omega_count = r.required_usize("omega_count")?;
    let mut frequencies = Vec::with_capacity(omega_count);
    for i in 0..omega_count {
        frequencies.push(r.required_f64(&format!("omega.{i}"))?);
    }
    let ill_count = r.required_usize("illumination_count")?;
    let mut illuminations = Vec::with_capacity(ill_count);
    for i in 0..ill_count {
        illuminations.push(Illumination::parse(&r.required(&format!("illumination.{i}"))?)?);
    }

    let truth_data = VtkCellData::read(&dir.join("truth.vtk"))?;
    let mk = |name: &str| -> Result<RealCellField> {
        Ok(RealCellField { grid, data: truth_data.scalar(name)?.clone() })
    };
    let mu = mk("mu").unwrap_or_else(|_| RealCellField::constant(grid, mu_fallback));
    let truth = MaterialParams::new(grid, mu, mk("eps")?, mk("sigma")?, 1.0)?;
    let coupling_truth = if coupling_present { Some(mk("coupling")?) } else { None };

    let record_count = r.required_usize("record_count")?;
    let mut records = Vec::with_capacity(record_count);
    for rec in 0..record_count {
        let wi = r.required_usize(&format!("record.{rec}.omega_index"))?;
        let ii = r.required_usize(&format!("record.{rec}.illumination_index"))?;
        let file = r.required(&format!("record.{rec}.file"))?;
        let residual = r.required_f64(&format!("record.{rec}.residual"))?;
        let data = VtkCellData::read(&dir.join(&file))?;
        let h_cell = data.complex_vector("h", grid)?.with_kind(FieldKind::Magnetic);
        let d_cell = if coupling_present {
            Some(data.complex_vector("d", grid)?.with_kind(FieldKind::ElectroSeismic))
        } else {
            None
        };
        records.push(MeasurementRecord {
            omega: *frequencies.get(wi).ok_or_else(|| {
                Error::Parse(format!("record.{rec}: omega index {wi} out of range"))
            })?,
            illumination_id: illuminations
                .get(ii)
                .ok_or_else(|| {
                    Error::Parse(format!("record.{rec}: illumination index {ii} out of range"))
                })?
                .id
                .clone(),
            h_cell,
            d_cell,
            e_cell: None,
            solver_residual: residual,
        });
    }
    r.finish()?;

    Ok(SyntheticDataset {
        truth,
        set: MeasurementSet { frequencies, illuminations },
        records,
        noise,
        coupling_truth,
    })
}

pub fn save_scan(b: &mut ManifestBuilder, scan: &ScanResult) -> Result<()> {
    let grid = scan.grid;
    let mut w = KvWriter::new(SCAN_FORMAT);
    w.set("zeta", scan.zeta.name());
    w.set("grid.n", grid.n());
    w.set("grid.margin", grid.margin());
    w.set("depth", scan.depth);
    w.set("illumination_count", scan.illumination_ids.len());
    for (i, id) in scan.illumination_ids.iter().enumerate() {
        w.set(&format!("illumination.{i}"), id);
    }
    w.set("entry_count", scan.entries.len());
    for (i, cf) in scan.entries.iter().enumerate() {
        let file = format!("cond_w{i}.vtk");
        let mut data = VtkCellData::new(grid);
        for (l, arr) in cf.conditions.iter().enumerate() {
            data.push_real_scalar(&format!("cond{l}"), arr);
        }
        data.write(&b.dir().join(&file), "condition values")?;
        b.add(&file);
        w.set_f64(&format!("entry.{i}.omega"), cf.omega);
        w.set(&format!("entry.{i}.file"), &file);
        w.set(&format!("entry.{i}.conditions"), cf.conditions.len());
    }
    w.set("failure_count", scan.failures.len());
    for (i, (omega, what)) in scan.failures.iter().enumerate() {
        w.set_f64(&format!("failure.{i}.omega"), *omega);
        w.set(&format!("failure.{i}.error"), what);
    }
    b.write_text("scan.txt", &w.into_string())?;
    Ok(())
}

pub fn load_scan(dir: &Path, grid: Grid) -> Result<ScanResult> {
    let text = std::fs::read_to_string(dir.join("scan.txt"))?;
    let mut r = KvReader::parse(&text)?;
    let format = r.required("format")?;
    if format != SCAN_FORMAT {
        return Err(Error::Parse(format!("scan format '{format}'")));
    }
    let zeta = ZetaId::parse(&r.required("zeta")?)?;
    let n = r.required_usize("grid.n")?;
    let margin = r.required_usize("grid.margin")?;
    if n != grid.n() || margin != grid.margin() {
        return Err(Error::Parse("scan grid does not match config grid".into()));
    }
    let depth = r.required_usize("depth")?;
    let ill_count = r.required_usize("illumination_count")?;
    let mut illumination_ids = Vec::with_capacity(ill_count);
    for i in 0..ill_count {
        illumination_ids.push(r.required(&format!("illumination.{i}"))?);
    }
    let entry_count = r.required_usize("entry_count")?;
    let mut entries = Vec::with_capacity(entry_count);
    for i in 0..entry_count {
        let omega = r.required_f64(&format!("entry.{i}.omega"))?;
        let file = r.required(&format!("entry.{i}.file"))?;
        let cond_count = r.required_usize(&format!("entry.{i}.conditions"))?;
        let data = VtkCellData::read(&dir.join(&file))?;
        let mut conditions = Vec::with_capacity(cond_count);
        for l in 0..cond_count {
            conditions.push(data.scalar(&format!("cond{l}"))?.clone());
        }
        entries.push(ConditionField {
            grid,
            depth,
            conditions,
            omega,
            illumination_ids: illumination_ids.clone(),
        });
    }
    let failure_count = r.required_usize("failure_count")?;
    let mut failures = Vec::with_capacity(failure_count);
    for i in 0..failure_count {
        failures.push((
            r.required_f64(&format!("failure.{i}.omega"))?,
            r.required(&format!("failure.{i}.error"))?,
        ));
    }
    r.finish()?;
    Ok(ScanResult { grid, zeta, depth, illumination_ids, entries, failures })
}

pub fn save_cover(b: &mut ManifestBuilder, cover: &CoverReport) -> Result<()> {
    let grid = cover.grid;
    let mut w = KvWriter::new(COVER_FORMAT);
    w.set("zeta", cover.zeta.name());
    w.set("grid.n", grid.n());
    w.set("grid.margin", grid.margin());
    w.set("depth", cover.depth);
    w.set_f64("s", cover.s);
    w.set_f64("coverage_fraction", cover.coverage_fraction);
    w.set("illumination_count", cover.illumination_ids.len());
    for (i, id) in cover.illumination_ids.iter().enumerate() {
        w.set(&format!("illumination.{i}"), id);
    }
    w.set("selected_count", cover.selected.len());
    for (i, omega) in cover.selected.iter().enumerate() {
        let file = format!("mask_w{i}.vtk");
        let mut data = VtkCellData::new(grid);
        data.push_mask("mask", &cover.masks[i]);
        data.push_real_scalar(
            "component",
            &cover.component_labels[i].mapv(|v| v as f64),
        );
        data.write(&b.dir().join(&file), "cover subdomain")?;
        b.add(&file);
        w.set_f64(&format!("selected.{i}"), *omega);
        w.set(&format!("selected.{i}.file"), &file);
        w.set(&format!("selected.{i}.components"), cover.component_counts[i]);
    }
    w.set("warning_count", cover.warnings.len());
    for (i, warn) in cover.warnings.iter().enumerate() {
        w.set(&format!("warning.{i}"), warn);
    }
    b.write_text("cover.txt", &w.into_string())?;
    Ok(())
}

pub fn load_cover(dir: &Path, grid: Grid) -> Result<CoverReport> {
    let text = std::fs::read_to_string(dir.join("cover.txt"))?;
    let mut r = KvReader::parse(&text)?;
    let format = r.required("format")?;
    if format != COVER_FORMAT {
        return Err(Error::Parse(format!("cover format '{format}'")));
    }
    let zeta = ZetaId::parse(&r.required("zeta")?)?;
    let n = r.required_usize("grid.n")?;
    let margin = r.required_usize("grid.margin")?;
    if n != grid.n() || margin != grid.margin() {
        return Err(Error::Parse("cover grid does not match config grid".into()));
    }
    let depth = r.required_usize("depth")?;
    let s = r.required_f64("s")?;
    let coverage_fraction = r.required_f64("coverage_fraction")?;
    let ill_count = r.required_usize("illumination_count")?;
    let mut illumination_ids = Vec::with_capacity(ill_count);
    for i in 0..ill_count {
        illumination_ids.push(r.required(&format!("illumination.{i}"))?);
    }
    let count = r.required_usize("selected_count")?;
    let mut selected = Vec::with_capacity(count);
    let mut masks = Vec::with_capacity(count);
    let mut component_labels = Vec::with_capacity(count);
    let mut component_counts = Vec::with_capacity(count);
    for i in 0..count {
        selected.push(r.required_f64(&format!("selected.{i}"))?);
        let file = r.required(&format!("selected.{i}.file"))?;
        let declared = r.required_usize(&format!("selected.{i}.components"))?;
        let data = VtkCellData::read(&dir.join(&file))?;
        let mask = data.mask("mask")?;
        let (labels, found) = components(&mask);
        if found != declared {
            return Err(Error::Parse(format!(
                "cover mask {i}: component count {found} does not match declared {declared}"
            )));
        }
        masks.push(mask);
        component_labels.push(labels);
        component_counts.push(found);
    }
    let warning_count = r.required_usize("warning_count")?;
    let mut warnings = Vec::with_capacity(warning_count);
    for i in 0..warning_count {
        warnings.push(r.required(&format!("warning.{i}"))?);
    }
    r.finish()?;
    Ok(CoverReport {
        grid,
        zeta,
        depth,
        illumination_ids,
        selected,
        s,
        masks,
        component_labels,
        component_counts,
        coverage_fraction,
        warnings,
    })
}

/// Serialize a reconstruction: recovered fields + validity masks as VTK,
/// metrics and diagnostics as text.
pub fn save_reconstruction(
    b: &mut ManifestBuilder,
    report: &ReconstructionReport,
    method: &str,
) -> Result<()> {
    let grid = report.grid;
    let mut data = VtkCellData::new(grid);
    data.push_real_scalar("eps", &report.eps);
    data.push_real_scalar("sigma", &report.sigma);
    data.push_mask("recovered", &report.recovered);
    if let Some(l) = &report.coupling {
        data.push_real_scalar("coupling", l);
    }
    if let Some(lmask) = &report.coupling_recovered {
        data.push_mask("coupling_recovered", lmask);
    }
    data.push_real_scalar("frequency_used", &report.frequency_used);
    data.push_real_scalar("visit_order", &report.visit_order.mapv(|v| v as f64));
    data.write(&b.dir().join("recovered.vtk"), "recovered coefficients")?;
    b.add("recovered.vtk");

    let mut w = KvWriter::new(REPORT_FORMAT);
    w.set("method", method);
    w.set("grid.n", grid.n());
    w.set("unrecovered_cells", report.unrecovered_cells);
    w.set("divergent_cells", report.divergent_cells.len());
    if let Some((de, ds)) = report.reference_mismatch {
        w.set_f64("reference_mismatch.eps", de);
        w.set_f64("reference_mismatch.sigma", ds);
    }
    if let Some(m) = &report.metrics {
        w.set("metrics.cells_compared", m.cells_compared);
        w.set_f64("metrics.linf_rel_eps", m.linf_rel_eps);
        w.set_f64("metrics.linf_rel_sigma", m.linf_rel_sigma);
        if let Some(lc) = m.linf_rel_coupling {
            w.set_f64("metrics.linf_rel_coupling", lc);
        }
    }
    b.write_text("report.txt", &w.into_string())?;
    Ok(())
}
