//! mfmax: forward solves, frequency-set certification and internal-data
//! reconstruction for the multi-frequency Maxwell workbench.

mod artifacts;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mfmax_core::error::{Error, Result};
use mfmax_core::forward::synth::{synthesize_measurements, MeasurementSet, SynthOptions};
use mfmax_core::frequency::{scan, select_cover, CoverPolicy, ScanOptions};
use mfmax_core::io::kv::KvWriter;
use mfmax_core::reconstruct::method1::MagneticOptions;
use mfmax_core::reconstruct::{
    electroseismic_pipeline, integrate_method1, integrate_method2, EsOptions, SeedValue,
};
use mfmax_core::verify;

use config::{ExperimentConfig, Method};
use manifest::{Manifest, ManifestBuilder};

#[derive(Parser)]
#[command(
    name = "mfmax",
    version,
    about = "Multi-frequency Maxwell workbench: synthesize internal data, certify frequency covers, reconstruct coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problems and write the synthetic dataset.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Restrict frequencies to a previously selected cover.
        #[arg(long)]
        cover: Option<PathBuf>,
    },
    /// Sweep the admissible frequency range and evaluate the conditions.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select a certified frequency cover from a scan.
    Select {
        #[arg(long)]
        config: PathBuf,
        /// Directory written by `scan`.
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Stop once this threshold is certified.
        #[arg(long)]
        target_s: Option<f64>,
        /// Frequency budget.
        #[arg(long)]
        max_k: Option<usize>,
    },
    /// Run the configured reconstruction on a dataset and cover.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        /// Directory written by `synthesize`.
        #[arg(long)]
        data: PathBuf,
        /// Directory written by `select`.
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in verification suite (calculus | mms | identities |
    /// rank | all).
    Verify {
        #[arg(long)]
        suite: String,
        /// Write the machine-readable results here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Synthesize { config, out, cover } => {
            cmd_synthesize(&config, &out, cover.as_deref())
        }
        Command::Scan { config, out } => cmd_scan(&config, &out),
        Command::Select { config, scan, out, target_s, max_k } => {
            cmd_select(&config, &scan, &out, target_s, max_k)
        }
        Command::Reconstruct { config, data, cover, out } => {
            cmd_reconstruct(&config, &data, &cover, &out)
        }
        Command::Verify { suite, out } => cmd_verify(&suite, out.as_deref()),
    }
}

fn cmd_synthesize(
    config_path: &std::path::Path,
    out: &std::path::Path,
    cover_dir: Option<&std::path::Path>,
) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    let params = cfg.material.sample(cfg.grid)?;

    let frequencies = match cover_dir {
        Some(dir) => {
            let m = Manifest::load(dir)?;
            m.expect_kind("cover")?;
            m.expect_config(&cfg.sha256)?;
            m.verify_files(dir)?;
            artifacts::load_cover(dir, cfg.grid)?.selected
        }
        None => cfg.freq.samples(),
    };
    let set = MeasurementSet::new(frequencies, cfg.illuminations.clone())?;

    let options = SynthOptions {
        noise: cfg.noise,
        coupling: cfg.coupling_field(),
        keep_e: false,
        ..Default::default()
    };
    let ds = synthesize_measurements(&params, &set, &options)?;

    let mut b = ManifestBuilder::new(out, "dataset", &cfg.sha256)?;
    artifacts::save_dataset(&mut b, &ds)?;
    let manifest = b.finish()?;
    println!(
        "synthesize: {} records, {} artifacts, {} ms",
        ds.records.len(),
        manifest.artifacts.len(),
        manifest.elapsed_ms
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan(config_path: &std::path::Path, out: &std::path::Path) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    let params = cfg.material.sample(cfg.grid)?;
    let result = scan(&params, &cfg.illuminations, cfg.zeta, &cfg.freq, &ScanOptions::default())?;
    for (omega, what) in &result.failures {
        eprintln!("scan: omega = {omega} excluded: {what}");
    }
    let mut b = ManifestBuilder::new(out, "scan", &cfg.sha256)?;
    artifacts::save_scan(&mut b, &result)?;
    let manifest = b.finish()?;
    println!(
        "scan: {} frequencies evaluated ({} failed), {} ms",
        result.entries.len(),
        result.failures.len(),
        manifest.elapsed_ms
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_select(
    config_path: &std::path::Path,
    scan_dir: &std::path::Path,
    out: &std::path::Path,
    target_s: Option<f64>,
    max_k: Option<usize>,
) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    let m = Manifest::load(scan_dir)?;
    m.expect_kind("scan")?;
    m.expect_config(&cfg.sha256)?;
    m.verify_files(scan_dir)?;
    let scan_result = artifacts::load_scan(scan_dir, cfg.grid)?;
    let cover = select_cover(&scan_result, &CoverPolicy { target_s, max_k })?;
    for w in &cover.warnings {
        eprintln!("select: note: {w}");
    }
    let mut b = ManifestBuilder::new(out, "cover", &cfg.sha256)?;
    artifacts::save_cover(&mut b, &cover)?;
    let manifest = b.finish()?;
    println!(
        "select: |K| = {}, s = {:.6e}, coverage = {}, {} ms",
        cover.selected.len(),
        cover.s,
        cover.coverage_fraction,
        manifest.elapsed_ms
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_reconstruct(
    config_path: &std::path::Path,
    data_dir: &std::path::Path,
    cover_dir: &std::path::Path,
    out: &std::path::Path,
) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config_path)?;
    let method = cfg.method.ok_or_else(|| {
        Error::InvalidArgument("config has no 'method' entry; reconstruct needs one".into())
    })?;
    let seed_cfg = cfg
        .seed
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("config has no 'seed.cell'".into()))?;

    for (dir, kind) in [(data_dir, "dataset"), (cover_dir, "cover")] {
        let m = Manifest::load(dir)?;
        m.expect_kind(kind)?;
        m.expect_config(&cfg.sha256)?;
        m.verify_files(dir)?;
    }
    let ds = artifacts::load_dataset(data_dir, cfg.grid, cfg.material.mu0)?;
    let cover = artifacts::load_cover(cover_dir, cfg.grid)?;

    let report = match method {
        Method::Method1 | Method::Method2 => {
            let (eps, sigma) = match (seed_cfg.eps, seed_cfg.sigma) {
                (Some(e), Some(s)) => (e, s),
                _ => {
                    return Err(Error::InvalidArgument(
                        "magnetic methods need seed.eps and seed.sigma".into(),
                    ))
                }
            };
            let seed = SeedValue::eps_sigma(seed_cfg.cell, eps, sigma);
            let options = MagneticOptions::default();
            if method == Method::Method1 {
                integrate_method1(&ds, &cover, &seed, &options)?
            } else {
                integrate_method2(&ds, &cover, &seed, &options)?
            }
        }
        Method::ElectroSeismic => {
            let l0 = seed_cfg
                .coupling
                .ok_or_else(|| Error::InvalidArgument("electroseismic needs seed.l".into()))?;
            let seed = SeedValue::coupling(seed_cfg.cell, l0);
            let options = EsOptions { reference: cfg.reference, ..Default::default() };
            electroseismic_pipeline(&ds, &cover, &seed, &options)?
        }
    };

    let mut b = ManifestBuilder::new(out, "reconstruction", &cfg.sha256)?;
    artifacts::save_reconstruction(&mut b, &report, method.name())?;
    let manifest = b.finish()?;
    if let Some(m) = &report.metrics {
        println!(
            "reconstruct: {} cells, linf eps {:.3e}, linf sigma {:.3e}{}",
            m.cells_compared,
            m.linf_rel_eps,
            m.linf_rel_sigma,
            m.linf_rel_coupling
                .map(|l| format!(", linf coupling {l:.3e}"))
                .unwrap_or_default()
        );
    }
    println!(
        "reconstruct: {} unrecovered cells, {} ms",
        report.unrecovered_cells, manifest.elapsed_ms
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: &str, out: Option<&std::path::Path>) -> Result<ExitCode> {
    let results = verify::run_suite(suite)?;
    let mut all_passed = true;
    let mut w = KvWriter::new("mfmax-verify-v1");
    w.set("suite", suite);
    w.set("check_count", results.len());
    for (i, c) in results.iter().enumerate() {
        let status = if c.passed { "pass" } else { "fail" };
        println!("{} = {:.6e} ({}) {status}", c.name, c.value, c.gate);
        w.set(&format!("check.{i}.name"), &c.name);
        w.set_f64(&format!("check.{i}.value"), c.value);
        w.set(&format!("check.{i}.gate"), &c.gate);
        w.set(&format!("check.{i}.passed"), c.passed);
        all_passed &= c.passed;
    }
    w.set("all_passed", all_passed);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("verify_{suite}.txt")), w.into_string())?;
    }
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
