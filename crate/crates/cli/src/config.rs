//! Experiment configuration: flat key-value text, strictly parsed.
//!
//! Unknown keys are rejected by name; referential integrity (illumination
//! arity vs the condition family, seed cell in range) is checked here.

use mfmax_core::error::{Error, Result};
use mfmax_core::frequency::FrequencyGrid;
use mfmax_core::functionals::ZetaId;
use mfmax_core::illum::Illumination;
use mfmax_core::io::kv::KvReader;
use mfmax_core::io::sha256_hex;
use mfmax_core::material::{Bump, CoefficientId, MaterialSpec};
use mfmax_core::forward::synth::NoiseDescriptor;
use mfmax_core::{Grid, RealCellField};

pub const CONFIG_FORMAT: &str = "mfmax-config-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Method1,
    Method2,
    ElectroSeismic,
}

impl Method {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "method1" => Ok(Self::Method1),
            "method2" => Ok(Self::Method2),
            "electroseismic" => Ok(Self::ElectroSeismic),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Method1 => "method1",
            Self::Method2 => "method2",
            Self::ElectroSeismic => "electroseismic",
        }
    }

    pub fn zeta(&self) -> ZetaId {
        match self {
            Self::Method1 => ZetaId::Zeta1,
            Self::Method2 => ZetaId::Zeta2,
            Self::ElectroSeismic => ZetaId::Zeta3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeedConfig {
    pub cell: (usize, usize, usize),
    pub eps: Option<f64>,
    pub sigma: Option<f64>,
    pub coupling: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// SHA-256 of the raw config bytes; links artifacts together.
    pub sha256: String,
    pub grid: Grid,
    pub material: MaterialSpec,
    /// Base value of the electro-seismic coupling field, when synthesized.
    pub coupling_base: Option<f64>,
    pub freq: FrequencyGrid,
    pub zeta: ZetaId,
    pub illuminations: Vec<Illumination>,
    pub noise: NoiseDescriptor,
    pub method: Option<Method>,
    pub seed: Option<SeedConfig>,
    pub reference: Option<((usize, usize, usize), f64, f64)>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let sha256 = sha256_hex(text.as_bytes());
        let mut r = KvReader::parse(text)?;
        let format = r.required("format")?;
        if format != CONFIG_FORMAT {
            return Err(Error::Parse(format!(
                "config format '{format}' is not '{CONFIG_FORMAT}'"
            )));
        }

        let n = r.required_usize("grid.n")?;
        let margin = r.optional_usize("grid.margin")?.unwrap_or(2);
        let grid = Grid::new(n, margin)?;

        let mu0 = r.required_f64("material.mu")?;
        let eps0 = r.required_f64("material.eps")?;
        let sigma0 = r.required_f64("material.sigma")?;
        let sigma_ref = r.optional_f64("material.sigma_ref")?.unwrap_or(sigma0);

        let mut bumps = Vec::new();
        let bump_count = r.count_indexed("bump", "coefficient");
        for i in 0..bump_count {
            let coeff = CoefficientId::parse(&r.required(&format!("bump.{i}.coefficient"))?)?;
            let center = r.required_triple_f64(&format!("bump.{i}.center"))?;
            let width = r.required_f64(&format!("bump.{i}.width"))?;
            let amplitude = r.required_f64(&format!("bump.{i}.amplitude"))?;
            if width <= 0.0 {
                return Err(Error::Parse(format!("bump.{i}.width must be positive")));
            }
            bumps.push((coeff, Bump { center, width, amplitude }));
        }
        let material = MaterialSpec { mu0, eps0, sigma0, sigma_ref, bumps };

        let coupling_base = r.optional_f64("coupling.base")?;
        if let Some(l) = coupling_base {
            if l <= 0.0 {
                return Err(Error::Parse("coupling.base must be positive".into()));
            }
        }

        let freq = FrequencyGrid::new(
            r.required_f64("freq.k_min")?,
            r.required_f64("freq.k_max")?,
            r.required_usize("freq.samples")?,
        )?;

        let zeta = ZetaId::parse(&r.required("zeta")?)?;
        let illum_list = r.required("illuminations")?;
        let illuminations: Vec<Illumination> = illum_list
            .split(',')
            .map(|s| Illumination::parse(s.trim()))
            .collect::<Result<_>>()?;
        if illuminations.len() != zeta.descriptor().b {
            return Err(Error::Parse(format!(
                "illuminations: {} needs {} entries, got {}",
                zeta.name(),
                zeta.descriptor().b,
                illuminations.len()
            )));
        }

        let noise = NoiseDescriptor {
            level: r.optional_f64("noise.level")?.unwrap_or(0.0),
            seed: r.optional_usize("noise.seed")?.unwrap_or(0) as u64,
        };

        let method = match r.optional("method") {
            Some(m) => Some(Method::parse(&m)?),
            None => None,
        };
        if let Some(m) = method {
            if m.zeta() != zeta {
                return Err(Error::Parse(format!(
                    "method: {} requires zeta = {}, config has {}",
                    m.name(),
                    m.zeta().name(),
                    zeta.name()
                )));
            }
        }

        let seed = match r.optional("seed.cell") {
            None => None,
            Some(cell_text) => {
                let parts: Vec<usize> = cell_text
                    .split_whitespace()
                    .map(|t| {
                        t.parse().map_err(|_| {
                            Error::Parse(format!("seed.cell: bad index '{t}'"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if parts.len() != 3 {
                    return Err(Error::Parse("seed.cell needs 3 indices".into()));
                }
                let cell = (parts[0], parts[1], parts[2]);
                if cell.0 >= n || cell.1 >= n || cell.2 >= n {
                    return Err(Error::Parse(format!(
                        "seed.cell: ({}, {}, {}) outside an n = {n} grid",
                        cell.0, cell.1, cell.2
                    )));
                }
                Some(SeedConfig {
                    cell,
                    eps: r.optional_f64("seed.eps")?,
                    sigma: r.optional_f64("seed.sigma")?,
                    coupling: r.optional_f64("seed.l")?,
                })
            }
        };

        let reference = match r.optional("reference.cell") {
            None => None,
            Some(cell_text) => {
                let parts: Vec<usize> = cell_text
                    .split_whitespace()
                    .map(|t| {
                        t.parse().map_err(|_| {
                            Error::Parse(format!("reference.cell: bad index '{t}'"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if parts.len() != 3 || parts.iter().any(|&p| p >= n) {
                    return Err(Error::Parse("reference.cell out of range".into()));
                }
                Some((
                    (parts[0], parts[1], parts[2]),
                    r.required_f64("reference.eps")?,
                    r.required_f64("reference.sigma")?,
                ))
            }
        };

        r.finish()?;
        Ok(Self {
            sha256,
            grid,
            material,
            coupling_base,
            freq,
            zeta,
            illuminations,
            noise,
            method,
            seed,
            reference,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The electro-seismic coupling field, when configured.
    pub fn coupling_field(&self) -> Option<RealCellField> {
        let base = self.coupling_base?;
        let bumps: Vec<Bump> = self
            .material
            .bumps
            .iter()
            .filter(|(id, _)| *id == CoefficientId::Coupling)
            .map(|(_, b)| b.clone())
            .collect();
        Some(RealCellField::from_fn(self.grid, move |x| {
            base + bumps.iter().map(|b| b.eval(x)).sum::<f64>()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> String {
        "format = mfmax-config-v1\n\
         grid.n = 16\n\
         material.mu = 1.0\n\
         material.eps = 1.0\n\
         material.sigma = 1.0\n\
         bump.0.coefficient = sigma\n\
         bump.0.center = 0.5 0.5 0.5\n\
         bump.0.width = 0.2\n\
         bump.0.amplitude = 0.1\n\
         freq.k_min = 0.5\n\
         freq.k_max = 2.0\n\
         freq.samples = 8\n\
         zeta = zeta1\n\
         illuminations = e1, e2, e3\n"
            .to_string()
    }

    #[test]
    fn parses_the_reference_experiment() {
        let cfg = ExperimentConfig::parse(&base_config()).unwrap();
        assert_eq!(cfg.grid.n(), 16);
        assert_eq!(cfg.illuminations.len(), 3);
        assert_eq!(cfg.material.bumps.len(), 1);
        assert_eq!(cfg.freq.samples().len(), 8);
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let text = base_config() + "mystery.knob = 3\n";
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("mystery.knob"), "{err}");
    }

    #[test]
    fn arity_mismatch_names_the_field() {
        let text = base_config().replace("illuminations = e1, e2, e3", "illuminations = e1, e2");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("illuminations"), "{err}");
        let text = base_config().replace(
            "illuminations = e1, e2, e3",
            "illuminations = e1, e2, e3, grad:x1*x2",
        );
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn seed_cell_must_be_in_range() {
        let text = base_config() + "seed.cell = 16 0 0\nseed.eps = 1\nseed.sigma = 1\n";
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn method_zeta_consistency() {
        let text = base_config() + "method = method2\n";
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("zeta"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = ExperimentConfig::parse(&base_config()).unwrap();
        let b = ExperimentConfig::parse(&base_config()).unwrap();
        assert_eq!(a.sha256, b.sha256);
        let c = ExperimentConfig::parse(&base_config().replace("0.1", "0.2")).unwrap();
        assert_ne!(a.sha256, c.sha256);
    }
}
