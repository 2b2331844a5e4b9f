//! Run configuration file.
//!
//! TOML with `[particle]`, `[crystal]`, `[ensemble]`, `[entry]`, `[output]`
//! and `[oracle]` sections. Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleConfig;
use crate::model::{self, ChargeSign, CrystalChannel, EntryConditions, ParticleSpec};
use crate::spin::InitialSpin;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParticleSection {
    /// m c^2, eV
    pub rest_energy: f64,
    pub charge: ChargeSign,
    pub g_factor: f64,
    pub gamma: f64,
}

impl Default for ParticleSection {
    fn default() -> Self {
        ParticleSection {
            rest_energy: model::ANTIPROTON_REST_ENERGY,
            charge: ChargeSign::Negative,
            g_factor: model::DEFAULT_G_FACTOR,
            gamma: model::DEFAULT_GAMMA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalSection {
    /// eV
    pub v0: f64,
    pub b: f64,
    pub spacing: f64,
    pub bend_radius: f64,
    pub radiation_length: f64,
}

impl Default for CrystalSection {
    fn default() -> Self {
        CrystalSection {
            v0: model::W100_V0,
            b: model::W100_WIDTH,
            spacing: model::W100_SPACING,
            bend_radius: 1.0,
            radiation_length: model::W_RADIATION_LENGTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    /// Mean entry angles in units of theta_L, one output file each.
    pub theta_fracs: Vec<f64>,
    /// sigma_theta as a fraction of the mean angle.
    pub sigma_theta_frac: f64,
    /// sigma_gamma as a fraction of gamma.
    pub sigma_gamma_frac: f64,
    pub n_points: usize,
    pub seed: u64,
    pub depth_max: f64,
    pub n_depth_samples: usize,
    pub omega_scale: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            theta_fracs: vec![0.25, 0.5, 0.75],
            sigma_theta_frac: 0.05,
            sigma_gamma_frac: 0.05,
            n_points: 200,
            seed: 1,
            depth_max: 0.01,
            n_depth_samples: 2000,
            omega_scale: 1.0e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntrySection {
    pub x0: f64,
    pub theta_frac: f64,
    pub zeta_z0: f64,
    pub initial: InitialSpin,
}

impl Default for EntrySection {
    fn default() -> Self {
        EntrySection {
            x0: 0.45e-10,
            theta_frac: 0.25,
            zeta_z0: 0.0,
            initial: InitialSpin::Perpendicular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub emit_svg: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            emit_svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub entries: usize,
    pub seed: u64,
    pub depth: f64,
    pub steps_per_tau: usize,
    pub samples: usize,
    pub tolerance: f64,
    /// Multiplies C in the closed form. Only for exercising the failure path.
    pub c_corruption: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            entries: 10,
            seed: 1,
            depth: 1.0e-3,
            steps_per_tau: 1000,
            samples: 2001,
            tolerance: 1.0e-6,
            c_corruption: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub particle: ParticleSection,
    pub crystal: CrystalSection,
    pub ensemble: EnsembleSection,
    pub entry: EntrySection,
    pub output: OutputSection,
    pub oracle: OracleSection,
}

impl RunConfig {
    pub fn particle(&self) -> ParticleSpec {
        ParticleSpec {
            rest_energy: self.particle.rest_energy,
            charge_sign: self.particle.charge,
            g_factor: self.particle.g_factor,
            gamma: self.particle.gamma,
        }
    }

    pub fn channel(&self) -> CrystalChannel {
        CrystalChannel {
            v0: self.crystal.v0,
            b: self.crystal.b,
            spacing: self.crystal.spacing,
            bend_radius: self.crystal.bend_radius,
            radiation_length: self.crystal.radiation_length,
        }
    }

    pub fn lindhard_angle(&self) -> f64 {
        model::lindhard_angle(&self.particle(), &self.channel())
    }

    pub fn entry(&self) -> EntryConditions {
        EntryConditions::new(self.entry.x0, self.entry.theta_frac * self.lindhard_angle())
    }

    /// Ensemble settings for one mean angle given as a fraction of theta_L.
    pub fn ensemble_for(&self, theta_frac: f64) -> EnsembleConfig {
        let e = &self.ensemble;
        let theta_mean = theta_frac * self.lindhard_angle();
        EnsembleConfig {
            n_points: e.n_points,
            theta_mean,
            gamma_mean: self.particle.gamma,
            sigma_theta: e.sigma_theta_frac * theta_mean.abs(),
            sigma_gamma: e.sigma_gamma_frac * self.particle.gamma,
            seed: e.seed,
            depth_max: e.depth_max,
            n_depth_samples: e.n_depth_samples,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let particle = self.particle();
        let channel = self.channel();
        particle.validate()?;
        channel.validate()?;
        self.entry().validate(&channel)?;
        if !(self.entry.zeta_z0.abs() <= 1.0) {
            return Err(CliError::Validation("|zeta_z0| <= 1".into()));
        }
        if self.ensemble.theta_fracs.is_empty() {
            return Err(CliError::Validation("theta_fracs must not be empty".into()));
        }
        if !(self.ensemble.sigma_theta_frac >= 0.0 && self.ensemble.sigma_gamma_frac >= 0.0) {
            return Err(CliError::Validation("sigma values >= 0".into()));
        }
        if !(self.ensemble.omega_scale > 0.0 && self.ensemble.omega_scale.is_finite()) {
            return Err(CliError::Validation("omega_scale > 0".into()));
        }
        for &f in &self.ensemble.theta_fracs {
            self.ensemble_for(f).validate()?;
        }
        let o = &self.oracle;
        if o.entries < 1 {
            return Err(CliError::Validation("oracle entries >= 1".into()));
        }
        if !(o.depth > 0.0 && o.depth.is_finite()) {
            return Err(CliError::Validation("oracle depth > 0".into()));
        }
        if o.steps_per_tau < 100 {
            return Err(CliError::Validation("steps_per_tau >= 100".into()));
        }
        if o.samples < 2 {
            return Err(CliError::Validation("oracle samples >= 2".into()));
        }
        if !(o.tolerance > 0.0) {
            return Err(CliError::Validation("tolerance > 0".into()));
        }
        if !o.c_corruption.is_finite() {
            return Err(CliError::Validation("c_corruption must be finite".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are all representable in TOML")
    }
}

/// 1-based line of a byte offset in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    let end = offset.min(text.len());
    text.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Parse and validate configuration text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}
