//! Averaging over entry points and beam divergence.
//!
//! Entries are drawn sequentially from one seeded stream in grid order, then
//! evaluated in parallel over depth. Every depth sums its entries in index
//! order, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{self, CrystalChannel, EntryConditions, ParticleSpec};
use crate::spin::{self, PhaseParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_points: usize,
    pub theta_mean: f64,
    pub gamma_mean: f64,
    pub sigma_theta: f64,
    pub sigma_gamma: f64,
    pub seed: u64,
    pub depth_max: f64,
    pub n_depth_samples: usize,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 1 {
            return Err(Error::invalid("n_points >= 1"));
        }
        if !(self.sigma_theta >= 0.0 && self.sigma_gamma >= 0.0) {
            return Err(Error::invalid("sigma values >= 0"));
        }
        if !(self.depth_max > 0.0 && self.depth_max.is_finite()) {
            return Err(Error::invalid("depth_max > 0"));
        }
        if self.n_depth_samples < 2 {
            return Err(Error::invalid("n_depth_samples >= 2"));
        }
        if !(self.gamma_mean > 1.0 && self.gamma_mean.is_finite()) {
            return Err(Error::invalid("gamma > 1"));
        }
        if !self.theta_mean.is_finite() {
            return Err(Error::invalid("theta_mean must be finite"));
        }
        Ok(())
    }

    /// Uniform depth grid including 0 and `depth_max`.
    pub fn depths(&self) -> Vec<f64> {
        let last = (self.n_depth_samples - 1) as f64;
        (0..self.n_depth_samples)
            .map(|i| self.depth_max * i as f64 / last)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrystalMode {
    Bent,
    Straight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divergence {
    Off,
    On,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthScan {
    pub depths: Vec<f64>,
    pub avg_zeta_x: Vec<f64>,
    pub avg_zeta_y: Vec<f64>,
    pub avg_phi: Vec<f64>,
    pub n_channeled: usize,
    pub n_rejected: usize,
}

/// N points spaced by spacing/N, centred on the channel midline.
pub fn entry_grid(cfg: &EnsembleConfig, channel: &CrystalChannel) -> Vec<f64> {
    let n = cfg.n_points as f64;
    (0..cfg.n_points)
        .map(|i| -channel.spacing / 2.0 + (i as f64 + 0.5) * channel.spacing / n)
        .collect()
}

/// Normal variate with the given mean and standard deviation.
///
/// One standard normal is always drawn so that the stream position does not
/// depend on `sigma`; `sigma = 0` returns `mean` exactly.
pub fn gaussian_sample<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    if sigma == 0.0 {
        mean
    } else {
        mean + sigma * z
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntrySample {
    pub x0: f64,
    pub theta: f64,
    pub gamma: f64,
}

/// Entry point, angle and gamma for every grid point, in grid order.
pub fn draw_entries(cfg: &EnsembleConfig, channel: &CrystalChannel, divergence: Divergence) -> Vec<EntrySample> {
    let mut rng = seeded_rng(cfg.seed);
    entry_grid(cfg, channel)
        .into_iter()
        .map(|x0| match divergence {
            Divergence::Off => EntrySample {
                x0,
                theta: cfg.theta_mean,
                gamma: cfg.gamma_mean,
            },
            Divergence::On => {
                let theta = gaussian_sample(cfg.theta_mean, cfg.sigma_theta, &mut rng);
                let gamma = gaussian_sample(cfg.gamma_mean, cfg.sigma_gamma, &mut rng);
                EntrySample { x0, theta, gamma }
            }
        })
        .collect()
}

/// A channeled entry ready for repeated evaluation.
#[derive(Debug, Clone, Copy)]
struct Member {
    params: PhaseParams,
    reference: f64,
    /// beta c, m/s
    speed: f64,
}

impl Member {
    fn angle(&self, depth: f64, mode: CrystalMode) -> f64 {
        let t = depth / self.speed;
        let psi = spin::psi_with_reference(t, &self.params, self.reference);
        match mode {
            CrystalMode::Bent => self.params.orbit.omega * t + psi,
            CrystalMode::Straight => psi,
        }
    }
}

fn prepare(
    entries: &[EntrySample],
    particle: &ParticleSpec,
    channel: &CrystalChannel,
    omega_scale: f64,
) -> (Vec<Member>, usize) {
    let mut members = Vec::with_capacity(entries.len());
    let mut rejected = 0;
    for e in entries {
        let p = particle.with_gamma(e.gamma);
        if p.validate().is_err() {
            rejected += 1;
            continue;
        }
        let orbit = match model::orbit_params(&EntryConditions::new(e.x0, e.theta), &p, channel) {
            Ok(o) => o.with_omega_scale(omega_scale),
            Err(_) => {
                rejected += 1;
                continue;
            }
        };
        let params = PhaseParams::new(&orbit, &p, channel);
        members.push(Member {
            params,
            reference: params.reference_phase(),
            speed: p.beta() * model::SPEED_OF_LIGHT,
        });
    }
    (members, rejected)
}

/// Mean (zeta_x, zeta_y) over members at each depth, perpendicular start.
fn average_at(members: &[Member], depths: &[f64], mode: CrystalMode) -> (Vec<f64>, Vec<f64>) {
    let n = members.len() as f64;
    depths
        .par_iter()
        .map(|&depth| {
            let (mut sx, mut sy) = (0.0, 0.0);
            for m in members {
                let (s, c) = m.angle(depth, mode).sin_cos();
                sx += s;
                sy += c;
            }
            (sx / n, sy / n)
        })
        .unzip()
}

fn angles(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| spin::rotation_angle(y, x))
        .collect()
}

fn warn_if_beyond_dechanneling(cfg: &EnsembleConfig, particle: &ParticleSpec, channel: &CrystalChannel) {
    let ld = model::dechanneling_length(&particle.with_gamma(cfg.gamma_mean), channel);
    if cfg.depth_max > 0.1 * ld {
        log::warn!(
            "depth_max = {:e} m exceeds 0.1 of the dechanneling length {:e} m",
            cfg.depth_max,
            ld
        );
    }
}

fn check_inputs(cfg: &EnsembleConfig, particle: &ParticleSpec, channel: &CrystalChannel) -> Result<()> {
    cfg.validate()?;
    particle.validate()?;
    channel.validate()?;
    warn_if_beyond_dechanneling(cfg, particle, channel);
    Ok(())
}

fn build_scan(cfg: &EnsembleConfig, members: &[Member], rejected: usize, mode: CrystalMode) -> Result<DepthScan> {
    if members.is_empty() {
        return Err(Error::AllRejected { n_points: cfg.n_points });
    }
    let depths = cfg.depths();
    let (avg_zeta_x, avg_zeta_y) = average_at(members, &depths, mode);
    let avg_phi = angles(&avg_zeta_x, &avg_zeta_y)?;
    Ok(DepthScan {
        depths,
        avg_zeta_x,
        avg_zeta_y,
        avg_phi,
        n_channeled: members.len(),
        n_rejected: rejected,
    })
}

/// Averaged Cartesian polarization over the entry grid.
pub fn average_components(
    cfg: &EnsembleConfig,
    particle: &ParticleSpec,
    channel: &CrystalChannel,
    mode: CrystalMode,
    divergence: Divergence,
) -> Result<DepthScan> {
    scaled_omega_scan(cfg, particle, channel, mode, divergence, 1.0)
}

/// As [`average_components`] with Omega multiplied by `omega_scale` in the
/// azimuth, Lambda, C and Phi.
pub fn scaled_omega_scan(
    cfg: &EnsembleConfig,
    particle: &ParticleSpec,
    channel: &CrystalChannel,
    mode: CrystalMode,
    divergence: Divergence,
    omega_scale: f64,
) -> Result<DepthScan> {
    if !(omega_scale > 0.0 && omega_scale.is_finite()) {
        return Err(Error::invalid("omega_scale > 0"));
    }
    check_inputs(cfg, particle, channel)?;
    let entries = draw_entries(cfg, channel, divergence);
    let (members, rejected) = prepare(&entries, particle, channel, omega_scale);
    build_scan(cfg, &members, rejected, mode)
}

/// arcsin(<zeta_y> / |<zeta>|) at every depth of a scan.
pub fn averaged_angle(scan: &DepthScan) -> Result<Vec<f64>> {
    angles(&scan.avg_zeta_x, &scan.avg_zeta_y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureScan {
    pub depths: Vec<f64>,
    pub phi_cr: Vec<f64>,
    pub phi_lyuboshitz: Vec<f64>,
    pub bent: DepthScan,
    pub straight: DepthScan,
}

/// Bent minus straight averaged rotation angle, with the Lyuboshitz
/// prediction for a trajectory turned by Omega t.
///
/// Both crystals see exactly the same sampled entries.
pub fn curvature_contribution(
    cfg: &EnsembleConfig,
    particle: &ParticleSpec,
    channel: &CrystalChannel,
    divergence: Divergence,
) -> Result<CurvatureScan> {
    check_inputs(cfg, particle, channel)?;
    let entries = draw_entries(cfg, channel, divergence);
    let (members, rejected) = prepare(&entries, particle, channel, 1.0);
    let bent = build_scan(cfg, &members, rejected, CrystalMode::Bent)?;
    let straight = build_scan(cfg, &members, rejected, CrystalMode::Straight)?;

    let mean = particle.with_gamma(cfg.gamma_mean);
    let omega = model::angular_velocity(&mean, channel);
    let phi_lyuboshitz = bent
        .depths
        .iter()
        .map(|&d| spin::lyuboshitz_angle(mean.g_factor, mean.gamma, omega * mean.time_at_depth(d)))
        .collect();
    let phi_cr = bent.avg_phi.iter().zip(&straight.avg_phi).map(|(b, s)| b - s).collect();
    Ok(CurvatureScan {
        depths: bent.depths.clone(),
        phi_cr,
        phi_lyuboshitz,
        bent,
        straight,
    })
}

/// max - min over the last `fraction` of `values`.
pub fn tail_amplitude(values: &[f64], fraction: f64) -> f64 {
    let n = values.len();
    let k = ((n as f64 * fraction).ceil() as usize).clamp(1, n.max(1));
    let tail = &values[n - k..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}
