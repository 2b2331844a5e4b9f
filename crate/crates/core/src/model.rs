//! Physical constants, the channel description and the scalar quantities
//! derived from it.
//!
//! Units throughout the crate: energies in eV, lengths in metres, times in
//! seconds, angles in radians. Potential energies are stored directly as
//! energies, so the elementary charge never appears explicitly.

use crate::error::{Error, Result};
use crate::trajectory;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
pub const ELECTRON_REST_ENERGY: f64 = 0.510_998_950_00e6;
/// Antiproton (= proton) rest energy in eV.
pub const ANTIPROTON_REST_ENERGY: f64 = 938.272_088_16e6;
/// Magnitude of the (anti)proton gyromagnetic ratio.
pub const ANTIPROTON_G_FACTOR: f64 = 5.585_694_689;
/// g used by default: reproduces the ~L/R curvature estimate of the
/// Lyuboshitz relation for a 1 cm, R = 1 m crystal.
pub const DEFAULT_G_FACTOR: f64 = 2.0;
pub const DEFAULT_GAMMA: f64 = 1.0e6;

/// Default W (100) well depth, eV. Calibrated so the Lindhard angle is
/// 4.2e-7 rad at gamma = 1e6.
pub const W100_V0: f64 = 82.8;
pub const W100_WIDTH: f64 = 0.3e-10;
pub const W100_SPACING: f64 = 1.58e-10;
/// Radiation length of amorphous tungsten (6.76 g/cm^2 at 19.3 g/cm^3).
pub const W_RADIATION_LENGTH: f64 = 3.504e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ChargeSign {
    #[serde(rename = "negative")]
    Negative,
    #[serde(rename = "positive")]
    Positive,
}

impl ChargeSign {
    pub fn value(self) -> f64 {
        match self {
            ChargeSign::Negative => -1.0,
            ChargeSign::Positive => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSpec {
    pub rest_energy: f64,
    pub charge_sign: ChargeSign,
    pub g_factor: f64,
    pub gamma: f64,
}

impl ParticleSpec {
    /// Antiproton with the default g factor.
    pub fn antiproton(gamma: f64) -> Self {
        ParticleSpec {
            rest_energy: ANTIPROTON_REST_ENERGY,
            charge_sign: ChargeSign::Negative,
            g_factor: DEFAULT_G_FACTOR,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rest_energy > 0.0 && self.rest_energy.is_finite()) {
            return Err(Error::invalid("rest_energy > 0"));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma > 1"));
        }
        if !self.g_factor.is_finite() {
            return Err(Error::invalid("g_factor must be finite"));
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        ParticleSpec { gamma, ..self }
    }

    /// gamma * m c^2, eV.
    pub fn total_energy(&self) -> f64 {
        self.gamma * self.rest_energy
    }

    /// v/c, computed without cancellation for large gamma.
    pub fn beta(&self) -> f64 {
        ((self.gamma - 1.0) * (self.gamma + 1.0)).sqrt() / self.gamma
    }

    /// Time taken to reach penetration depth `depth`.
    pub fn time_at_depth(&self, depth: f64) -> f64 {
        depth / (self.beta() * SPEED_OF_LIGHT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalChannel {
    /// Well depth V0, eV.
    pub v0: f64,
    /// Poschl-Teller width b, m.
    pub b: f64,
    /// Interplanar distance d, m.
    pub spacing: f64,
    pub bend_radius: f64,
    pub radiation_length: f64,
}

impl CrystalChannel {
    pub fn tungsten_100(bend_radius: f64) -> Self {
        CrystalChannel {
            v0: W100_V0,
            b: W100_WIDTH,
            spacing: W100_SPACING,
            bend_radius,
            radiation_length: W_RADIATION_LENGTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v0", self.v0),
            ("b", self.b),
            ("spacing", self.spacing),
            ("bend_radius", self.bend_radius),
            ("radiation_length", self.radiation_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} > 0")));
            }
        }
        if self.b >= self.spacing {
            return Err(Error::invalid("b < spacing"));
        }
        Ok(())
    }

    /// Single-plane well V(x) = -V0 sech^2(x/b).
    pub fn potential_straight(&self, x: f64) -> f64 {
        let s = sech(x / self.b);
        -self.v0 * s * s
    }

    /// Shifted well V_B(r) = V0 [1 - sech^2(r/b)], r = rho - R.
    pub fn potential_bent(&self, r: f64) -> f64 {
        // V0 tanh^2 is the same quantity without the cancellation near r = 0.
        let t = (r / self.b).tanh();
        self.v0 * t * t
    }

    /// Radial field as an energy gradient, eV/m: -dV_B/dr.
    pub fn field_radial(&self, r: f64) -> f64 {
        let u = r / self.b;
        let s = sech(u);
        -2.0 * self.v0 / self.b * s * s * u.tanh()
    }
}

fn sech(u: f64) -> f64 {
    // 1/cosh overflows gracefully to 0 for |u| > ~710.
    1.0 / u.cosh()
}

/// Entry point and angle of one particle.
///
/// `x0` is measured from the channel midline. A positive `theta` means the
/// particle initially moves outward (increasing rho).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryConditions {
    pub x0: f64,
    pub theta: f64,
}

impl EntryConditions {
    pub fn new(x0: f64, theta: f64) -> Self {
        EntryConditions { x0, theta }
    }

    pub fn validate(&self, channel: &CrystalChannel) -> Result<()> {
        if !(self.x0.is_finite() && self.theta.is_finite()) {
            return Err(Error::invalid("entry values must be finite"));
        }
        if self.x0.abs() >= channel.spacing / 2.0 {
            return Err(Error::invalid("|x0| < spacing/2"));
        }
        Ok(())
    }
}

/// Constants of one channeled orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitParams {
    pub eps_perp: f64,
    pub amp: f64,
    pub tau: f64,
    pub t0: f64,
    pub omega: f64,
}

impl OrbitParams {
    /// Same orbit with the angular velocity multiplied by `scale`.
    pub fn with_omega_scale(self, scale: f64) -> Self {
        OrbitParams {
            omega: self.omega * scale,
            ..self
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.tau
    }
}

/// Lindhard critical angle sqrt(2 V0 / (gamma m c^2)).
pub fn lindhard_angle(particle: &ParticleSpec, channel: &CrystalChannel) -> f64 {
    (2.0 * channel.v0 / particle.total_energy()).sqrt()
}

/// Transverse energy at entry: kinetic part plus the shifted well.
pub fn transverse_energy(
    entry: &EntryConditions,
    particle: &ParticleSpec,
    channel: &CrystalChannel,
) -> f64 {
    0.5 * particle.total_energy() * entry.theta * entry.theta + channel.potential_bent(entry.x0)
}

/// A = sqrt(eps / (V0 - eps)).
pub fn amplitude(eps_perp: f64, channel: &CrystalChannel) -> f64 {
    (eps_perp / (channel.v0 - eps_perp)).sqrt()
}

/// tau = (b/c) sqrt(gamma m c^2 / (2 (V0 - eps))).
pub fn oscillation_time(eps_perp: f64, particle: &ParticleSpec, channel: &CrystalChannel) -> f64 {
    channel.b / SPEED_OF_LIGHT
        * (particle.total_energy() / (2.0 * (channel.v0 - eps_perp))).sqrt()
}

/// Angular velocity along the bend, beta c / R.
pub fn angular_velocity(particle: &ParticleSpec, channel: &CrystalChannel) -> f64 {
    particle.beta() * SPEED_OF_LIGHT / channel.bend_radius
}

pub fn orbit_params(
    entry: &EntryConditions,
    particle: &ParticleSpec,
    channel: &CrystalChannel,
) -> Result<OrbitParams> {
    let eps_perp = transverse_energy(entry, particle, channel);
    if !(eps_perp < channel.v0) {
        return Err(Error::NotChanneled {
            ratio: eps_perp / channel.v0,
        });
    }
    let amp = amplitude(eps_perp, channel);
    let tau = oscillation_time(eps_perp, particle, channel);
    let t0 = trajectory::solve_t0(entry, amp, tau, channel)?;
    Ok(OrbitParams {
        eps_perp,
        amp,
        tau,
        t0,
        omega: angular_velocity(particle, channel),
    })
}

/// Dechanneling length estimate (alpha/2pi) (2 U0 eps / m_e^2 c^4) L_rad.
pub fn dechanneling_length(particle: &ParticleSpec, channel: &CrystalChannel) -> f64 {
    FINE_STRUCTURE / (2.0 * std::f64::consts::PI)
        * (2.0 * channel.v0 * particle.total_energy())
        / (ELECTRON_REST_ENERGY * ELECTRON_REST_ENERGY)
        * channel.radiation_length
}
