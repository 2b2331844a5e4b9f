//! Analytic channeled orbit in the bent channel.
//!
//! The radial offset is r(t) = b asinh(A sin((t - t0)/tau)), which solves the
//! transverse energy relation for the sech^2 well exactly. The azimuth grows
//! linearly, phi(t) = Omega t.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{self, CrystalChannel, EntryConditions, OrbitParams, ParticleSpec, SPEED_OF_LIGHT};

/// Relative slack allowed when the entry point sits on a turning point.
const TURNING_POINT_SLACK: f64 = 1e-12;

/// Integration constant t0 of the orbit.
///
/// The returned value places the particle at `entry.x0` at t = 0 with a radial
/// velocity whose sign matches `entry.theta`. Among all such t0 the one with
/// the smallest magnitude is returned (ties resolve to the positive value).
pub fn solve_t0(entry: &EntryConditions, amp: f64, tau: f64, channel: &CrystalChannel) -> Result<f64> {
    if amp == 0.0 {
        return if entry.x0 == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::InconsistentEntry { x0: entry.x0, amp })
        };
    }
    let s = (entry.x0 / channel.b).sinh() / amp;
    if s.abs() > 1.0 + TURNING_POINT_SLACK {
        return Err(Error::InconsistentEntry { x0: entry.x0, amp });
    }
    let rising = s.clamp(-1.0, 1.0).asin();
    // phase at t = 0, i.e. -t0/tau
    let mut phase = if entry.theta < 0.0 { PI - rising } else { rising };
    if phase >= PI {
        phase -= 2.0 * PI;
    }
    Ok(-tau * phase)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub orbit: OrbitParams,
    pub channel: CrystalChannel,
    pub particle: ParticleSpec,
    pub entry: EntryConditions,
}

impl Trajectory {
    pub fn new(entry: EntryConditions, particle: ParticleSpec, channel: CrystalChannel) -> Result<Self> {
        particle.validate()?;
        channel.validate()?;
        entry.validate(&channel)?;
        let orbit = model::orbit_params(&entry, &particle, &channel)?;
        Ok(Trajectory {
            orbit,
            channel,
            particle,
            entry,
        })
    }

    /// (t - t0) / tau
    pub fn phase(&self, t: f64) -> f64 {
        (t - self.orbit.t0) / self.orbit.tau
    }

    /// Position inside the channel, r = rho - R.
    pub fn offset(&self, t: f64) -> f64 {
        if self.orbit.amp == 0.0 {
            return 0.0;
        }
        self.channel.b * (self.orbit.amp * self.phase(t).sin()).asinh()
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.channel.bend_radius + self.offset(t)
    }

    pub fn rho_dot(&self, t: f64) -> f64 {
        let a = self.orbit.amp;
        if a == 0.0 {
            return 0.0;
        }
        let (s, c) = self.phase(t).sin_cos();
        self.channel.b * a / self.orbit.tau * c / (1.0 + a * a * s * s).sqrt()
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.orbit.omega * t
    }

    /// Largest |r| reached on the orbit.
    pub fn max_offset(&self) -> f64 {
        self.channel.b * self.orbit.amp.asinh()
    }

    /// Right-hand side of the radial energy relation,
    /// (2/(gamma m)) (eps_perp - V_B(r)), in m^2/s^2.
    pub fn radial_speed_squared_at(&self, r: f64) -> f64 {
        2.0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT / self.particle.total_energy()
            * (self.orbit.eps_perp - self.channel.potential_bent(r))
    }

    /// |rho_dot^2 - (2/(gamma m))(eps - V_B(r))| scaled by the peak radial
    /// kinetic term (2/(gamma m)) eps.
    pub fn energy_residual(&self, t: f64) -> f64 {
        let lhs = self.rho_dot(t).powi(2);
        let rhs = self.radial_speed_squared_at(self.offset(t));
        let scale = 2.0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT / self.particle.total_energy()
            * self.orbit.eps_perp;
        if scale == 0.0 {
            return (lhs - rhs).abs();
        }
        (lhs - rhs).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lindhard_angle;
    use approx::assert_relative_eq;

    fn setup() -> (ParticleSpec, CrystalChannel) {
        (ParticleSpec::antiproton(1e6), CrystalChannel::tungsten_100(1.0))
    }

    #[test]
    fn t0_rising_branch_through_center() {
        let (_, ch) = setup();
        let t0 = solve_t0(&EntryConditions::new(0.0, 1e-7), 0.7, 1e-13, &ch).unwrap();
        assert_eq!(t0, 0.0);
    }

    #[test]
    fn t0_falling_branch_matches_brute_force() {
        let (p, ch) = setup();
        let theta = -0.5 * lindhard_angle(&p, &ch);
        let traj = Trajectory::new(EntryConditions::new(0.0, theta), p, ch).unwrap();
        let tau = traj.orbit.tau;
        assert_relative_eq!(traj.orbit.t0, PI * tau, max_relative = 1e-15);

        // scan t0 over one period for r(0) = 0 with r'(0) < 0
        let n = 100_000;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..n {
            let t0 = 2.0 * PI * tau * i as f64 / n as f64;
            let probe = Trajectory {
                orbit: OrbitParams { t0, ..traj.orbit },
                ..traj
            };
            if probe.rho_dot(0.0) < 0.0 {
                let miss = probe.offset(0.0).abs();
                if miss < best.0 {
                    best = (miss, t0);
                }
            }
        }
        assert!((best.1 - PI * tau).abs() <= 2.0 * PI * tau / n as f64);
    }

    #[test]
    fn t0_turning_point() {
        let (p, ch) = setup();
        // Theta = 0 always starts on a turning point.
        let x0 = 0.21e-10;
        let traj = Trajectory::new(EntryConditions::new(x0, 0.0), p, ch).unwrap();
        assert_relative_eq!(
            (x0 / ch.b).sinh(),
            traj.orbit.amp,
            max_relative = 1e-14
        );
        assert_relative_eq!(traj.orbit.t0, -PI / 2.0 * traj.orbit.tau, max_relative = 1e-7);
        assert!(traj.rho_dot(0.0).abs() < 1e-6 * traj.channel.b / traj.orbit.tau);
    }

    #[test]
    fn t0_rejects_point_outside_orbit() {
        let (_, ch) = setup();
        let err = solve_t0(&EntryConditions::new(0.5e-10, 0.0), 0.1, 1e-13, &ch).unwrap_err();
        assert!(matches!(err, Error::InconsistentEntry { .. }));
        assert!(solve_t0(&EntryConditions::new(1e-12, 0.0), 0.0, 1e-13, &ch).is_err());
    }

    #[test]
    fn degenerate_orbit_sits_at_bottom() {
        let (p, ch) = setup();
        let traj = Trajectory::new(EntryConditions::new(0.0, 0.0), p, ch).unwrap();
        for &t in &[0.0, 1e-13, 7e-12] {
            assert_eq!(traj.offset(t), 0.0);
            assert_eq!(traj.rho(t), ch.bend_radius);
            assert_eq!(traj.rho_dot(t), 0.0);
        }
    }

    #[test]
    fn special_points_and_periodicity() {
        let (p, ch) = setup();
        let theta = 0.25 * lindhard_angle(&p, &ch);
        let traj = Trajectory::new(EntryConditions::new(0.45e-10, theta), p, ch).unwrap();
        let o = traj.orbit;
        assert_eq!(traj.offset(o.t0), 0.0);
        assert_relative_eq!(
            traj.offset(o.t0 + PI / 2.0 * o.tau),
            ch.b * o.amp.asinh(),
            max_relative = 1e-12
        );
        assert!(traj.rho_dot(o.t0 + PI / 2.0 * o.tau).abs() < 1e-9 * ch.b / o.tau);
        for i in 0..50 {
            let t = 0.37e-13 * i as f64;
            assert!((traj.offset(t + o.period()) - traj.offset(t)).abs() < 1e-12 * ch.b);
            assert!((traj.rho_dot(t + o.period()) - traj.rho_dot(t)).abs() < 1e-9 * ch.b / o.tau);
        }
    }

    #[test]
    fn entry_conditions_reproduced() {
        let (p, ch) = setup();
        let tl = lindhard_angle(&p, &ch);
        for &(x0, frac) in &[(0.45e-10, 0.25), (-0.3e-10, -0.6), (0.1e-10, 0.9), (-0.05e-10, 0.1)] {
            let traj = Trajectory::new(EntryConditions::new(x0, frac * tl), p, ch).unwrap();
            assert!((traj.offset(0.0) - x0).abs() <= 1e-12 * ch.b);
            assert_eq!(traj.rho_dot(0.0).signum(), frac.signum());
            // initial radial speed is c*theta
            assert_relative_eq!(traj.rho_dot(0.0), SPEED_OF_LIGHT * frac * tl, max_relative = 1e-9);
        }
    }

    #[test]
    fn rho_dot_matches_finite_difference() {
        let (p, ch) = setup();
        let tl = lindhard_angle(&p, &ch);
        let traj = Trajectory::new(EntryConditions::new(0.2e-10, 0.4 * tl), p, ch).unwrap();
        let h = traj.orbit.tau * 1e-4;
        let peak = traj.rho_dot(traj.orbit.t0).abs();
        for i in 0..200 {
            let t = traj.orbit.tau * 0.0731 * i as f64;
            let fd = (traj.offset(t + h) - traj.offset(t - h)) / (2.0 * h);
            let an = traj.rho_dot(t);
            assert!((fd - an).abs() <= 1e-6 * peak, "t={t} fd={fd} an={an}");
        }
    }

    #[test]
    fn confined_to_channel_range() {
        let (p, ch) = setup();
        let tl = lindhard_angle(&p, &ch);
        let traj = Trajectory::new(EntryConditions::new(-0.2e-10, -0.5 * tl), p, ch).unwrap();
        let lim = traj.max_offset() * (1.0 + 1e-14);
        for i in 0..1000 {
            assert!(traj.offset(i as f64 * 1.3e-14).abs() <= lim);
        }
    }

    #[test]
    fn phi_is_linear() {
        let (p, ch) = setup();
        let traj = Trajectory::new(EntryConditions::new(0.0, 0.0), p, ch).unwrap();
        assert_eq!(traj.phi(0.0), 0.0);
        let t = p.time_at_depth(0.01);
        assert_relative_eq!(traj.phi(t), 0.01, max_relative = 1e-12);
        assert_relative_eq!(traj.phi(2.0 * t), 2.0 * traj.phi(t), max_relative = 1e-15);
    }
}
