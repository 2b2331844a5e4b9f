//! Closed-form solution of the polar BMT system
//!
//! ```text
//! d(zeta_rho)/dt =  Lambda(t) zeta_phi
//! d(zeta_phi)/dt = -Lambda(t) zeta_rho
//! d(zeta_z)/dt   =  0
//! ```
//!
//! along the analytic channeled orbit. With zeta_rho(0) = 1 the solution is
//! (cos Psi, sin Psi) where dPsi/dt = -Lambda and
//!
//! ```text
//! Psi(t) = C [Theta(x) - Theta(x0)] + (gamma - 1) [Phi(x) - Phi(x0)],
//! x = (t - t0)/tau,  x0 = t0/tau.
//! ```
//!
//! Sign conventions, fixed against the numerical integration in `oracle`:
//!
//! | quantity | convention |
//! |----------|------------|
//! | dPsi/dt  | -Lambda |
//! | Lambda, electric term | -g V0 q / (b m c^2 D) with q = charge sign |
//! | C        | -q sqrt(2) A R tau Omega g V0 / (m c^2 (1 + A^2) b) |
//!
//! Here D = 1 + A^2 sin^2 x. `C` carries no 1/gamma: with it the electric
//! term of Psi would not integrate Lambda.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::model::{CrystalChannel, OrbitParams, ParticleSpec};
use crate::trajectory::Trajectory;

/// Polarization vector in the polar frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    pub zeta_rho: f64,
    pub zeta_phi: f64,
    pub zeta_z: f64,
}

impl SpinState {
    /// Spin at precession phase `psi` with out-of-plane component `zeta_z0`.
    pub fn from_phase(psi: f64, zeta_z0: f64) -> Self {
        let in_plane = (1.0 - zeta_z0 * zeta_z0).max(0.0).sqrt();
        let (s, c) = psi.sin_cos();
        SpinState {
            zeta_rho: in_plane * c,
            zeta_phi: in_plane * s,
            zeta_z: zeta_z0,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.zeta_rho * self.zeta_rho + self.zeta_phi * self.zeta_phi + self.zeta_z * self.zeta_z).sqrt()
    }

    /// In-plane Cartesian components at azimuth `phi`.
    pub fn cartesian(&self, phi: f64, initial: InitialSpin) -> (f64, f64) {
        let (s, c) = phi.sin_cos();
        let across = self.zeta_rho * s + self.zeta_phi * c;
        let along = self.zeta_rho * c - self.zeta_phi * s;
        match initial {
            InitialSpin::Perpendicular => (across, along),
            InitialSpin::Parallel => (along, across),
        }
    }
}

/// Orientation of the spin at entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialSpin {
    /// zeta_y(0) = 1, normal to the crystal plane.
    Perpendicular,
    /// zeta_x(0) = 1, along the crystal plane.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub c_const: f64,
    pub orbit: OrbitParams,
    pub g_factor: f64,
    pub gamma: f64,
    pub bend_radius: f64,
    pub b: f64,
    pub v0: f64,
    pub rest_energy: f64,
    pub charge_sign: f64,
}

impl PhaseParams {
    pub fn new(orbit: &OrbitParams, particle: &ParticleSpec, channel: &CrystalChannel) -> Self {
        PhaseParams {
            c_const: c_const(orbit, particle, channel),
            orbit: *orbit,
            g_factor: particle.g_factor,
            gamma: particle.gamma,
            bend_radius: channel.bend_radius,
            b: channel.b,
            v0: channel.v0,
            rest_energy: particle.rest_energy,
            charge_sign: particle.charge_sign.value(),
        }
    }

    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self::new(&traj.orbit, &traj.particle, &traj.channel)
    }

    /// R tau Omega, metres.
    fn arc_per_tau(&self) -> f64 {
        self.bend_radius * self.orbit.tau * self.orbit.omega
    }

    fn amp(&self) -> f64 {
        self.orbit.amp
    }
}

pub fn c_const(orbit: &OrbitParams, particle: &ParticleSpec, channel: &CrystalChannel) -> f64 {
    let a = orbit.amp;
    -particle.charge_sign.value() * SQRT_2 * a * channel.bend_radius * orbit.tau * orbit.omega
        * particle.g_factor
        * channel.v0
        / (particle.rest_energy * (1.0 + a * a) * channel.b)
}

/// cos x / sqrt(2 + A^2 - A^2 cos 2x), written with 2 (1 + A^2 sin^2 x)
/// under the root.
pub fn theta_fn(x: f64, amp: f64) -> f64 {
    let (s, c) = x.sin_cos();
    c / (2.0 * (1.0 + amp * amp * s * s)).sqrt()
}

/// Continuous branch of arccot(R tau Omega sqrt(2 + A^2 - A^2 cos 2x) sec x / (sqrt2 A b)).
///
/// Equal to the principal arccot on intervals where cos x > 0 and to the
/// principal value minus pi where cos x < 0, which removes the jumps at the
/// poles of sec x.
pub fn phi_fn(x: f64, params: &PhaseParams) -> f64 {
    let a = params.amp();
    let (s, c) = x.sin_cos();
    (a * params.b * c).atan2(params.arc_per_tau() * (1.0 + a * a * s * s).sqrt())
}

/// Principal arccot in (0, pi) of the same argument as [`phi_fn`].
pub fn phi_fn_principal(x: f64, params: &PhaseParams) -> Result<f64> {
    let a = params.amp();
    let (s, c) = x.sin_cos();
    if c.abs() <= f64::EPSILON * (1.0 + x.abs()) {
        return Err(Error::PoleAtHalfPi { x });
    }
    let arg = params.arc_per_tau() * (1.0 + a * a * s * s).sqrt() / (a * params.b * c);
    let v = (1.0 / arg).atan();
    Ok(if v < 0.0 { v + PI } else { v })
}

/// C Theta(x) + (gamma - 1) Phi(x), the phase before subtracting its value at entry.
fn raw_phase(x: f64, params: &PhaseParams) -> f64 {
    params.c_const * theta_fn(x, params.amp()) + (params.gamma - 1.0) * phi_fn(x, params)
}

impl PhaseParams {
    /// The constant C Theta(t0/tau) + (gamma - 1) Phi(t0/tau) subtracted in Psi.
    pub fn reference_phase(&self) -> f64 {
        if self.orbit.amp == 0.0 {
            return 0.0;
        }
        raw_phase(self.orbit.t0 / self.orbit.tau, self)
    }
}

/// Precession phase Psi(t); Psi(0) = 0.
pub fn psi(t: f64, params: &PhaseParams) -> f64 {
    psi_with_reference(t, params, params.reference_phase())
}

/// [`psi`] with a precomputed [`PhaseParams::reference_phase`].
pub fn psi_with_reference(t: f64, params: &PhaseParams, reference: f64) -> f64 {
    let o = &params.orbit;
    if o.amp == 0.0 {
        return 0.0;
    }
    raw_phase((t - o.t0) / o.tau, params) - reference
}

/// Lambda(t) of the polar BMT system, rad/s.
pub fn lambda_coefficient(t: f64, params: &PhaseParams) -> f64 {
    let o = &params.orbit;
    let a = o.amp;
    if a == 0.0 {
        return 0.0;
    }
    let (s, c) = ((t - o.t0) / o.tau).sin_cos();
    let d = 1.0 + a * a * s * s;
    let prefactor = a * params.bend_radius * o.omega * s / d.sqrt();
    let electric = -params.g_factor * params.v0 * params.charge_sign / (params.b * params.rest_energy * d);
    let k = params.arc_per_tau();
    let thomas = (1.0 + a * a) * params.b * (params.gamma - 1.0)
        / (a * a * params.b * params.b * c * c + k * k * d);
    prefactor * (electric + thomas)
}

pub fn spin_polar(t: f64, params: &PhaseParams, zeta_z0: f64) -> SpinState {
    SpinState::from_phase(psi(t, params), zeta_z0)
}

fn in_plane(angle: f64, initial: InitialSpin) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    match initial {
        InitialSpin::Perpendicular => (s, c),
        InitialSpin::Parallel => (c, s),
    }
}

/// (zeta_x, zeta_y) in the bent crystal: rotation by phi(t) + Psi(t).
pub fn spin_cartesian_bent(t: f64, params: &PhaseParams, initial: InitialSpin) -> (f64, f64) {
    in_plane(params.orbit.omega * t + psi(t, params), initial)
}

/// (zeta_x, zeta_y) without the geometric rotation phi(t).
pub fn spin_cartesian_straight(t: f64, params: &PhaseParams, initial: InitialSpin) -> (f64, f64) {
    in_plane(psi(t, params), initial)
}

/// Cartesian components for a given total in-plane angle.
pub fn cartesian_from_angle(angle: f64, initial: InitialSpin) -> (f64, f64) {
    in_plane(angle, initial)
}

/// arcsin(zeta_y / |(zeta_x, zeta_y)|).
pub fn rotation_angle(zeta_y: f64, zeta_x: f64) -> Result<f64> {
    let n = zeta_x.hypot(zeta_y);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::DegenerateInPlane);
    }
    Ok((zeta_y / n).clamp(-1.0, 1.0).asin())
}

/// Lyuboshitz relation between spin rotation and trajectory bend.
pub fn lyuboshitz_angle(g: f64, gamma: f64, bend: f64) -> f64 {
    ((g - 2.0) * (gamma * gamma - 1.0) / (2.0 * gamma) + (gamma - 1.0) / gamma) * bend
}

/// Value of theta_fn at x = 0.
pub const THETA_AT_ZERO: f64 = FRAC_1_SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lindhard_angle, EntryConditions, SPEED_OF_LIGHT};
    use approx::assert_relative_eq;

    fn default_traj() -> Trajectory {
        let p = ParticleSpec::antiproton(1e6);
        let ch = CrystalChannel::tungsten_100(1.0);
        let theta = 0.25 * lindhard_angle(&p, &ch);
        Trajectory::new(EntryConditions::new(0.45e-10, theta), p, ch).unwrap()
    }

    fn params() -> PhaseParams {
        PhaseParams::from_trajectory(&default_traj())
    }

    #[test]
    fn theta_fn_values() {
        assert_relative_eq!(theta_fn(0.0, 2.3), THETA_AT_ZERO, max_relative = 1e-15);
        assert!(theta_fn(PI / 2.0, 2.3).abs() < 1e-16);
        for &x in &[0.3, 1.7, 4.4] {
            assert_eq!(theta_fn(-x, 1.1), theta_fn(x, 1.1));
            // printed form with cos 2x
            let a: f64 = 1.1;
            let printed = x.cos() / (2.0 + a * a - a * a * (2.0 * x).cos()).sqrt();
            assert_relative_eq!(theta_fn(x, a), printed, max_relative = 1e-13);
        }
    }

    #[test]
    fn phi_fn_at_zero_matches_substitution() {
        let p = params();
        let a = p.orbit.amp;
        let arg = p.bend_radius * p.orbit.tau * p.orbit.omega / (a * p.b);
        assert_relative_eq!(phi_fn(0.0, &p), (1.0 / arg).atan(), max_relative = 1e-14);
        assert!(phi_fn(0.0, &p) > 0.0 && phi_fn(0.0, &p) < PI);
    }

    #[test]
    fn phi_fn_differs_from_principal_by_whole_turns() {
        let p = params();
        for i in 0..500 {
            let x = -7.0 + 0.0281 * i as f64;
            let principal = phi_fn_principal(x, &p).unwrap();
            let k = (principal - phi_fn(x, &p)) / PI;
            assert!((k - k.round()).abs() < 1e-9, "x={x} k={k}");
            let expected = if x.cos() < 0.0 { 1.0 } else { 0.0 };
            assert_eq!(k.round(), expected);
        }
        assert!(matches!(
            phi_fn_principal(PI / 2.0, &p),
            Err(Error::PoleAtHalfPi { .. })
        ));
    }

    #[test]
    fn phi_fn_is_continuous_across_pole() {
        let p = params();
        let delta = 1e-6;
        // Lipschitz constant measured on the neighbourhood
        let mut lip: f64 = 0.0;
        for i in 1..100 {
            let x = PI / 2.0 - 0.05 + 1e-3 * i as f64;
            lip = lip.max((phi_fn(x + 1e-4, &p) - phi_fn(x, &p)).abs() / 1e-4);
        }
        let jump = (phi_fn(PI / 2.0 + delta, &p) - phi_fn(PI / 2.0 - delta, &p)).abs();
        assert!(jump <= 1.01 * lip * 2.0 * delta, "jump={jump} lip={lip}");
    }

    #[test]
    fn phi_fn_straight_limit() {
        let mut p = params();
        p.bend_radius *= 1e12;
        for &x in &[0.0, 0.5, 1.2, -1.0] {
            assert!(phi_fn(x, &p).abs() < 1e-15);
        }
    }

    #[test]
    fn c_const_properties() {
        let traj = default_traj();
        let p = PhaseParams::from_trajectory(&traj);
        // golden value from a 40-digit evaluation
        assert_relative_eq!(p.c_const, 0.557_910_041_242_822_6, max_relative = 1e-12);

        // second unit path: lengths in units of b, velocities in units of c
        let o = traj.orbit;
        let a = o.amp;
        let tau_c_over_b = o.tau * SPEED_OF_LIGHT / traj.channel.b;
        let beta = o.omega * traj.channel.bend_radius / SPEED_OF_LIGHT;
        let v0_over_mc2 = traj.channel.v0 / traj.particle.rest_energy;
        let natural = SQRT_2 * a * beta * tau_c_over_b * traj.particle.g_factor * v0_over_mc2 / (1.0 + a * a);
        assert_relative_eq!(p.c_const, natural, max_relative = 1e-13);

        let flat = OrbitParams { amp: 0.0, ..o };
        assert_eq!(c_const(&flat, &traj.particle, &traj.channel), 0.0);

        let mut g3 = traj.particle;
        g3.g_factor *= 3.0;
        assert_relative_eq!(
            c_const(&o, &g3, &traj.channel),
            3.0 * p.c_const,
            max_relative = 1e-15
        );
    }

    #[test]
    fn psi_basics() {
        let p = params();
        assert_eq!(psi(0.0, &p), 0.0);
        let flat = PhaseParams {
            orbit: OrbitParams { amp: 0.0, ..p.orbit },
            c_const: 0.0,
            ..p
        };
        for &t in &[0.0, 1e-13, 4e-12] {
            assert_eq!(psi(t, &flat), 0.0);
        }
    }

    #[test]
    fn psi_derivative_is_minus_lambda() {
        let p = params();
        let h = p.orbit.tau * 1e-4;
        let scale = (0..1000)
            .map(|i| lambda_coefficient(i as f64 * p.orbit.tau * 0.01, &p).abs())
            .fold(0.0, f64::max);
        for i in 0..400 {
            let t = p.orbit.tau * (0.013 + 0.05 * i as f64);
            let fd = (psi(t + h, &p) - psi(t - h, &p)) / (2.0 * h);
            let lam = lambda_coefficient(t, &p);
            assert!((fd + lam).abs() <= 1e-5 * scale, "t={t} fd={fd} lam={lam}");
        }
    }

    #[test]
    fn lambda_is_periodic_and_vanishes_without_amplitude() {
        let p = params();
        let period = p.orbit.period();
        for i in 0..100 {
            let t = i as f64 * 3.1e-14;
            let a = lambda_coefficient(t, &p);
            let b = lambda_coefficient(t + period, &p);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        let flat = PhaseParams {
            orbit: OrbitParams { amp: 0.0, ..p.orbit },
            ..p
        };
        assert_eq!(lambda_coefficient(1e-13, &flat), 0.0);
    }

    #[test]
    fn psi_is_continuous_on_a_fine_grid() {
        let p = params();
        let lam_max = (0..10_000)
            .map(|i| lambda_coefficient(i as f64 * p.orbit.period() / 10_000.0, &p).abs())
            .fold(0.0, f64::max);
        let t_end = p.orbit.tau * 40.0;
        let n = 1_000_000;
        let dt = t_end / n as f64;
        let mut prev = psi(0.0, &p);
        for i in 1..=n {
            let cur = psi(i as f64 * dt, &p);
            assert!((cur - prev).abs() <= 1.5 * lam_max * dt, "i={i}");
            prev = cur;
        }
    }

    #[test]
    fn polar_state() {
        let p = params();
        assert_eq!(spin_polar(0.0, &p, 0.0), SpinState { zeta_rho: 1.0, zeta_phi: 0.0, zeta_z: 0.0 });
        for i in 0..100 {
            let t = i as f64 * 7.7e-14;
            assert!((spin_polar(t, &p, 0.0).norm() - 1.0).abs() < 1e-12);
            assert!((spin_polar(t, &p, 0.6).norm() - 1.0).abs() < 1e-12);
            let up = spin_polar(t, &p, 1.0);
            assert_eq!((up.zeta_rho, up.zeta_phi, up.zeta_z), (0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn cartesian_forms() {
        let p = params();
        assert_eq!(spin_cartesian_bent(0.0, &p, InitialSpin::Perpendicular), (0.0, 1.0));
        assert_eq!(spin_cartesian_bent(0.0, &p, InitialSpin::Parallel), (1.0, 0.0));
        assert_eq!(spin_cartesian_straight(0.0, &p, InitialSpin::Perpendicular), (0.0, 1.0));
        for i in 0..200 {
            let t = i as f64 * 1.9e-13;
            let (x, y) = spin_cartesian_bent(t, &p, InitialSpin::Perpendicular);
            assert!((x * x + y * y - 1.0).abs() < 1e-12);

            // bent = straight rotated by phi at equal Psi
            let (sx, sy) = spin_cartesian_straight(t, &p, InitialSpin::Perpendicular);
            let phi = p.orbit.omega * t;
            let (s, c) = phi.sin_cos();
            assert!((x - (sx * c + sy * s)).abs() < 1e-15);
            assert!((y - (sy * c - sx * s)).abs() < 1e-15);

            // polar state mapped through the frame rotation agrees
            let st = spin_polar(t, &p, 0.0);
            let (px, py) = st.cartesian(phi, InitialSpin::Perpendicular);
            assert!((px - x).abs() < 1e-12 && (py - y).abs() < 1e-12);
            let (qx, qy) = st.cartesian(phi, InitialSpin::Parallel);
            let (bx, by) = spin_cartesian_bent(t, &p, InitialSpin::Parallel);
            assert!((qx - bx).abs() < 1e-12 && (qy - by).abs() < 1e-12);
        }
    }

    #[test]
    fn straight_equals_bent_in_large_radius_limit() {
        let traj = default_traj();
        let huge = CrystalChannel {
            bend_radius: 1e9,
            ..traj.channel
        };
        let far = Trajectory::new(traj.entry, traj.particle, huge).unwrap();
        let p_far = PhaseParams::from_trajectory(&far);
        let p = PhaseParams::from_trajectory(&traj);
        let t_end = traj.particle.time_at_depth(1e-2);
        assert!(p_far.orbit.omega * t_end < 1e-9);
        for i in 0..=200 {
            let t = t_end * i as f64 / 200.0;
            let (bx, by) = spin_cartesian_bent(t, &p_far, InitialSpin::Perpendicular);
            let (sx, sy) = spin_cartesian_straight(t, &p, InitialSpin::Perpendicular);
            assert!((bx - sx).abs() < 1e-6 && (by - sy).abs() < 1e-6);
        }
    }

    #[test]
    fn rotation_angle_cases() {
        assert_relative_eq!(rotation_angle(1.0, 0.0).unwrap(), PI / 2.0);
        assert_eq!(rotation_angle(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(rotation_angle(0.8, 0.6).unwrap(), 0.8f64.asin(), max_relative = 1e-15);
        assert_relative_eq!(rotation_angle(0.8, 0.6).unwrap(), 0.927_295_218_001_612_2, max_relative = 1e-15);
        assert_relative_eq!(
            rotation_angle(3.0 * 0.31, 3.0 * -0.5).unwrap(),
            rotation_angle(0.31, -0.5).unwrap(),
            max_relative = 1e-15
        );
        assert_eq!(rotation_angle(0.0, 0.0), Err(Error::DegenerateInPlane));
    }

    #[test]
    fn lyuboshitz_cases() {
        let phi = lyuboshitz_angle(2.0, 1e6, 0.01);
        assert_relative_eq!(phi, 0.01, max_relative = 1e-5);
        assert_eq!(lyuboshitz_angle(5.6, 1.0, 0.3), 0.0);
        assert_relative_eq!(
            lyuboshitz_angle(5.6, 3.0, 0.02),
            2.0 * lyuboshitz_angle(5.6, 3.0, 0.01),
            max_relative = 1e-15
        );
    }
}
