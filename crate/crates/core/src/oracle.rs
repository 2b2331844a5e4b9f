//! Fixed-step RK4 reference integrations.
//!
//! Nothing here uses the closed forms of `trajectory::Trajectory::offset` or
//! `spin::psi`: the radial motion is integrated from the force of the well and
//! the spin from the polar BMT system driven by `spin::lambda_coefficient`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use rand::Rng;

use crate::model::{self, CrystalChannel, EntryConditions, ParticleSpec, SPEED_OF_LIGHT};
use crate::spin::{self, PhaseParams};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Largest allowed step, s. Steps are shortened so every output time is hit exactly.
    pub step: f64,
    pub max_steps: usize,
    pub method: Method,
}

impl IntegratorConfig {
    pub fn per_tau(tau: f64, steps_per_tau: usize) -> Self {
        IntegratorConfig {
            step: tau / steps_per_tau as f64,
            max_steps: 50_000_000,
            method: Method::Rk4,
        }
    }

    fn check(&self, tau: f64) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::invalid("step > 0"));
        }
        let limit = tau / 100.0;
        if self.step > limit {
            return Err(Error::StepTooLarge { step: self.step, limit });
        }
        Ok(())
    }
}

/// Classic fourth-order Runge-Kutta step for y' = f(t, y).
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |y: &[f64; N], k: &[f64; N], a: f64| -> [f64; N] {
        let mut out = *y;
        for i in 0..N {
            out[i] += a * k[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = f(t + h, &axpy(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates from t = 0 and records the state at each of `times`.
fn integrate_to<const N: usize, F>(
    f: F,
    y0: [f64; N],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut prev = 0.0;
    let mut needed = 0usize;
    for (i, &t) in times.iter().enumerate() {
        if !(t >= prev) {
            return Err(Error::invalid(format!("output time {i} is not increasing from 0")));
        }
        needed += ((t - prev) / cfg.step).ceil() as usize;
        prev = t;
    }
    if needed > cfg.max_steps {
        return Err(Error::StepBudgetExceeded {
            needed,
            max_steps: cfg.max_steps,
        });
    }

    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut y = y0;
    for &target in times {
        let span = target - t;
        let n = (span / cfg.step).ceil() as usize;
        if n > 0 {
            let h = span / n as f64;
            for k in 0..n {
                y = match cfg.method {
                    Method::Rk4 => rk4_step(&f, t + k as f64 * h, &y, h),
                };
            }
        }
        t = target;
        out.push(y);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialPath {
    pub times: Vec<f64>,
    /// r = rho - R
    pub offsets: Vec<f64>,
    pub velocities: Vec<f64>,
}

/// Integrates r'' = -(c^2 / (gamma m c^2)) dV_B/dr from (x0, c theta).
pub fn integrate_radial(
    entry: &EntryConditions,
    particle: &ParticleSpec,
    channel: &CrystalChannel,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<RadialPath> {
    let traj = Trajectory::new(*entry, *particle, *channel)?;
    if traj.orbit.amp > 0.0 {
        cfg.check(traj.orbit.tau)?;
    }
    let accel = SPEED_OF_LIGHT * SPEED_OF_LIGHT / particle.total_energy();
    let ch = *channel;
    let states = integrate_to(
        move |_t, y: &[f64; 2]| [y[1], accel * ch.field_radial(y[0])],
        [entry.x0, SPEED_OF_LIGHT * entry.theta],
        times,
        cfg,
    )?;
    Ok(RadialPath {
        times: times.to_vec(),
        offsets: states.iter().map(|s| s[0]).collect(),
        velocities: states.iter().map(|s| s[1]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinPath {
    pub times: Vec<f64>,
    pub zeta_rho: Vec<f64>,
    pub zeta_phi: Vec<f64>,
    pub zeta_z: Vec<f64>,
}

impl SpinPath {
    /// atan2(zeta_phi, zeta_rho) unwrapped into a continuous sequence.
    pub fn unwrapped_phase(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.times.len());
        let mut offset = 0.0;
        let mut last: Option<f64> = None;
        for (&r, &p) in self.zeta_rho.iter().zip(&self.zeta_phi) {
            let raw = p.atan2(r);
            if let Some(prev) = last {
                let d = raw - prev;
                if d > PI {
                    offset -= 2.0 * PI;
                } else if d < -PI {
                    offset += 2.0 * PI;
                }
            }
            last = Some(raw);
            out.push(raw + offset);
        }
        out
    }

    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.times.len()).map(move |i| {
            (self.zeta_rho[i].powi(2) + self.zeta_phi[i].powi(2) + self.zeta_z[i].powi(2)).sqrt()
        })
    }
}

/// Integrates the polar BMT system along the analytic orbit from (1, 0, 0).
pub fn integrate_bmt(
    traj: &Trajectory,
    params: &PhaseParams,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<SpinPath> {
    integrate_bmt_from(traj, params, [1.0, 0.0, 0.0], times, cfg)
}

/// As [`integrate_bmt`] from an arbitrary initial polar spin.
pub fn integrate_bmt_from(
    traj: &Trajectory,
    params: &PhaseParams,
    initial: [f64; 3],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<SpinPath> {
    if traj.orbit.amp > 0.0 {
        cfg.check(traj.orbit.tau)?;
    }
    let p = *params;
    let states = integrate_to(
        move |t, y: &[f64; 3]| {
            let lam = spin::lambda_coefficient(t, &p);
            [lam * y[1], -lam * y[0], 0.0]
        },
        initial,
        times,
        cfg,
    )?;
    Ok(SpinPath {
        times: times.to_vec(),
        zeta_rho: states.iter().map(|s| s[0]).collect(),
        zeta_phi: states.iter().map(|s| s[1]).collect(),
        zeta_z: states.iter().map(|s| s[2]).collect(),
    })
}

/// A sampled phase curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl PhaseSeries {
    pub fn closed_form(params: &PhaseParams, times: &[f64]) -> Self {
        PhaseSeries {
            times: times.to_vec(),
            values: times.iter().map(|&t| spin::psi(t, params)).collect(),
        }
    }

    pub fn from_spin_path(path: &SpinPath) -> Self {
        PhaseSeries {
            times: path.times.clone(),
            values: path.unwrapped_phase(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub max_abs_error: f64,
    pub rms_error: f64,
    pub samples: usize,
    pub pass: bool,
}

pub fn compare_phase(closed: &PhaseSeries, oracle: &PhaseSeries, tol: f64) -> Result<ComparisonReport> {
    if closed.times.len() != oracle.times.len() || closed.values.len() != closed.times.len() {
        return Err(Error::GridMismatch {
            index: closed.times.len().min(oracle.times.len()),
        });
    }
    if let Some(index) = closed.times.iter().zip(&oracle.times).position(|(a, b)| a != b) {
        return Err(Error::GridMismatch { index });
    }
    let mut max: f64 = 0.0;
    let mut sum_sq = 0.0;
    for (a, b) in closed.values.iter().zip(&oracle.values) {
        let e = (a - b).abs();
        max = max.max(e);
        sum_sq += e * e;
    }
    let samples = closed.values.len();
    let rms = if samples == 0 { 0.0 } else { (sum_sq / samples as f64).sqrt() };
    Ok(ComparisonReport {
        max_abs_error: max,
        rms_error: rms,
        samples,
        pass: max <= tol,
    })
}

/// Uniform time grid of `n` points from 0 to the time at `depth`, inclusive.
pub fn time_grid(particle: &ParticleSpec, depth: f64, n: usize) -> Vec<f64> {
    let t_end = particle.time_at_depth(depth);
    let last = (n.max(2) - 1) as f64;
    (0..n.max(2)).map(|i| t_end * i as f64 / last).collect()
}

/// Closed-form phase against the integrated polar system for one entry.
///
/// `c_scale` multiplies C in the closed form only; anything but 1 should fail.
#[allow(clippy::too_many_arguments)]
pub fn check_entry(
    entry: &EntryConditions,
    particle: &ParticleSpec,
    channel: &CrystalChannel,
    depth: f64,
    steps_per_tau: usize,
    samples: usize,
    tol: f64,
    c_scale: f64,
) -> Result<ComparisonReport> {
    let traj = Trajectory::new(*entry, *particle, *channel)?;
    let params = PhaseParams::from_trajectory(&traj);
    let corrupted = PhaseParams {
        c_const: params.c_const * c_scale,
        ..params
    };
    let times = time_grid(particle, depth, samples);
    let cfg = IntegratorConfig::per_tau(traj.orbit.tau, steps_per_tau);
    let path = integrate_bmt(&traj, &params, &times, &cfg)?;
    compare_phase(
        &PhaseSeries::closed_form(&corrupted, &times),
        &PhaseSeries::from_spin_path(&path),
        tol,
    )
}

/// `n` channeled entries drawn uniformly in x0 across the channel and in
/// theta over (-theta_L, theta_L); unchanneled draws are skipped.
pub fn random_channeled_entries(
    particle: &ParticleSpec,
    channel: &CrystalChannel,
    n: usize,
    seed: u64,
) -> Result<Vec<EntryConditions>> {
    particle.validate()?;
    channel.validate()?;
    let mut rng = crate::ensemble::seeded_rng(seed);
    let tl = model::lindhard_angle(particle, channel);
    let half = channel.spacing / 2.0;
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 1000 * n.max(1) {
            return Err(Error::AllRejected { n_points: tries });
        }
        let entry = EntryConditions::new(rng.random_range(-half..half), rng.random_range(-tl..tl));
        if model::orbit_params(&entry, particle, channel).is_ok() {
            out.push(entry);
        }
    }
    Ok(out)
}
