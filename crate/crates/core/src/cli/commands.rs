//! Subcommands. Each writes its CSV files into the output directory and
//! returns their paths.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::ensemble::{self, CrystalMode, DepthScan, Divergence};
use crate::oracle;
use crate::spin::{self, PhaseParams};
use crate::trajectory::Trajectory;

use super::config::RunConfig;
use super::csv::{self, Table};
use super::{svg, CliError};

const NORM_TOLERANCE: f64 = 1e-9;

fn output_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    let dir = cfg.output.dir.as_path();
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(dir)
}

fn emit(cfg: &RunConfig, name: &str, table: &Table) -> Result<PathBuf, CliError> {
    let path = output_dir(cfg)?.join(name);
    csv::write(&path, table)?;
    if cfg.output.emit_svg {
        svg::write_from_csv(&path)?;
    }
    Ok(path)
}

fn per_theta_name(prefix: &str, theta_frac: f64) -> String {
    format!("{prefix}_theta{theta_frac}.csv")
}

fn log_counts(name: &str, scan: &DepthScan) {
    log::info!("{name}: {} channeled, {} rejected", scan.n_channeled, scan.n_rejected);
}

fn scan_table(scan: &DepthScan) -> Table {
    Table::from_columns(
        &["depth_m", "avg_zeta_x", "avg_zeta_y", "avg_phi_rad"],
        &[&scan.depths, &scan.avg_zeta_x, &scan.avg_zeta_y, &scan.avg_phi],
    )
}

/// Read a written single-trajectory CSV back and check it.
pub fn verify_single(path: &Path, n_rows: usize) -> Result<(), CliError> {
    let table = csv::read(path)?;
    if table.rows.len() != n_rows {
        return Err(CliError::Validation(format!(
            "{} has {} data rows, expected {n_rows}",
            path.display(),
            table.rows.len()
        )));
    }
    for (i, row) in table.rows.iter().enumerate() {
        let norm = (row[1] * row[1] + row[2] * row[2] + row[3] * row[3]).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(CliError::Validation(format!("row {} has |zeta| = {norm}", i + 1)));
        }
    }
    Ok(())
}

pub fn single(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let particle = cfg.particle();
    let traj = Trajectory::new(cfg.entry(), particle, cfg.channel())?;
    let params = PhaseParams::from_trajectory(&traj);
    let depths = cfg.ensemble_for(cfg.entry.theta_frac).depths();

    let n = depths.len();
    let (mut zx, mut zy, mut zz, mut phi) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for &d in &depths {
        let t = particle.time_at_depth(d);
        let state = spin::spin_polar(t, &params, cfg.entry.zeta_z0);
        let (x, y) = state.cartesian(traj.phi(t), cfg.entry.initial);
        zx.push(x);
        zy.push(y);
        zz.push(state.zeta_z);
        phi.push(spin::rotation_angle(y, x)?);
    }
    let table = Table::from_columns(
        &["depth_m", "zeta_x", "zeta_y", "zeta_z", "phi_rad"],
        &[&depths, &zx, &zy, &zz, &phi],
    );
    let path = emit(cfg, "single.csv", &table)?;
    verify_single(&path, n)?;
    Ok(vec![path])
}

fn averaged(cfg: &RunConfig, prefix: &str, divergence: Divergence) -> Result<Vec<PathBuf>, CliError> {
    let (particle, channel) = (cfg.particle(), cfg.channel());
    let mut written = Vec::new();
    for &frac in &cfg.ensemble.theta_fracs {
        let scan = ensemble::average_components(
            &cfg.ensemble_for(frac),
            &particle,
            &channel,
            CrystalMode::Bent,
            divergence,
        )?;
        let name = per_theta_name(prefix, frac);
        log_counts(&name, &scan);
        written.push(emit(cfg, &name, &scan_table(&scan))?);
    }
    Ok(written)
}

pub fn ensemble(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    averaged(cfg, "ensemble", Divergence::Off)
}

pub fn divergence(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    averaged(cfg, "divergence", Divergence::On)
}

pub fn curvature(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (particle, channel) = (cfg.particle(), cfg.channel());
    let mut written = Vec::new();
    for &frac in &cfg.ensemble.theta_fracs {
        let cs = ensemble::curvature_contribution(&cfg.ensemble_for(frac), &particle, &channel, Divergence::Off)?;
        let name = per_theta_name("curvature", frac);
        log_counts(&name, &cs.bent);
        let table = Table::from_columns(
            &["depth_m", "phi_cr_rad", "phi_lyub_rad"],
            &[&cs.depths, &cs.phi_cr, &cs.phi_lyuboshitz],
        );
        written.push(emit(cfg, &name, &table)?);
    }
    Ok(written)
}

pub fn omega_scaled(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (particle, channel) = (cfg.particle(), cfg.channel());
    let mut written = Vec::new();
    for &frac in &cfg.ensemble.theta_fracs {
        let ec = cfg.ensemble_for(frac);
        let bent = ensemble::scaled_omega_scan(
            &ec,
            &particle,
            &channel,
            CrystalMode::Bent,
            Divergence::Off,
            cfg.ensemble.omega_scale,
        )?;
        let straight = ensemble::average_components(&ec, &particle, &channel, CrystalMode::Straight, Divergence::Off)?;
        let name = per_theta_name("omega_scaled", frac);
        log_counts(&name, &bent);
        let table = Table::from_columns(
            &[
                "depth_m",
                "bent_avg_zeta_x",
                "bent_avg_zeta_y",
                "straight_avg_zeta_x",
                "straight_avg_zeta_y",
            ],
            &[
                &bent.depths,
                &bent.avg_zeta_x,
                &bent.avg_zeta_y,
                &straight.avg_zeta_x,
                &straight.avg_zeta_y,
            ],
        );
        written.push(emit(cfg, &name, &table)?);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntryResult {
    pub x0: f64,
    pub theta: f64,
    pub max_abs_error: f64,
    pub rms_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub entries: Vec<OracleEntryResult>,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn max_abs_error(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs_error).fold(0.0, f64::max)
    }

    pub fn rms_error(&self) -> f64 {
        let n = self.entries.len().max(1) as f64;
        (self.entries.iter().map(|e| e.rms_error * e.rms_error).sum::<f64>() / n).sqrt()
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(
                out,
                "entry {i}: x0 = {:.6e} m, theta = {:.6e} rad, max = {:.3e} rad, rms = {:.3e} rad, {}",
                e.x0,
                e.theta,
                e.max_abs_error,
                e.rms_error,
                if e.pass { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "max = {:.3e} rad, rms = {:.3e} rad, tolerance = {:.1e} rad: {}",
            self.max_abs_error(),
            self.rms_error(),
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }

    pub fn into_result(self) -> Result<(), CliError> {
        if self.passed() {
            Ok(())
        } else {
            Err(CliError::OracleFailed {
                failed: self.entries.iter().filter(|e| !e.pass).count(),
                total: self.entries.len(),
                tolerance: self.tolerance,
            })
        }
    }
}

pub fn oracle_check(cfg: &RunConfig) -> Result<OracleReport, CliError> {
    let (particle, channel) = (cfg.particle(), cfg.channel());
    let o = &cfg.oracle;
    let entries = oracle::random_channeled_entries(&particle, &channel, o.entries, o.seed)?;
    let mut results = Vec::with_capacity(entries.len());
    for entry in &entries {
        let report = oracle::check_entry(
            entry,
            &particle,
            &channel,
            o.depth,
            o.steps_per_tau,
            o.samples,
            o.tolerance,
            o.c_corruption,
        )?;
        results.push(OracleEntryResult {
            x0: entry.x0,
            theta: entry.theta,
            max_abs_error: report.max_abs_error,
            rms_error: report.rms_error,
            pass: report.pass,
        });
    }
    Ok(OracleReport {
        entries: results,
        tolerance: o.tolerance,
    })
}
