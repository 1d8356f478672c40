//! Config -> initial datum -> evolution -> diagnostics -> files.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};

use crate::analyticity::{default_gamma, fit_decay_radius, km_bound_from_run, FitOptions, KmBound, RadiusFit};
use crate::error::{Error, Result};
use crate::evolve::{self, Monitor, Trajectory};
use crate::norms::{gevrey_norm, ROUNDOFF_FLOOR};
use crate::scenario::config::RunConfig;
use crate::scenario::diagnostics::{emit_diagnostics, DiagnosticsRow};
use crate::scenario::init::initial_data;
use crate::scenario::snapshot::{write_snapshot, Snapshot};

pub const CONFIG_FILE: &str = "config.toml";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const GEVREY_FILE: &str = "gevrey.csv";
pub const INITIAL_SNAPSHOT: &str = "initial.bgev";
pub const FINAL_SNAPSHOT: &str = "final.bgev";
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub rows: Vec<DiagnosticsRow>,
    pub fits: Vec<Option<RadiusFit>>,
    pub bound: KmBound,
}

/// Decay fits for every snapshot, then the Kato-Masuda bound over the whole run.
pub fn diagnose(
    traj: &Trajectory,
    fit: FitOptions,
    gamma_override: Option<f64>,
    m_trunc: usize,
) -> Result<Diagnostics> {
    let fits: Vec<Option<RadiusFit>> = traj
        .snapshots
        .iter()
        .map(|(t, u)| match fit_decay_radius(&u.to_spectral(), fit) {
            Ok(f) => {
                if f.super_exponential {
                    warn!("t = {t}: spectrum decays faster than exponentially; sigma_hat is band-limited");
                }
                Some(f)
            }
            Err(err) => {
                warn!("t = {t}: radius fit failed: {err}");
                None
            }
        })
        .collect();
    let sigma_hat0 = fits[0].map_or(f64::NAN, |f| f.sigma_hat);
    let gamma = gamma_override.unwrap_or_else(|| default_gamma(sigma_hat0));
    let bound = km_bound_from_run(traj, gamma, m_trunc)?;

    let column = |name: &str| traj.monitor(name);
    let (l2, h1, h2, mean_u, m_l1, m_min) = match (
        column("l2"),
        column("h1"),
        column("h2"),
        column("mean_u"),
        column("m_l1"),
        column("m_min"),
    ) {
        (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) => (a, b, c, d, e, f),
        _ => return Err(Error::Config("trajectory lacks the standard monitors".into())),
    };
    let rows = traj
        .records
        .iter()
        .enumerate()
        .map(|(i, rec)| DiagnosticsRow {
            t: rec.t,
            l2: l2[i],
            h1: h1[i],
            h2: h2[i],
            mean_u: mean_u[i],
            m_l1: m_l1[i],
            m_min: m_min[i],
            sigma_hat: fits[i].map_or(f64::NAN, |f| f.sigma_hat),
            fit_quality: fits[i].map_or(f64::NAN, |f| f.fit_quality),
            km_sigma_bound: bound.sigma(rec.t),
            dt_used: rec.dt_used,
        })
        .collect();
    Ok(Diagnostics { rows, fits, bound })
}

/// Runs the evolution described by `cfg` without touching the file system.
pub fn simulate(cfg: &RunConfig) -> Result<(Trajectory, Diagnostics)> {
    let grid = cfg.grid_spec()?;
    let u0 = initial_data(&cfg.init, grid)?;
    let traj = evolve::run(&u0, &cfg.evolve_config()?, &Monitor::standard())?;
    let diag = diagnose(&traj, fit_options(cfg), cfg.diagnostics.gamma_override, cfg.diagnostics.m_trunc)?;
    Ok((traj, diag))
}

pub fn fit_options(cfg: &RunConfig) -> FitOptions {
    FitOptions {
        k_min: cfg.diagnostics.fit_k_min,
        floor: ROUNDOFF_FLOOR,
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub trajectory: Trajectory,
    pub diagnostics: Diagnostics,
}

fn unix_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_manifest(dir: &Path, start: f64, status: &str, exit_code: i32, traj: &Trajectory) -> Result<()> {
    let text = format!(
        "program = \"bfamily {}\"\nstart_unix_time = {start:.3}\nend_unix_time = {:.3}\n\
         status = \"{status}\"\nexit_code = {exit_code}\nsteps = {}\nsamples = {}\n",
        env!("CARGO_PKG_VERSION"),
        unix_seconds(),
        traj.steps_taken,
        traj.snapshots.len(),
    );
    std::fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

fn gevrey_table(traj: &Trajectory, sigmas: &[f64], s: f64) -> Result<String> {
    let mut out = String::from("t,sigma,s,gevrey_norm,diverged\n");
    for (t, u) in &traj.snapshots {
        for &sigma in sigmas {
            let g = gevrey_norm(u, sigma, s)?;
            out.push_str(&format!("{t:.16e},{sigma:.16e},{s:.16e},{:.16e},{}\n", g.value, g.diverged));
        }
    }
    Ok(out)
}

fn write_outputs(cfg: &RunConfig, dir: &Path, traj: &Trajectory, diag: Option<&Diagnostics>) -> Result<()> {
    let b = cfg.b;
    let (t0, u0) = &traj.snapshots[0];
    write_snapshot(&dir.join(INITIAL_SNAPSHOT), &Snapshot::new(*t0, b, u0.clone()))?;
    let (t1, u1) = traj.last();
    write_snapshot(&dir.join(FINAL_SNAPSHOT), &Snapshot::new(*t1, b, u1.clone()))?;
    if let Some(diag) = diag {
        emit_diagnostics(&diag.rows, &dir.join(DIAGNOSTICS_FILE))?;
    }
    if cfg.gevrey_enabled() {
        std::fs::write(
            dir.join(GEVREY_FILE),
            gevrey_table(traj, &cfg.diagnostics.sigma_list, cfg.diagnostics.s)?,
        )?;
    }
    Ok(())
}

/// Full pipeline: every run directory receives the config copy, diagnostics,
/// initial and final snapshots and a manifest, also when the run blows up.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary> {
    let start = unix_seconds();
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join(CONFIG_FILE), cfg.to_toml())?;

    let grid = cfg.grid_spec()?;
    let u0 = initial_data(&cfg.init, grid)?;
    info!("running b = {} on N = {}, L = {}", cfg.b, grid.n_points(), grid.box_length());
    let traj = match evolve::run(&u0, &cfg.evolve_config()?, &Monitor::standard()) {
        Ok(traj) => traj,
        Err(Error::BlowUp { time, reason, partial }) => {
            let err = Error::BlowUp {
                time,
                reason,
                partial: partial.clone(),
            };
            let diag = diagnose(&partial, fit_options(cfg), cfg.diagnostics.gamma_override, cfg.diagnostics.m_trunc).ok();
            write_outputs(cfg, &dir, &partial, diag.as_ref())?;
            write_manifest(&dir, start, "blowup", err.exit_code(), &partial)?;
            return Err(err);
        }
        Err(err) => return Err(err),
    };
    let diag = match diagnose(&traj, fit_options(cfg), cfg.diagnostics.gamma_override, cfg.diagnostics.m_trunc) {
        Ok(d) => d,
        Err(err) => {
            write_outputs(cfg, &dir, &traj, None)?;
            write_manifest(&dir, start, "diagnostics_failed", err.exit_code(), &traj)?;
            return Err(err);
        }
    };
    write_outputs(cfg, &dir, &traj, Some(&diag))?;
    write_manifest(&dir, start, "completed", 0, &traj)?;
    Ok(RunSummary {
        output_dir: dir,
        trajectory: traj,
        diagnostics: diag,
    })
}
