//! Command line front end. Exit codes: 0 success, 1 configuration, 2 numerical
//! failure (blow-up, unconverged series), 3 io / snapshot format.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::analyticity::{fit_decay_radius, FitOptions, DEFAULT_M_TRUNC};
use crate::dynamics::BParam;
use crate::error::Result;
use crate::evolve::integrate_fixed;
use crate::norms::{gevrey_norm, hm_norm, km_phi, km_radius_norm, sobolev_norm, DEFAULT_J_MAX};
use crate::scenario::pipeline::{run_pipeline, simulate};
use crate::scenario::{initial_data, read_snapshot, RunConfig};
use crate::taylor::{taylor_coeffs, DEFAULT_ORDER};

#[derive(Parser, Debug)]
#[command(name = "bfamily", version, about = "b-family pseudo-spectral analyticity laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a configured scenario and write the run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print every norm of a snapshot.
    Norms {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long)]
        s: f64,
        /// Derivative index of the Himonas-Misiolek norm.
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Fit the spatial analyticity radius of a snapshot.
    Radius {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = crate::analyticity::DEFAULT_FIT_K_MIN)]
        k_min: usize,
    },
    /// Time-Taylor coefficients, temporal radius and a stepper cross-check.
    Taylor {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
    /// Kato-Masuda bound table next to the fitted radius.
    Bound {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing reports to `out`. Returns the process exit code.
pub fn main<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{err}");
                    0
                }
                _ => {
                    let _ = err.print();
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run { config } => cmd_run(config, out),
        Command::Norms { snapshot, sigma, s, m } => cmd_norms(snapshot, sigma, s, m, out),
        Command::Radius { snapshot, k_min } => cmd_radius(snapshot, k_min, out),
        Command::Taylor { config, order } => cmd_taylor(config, order, out),
        Command::Bound { config } => cmd_bound(config, out),
    }
}

fn cmd_run(config: PathBuf, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::from_file(&config)?;
    let summary = run_pipeline(&cfg)?;
    let last = summary.diagnostics.rows.last().expect("at least the initial row");
    writeln!(out, "run completed: {} samples, {} steps", summary.trajectory.snapshots.len(), summary.trajectory.steps_taken)?;
    writeln!(out, "final t = {}, sigma_hat = {:.6}, km sigma(t) = {:.6e}", last.t, last.sigma_hat, last.km_sigma_bound)?;
    writeln!(out, "output written to {}", summary.output_dir.display())?;
    Ok(())
}

fn cmd_norms(path: PathBuf, sigma: f64, s: f64, m: u32, out: &mut dyn Write) -> Result<()> {
    let snap = read_snapshot(&path)?;
    let u = &snap.field;
    writeln!(out, "t         = {}", snap.t)?;
    writeln!(out, "b         = {}", snap.b)?;
    writeln!(out, "L2        = {:.16e}", sobolev_norm(u, 0.0))?;
    writeln!(out, "H1        = {:.16e}", sobolev_norm(u, 1.0))?;
    writeln!(out, "H2        = {:.16e}", sobolev_norm(u, 2.0))?;
    writeln!(out, "H^{s}     = {:.16e}", sobolev_norm(u, s))?;
    match gevrey_norm(u, sigma, s) {
        Ok(g) => writeln!(
            out,
            "Gevrey    = {:.16e}{}",
            g.value,
            if g.diverged { "  (diverging tail)" } else { "" }
        )?,
        Err(e) => writeln!(out, "Gevrey    = n/a ({e})")?,
    }
    match hm_norm(u, sigma, m, DEFAULT_J_MAX) {
        Ok(v) => writeln!(out, "HM(m={m})   = {v:.16e}")?,
        Err(e) => writeln!(out, "HM(m={m})   = n/a ({e})")?,
    }
    writeln!(out, "Phi(m={DEFAULT_M_TRUNC}) = {:.16e}", km_phi(u, sigma, DEFAULT_M_TRUNC))?;
    match km_radius_norm(u, sigma, DEFAULT_J_MAX) {
        Ok(v) => writeln!(out, "KM norm   = {v:.16e}")?,
        Err(e) => writeln!(out, "KM norm   = n/a ({e})")?,
    }
    Ok(())
}

fn cmd_radius(path: PathBuf, k_min: usize, out: &mut dyn Write) -> Result<()> {
    let snap = read_snapshot(&path)?;
    let fit = fit_decay_radius(
        &snap.field.to_spectral(),
        FitOptions {
            k_min,
            ..FitOptions::default()
        },
    )?;
    writeln!(out, "sigma_hat   = {:.10}", fit.sigma_hat)?;
    writeln!(out, "fit_quality = {:.10}", fit.fit_quality)?;
    writeln!(out, "band        = {}..={}", fit.band.0, fit.band.1)?;
    writeln!(out, "floor_hit   = {}", fit.floor_hit)?;
    if fit.super_exponential {
        writeln!(out, "warning: decay is faster than exponential; sigma_hat reflects the resolved band only")?;
    }
    Ok(())
}

fn cmd_taylor(config: PathBuf, order: usize, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::from_file(&config)?;
    let b: BParam = cfg.b_param()?;
    let u0 = initial_data(&cfg.init, cfg.grid_spec()?)?;
    let series = taylor_coeffs(&u0, b, order)?;
    writeln!(out, "k,l2_norm")?;
    for (k, c) in series.coeffs().iter().enumerate() {
        writeln!(out, "{k},{:.16e}", sobolev_norm(c, 0.0))?;
    }
    if series.truncated() {
        writeln!(out, "warning: series truncated at order {} (growth horizon)", series.order())?;
    }
    let radius = match series.time_radius_estimate() {
        Ok(r) => {
            writeln!(out, "time radius estimate = {r:.10e}")?;
            r
        }
        Err(e) => {
            writeln!(out, "time radius estimate = n/a ({e})")?;
            f64::INFINITY
        }
    };
    let t = (radius / 4.0).min(0.05);
    let steps = 2000;
    let stepped = integrate_fixed(&u0, b, t / steps as f64, steps)?;
    let taylor = series.eval(t);
    let diff = sobolev_norm(&taylor.axpy(-1.0, &stepped), 0.0);
    let rel = diff / sobolev_norm(&stepped, 0.0).max(f64::MIN_POSITIVE);
    writeln!(out, "stepper comparison at t = {t:.6e}: relative L2 difference = {rel:.3e}")?;
    Ok(())
}

fn cmd_bound(config: PathBuf, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::from_file(&config)?;
    let (_, diag) = simulate(&cfg)?;
    let bound = diag.bound;
    writeln!(
        out,
        "# mu = {:.10e}, K = A(mu) = {:.10e}, gamma = {:.10e}, lambda = {:.10e}, Phi0 = {:.10e}",
        bound.mu, bound.k_rate, bound.gamma, bound.lambda, bound.phi0
    )?;
    writeln!(out, "t,sigma_bound,radius_bound,sigma_hat")?;
    for row in &diag.rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            row.t,
            row.km_sigma_bound,
            row.km_sigma_bound.exp(),
            row.sigma_hat
        )?;
    }
    Ok(())
}
