//! Discrete Sobolev, Gevrey, Himonas-Misiolek and Kato-Masuda norms.
//!
//! Integrals over the frequency line are replaced by `L`-weighted sums over the
//! grid modes, matching the transform convention of [`crate::spectral`].
//! Before any weighting, coefficients below `ROUNDOFF_FLOOR * max|u_hat|` are
//! discarded: high-order weights amplify round-off by `|xi|^j` and would
//! otherwise report noise as norm growth.
//!
//! Factorial-weighted series are evaluated in log space so that `j!` never
//! overflows; the term sequences stop once three consecutive terms sit below
//! `SERIES_TAIL` relative to the running value.

use crate::error::{Error, Result};
use crate::spectral::{dft, RealField, SpectralField};

pub const ROUNDOFF_FLOOR: f64 = 1e-13;
pub const SERIES_TAIL: f64 = 1e-16;
pub const DEFAULT_J_MAX: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    pub sigma: f64,
    pub s: f64,
    pub m: u32,
    pub j_max: usize,
}

impl Default for NormParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            s: 2.0,
            m: 2,
            j_max: DEFAULT_J_MAX,
        }
    }
}

/// A Gevrey norm value together with the tail-growth verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GevreyNorm {
    pub value: f64,
    /// The weighted tail terms are still growing at the top of the resolved
    /// spectrum, so the continuum norm is (numerically) infinite.
    pub diverged: bool,
}

/// `(|xi_k|, |u_hat_k|)` for every coefficient above the round-off floor.
fn resolved_modes(spectrum: &SpectralField) -> Vec<(f64, f64)> {
    let floor = ROUNDOFF_FLOOR * spectrum.max_abs();
    let grid = spectrum.grid();
    spectrum
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > floor)
        .map(|(i, c)| (grid.xi(grid.mode(i)).abs(), c.norm()))
        .collect()
}

fn log_sum_exp(logs: impl Iterator<Item = f64>) -> f64 {
    let logs: Vec<f64> = logs.collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln()
}

/// `ln ||d^j u||^2_{H^s}` on the resolved modes; `-inf` for the zero field.
fn log_derivative_norm_sq(modes: &[(f64, f64)], box_length: f64, j: usize, s: f64) -> f64 {
    let terms = modes.iter().filter_map(|&(xi, amp)| {
        if j > 0 && xi == 0.0 {
            return None;
        }
        let lx = if j == 0 { 0.0 } else { 2.0 * j as f64 * xi.ln() };
        Some(box_length.ln() + s * (1.0 + xi * xi).ln() + lx + 2.0 * amp.ln())
    });
    log_sum_exp(terms)
}

/// `ln j!` for `j = 0 ..= j_max`.
fn log_factorials(j_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(j_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..=j_max {
        acc += (j as f64).ln();
        out.push(acc);
    }
    out
}

/// `( L sum_k (1 + xi_k^2)^s |u_hat_k|^2 )^{1/2}`.
pub fn sobolev_norm(u: &RealField, s: f64) -> f64 {
    weighted_norm(&dft(u), 0.0, s).value
}

/// `( L sum_k e^{2 sigma |xi_k|} (1 + xi_k^2)^s |u_hat_k|^2 )^{1/2}` with a
/// divergence verdict.
pub fn gevrey_norm(u: &RealField, sigma: f64, s: f64) -> Result<GevreyNorm> {
    gevrey_norm_of_spectrum(&dft(u), sigma, s)
}

pub fn gevrey_norm_of_spectrum(spectrum: &SpectralField, sigma: f64, s: f64) -> Result<GevreyNorm> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("Gevrey sigma must be >= 0, got {sigma}")));
    }
    Ok(weighted_norm(spectrum, sigma, s))
}

fn weighted_norm(spectrum: &SpectralField, sigma: f64, s: f64) -> GevreyNorm {
    let grid = spectrum.grid();
    let floor = ROUNDOFF_FLOOR * spectrum.max_abs();
    let log_weight = |xi: f64| 2.0 * sigma * xi.abs() + s * (1.0 + xi * xi).ln();

    let logs = spectrum.coeffs().iter().enumerate().filter_map(|(i, c)| {
        let amp = c.norm();
        (amp > floor).then(|| log_weight(grid.xi(grid.mode(i))) + 2.0 * amp.ln())
    });
    let log_sum = log_sum_exp(logs);
    let value = if log_sum == f64::NEG_INFINITY {
        0.0
    } else {
        (0.5 * (grid.box_length().ln() + log_sum)).exp()
    };

    // Tail test over the top quarter of positive modes: least-squares slope of
    // the log weighted terms against k.
    let n = grid.n_points() as i64;
    let tail: Vec<(f64, f64)> = (3 * n / 8..n / 2)
        .filter_map(|k| {
            let amp = spectrum.coeff(k).norm().max(spectrum.coeff(-k).norm());
            (amp > floor).then(|| (k as f64, log_weight(grid.xi(k)) + 2.0 * amp.ln()))
        })
        .collect();
    let diverged = tail.len() >= 2 && slope(&tail) > 0.0;
    GevreyNorm { value, diverged }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `sup_j sigma^j (j+1)^2 / j! ||d^j u||_{H^{2m}}` over `j = 0 ..= j_max`.
pub fn hm_norm(u: &RealField, sigma: f64, m: u32, j_max: usize) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    if m < 2 {
        return Err(Error::Domain(format!("derivative index m must be >= 2, got {m}")));
    }
    if j_max < 3 {
        return Err(Error::Domain(format!("j_max must be >= 3, got {j_max}")));
    }
    let spectrum = dft(u);
    let modes = resolved_modes(&spectrum);
    if modes.is_empty() {
        return Ok(0.0);
    }
    let lnfact = log_factorials(j_max);
    let box_length = u.grid().box_length();
    let mut log_sup = f64::NEG_INFINITY;
    let mut quiet_run = 0;
    for j in 0..=j_max {
        let log_norm = 0.5 * log_derivative_norm_sq(&modes, box_length, j, 2.0 * m as f64);
        let log_term = j as f64 * sigma.ln() + 2.0 * ((j + 1) as f64).ln() - lnfact[j] + log_norm;
        log_sup = log_sup.max(log_term);
        if log_term - log_sup < SERIES_TAIL.ln() {
            quiet_run += 1;
            if quiet_run == 3 {
                return Ok(log_sup.exp());
            }
        } else {
            quiet_run = 0;
        }
    }
    Err(Error::Truncation(format!(
        "Himonas-Misiolek terms still above {SERIES_TAIL:e} of the supremum at j = {j_max}"
    )))
}

/// `1/2 sum_{j=0}^{m} e^{2 sigma j} / (j!)^2 ||d^j u||^2_{H^2}`.
pub fn km_phi(u: &RealField, sigma: f64, m: usize) -> f64 {
    let spectrum = dft(u);
    let modes = resolved_modes(&spectrum);
    if modes.is_empty() {
        return 0.0;
    }
    let lnfact = log_factorials(m);
    let box_length = u.grid().box_length();
    let logs = (0..=m).map(|j| {
        2.0 * sigma * j as f64 - 2.0 * lnfact[j] + log_derivative_norm_sq(&modes, box_length, j, 2.0)
    });
    0.5 * log_sum_exp(logs).exp()
}

/// `||u||_{sigma,2} = lim_m (2 Phi_{sigma,m}(u))^{1/2}`, summed until the tail
/// rule is met.
pub fn km_radius_norm(u: &RealField, sigma: f64, j_max: usize) -> Result<f64> {
    let spectrum = dft(u);
    let modes = resolved_modes(&spectrum);
    if modes.is_empty() {
        return Ok(0.0);
    }
    let lnfact = log_factorials(j_max);
    let box_length = u.grid().box_length();
    let mut logs = Vec::with_capacity(j_max + 1);
    let mut quiet_run = 0;
    for j in 0..=j_max {
        let log_term =
            2.0 * sigma * j as f64 - 2.0 * lnfact[j] + log_derivative_norm_sq(&modes, box_length, j, 2.0);
        logs.push(log_term);
        let running = log_sum_exp(logs.iter().copied());
        if log_term - running < SERIES_TAIL.ln() {
            quiet_run += 1;
            if quiet_run == 3 {
                return Ok((0.5 * running).exp());
            }
        } else {
            quiet_run = 0;
        }
    }
    Err(Error::Truncation(format!(
        "Kato-Masuda series not converged by j = {j_max} at sigma = {sigma}; \
         the field is not resolved in a strip of width e^sigma"
    )))
}
