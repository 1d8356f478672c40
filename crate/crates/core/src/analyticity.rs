//! Spatial analyticity radius: an empirical estimate from Fourier decay and the
//! explicit Kato-Masuda lower bound
//!
//! ```text
//! sigma(t) = gamma - lambda (exp(A(mu) t / 2) - 1),   r(t) = exp(sigma(t))
//! A(p)    = (32 + 16|b| + 64|3-b|) p
//! B(p, q) = (64 + 32|b| + 256|3-b|) (1 + p) q^{1/2}
//! ```
//!
//! with `lambda = 2 B(mu, Phi_0) / A(mu)`, obtained by integrating
//! `dPhi/dt = A(mu) Phi`, `dsigma/dt = -B(mu, Phi)` in closed form.

use crate::dynamics::BParam;
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::norms::{km_phi, sobolev_norm, ROUNDOFF_FLOOR};
use crate::spectral::SpectralField;

pub const DEFAULT_FIT_K_MIN: usize = 4;
pub const DEFAULT_M_TRUNC: usize = 32;
const MIN_BAND: usize = 8;
/// Second-half slope over first-half slope above which decay is reported as
/// faster than exponential.
const SUPER_EXPONENTIAL_RATIO: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub k_min: usize,
    /// Relative floor: modes with `|u_hat_k| <= floor * max|u_hat|` are unusable.
    pub floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            k_min: DEFAULT_FIT_K_MIN,
            floor: ROUNDOFF_FLOOR,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusFit {
    /// Fitted exponential decay rate of `|u_hat|` in `|xi|`, clamped at zero.
    pub sigma_hat: f64,
    /// Weighted coefficient of determination of the log-linear fit.
    pub fit_quality: f64,
    /// Inclusive mode range `(k_min, k_max)` used by the fit.
    pub band: (usize, usize),
    /// The band ended because the spectrum dropped to the floor.
    pub floor_hit: bool,
    /// Upper half of the band decays markedly faster than the lower half.
    pub super_exponential: bool,
}

struct LineFit {
    slope: f64,
    r_squared: f64,
}

fn weighted_line_fit(points: &[(f64, f64, f64)]) -> LineFit {
    let wsum: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / wsum;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / wsum;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    LineFit { slope, r_squared }
}

/// Fits `log|u_hat_k| ~ c - sigma |xi_k|` over the contiguous band of positive
/// modes `k >= k_min` that stay above the floor. Each mode is weighted by its
/// height above the floor in log units, so modes near round-off count least.
pub fn fit_decay_radius(spectrum: &SpectralField, opts: FitOptions) -> Result<RadiusFit> {
    let grid = spectrum.grid();
    let floor = opts.floor * spectrum.max_abs();
    let k_top = grid.n_points() / 2 - 1;
    let start = opts.k_min.max(1);

    let mut points = Vec::new();
    let mut floor_hit = false;
    let mut k_max = start;
    for k in start..=k_top {
        // magnitudes of k and -k agree for real fields; take the larger for safety
        let amp = spectrum.coeff(k as i64).norm().max(spectrum.coeff(-(k as i64)).norm());
        if !(amp > floor) {
            floor_hit = true;
            break;
        }
        let weight = if floor > 0.0 { (amp / floor).ln() } else { 1.0 };
        points.push((-grid.xi(k as i64), amp.ln(), weight));
        k_max = k;
    }
    if points.len() < MIN_BAND {
        return Err(Error::InsufficientBand(format!(
            "only {} usable modes at k >= {} (need {MIN_BAND})",
            points.len(),
            start
        )));
    }

    let fit = weighted_line_fit(&points);
    let half = points.len() / 2;
    let low = weighted_line_fit(&points[..half]).slope;
    let high = weighted_line_fit(&points[half..]).slope;
    let super_exponential = low > 0.0 && high > SUPER_EXPONENTIAL_RATIO * low;

    Ok(RadiusFit {
        sigma_hat: fit.slope.max(0.0),
        fit_quality: fit.r_squared,
        band: (start, k_max),
        floor_hit,
        super_exponential,
    })
}

/// The rate and shrinkage constants `(A(p), B(p, q))`.
pub fn km_constants(b: BParam, p: f64, q: f64) -> Result<(f64, f64)> {
    if !(p >= 0.0 && q >= 0.0) {
        return Err(Error::Domain(format!("A and B need p, q >= 0, got p = {p}, q = {q}")));
    }
    let bv = b.value();
    let a = (32.0 + 16.0 * bv.abs() + 64.0 * (3.0 - bv).abs()) * p;
    let bb = (64.0 + 32.0 * bv.abs() + 256.0 * (3.0 - bv).abs()) * (1.0 + p) * q.sqrt();
    Ok((a, bb))
}

/// `lambda = 2 B(mu, Phi_0) / A(mu)`.
pub fn km_lambda(b: BParam, mu: f64, phi0: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    if !(phi0 >= 0.0) {
        return Err(Error::Domain(format!("Phi_0 must be non-negative, got {phi0}")));
    }
    let (a, bb) = km_constants(b, mu, phi0)?;
    Ok(2.0 * bb / a)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KmBound {
    pub b: BParam,
    /// `1 + max_t ||u(t)||_{H^2}`.
    pub mu: f64,
    /// `K = A(mu)`.
    pub k_rate: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub phi0: f64,
}

impl KmBound {
    pub fn new(b: BParam, mu: f64, gamma: f64, phi0: f64) -> Result<Self> {
        if !(gamma < 0.0) {
            return Err(Error::Domain(format!("gamma must be negative, got {gamma}")));
        }
        let lambda = km_lambda(b, mu, phi0)?;
        let (k_rate, _) = km_constants(b, mu, 0.0)?;
        Ok(Self {
            b,
            mu,
            k_rate,
            gamma,
            lambda,
            phi0,
        })
    }

    /// `sigma(t) = gamma - lambda (e^{K t / 2} - 1)`.
    pub fn sigma(&self, t: f64) -> f64 {
        self.gamma - self.lambda * (0.5 * self.k_rate * t).exp_m1()
    }

    /// Certified strip width `r(t) = e^{sigma(t)}`.
    pub fn radius(&self, t: f64) -> f64 {
        self.sigma(t).exp()
    }
}

/// Initial strip parameter tied to the measured decay rate and kept strictly
/// negative. Without a usable fit the upper clip `-0.05` is returned.
pub fn default_gamma(sigma_hat0: f64) -> f64 {
    const CLIP: f64 = -0.05;
    if sigma_hat0.is_finite() && sigma_hat0 > 0.0 {
        (0.9 * sigma_hat0.min(1.0)).ln().min(CLIP)
    } else {
        CLIP
    }
}

/// Populates the bound from a completed run: `mu` from the sampled `H^2`
/// norms, `Phi_0 = Phi_{gamma, m_trunc}(u(0))`.
pub fn km_bound_from_run(traj: &Trajectory, gamma: f64, m_trunc: usize) -> Result<KmBound> {
    if traj.snapshots.is_empty() {
        return Err(Error::Config("empty trajectory".into()));
    }
    let max_h2 = traj
        .snapshots
        .iter()
        .map(|(_, u)| sobolev_norm(u, 2.0))
        .fold(0.0, f64::max);
    let phi0 = km_phi(traj.initial(), gamma, m_trunc);
    if !phi0.is_finite() {
        return Err(Error::Truncation(format!(
            "Phi at sigma = {gamma} with {m_trunc} terms is not finite"
        )));
    }
    KmBound::new(traj.b, 1.0 + max_h2, gamma, phi0)
}
