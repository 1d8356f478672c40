//! Periodic grid, discrete Fourier transforms and Fourier multipliers.
//!
//! Conventions used everywhere in the crate:
//!
//! * nodes `x_j = j L / N`, `j = 0 .. N-1`;
//! * mode `k` has continuous frequency `xi_k = 2 pi k / L`;
//! * `u_hat_k = (1/N) sum_j u(x_j) exp(-i xi_k x_j)`, i.e. the coefficient of the
//!   Fourier series, so `L * sum_k |u_hat_k|^2` is the discrete `L^2` norm squared.
//!
//! Spectral coefficients are stored in FFT order: index `i < N/2` holds mode
//! `k = i`, index `i >= N/2` holds mode `k = i - N`. The Nyquist slot `i = N/2`
//! is mode `k = -N/2`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    n_points: usize,
    box_length: f64,
    dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, box_length: f64) -> Result<Self> {
        if n_points < MIN_POINTS || !n_points.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid size must be even and at least {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::Config(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self {
            n_points,
            box_length,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
        })
    }

    pub fn with_dealias_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Config(format!(
                "dealias fraction must lie in (0, 1], got {fraction}"
            )));
        }
        self.dealias_fraction = fraction;
        Ok(self)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n_points as f64
    }

    /// Grid nodes `x_j = j L / N`.
    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|j| j as f64 * dx).collect()
    }

    /// Integer mode number stored at FFT index `index`.
    pub fn mode(&self, index: usize) -> i64 {
        let n = self.n_points as i64;
        let i = index as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index of mode `k`, for `-N/2 <= k < N/2`.
    pub fn index(&self, k: i64) -> usize {
        let n = self.n_points as i64;
        debug_assert!(-n / 2 <= k && k < n / 2, "mode {k} outside grid");
        k.rem_euclid(n) as usize
    }

    /// Continuous frequency of mode `k`.
    pub fn xi(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.box_length
    }

    /// Frequencies in FFT storage order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.xi(self.mode(i))).collect()
    }

    /// Largest retained `|k|` under the dealias rule.
    pub fn dealias_cutoff(&self) -> usize {
        let half = (self.n_points / 2) as f64;
        // the small nudge keeps exact products such as 1.0 * N/2 from rounding down
        (self.dealias_fraction * half + 1e-9).floor() as usize
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::Config(format!(
                "field has {} samples, grid expects {}",
                samples.len(),
                grid.n_points
            )));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite sample at node {j}")));
        }
        Ok(Self { grid, samples })
    }

    /// Samples `f(x_j)` of a closure on the grid nodes.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.n_points],
        }
    }

    /// Caller guarantees length; finiteness is checked by whoever consumes the result.
    pub(crate) fn from_raw(grid: GridSpec, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n_points);
        Self { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoid rule on the periodic grid (equal weights `L/N`).
    pub fn integrate(&self) -> f64 {
        self.grid.dx() * self.samples.iter().sum::<f64>()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_raw(self.grid, self.samples.iter().map(|v| alpha * v).collect())
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &RealField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self::from_raw(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &RealField) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn to_spectral(&self) -> SpectralField {
        dft(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points {
            return Err(Error::Config(format!(
                "spectrum has {} coefficients, grid expects {}",
                coeffs.len(),
                grid.n_points
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Builds a spectrum from a closure of the mode number `k`.
    pub fn from_modes(grid: GridSpec, f: impl Fn(i64) -> Complex64) -> Self {
        let coeffs = (0..grid.n_points).map(|i| f(grid.mode(i))).collect();
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Coefficients in FFT storage order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index(k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    /// Multiplies every coefficient by `multiplier(xi_k)`.
    pub fn apply_multiplier(&self, multiplier: impl Fn(f64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * multiplier(self.grid.xi(self.grid.mode(i))))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Zeroes coefficients with `|c| < threshold`.
    pub fn filtered_below(&self, threshold: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.norm() < threshold { Complex64::new(0.0, 0.0) } else { *c })
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    pub fn to_real(&self) -> RealField {
        idft(self)
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let mut cache = CACHE
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner());
    let entry = cache.entry(n).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    });
    (entry.forward.clone(), entry.inverse.clone())
}

/// Forward transform, normalised to Fourier-series coefficients.
pub fn dft(field: &RealField) -> SpectralField {
    let n = field.grid.n_points;
    let (forward, _) = plans(n);
    let mut buffer: Vec<Complex64> = field
        .samples
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    forward.process(&mut buffer);
    let scale = 1.0 / n as f64;
    for c in &mut buffer {
        *c *= scale;
    }
    SpectralField {
        grid: field.grid,
        coeffs: buffer,
    }
}

/// Inverse transform; the imaginary part (zero for Hermitian spectra) is discarded.
pub fn idft(spectrum: &SpectralField) -> RealField {
    let n = spectrum.grid.n_points;
    let (_, inverse) = plans(n);
    let mut buffer = spectrum.coeffs.clone();
    inverse.process(&mut buffer);
    RealField::from_raw(spectrum.grid, buffer.into_iter().map(|c| c.re).collect())
}

/// `d^order/dx^order`, i.e. multiplication by `(i xi_k)^order`. The Nyquist mode
/// is dropped for odd orders.
pub fn deriv(spectrum: &SpectralField, order: u32) -> SpectralField {
    if order == 0 {
        return spectrum.clone();
    }
    let grid = spectrum.grid;
    // i^order cycles through 1, i, -1, -i
    let phase = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut out = spectrum.apply_multiplier(|xi| phase * xi.powi(order as i32));
    if order % 2 == 1 {
        out.coeffs[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
    }
    out
}

/// Inverse of the Helmholtz operator `1 - d^2/dx^2`: division by `1 + xi^2`.
pub fn helmholtz_inv(spectrum: &SpectralField) -> SpectralField {
    spectrum.apply_multiplier(|xi| Complex64::new(1.0 / (1.0 + xi * xi), 0.0))
}

/// The Helmholtz operator `1 - d^2/dx^2`: multiplication by `1 + xi^2`.
pub fn helmholtz(spectrum: &SpectralField) -> SpectralField {
    spectrum.apply_multiplier(|xi| Complex64::new(1.0 + xi * xi, 0.0))
}

/// Zeroes every mode with `|k|` above the dealias cutoff.
pub fn dealias(spectrum: &SpectralField) -> SpectralField {
    let grid = spectrum.grid;
    let cutoff = grid.dealias_cutoff() as i64;
    let coeffs = spectrum
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if grid.mode(i).abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                *c
            }
        })
        .collect();
    SpectralField { grid, coeffs }
}

/// Pointwise product of two fields on the same grid.
pub fn product(a: &RealField, b: &RealField) -> RealField {
    debug_assert_eq!(a.grid, b.grid);
    RealField::from_raw(
        a.grid,
        a.samples.iter().zip(&b.samples).map(|(x, y)| x * y).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn two_pi_grid(n: usize) -> GridSpec {
        GridSpec::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        let g = two_pi_grid(256);
        assert_eq!(g.dealias_fraction(), 2.0 / 3.0);
        for k in [-5_i64, 0, 1, 17] {
            assert!((g.xi(k) - k as f64).abs() < 1e-12);
        }
        let g = GridSpec::new(8, 1.0).unwrap();
        assert!((g.xi(1) - 2.0 * PI).abs() < 1e-14);
        assert!(matches!(GridSpec::new(7, 2.0 * PI), Err(Error::Config(_))));
        assert!(matches!(GridSpec::new(6, 2.0 * PI), Err(Error::Config(_))));
        assert!(matches!(GridSpec::new(16, 0.0), Err(Error::Config(_))));
        assert!(matches!(GridSpec::new(16, -1.0), Err(Error::Config(_))));
        assert!(two_pi_grid(16).with_dealias_fraction(0.0).is_err());
    }

    #[test]
    fn mode_layout() {
        let g = two_pi_grid(8);
        let modes: Vec<i64> = (0..8).map(|i| g.mode(i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(g.mode(g.index(k)), k);
        }
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = two_pi_grid(8);
        let mut s = vec![0.0; 8];
        s[3] = f64::NAN;
        assert!(matches!(RealField::new(g, s), Err(Error::Numerical(_))));
        assert!(RealField::new(g, vec![0.0; 6]).is_err());
    }

    #[test]
    fn cosine_and_constant_spectra() {
        let g = two_pi_grid(64);
        let f = RealField::from_fn(g, f64::cos).unwrap().to_spectral();
        for i in 0..64 {
            let k = g.mode(i);
            let expected = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.coeffs()[i] - Complex64::new(expected, 0.0)).norm() < 1e-14, "k={k}");
        }
        let one = RealField::from_fn(g, |_| 1.0).unwrap().to_spectral();
        assert!((one.coeff(0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(one.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn random_round_trip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for &n in &[8usize, 64, 250, 4096] {
            let g = GridSpec::new(n, 3.7).unwrap();
            let f = RealField::new(g, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let back = idft(&dft(&f));
            assert!(back.max_abs_diff(&f) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn parseval_for_smooth_field() {
        let g = GridSpec::new(128, 10.0).unwrap();
        let f = RealField::from_fn(g, |x| (2.0 * PI * x / 10.0).sin().exp()).unwrap();
        let spectral = g.box_length() * f.to_spectral().coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        let trapezoid = product(&f, &f).integrate();
        assert!((spectral - trapezoid).abs() / spectral < 1e-10);
    }

    #[test]
    fn derivatives_of_sine() {
        let g = two_pi_grid(64);
        let sin = RealField::from_fn(g, f64::sin).unwrap().to_spectral();
        let cos = RealField::from_fn(g, f64::cos).unwrap().to_spectral();
        let d1 = deriv(&sin, 1);
        for (a, b) in d1.coeffs().iter().zip(cos.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert_eq!(deriv(&sin, 0), sin);
        let d2 = deriv(&sin, 2);
        let minus_sin = sin.scale(-1.0);
        for (a, b) in d2.coeffs().iter().zip(minus_sin.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn odd_derivative_drops_nyquist() {
        let g = two_pi_grid(16);
        let f = SpectralField::from_modes(g, |_| Complex64::new(1.0, 0.0));
        let d = deriv(&f, 3);
        assert_eq!(d.coeffs()[g.nyquist_index()], Complex64::new(0.0, 0.0));
        let d2 = deriv(&f, 2);
        assert!((d2.coeffs()[g.nyquist_index()].re + 64.0).abs() < 1e-12);
    }

    #[test]
    fn helmholtz_inverse_examples() {
        let g = two_pi_grid(64);
        let c2 = RealField::from_fn(g, |x| (2.0 * x).cos()).unwrap();
        let got = helmholtz_inv(&c2.to_spectral()).to_real();
        let want = RealField::from_fn(g, |x| (2.0 * x).cos() / 5.0).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-14);
        let one = RealField::from_fn(g, |_| 1.0).unwrap();
        assert!(helmholtz_inv(&one.to_spectral()).to_real().max_abs_diff(&one) < 1e-15);
    }

    #[test]
    fn helmholtz_round_trip_and_commutation() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let g = GridSpec::new(128, 5.0).unwrap();
        let f = RealField::new(g, (0..128).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let fh = f.to_spectral();
        // (1 - d^2) written through deriv, then inverted
        let forward = fh.add(&deriv(&fh, 2).scale(-1.0));
        let back = helmholtz_inv(&forward);
        for (a, b) in back.coeffs().iter().zip(fh.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
        let a = deriv(&helmholtz_inv(&fh), 1);
        let b = helmholtz_inv(&deriv(&fh, 1));
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn dealias_cutoff_rule() {
        let g = two_pi_grid(16);
        assert_eq!(g.dealias_cutoff(), 5);
        let all = SpectralField::from_modes(g, |_| Complex64::new(1.0, 0.0));
        let d = dealias(&all);
        for i in 0..16 {
            let kept = d.coeffs()[i].norm() > 0.0;
            assert_eq!(kept, g.mode(i).abs() <= 5, "k={}", g.mode(i));
        }
        let band = SpectralField::from_modes(g, |k| {
            if k.abs() <= 5 {
                Complex64::new(1.0 / (1 + k.abs()) as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert_eq!(dealias(&band), band);
        assert_eq!(g.with_dealias_fraction(1.0).unwrap().dealias_cutoff(), 8);
    }

    #[test]
    fn dealiased_product_matches_fine_grid() {
        // sin(5x)^2 = 1/2 - cos(10x)/2; mode 10 aliases onto k = -6 on N = 16.
        let coarse = two_pi_grid(16);
        let fine = two_pi_grid(64);
        let prod = |g: GridSpec| {
            let s = RealField::from_fn(g, |x| (5.0 * x).sin()).unwrap();
            dealias(&dft(&product(&s, &s)))
        };
        let pc = prod(coarse);
        let pf = prod(fine);
        for k in -5..=5_i64 {
            assert!((pc.coeff(k) - pf.coeff(k)).norm() < 1e-14, "k={k}");
        }
        // without dealiasing the aliased energy is visible
        let s = RealField::from_fn(coarse, |x| (5.0 * x).sin()).unwrap();
        let raw = dft(&product(&s, &s));
        assert!((raw.coeff(6).norm() - 0.25).abs() < 1e-14);
    }
}
