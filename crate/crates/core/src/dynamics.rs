//! Right-hand side of the b-family equation
//!
//! ```text
//! u_t = -u u_x - d/dx (1 - d^2/dx^2)^{-1} ( (b/2) u^2 + ((3-b)/2) u_x^2 )
//! ```
//!
//! together with the momentum `m = u - u_xx` and the monitored functionals.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{dealias, deriv, dft, helmholtz, helmholtz_inv, idft, GridSpec, RealField};

/// Grid minima above this count as non-negative momentum.
pub const SIGN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BParam(f64);

impl BParam {
    pub fn new(b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::Config(format!("b must be finite, got {b}")));
        }
        Ok(Self(b))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Weight of `u^2` inside the nonlocal term.
    pub fn square_weight(self) -> f64 {
        self.0 / 2.0
    }

    /// Weight of `u_x^2` inside the nonlocal term.
    pub fn gradient_weight(self) -> f64 {
        (3.0 - self.0) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumField(RealField);

impl MomentumField {
    pub fn new(field: RealField) -> Self {
        Self(field)
    }

    pub fn field(&self) -> &RealField {
        &self.0
    }

    pub fn grid(&self) -> &GridSpec {
        self.0.grid()
    }

    pub fn samples(&self) -> &[f64] {
        self.0.samples()
    }
}

/// Physical-space quadratic pieces feeding the right-hand side. For a single
/// field these are `u u_x`, `u^2`, `u_x^2`; the time-Taylor recursion fills
/// them with Cauchy products instead.
pub(crate) struct QuadraticTerms {
    pub advection: Vec<f64>,
    pub square: Vec<f64>,
    pub gradient_square: Vec<f64>,
}

/// Assembles `-P[adv] - d/dx Lambda^{-2} P[(b/2) sq + ((3-b)/2) gsq]` where `P`
/// is the dealias projection.
pub(crate) fn assemble(grid: GridSpec, terms: QuadraticTerms, b: BParam) -> Result<RealField> {
    let (wb, wg) = (b.square_weight(), b.gradient_weight());
    let source: Vec<f64> = terms
        .square
        .iter()
        .zip(&terms.gradient_square)
        .map(|(s, g)| wb * s + wg * g)
        .collect();
    let advection = dealias(&dft(&RealField::from_raw(grid, terms.advection)));
    let nonlocal = deriv(&helmholtz_inv(&dealias(&dft(&RealField::from_raw(grid, source)))), 1);
    let total = advection.add(&nonlocal).apply_multiplier(|_| Complex64::new(-1.0, 0.0));
    let out = idft(&total);
    if !out.is_finite() {
        return Err(Error::Numerical("right-hand side produced non-finite values".into()));
    }
    Ok(out)
}

/// Returns `u` and `u_x` samples.
pub(crate) fn with_gradient(u: &RealField) -> (Vec<f64>, Vec<f64>) {
    let ux = idft(&deriv(&dft(u), 1));
    (u.samples().to_vec(), ux.into_samples())
}

/// The b-family right-hand side `F(u)`.
pub fn rhs(u: &RealField, b: BParam) -> Result<RealField> {
    let (v, vx) = with_gradient(u);
    let terms = QuadraticTerms {
        advection: v.iter().zip(&vx).map(|(a, d)| a * d).collect(),
        square: v.iter().map(|a| a * a).collect(),
        gradient_square: vx.iter().map(|d| d * d).collect(),
    };
    assemble(*u.grid(), terms, b)
}

/// `m = u - u_xx`.
pub fn momentum(u: &RealField) -> MomentumField {
    MomentumField(idft(&helmholtz(&dft(u))))
}

/// Solves `u - u_xx = m` for `u`.
pub fn inverse_momentum(m: &MomentumField) -> RealField {
    idft(&helmholtz_inv(&dft(m.field())))
}

/// `int_0^L u dx`, exact for the trigonometric interpolant.
pub fn conserved_mean(u: &RealField) -> f64 {
    u.grid().box_length() * dft(u).coeff(0).re
}

/// `int (u^2 + u_x^2) dx`.
pub fn h1_energy(u: &RealField) -> f64 {
    let spectrum = dft(u);
    let weighted: f64 = spectrum
        .coeffs()
        .iter()
        .zip(u.grid().wavenumbers())
        .map(|(c, xi)| (1.0 + xi * xi) * c.norm_sqr())
        .sum();
    u.grid().box_length() * weighted
}

/// Trapezoid quadrature of `|m|`.
pub fn momentum_l1(u: &RealField) -> f64 {
    let m = momentum(u);
    m.grid().dx() * m.samples().iter().map(|v| v.abs()).sum::<f64>()
}

pub fn momentum_min(u: &RealField) -> f64 {
    momentum(u).field().min()
}

pub fn momentum_max(u: &RealField) -> f64 {
    momentum(u).field().max()
}

/// Whether the grid momentum is sign-definite (either sign) up to [`SIGN_TOLERANCE`].
pub fn has_sign_definite_momentum(u: &RealField) -> bool {
    let m = momentum(u);
    m.field().min() >= -SIGN_TOLERANCE || m.field().max() <= SIGN_TOLERANCE
}
