//! Initial data families.

use std::f64::consts::PI;

use crate::dynamics::{inverse_momentum, MomentumField};
use crate::error::Result;
use crate::scenario::config::{Family, InitSection};
use crate::spectral::{GridSpec, RealField};

/// Sums a localized profile over the box and its two neighbouring images.
fn periodized(grid: GridSpec, center: f64, profile: impl Fn(f64) -> f64) -> Result<RealField> {
    let l = grid.box_length();
    RealField::from_fn(grid, |x| (-1..=1).map(|n| profile(x - center + n as f64 * l)).sum())
}

pub fn gaussian(grid: GridSpec, amplitude: f64, width: f64, center: f64) -> Result<RealField> {
    periodized(grid, center, |y| amplitude * (-(y / width).powi(2)).exp())
}

pub fn sech(grid: GridSpec, amplitude: f64, width: f64, center: f64) -> Result<RealField> {
    periodized(grid, center, |y| amplitude / (y / width).cosh())
}

pub fn sine(grid: GridSpec, amplitude: f64, wavenumber: u32) -> Result<RealField> {
    let l = grid.box_length();
    RealField::from_fn(grid, |x| amplitude * (2.0 * PI * wavenumber as f64 * x / l).sin())
}

/// `u0 = (1 - d_xx)^{-1} m0` for a non-negative Gaussian momentum `m0`.
pub fn momentum_bump(grid: GridSpec, amplitude: f64, width: f64, center: f64) -> Result<RealField> {
    let m0 = gaussian(grid, amplitude, width, center)?;
    Ok(inverse_momentum(&MomentumField::new(m0)))
}

pub fn initial_data(init: &InitSection, grid: GridSpec) -> Result<RealField> {
    let center = init.center.unwrap_or(0.5 * grid.box_length());
    match init.family {
        Family::Gaussian => gaussian(grid, init.amplitude, init.width, center),
        Family::Sech => sech(grid, init.amplitude, init.width, center),
        Family::Sine => sine(grid, init.amplitude, init.wavenumber),
        Family::MomentumBump => momentum_bump(grid, init.amplitude, init.width, center),
    }
}
