//! Time-Taylor expansion `u(t, x) = sum_k c_k(x) t^k` of the b-family flow.
//!
//! Matching powers of `t` gives
//!
//! ```text
//! (k+1) c_{k+1} = -[ sum_{i+j=k} c_i d_x c_j
//!                    + d_x Lambda^{-2} ( (b/2) sum c_i c_j + ((3-b)/2) sum d_x c_i d_x c_j ) ]
//! ```
//!
//! and the bracket is assembled by the same dealiased code path as the
//! right-hand side, so `c_1` equals `rhs(c_0)` bit for bit.

use log::warn;

use crate::dynamics::{assemble, with_gradient, BParam, QuadraticTerms};
use crate::error::{Error, Result};
use crate::norms::sobolev_norm;
use crate::spectral::{GridSpec, RealField};

pub const DEFAULT_ORDER: usize = 16;
/// Coefficients whose sup norm exceeds this end the series.
pub const GROWTH_HORIZON: f64 = 1e12;
/// Tail coefficients below this fraction of `||c_0||` count as vanished.
const VANISHING: f64 = 1e-13;
const MIN_RADIUS_ORDER: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    grid: GridSpec,
    b: BParam,
    coeffs: Vec<RealField>,
    /// Set when the recursion stopped early at the growth horizon.
    truncated: bool,
}

impl TaylorSeries {
    /// Wraps explicit coefficients `c_0 .. c_K`.
    pub fn from_coeffs(b: BParam, coeffs: Vec<RealField>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Config("a Taylor series needs at least c_0 and c_1".into()));
        }
        let grid = *coeffs[0].grid();
        if coeffs.iter().any(|c| *c.grid() != grid || !c.is_finite()) {
            return Err(Error::Numerical("Taylor coefficients must be finite and share a grid".into()));
        }
        Ok(Self {
            grid,
            b,
            coeffs,
            truncated: false,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn b(&self) -> BParam {
        self.b
    }

    pub fn coeffs(&self) -> &[RealField] {
        &self.coeffs
    }

    /// Highest retained power `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Horner evaluation of `sum_k c_k t^k`. Negative `t` evaluates the
    /// backward-in-time branch.
    pub fn eval(&self, t: f64) -> RealField {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs[..self.order()].iter().rev() {
            acc = c.axpy(t, &acc);
        }
        acc
    }

    /// Root-test estimate `1 / max_{k >= K/2} ||c_k||_{L^2}^{1/k}`; infinite
    /// when every tail coefficient has vanished to round-off.
    pub fn time_radius_estimate(&self) -> Result<f64> {
        let order = self.order();
        if order < MIN_RADIUS_ORDER {
            return Err(Error::Config(format!(
                "radius estimate needs at least {MIN_RADIUS_ORDER} coefficients beyond c_0, have {order}"
            )));
        }
        let scale = sobolev_norm(&self.coeffs[0], 0.0);
        let mut worst = 0.0_f64;
        for k in order.div_ceil(2)..=order {
            let norm = sobolev_norm(&self.coeffs[k], 0.0);
            if norm <= VANISHING * scale {
                continue;
            }
            worst = worst.max(norm.powf(1.0 / k as f64));
        }
        Ok(if worst == 0.0 { f64::INFINITY } else { 1.0 / worst })
    }
}

/// Builds `c_0 = u0, c_1, .., c_K` from the power-matching recursion.
pub fn taylor_coeffs(u0: &RealField, b: BParam, order: usize) -> Result<TaylorSeries> {
    if order < 1 {
        return Err(Error::Config("Taylor order must be at least 1".into()));
    }
    let grid = *u0.grid();
    let n = grid.n_points();
    let mut coeffs = vec![u0.clone()];
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    let mut gradients: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    let (v0, g0) = with_gradient(u0);
    values.push(v0);
    gradients.push(g0);
    let mut truncated = false;

    for k in 0..order {
        let mut terms = QuadraticTerms {
            advection: vec![0.0; n],
            square: vec![0.0; n],
            gradient_square: vec![0.0; n],
        };
        for i in 0..=k {
            let j = k - i;
            let (ci, cj) = (&values[i], &values[j]);
            let (di, dj) = (&gradients[i], &gradients[j]);
            for p in 0..n {
                terms.advection[p] += ci[p] * dj[p];
                terms.square[p] += ci[p] * cj[p];
                terms.gradient_square[p] += di[p] * dj[p];
            }
        }
        let bracket = assemble(grid, terms, b).map_err(|_| {
            Error::Numerical(format!("Taylor coefficient {} overflowed", k + 1))
        })?;
        let next = bracket.scaled(1.0 / (k + 1) as f64);
        if next.sup_norm() > GROWTH_HORIZON {
            warn!(
                "Taylor coefficient {} exceeds {GROWTH_HORIZON:e}; series truncated at order {k}",
                k + 1
            );
            truncated = true;
            break;
        }
        let (v, g) = with_gradient(&next);
        values.push(v);
        gradients.push(g);
        coeffs.push(next);
    }
    if coeffs.len() < 2 {
        return Err(Error::Numerical(
            "first Taylor coefficient already exceeds the growth horizon".into(),
        ));
    }
    Ok(TaylorSeries {
        grid,
        b,
        coeffs,
        truncated,
    })
}
