//! Pseudo-spectral laboratory for the b-family of shallow-water equations
//!
//! ```text
//! u_t = -u u_x - d/dx (1 - d^2/dx^2)^{-1} ( (b/2) u^2 + ((3-b)/2) u_x^2 )
//! ```
//!
//! on a periodic box: RK4 evolution, a time-Taylor construction of the local
//! analytic solution, Sobolev / Gevrey / Himonas-Misiolek / Kato-Masuda norms,
//! and tracking of the spatial analyticity radius against the explicit
//! Kato-Masuda lower bound.

pub mod analyticity;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod evolve;
pub mod norms;
pub mod scenario;
pub mod spectral;
pub mod taylor;

pub use error::{Error, Result};
