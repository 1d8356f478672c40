//! Run configuration, read from a TOML file.
//!
//! ```toml
//! b = 2.0                        # required
//! output_dir = "runs/ch"         # default "bfamily-run"
//!
//! [grid]
//! n_points = 512                 # even, >= 8
//! box_length = 6.283185307179586 # default 2 pi
//! dealias_fraction = 0.6666666666666666
//!
//! [evolve]
//! t_final = 5.0
//! cfl_safety = 0.2
//! dt_max = 0.01
//! sample_interval = 0.5
//! blowup_threshold = 1e6
//! require_sign_certificate = false
//!
//! [init]
//! family = "sech"                # gaussian | sech | sine | momentum_bump (required)
//! amplitude = 1.0
//! width = 1.0
//! center = 40.0                  # default: box centre
//! wavenumber = 1                 # sine only
//!
//! [diagnostics]
//! sigma_list = [0.5, 1.0]        # Gevrey weights to report; empty disables Gevrey output
//! s = 2.0                        # must exceed 3/2 while Gevrey output is enabled
//! fit_k_min = 4
//! gamma_override = -0.2          # optional
//! m_trunc = 32
//! ```
//!
//! Unknown keys and duplicated keys are rejected.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analyticity::{DEFAULT_FIT_K_MIN, DEFAULT_M_TRUNC};
use crate::dynamics::BParam;
use crate::error::{Error, Result};
use crate::evolve::{EvolveConfig, DEFAULT_BLOWUP_THRESHOLD, DEFAULT_CFL_SAFETY};
use crate::spectral::{GridSpec, DEFAULT_DEALIAS_FRACTION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub b: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    pub init: InitSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_points: usize,
    pub box_length: f64,
    pub dealias_fraction: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_points: 512,
            box_length: 2.0 * PI,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub t_final: f64,
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub sample_interval: f64,
    pub blowup_threshold: f64,
    pub require_sign_certificate: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            t_final: 5.0,
            cfl_safety: DEFAULT_CFL_SAFETY,
            dt_max: 0.01,
            sample_interval: 0.5,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            require_sign_certificate: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Sech,
    Sine,
    MomentumBump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub family: Family,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default = "one_u32")]
    pub wavenumber: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub sigma_list: Vec<f64>,
    pub s: f64,
    pub fit_k_min: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_override: Option<f64>,
    pub m_trunc: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            sigma_list: vec![0.5, 1.0],
            s: 2.0,
            fit_k_min: DEFAULT_FIT_K_MIN,
            gamma_override: None,
            m_trunc: DEFAULT_M_TRUNC,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("bfamily-run")
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run configuration always serializes")
    }

    pub fn gevrey_enabled(&self) -> bool {
        !self.diagnostics.sigma_list.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.b_param()?;
        self.grid_spec()?;
        self.evolve_config()?.validate()?;
        let init = &self.init;
        if !(init.amplitude.is_finite() && init.amplitude > 0.0) {
            return Err(Error::Config(format!("init.amplitude must be positive, got {}", init.amplitude)));
        }
        if !(init.width.is_finite() && init.width > 0.0) {
            return Err(Error::Config(format!("init.width must be positive, got {}", init.width)));
        }
        if let Some(c) = init.center {
            if !c.is_finite() {
                return Err(Error::Config("init.center must be finite".into()));
            }
        }
        if init.wavenumber == 0 {
            return Err(Error::Config("init.wavenumber must be at least 1".into()));
        }
        let diag = &self.diagnostics;
        if self.gevrey_enabled() && !(diag.s > 1.5) {
            return Err(Error::Config(format!(
                "diagnostics.s = {} but Gevrey diagnostics require s > 3/2: global analyticity \
                 is only guaranteed for data in G^{{1,s}} with s > 3/2 (set s above 1.5 or empty sigma_list)",
                diag.s
            )));
        }
        if diag.sigma_list.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config("diagnostics.sigma_list entries must be >= 0".into()));
        }
        if let Some(g) = diag.gamma_override {
            if !(g < 0.0) {
                return Err(Error::Config(format!("diagnostics.gamma_override must be negative, got {g}")));
            }
        }
        if diag.m_trunc == 0 {
            return Err(Error::Config("diagnostics.m_trunc must be at least 1".into()));
        }
        Ok(())
    }

    pub fn b_param(&self) -> Result<BParam> {
        BParam::new(self.b)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n_points, self.grid.box_length)?.with_dealias_fraction(self.grid.dealias_fraction)
    }

    pub fn evolve_config(&self) -> Result<EvolveConfig> {
        let e = &self.evolve;
        Ok(EvolveConfig {
            b: self.b_param()?,
            t_final: e.t_final,
            cfl_safety: e.cfl_safety,
            dt_max: e.dt_max,
            sample_interval: e.sample_interval,
            blowup_threshold: e.blowup_threshold,
            require_sign_certificate: e.require_sign_certificate,
        })
    }
}
