//! Explicit RK4 time stepping with an advective CFL limit and exact-time sampling.

use crate::dynamics::{self, rhs, BParam};
use crate::error::{Error, Result};
use crate::norms::sobolev_norm;
use crate::spectral::{GridSpec, RealField};

pub const DEFAULT_CFL_SAFETY: f64 = 0.2;
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;
const VELOCITY_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveConfig {
    pub b: BParam,
    pub t_final: f64,
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub sample_interval: f64,
    pub blowup_threshold: f64,
    /// Refuse to start unless the initial momentum is sign-definite.
    pub require_sign_certificate: bool,
}

impl EvolveConfig {
    pub fn new(b: BParam, t_final: f64) -> Self {
        Self {
            b,
            t_final,
            cfl_safety: DEFAULT_CFL_SAFETY,
            dt_max: 0.01,
            sample_interval: if t_final > 0.0 { t_final } else { 1.0 },
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            require_sign_certificate: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if !(positive(self.cfl_safety) && self.cfl_safety <= 1.0) {
            return Err(Error::Config(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if !positive(self.dt_max) {
            return Err(Error::Config(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if !positive(self.sample_interval) {
            return Err(Error::Config(format!(
                "sample_interval must be positive, got {}",
                self.sample_interval
            )));
        }
        if !positive(self.blowup_threshold) {
            return Err(Error::Config(format!(
                "blowup_threshold must be positive, got {}",
                self.blowup_threshold
            )));
        }
        Ok(())
    }
}

/// A named scalar functional evaluated at every sample.
pub struct Monitor {
    pub name: String,
    eval: Box<dyn Fn(&RealField) -> f64 + Send + Sync>,
}

impl Monitor {
    pub fn new(name: impl Into<String>, eval: impl Fn(&RealField) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Box::new(eval),
        }
    }

    pub fn eval(&self, u: &RealField) -> f64 {
        (self.eval)(u)
    }

    /// `l2`, `h1`, `h2`, `mean_u`, `m_l1`, `m_min`, in that order.
    pub fn standard() -> Vec<Monitor> {
        vec![
            Monitor::new("l2", |u| sobolev_norm(u, 0.0)),
            Monitor::new("h1", |u| sobolev_norm(u, 1.0)),
            Monitor::new("h2", |u| sobolev_norm(u, 2.0)),
            Monitor::new("mean_u", dynamics::conserved_mean),
            Monitor::new("m_l1", dynamics::momentum_l1),
            Monitor::new("m_min", dynamics::momentum_min),
        ]
    }
}

impl std::fmt::Debug for Monitor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Monitor").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorRecord {
    pub t: f64,
    /// Size of the step that landed on `t`; zero for the initial sample.
    pub dt_used: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub b: BParam,
    pub monitor_names: Vec<String>,
    pub snapshots: Vec<(f64, RealField)>,
    pub records: Vec<MonitorRecord>,
    pub steps_taken: usize,
}

impl Trajectory {
    pub fn initial(&self) -> &RealField {
        &self.snapshots[0].1
    }

    pub fn last(&self) -> &(f64, RealField) {
        self.snapshots.last().expect("trajectory always holds the initial sample")
    }

    pub fn monitor(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.monitor_names.iter().position(|n| n == name)?;
        Some(self.records.iter().map(|r| r.values[idx]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|(t, _)| *t).collect()
    }
}

/// `min(dt_max, safety * dx / max(|u|, 1e-8))`.
pub fn cfl_dt(u: &RealField, cfg: &EvolveConfig) -> f64 {
    let speed = u.sup_norm().max(VELOCITY_FLOOR);
    (cfg.cfl_safety * u.grid().dx() / speed).min(cfg.dt_max)
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step(u: &RealField, dt: f64, b: BParam) -> Result<RealField> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("step size must be positive, got {dt}")));
    }
    let k1 = rhs(u, b)?;
    let k2 = rhs(&u.axpy(0.5 * dt, &k1), b)?;
    let k3 = rhs(&u.axpy(0.5 * dt, &k2), b)?;
    let k4 = rhs(&u.axpy(dt, &k3), b)?;
    let samples = u
        .samples()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            v + dt / 6.0
                * (k1.samples()[j] + 2.0 * k2.samples()[j] + 2.0 * k3.samples()[j] + k4.samples()[j])
        })
        .collect();
    RealField::new(*u.grid(), samples)
        .map_err(|_| Error::Numerical("RK4 step produced non-finite values".into()))
}

/// `steps` RK4 steps of fixed size `dt`; used by convergence studies.
pub fn integrate_fixed(u0: &RealField, b: BParam, dt: f64, steps: usize) -> Result<RealField> {
    let mut u = u0.clone();
    for _ in 0..steps {
        u = rk4_step(&u, dt, b)?;
    }
    Ok(u)
}

/// Integrates from `t = 0` to `cfg.t_final`, sampling every monitor at
/// multiples of `cfg.sample_interval` and at `t_final`. Steps are clipped to
/// land exactly on the sample times.
pub fn run(u0: &RealField, cfg: &EvolveConfig, monitors: &[Monitor]) -> Result<Trajectory> {
    cfg.validate()?;
    let sign_definite = dynamics::has_sign_definite_momentum(u0);
    if cfg.require_sign_certificate && !sign_definite {
        return Err(Error::Config(format!(
            "initial momentum changes sign (min {:.3e}, max {:.3e}); \
             sign-definite momentum was required",
            dynamics::momentum_min(u0),
            dynamics::momentum_max(u0)
        )));
    }

    let sample = |u: &RealField, t: f64, dt_used: f64| MonitorRecord {
        t,
        dt_used,
        values: monitors.iter().map(|m| m.eval(u)).collect(),
    };
    let mut traj = Trajectory {
        grid: *u0.grid(),
        b: cfg.b,
        monitor_names: monitors.iter().map(|m| m.name.clone()).collect(),
        snapshots: vec![(0.0, u0.clone())],
        records: vec![sample(u0, 0.0, 0.0)],
        steps_taken: 0,
    };

    let mut u = u0.clone();
    let mut t = 0.0;
    let mut sample_index = 1_usize;
    while t < cfg.t_final {
        let target = (sample_index as f64 * cfg.sample_interval).min(cfg.t_final);
        let mut dt = cfl_dt(&u, cfg);
        // absorb a sliver remainder into the current step
        let landing = t + dt >= target - 1e-12 * target.max(1.0);
        if landing {
            dt = target - t;
        }
        let stepped = rk4_step(&u, dt, cfg.b).and_then(|next| {
            if next.sup_norm() > cfg.blowup_threshold {
                Err(Error::Numerical(format!(
                    "sup norm {:.3e} exceeds blow-up threshold {:.1e}",
                    next.sup_norm(),
                    cfg.blowup_threshold
                )))
            } else {
                Ok(next)
            }
        });
        u = match stepped {
            Ok(next) => next,
            Err(err) => {
                let cause = if sign_definite {
                    "initial momentum was sign-definite, so this indicates a numerical failure \
                     (under-resolution or step size)"
                } else {
                    "initial momentum changes sign, so finite-time breaking is possible"
                };
                return Err(Error::BlowUp {
                    time: t,
                    reason: format!("{err}; {cause}"),
                    partial: Box::new(traj),
                });
            }
        };
        traj.steps_taken += 1;
        t = if landing { target } else { t + dt };
        if landing {
            traj.records.push(sample(&u, t, dt));
            traj.snapshots.push((t, u.clone()));
            sample_index += 1;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn b(v: f64) -> BParam {
        BParam::new(v).unwrap()
    }

    #[test]
    fn cfl_examples() {
        let g = GridSpec::new(256, 2.0 * PI).unwrap();
        let mut cfg = EvolveConfig::new(b(2.0), 1.0);
        cfg.dt_max = 1.0;
        assert_eq!(cfl_dt(&RealField::zeros(g), &EvolveConfig { dt_max: 0.05, ..cfg }), 0.05);
        let u = RealField::from_fn(g, |x| 2.0 * x.sin()).unwrap();
        let dt = cfl_dt(&u, &cfg);
        assert!((dt - 0.2 * (2.0 * PI / 256.0) / 2.0).abs() < 1e-15);
        assert!((dt - 2.454e-3).abs() < 1e-6);
        let g2 = GridSpec::new(512, 2.0 * PI).unwrap();
        let u2 = RealField::from_fn(g2, |x| 2.0 * x.sin()).unwrap();
        assert!((cfl_dt(&u2, &cfg) - dt / 2.0).abs() < 1e-15);
    }

    #[test]
    fn steady_sine_for_b_minus_one() {
        let g = GridSpec::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(g, f64::sin).unwrap();
        let next = rk4_step(&u, 0.01, b(-1.0)).unwrap();
        assert!(next.max_abs_diff(&u) < 1e-12);
        let zero = RealField::zeros(g);
        assert_eq!(rk4_step(&zero, 0.1, b(2.0)).unwrap().sup_norm(), 0.0);
        assert!(rk4_step(&u, 0.0, b(2.0)).is_err());
    }

    #[test]
    fn zero_horizon_returns_initial_snapshot() {
        let g = GridSpec::new(32, 2.0 * PI).unwrap();
        let u = RealField::from_fn(g, |x| x.cos()).unwrap();
        let traj = run(&u, &EvolveConfig::new(b(2.0), 0.0), &Monitor::standard()).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.initial(), &u);
        assert_eq!(traj.records.len(), 1);
        assert_eq!(traj.steps_taken, 0);
    }

    #[test]
    fn samples_land_on_exact_times() {
        let g = GridSpec::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(g, |x| 0.3 * x.cos()).unwrap();
        let cfg = EvolveConfig {
            sample_interval: 0.25,
            dt_max: 0.03,
            ..EvolveConfig::new(b(2.0), 1.1)
        };
        let traj = run(&u, &cfg, &Monitor::standard()).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.1]);
        assert!(traj.records.iter().skip(1).all(|r| r.dt_used > 0.0 && r.dt_used <= 0.03));
        assert_eq!(traj.monitor("h2").unwrap().len(), 6);
    }

    #[test]
    fn sign_certificate_enforced() {
        let g = GridSpec::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(g, f64::sin).unwrap();
        let cfg = EvolveConfig {
            require_sign_certificate: true,
            ..EvolveConfig::new(b(2.0), 0.1)
        };
        assert!(matches!(run(&u, &cfg, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn blowup_threshold_aborts_with_partial_trajectory() {
        let g = GridSpec::new(64, 2.0 * PI).unwrap();
        let u = RealField::from_fn(g, |x| 2.0 * x.sin()).unwrap();
        let cfg = EvolveConfig {
            blowup_threshold: 1.0,
            sample_interval: 0.5,
            ..EvolveConfig::new(b(2.0), 1.0)
        };
        match run(&u, &cfg, &Monitor::standard()) {
            Err(Error::BlowUp { time, partial, reason }) => {
                assert_eq!(time, 0.0);
                assert_eq!(partial.snapshots.len(), 1);
                assert!(reason.contains("changes sign"));
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let g = GridSpec::new(64, 10.0).unwrap();
        let u = RealField::from_fn(g, |x| (-(x - 5.0).powi(2)).exp()).unwrap();
        let cfg = EvolveConfig {
            sample_interval: 0.1,
            ..EvolveConfig::new(b(0.7), 0.3)
        };
        let a = run(&u, &cfg, &Monitor::standard()).unwrap();
        let c = run(&u, &cfg, &Monitor::standard()).unwrap();
        assert_eq!(a, c);
    }
}
