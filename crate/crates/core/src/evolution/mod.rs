//! Fixed-step RK4 time integration of ∂_t γ = L(γ) or L_ε(γ).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cde::{cde_velocity, QuadratureConfig};
use crate::contour::{Chain, SobolevIndex};
use crate::diagnostics::{bound_coefficient_am, DiagnosticsConfig, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::mollifier::{cde_velocity_mollified, MollifierConfig};
use crate::point::PlanePoint;

/// Node velocities for a chain, flattened curve by curve.
pub trait VelocityField: Sync {
    fn velocity(&self, chain: &Chain) -> Result<Vec<PlanePoint>>;
}

/// The CDE operator, optionally mollified.
#[derive(Clone, Debug)]
pub struct CdeField {
    pub kernel: KernelConfig,
    pub quadrature: QuadratureConfig,
    pub mollifier: Option<MollifierConfig>,
}

impl CdeField {
    /// Refuses α = 1, for which this evolution is not defined.
    pub fn new(kernel: KernelConfig, quadrature: QuadratureConfig, mollifier: Option<MollifierConfig>) -> Result<Self> {
        if !kernel.alpha().is_evolvable() {
            return Err(Error::Unsupported(
                "evolution at alpha = 1 is not supported; use alpha < 1".into(),
            ));
        }
        Ok(CdeField {
            kernel,
            quadrature,
            mollifier,
        })
    }
}

impl VelocityField for CdeField {
    fn velocity(&self, chain: &Chain) -> Result<Vec<PlanePoint>> {
        let v = match &self.mollifier {
            Some(m) => cde_velocity_mollified(chain, &self.kernel, &self.quadrature, m)?,
            None => cde_velocity(chain, &self.kernel, &self.quadrature)?,
        };
        Ok(v.flatten())
    }
}

/// A velocity field given pointwise in space, for testing the integrator.
pub struct PointwiseField<F>(pub F);

impl<F: Fn(PlanePoint) -> PlanePoint + Sync> VelocityField for PointwiseField<F> {
    fn velocity(&self, chain: &Chain) -> Result<Vec<PlanePoint>> {
        Ok(chain.flatten().into_iter().map(&self.0).collect())
    }
}

fn axpy(base: &[PlanePoint], k: &[PlanePoint], s: f64) -> Vec<PlanePoint> {
    base.iter().zip(k).map(|(b, v)| *b + *v * s).collect()
}

/// One classical RK4 step. Windings are unchanged.
pub fn step(chain: &Chain, dt: f64, field: &dyn VelocityField) -> Result<Chain> {
    let y = chain.flatten();
    let k1 = field.velocity(chain)?;
    let k2 = field.velocity(&chain.with_nodes(&axpy(&y, &k1, 0.5 * dt))?)?;
    let k3 = field.velocity(&chain.with_nodes(&axpy(&y, &k2, 0.5 * dt))?)?;
    let k4 = field.velocity(&chain.with_nodes(&axpy(&y, &k3, dt))?)?;
    let next: Vec<PlanePoint> = (0..y.len())
        .map(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
        .collect();
    chain.with_nodes(&next)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Stop once F reaches this value; `None` means 10³·F(0).
    #[serde(default)]
    pub f_ceiling: Option<f64>,
    /// Stop once the separation between components drops below this value.
    #[serde(default = "default_separation_floor")]
    pub separation_floor: f64,
    /// Emit a frame every this many steps (the final state is always emitted).
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn default_separation_floor() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    1
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        StepperConfig {
            dt,
            t_end,
            f_ceiling: None,
            separation_floor: default_separation_floor(),
            snapshot_stride: default_stride(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.separation_floor >= 0.0) {
            return Err(Error::Config("separation_floor must be non-negative".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Step count and the uniform step that lands exactly on t_end.
    fn schedule(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    ChordArcCeiling,
    SeparationFloor,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Completed => "t_end reached",
            StopReason::ChordArcCeiling => "chord-arc ceiling",
            StopReason::SeparationFloor => "separation floor",
        })
    }
}

/// State handed to the observer at every emitted step.
pub struct Frame<'a> {
    pub step: usize,
    pub time: f64,
    pub chain: &'a Chain,
    pub record: &'a DiagnosticsRecord,
}

/// Monitored form of the F growth bound F(t) ≤ F(0) + C ∫ A₂ F² ds with C = 1.
#[derive(Clone, Debug, Default)]
pub struct FBoundMonitor {
    integral: f64,
    last: Option<(f64, f64)>,
    f0: f64,
    /// Times at which the measured F exceeded the bound.
    pub violations: Vec<f64>,
}

impl FBoundMonitor {
    fn observe(&mut self, time: f64, f: f64, a2: f64) {
        let integrand = a2 * f * f;
        match self.last {
            None => self.f0 = f,
            Some((t0, g0)) => self.integral += 0.5 * (t0 - time).abs() * (g0 + integrand),
        }
        self.last = Some((time, integrand));
        if f > self.f0 + self.integral {
            self.violations.push(time);
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub reason: StopReason,
    pub final_time: f64,
    pub steps: usize,
    pub final_chain: Chain,
    pub initial_record: DiagnosticsRecord,
    pub final_record: DiagnosticsRecord,
    pub f_ceiling: f64,
    pub f_bound: FBoundMonitor,
}

/// Everything `run` needs besides the initial chain and the field.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub stepper: StepperConfig,
    pub alpha: crate::kernel::Alpha,
    pub sobolev_index: SobolevIndex,
    pub diagnostics: DiagnosticsConfig,
}

/// Advance to t_end or until a stop condition holds. Stop conditions are
/// checked before every step, including step 0. Kernel or quadrature
/// failures abort with the time at which they happened.
pub fn run(
    initial: Chain,
    field: &dyn VelocityField,
    settings: &RunSettings,
    observer: &mut dyn FnMut(&Frame) -> Result<()>,
) -> Result<RunOutcome> {
    let cfg = &settings.stepper;
    cfg.validate()?;
    let (n_steps, dt) = cfg.schedule();
    let record_at = |chain: &Chain, t: f64| {
        DiagnosticsRecord::compute(chain, t, settings.alpha, settings.sobolev_index, &settings.diagnostics)
    };
    let abort = |t: f64, e: Error| Error::Aborted {
        time: t,
        source: Box::new(e),
    };

    let mut chain = initial;
    let initial_record = record_at(&chain, 0.0)?;
    let f_ceiling = cfg.f_ceiling.unwrap_or(1e3 * initial_record.f_inf);
    let mut monitor = FBoundMonitor::default();
    let mut record = initial_record.clone();
    let mut k = 0usize;
    let mut time = 0.0;
    let reason = loop {
        let a2 = bound_coefficient_am(&chain, 2, settings.alpha, record.f_inf).map_err(|e| abort(time, e))?;
        monitor.observe(time, record.f_inf, a2);

        let stop = if record.f_inf >= f_ceiling {
            Some(StopReason::ChordArcCeiling)
        } else if record.separation < cfg.separation_floor {
            Some(StopReason::SeparationFloor)
        } else if k == n_steps {
            Some(StopReason::Completed)
        } else {
            None
        };
        if stop.is_some() || k % cfg.snapshot_stride == 0 {
            observer(&Frame {
                step: k,
                time,
                chain: &chain,
                record: &record,
            })?;
        }
        if let Some(reason) = stop {
            break reason;
        }
        chain = step(&chain, dt, field).map_err(|e| abort(time, e))?;
        k += 1;
        time = if k == n_steps { cfg.t_end } else { k as f64 * dt };
        record = record_at(&chain, time).map_err(|e| abort(time, e))?;
    };

    Ok(RunOutcome {
        reason,
        final_time: time,
        steps: k,
        final_chain: chain,
        initial_record,
        final_record: record,
        f_ceiling,
        f_bound: monitor,
    })
}
