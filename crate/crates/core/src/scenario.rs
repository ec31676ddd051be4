//! JSON scenario files: geometry, grid, time stepping and solver settings.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cde::QuadratureConfig;
use crate::contour::{Chain, Curve, SobolevIndex};
use crate::diagnostics::{chord_arc_f, components_intersect, DiagnosticsConfig};
use crate::error::{Error, Result};
use crate::evolution::{CdeField, RunSettings, StepperConfig};
use crate::kernel::{Alpha, KernelConfig, DEFAULT_MAX_IMAGES, DEFAULT_TAIL_TOLERANCE};
use crate::mollifier::MollifierConfig;
use crate::point::PlanePoint;
use crate::snapshot::Snapshot;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    /// Band |x2 − A cos(2π·mode·x1 + φ)| < h, bounded by two fronts.
    FlatLayer {
        h: f64,
        #[serde(default)]
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    /// A single rightward front x2 = height + A cos(2π·mode·x1 + φ).
    Front {
        height: f64,
        #[serde(default)]
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
        /// Rotation of the major axis, radians.
        #[serde(default)]
        angle: f64,
    },
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// Several components, one chain.
    TwoComponent { components: Vec<Geometry> },
    /// A snapshot file; resampled spectrally if its grid differs from M.
    FromFile { path: PathBuf },
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSettings {
    #[serde(default = "default_tail")]
    pub tail_tolerance: f64,
    #[serde(default = "default_images")]
    pub max_images: usize,
}

fn default_tail() -> f64 {
    DEFAULT_TAIL_TOLERANCE
}

fn default_images() -> usize {
    DEFAULT_MAX_IMAGES
}

impl Default for KernelSettings {
    fn default() -> Self {
        KernelSettings {
            tail_tolerance: default_tail(),
            max_images: default_images(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub alpha: f64,
    pub geometry: Geometry,
    #[serde(rename = "M")]
    pub grid_size: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Stop once F reaches this value; defaults to 10³·F(0).
    #[serde(default)]
    pub f_ceiling: Option<f64>,
    #[serde(default = "default_separation_floor")]
    pub separation_floor: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Mollification width; evolve L_ε instead of L when present.
    #[serde(default)]
    pub mollifier_epsilon: Option<f64>,
    #[serde(default)]
    pub kernel: KernelSettings,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default = "default_sobolev")]
    pub sobolev_index: SobolevIndex,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Seeds the phases of perturbations; phases are 0 without a seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_separation_floor() -> f64 {
    StepperConfig::new(1.0, 1.0).separation_floor
}

fn default_stride() -> usize {
    StepperConfig::new(1.0, 1.0).snapshot_stride
}

fn default_sobolev() -> SobolevIndex {
    SobolevIndex::new(3).expect("3 is a valid index")
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    /// Parse and validate without touching the filesystem.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a file; relative `from_file` paths and output_dir resolve against
    /// the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.geometry.resolve_paths(base);
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Alpha::new(self.alpha)?;
        if self.grid_size < crate::contour::MIN_NODES || self.grid_size % 2 != 0 {
            return Err(Error::Config(format!(
                "M must be even and at least {}, got {}",
                crate::contour::MIN_NODES,
                self.grid_size
            )));
        }
        self.stepper().validate()?;
        if let Some(eps) = self.mollifier_epsilon {
            positive("mollifier_epsilon", eps)?;
        }
        positive("kernel.tail_tolerance", self.kernel.tail_tolerance)?;
        self.quadrature.validate(self.grid_size)?;
        self.geometry.validate()
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            dt: self.dt,
            t_end: self.t_end,
            f_ceiling: self.f_ceiling,
            separation_floor: self.separation_floor,
            snapshot_stride: self.snapshot_stride,
        }
    }

    pub fn alpha(&self) -> Result<Alpha> {
        Alpha::new(self.alpha)
    }

    pub fn kernel_config(&self) -> Result<KernelConfig> {
        KernelConfig::new(self.alpha()?, self.kernel.tail_tolerance, self.kernel.max_images)
    }

    pub fn velocity_field(&self) -> Result<CdeField> {
        let moll = self.mollifier_epsilon.map(MollifierConfig::new).transpose()?;
        CdeField::new(self.kernel_config()?, self.quadrature.clone(), moll)
    }

    pub fn run_settings(&self) -> Result<RunSettings> {
        Ok(RunSettings {
            stepper: self.stepper(),
            alpha: self.alpha()?,
            sobolev_index: self.sobolev_index,
            diagnostics: self.diagnostics.clone(),
        })
    }

    /// The initial chain, checked for self-intersection and collisions.
    pub fn initial_chain(&self) -> Result<Chain> {
        let mut rng = self.seed.map(ChaCha8Rng::seed_from_u64);
        let chain = Chain::new(self.geometry.curves(self.grid_size, &mut rng)?)?;
        let f = chord_arc_f(&chain, self.diagnostics.j_window, false)?;
        if !f.f_inf.is_finite() {
            return Err(Error::Config("initial geometry self-intersects".into()));
        }
        if components_intersect(&chain) {
            return Err(Error::Config("initial components intersect".into()));
        }
        Ok(chain)
    }
}

fn phase(rng: &mut Option<ChaCha8Rng>) -> f64 {
    rng.as_mut().map_or(0.0, |r| r.gen_range(0.0..2.0 * PI))
}

impl Geometry {
    fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite")))
            }
        };
        match self {
            Geometry::FlatLayer { h, amplitude, mode } => {
                positive("h", *h)?;
                finite("amplitude", *amplitude)?;
                if amplitude.abs() >= *h {
                    return Err(Error::Config("flat_layer amplitude must be smaller than h".into()));
                }
                if *mode == 0 {
                    return Err(Error::Config("mode must be at least 1".into()));
                }
            }
            Geometry::Front { height, amplitude, mode } => {
                finite("height", *height)?;
                finite("amplitude", *amplitude)?;
                if *mode == 0 {
                    return Err(Error::Config("mode must be at least 1".into()));
                }
            }
            Geometry::Ellipse { a, b, center, angle } => {
                positive("a", *a)?;
                positive("b", *b)?;
                finite("angle", *angle)?;
                finite("center", center[0] + center[1])?;
            }
            Geometry::Circle { radius, center } => {
                positive("radius", *radius)?;
                finite("center", center[0] + center[1])?;
            }
            Geometry::TwoComponent { components } => {
                if components.is_empty() {
                    return Err(Error::Config("two_component needs at least one component".into()));
                }
                for c in components {
                    c.validate()?;
                }
            }
            Geometry::FromFile { .. } => {}
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        match self {
            Geometry::FromFile { path } if path.is_relative() => *path = base.join(&*path),
            Geometry::TwoComponent { components } => {
                for c in components {
                    c.resolve_paths(base);
                }
            }
            _ => {}
        }
    }

    /// Curves on an M-point grid, oriented with the outward normal on the right
    /// of the tangent's rotation (counter-clockwise closed curves, layers with
    /// the upper boundary running leftward).
    pub fn curves(&self, m: usize, rng: &mut Option<ChaCha8Rng>) -> Result<Vec<Curve>> {
        let tau = 2.0 * PI;
        Ok(match self {
            Geometry::FlatLayer { h, amplitude, mode } => {
                let k = *mode as f64;
                let (pt, pb) = (phase(rng), phase(rng));
                let (h, a) = (*h, *amplitude);
                vec![
                    Curve::from_fn(m, -1, |t| {
                        let x = -t / tau;
                        PlanePoint::new(x, h + a * (tau * k * x + pt).cos())
                    })?,
                    Curve::from_fn(m, 1, |t| {
                        let x = t / tau;
                        PlanePoint::new(x, -h + a * (tau * k * x + pb).cos())
                    })?,
                ]
            }
            Geometry::Front { height, amplitude, mode } => {
                let k = *mode as f64;
                let p = phase(rng);
                vec![Curve::from_fn(m, 1, |t| {
                    let x = t / tau;
                    PlanePoint::new(x, height + amplitude * (tau * k * x + p).cos())
                })?]
            }
            Geometry::Ellipse { a, b, center, angle } => {
                let (s, c) = angle.sin_cos();
                let o = PlanePoint::new(center[0], center[1]);
                vec![Curve::from_fn(m, 0, |t| {
                    let (x, y) = (a * t.cos(), b * t.sin());
                    o + PlanePoint::new(c * x - s * y, s * x + c * y)
                })?]
            }
            Geometry::Circle { radius, center } => {
                let o = PlanePoint::new(center[0], center[1]);
                vec![Curve::from_fn(m, 0, |t| o + PlanePoint::new(t.cos(), t.sin()) * *radius)?]
            }
            Geometry::TwoComponent { components } => {
                let mut all = Vec::new();
                for c in components {
                    all.extend(c.curves(m, rng)?);
                }
                all
            }
            Geometry::FromFile { path } => {
                let snap = Snapshot::read(path)?;
                snap.to_chain()?
                    .into_curves()
                    .into_iter()
                    .map(|c| if c.len() == m { Ok(c) } else { c.resample(m) })
                    .collect::<Result<_>>()?
            }
        })
    }
}
