//! Free-space and horizontally periodized α-SQG kernels.
//!
//! G(x) = c_α |x|^{-α}, K = ∇^⊥G, R = G_p - G is the smooth lattice
//! correction on the fundamental strip, H = ∇^⊥R = Σ_{j≠0} K(x - (j,0)).

mod series;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::point::PlanePoint;
use series::{pair_sum, PairSum, ZetaCache};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_IMAGES: usize = 1_000_000;

/// The exponent α ∈ (0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Evolution is only supported for α < 1.
    pub fn is_evolvable(self) -> bool {
        self.0 < 1.0
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Alpha::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Γ(α/2) / (π 2^{2-α} Γ(1-α/2)).
pub fn c_alpha(alpha: Alpha) -> f64 {
    let a = alpha.value();
    gamma(0.5 * a) / (PI * 2f64.powf(2.0 - a) * gamma(1.0 - 0.5 * a))
}

/// The α → 0 reference constant 1/(2π), the residue of c_α at α = 0.
pub fn c_zero() -> f64 {
    0.5 / PI
}

/// α plus the truncation policy for lattice sums. Cheap to clone; the cached
/// Hurwitz-zeta tables are shared between clones.
#[derive(Clone)]
pub struct KernelConfig {
    alpha: Alpha,
    c: f64,
    tail_tolerance: f64,
    max_images: usize,
    cache: Arc<ZetaCache>,
}

impl fmt::Debug for KernelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelConfig")
            .field("alpha", &self.alpha)
            .field("tail_tolerance", &self.tail_tolerance)
            .field("max_images", &self.max_images)
            .finish()
    }
}

impl KernelConfig {
    pub fn new(alpha: Alpha, tail_tolerance: f64, max_images: usize) -> Result<Self> {
        if !(tail_tolerance > 0.0 && tail_tolerance.is_finite()) {
            return Err(Error::Config(format!("tail_tolerance must be positive, got {tail_tolerance}")));
        }
        if max_images < 1 {
            return Err(Error::Config("max_images must be at least 1".into()));
        }
        Ok(KernelConfig {
            alpha,
            c: c_alpha(alpha),
            tail_tolerance,
            max_images,
            cache: Arc::new(ZetaCache::new(alpha.value())),
        })
    }

    /// Default tolerances: tail 1e-10, at most 10^6 images.
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(Alpha::new(alpha)?, DEFAULT_TAIL_TOLERANCE, DEFAULT_MAX_IMAGES)
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.c
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    pub fn max_images(&self) -> usize {
        self.max_images
    }

    /// Truncation radius N used for a point of the fundamental strip.
    pub fn truncation_radius(&self, x: PlanePoint) -> Result<usize> {
        let (p, _) = x.reduce_to_strip();
        let level = self.cache.level_for(p.norm(), self.max_images)?;
        Ok(series::level_radius(level))
    }

    fn sum(&self, p: PlanePoint, kind: PairSum, extra_levels: usize) -> Result<f64> {
        let level = self.cache.level_for(p.norm(), self.max_images)? + extra_levels;
        if series::level_radius(level) > self.max_images {
            return Err(Error::TruncationFailure {
                radius: p.norm(),
                needed: series::level_radius(level),
                cap: self.max_images,
            });
        }
        pair_sum(&self.cache, p, kind, level, self.tail_tolerance)
    }
}

const R_SUM: PairSum = PairSum { p: 0, shift: 0, renormalize: true };
const S0_2: PairSum = PairSum { p: 0, shift: 2, renormalize: false };
const S1_2: PairSum = PairSum { p: 1, shift: 2, renormalize: false };
const S0_4: PairSum = PairSum { p: 0, shift: 4, renormalize: false };
const S1_4: PairSum = PairSum { p: 1, shift: 4, renormalize: false };
const S2_4: PairSum = PairSum { p: 2, shift: 4, renormalize: false };

/// c_α |x|^{-α}.
pub fn green_free(x: PlanePoint, cfg: &KernelConfig) -> Result<f64> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(cfg.c * r2.powf(-0.5 * cfg.alpha.value()))
}

/// -α c_α x^⊥ / |x|^{2+α}.
pub fn k_free(x: PlanePoint, cfg: &KernelConfig) -> Result<PlanePoint> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::SingularPoint);
    }
    let a = cfg.alpha.value();
    Ok(x.perp() * (-a * cfg.c * r2.powf(-0.5 * (a + 2.0))))
}

fn check_lattice(x: PlanePoint, p: PlanePoint, shift: i64) -> Result<()> {
    if p.norm_sq() == 0.0 && shift != 0 {
        return Err(Error::LatticeSingularity { x1: x.x1, x2: x.x2 });
    }
    Ok(())
}

fn r_strip(p: PlanePoint, cfg: &KernelConfig, extra_levels: usize) -> Result<f64> {
    Ok(cfg.c * cfg.sum(p, R_SUM, extra_levels)?)
}

/// Lattice correction R(x) = c_α Σ_{j≠0} (|x - (j,0)|^{-α} - |j|^{-α}).
///
/// Points off the fundamental strip are reduced first and the value is
/// reassembled from R(x) = R(p) + G(p) - G(x).
pub fn r_alpha(x: PlanePoint, cfg: &KernelConfig) -> Result<f64> {
    r_alpha_refined(x, cfg, 0)
}

/// `r_alpha` evaluated with the truncation radius doubled `extra_levels` times.
pub fn r_alpha_refined(x: PlanePoint, cfg: &KernelConfig, extra_levels: usize) -> Result<f64> {
    let (p, shift) = x.reduce_to_strip();
    check_lattice(x, p, shift)?;
    let rp = r_strip(p, cfg, extra_levels)?;
    if shift == 0 {
        return Ok(rp);
    }
    Ok(rp + green_free(p, cfg)? - green_free(x, cfg)?)
}

/// First and (optionally) second derivatives of R.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeDerivatives {
    /// (∂₁R, ∂₂R)
    pub gradient: [f64; 2],
    /// [[∂₁₁R, ∂₁₂R], [∂₂₁R, ∂₂₂R]] when order 2 was requested
    pub hessian: Option<[[f64; 2]; 2]>,
}

fn free_gradient(x: PlanePoint, cfg: &KernelConfig) -> [f64; 2] {
    let a = cfg.alpha.value();
    let f = -a * cfg.c * x.norm_sq().powf(-0.5 * (a + 2.0));
    [f * x.x1, f * x.x2]
}

fn free_hessian(x: PlanePoint, cfg: &KernelConfig) -> [[f64; 2]; 2] {
    let a = cfg.alpha.value();
    let r2 = x.norm_sq();
    let f = -a * cfg.c * r2.powf(-0.5 * (a + 2.0));
    let g = (a + 2.0) / r2;
    [
        [f * (1.0 - g * x.x1 * x.x1), -f * g * x.x1 * x.x2],
        [-f * g * x.x1 * x.x2, f * (1.0 - g * x.x2 * x.x2)],
    ]
}

/// Term-wise differentiated lattice series; `order` is 1 or 2.
pub fn r_alpha_grad(x: PlanePoint, order: u32, cfg: &KernelConfig) -> Result<LatticeDerivatives> {
    if !(1..=2).contains(&order) {
        return Err(Error::Unsupported(format!("derivative order {order}")));
    }
    let (p, shift) = x.reduce_to_strip();
    check_lattice(x, p, shift)?;
    let a = cfg.alpha.value();
    let ac = a * cfg.c;
    let s0_2 = cfg.sum(p, S0_2, 0)?;
    let s1_2 = cfg.sum(p, S1_2, 0)?;
    let mut gradient = [-ac * s1_2, -ac * p.x2 * s0_2];
    let mut hessian = if order == 2 {
        let s0_4 = cfg.sum(p, S0_4, 0)?;
        let s1_4 = cfg.sum(p, S1_4, 0)?;
        let s2_4 = cfg.sum(p, S2_4, 0)?;
        let d11 = -ac * (s0_2 - (a + 2.0) * s2_4);
        let d22 = -ac * (s0_2 - (a + 2.0) * p.x2 * p.x2 * s0_4);
        let d12 = ac * (a + 2.0) * p.x2 * s1_4;
        Some([[d11, d12], [d12, d22]])
    } else {
        None
    };
    if shift != 0 {
        let gp = free_gradient(p, cfg);
        let gx = free_gradient(x, cfg);
        gradient[0] += gp[0] - gx[0];
        gradient[1] += gp[1] - gx[1];
        if let Some(h) = hessian.as_mut() {
            let hp = free_hessian(p, cfg);
            let hx = free_hessian(x, cfg);
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += hp[i][j] - hx[i][j];
                }
            }
        }
    }
    Ok(LatticeDerivatives { gradient, hessian })
}

/// G_p = G + R, 1-periodic in x1.
pub fn green_periodic(x: PlanePoint, cfg: &KernelConfig) -> Result<f64> {
    let (p, _) = x.reduce_to_strip();
    if p.norm_sq() == 0.0 {
        return Err(Error::LatticeSingularity { x1: x.x1, x2: x.x2 });
    }
    Ok(green_free(p, cfg)? + r_strip(p, cfg, 0)?)
}

/// H(x) = Σ_{j≠0} K(x - (j,0)) = ∇^⊥R(x).
pub fn h_alpha(x: PlanePoint, cfg: &KernelConfig) -> Result<PlanePoint> {
    let (p, shift) = x.reduce_to_strip();
    check_lattice(x, p, shift)?;
    let ac = cfg.alpha.value() * cfg.c;
    let mut h = PlanePoint::new(ac * p.x2 * cfg.sum(p, S0_2, 0)?, -ac * cfg.sum(p, S1_2, 0)?);
    if shift != 0 {
        h += k_free(p, cfg)? - k_free(x, cfg)?;
    }
    Ok(h)
}

/// K_p = K + H, the periodized velocity kernel.
pub fn k_periodic(x: PlanePoint, cfg: &KernelConfig) -> Result<PlanePoint> {
    let (p, _) = x.reduce_to_strip();
    if p.norm_sq() == 0.0 {
        return Err(Error::LatticeSingularity { x1: x.x1, x2: x.x2 });
    }
    Ok(k_free(p, cfg)? + h_alpha(p, cfg)?)
}
