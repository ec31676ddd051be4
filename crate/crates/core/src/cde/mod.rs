//! The contour dynamics operator
//!
//!   L(γ)(η) = ∫ G_p(δ_β(η)) ∂_η δ_β(η) dβ,   δ_β(η) = γ(η) - γ(η - β),
//!
//! the constitutive velocity off the curve, and the pairing identities.
//!
//! The β-integral is split at ±β₀ (a whole number of grid cells). On the
//! near interval the free-space part behaves like |β|^{1-α} times a smooth
//! function and is integrated with a Gauss–Jacobi rule carrying that weight;
//! the lattice part is smooth and uses Gauss–Legendre. Off-grid samples come
//! from trigonometric interpolation. The far interval lives on the grid
//! nodes and uses the trapezoid rule with Gregory end corrections. The
//! integrand is never sampled at β = 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{Chain, Curve};
use crate::error::{Error, Result};
use crate::kernel::{green_periodic, r_alpha, KernelConfig};
use crate::point::PlanePoint;
use crate::quadrature::{gauss_jacobi_power, gauss_legendre, gregory_corrections, Rule};
use crate::spectral;

/// How curves of a chain interact inside L.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Every curve's β-integral runs over the whole chain, as in the constitutive law.
    #[default]
    ChainWide,
    /// Each curve only sees itself.
    SelfOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// β₀ in grid cells.
    pub near_field_cells: usize,
    /// Points of the near-field Gauss rules.
    pub near_field_order: usize,
    /// Order of the Gregory end corrections on the far interval.
    pub far_field_correction_order: usize,
    pub coupling: Coupling,
    /// Abort with a self-intersection error when |β|/|δ_β| exceeds this.
    pub chord_arc_ceiling: f64,
    /// Minimum distance of any chord from a lattice singularity.
    pub collision_floor: f64,
    /// Minimum distance of an evaluation point from the chain.
    pub boundary_floor: f64,
    /// Upper bound on nodes used when refining a curve for point evaluation.
    pub max_point_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            near_field_cells: 4,
            near_field_order: 16,
            far_field_correction_order: 8,
            coupling: Coupling::ChainWide,
            chord_arc_ceiling: 1e8,
            collision_floor: 1e-10,
            boundary_floor: 1e-8,
            max_point_nodes: 1 << 16,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.near_field_order < 8 {
            return Err(Error::Config(format!(
                "near_field_order must be at least 8, got {}",
                self.near_field_order
            )));
        }
        if self.near_field_cells == 0 || 2 * self.near_field_cells >= m {
            return Err(Error::Config(format!(
                "near field of {} cells does not fit a grid of {m}",
                self.near_field_cells
            )));
        }
        if self.far_field_correction_order > 16 {
            return Err(Error::Config(format!(
                "far_field_correction_order must be at most 16, got {}",
                self.far_field_correction_order
            )));
        }
        if m + 1 - 2 * self.near_field_cells < 4 {
            return Err(Error::Config(format!(
                "far interval of a {m}-point grid is too short"
            )));
        }
        Ok(())
    }

    /// Gregory order actually used: at most half the far-interval nodes.
    pub fn effective_correction_order(&self, m: usize) -> usize {
        let far_nodes = m + 1 - 2 * self.near_field_cells;
        self.far_field_correction_order.min(far_nodes / 2)
    }

    /// β₀ for a grid of size m.
    pub fn near_field_halfwidth(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.near_field_cells as f64 / m as f64
    }
}

/// Velocity at every node, one vector per curve.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocitySample {
    pub per_curve: Vec<Vec<PlanePoint>>,
}

impl VelocitySample {
    pub fn max_norm(&self) -> f64 {
        self.per_curve
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn flatten(&self) -> Vec<PlanePoint> {
        self.per_curve.iter().flatten().copied().collect()
    }
}

/// Samples of a curve and its derivative at η_i - β for all i.
struct Shifted {
    beta: f64,
    pos: Vec<PlanePoint>,
    der: Vec<PlanePoint>,
}

impl Shifted {
    fn new(curve: &Curve, beta: f64) -> Self {
        Shifted {
            beta,
            pos: curve.shifted(beta, 0),
            der: curve.shifted(beta, 1),
        }
    }
}

/// Everything about one curve that does not depend on the node index.
struct SelfPlan {
    nodes: Vec<PlanePoint>,
    der: Vec<PlanePoint>,
    winding: f64,
    h: f64,
    beta0: f64,
    k_near: usize,
    jacobi: Rule,
    jacobi_plus: Vec<Shifted>,
    jacobi_minus: Vec<Shifted>,
    legendre: Rule,
    legendre_pts: Vec<Shifted>,
    gregory: Vec<f64>,
}

impl SelfPlan {
    fn new(curve: &Curve, cfg: &KernelConfig, quad: &QuadratureConfig) -> Result<Self> {
        let m = curve.len();
        quad.validate(m)?;
        let alpha = cfg.alpha().value();
        let beta0 = quad.near_field_halfwidth(m);
        let jacobi = gauss_jacobi_power(quad.near_field_order, 1.0 - alpha);
        let legendre = gauss_legendre(quad.near_field_order);
        let jacobi_plus = jacobi.nodes.iter().map(|y| Shifted::new(curve, beta0 * y)).collect();
        let jacobi_minus = jacobi.nodes.iter().map(|y| Shifted::new(curve, -beta0 * y)).collect();
        let legendre_pts = legendre.nodes.iter().map(|x| Shifted::new(curve, beta0 * x)).collect();
        Ok(SelfPlan {
            nodes: curve.nodes().to_vec(),
            der: curve.derivative(1)?,
            winding: curve.winding() as f64,
            h: 2.0 * std::f64::consts::PI / m as f64,
            beta0,
            k_near: quad.near_field_cells,
            jacobi,
            jacobi_plus,
            jacobi_minus,
            legendre,
            legendre_pts,
            gregory: gregory_corrections(quad.effective_correction_order(m)),
        })
    }

    fn m(&self) -> usize {
        self.nodes.len()
    }

    /// Node i - j with the seam jump applied.
    #[inline]
    fn back(&self, i: usize, j: usize) -> (PlanePoint, PlanePoint) {
        if j <= i {
            (self.nodes[i - j], self.der[i - j])
        } else {
            let k = i + self.m() - j;
            (self.nodes[k] - PlanePoint::new(self.winding, 0.0), self.der[k])
        }
    }

    fn far_weight(&self, j: usize) -> f64 {
        let lo = self.k_near;
        let hi = self.m() - self.k_near;
        let mut w = if j == lo || j == hi { 0.5 } else { 1.0 };
        let p = self.gregory.len();
        if j - lo < p {
            w += self.gregory[j - lo];
        }
        if hi - j < p {
            w += self.gregory[hi - j];
        }
        w * self.h
    }

    fn check_chord(&self, curve: usize, beta: f64, delta: PlanePoint, quad: &QuadratureConfig) -> Result<()> {
        let d = delta.norm();
        let ratio = beta.abs() / d;
        if !(ratio <= quad.chord_arc_ceiling) {
            return Err(Error::SelfIntersection { curve, value: ratio });
        }
        let lattice = delta.dist_to_punctured_lattice();
        if lattice < quad.collision_floor {
            return Err(Error::LatticeCollision { curve, distance: lattice });
        }
        Ok(())
    }

    /// Self-induced part of L at node i.
    fn velocity(&self, curve: usize, i: usize, cfg: &KernelConfig, quad: &QuadratureConfig) -> Result<PlanePoint> {
        let alpha = cfg.alpha().value();
        let c = cfg.c_alpha();
        let x = self.nodes[i];
        let dx = self.der[i];
        let mut acc = PlanePoint::ZERO;

        // far field on grid nodes j = K..M-K, β = j h (β > π stands for β - 2π)
        let m = self.m();
        for j in self.k_near..=m - self.k_near {
            let (y, dy) = self.back(i, j);
            let delta = x - y;
            let beta = (j as f64 * self.h).min(2.0 * std::f64::consts::PI - j as f64 * self.h);
            self.check_chord(curve, beta, delta, quad)?;
            acc += (dx - dy) * (self.far_weight(j) * green_periodic(delta, cfg)?);
        }

        // near field, free-space part: |β|^{1-α} · c (|δ|/|β|)^{-α} Δγ'/|β|
        let mut near_free = PlanePoint::ZERO;
        for (q, w) in self.jacobi.weights.iter().enumerate() {
            for s in [&self.jacobi_plus[q], &self.jacobi_minus[q]] {
                let b = s.beta.abs();
                let delta = x - s.pos[i];
                self.check_chord(curve, b, delta, quad)?;
                let ratio = delta.norm() / b;
                near_free += (dx - s.der[i]) * (w * c * ratio.powf(-alpha) / b);
            }
        }
        acc += near_free * self.beta0.powf(2.0 - alpha);

        // near field, lattice part: smooth
        let mut near_lattice = PlanePoint::ZERO;
        for (q, w) in self.legendre.weights.iter().enumerate() {
            let s = &self.legendre_pts[q];
            let delta = x - s.pos[i];
            near_lattice += (dx - s.der[i]) * (w * r_alpha(delta, cfg)?);
        }
        acc += near_lattice * self.beta0;
        Ok(acc)
    }
}

/// ∫ G_p(x - γ(β)) (v - γ'(β)) dβ over a whole curve by the trapezoid rule.
fn cross_integral(
    x: PlanePoint,
    v: PlanePoint,
    nodes: &[PlanePoint],
    der: &[PlanePoint],
    cfg: &KernelConfig,
    floor: f64,
) -> Result<PlanePoint> {
    let h = 2.0 * std::f64::consts::PI / nodes.len() as f64;
    let mut acc = PlanePoint::ZERO;
    for (y, dy) in nodes.iter().zip(der) {
        let d = x - *y;
        let (p, _) = d.reduce_to_strip();
        if p.norm() < floor {
            return Err(Error::InvalidChain("two curves touch (modulo the period)".into()));
        }
        acc += (v - *dy) * green_periodic(d, cfg)?;
    }
    Ok(acc * h)
}

/// L(γ) at every node.
pub fn cde_velocity(chain: &Chain, cfg: &KernelConfig, quad: &QuadratureConfig) -> Result<VelocitySample> {
    let plans = chain
        .curves()
        .iter()
        .map(|c| SelfPlan::new(c, cfg, quad))
        .collect::<Result<Vec<_>>>()?;
    let m = chain.grid_size();
    let n = chain.num_curves();
    let coupled = quad.coupling == Coupling::ChainWide && n > 1;

    let flat: Vec<PlanePoint> = (0..n * m)
        .into_par_iter()
        .map(|idx| {
            let (k, i) = (idx / m, idx % m);
            let plan = &plans[k];
            let mut v = plan.velocity(k, i, cfg, quad)?;
            if coupled {
                for (l, other) in plans.iter().enumerate() {
                    if l != k {
                        v += cross_integral(plan.nodes[i], plan.der[i], &other.nodes, &other.der, cfg, quad.collision_floor)?;
                    }
                }
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VelocitySample {
        per_curve: flat.chunks(m).map(<[PlanePoint]>::to_vec).collect(),
    })
}

/// Constitutive velocity u(x) = -Σ_k ∫ G_p(x - γ_k(β)) ∂_β γ_k(β) dβ, which
/// equals ∫_Ω K_p(x - y) dy for positively oriented boundaries.
///
/// Curves are refined by trigonometric interpolation until the node spacing
/// is small compared with the distance from x, so the trapezoid rule stays
/// accurate close to the boundary.
pub fn velocity_at_point(
    x: PlanePoint,
    chain: &Chain,
    cfg: &KernelConfig,
    quad: &QuadratureConfig,
) -> Result<PlanePoint> {
    let mut u = PlanePoint::ZERO;
    for curve in chain.curves() {
        let dist = curve
            .nodes()
            .iter()
            .map(|y| (x - *y).reduce_to_strip().0.norm())
            .fold(f64::INFINITY, f64::min);
        if dist < quad.boundary_floor {
            return Err(Error::OnBoundary {
                distance: dist,
                floor: quad.boundary_floor,
            });
        }
        let spacing = max_spacing(curve);
        let mut m = curve.len();
        while spacing * (curve.len() as f64 / m as f64) > 0.25 * dist && 2 * m <= quad.max_point_nodes {
            m *= 2;
        }
        let fine = curve.resample(m)?;
        let der = fine.derivative(1)?;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let mut acc = PlanePoint::ZERO;
        for (y, dy) in fine.nodes().iter().zip(&der) {
            acc += *dy * green_periodic(x - *y, cfg)?;
        }
        u -= acc * h;
    }
    Ok(u)
}

fn max_spacing(curve: &Curve) -> f64 {
    let nodes = curve.nodes();
    let m = nodes.len();
    (0..m)
        .map(|i| {
            let next = if i + 1 == m {
                nodes[0] + PlanePoint::new(curve.winding() as f64, 0.0)
            } else {
                nodes[i + 1]
            };
            (next - nodes[i]).norm()
        })
        .fold(0.0, f64::max)
}

/// Both sides of the symmetry identity
/// (∂^m γ, ∂^m L(γ)) = ½ ∫∫ ∂^m(G_p(δ) ∂δ) · ∂^m δ dβ dη,
/// with each curve paired only with itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    pub direct: f64,
    pub symmetric: f64,
    /// Free-space G part of the symmetric form. For m = 0 the integrand is a
    /// perfect η-derivative, so this vanishes in exact arithmetic.
    pub symmetric_free: f64,
    pub symmetric_lattice: f64,
}

/// Differentiate η-samples m times spectrally.
fn eta_derivative(samples: &[PlanePoint], m: u32) -> Vec<PlanePoint> {
    if m == 0 {
        return samples.to_vec();
    }
    let n = samples.len();
    let mut buf: Vec<num_complex::Complex64> = samples
        .iter()
        .map(|p| num_complex::Complex64::new(p.x1, p.x2))
        .collect();
    spectral::forward(&mut buf);
    spectral::filter(&buf, |k| spectral::shift_derivative_multiplier(k, n, m, 0.0))
        .into_iter()
        .map(|z| PlanePoint::new(z.re, z.im))
        .collect()
}

/// Symmetric-form pairing with β-rules of `n_beta` points; see [`pairing`].
pub fn pairing_with_order(
    chain: &Chain,
    m: u32,
    n_beta: usize,
    cfg: &KernelConfig,
    quad: &QuadratureConfig,
) -> Result<Pairing> {
    let alpha = cfg.alpha().value();
    let c = cfg.c_alpha();
    let pi = std::f64::consts::PI;
    let self_only = QuadratureConfig {
        coupling: Coupling::SelfOnly,
        ..quad.clone()
    };
    let l = cde_velocity(chain, cfg, &self_only)?;
    let jacobi = gauss_jacobi_power(n_beta, 1.0 - alpha);
    let legendre = gauss_legendre(n_beta);

    let mut out = Pairing {
        direct: 0.0,
        symmetric: 0.0,
        symmetric_free: 0.0,
        symmetric_lattice: 0.0,
    };
    for (k, curve) in chain.curves().iter().enumerate() {
        let mm = curve.len();
        if m as usize > mm / 4 {
            return Err(Error::AccuracyGuard(format!("pairing order {m} too high for M = {mm}")));
        }
        let h = 2.0 * pi / mm as f64;
        let gm = if m == 0 { curve.nodes().to_vec() } else { curve.derivative(m)? };
        let lm = eta_derivative(&l.per_curve[k], m);
        out.direct += h * gm.iter().zip(&lm).map(|(a, b)| a.dot(*b)).sum::<f64>();

        let pos = curve.nodes();
        let der = curve.derivative(1)?;
        let dm = if m == 0 { pos.to_vec() } else { curve.derivative(m)? };

        // β-integrand at one β: Σ_i h ∂^m f(δ) · ∂^m δ
        let integrand = |beta: f64, free: bool| -> Result<f64> {
            let sp = curve.shifted(beta, 0);
            let sd = curve.shifted(beta, 1);
            let sm = if m == 0 { sp.clone() } else { curve.shifted(beta, m) };
            let mut f = Vec::with_capacity(mm);
            for i in 0..mm {
                let delta = pos[i] - sp[i];
                let ddelta = der[i] - sd[i];
                let g = if free {
                    // c (|δ|/β)^{-α} ∂δ / β; the β^{1-α} factor is in the weight
                    c * (delta.norm() / beta).powf(-alpha) / beta
                } else {
                    r_alpha(delta, cfg)?
                };
                f.push(ddelta * g);
            }
            let fm = eta_derivative(&f, m);
            Ok(h * (0..mm).map(|i| fm[i].dot(dm[i] - sm[i])).sum::<f64>())
        };

        // the β-integrand is even, so ½∫_{-π}^{π} = ∫_0^π
        let mut free = 0.0;
        for (y, w) in jacobi.nodes.iter().zip(&jacobi.weights) {
            free += w * integrand(pi * y, true)?;
        }
        free *= pi.powf(2.0 - alpha);
        let mut lattice = 0.0;
        for (x, w) in legendre.nodes.iter().zip(&legendre.weights) {
            lattice += w * integrand(0.5 * pi * (1.0 + x), false)?;
        }
        lattice *= 0.5 * pi;
        out.symmetric_free += free;
        out.symmetric_lattice += lattice;
    }
    out.symmetric = out.symmetric_free + out.symmetric_lattice;
    Ok(out)
}

/// Both sides of the symmetry identity with β-rules of M/2 points.
pub fn pairing(chain: &Chain, m: u32, cfg: &KernelConfig, quad: &QuadratureConfig) -> Result<Pairing> {
    pairing_with_order(chain, m, chain.grid_size() / 2, cfg, quad)
}

/// Free-space G contribution to the symmetric form only (no L evaluation).
pub fn free_space_pairing(chain: &Chain, n_beta: usize, cfg: &KernelConfig) -> Result<f64> {
    Ok(free_space_pairing_with_scale(chain, n_beta, cfg)?.0)
}

/// As [`free_space_pairing`], together with the same sum taken over absolute
/// values of the integrand (the size rounding errors scale with).
pub fn free_space_pairing_with_scale(chain: &Chain, n_beta: usize, cfg: &KernelConfig) -> Result<(f64, f64)> {
    let alpha = cfg.alpha().value();
    let c = cfg.c_alpha();
    let pi = std::f64::consts::PI;
    let jacobi = gauss_jacobi_power(n_beta, 1.0 - alpha);
    let (mut total, mut scale) = (0.0, 0.0);
    for curve in chain.curves() {
        let mm = curve.len();
        let h = 2.0 * pi / mm as f64;
        let pos = curve.nodes();
        let der = curve.derivative(1)?;
        let (mut acc, mut abs) = (0.0, 0.0);
        for (y, w) in jacobi.nodes.iter().zip(&jacobi.weights) {
            let beta = pi * y;
            let sp = curve.shifted(beta, 0);
            let sd = curve.shifted(beta, 1);
            let (mut s, mut a) = (0.0, 0.0);
            for i in 0..mm {
                let delta = pos[i] - sp[i];
                let g = c * (delta.norm() / beta).powf(-alpha) / beta;
                let t = (der[i] - sd[i]).dot(delta) * g;
                s += t;
                a += t.abs();
            }
            acc += w * h * s;
            abs += w * h * a;
        }
        total += acc * pi.powf(2.0 - alpha);
        scale += abs * pi.powf(2.0 - alpha);
    }
    Ok((total, scale))
}
