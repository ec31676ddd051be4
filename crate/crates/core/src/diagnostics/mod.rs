//! Monitored functionals: chord-arc F, the weights S_n, Sobolev energy,
//! the blow-up horizon T*, the mollifier radius ε₀, separation between
//! components, patch areas and the modulus μ.
//!
//! Quantities that carry an unspecified absolute constant take it as a
//! parameter (default 1); their shape, not their magnitude, is meaningful.

mod record;

use std::f64::consts::{E, PI};

use rayon::prelude::*;

use crate::contour::{grid_eta, Chain, Curve};
use crate::error::{Error, Result};
use crate::kernel::Alpha;
use crate::point::PlanePoint;

pub use record::{DiagnosticsConfig, DiagnosticsRecord};

/// Where the supremum of F was found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordArcPeak {
    pub curve: usize,
    pub eta: f64,
    pub beta: f64,
}

/// Result of scanning F over the (η, β) grid of every curve.
#[derive(Clone, Debug)]
pub struct ChordArc {
    /// sup of F = max(F₀, F_j), refined.
    pub f_inf: f64,
    /// sup of F₀ = |β|/|δ_β(η)| alone, refined.
    pub f0_inf: f64,
    /// sup over the grid of max_{0<|j|≤J} F_j.
    pub lattice_inf: f64,
    pub peak: Option<ChordArcPeak>,
    /// Per curve, row-major M×M values of F; row i is η_i, column c is β = (c - M/2 + 1) h.
    pub grid: Vec<Vec<f64>>,
}

struct CurveSampler<'a> {
    curve: &'a Curve,
    nodes: &'a [PlanePoint],
    speed: Vec<f64>,
    h: f64,
    w: f64,
}

impl<'a> CurveSampler<'a> {
    fn new(curve: &'a Curve) -> Result<Self> {
        let d = curve.derivative(1)?;
        Ok(CurveSampler {
            curve,
            nodes: curve.nodes(),
            speed: d.iter().map(|v| v.norm()).collect(),
            h: 2.0 * PI / curve.len() as f64,
            w: curve.winding() as f64,
        })
    }

    /// δ at node i, grid offset j (β = j h, j may be negative).
    fn grid_delta(&self, i: usize, j: i64) -> PlanePoint {
        let m = self.nodes.len() as i64;
        let k = i as i64 - j;
        let wraps = k.div_euclid(m);
        let idx = k.rem_euclid(m) as usize;
        self.nodes[i] - (self.nodes[idx] + PlanePoint::new(self.w * wraps as f64, 0.0))
    }
}

/// F₀ and max_j F_j for one chord.
#[inline]
fn chord_values(beta: f64, delta: PlanePoint, speed: f64, window: i64) -> (f64, f64) {
    let f0 = if beta == 0.0 {
        1.0 / speed
    } else {
        let d = delta.norm();
        if d == 0.0 {
            f64::INFINITY
        } else {
            beta.abs() / d
        }
    };
    let mut fl: f64 = 0.0;
    for l in 1..=window {
        for s in [-1.0, 1.0] {
            let d = (delta - PlanePoint::new(s * l as f64, 0.0)).norm();
            fl = fl.max(if d == 0.0 { f64::INFINITY } else { 1.0 / d });
        }
    }
    (f0, fl)
}

fn continuous_f(s: &CurveSampler, eta: f64, beta: f64, window: i64, lattice: bool) -> f64 {
    let beta = beta.clamp(-PI, PI);
    let delta = s.curve.eval(eta, 0) - s.curve.eval(eta - beta, 0);
    let speed = s.curve.eval(eta, 1).norm();
    let (f0, fl) = chord_values(if beta.abs() < 1e-14 { 0.0 } else { beta }, delta, speed, window);
    if lattice {
        f0.max(fl)
    } else {
        f0
    }
}

/// Golden-section maximization of f on [a, b].
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Refine a discrete maximum by alternating golden-section sweeps in β and η.
fn refine_peak(s: &CurveSampler, eta: f64, beta: f64, value: f64, window: i64, lattice: bool) -> (f64, f64, f64) {
    let (mut eta, mut beta, mut best) = (eta, beta, value);
    let h = s.h;
    for _ in 0..4 {
        let (b, fb) = golden_max(|b| continuous_f(s, eta, b, window, lattice), (beta - h).max(-PI), (beta + h).min(PI), 40);
        if fb > best {
            best = fb;
            beta = b;
        }
        let (e, fe) = golden_max(|e| continuous_f(s, e, beta, window, lattice), eta - h, eta + h, 40);
        if fe > best {
            best = fe;
            eta = e;
        }
    }
    // the endpoints β = ±π are part of the domain
    for b in [-PI, PI] {
        if (beta - b).abs() <= h {
            let (e, fe) = golden_max(|e| continuous_f(s, e, b, window, lattice), eta - h, eta + h, 40);
            if fe > best {
                best = fe;
                eta = e;
                beta = b;
            }
        }
    }
    (eta, beta, best)
}

/// sup of the chord-arc functional over each curve's (η, β) torus.
///
/// F₀ = |β|/|δ_β(η)| (1/|∂γ| on the diagonal) and F_j = 1/|δ_β(η) - (j, 0)|
/// for 0 < |j| ≤ J. J grows with the horizontal extent of the chords.
/// Exact self-intersections give +∞ rather than an error.
pub fn chord_arc_f(chain: &Chain, j_window: usize, refine: bool) -> Result<ChordArc> {
    let mut out = ChordArc {
        f_inf: 0.0,
        f0_inf: 0.0,
        lattice_inf: 0.0,
        peak: None,
        grid: Vec::with_capacity(chain.num_curves()),
    };
    for (k, curve) in chain.curves().iter().enumerate() {
        let s = CurveSampler::new(curve)?;
        let m = curve.len();
        let half = (m / 2) as i64;
        let (xmin, xmax) = curve
            .nodes()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.x1), hi.max(p.x1)));
        let extent = xmax - xmin + s.w.abs();
        let window = (j_window as i64).max(extent.ceil() as i64 + 1);

        // rows in parallel, each row scanned in a fixed order
        let rows: Vec<(Vec<f64>, f64, f64, usize, f64)> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(m);
                let (mut f0_best, mut fl_best, mut arg, mut arg_val) = (0.0f64, 0.0f64, 0usize, -1.0f64);
                for c in 0..m {
                    let j = c as i64 - half + 1;
                    let beta = j as f64 * s.h;
                    let delta = if j == 0 { PlanePoint::ZERO } else { s.grid_delta(i, j) };
                    let (f0, fl) = chord_values(beta, delta, s.speed[i], window);
                    let f = f0.max(fl);
                    f0_best = f0_best.max(f0);
                    fl_best = fl_best.max(fl);
                    if f > arg_val {
                        arg_val = f;
                        arg = c;
                    }
                    row.push(f);
                }
                (row, f0_best, fl_best, arg, arg_val)
            })
            .collect();

        let mut grid = Vec::with_capacity(m * m);
        let (mut f_best, mut f0_best, mut fl_best) = (0.0f64, 0.0f64, 0.0f64);
        let mut f0_arg = (0usize, 0usize);
        let mut f_arg = (0usize, 0usize);
        for (i, (row, f0, fl, arg, val)) in rows.into_iter().enumerate() {
            grid.extend_from_slice(&row);
            if f0 > f0_best {
                f0_best = f0;
                // locate the F₀ maximum of this row
                let c = (0..m)
                    .max_by(|&a, &b| {
                        let fa = chord_values((a as i64 - half + 1) as f64 * s.h, s.grid_delta(i, a as i64 - half + 1), s.speed[i], 0).0;
                        let fb = chord_values((b as i64 - half + 1) as f64 * s.h, s.grid_delta(i, b as i64 - half + 1), s.speed[i], 0).0;
                        fa.total_cmp(&fb).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                f0_arg = (i, c);
            }
            fl_best = fl_best.max(fl);
            if val > f_best {
                f_best = val;
                f_arg = (i, arg);
            }
        }

        let to_params = |(i, c): (usize, usize)| (grid_eta(i, m), (c as i64 - half + 1) as f64 * s.h);
        if refine && f0_best.is_finite() {
            let (eta, beta) = to_params(f0_arg);
            f0_best = refine_peak(&s, eta, beta, f0_best, window, false).2;
        }
        let (mut peak_eta, mut peak_beta) = to_params(f_arg);
        if refine && f_best.is_finite() {
            let (e, b, v) = refine_peak(&s, peak_eta, peak_beta, f_best, window, true);
            peak_eta = e;
            peak_beta = b;
            f_best = v;
        }
        f_best = f_best.max(f0_best);

        if f_best > out.f_inf || out.peak.is_none() {
            out.peak = Some(ChordArcPeak {
                curve: k,
                eta: peak_eta,
                beta: peak_beta,
            });
        }
        out.f_inf = out.f_inf.max(f_best);
        out.f0_inf = out.f0_inf.max(f0_best);
        out.lattice_inf = out.lattice_inf.max(fl_best);
        out.grid.push(grid);
    }
    Ok(out)
}

/// S₀ = F^α + ‖γ‖²; S_n = Σ_{j=1..n} (F^{j+α} + ‖γ‖^j) for n ≥ 1.
pub fn weights_s(n: usize, f_inf: f64, l2_norm: f64, alpha: Alpha) -> f64 {
    let a = alpha.value();
    if n == 0 {
        return f_inf.powf(a) + l2_norm * l2_norm;
    }
    (1..=n)
        .map(|j| f_inf.powf(j as f64 + a) + l2_norm.powi(j as i32))
        .sum()
}

/// L² norm of the de-wound chain.
pub fn chain_l2_norm(chain: &Chain) -> f64 {
    chain.curves().iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
}

/// H^m norm of the chain (root sum of squares over curves).
pub fn chain_sobolev_norm(chain: &Chain, m: usize) -> Result<f64> {
    let mut s = 0.0;
    for c in chain.curves() {
        s += c.sobolev_norm(m)?.powi(2);
    }
    Ok(s.sqrt())
}

/// S_n for a chain with a given F.
pub fn weights_s_chain(chain: &Chain, n: usize, f_inf: f64, alpha: Alpha) -> f64 {
    weights_s(n, f_inf, chain_l2_norm(chain), alpha)
}

/// T* = 1 / ((2m+2) C S₀^{2m+2}).
pub fn blowup_bound_t(s0: f64, m: usize, c: f64) -> f64 {
    let p = 2.0 * m as f64 + 2.0;
    1.0 / (p * c * s0.powf(p))
}

/// Running energy bound [S₀^{-(2m+2)} - (2m+2) C t]^{-1/(2m+2)}; +∞ once t ≥ T*.
pub fn energy_bound(s0: f64, m: usize, c: f64, t: f64) -> f64 {
    let p = 2.0 * m as f64 + 2.0;
    let denom = s0.powf(-p) - p * c * t;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        denom.powf(-1.0 / p)
    }
}

/// ε₀ = C/(F₀ h₃) · min{1/(F₀ h₃²), 1} with F₀ = ‖F₀‖_∞ and h₃ = ‖γ‖_{H³}.
pub fn epsilon0_from(f0_inf: f64, h3: f64, c: f64) -> Result<f64> {
    if h3 == 0.0 {
        return Err(Error::InvalidChain("degenerate chain: H^3 norm is zero".into()));
    }
    if !(f0_inf.is_finite() && f0_inf > 0.0) {
        return Err(Error::InvalidChain(format!("F0 must be finite and positive, got {f0_inf}")));
    }
    Ok(c / (f0_inf * h3) * (1.0 / (f0_inf * h3 * h3)).min(1.0))
}

pub fn epsilon0(chain: &Chain, c: f64) -> Result<f64> {
    let f = chord_arc_f(chain, 1, true)?;
    epsilon0_from(f.f0_inf, chain_sobolev_norm(chain, 3)?, c)
}

fn closest_on(curve: &Curve, other: &Curve, shift: f64) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for (i, p) in curve.nodes().iter().enumerate() {
        for (j, q) in other.nodes().iter().enumerate() {
            let d = (*p - *q - PlanePoint::new(shift, 0.0)).norm();
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    best
}

fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), a, b, 50);
    (x, -v)
}

fn segments(c: &Curve, shift: f64) -> impl Iterator<Item = (PlanePoint, PlanePoint)> + '_ {
    let n = c.len();
    let off = PlanePoint::new(shift, 0.0);
    let seam = PlanePoint::new(c.winding() as f64, 0.0);
    (0..n).map(move |i| {
        let b = if i + 1 == n { c.nodes()[0] + seam } else { c.nodes()[i + 1] };
        (c.nodes()[i] + off, b + off)
    })
}

fn cross(a: PlanePoint, b: PlanePoint, c: PlanePoint, d: PlanePoint) -> bool {
    let orient = |p: PlanePoint, q: PlanePoint, r: PlanePoint| (q - p).perp().dot(r - p);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 <= 0.0 && o3 * o4 <= 0.0 && (o1 != 0.0 || o2 != 0.0 || o3 != 0.0 || o4 != 0.0)
}

/// Whether the node polygons of two distinct curves cross, periodic
/// translates included.
pub fn components_intersect(chain: &Chain) -> bool {
    let curves = chain.curves();
    for a in 0..curves.len() {
        for b in (a + 1)..curves.len() {
            for shift in [-1.0, 0.0, 1.0] {
                for (p, q) in segments(&curves[a], 0.0) {
                    if segments(&curves[b], shift).any(|(r, s)| cross(p, q, r, s)) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Minimum distance between distinct curves, periodic translates included.
/// +∞ for a single curve.
pub fn separation(chain: &Chain) -> f64 {
    let curves = chain.curves();
    let mut best = f64::INFINITY;
    for a in 0..curves.len() {
        for b in (a + 1)..curves.len() {
            for shift in [-1.0, 0.0, 1.0] {
                let (d, i, j) = closest_on(&curves[a], &curves[b], shift);
                let ca = &curves[a];
                let cb = &curves[b];
                let h = 2.0 * PI / ca.len() as f64;
                let dist = |s: f64, t: f64| (ca.eval(s, 0) - cb.eval(t, 0) - PlanePoint::new(shift, 0.0)).norm();
                let (mut s, mut t, mut v) = (grid_eta(i, ca.len()), grid_eta(j, cb.len()), d);
                for _ in 0..4 {
                    let (s2, v2) = golden_min(|x| dist(x, t), s - h, s + h);
                    if v2 < v {
                        s = s2;
                        v = v2;
                    }
                    let (t2, v3) = golden_min(|x| dist(s, x), t - h, t + h);
                    if v3 < v {
                        t = t2;
                        v = v3;
                    }
                }
                best = best.min(v);
            }
        }
    }
    best
}

/// Oriented area per curve. Closed curves: ½∮(x₁ ∂x₂ - x₂ ∂x₁) dη.
/// Curves with winding w ≠ 0: ∫ x₂ ∂x₁ dη over one period, the signed area
/// between the curve and the axis (a front at height h with w = 1 gives h).
pub fn patch_area(chain: &Chain) -> Result<Vec<f64>> {
    chain
        .curves()
        .iter()
        .map(|c| {
            let d = c.derivative(1)?;
            let h = 2.0 * PI / c.len() as f64;
            let s: f64 = if c.winding() == 0 {
                c.nodes().iter().zip(&d).map(|(p, v)| 0.5 * (p.x1 * v.x2 - p.x2 * v.x1)).sum()
            } else {
                -c.nodes().iter().zip(&d).map(|(p, v)| p.x2 * v.x1).sum::<f64>()
            };
            Ok(s * h)
        })
        .collect()
}

/// μ(0) = 0, μ(x) = -e x log x for x < 1/e, μ(x) = x/e otherwise.
pub fn modulus_mu(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < 1.0 / E {
        -E * x * x.ln()
    } else {
        x / E
    }
}

/// min_{0<λ≤1} ... as stated by the companion lemma: -e a log a for a < 1/e, 1 otherwise.
/// Differs from [`modulus_mu`] on [1/e, ∞).
pub fn min_gives_ll(a: f64) -> f64 {
    if a < 1.0 / E {
        -E * a * a.ln()
    } else {
        1.0
    }
}

/// A_m = S_m(F) · Σ_{j=0..m+1} ‖γ‖^j_{H^{m+1}}, up to an absolute constant taken as 1.
pub fn bound_coefficient_am(chain: &Chain, m: usize, alpha: Alpha, f_inf: f64) -> Result<f64> {
    let s = weights_s_chain(chain, m, f_inf, alpha);
    let hn = chain_sobolev_norm(chain, m + 1)?;
    Ok(s * (0..=m + 1).map(|j| hn.powi(j as i32)).sum::<f64>())
}

#[cfg(test)]
mod tests;
