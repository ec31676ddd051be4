//! Discretized quasi-closed curves and chains.
//!
//! A curve is sampled at η_i = -π + 2πi/M. Its winding w is the horizontal
//! jump across the seam, γ(η + 2π) = γ(η) + (w, 0). All spectral work is
//! done on the de-wound part γ(η) - (w(η + π)/(2π), 0), which is smooth and
//! periodic. The node positions themselves are what gets stored, so a curve
//! round-trips through serialization bit for bit.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point::PlanePoint;
use crate::spectral;

pub const MIN_NODES: usize = 16;

/// Sobolev index m ≥ 3 used by the energy functionals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SobolevIndex(usize);

impl SobolevIndex {
    pub fn new(m: usize) -> Result<Self> {
        if m >= 3 {
            Ok(SobolevIndex(m))
        } else {
            Err(Error::Config(format!("Sobolev index must be at least 3, got {m}")))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for SobolevIndex {
    type Error = Error;
    fn try_from(m: usize) -> Result<Self> {
        SobolevIndex::new(m)
    }
}

impl From<SobolevIndex> for usize {
    fn from(m: SobolevIndex) -> usize {
        m.0
    }
}

/// Parameter value of node `i` on an `m`-point grid.
#[inline]
pub fn grid_eta(i: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * i as f64 / m as f64
}

#[derive(Clone, Debug)]
pub struct Curve {
    nodes: Vec<PlanePoint>,
    winding: i64,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl PartialEq for Curve {
    fn eq(&self, other: &Self) -> bool {
        self.winding == other.winding && self.nodes == other.nodes
    }
}

impl Curve {
    pub fn new(nodes: Vec<PlanePoint>, winding: i64) -> Result<Self> {
        let m = nodes.len();
        if m < MIN_NODES || m % 2 != 0 {
            return Err(Error::InvalidCurve(format!(
                "need an even number of at least {MIN_NODES} nodes, got {m}"
            )));
        }
        if let Some(i) = nodes.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidCurve(format!("node {i} is not finite")));
        }
        Ok(Curve {
            nodes,
            winding,
            spectrum: OnceLock::new(),
        })
    }

    /// Sample `f(η)` on the `m`-point grid.
    pub fn from_fn(m: usize, winding: i64, f: impl Fn(f64) -> PlanePoint) -> Result<Self> {
        Curve::new((0..m).map(|i| f(grid_eta(i, m))).collect(), winding)
    }

    /// Reject curves whose consecutive nodes come closer than `floor`.
    pub fn check_spacing(&self, floor: f64) -> Result<()> {
        let m = self.len();
        for i in 0..m {
            let next = if i + 1 == m {
                self.nodes[0] + PlanePoint::new(self.winding as f64, 0.0)
            } else {
                self.nodes[i + 1]
            };
            let d = (next - self.nodes[i]).norm();
            if d < floor {
                return Err(Error::InvalidCurve(format!(
                    "nodes {i} and {} are {d:.3e} apart, below the floor {floor:.3e}",
                    (i + 1) % m
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[PlanePoint] {
        &self.nodes
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    /// Linear part (w(η + π)/(2π), 0) at node i.
    #[inline]
    fn winding_offset(&self, i: usize) -> f64 {
        self.winding as f64 * i as f64 / self.len() as f64
    }

    /// De-wound, periodic samples.
    pub fn periodic_part(&self) -> Vec<PlanePoint> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, &p)| PlanePoint::new(p.x1 - self.winding_offset(i), p.x2))
            .collect()
    }

    /// Unnormalized DFT of the de-wound curve packed as x1 + i x2.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut buf: Vec<Complex64> = self
                .periodic_part()
                .into_iter()
                .map(|p| Complex64::new(p.x1, p.x2))
                .collect();
            spectral::forward(&mut buf);
            buf
        })
    }

    fn derivative_guard(&self, order: u32) -> Result<()> {
        if order as usize > self.len() / 4 {
            return Err(Error::AccuracyGuard(format!(
                "derivative order {order} exceeds M/4 = {}",
                self.len() / 4
            )));
        }
        Ok(())
    }

    /// ∂_η^q γ at the nodes.
    pub fn derivative(&self, order: u32) -> Result<Vec<PlanePoint>> {
        self.derivative_guard(order)?;
        Ok(self.shifted(0.0, order))
    }

    /// ∂_η^q γ evaluated at η_i - θ for every node i (trigonometric interpolation).
    pub fn shifted(&self, theta: f64, order: u32) -> Vec<PlanePoint> {
        let m = self.len();
        let vals = spectral::filter(self.spectrum(), |k| {
            spectral::shift_derivative_multiplier(k, m, order, theta)
        });
        let w = self.winding as f64;
        vals.into_iter()
            .enumerate()
            .map(|(i, z)| {
                let lin = match order {
                    0 => w * (i as f64 / m as f64 - theta / (2.0 * PI)),
                    1 => w / (2.0 * PI),
                    _ => 0.0,
                };
                PlanePoint::new(z.re + lin, z.im)
            })
            .collect()
    }

    /// ∂_η^q γ at an arbitrary parameter η (O(M) direct sum).
    pub fn eval(&self, eta: f64, order: u32) -> PlanePoint {
        let m = self.len();
        let spec = self.spectrum();
        let s = eta + PI;
        let mut z = Complex64::new(0.0, 0.0);
        for (idx, &c) in spec.iter().enumerate() {
            let k = spectral::wavenumber(idx, m);
            if 2 * k == m as i64 {
                let half = m as f64 / 2.0;
                let phase = half * s + order as f64 * std::f64::consts::FRAC_PI_2;
                z += c * half.powi(order as i32) * phase.cos();
            } else {
                let kf = k as f64;
                let ik_q = Complex64::new(0.0, kf).powu(order);
                z += c * ik_q * Complex64::from_polar(1.0, kf * s);
            }
        }
        z /= m as f64;
        let w = self.winding as f64;
        let lin = match order {
            0 => w * s / (2.0 * PI),
            1 => w / (2.0 * PI),
            _ => 0.0,
        };
        PlanePoint::new(z.re + lin, z.im)
    }

    /// ‖∂^j γ‖²_{L²(dη)} for j = 0..=m, by Parseval. j = 0 uses the de-wound curve.
    fn derivative_energies(&self, m: usize) -> Vec<f64> {
        let n = self.len();
        let spec = self.spectrum();
        let scale = 2.0 * PI / (n as f64 * n as f64);
        let mut out = vec![0.0; m + 1];
        for (idx, c) in spec.iter().enumerate() {
            let k = spectral::wavenumber(idx, n);
            let weight = if 2 * k == n as i64 { 0.5 } else { 1.0 };
            let mut power = c.norm_sqr() * weight * scale;
            let k2 = (k * k) as f64;
            for e in out.iter_mut() {
                *e += power;
                power *= k2;
            }
        }
        if m >= 1 {
            let w = self.winding as f64;
            out[1] += w * w / (2.0 * PI);
        }
        out
    }

    /// (‖γ‖² + Σ_{j=1..m} ‖∂^j γ‖²)^{1/2} on [-π, π] with the measure dη.
    pub fn sobolev_norm(&self, m: usize) -> Result<f64> {
        if self.len() < 4 * m {
            return Err(Error::AccuracyGuard(format!(
                "H^{m} norm needs M >= {}, have {}",
                4 * m,
                self.len()
            )));
        }
        Ok(self.derivative_energies(m).iter().sum::<f64>().sqrt())
    }

    /// L² norm of the de-wound curve.
    pub fn l2_norm(&self) -> f64 {
        self.derivative_energies(0)[0].sqrt()
    }

    /// Trigonometric interpolation onto a new uniform grid.
    pub fn resample(&self, new_m: usize) -> Result<Curve> {
        let m = self.len();
        if new_m == m {
            return Ok(self.clone());
        }
        if new_m < MIN_NODES || new_m % 2 != 0 {
            return Err(Error::InvalidCurve(format!("cannot resample to {new_m} nodes")));
        }
        let spec = self.spectrum();
        let mut buf = vec![Complex64::new(0.0, 0.0); new_m];
        let scale = new_m as f64 / m as f64;
        let half_old = (m / 2) as i64;
        let half_new = (new_m / 2) as i64;
        let slot = |k: i64| -> usize { k.rem_euclid(new_m as i64) as usize };
        for (idx, &c) in spec.iter().enumerate() {
            let k = spectral::wavenumber(idx, m);
            let c = c * scale;
            if k == half_old && new_m > m {
                // the old Nyquist cosine splits evenly between ±M/2
                buf[slot(k)] += 0.5 * c;
                buf[slot(-k)] += 0.5 * c;
            } else if k.abs() < half_new {
                buf[slot(k)] += c;
            } else if k.abs() == half_new {
                // folds onto the new Nyquist bin; only its cosine survives on the grid
                buf[slot(half_new)] += c;
            }
        }
        spectral::inverse(&mut buf);
        let w = self.winding as f64;
        let mut nodes: Vec<PlanePoint> = buf
            .iter()
            .enumerate()
            .map(|(i, z)| PlanePoint::new(z.re + w * i as f64 / new_m as f64, z.im))
            .collect();
        if new_m % m == 0 {
            let step = new_m / m;
            for (i, &p) in self.nodes.iter().enumerate() {
                nodes[i * step] = p;
            }
        }
        Curve::new(nodes, self.winding)
    }

    /// The same curve with its parameter rotated by `shift` grid cells.
    pub fn rotate_index(&self, shift: usize) -> Curve {
        let m = self.len();
        let w = self.winding as f64;
        let nodes = (0..m)
            .map(|i| {
                let j = (i + shift) % m;
                let wrap = if i + shift >= m { w } else { 0.0 };
                self.nodes[j] + PlanePoint::new(wrap, 0.0)
            })
            .collect();
        Curve::new(nodes, self.winding).expect("rotation preserves validity")
    }

    /// Orientation reversal γ(-η), re-anchored on the grid.
    pub fn reversed(&self) -> Curve {
        let m = self.len();
        let w = self.winding as f64;
        // γ(-η_i) = γ(η_{M-i}) - (w, 0) for i ≥ 1; η_0 = -π maps to π ≡ η_0 + 2π
        let nodes = (0..m)
            .map(|i| {
                if i == 0 {
                    self.nodes[0] + PlanePoint::new(w, 0.0)
                } else {
                    self.nodes[m - i]
                }
            })
            .collect();
        Curve::new(nodes, -self.winding).expect("reversal preserves validity")
    }

    pub fn translated(&self, v: PlanePoint) -> Curve {
        Curve::new(self.nodes.iter().map(|&p| p + v).collect(), self.winding).expect("finite translation")
    }

    pub fn map_nodes(&self, f: impl Fn(PlanePoint) -> PlanePoint) -> Result<Curve> {
        Curve::new(self.nodes.iter().map(|&p| f(p)).collect(), self.winding)
    }
}

/// One or more curves sharing a grid size.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    curves: Vec<Curve>,
}

impl Chain {
    pub fn new(curves: Vec<Curve>) -> Result<Self> {
        let Some(first) = curves.first() else {
            return Err(Error::InvalidChain("a chain needs at least one curve".into()));
        };
        let m = first.len();
        if let Some(bad) = curves.iter().position(|c| c.len() != m) {
            return Err(Error::InvalidChain(format!(
                "curve {bad} has {} nodes, curve 0 has {m}",
                curves[bad].len()
            )));
        }
        Ok(Chain { curves })
    }

    pub fn single(curve: Curve) -> Self {
        Chain { curves: vec![curve] }
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn into_curves(self) -> Vec<Curve> {
        self.curves
    }

    pub fn num_curves(&self) -> usize {
        self.curves.len()
    }

    /// Shared grid size M.
    pub fn grid_size(&self) -> usize {
        self.curves[0].len()
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.iter().map(Curve::len).sum()
    }

    /// δ_β(η_i) = γ(η_i) - γ(η_i - β) on the given curve.
    pub fn delta(&self, curve_index: usize, eta_index: usize, beta: f64) -> PlanePoint {
        let c = &self.curves[curve_index];
        if beta == 0.0 {
            return PlanePoint::ZERO;
        }
        let eta = grid_eta(eta_index, c.len());
        c.eval(eta, 0) - c.eval(eta - beta, 0)
    }

    pub fn map_curves(&self, f: impl Fn(&Curve) -> Result<Curve>) -> Result<Chain> {
        Chain::new(self.curves.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    pub fn resample(&self, new_m: usize) -> Result<Chain> {
        self.map_curves(|c| c.resample(new_m))
    }

    pub fn translated(&self, v: PlanePoint) -> Chain {
        Chain {
            curves: self.curves.iter().map(|c| c.translated(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.curves
            .iter()
            .flat_map(|c| c.nodes().iter())
            .map(|p| p.norm())
            .fold(0.0, f64::max)
    }

    /// All node coordinates flattened curve by curve.
    pub fn flatten(&self) -> Vec<PlanePoint> {
        self.curves.iter().flat_map(|c| c.nodes().iter().copied()).collect()
    }

    /// Rebuild a chain with the same shape from flattened node positions.
    pub fn with_nodes(&self, nodes: &[PlanePoint]) -> Result<Chain> {
        if nodes.len() != self.total_nodes() {
            return Err(Error::InvalidChain("node count mismatch".into()));
        }
        let m = self.grid_size();
        let curves = self
            .curves
            .iter()
            .enumerate()
            .map(|(k, c)| Curve::new(nodes[k * m..(k + 1) * m].to_vec(), c.winding()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Chain { curves })
    }
}
