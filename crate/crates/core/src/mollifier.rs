//! Friedrichs mollification on the periodic parameter circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cde::{cde_velocity, QuadratureConfig, VelocitySample};
use crate::contour::{Chain, Curve};
use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::point::PlanePoint;
use crate::spectral;

/// φ_ε(x) = ε^{-1} φ₁(x/ε) with φ₁ ∝ exp(-1/(1 - x²)) on (-1, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierConfig {
    pub epsilon: f64,
}

impl MollifierConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon < 2.0 * PI {
            Ok(MollifierConfig { epsilon })
        } else {
            Err(Error::Config(format!("mollifier epsilon must lie in (0, 2π), got {epsilon}")))
        }
    }

    /// Discrete weights ω_j for offsets j = 0..M (offset j ≡ j - M), summing to one.
    pub fn weights(&self, m: usize) -> Vec<f64> {
        let h = 2.0 * PI / m as f64;
        let mut w: Vec<f64> = (0..m)
            .map(|j| {
                let offset = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
                bump(offset * h / self.epsilon)
            })
            .collect();
        let mass: f64 = w.iter().sum();
        if mass == 0.0 {
            // ε below the grid spacing: the identity
            w[0] = 1.0;
            return w;
        }
        // pair symmetric offsets before normalizing so the kernel stays exactly even
        for j in 1..m.div_ceil(2) {
            let avg = 0.5 * (w[j] + w[m - j]);
            w[j] = avg;
            w[m - j] = avg;
        }
        let mass: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= mass);
        w
    }

    /// φ_ε * f for periodic samples.
    pub fn apply(&self, values: &[PlanePoint]) -> Vec<PlanePoint> {
        let w = self.weights(values.len());
        convolve(values, &w)
    }

    pub fn apply_scalar(&self, values: &[f64]) -> Vec<f64> {
        let packed: Vec<PlanePoint> = values.iter().map(|&v| PlanePoint::new(v, 0.0)).collect();
        self.apply(&packed).into_iter().map(|p| p.x1).collect()
    }

    /// φ_ε * γ on the de-wound part, winding restored.
    pub fn apply_curve(&self, curve: &Curve) -> Result<Curve> {
        let m = curve.len();
        let smooth = self.apply(&curve.periodic_part());
        let w = curve.winding() as f64;
        let nodes = smooth
            .into_iter()
            .enumerate()
            .map(|(i, p)| PlanePoint::new(p.x1 + w * i as f64 / m as f64, p.x2))
            .collect();
        Curve::new(nodes, curve.winding())
    }

    pub fn apply_chain(&self, chain: &Chain) -> Result<Chain> {
        chain.map_curves(|c| self.apply_curve(c))
    }
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn convolve(values: &[PlanePoint], weights: &[f64]) -> Vec<PlanePoint> {
    let nonzero: Vec<(usize, f64)> = weights.iter().copied().enumerate().filter(|(_, w)| *w != 0.0).collect();
    let m = values.len();
    if nonzero.len() * 8 < m {
        // narrow kernel: direct sum in a fixed order
        return (0..m)
            .map(|i| {
                let mut acc = PlanePoint::ZERO;
                for &(j, w) in &nonzero {
                    acc += values[(i + m - j) % m] * w;
                }
                acc
            })
            .collect();
    }
    let packed: Vec<Complex64> = values.iter().map(|p| Complex64::new(p.x1, p.x2)).collect();
    spectral::circular_convolve(&packed, weights)
        .into_iter()
        .map(|z| PlanePoint::new(z.re, z.im))
        .collect()
}

/// L_ε(γ) = φ_ε * L(φ_ε * γ).
pub fn cde_velocity_mollified(
    chain: &Chain,
    cfg: &KernelConfig,
    quad: &QuadratureConfig,
    moll: &MollifierConfig,
) -> Result<VelocitySample> {
    let smooth = moll.apply_chain(chain)?;
    let l = cde_velocity(&smooth, cfg, quad)?;
    Ok(VelocitySample {
        per_curve: l.per_curve.iter().map(|v| moll.apply(v)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cde::Coupling;
    use proptest::prelude::*;

    #[test]
    fn unit_mass_even_and_supported() {
        for &(m, eps) in &[(256usize, 0.1), (1024, 0.01), (64, 1.0), (16, 0.01)] {
            let w = MollifierConfig::new(eps).unwrap().weights(m);
            let mass: f64 = w.iter().sum();
            assert!((mass - 1.0).abs() < 1e-12);
            let h = 2.0 * PI / m as f64;
            for j in 1..m {
                assert_eq!(w[j], w[m - j]);
                let offset = (j.min(m - j)) as f64 * h;
                if offset >= eps {
                    assert_eq!(w[j], 0.0);
                }
            }
        }
        assert!(MollifierConfig::new(0.0).is_err());
        assert!(MollifierConfig::new(7.0).is_err());
    }

    #[test]
    fn rate_for_sine() {
        for &eps in &[0.1, 0.01] {
            let m = 4096;
            let f: Vec<f64> = (0..m).map(|i| crate::contour::grid_eta(i, m).sin()).collect();
            let g = MollifierConfig::new(eps).unwrap().apply_scalar(&f);
            let err = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            // ‖f‖_{C^{0,1}} = sup|f| + Lip(f) = 2
            assert!(err <= 2.0 * PI * eps * 2.0, "{eps}: {err}");
            assert!(err > 0.0);
        }
    }

    #[test]
    fn preserves_flat_front() {
        let c = Curve::from_fn(64, 1, |t| PlanePoint::new(t / (2.0 * PI), 0.3)).unwrap();
        let s = MollifierConfig::new(0.3).unwrap().apply_curve(&c).unwrap();
        for (a, b) in s.nodes().iter().zip(c.nodes()) {
            assert!((*a - *b).norm() < 1e-15);
        }
    }

    #[test]
    fn mollified_flat_layer_is_steady() {
        let layer = Chain::new(vec![
            Curve::from_fn(64, -1, |t| PlanePoint::new(-t / (2.0 * PI), 0.3)).unwrap(),
            Curve::from_fn(64, 1, |t| PlanePoint::new(t / (2.0 * PI), -0.3)).unwrap(),
        ])
        .unwrap();
        let k = KernelConfig::with_alpha(0.5).unwrap();
        for eps in [0.5, 0.1] {
            let m = MollifierConfig::new(eps).unwrap();
            let q = QuadratureConfig { coupling: Coupling::SelfOnly, ..QuadratureConfig::default() };
            let l = cde_velocity_mollified(&layer, &k, &q, &m).unwrap();
            assert!(l.max_norm() < 1e-13);
            let l = cde_velocity_mollified(&layer, &k, &QuadratureConfig::default(), &m).unwrap();
            assert!(l.flatten().iter().all(|v| v.x2.abs() < 1e-13));
        }
    }

    #[test]
    fn mollified_velocity_converges() {
        let circle = Chain::single(Curve::from_fn(512, 0, |t| PlanePoint::new(0.2 * t.cos(), 0.1 * t.sin())).unwrap());
        let k = KernelConfig::with_alpha(0.5).unwrap();
        let q = QuadratureConfig::default();
        let exact = cde_velocity(&circle, &k, &q).unwrap().flatten();
        let epss = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = epss
            .iter()
            .map(|&e| {
                let v = cde_velocity_mollified(&circle, &k, &q, &MollifierConfig::new(e).unwrap()).unwrap().flatten();
                v.iter().zip(&exact).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max)
            })
            .collect();
        // least-squares slope of log err against log ε
        let xs: Vec<f64> = epss.iter().map(|e: &f64| e.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope >= 0.9, "{errs:?} slope {slope}");
    }

    proptest! {
        #[test]
        fn self_adjoint(seed in 0u64..1000, eps in 0.05..2.0f64) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = 128;
            let f: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let moll = MollifierConfig::new(eps).unwrap();
            let pf = moll.apply_scalar(&f);
            let pg = moll.apply_scalar(&g);
            let lhs: f64 = pf.iter().zip(&g).map(|(a, b)| a * b).sum();
            let rhs: f64 = f.iter().zip(&pg).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
