//! FFT plumbing for uniformly sampled periodic data.
//!
//! A planar curve is packed as z = x1 + i x2. Every multiplier used here
//! satisfies m(-k) = conj(m(k)), so filtering z filters both coordinates
//! independently and keeps them real.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        let (planner, cache) = &mut *p.borrow_mut();
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Unnormalized forward DFT, X_k = Σ x_j e^{-2πijk/M}.
pub fn forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Inverse DFT including the 1/M normalization.
pub fn inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, true).process(buf);
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Signed wavenumber of FFT bin `idx` for length `m` (Nyquist reported as +m/2).
#[inline]
pub fn wavenumber(idx: usize, m: usize) -> i64 {
    if idx <= m / 2 {
        idx as i64
    } else {
        idx as i64 - m as i64
    }
}

/// Multiplier that evaluates the q-th derivative of the trigonometric
/// interpolant at the shifted nodes s_i - θ.
///
/// The Nyquist bin of a real signal interpolates as X cos(M s / 2)/M, whose
/// q-th derivative at the shifted nodes reduces to the factor
/// (M/2)^q cos(qπ/2 - Mθ/2).
pub fn shift_derivative_multiplier(k: i64, m: usize, q: u32, theta: f64) -> Complex64 {
    if 2 * k == m as i64 {
        let half = m as f64 / 2.0;
        if theta == 0.0 {
            let v = match q % 4 {
                0 => 1.0,
                2 => -1.0,
                _ => 0.0,
            };
            return Complex64::new(v * half.powi(q as i32), 0.0);
        }
        let phase = q as f64 * std::f64::consts::FRAC_PI_2 - half * theta;
        return Complex64::new(half.powi(q as i32) * phase.cos(), 0.0);
    }
    let kf = k as f64;
    let ik_q = match q % 4 {
        0 => Complex64::new(kf.powi(q as i32), 0.0),
        1 => Complex64::new(0.0, kf.powi(q as i32)),
        2 => Complex64::new(-kf.powi(q as i32), 0.0),
        _ => Complex64::new(0.0, -kf.powi(q as i32)),
    };
    if theta == 0.0 {
        ik_q
    } else {
        ik_q * Complex64::from_polar(1.0, -kf * theta)
    }
}

/// Apply `multiplier(k)` in Fourier space to a spectrum and return the
/// inverse transform.
pub fn filter(spectrum: &[Complex64], mut multiplier: impl FnMut(i64) -> Complex64) -> Vec<Complex64> {
    let m = spectrum.len();
    let mut buf: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(idx, &c)| c * multiplier(wavenumber(idx, m)))
        .collect();
    inverse(&mut buf);
    buf
}

/// Periodic circular convolution of real samples with a real kernel that is
/// stored centred at index 0 (kernel[j] multiplies the offset j mod M).
pub fn circular_convolve(values: &[Complex64], kernel: &[f64]) -> Vec<Complex64> {
    let m = values.len();
    assert_eq!(m, kernel.len());
    let mut a = values.to_vec();
    let mut b: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut a);
    forward(&mut b);
    // kernel is real: its transform is Hermitian, so multiplying z = x + iy
    // convolves the two real parts independently
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    inverse(&mut a);
    a
}
