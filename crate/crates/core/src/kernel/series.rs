//! Paired lattice sums over the punctured lattice with an analytic tail.
//!
//! For |x| < j the image terms expand in Gegenbauer polynomials,
//! |x - (j,0)|^{-s} = Σ_n C_n^{(s/2)}(x1/|x|) |x|^n j^{-s-n},
//! so the tail j > N of every sum collapses onto Hurwitz zeta values
//! ζ(α + e, N + 1) that depend only on α and N. Those are cached per level.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::point::PlanePoint;
use crate::special::{gegenbauer_sequence, hurwitz_zeta};

/// Number of cached doubling levels; N = 4·2^level.
const LEVELS: usize = 20;
/// Largest integer exponent shift e in ζ(α + e, N + 1).
const MAX_SHIFT: usize = 96;
/// The truncation radius must satisfy N ≥ RADIUS_FACTOR·|x|.
const RADIUS_FACTOR: f64 = 4.0;

pub(crate) fn level_radius(level: usize) -> usize {
    4usize << level
}

#[derive(Debug)]
pub(crate) struct ZetaCache {
    alpha: f64,
    levels: [OnceLock<Vec<f64>>; LEVELS],
}

impl ZetaCache {
    pub(crate) fn new(alpha: f64) -> Self {
        ZetaCache {
            alpha,
            levels: std::array::from_fn(|_| OnceLock::new()),
        }
    }

    /// Entry e holds ζ(α + e, N + 1); entry 0 is unused.
    fn table(&self, level: usize) -> &[f64] {
        self.levels[level].get_or_init(|| {
            let a = level_radius(level) as f64 + 1.0;
            let mut t = vec![f64::NAN; MAX_SHIFT + 1];
            for (e, v) in t.iter_mut().enumerate().skip(1) {
                *v = hurwitz_zeta(self.alpha + e as f64, a);
            }
            t
        })
    }

    /// Smallest cached level whose radius covers `r`, capped by `max_images`.
    pub(crate) fn level_for(&self, r: f64, max_images: usize) -> Result<usize> {
        let needed = RADIUS_FACTOR * r;
        for level in 0..LEVELS {
            let n = level_radius(level);
            if n as f64 >= needed {
                if n > max_images {
                    break;
                }
                return Ok(level);
            }
        }
        Err(Error::TruncationFailure {
            radius: r,
            needed: needed.ceil() as usize,
            cap: max_images,
        })
    }
}

/// Which family of paired sums to evaluate.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairSum {
    /// power p of (x1 ∓ j) in the numerator, 0..=2
    pub p: u32,
    /// s = α + shift
    pub shift: u32,
    /// subtract the leading j^{-α} of each image (only meaningful for p = 0, shift = 0)
    pub renormalize: bool,
}

const BINOM: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 2.0, 1.0]];

/// Σ_{j≥1} [(x1-j)^p u_j^{-s/2} + (x1+j)^p u_{-j}^{-s/2}] with u_{±j} = (x1 ∓ j)² + x2²,
/// optionally minus 2 j^{-α} per pair. `x` should lie in the fundamental strip.
pub(crate) fn pair_sum(
    cache: &ZetaCache,
    x: PlanePoint,
    kind: PairSum,
    level: usize,
    tolerance: f64,
) -> Result<f64> {
    let alpha = cache.alpha;
    let n_direct = level_radius(level);
    let p = kind.p as i32;
    let s = alpha + kind.shift as f64;
    let half_s = 0.5 * s;
    let x2sq = x.x2 * x.x2;

    let mut direct = 0.0;
    // largest j first so the small terms accumulate before the big ones
    for j in (1..=n_direct).rev() {
        let jf = j as f64;
        let a = x.x1 - jf;
        let b = x.x1 + jf;
        let ua = a * a + x2sq;
        let ub = b * b + x2sq;
        if ua == 0.0 || ub == 0.0 {
            return Err(Error::LatticeSingularity { x1: x.x1, x2: x.x2 });
        }
        let mut term = a.powi(p) * ua.powf(-half_s) + b.powi(p) * ub.powf(-half_s);
        if kind.renormalize {
            term -= 2.0 * jf.powf(-alpha);
        }
        direct += term;
    }

    let table = cache.table(level);
    let r = x.norm();
    let lambda = half_s;
    let n_first = if kind.renormalize { 1 } else { 0 };
    let mut tail = 0.0;

    if r == 0.0 {
        // only the n = 0 term survives; x1 = 0 so only k = p contributes and p must be even
        if n_first == 0 && p % 2 == 0 {
            let e = kind.shift as i32 - p;
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            tail = 2.0 * sign * table[e as usize];
        }
        return Ok(direct + tail);
    }

    let t = (x.x1 / r).clamp(-1.0, 1.0);
    let abs_x1 = x.x1.abs();
    let x1_pows = [1.0, x.x1, x.x1 * x.x1];
    let weight_bound: f64 = (0..=p).map(|k| BINOM[p as usize][k as usize] * abs_x1.powi(p - k)).sum();

    let mut gegen = Vec::with_capacity(MAX_SHIFT);
    let n_cap = MAX_SHIFT - kind.shift as usize + p as usize;
    gegenbauer_sequence(lambda, t, n_cap.min(MAX_SHIFT), &mut gegen);

    let mut r_pow = 1.0;
    let mut c_at_one = 1.0; // C_n^{(λ)}(1) = (2λ)_n / n!
    let mut quiet = 0;
    let mut converged = false;
    for n in 0..gegen.len() {
        if n > 0 {
            r_pow *= r;
            c_at_one *= (2.0 * lambda + n as f64 - 1.0) / n as f64;
        }
        if n < 2 * n_first {
            continue;
        }
        let mut contrib = 0.0;
        let mut min_e = usize::MAX;
        for k in 0..=p {
            if (n as i32 + k) % 2 != 0 {
                continue;
            }
            let e = kind.shift as i32 + n as i32 - k;
            if e < 1 || e as usize > MAX_SHIFT {
                continue;
            }
            min_e = min_e.min(e as usize);
            let sign = if k % 2 == 0 { 2.0 } else { -2.0 };
            contrib += sign * BINOM[p as usize][k as usize] * x1_pows[(p - k) as usize] * gegen[n] * r_pow * table[e as usize];
        }
        tail += contrib;
        if min_e != usize::MAX {
            let bound = 2.0 * weight_bound * c_at_one * r_pow * table[min_e];
            if bound < 1e-3 * tolerance && n > p as usize {
                quiet += 1;
                if quiet >= 2 {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    if !converged {
        return Err(Error::TruncationFailure {
            radius: r,
            needed: n_direct * 2,
            cap: n_direct,
        });
    }
    Ok(direct + tail)
}
