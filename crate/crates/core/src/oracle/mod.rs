//! Slow, independent references: area quadrature of the constitutive law and
//! the path integral of R. Nothing here calls the fast kernel or CDE code.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::contour::Chain;
use crate::error::{Error, Result};
use crate::point::PlanePoint;

fn c_alpha(alpha: f64) -> f64 {
    gamma(alpha / 2.0) / (PI * 2f64.powf(2.0 - alpha) * gamma(1.0 - alpha / 2.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// K(z) = -α c z^⊥ / |z|^{2+α}, returned as (K1, K2).
#[inline]
fn kernel(ac: f64, alpha: f64, z1: f64, z2: f64) -> (f64, f64) {
    let r2 = z1 * z1 + z2 * z2;
    let f = ac * r2.powf(-1.0 - alpha / 2.0);
    (f * z2, -f * z1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaQuadratureConfig {
    pub cells_per_unit: usize,
    pub image_radius: usize,
}

impl Default for AreaQuadratureConfig {
    fn default() -> Self {
        AreaQuadratureConfig {
            cells_per_unit: 1024,
            image_radius: 4096,
        }
    }
}

const NEAR_IMAGES: i64 = 2;
const BLOCK_IMAGES: i64 = 64;
const BLOCK: usize = 16;
const SUB: usize = 4;
const UPSAMPLE: usize = 16;

/// Trigonometric interpolation of each curve to a fine closed polygon, by a
/// plain DFT of the de-wound nodes.
fn fine_polygons(chain: &Chain) -> Vec<(Vec<(f64, f64)>, i64)> {
    chain
        .curves()
        .iter()
        .map(|c| {
            let nodes = c.nodes();
            let m = nodes.len();
            let w = c.winding() as f64;
            let lin = |i: f64| w * i / m as f64;
            let half = m / 2;
            let mut coef = vec![(0.0, 0.0, 0.0, 0.0); half + 1];
            for (k, ck) in coef.iter_mut().enumerate() {
                for (i, p) in nodes.iter().enumerate() {
                    let th = 2.0 * PI * (k * i) as f64 / m as f64;
                    let (s, co) = th.sin_cos();
                    let x1 = p.x1 - lin(i as f64);
                    ck.0 += x1 * co;
                    ck.1 += x1 * s;
                    ck.2 += p.x2 * co;
                    ck.3 += p.x2 * s;
                }
            }
            let n = m * UPSAMPLE;
            let pts = (0..n)
                .map(|j| {
                    let u = j as f64 / UPSAMPLE as f64;
                    let (mut x1, mut x2) = (0.0, 0.0);
                    for (k, ck) in coef.iter().enumerate() {
                        let wgt = if k == 0 || (k == half && m % 2 == 0) { 1.0 } else { 2.0 } / m as f64;
                        let th = 2.0 * PI * k as f64 * u / m as f64;
                        let (s, co) = th.sin_cos();
                        x1 += wgt * (ck.0 * co + ck.1 * s);
                        x2 += wgt * (ck.2 * co + ck.3 * s);
                    }
                    (x1 + lin(u), x2)
                })
                .collect();
            (pts, c.winding())
        })
        .collect()
}

struct Region {
    /// For every column (x1 value), the sorted x2 values where the boundary crosses.
    crossings: Vec<Vec<f64>>,
}

impl Region {
    fn inside(&self, col: usize, y: f64) -> bool {
        let c = &self.crossings[col];
        let above = c.len() - c.partition_point(|&v| v <= y);
        above % 2 == 1
    }

    /// Parts of the segment [lo, hi] of a column that lie inside.
    fn clip(&self, col: usize, lo: f64, hi: f64, out: &mut Vec<(f64, f64)>) {
        let c = &self.crossings[col];
        let mut i = c.partition_point(|&v| v <= lo);
        let mut inside = (c.len() - i) % 2 == 1;
        let mut start = lo;
        while i < c.len() && c[i] < hi {
            if inside {
                out.push((start, c[i]));
            }
            start = c[i];
            inside = !inside;
            i += 1;
        }
        if inside {
            out.push((start, hi));
        }
    }

    fn touches(&self, col: usize, lo: f64, hi: f64) -> bool {
        let c = &self.crossings[col];
        let i = c.partition_point(|&v| v < lo);
        i < c.len() && c[i] <= hi
    }
}

/// Columns at x1 = x0 + (k + 1/2) dx for k < ncols.
fn column_crossings(polys: &[(Vec<(f64, f64)>, i64)], shifts: &[f64], x0: f64, dx: f64, ncols: usize) -> Region {
    let mut crossings = vec![Vec::new(); ncols];
    for (pts, w) in polys {
        let n = pts.len();
        for i in 0..n {
            let a = pts[i];
            let mut b = pts[(i + 1) % n];
            if i + 1 == n {
                b.0 += *w as f64;
            }
            for &s in shifts {
                let (ax, bx) = (a.0 + s, b.0 + s);
                let (lo, hi) = if ax <= bx { (ax, bx) } else { (bx, ax) };
                // half-open in x1 so that a column through a vertex counts once
                let k0 = ((lo - x0) / dx - 0.5).ceil().max(0.0);
                let k1 = ((hi - x0) / dx - 0.5).ceil().min(ncols as f64);
                let mut k = k0;
                while k < k1 {
                    let xc = x0 + (k + 0.5) * dx;
                    let t = (xc - ax) / (bx - ax);
                    crossings[k as usize].push(a.1 + t * (b.1 - a.1));
                    k += 1.0;
                }
            }
        }
    }
    for c in &mut crossings {
        c.sort_by(f64::total_cmp);
    }
    Region { crossings }
}

#[derive(Default, Clone, Copy)]
struct Acc {
    near: (f64, f64),
    mass: f64,
    m1: f64,
    m2: f64,
}

impl Acc {
    fn add(&mut self, o: &Acc) {
        self.near.0 += o.near.0;
        self.near.1 += o.near.1;
        self.mass += o.mass;
        self.m1 += o.m1;
        self.m2 += o.m2;
    }
}

/// u(x) = Σ_j ∫_Ω K(x − n_j − y) dy by the midpoint rule on a grid with x at
/// a cell corner. Boundary cells are refined 4×4 once, each sub-cell clipped
/// vertically to the exact inside part of its column. Images |j| ≤ 2 use every
/// sample, |j| ≤ 64 use 16×16-cell block aggregates, the rest the patch
/// monopole, plus the leading-order tail beyond image_radius.
pub fn velocity_area_integral(x: PlanePoint, chain: &Chain, alpha: f64, cfg: &AreaQuadratureConfig) -> Result<PlanePoint> {
    check_alpha(alpha)?;
    if cfg.cells_per_unit < 8 || cfg.image_radius < BLOCK_IMAGES as usize {
        return Err(Error::Config("area quadrature needs cells_per_unit ≥ 8 and image_radius ≥ 64".into()));
    }
    let total_w: i64 = chain.curves().iter().map(|c| c.winding()).sum();
    if total_w != 0 {
        return Err(Error::InvalidChain(format!(
            "area oracle needs a bounded region per period; windings sum to {total_w}"
        )));
    }
    let ac = alpha * c_alpha(alpha);
    let h = 1.0 / cfg.cells_per_unit as f64;
    let polys = fine_polygons(chain);
    let periodic = chain.curves().iter().any(|c| c.winding() != 0);

    let mut dist = f64::INFINITY;
    for (pts, _) in &polys {
        for &(p1, p2) in pts {
            let d1 = x.x1 - p1;
            let d1 = d1 - (d1 + 0.5).floor();
            dist = dist.min(d1.hypot(x.x2 - p2));
        }
    }
    if dist < 2.0 * h {
        return Err(Error::OnBoundary {
            distance: dist,
            floor: 2.0 * h,
        });
    }

    // grid: cell (i, k) spans [x1 + i h, x1 + (i+1) h] × [x2 + k h, ...]
    let (ymin, ymax) = polys
        .iter()
        .flat_map(|(p, _)| p.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (i0, ncols, shifts): (i64, usize, Vec<f64>) = if periodic {
        let n = cfg.cells_per_unit as i64;
        let base: Vec<f64> = (-3..=3).map(|s| s as f64).collect();
        (-n / 2, n as usize, base)
    } else {
        let (xmin, xmax) = polys
            .iter()
            .flat_map(|(p, _)| p.iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let i0 = ((xmin - x.x1) / h).floor() as i64 - 1;
        let i1 = ((xmax - x.x1) / h).ceil() as i64 + 1;
        (i0, (i1 - i0) as usize, vec![0.0])
    };
    let k0 = ((ymin - x.x2) / h).floor() as i64 - 1;
    let k1 = ((ymax - x.x2) / h).ceil() as i64 + 1;
    let nrows = (k1 - k0) as usize;
    let gx0 = x.x1 + i0 as f64 * h;
    let gy0 = x.x2 + k0 as f64 * h;

    let coarse = column_crossings(&polys, &shifts, gx0, h, ncols);
    let fine = column_crossings(&polys, &shifts, gx0, h / SUB as f64, ncols * SUB);

    let nbx = ncols.div_ceil(BLOCK);
    let nby = nrows.div_ceil(BLOCK);
    // per column strip of blocks, in fixed order
    let strips: Vec<Vec<Acc>> = (0..nbx)
        .into_par_iter()
        .map(|bx| {
            let mut blocks = vec![Acc::default(); nby];
            for i in bx * BLOCK..((bx + 1) * BLOCK).min(ncols) {
                for k in 0..nrows {
                    let ylo = gy0 + k as f64 * h;
                    let samples: Vec<(f64, f64, f64)> = if (0..SUB).any(|s| fine.touches(i * SUB + s, ylo, ylo + h))
                        || coarse.touches(i, ylo, ylo + h)
                    {
                        let mut v = Vec::with_capacity(SUB * SUB);
                        let mut seg = Vec::new();
                        for s in 0..SUB {
                            let xc = gx0 + (i as f64 + (s as f64 + 0.5) / SUB as f64) * h;
                            for t in 0..SUB {
                                let lo = ylo + t as f64 * h / SUB as f64;
                                seg.clear();
                                fine.clip(i * SUB + s, lo, lo + h / SUB as f64, &mut seg);
                                for &(a, b) in &seg {
                                    v.push((xc, 0.5 * (a + b), (b - a) * h / SUB as f64));
                                }
                            }
                        }
                        v
                    } else if coarse.inside(i, ylo + 0.5 * h) {
                        vec![(gx0 + (i as f64 + 0.5) * h, ylo + 0.5 * h, h * h)]
                    } else {
                        Vec::new()
                    };
                    let acc = &mut blocks[k / BLOCK];
                    for (y1, y2, wgt) in samples {
                        for j in -NEAR_IMAGES..=NEAR_IMAGES {
                            let (k1v, k2v) = kernel(ac, alpha, x.x1 - j as f64 - y1, x.x2 - y2);
                            acc.near.0 += wgt * k1v;
                            acc.near.1 += wgt * k2v;
                        }
                        acc.mass += wgt;
                        acc.m1 += wgt * y1;
                        acc.m2 += wgt * y2;
                    }
                }
            }
            blocks
        })
        .collect();

    let mut total = Acc::default();
    let (mut u1, mut u2) = (0.0, 0.0);
    for strip in &strips {
        for b in strip {
            total.add(b);
            u1 += b.near.0;
            u2 += b.near.1;
            if b.mass == 0.0 {
                continue;
            }
            let (c1, c2) = (b.m1 / b.mass, b.m2 / b.mass);
            for j in (NEAR_IMAGES + 1)..=BLOCK_IMAGES {
                for s in [-1.0, 1.0] {
                    let (k1v, k2v) = kernel(ac, alpha, x.x1 - s * j as f64 - c1, x.x2 - c2);
                    u1 += b.mass * k1v;
                    u2 += b.mass * k2v;
                }
            }
        }
    }
    if total.mass > 0.0 {
        let (c1, c2) = (total.m1 / total.mass, total.m2 / total.mass);
        let (z1, z2) = (x.x1 - c1, x.x2 - c2);
        for j in (BLOCK_IMAGES + 1)..=cfg.image_radius as i64 {
            for s in [-1.0, 1.0] {
                let (k1v, k2v) = kernel(ac, alpha, z1 - s * j as f64, z2);
                u1 += total.mass * k1v;
                u2 += total.mass * k2v;
            }
        }
        // Σ_{j>J} j^{-2-α} ≈ (J + 1/2)^{-1-α} / (1 + α)
        let tail = (cfg.image_radius as f64 + 0.5).powf(-1.0 - alpha) / (1.0 + alpha);
        u1 += total.mass * 2.0 * ac * z2 * tail;
        u2 += total.mass * 2.0 * ac * (1.0 + alpha) * z1 * tail;
    }
    Ok(PlanePoint::new(u1, u2))
}

/// H(y) = Σ_{j≠0} K(y − n_j), paired sums at N, 2N, 4N with the two leading
/// tail orders N^{-1-α}, N^{-2-α} eliminated.
fn h_direct(ac: f64, alpha: f64, y: (f64, f64), n: usize) -> (f64, f64) {
    let partial = |upto: usize, from: usize, acc: (f64, f64)| {
        let (mut a, mut b) = acc;
        for j in from..=upto {
            for s in [-1.0, 1.0] {
                let (k1, k2) = kernel(ac, alpha, y.0 - s * j as f64, y.1);
                a += k1;
                b += k2;
            }
        }
        (a, b)
    };
    let s1 = partial(n, 1, (0.0, 0.0));
    let s2 = partial(2 * n, n + 1, s1);
    let s4 = partial(4 * n, 2 * n + 1, s2);
    let (p, q) = (1.0 + alpha, 2.0 + alpha);
    let (r1, r2) = (2f64.powf(p), 2f64.powf(q));
    let ext = |a: f64, b: f64, c: f64| {
        let ab = (r1 * b - a) / (r1 - 1.0);
        let bc = (r1 * c - b) / (r1 - 1.0);
        (r2 * bc - ab) / (r2 - 1.0)
    };
    (ext(s1.0, s2.0, s4.0), ext(s1.1, s2.1, s4.1))
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let d = hw * GK_NODES[i];
        let s = f(c - d) + f(c + d);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * hw, ((k - g) * hw).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
    let (v, err) = gauss_kronrod(f, a, b);
    if err <= tol {
        return Ok(v);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!("path integral did not reach {tol:e} on [{a}, {b}]")));
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, 0.5 * tol, depth - 1)? + adaptive(f, m, b, 0.5 * tol, depth - 1)?)
}

/// Images summed directly before extrapolation in the path-integral oracle.
pub const PATH_IMAGES: usize = 1000;

/// R(x) = ∫_0^1 ∇R(t x)·x dt with ∇R = −H^⊥ along the straight ray from 0.
pub fn r_alpha_path_integral(x: PlanePoint, alpha: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if x.x1 == 0.0 && x.x2 == 0.0 {
        return Ok(0.0);
    }
    if x.x2 == 0.0 && x.x1.abs() >= 1.0 {
        return Err(Error::LatticeSingularity { x1: x.x1, x2: x.x2 });
    }
    let ac = alpha * c_alpha(alpha);
    let f = |t: f64| {
        let (h1, h2) = h_direct(ac, alpha, (t * x.x1, t * x.x2), PATH_IMAGES);
        h2 * x.x1 - h1 * x.x2
    };
    adaptive(&f, 0.0, 1.0, tol, 30)
}
