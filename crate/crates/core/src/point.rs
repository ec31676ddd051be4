use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane. The horizontal period is 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x1: f64,
    pub x2: f64,
}

impl PlanePoint {
    pub const ZERO: PlanePoint = PlanePoint { x1: 0.0, x2: 0.0 };

    #[inline]
    pub const fn new(x1: f64, x2: f64) -> Self {
        PlanePoint { x1, x2 }
    }

    /// Rotation by a quarter turn, `(-x2, x1)`.
    #[inline]
    pub fn perp(self) -> Self {
        PlanePoint::new(-self.x2, self.x1)
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// Horizontal lattice point `n_j = (j, 0)`.
    #[inline]
    pub fn lattice(j: i64) -> Self {
        PlanePoint::new(j as f64, 0.0)
    }

    /// Covering map onto the fundamental strip `-1/2 <= x1 < 1/2`.
    /// Returns the reduced point together with the integer shift removed.
    #[inline]
    pub fn reduce_to_strip(self) -> (Self, i64) {
        let shift = (self.x1 + 0.5).floor();
        (PlanePoint::new(self.x1 - shift, self.x2), shift as i64)
    }

    /// Distance to the punctured lattice `L* = {(j, 0) : j != 0}`.
    pub fn dist_to_punctured_lattice(self) -> f64 {
        let j = self.x1.round();
        let nearest = if j == 0.0 {
            if self.x1 >= 0.0 {
                1.0
            } else {
                -1.0
            }
        } else {
            j
        };
        PlanePoint::new(self.x1 - nearest, self.x2).norm()
    }
}

impl Add for PlanePoint {
    type Output = PlanePoint;
    #[inline]
    fn add(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for PlanePoint {
    type Output = PlanePoint;
    #[inline]
    fn sub(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl AddAssign for PlanePoint {
    #[inline]
    fn add_assign(&mut self, o: PlanePoint) {
        self.x1 += o.x1;
        self.x2 += o.x2;
    }
}

impl SubAssign for PlanePoint {
    #[inline]
    fn sub_assign(&mut self, o: PlanePoint) {
        self.x1 -= o.x1;
        self.x2 -= o.x2;
    }
}

impl Mul<f64> for PlanePoint {
    type Output = PlanePoint;
    #[inline]
    fn mul(self, s: f64) -> PlanePoint {
        PlanePoint::new(self.x1 * s, self.x2 * s)
    }
}

impl Mul<PlanePoint> for f64 {
    type Output = PlanePoint;
    #[inline]
    fn mul(self, p: PlanePoint) -> PlanePoint {
        p * self
    }
}

impl Neg for PlanePoint {
    type Output = PlanePoint;
    #[inline]
    fn neg(self) -> PlanePoint {
        PlanePoint::new(-self.x1, -self.x2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_reduction() {
        let (p, k) = PlanePoint::new(2.3, 1.0).reduce_to_strip();
        assert!((p.x1 - 0.3).abs() < 1e-15);
        assert_eq!(k, 2);
        let (p, k) = PlanePoint::new(-0.5, 0.0).reduce_to_strip();
        assert_eq!((p.x1, k), (-0.5, 0));
        let (p, k) = PlanePoint::new(0.5, 0.0).reduce_to_strip();
        assert_eq!((p.x1, k), (-0.5, 1));
    }

    #[test]
    fn punctured_lattice_distance() {
        assert_eq!(PlanePoint::new(0.0, 0.0).dist_to_punctured_lattice(), 1.0);
        assert!((PlanePoint::new(1.2, 0.0).dist_to_punctured_lattice() - 0.2).abs() < 1e-15);
        assert!((PlanePoint::new(-0.4, 0.3).dist_to_punctured_lattice() - 0.6f64.hypot(0.3)).abs() < 1e-15);
    }
}
