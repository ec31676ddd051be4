//! Special functions that the standard crates do not provide.

/// B_{2k} for k = 1..=12.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Hurwitz zeta function ζ(s, a) = Σ_{k≥0} (a + k)^{-s} for s > 1, a > 0.
///
/// Euler–Maclaurin summation: the first K terms are added directly so that
/// the shifted argument a + K is large compared to s, which makes the
/// asymptotic correction converge to full double precision.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1, a > 0");
    let p = BERNOULLI_EVEN.len() as f64;
    let threshold = s + 2.0 * p + 10.0;
    let k = if a < threshold {
        (threshold - a).ceil() as usize
    } else {
        0
    };
    let mut direct = 0.0;
    // smallest terms first
    for i in (0..k).rev() {
        direct += (a + i as f64).powf(-s);
    }
    let b = a + k as f64;
    let b_pow = b.powf(-s);
    let mut tail = b * b_pow / (s - 1.0) + 0.5 * b_pow;

    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * b^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut b_term = b_pow / b;
    for (j, &b2j) in BERNOULLI_EVEN.iter().enumerate() {
        let j = j + 1;
        if j > 1 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 3.0) * (s + m - 2.0);
            fact *= (m - 1.0) * m;
            b_term /= b * b;
        }
        let term = b2j / fact * rising * b_term;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
    }
    direct + tail
}

/// Gegenbauer polynomials C_0^{(λ)}(t), …, C_{n}^{(λ)}(t) via the three-term recurrence.
pub fn gegenbauer_sequence(lambda: f64, t: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(2.0 * lambda * t);
    for k in 2..=n {
        let kf = k as f64;
        let c = (2.0 * t * (kf + lambda - 1.0) * out[k - 1] - (kf + 2.0 * lambda - 2.0) * out[k - 2]) / kf;
        out.push(c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn riemann_zeta_values() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(hurwitz_zeta(2.0, 1.0), pi * pi / 6.0, max_relative = 1e-15);
        assert_relative_eq!(hurwitz_zeta(4.0, 1.0), pi.powi(4) / 90.0, max_relative = 1e-15);
        // ζ(2, 1/2) = (2^2 - 1) ζ(2)
        assert_relative_eq!(hurwitz_zeta(2.0, 0.5), 3.0 * pi * pi / 6.0, max_relative = 1e-15);
    }

    #[test]
    fn zeta_shift_identity() {
        for &s in &[1.3, 2.5, 7.0, 40.0] {
            for &a in &[0.7, 5.0, 129.0] {
                let lhs = hurwitz_zeta(s, a);
                let rhs = a.powf(-s) + hurwitz_zeta(s, a + 1.0);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn zeta_near_pole() {
        // ζ(s, 1) = 1/(s-1) + γ_E + O(s-1)
        let s = 1.0 + 1e-6;
        let euler_gamma = 0.577_215_664_901_532_9;
        assert_relative_eq!(hurwitz_zeta(s, 1.0), 1.0 / (s - 1.0) + euler_gamma, max_relative = 1e-9);
    }

    #[test]
    fn gegenbauer_matches_legendre() {
        // C_n^{(1/2)} are the Legendre polynomials.
        let mut c = Vec::new();
        let t = 0.3;
        gegenbauer_sequence(0.5, t, 3, &mut c);
        assert_relative_eq!(c[2], 0.5 * (3.0 * t * t - 1.0), epsilon = 1e-15);
        assert_relative_eq!(c[3], 0.5 * (5.0 * t * t * t - 3.0 * t), epsilon = 1e-15);
    }

    #[test]
    fn gegenbauer_at_one() {
        // C_n^{(λ)}(1) = (2λ)_n / n!
        let mut c = Vec::new();
        gegenbauer_sequence(0.85, 1.0, 10, &mut c);
        let mut expected = 1.0;
        for (n, &v) in c.iter().enumerate() {
            assert_relative_eq!(v, expected, max_relative = 1e-13);
            expected *= (1.7 + n as f64) / (n as f64 + 1.0);
        }
    }
}
