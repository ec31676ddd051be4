//! Fixed quadrature rules: Gauss–Legendre, Gauss–Jacobi with an endpoint
//! power weight, and Gregory end corrections for the trapezoid rule.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes and weights of a rule on a fixed reference interval.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub–Welsch for the Jacobi weight (1-x)^a (1+x)^b on [-1, 1].
fn gauss_jacobi_symmetric(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let ab = a + b;
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + ab;
            let beta = if k == 0 {
                // the (m + a + b) factor cancels analytically at m = 1
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            jac[(k, k + 1)] = beta.sqrt();
            jac[(k + 1, k)] = beta.sqrt();
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v * v)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    let mut r = gauss_jacobi_symmetric(n, 0.0, 0.0);
    // exact symmetry removes eigen-solver noise
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (r.nodes[j] - r.nodes[i]);
        let w = 0.5 * (r.weights[i] + r.weights[j]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        r.weights[i] = w;
        r.weights[j] = w;
    }
    if n % 2 == 1 {
        r.nodes[n / 2] = 0.0;
    }
    r
}

/// n-point rule for ∫_0^1 y^p f(y) dy, p > -1.
pub fn gauss_jacobi_power(n: usize, p: f64) -> Rule {
    let r = gauss_jacobi_symmetric(n, 0.0, p);
    let scale = 2f64.powf(-p - 1.0);
    Rule {
        nodes: r.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        weights: r.weights.iter().map(|w| w * scale).collect(),
    }
}

/// Gregory end corrections of the given order: the weights c_0..c_{p-1}
/// added (times h) to the first and last p trapezoid weights make the rule
/// exact for polynomials of degree < p.
///
/// From Euler–Maclaurin, the left-end defect of the trapezoid rule for x^k is
/// B_{k+1}/(k+1) for odd k and 0 for even k (h = 1); the corrections match
/// that defect on the first p nodes.
pub fn gregory_corrections(order: usize) -> Vec<f64> {
    // B_2, B_4, ..., B_16
    const B: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let p = order;
    assert!(p <= 2 * B.len(), "unsupported Gregory order {p}");
    if p == 0 {
        return Vec::new();
    }
    let mut a = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for k in 0..p {
        for j in 0..p {
            a[(k, j)] = (j as f64).powi(k as i32);
        }
        if k % 2 == 1 {
            rhs[k] = B[k / 2] / (k as f64 + 1.0);
        }
    }
    let sol = a.lu().solve(&rhs).expect("Vandermonde system is nonsingular");
    sol.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(8);
        for k in 0..16 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
            assert!((got - exact).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn jacobi_power_weight() {
        for &p in &[0.0, 0.3, 0.5, 0.9] {
            let r = gauss_jacobi_power(12, p);
            for k in 0..24 {
                let exact = 1.0 / (k as f64 + p + 1.0);
                let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
                assert_relative_eq!(got, exact, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn gregory_is_exact_for_low_degree() {
        for order in [2usize, 4, 6, 8] {
            let c = gregory_corrections(order);
            // interval [0, 1] with n = 37 cells
            let n = 37;
            let h = 1.0 / n as f64;
            for k in 0..order {
                let f = |x: f64| x.powi(k as i32);
                let mut s = 0.0;
                for j in 0..=n {
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += w * f(j as f64 * h);
                }
                for (j, cj) in c.iter().enumerate() {
                    s += cj * (f(j as f64 * h) + f(1.0 - j as f64 * h));
                }
                assert_relative_eq!(s * h, 1.0 / (k as f64 + 1.0), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn gregory_order_of_accuracy() {
        let c = gregory_corrections(8);
        let rule = |n: usize| {
            let h = 1.0 / n as f64;
            let f = |x: f64| (3.0 * x).exp();
            let mut s = 0.0;
            for j in 0..=n {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += w * f(j as f64 * h);
            }
            for (j, cj) in c.iter().enumerate() {
                s += cj * (f(j as f64 * h) + f(1.0 - j as f64 * h));
            }
            s * h
        };
        let exact = ((3.0f64).exp() - 1.0) / 3.0;
        let e1 = (rule(20) - exact).abs();
        let e2 = (rule(40) - exact).abs();
        assert!(e2 < 1e-10 && e1 / e2 > 100.0, "{e1} {e2}");
    }
}
