//! Quadrature helpers: Gauss-Legendre nodes and simple adaptive schemes.

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre polynomial (accurate to machine precision for
/// the small orders used here).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Evaluates the Legendre polynomial P_n and its derivative at x via the
/// three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrates `f` over [a, b] with an `n`-point Gauss-Legendre rule.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Integrates `f` over the rectangle [ax, bx]×[ay, by] with a tensor-product
/// Gauss-Legendre rule of `n` points per axis.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    n: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let hx = 0.5 * (bx - ax);
    let mx = 0.5 * (ax + bx);
    let hy = 0.5 * (by - ay);
    let my = 0.5 * (ay + by);
    let mut total = 0.0;
    for (i, &xi) in nodes.iter().enumerate() {
        let x = mx + hx * xi;
        let mut row = 0.0;
        for (j, &yj) in nodes.iter().enumerate() {
            row += weights[j] * f(x, my + hy * yj);
        }
        total += weights[i] * row;
    }
    total * hx * hy
}

/// Adaptive 1-D integration by interval bisection with an embedded
/// (n, 2n+1)-point Gauss-Legendre error estimate.
pub fn integrate_1d_adaptive<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let coarse = integrate_1d(f, a, b, 15);
        let fine = integrate_1d(f, a, b, 31);
        if (fine - coarse).abs() <= tol || depth >= 24 {
            fine
        } else {
            let mid = 0.5 * (a + b);
            recurse(f, a, mid, 0.5 * tol, depth + 1) + recurse(f, mid, b, 0.5 * tol, depth + 1)
        }
    }
    recurse(f, a, b, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n-point rule is exact for degree 2n−1.
        let val = integrate_1d(|x| x.powi(9) + 3.0 * x.powi(4), -1.0, 2.0, 8);
        let exact = (2.0f64.powi(10) - 1.0) / 10.0 + 3.0 * (2.0f64.powi(5) + 1.0) / 5.0;
        assert_abs_diff_eq!(val, exact, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_integral_1d() {
        let val = integrate_1d(|x| (-x * x).exp(), -8.0, 8.0, 64);
        assert_abs_diff_eq!(val, PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn gaussian_integral_2d() {
        let val = integrate_2d(|x, y| (-(x * x + y * y)).exp(), -8.0, 8.0, -8.0, 8.0, 48);
        assert_abs_diff_eq!(val, PI, epsilon = 1e-10);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let sigma: f64 = 1e-2;
        let val = integrate_1d_adaptive(
            |x: f64| (-(x / sigma).powi(2) / 2.0).exp(),
            -1.0,
            1.0,
            1e-12,
        );
        assert_abs_diff_eq!(val, sigma * (2.0 * PI).sqrt(), epsilon = 1e-10);
    }
}
