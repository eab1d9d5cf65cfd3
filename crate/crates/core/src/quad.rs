//! Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// Nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1);
    let n = order as f64;
    let mut rule = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 1 { x } else { p1 };
            let prev = if order == 1 { 1.0 } else { p0 };
            dp = n * (x * p - prev) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// `∫_a^b f` with `pieces` equal panels of the given order.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, order: usize, pieces: usize) -> f64 {
    let rule = gauss_legendre(order);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|j| {
            let lo = a + j as f64 * h;
            let mid = lo + 0.5 * h;
            rule.iter()
                .map(|&(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for order in 1..12 {
            let deg = 2 * order - 1;
            let got = integrate(|x| x.powi(deg as i32) + 1.0, 0.0, 1.0, order, 1);
            assert!(
                (got - (1.0 / (deg as f64 + 1.0) + 1.0)).abs() < 1e-14,
                "{order}"
            );
            let w: f64 = gauss_legendre(order).iter().map(|p| p.1).sum();
            assert!((w - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn smooth_integrand() {
        let got = integrate(f64::exp, 0.0, 2.0, 20, 4);
        assert!((got - 2f64.exp_m1()).abs() < 1e-13);
    }
}
