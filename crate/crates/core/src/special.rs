//! Gamma-function helpers that stay accurate when the arguments are huge.
//!
//! `ln Γ(x+n) - ln Γ(x)` loses every significant digit once `x` is large
//! (at `x = 1e300` both terms are ~7e302). For `x >= 10` the difference is
//! formed directly from the Stirling series so only the small correction
//! terms are ever subtracted.

use statrs::function::gamma;

use crate::error::{domain, Result};

/// Below this many factors the rising factorial is summed term by term.
const DIRECT_SUM_LIMIT: f64 = 32.0;
/// Threshold for the asymptotic branches.
const ASYMPTOTIC_MIN: f64 = 10.0;

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_rising(1.0, n as f64)
    }
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    ln_rising((n - k + 1) as f64, k as f64) - ln_factorial(k)
}

/// Tail of Stirling's series for `ln Γ(y)`:
/// `Σ_k B_{2k} / (2k(2k-1) y^{2k-1})`, valid for `y >= 10`.
fn stirling_tail(y: f64) -> f64 {
    let r = 1.0 / y;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360360.0))))))
}

/// Tail of the asymptotic series for `ψ(y)` beyond `ln y - 1/(2y)`:
/// `Σ_k B_{2k} / (2k y^{2k})`.
fn digamma_tail(y: f64) -> f64 {
    let r2 = 1.0 / (y * y);
    r2 * (1.0 / 12.0
        - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0)))))
}

/// `ln Γ(x+n) - ln Γ(x)` for `x > 0`, `n >= 0`, without range checks.
pub(crate) fn ln_rising(x: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    if n <= DIRECT_SUM_LIMIT && n.fract() == 0.0 {
        let mut acc = 0.0;
        let mut i = 0.0;
        while i < n {
            acc += (x + i).ln();
            i += 1.0;
        }
        return acc;
    }
    if x >= ASYMPTOTIC_MIN {
        let h = n / x;
        n * x.ln() + (x + n - 0.5) * h.ln_1p() - n + stirling_tail(x + n) - stirling_tail(x)
    } else if x + n >= ASYMPTOTIC_MIN {
        ln_gamma_large(x + n) - ln_gamma(x)
    } else {
        ln_gamma(x + n) - ln_gamma(x)
    }
}

/// Stirling's series for `ln Γ(y)`, `y >= 10`.
fn ln_gamma_large(y: f64) -> f64 {
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;
    (y - 0.5) * y.ln() - y + HALF_LN_TWO_PI + stirling_tail(y)
}

/// `ln θ_(n)` where `θ_(n) = θ(θ+1)···(θ+n-1)` is the rising factorial.
///
/// Stable for `θ` up to `1e300` and `n` up to `1e9`.
pub fn log_rising_factorial(theta: f64, n: u64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return domain(format!(
            "rising factorial needs a finite theta > 0, got {theta}"
        ));
    }
    Ok(ln_rising(theta, n as f64))
}

/// `ψ(x+n) - ψ(x) = Σ_{i<n} 1/(x+i)`.
pub(crate) fn digamma_diff(x: f64, n: u64) -> f64 {
    if n <= 10_000 {
        // smallest terms first
        return (0..n).rev().map(|i| 1.0 / (x + i as f64)).sum();
    }
    let nf = n as f64;
    if x >= ASYMPTOTIC_MIN {
        let y = x + nf;
        (nf / x).ln_1p() - 0.5 / y + 0.5 / x - digamma_tail(y) + digamma_tail(x)
    } else {
        gamma::digamma(x + nf) - gamma::digamma(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: f64, n: u64) -> f64 {
        (0..n).map(|i| (x + i as f64).ln()).sum()
    }

    #[test]
    fn rising_factorial_small_cases() {
        assert!((log_rising_factorial(1.0, 3).unwrap() - 6f64.ln()).abs() < 1e-15);
        assert_eq!(log_rising_factorial(2.5, 0).unwrap(), 0.0);
        assert!((log_rising_factorial(2.0, 2).unwrap() - 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rising_factorial_rejects_bad_theta() {
        assert!(log_rising_factorial(0.0, 3).is_err());
        assert!(log_rising_factorial(-1.0, 3).is_err());
        assert!(log_rising_factorial(f64::NAN, 3).is_err());
    }

    #[test]
    fn asymptotic_branch_matches_direct_sum() {
        for &x in &[10.0, 37.5, 1e3, 1e6, 1e12] {
            for &n in &[33u64, 100, 2500] {
                let want = direct(x, n);
                let got = ln_rising(x, n as f64);
                assert!(
                    ((got - want) / want).abs() < 1e-13,
                    "x={x} n={n}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn small_x_branch_matches_direct_sum() {
        for &x in &[1e-8, 0.1, 0.5, 3.0, 9.5] {
            for &n in &[33u64, 500, 4000] {
                let want = direct(x, n);
                let got = ln_rising(x, n as f64);
                assert!(
                    (got - want).abs() < 1e-11 * want.abs().max(1.0),
                    "x={x} n={n}"
                );
            }
        }
    }

    #[test]
    fn huge_arguments_stay_finite() {
        let v = log_rising_factorial(1e300, 1_000_000_000).unwrap();
        let approx = 1e9 * 1e300f64.ln();
        assert!(((v - approx) / approx).abs() < 1e-12);
        // n/θ = 1e-291: the correction term is far below resolution
        let w = log_rising_factorial(1e300, 5).unwrap();
        assert!((w - 5.0 * 1e300f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn factorial_and_binomial() {
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
        assert_eq!(ln_binomial(7, 0), 0.0);
    }

    #[test]
    fn digamma_difference_branches_agree() {
        for &x in &[0.5, 3.0, 12.0, 1e4] {
            let n = 20_000u64;
            let direct: f64 = (0..n).rev().map(|i| 1.0 / (x + i as f64)).sum();
            assert!((digamma_diff(x, n) - direct).abs() < 1e-11, "x={x}");
        }
    }
}
