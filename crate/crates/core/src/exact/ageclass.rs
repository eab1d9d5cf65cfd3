//! Age-class sizes: `X_{1,n}` is the number of sample members carrying the
//! oldest allele, `X_{2,n}` the next oldest, and so on. Factorials of
//! real arguments are read as gamma functions.

use super::check_theta;
use crate::error::{domain, Result};
use crate::logspace::LogReal;
use crate::special::ln_rising;

/// `P{X_{1,n} = k} = (θ/n) · n!/(n-k)! · Γ(θ+n-k)/Γ(θ+n)`.
pub fn ageclass1_log_pmf(theta: f64, n: u64, k: u64) -> Result<LogReal> {
    check_theta(theta)?;
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    if k == 0 || k > n {
        return Ok(LogReal::ZERO);
    }
    Ok(LogReal::from_ln(first_classes(theta, n, 1, k)))
}

/// Joint law of the first `r = ks.len()` age classes:
///
/// `(θ/n)^r / Π_{i<r}(1 - s_i/n) · n!/(n-s_r)! · Γ(θ+n-s_r)/Γ(θ+n)`
///
/// with `s_i = k_1 + … + k_i`. Zero when `s_r > n`.
pub fn ageclass_joint_log_pmf(theta: f64, n: u64, ks: &[u64]) -> Result<LogReal> {
    check_theta(theta)?;
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    if ks.is_empty() {
        return domain("need at least one age class");
    }
    if ks.contains(&0) {
        return domain("age-class sizes must be at least 1");
    }
    let total: u64 = ks.iter().sum();
    if total > n {
        return Ok(LogReal::ZERO);
    }
    let nf = n as f64;
    let mut prefix = 0u64;
    let mut denom = 0.0;
    for &k in &ks[..ks.len() - 1] {
        prefix += k;
        denom += (-(prefix as f64) / nf).ln_1p();
    }
    Ok(LogReal::from_ln(
        first_classes(theta, n, ks.len(), total) - denom,
    ))
}

/// `r ln(θ/n) + ln n!/(n-s)! - ln Γ(θ+n)/Γ(θ+n-s)`.
fn first_classes(theta: f64, n: u64, r: usize, s: u64) -> f64 {
    let nf = n as f64;
    let sf = s as f64;
    r as f64 * (theta / nf).ln() + ln_rising(nf - sf + 1.0, sf) - ln_rising(theta + nf - sf, sf)
}
