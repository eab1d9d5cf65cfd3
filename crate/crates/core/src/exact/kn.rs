//! The number of distinct alleles `K_n` in an `n`-sample:
//! `P{K_n = k} = |S_n^k| θ^k / θ_(n)`.

use super::check_theta;
use super::stirling::stirling1_log_row;
use crate::error::{domain, Result};
use crate::logspace::LogReal;
use crate::special::{digamma_diff, ln_rising};

pub fn kn_log_pmf(theta: f64, n: u32, k: u32) -> Result<LogReal> {
    check_theta(theta)?;
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    if k == 0 || k > n {
        return Ok(LogReal::ZERO);
    }
    let row = stirling1_log_row(n)?;
    Ok(LogReal::from_ln(
        row[k as usize - 1] + k as f64 * theta.ln() - ln_rising(theta, n as f64),
    ))
}

/// `ln E[e^{t K_n}] = ln (θe^t)_(n) - ln θ_(n)`.
pub fn kn_log_mgf(theta: f64, n: u64, t: f64) -> Result<f64> {
    check_theta(theta)?;
    let shifted = theta * t.exp();
    if !(shifted > 0.0) || !shifted.is_finite() {
        return domain(format!(
            "theta·e^t = {shifted:e} is outside the log-gamma range"
        ));
    }
    Ok(ln_rising(shifted, n as f64) - ln_rising(theta, n as f64))
}

/// `E[K_n] = Σ_{i=1}^n θ/(θ+i-1) = θ(ψ(θ+n) - ψ(θ))`.
pub fn kn_mean(theta: f64, n: u64) -> Result<f64> {
    check_theta(theta)?;
    Ok(theta * digamma_diff(theta, n))
}
