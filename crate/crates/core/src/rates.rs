//! Rate functions, cumulant limits and the case C Legendre transform.
//!
//! Rates are returned as [`ExtendedReal`]: an `f64` that is either finite
//! and non-negative (up to rounding) or `+∞`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::partition::AllelePartition;

/// A real number or `+∞`, stored as `f64`.
pub type ExtendedReal = f64;

const SUM_SLACK: f64 = 1e-12;

/// Coupling regime between the sample size `n` and `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum RegimeCase {
    /// `n` fixed.
    A { n: u64 },
    /// `θ/n → ∞`.
    B,
    /// `θ/n → c`.
    C { c: f64 },
    /// `θ/n → 0`.
    D,
}

impl RegimeCase {
    /// Builds a case from its letter and optional parameters; a parameter
    /// the case needs but did not receive is a usage error.
    pub fn from_parts(case: &str, n: Option<u64>, c: Option<f64>) -> Result<Self> {
        match case
            .trim_start_matches("case")
            .to_ascii_uppercase()
            .as_str()
        {
            "A" => match n {
                Some(n) if n >= 1 => Ok(RegimeCase::A { n }),
                Some(_) => usage("case A needs n >= 1"),
                None => usage("case A needs parameter n"),
            },
            "B" => Ok(RegimeCase::B),
            "C" => match c {
                Some(c) if c > 0.0 && c.is_finite() => Ok(RegimeCase::C { c }),
                Some(c) => usage(format!("case C needs c > 0, got {c}")),
                None => usage("case C needs parameter c"),
            },
            "D" => Ok(RegimeCase::D),
            other => usage(format!("unknown case '{other}', expected A, B, C or D")),
        }
    }

    pub fn letter(&self) -> char {
        match self {
            RegimeCase::A { .. } => 'A',
            RegimeCase::B => 'B',
            RegimeCase::C { .. } => 'C',
            RegimeCase::D => 'D',
        }
    }
}

fn check_mass(x: &[f64]) -> Result<f64> {
    if let Some(v) = x.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return domain(format!("entries must be finite and non-negative, got {v}"));
    }
    let total: f64 = x.iter().sum();
    if total > 1.0 + SUM_SLACK {
        return domain(format!("entries sum to {total} > 1"));
    }
    Ok(total)
}

/// `ln 1/(1 - s)`, `+∞` at `s >= 1`.
fn residual(total: f64) -> ExtendedReal {
    if total >= 1.0 {
        f64::INFINITY
    } else {
        -(-total).ln_1p()
    }
}

/// `x ln x` with the continuous extension `0` at `x = 0`.
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln 1/(1 - Σ x_i)`: the common form of the rates on the ordered
/// simplex, on the stick space, and on its `n`-dimensional projections.
pub fn rate_residual_mass(x: &[f64]) -> Result<ExtendedReal> {
    Ok(residual(check_mass(x)?))
}

/// `I^K(p) = Σ (1/K) ln((1/K)/p_i)`.
pub fn rate_relative_entropy(p: &[f64]) -> Result<ExtendedReal> {
    if p.is_empty() {
        return domain("empty probability vector");
    }
    if let Some(v) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return domain(format!("entries must be finite and non-negative, got {v}"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return domain(format!("entries sum to {total}, expected 1"));
    }
    if p.contains(&0.0) {
        return Ok(f64::INFINITY);
    }
    let k = p.len() as f64;
    Ok(p.iter().map(|&pi| -(k * pi).ln()).sum::<f64>() / k)
}

/// Infimum of `I^K` over descending `K`-vectors whose first `r` entries are
/// `p`. The minimizer spreads the remaining mass evenly, which requires
/// `p_r >= (1 - a_r)/(K - r)`.
pub fn constrained_inf_relent(p: &[f64], alleles: u64) -> Result<f64> {
    let r = p.len();
    if r == 0 {
        return domain("need at least one fixed coordinate");
    }
    if alleles <= r as u64 {
        return domain(format!("K = {alleles} must exceed r = {r}"));
    }
    if p.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return domain("fixed coordinates must be positive");
    }
    if p.windows(2).any(|w| w[0] < w[1]) {
        return domain("fixed coordinates must be non-increasing");
    }
    let a: f64 = p.iter().sum();
    if a >= 1.0 {
        return domain(format!("fixed coordinates sum to {a}, need < 1"));
    }
    let k = alleles as f64;
    let rest = k - r as f64;
    let fill = (1.0 - a) / rest;
    if p[r - 1] < fill * (1.0 - 1e-12) {
        return domain(format!(
            "p_r = {} is below the even completion {fill}",
            p[r - 1]
        ));
    }
    let fixed: f64 = p.iter().map(|v| -v.ln()).sum();
    Ok(
        -(r as f64) * k.ln() / k + fixed / k + (rest / k) * (-(r as f64) / k).ln_1p()
            - (rest / k) * (-a).ln_1p(),
    )
}

/// Rate `I_{K,i}` of the `i`-th size-biased stick fraction.
pub fn rate_beta_stick(v: f64, alleles: u64, i: u64) -> Result<ExtendedReal> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("stick fraction {v} outside [0, 1]"));
    }
    if alleles < 2 || i == 0 || i >= alleles {
        return domain(format!("need 1 <= i <= K - 1, got i = {i}, K = {alleles}"));
    }
    if v == 0.0 || v == 1.0 {
        return Ok(f64::INFINITY);
    }
    let k = alleles as f64;
    let left = (k - i as f64) / k;
    let span = k + 1.0 - i as f64;
    Ok(-v.ln() / k - left * (-v).ln_1p() - span.ln() / k + left * (-1.0 / span).ln_1p())
}

fn check_size_biased(y: &[f64], alleles: u64) -> Result<f64> {
    if alleles < 2 || y.len() as u64 != alleles - 1 {
        return domain(format!(
            "expected K - 1 = {} coordinates, got {}",
            alleles.saturating_sub(1),
            y.len()
        ));
    }
    check_mass(y)
}

/// Rate `S^K` of the first `K - 1` size-biased Dirichlet weights, evaluated
/// from the explicit sum.
pub fn rate_sizebiased_sk(y: &[f64], alleles: u64) -> Result<ExtendedReal> {
    let total = check_size_biased(y, alleles)?;
    if total >= 1.0 || y.contains(&0.0) {
        return Ok(f64::INFINITY);
    }
    let k = alleles as f64;
    let mut before = 1.0f64;
    let mut sum = 0.0;
    for (idx, &yi) in y.iter().enumerate() {
        let i = (idx + 1) as f64;
        let after = before - yi;
        if after <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let left = (k - i) / k;
        let span = k + 1.0 - i;
        sum += (before / yi).ln() / k + left * (before / after).ln();
        sum += -span.ln() / k + left * (-1.0 / span).ln_1p();
        before = after;
    }
    Ok(sum)
}

/// `S^K` as `Σ I_{K,i}(v_i)` with `v_i = y_i / (1 - y_1 - ··· - y_{i-1})`.
pub fn rate_sizebiased_sk_sticks(y: &[f64], alleles: u64) -> Result<ExtendedReal> {
    let total = check_size_biased(y, alleles)?;
    if total >= 1.0 || y.contains(&0.0) {
        return Ok(f64::INFINITY);
    }
    rate_sizebiased_marginal(y, alleles)
}

/// Rate of the first `r` size-biased weights: `Σ_{i<=r} I_{K,i}(v_i)`, the
/// contraction of `S^K` with the later fractions at their zeros.
pub fn rate_sizebiased_marginal(x: &[f64], alleles: u64) -> Result<ExtendedReal> {
    check_mass(x)?;
    if x.is_empty() || x.len() as u64 >= alleles {
        return domain(format!("need 1 <= r <= K - 1 coordinates, got {}", x.len()));
    }
    let mut before = 1.0f64;
    let mut sum = 0.0;
    for (idx, &xi) in x.iter().enumerate() {
        if before <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let v = (xi / before).min(1.0);
        sum += rate_beta_stick(v, alleles, idx as u64 + 1)?;
        before -= xi;
    }
    Ok(sum)
}

/// Completes `x` to a point of `Δ_{K-1}` with every later stick fraction at
/// its zero `1/(K+1-i)`.
pub fn sizebiased_zero_completion(x: &[f64], alleles: u64) -> Result<Vec<f64>> {
    check_mass(x)?;
    if x.len() as u64 >= alleles {
        return domain("prefix longer than K - 1");
    }
    let mut y = x.to_vec();
    let mut remaining = 1.0 - x.iter().sum::<f64>();
    for i in (x.len() as u64 + 1)..alleles {
        let yi = remaining / (alleles + 1 - i) as f64;
        y.push(yi);
        remaining -= yi;
    }
    Ok(y)
}

/// `n - Σ_j a_j`.
pub fn rate_esf(a: &AllelePartition) -> u64 {
    u64::from(a.n() - a.blocks())
}

/// `F(u) = (1+u) ln(1+u) - u ln u` from `ln u`, stable at both ends.
fn f_of_ln(lu: f64) -> f64 {
    if lu > 700.0 {
        return lu + 1.0;
    }
    let u = lu.exp();
    if lu < 0.0 {
        u.ln_1p() + u * (u.ln_1p() - lu)
    } else {
        u.ln_1p() + u * (1.0 / u).ln_1p()
    }
}

/// `u ln(1 + 1/u)` from `ln u`; strictly increasing from 0 to 1.
fn stick_mean_of_ln(lu: f64) -> f64 {
    let u = lu.exp();
    if lu < 0.0 {
        u * (u.ln_1p() - lu)
    } else {
        u * (1.0 / u).ln_1p()
    }
}

/// Limit `Λ(t)` of the normalized cumulant generating function of `K_n`.
pub fn cgf_limit(case: &RegimeCase, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return domain(format!("t must be finite, got {t}"));
    }
    Ok(match *case {
        RegimeCase::A { n } => {
            if t > -1.0 {
                n as f64 * t
            } else {
                t + 1.0 - n as f64
            }
        }
        RegimeCase::B => t.max(-1.0),
        RegimeCase::C { c } => (f_of_ln(c.ln() + c * t) - f_of_ln(c.ln())) / c,
        RegimeCase::D => t.exp_m1(),
    })
}

const LN_U_BRACKET: f64 = 700.0;

/// Maximizer `ln u_x` of `x ln u - F(u)`, the root of `u ln(1 + 1/u) = x`,
/// found by bisection in `ln u` to absolute tolerance `1e-12` in `ln u`.
pub fn legendre_root_ln(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("root defined for x in (0, 1), got {x}"));
    }
    let (mut lo, mut hi) = (-LN_U_BRACKET, LN_U_BRACKET);
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if stick_mean_of_ln(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `sup_t {t x - Λ_3(t)}` for case C.
pub fn legendre_case_c(x: f64, c: f64) -> Result<ExtendedReal> {
    if !(c > 0.0) || !c.is_finite() {
        return domain(format!("c must be positive, got {c}"));
    }
    if x.is_nan() {
        return domain("x is NaN");
    }
    let fc = f_of_ln(c.ln());
    let value = if !(0.0..=1.0).contains(&x) {
        f64::INFINITY
    } else if x == 0.0 {
        fc / c
    } else if x == 1.0 {
        (fc - c.ln() - 1.0) / c
    } else {
        let lu = legendre_root_ln(x)?;
        (x * lu - f_of_ln(lu) - x * c.ln() + fc) / c
    };
    Ok(value)
}

/// The `t` attaining the supremum in [`legendre_case_c`] for `x ∈ (0, 1)`.
pub fn legendre_case_c_argmax(x: f64, c: f64) -> Result<f64> {
    Ok((legendre_root_ln(x)? - c.ln()) / c)
}

/// Law-of-large-numbers limit of the normalized `K_n` (rate zero).
pub fn kn_lln_limit(case: &RegimeCase) -> f64 {
    match *case {
        RegimeCase::A { n } => n as f64,
        RegimeCase::C { c } => c * (1.0 / c).ln_1p(),
        RegimeCase::B | RegimeCase::D => 1.0,
    }
}

/// Rate of the normalized `K_n`: `n - k`, `1 - x`, the case C Legendre
/// transform, and `x ln x - x + 1`.
pub fn rate_kn_regime(case: &RegimeCase, arg: f64) -> Result<ExtendedReal> {
    if arg.is_nan() {
        return domain("argument is NaN");
    }
    Ok(match *case {
        RegimeCase::A { n } => {
            if arg.fract() == 0.0 && arg >= 1.0 && arg <= n as f64 {
                n as f64 - arg
            } else {
                f64::INFINITY
            }
        }
        RegimeCase::B => {
            if (0.0..=1.0).contains(&arg) {
                1.0 - arg
            } else {
                f64::INFINITY
            }
        }
        RegimeCase::C { c } => legendre_case_c(arg, c)?,
        RegimeCase::D => {
            if arg >= 0.0 && arg.is_finite() {
                xlnx(arg) - arg + 1.0
            } else {
                f64::INFINITY
            }
        }
    })
}

/// `I_c(x) = (1/c)[(c+1) ln(c+1) + (1-x) ln(1-x) - (c+1-x) ln(c+1-x)]`.
pub fn rate_ic(x: f64, c: f64) -> Result<ExtendedReal> {
    if !(c > 0.0) || !c.is_finite() {
        return domain(format!("c must be positive, got {c}"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Ok(f64::INFINITY);
    }
    Ok((xlnx(c + 1.0) + xlnx(1.0 - x) - xlnx(c + 1.0 - x)) / c)
}

/// Rate of the first `r` age-class sizes: `Σ k_i - r` in case A (entries
/// must be positive integers), otherwise the case's rate at `Σ x_i`.
pub fn rate_ageclass_regime(case: &RegimeCase, args: &[f64]) -> Result<ExtendedReal> {
    if args.is_empty() {
        return domain("need at least one age class");
    }
    if args.iter().any(|v| v.is_nan()) {
        return domain("argument is NaN");
    }
    if let RegimeCase::A { n } = *case {
        let total: f64 = args.iter().sum();
        if args.iter().any(|&k| k < 1.0 || k.fract() != 0.0) || total > n as f64 {
            return Ok(f64::INFINITY);
        }
        return Ok(total - args.len() as f64);
    }
    if args.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Ok(f64::INFINITY);
    }
    let s: f64 = args.iter().sum();
    if s > 1.0 + SUM_SLACK {
        return Ok(f64::INFINITY);
    }
    let s = s.min(1.0);
    Ok(match *case {
        RegimeCase::B => s,
        RegimeCase::C { c } => rate_ic(s, c)?,
        RegimeCase::D => residual(s),
        RegimeCase::A { .. } => unreachable!(),
    })
}
