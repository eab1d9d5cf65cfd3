//! Order statistics of the uniform distribution on the `K`-simplex.
//!
//! The density of the `r` largest coordinates is
//! `K(K-1)···(K-r+1) Γ(K) L(r, K; B)`, where `L` is the volume of a slab of
//! the cube `[0, p_r]^{K-r-1}`. That volume is an Irwin–Hall probability,
//! evaluated here in exact integer arithmetic.

use num_bigint::{BigInt, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::logspace::{log_sum_exp, LogReal};
use crate::special::{ln_binomial, ln_gamma, ln_rising};

pub const DEFAULT_IRWIN_HALL_CAP: u64 = 10_000;
/// Arguments are snapped to the grid `k / 2^64` before exact evaluation.
pub const SNAP_BITS: u32 = 64;
/// Largest change in the argument caused by snapping.
pub const SNAP_ERROR: f64 = 2.710_505_431_213_761e-20; // 2^-65

const LN_2: f64 = std::f64::consts::LN_2;

fn snap(s: f64) -> BigInt {
    let scaled = (s * 2f64.powi(SNAP_BITS as i32)).round();
    num_traits::FromPrimitive::from_f64(scaled).expect("finite argument")
}

fn ln_big(x: &BigInt) -> f64 {
    if x.sign() != Sign::Plus {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("fits").ln() + shift as f64 * LN_2
    }
}

/// `num / den` rounded to `f64`, for `0 <= num <= den`.
fn ratio_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    if shift > 1000 {
        return (ln_big(num) - ln_big(den)).exp();
    }
    let q: BigInt = (num << shift as u64) / den;
    q.to_f64().expect("fits") * 2f64.powi(-(shift as i32))
}

fn factorial(m: u64) -> BigInt {
    (2..=m).fold(BigInt::one(), |acc, j| acc * j)
}

/// `m! 2^{64m}` times the Irwin–Hall CDF at `N / 2^64`.
fn scaled_cdf(m: u64, big_n: &BigInt, full: &BigInt) -> BigInt {
    if big_n.sign() != Sign::Plus {
        return BigInt::zero();
    }
    let whole: BigInt = big_n >> SNAP_BITS;
    if whole >= BigInt::from(m) {
        return full.clone();
    }
    let top = whole.to_u64().expect("small");
    let unit = BigInt::one() << SNAP_BITS;
    let mut sum = BigInt::zero();
    let mut binom = BigInt::one();
    for j in 0..=top {
        let term = (big_n - &unit * j).pow(m as u32) * &binom;
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        binom = binom * (m - j) / (j + 1);
    }
    sum
}

fn check_cap(m: u64, cap: u64) -> Result<()> {
    if m == 0 {
        return domain("Irwin–Hall order must be at least 1");
    }
    if m > cap {
        return Err(Error::Size {
            what: "Irwin–Hall order",
            value: m,
            cap,
        });
    }
    Ok(())
}

fn full_scale(m: u64) -> BigInt {
    factorial(m) << (SNAP_BITS as u64 * m)
}

/// `P{U_1 + ··· + U_m <= s}` for i.i.d. uniform `U_i`, with `s` snapped to
/// a multiple of `2^-64`. Cost grows with `⌊s⌋`, not `m`.
pub fn irwin_hall_cdf(m: u64, s: f64) -> Result<f64> {
    irwin_hall_cdf_with_cap(m, s, DEFAULT_IRWIN_HALL_CAP)
}

pub fn irwin_hall_cdf_with_cap(m: u64, s: f64, cap: u64) -> Result<f64> {
    check_cap(m, cap)?;
    if !(s >= 0.0) || !s.is_finite() {
        return domain(format!("argument must be finite and non-negative, got {s}"));
    }
    let full = full_scale(m);
    Ok(ratio_f64(&scaled_cdf(m, &snap(s), &full), &full))
}

/// A point `p_1 >= ··· >= p_r > 0` of the ordered simplex, with `K >= r + 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderStatPoint {
    p: Vec<f64>,
    alleles: u64,
}

impl OrderStatPoint {
    /// Points with `p_1 < 1/K` are accepted and have density zero.
    pub fn new(p: Vec<f64>, alleles: u64) -> Result<Self> {
        if p.is_empty() {
            return domain("need at least one coordinate");
        }
        if alleles < p.len() as u64 + 2 {
            return domain(format!(
                "need K >= r + 2, got K = {alleles}, r = {}",
                p.len()
            ));
        }
        if p.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return domain("coordinates must be positive");
        }
        if p.windows(2).any(|w| w[0] < w[1]) {
            return domain("coordinates must be non-increasing");
        }
        let a: f64 = p.iter().sum();
        if a > 1.0 + 1e-12 {
            return domain(format!("coordinates sum to {a} > 1"));
        }
        Ok(OrderStatPoint { p, alleles })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn alleles(&self) -> u64 {
        self.alleles
    }

    pub fn r(&self) -> usize {
        self.p.len()
    }

    /// `a_r = p_1 + ··· + p_r`.
    pub fn mass(&self) -> f64 {
        self.p.iter().sum()
    }

    fn last(&self) -> f64 {
        self.p[self.p.len() - 1]
    }

    /// `K - r - 1`, the number of free coordinates.
    fn free(&self) -> u64 {
        self.alleles - self.p.len() as u64 - 1
    }

    /// True when `1 - a_r <= p_r`, where the slab is a full simplex.
    pub fn in_simplex_branch(&self) -> bool {
        1.0 - self.mass() <= self.last()
    }
}

fn simplex_volume(point: &OrderStatPoint) -> f64 {
    let m = point.free();
    let rest = (1.0 - point.mass()).max(0.0);
    m as f64 * rest.ln() - ln_gamma(m as f64 + 1.0)
}

fn slab_volume(point: &OrderStatPoint) -> Result<f64> {
    let m = point.free();
    check_cap(m, DEFAULT_IRWIN_HALL_CAP)?;
    let pr = point.last();
    let s = (1.0 - point.mass()).max(0.0) / pr;
    let upper = snap(s);
    let lower = &upper - (BigInt::one() << SNAP_BITS);
    let full = full_scale(m);
    let diff = scaled_cdf(m, &upper, &full) - scaled_cdf(m, &lower, &full);
    Ok(m as f64 * pr.ln() + ln_big(&diff) - ln_big(&full))
}

/// `ln L(r, K; B)`: the simplex formula when `1 - a_r <= p_r`, otherwise
/// `p_r^{K-r-1}` times a difference of Irwin–Hall probabilities.
pub fn volume_l(point: &OrderStatPoint) -> Result<LogReal> {
    let v = if point.in_simplex_branch() {
        simplex_volume(point)
    } else {
        slab_volume(point)?
    };
    Ok(LogReal::from_ln(v))
}

/// `ln g(p_1, …, p_r)` with `g = K(K-1)···(K-r+1) Γ(K) L(r, K; B)`.
pub fn order_stat_log_density(point: &OrderStatPoint) -> Result<LogReal> {
    let k = point.alleles as f64;
    let r = point.r() as f64;
    let volume = volume_l(point)?;
    if volume.is_zero() {
        return Ok(LogReal::ZERO);
    }
    Ok(LogReal::from_ln(
        ln_rising(k - r + 1.0, r) + ln_gamma(k) + volume.ln(),
    ))
}

/// Outcome of checking the two-sided volume bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SandwichReport {
    /// `1 - a_r <= p_r`: the volume is given in closed form.
    Skipped,
    Checked {
        /// `inf{k >= 1 : k p_r > 1 - a_r}`.
        m: u64,
        log_lower: f64,
        log_volume: f64,
        log_upper: f64,
        pass: bool,
    },
}

impl SandwichReport {
    pub fn passed(&self) -> Option<bool> {
        match self {
            SandwichReport::Skipped => None,
            SandwichReport::Checked { pass, .. } => Some(*pass),
        }
    }
}

const MAX_SANDWICH_M: u64 = 1_000_000;

/// Evaluates both sides of the bound on `L(r, K; B)` built from
/// `C(K, r, m) = Σ_{l<=m} C(K-r-1, l)(1-a_r-p_r)^l p_r^{m-l}`.
pub fn sandwich_check(point: &OrderStatPoint) -> Result<SandwichReport> {
    if point.in_simplex_branch() {
        return Ok(SandwichReport::Skipped);
    }
    let rest = 1.0 - point.mass();
    let pr = point.last();
    let free = point.free();
    let m = (rest / pr).floor() as u64 + 1;
    if m > MAX_SANDWICH_M {
        return Err(Error::Size {
            what: "sandwich index m",
            value: m,
            cap: MAX_SANDWICH_M,
        });
    }
    let gap = rest - pr;
    // C(K + m, r, m)
    let terms: Vec<f64> = (0..=m)
        .map(|l| ln_binomial(free + m, l) + l as f64 * gap.ln() + (m - l) as f64 * pr.ln())
        .collect();
    let ln_c = log_sum_exp(&terms);
    let log_upper = free as f64 * rest.ln() - ln_gamma(free as f64 + 1.0);
    let lowf = m as f64 * rest.ln() + ln_gamma(free as f64 + 1.0)
        - ln_c
        - ln_gamma((free + m) as f64 + 1.0);
    let t = free as f64 * (gap / rest).ln() - lowf;
    let log_lower = if t >= 0.0 {
        f64::NEG_INFINITY
    } else {
        log_upper + lowf + (-t.exp_m1()).ln()
    };
    let log_volume = volume_l(point)?.ln();
    let slack = 1e-10;
    let pass = log_lower <= log_volume + slack && log_volume <= log_upper + slack;
    Ok(SandwichReport::Checked {
        m,
        log_lower,
        log_volume,
        log_upper,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn point(p: &[f64], k: u64) -> OrderStatPoint {
        OrderStatPoint::new(p.to_vec(), k).unwrap()
    }

    fn factorial_f64(m: u64) -> f64 {
        (1..=m).map(|j| j as f64).product()
    }

    #[test]
    fn irwin_hall_values() {
        assert_eq!(irwin_hall_cdf(1, 0.5).unwrap(), 0.5);
        assert_eq!(irwin_hall_cdf(2, 1.0).unwrap(), 0.5);
        assert!((irwin_hall_cdf(3, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-17);
        assert_eq!(irwin_hall_cdf(3, 0.0).unwrap(), 0.0);
        assert_eq!(irwin_hall_cdf(3, 7.0).unwrap(), 1.0);
        for m in 1..=50u64 {
            assert_eq!(irwin_hall_cdf(m, m as f64 / 2.0).unwrap(), 0.5, "m={m}");
        }
        assert!(matches!(
            irwin_hall_cdf(10_001, 1.0),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn irwin_hall_small_argument_and_symmetry() {
        for m in [2u64, 5, 9, 30] {
            for s in [0.1f64, 0.5, 0.9] {
                let want = s.powi(m as i32) / factorial_f64(m);
                let got = irwin_hall_cdf(m, s).unwrap();
                assert!((got - want).abs() <= 1e-14 * want, "m={m} s={s}");
            }
            for s in [0.3, 1.7, 2.25].into_iter().filter(|&s| s <= m as f64) {
                let lhs = irwin_hall_cdf(m, s).unwrap() + irwin_hall_cdf(m, m as f64 - s).unwrap();
                assert!((lhs - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn volume_examples() {
        assert!((volume_l(&point(&[0.6], 3)).unwrap().exp() - 0.4).abs() < 1e-15);
        assert!((volume_l(&point(&[0.45], 3)).unwrap().exp() - 0.35).abs() < 1e-15);
        assert!(volume_l(&point(&[0.3], 3)).unwrap().is_zero());
        // direct 1-D integral: x_2 ranges over [0.10, 0.45]
        let direct = integrate(
            |x| if (0.1..=0.45).contains(&x) { 1.0 } else { 0.0 },
            0.1,
            0.45,
            4,
            1,
        );
        assert!((direct - 0.35).abs() < 1e-15);
    }

    #[test]
    fn density_examples() {
        let g = order_stat_log_density(&point(&[0.45], 3)).unwrap().exp();
        assert!((g - 2.1).abs() <= 1e-12);
        assert!(order_stat_log_density(&point(&[0.3], 3)).unwrap().is_zero());
        assert!(OrderStatPoint::new(vec![0.2, 0.3], 5).is_err());
        assert!(OrderStatPoint::new(vec![0.5], 2).is_err());
        assert!(OrderStatPoint::new(vec![0.7, 0.6], 5).is_err());
    }

    fn max_density_mass(k: u64) -> f64 {
        // the density of the maximum is polynomial between the points 1/j
        let mut edges: Vec<f64> = (1..=k).map(|j| 1.0 / j as f64).collect();
        edges.reverse();
        edges
            .windows(2)
            .map(|w| {
                integrate(
                    |x| order_stat_log_density(&point(&[x], k)).unwrap().exp(),
                    w[0],
                    w[1],
                    12,
                    1,
                )
            })
            .sum()
    }

    #[test]
    fn density_normalizes() {
        assert!((max_density_mass(3) - 1.0).abs() <= 1e-6);
        assert!((max_density_mass(6) - 1.0).abs() <= 1e-10);
        assert!((max_density_mass(12) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn two_largest_normalize() {
        // K = 4: integrate g(p_1, p_2) over p_1 >= p_2, panels split where
        // the density changes form
        let k = 4;
        let g = |p1: f64, p2: f64| {
            if p2 > p1 || p1 + p2 > 1.0 {
                0.0
            } else {
                order_stat_log_density(&point(&[p1, p2], k)).unwrap().exp()
            }
        };
        let total = integrate(
            |p1| {
                let mut cuts = vec![0.0, (1.0 - p1) / 3.0, (1.0 - p1) / 2.0, 1.0 - p1, p1];
                cuts.retain(|&c| c <= p1.min(1.0 - p1) + 1e-15);
                cuts.push(p1.min(1.0 - p1));
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                cuts.windows(2)
                    .map(|w| integrate(|p2| g(p1, p2), w[0], w[1], 10, 1))
                    .sum::<f64>()
            },
            0.25,
            1.0,
            10,
            36,
        );
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn branches_agree_on_boundary() {
        for i in 0..10 {
            let q = 0.12 + 0.02 * i as f64;
            let p = point(&[1.0 - 2.0 * q, q], 7 + i);
            let a = simplex_volume(&p);
            let b = slab_volume(&p).unwrap();
            assert!((a.exp() - b.exp()).abs() <= 1e-10, "q={q}");
        }
        let p = point(&[0.5], 6);
        assert!((simplex_volume(&p).exp() - slab_volume(&p).unwrap().exp()).abs() <= 1e-10);
    }

    #[test]
    fn density_along_last_coordinate() {
        // exact rational values of L at K = 8, p_1 = 2/5
        let l = |p2: f64| volume_l(&point(&[0.4, p2], 8)).unwrap().exp();
        assert!((l(0.18) - 6.919344e-5).abs() <= 1e-15);
        assert!((l(0.4) - 2.666666666666667e-6).abs() <= 1e-17);
        assert!((l(0.125) - 9.310709635416666e-6).abs() <= 1e-17);
        // rises from the feasibility edge, then falls with the leftover mass
        let grid: Vec<f64> = (1..=40)
            .map(|j| 0.6 / 7.0 + (0.4 - 0.6 / 7.0) * j as f64 / 40.0)
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&p2| l(p2)).collect();
        let top = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((grid[top] - 0.1879).abs() < 0.01);
        assert!(vals[..=top].windows(2).all(|w| w[1] > w[0]));
        assert!(vals[top..].windows(2).all(|w| w[1] < w[0]));
        // r = 1 above 1/2: (1 - p)^{K-2} decreases
        let g = |p: f64| order_stat_log_density(&point(&[p], 6)).unwrap().ln();
        assert!(g(0.6) > g(0.7));
    }

    #[test]
    fn sandwich_examples() {
        for (p, k) in [(vec![0.2], 10u64), (vec![0.25, 0.2], 15)] {
            let report = sandwich_check(&point(&p, k)).unwrap();
            assert_eq!(report.passed(), Some(true), "{report:?}");
        }
        assert_eq!(
            sandwich_check(&point(&[0.6], 5)).unwrap(),
            SandwichReport::Skipped
        );
        if let SandwichReport::Checked { m, .. } = sandwich_check(&point(&[0.2], 10)).unwrap() {
            assert_eq!(m, 5);
        }
    }

    #[test]
    fn sandwich_random_points() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut checked = 0;
        while checked < 50 {
            let k: u64 = rng.random_range(3..=50);
            let r = rng.random_range(1..=3.min(k as usize - 2));
            let scale: f64 = rng.random();
            let mut p: Vec<f64> = (0..r).map(|_| rng.random::<f64>() * scale).collect();
            p.sort_by(|a, b| b.total_cmp(a));
            let a: f64 = p.iter().sum();
            if a >= 1.0 || p[0] < 1.0 / k as f64 || 1.0 - a <= p[r - 1] || p[r - 1] <= 0.02 {
                continue;
            }
            let report = sandwich_check(&point(&p, k)).unwrap();
            assert_eq!(report.passed(), Some(true), "{p:?} K={k} {report:?}");
            checked += 1;
        }
    }
}
