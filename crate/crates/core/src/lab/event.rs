//! Events whose exact probabilities drive the empirical rate curves.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact::{ageclass1_log_pmf, ageclass_joint_log_pmf, esf_log_pmf, kn_log_pmf};
use crate::logspace::{LogReal, LogSumExp};
use crate::partition::AllelePartition;
use crate::rates::RegimeCase;

/// Largest lattice sum an event may require.
pub const DEFAULT_TERM_BUDGET: u64 = 10_000_000;

const LATTICE_SLACK: f64 = 1e-9;

/// Scale applied to `K_n` before testing ball membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnScale {
    /// `K_n` itself.
    Count,
    /// `K_n / n`.
    PerSample,
    /// `K_n / (θ ln(n/θ))`.
    ThetaLog,
}

impl KnScale {
    /// The scale under which the case's LDP for `K_n` is stated.
    pub fn for_case(case: &RegimeCase) -> Self {
        match case {
            RegimeCase::A { .. } => KnScale::Count,
            RegimeCase::B | RegimeCase::C { .. } => KnScale::PerSample,
            RegimeCase::D => KnScale::ThetaLog,
        }
    }

    pub fn normalizer(self, theta: f64, n: u64) -> f64 {
        match self {
            KnScale::Count => 1.0,
            KnScale::PerSample => n as f64,
            KnScale::ThetaLog => theta * (n as f64 / theta).ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventSpec {
    /// `{A_n = a}`.
    PartitionPoint { a: AllelePartition },
    /// `{K_n = k}`.
    KnPoint { k: u64 },
    /// `{|K_n / normalizer - center| <= half_width}`.
    KnBall {
        center: f64,
        half_width: f64,
        scale: KnScale,
    },
    /// `{X_{1,n} = k_1, …, X_{r,n} = k_r}`.
    AgeClassPoint { ks: Vec<u64> },
    /// `{|X_{1,n}/n - center| <= half_width}`.
    AgeClassBall { center: f64, half_width: f64 },
    /// `{max_i |X_{i,n}/n - center_i| <= half_width}`.
    AgeClassJointBall { centers: Vec<f64>, half_width: f64 },
}

impl EventSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            EventSpec::PartitionPoint { .. } => "partition-point",
            EventSpec::KnPoint { .. } => "kn-point",
            EventSpec::KnBall { .. } => "kn-ball",
            EventSpec::AgeClassPoint { .. } => "ageclass-point",
            EventSpec::AgeClassBall { .. } => "ageclass-ball",
            EventSpec::AgeClassJointBall { .. } => "ageclass-joint-ball",
        }
    }

    /// True for events on age-class sizes.
    pub fn is_age_class(&self) -> bool {
        matches!(
            self,
            EventSpec::AgeClassPoint { .. }
                | EventSpec::AgeClassBall { .. }
                | EventSpec::AgeClassJointBall { .. }
        )
    }

    fn check_width(half_width: f64) -> Result<()> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return domain(format!(
                "ball half-width must be positive, got {half_width}"
            ));
        }
        Ok(())
    }
}

/// Integers `k` with `|k/scale - center| <= half_width`, clipped to
/// `[lo, hi]`. Empty ranges come back with `start > end`.
fn lattice(center: f64, half_width: f64, scale: f64, lo: u64, hi: u64) -> (u64, u64) {
    let left = scale * (center - half_width);
    let right = scale * (center + half_width);
    let slack = LATTICE_SLACK * scale.abs().max(1.0);
    let start = (left - slack).ceil().max(lo as f64);
    let end = (right + slack).floor().min(hi as f64);
    if end < start {
        (1, 0)
    } else {
        (start as u64, end as u64)
    }
}

fn check_budget(terms: u64, budget: u64) -> Result<()> {
    if terms > budget {
        return Err(Error::Complexity {
            work: terms as f64,
            budget: budget as f64,
        });
    }
    Ok(())
}

fn small_n(n: u64) -> Result<u32> {
    u32::try_from(n).or_else(|_| domain(format!("sample size {n} too large for this event")))
}

/// Exact `ln P(event)` for a sample of size `n` under `PD(θ)`.
pub fn event_log_prob(theta: f64, n: u64, ev: &EventSpec) -> Result<LogReal> {
    event_log_prob_with_budget(theta, n, ev, DEFAULT_TERM_BUDGET)
}

pub fn event_log_prob_with_budget(
    theta: f64,
    n: u64,
    ev: &EventSpec,
    budget: u64,
) -> Result<LogReal> {
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    match ev {
        EventSpec::PartitionPoint { a } => {
            if u64::from(a.n()) != n {
                return domain(format!("partition is of {}, sample size is {n}", a.n()));
            }
            esf_log_pmf(theta, a)
        }
        EventSpec::KnPoint { k } => {
            if *k > n {
                return Ok(LogReal::ZERO);
            }
            kn_log_pmf(theta, small_n(n)?, small_n(*k)?)
        }
        EventSpec::KnBall {
            center,
            half_width,
            scale,
        } => {
            EventSpec::check_width(*half_width)?;
            let nn = small_n(n)?;
            let (lo, hi) = lattice(*center, *half_width, scale.normalizer(theta, n), 1, n);
            check_budget((hi + 1).saturating_sub(lo), budget)?;
            let mut acc = LogSumExp::new();
            for k in lo..=hi {
                acc.push(kn_log_pmf(theta, nn, k as u32)?.ln());
            }
            Ok(LogReal::from_ln(acc.value()))
        }
        EventSpec::AgeClassPoint { ks } => match ks.as_slice() {
            [k] => ageclass1_log_pmf(theta, n, *k),
            _ => ageclass_joint_log_pmf(theta, n, ks),
        },
        EventSpec::AgeClassBall { center, half_width } => {
            EventSpec::check_width(*half_width)?;
            let (lo, hi) = lattice(*center, *half_width, n as f64, 1, n);
            check_budget((hi + 1).saturating_sub(lo), budget)?;
            let mut acc = LogSumExp::new();
            for k in lo..=hi {
                acc.push(ageclass1_log_pmf(theta, n, k)?.ln());
            }
            Ok(LogReal::from_ln(acc.value()))
        }
        EventSpec::AgeClassJointBall {
            centers,
            half_width,
        } => {
            EventSpec::check_width(*half_width)?;
            if centers.is_empty() {
                return domain("need at least one age class");
            }
            let ranges: Vec<(u64, u64)> = centers
                .iter()
                .map(|&c| lattice(c, *half_width, n as f64, 1, n))
                .collect();
            if ranges.iter().any(|&(lo, hi)| lo > hi) {
                return Ok(LogReal::ZERO);
            }
            let terms = ranges
                .iter()
                .try_fold(1u64, |acc, &(lo, hi)| acc.checked_mul(hi - lo + 1))
                .unwrap_or(u64::MAX);
            check_budget(terms, budget)?;
            let mut ks: Vec<u64> = ranges.iter().map(|r| r.0).collect();
            let mut acc = LogSumExp::new();
            'outer: loop {
                acc.push(ageclass_joint_log_pmf(theta, n, &ks)?.ln());
                for (i, &(lo, hi)) in ranges.iter().enumerate() {
                    if ks[i] < hi {
                        ks[i] += 1;
                        continue 'outer;
                    }
                    ks[i] = lo;
                }
                break;
            }
            Ok(LogReal::from_ln(acc.value()))
        }
    }
}

/// Joint density of the first `n` GEM weights:
/// `n ln θ + (θ-1) ln(1-s_n) - Σ_{k<n} ln(1-s_k)`, `s_k = x_1 + ··· + x_k`.
pub fn gem_log_density(theta: f64, x: &[f64]) -> Result<f64> {
    crate::exact::check_theta(theta)?;
    if x.is_empty() {
        return domain("need at least one weight");
    }
    if x.iter().any(|&v| !(v >= 0.0)) {
        return domain("weights must be non-negative");
    }
    let mut s = 0.0f64;
    let mut sum = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        s += xi;
        if s >= 1.0 {
            return domain(format!("partial sum {s} reaches 1"));
        }
        if i + 1 < x.len() {
            sum -= (-s).ln_1p();
        }
    }
    Ok(x.len() as f64 * theta.ln() + (theta - 1.0) * (-s).ln_1p() + sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma;

    #[test]
    fn point_events_are_exact_calls() {
        let a = AllelePartition::new(vec![2, 1, 0, 0]).unwrap();
        let ev = EventSpec::PartitionPoint { a: a.clone() };
        assert_eq!(
            event_log_prob(3.5, 4, &ev).unwrap(),
            esf_log_pmf(3.5, &a).unwrap()
        );
        assert!(event_log_prob(3.5, 5, &ev).is_err());
        let ev = EventSpec::KnPoint { k: 2 };
        assert!((event_log_prob(1.0, 3, &ev).unwrap().exp() - 0.5).abs() < 1e-15);
        assert_eq!(
            event_log_prob(1.7, 9, &ev).unwrap(),
            kn_log_pmf(1.7, 9, 2).unwrap()
        );
        let ev = EventSpec::AgeClassPoint { ks: vec![3] };
        assert_eq!(
            event_log_prob(1e3, 8, &ev).unwrap(),
            ageclass1_log_pmf(1e3, 8, 3).unwrap()
        );
    }

    #[test]
    fn kn_ball_concentrates() {
        let ev = EventSpec::KnBall {
            center: 1.0,
            half_width: 0.2,
            scale: KnScale::PerSample,
        };
        let lp = event_log_prob(1e6, 10, &ev).unwrap();
        assert!(lp.ln() > -1e-4 && lp.ln() <= 1e-15);
        let direct: f64 = (8..=10)
            .map(|k| kn_log_pmf(1e6, 10, k).unwrap().exp())
            .sum();
        assert!((lp.exp() - direct).abs() < 1e-14);
    }

    #[test]
    fn ageclass_ball_matches_direct_sum() {
        let (theta, n) = (1e2, 100_000u64);
        let ev = EventSpec::AgeClassBall {
            center: 0.3,
            half_width: 0.01,
        };
        let got = event_log_prob(theta, n, &ev).unwrap().ln();
        // independent evaluation through ln Γ
        let nf = n as f64;
        let terms: Vec<f64> = (29_000..=31_000u64)
            .map(|k| {
                let k = k as f64;
                (theta / nf).ln() + ln_gamma(nf + 1.0) - ln_gamma(nf - k + 1.0)
                    + ln_gamma(theta + nf - k)
                    - ln_gamma(theta + nf)
            })
            .collect();
        let want = crate::logspace::log_sum_exp(&terms);
        assert!((got - want).abs() <= 1e-8 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn joint_ball_with_one_class_matches_ball() {
        let (theta, n) = (7.0, 200u64);
        let one = EventSpec::AgeClassBall {
            center: 0.4,
            half_width: 0.05,
        };
        let joint = EventSpec::AgeClassJointBall {
            centers: vec![0.4],
            half_width: 0.05,
        };
        let a = event_log_prob(theta, n, &one).unwrap().ln();
        let b = event_log_prob(theta, n, &joint).unwrap().ln();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn joint_ball_sums_joint_pmf() {
        let (theta, n) = (3.0, 20u64);
        let ev = EventSpec::AgeClassJointBall {
            centers: vec![0.3, 0.2],
            half_width: 0.05,
        };
        let got = event_log_prob(theta, n, &ev).unwrap().exp();
        let mut want = 0.0;
        for k1 in 5..=7 {
            for k2 in 3..=5 {
                want += ageclass_joint_log_pmf(theta, n, &[k1, k2]).unwrap().exp();
            }
        }
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn budget_enforced() {
        let ev = EventSpec::AgeClassBall {
            center: 0.5,
            half_width: 0.4,
        };
        assert!(matches!(
            event_log_prob_with_budget(10.0, 1000, &ev, 100),
            Err(Error::Complexity { .. })
        ));
        let ev = EventSpec::AgeClassBall {
            center: 0.5,
            half_width: 0.0,
        };
        assert!(event_log_prob(10.0, 1000, &ev).is_err());
    }

    #[test]
    fn gem_density_values() {
        for x in [0.01, 0.3, 0.99] {
            assert!(gem_log_density(1.0, &[x]).unwrap().abs() < 1e-15);
        }
        assert!((gem_log_density(2.0, &[0.3]).unwrap() - (2.0f64 * 0.7).ln()).abs() < 1e-15);
        // two weights: θ²(1-s_2)^{θ-1}/(1-x_1)
        let want = (9.0f64 * 0.5 * 0.5 / 0.8).ln();
        assert!((gem_log_density(3.0, &[0.2, 0.3]).unwrap() - want).abs() < 1e-14);
        assert!(gem_log_density(3.0, &[0.6, 0.4]).is_err());
    }

    #[test]
    fn gem_density_rate_limit() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(9);
        let theta = 1e6;
        for _ in 0..10 {
            let n = rng.random_range(1..=5usize);
            let target = 0.9 * rng.random::<f64>();
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let x: Vec<f64> = raw.iter().map(|v| v * target / total).collect();
            let lhs = -gem_log_density(theta, &x).unwrap() / theta;
            let rhs = crate::rates::rate_residual_mass(&x).unwrap();
            assert!((lhs - rhs).abs() <= 2.0 * n as f64 * theta.ln() / theta);
        }
    }
}
