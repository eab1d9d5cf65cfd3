//! Exact log-domain laws: the Ewens sampling formula and its finite-K
//! Dirichlet counterpart, the law and moment generating function of the
//! number of alleles `K_n`, age-class sizes, and the conditional sampling
//! probability given allele frequencies.

mod ageclass;
mod kn;
mod sampling;
mod stirling;

pub use ageclass::{ageclass1_log_pmf, ageclass_joint_log_pmf};
pub use kn::{kn_log_mgf, kn_log_pmf, kn_mean};
pub use sampling::{
    conditional_sampling_log_prob, conditional_sampling_log_prob_with_budget, sampling_log_prob,
    DEFAULT_SAMPLING_BUDGET,
};
pub use stirling::{stirling1_log_row, stirling1_log_row_with_cap, DEFAULT_STIRLING_CAP};

pub use crate::special::log_rising_factorial;

use crate::error::{domain, Result};
use crate::logspace::LogReal;
use crate::partition::AllelePartition;
use crate::special::{ln_factorial, ln_rising};

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        domain(format!("theta must be finite and positive, got {theta}"))
    }
}

/// Ewens sampling formula:
/// `P{A_n = a} = n!/θ_(n) · Π_j (θ/j)^{a_j} / a_j!`.
pub fn esf_log_pmf(theta: f64, a: &AllelePartition) -> Result<LogReal> {
    check_theta(theta)?;
    let n = a.n() as u64;
    let ln_theta = theta.ln();
    let mut v = ln_factorial(n) - ln_rising(theta, n as f64);
    for (j, aj) in a.nonzero() {
        v += aj as f64 * (ln_theta - (j as f64).ln()) - ln_factorial(aj as u64);
    }
    Ok(LogReal::from_ln(v))
}

/// Sampling formula for an `n`-sample from a symmetric
/// `Dirichlet(θ/K, …, θ/K)` population of `K` alleles.
///
/// Zero (not an error) when the partition has more blocks than `K`.
pub fn dirichlet_k_log_pmf(theta: f64, alleles: u64, a: &AllelePartition) -> Result<LogReal> {
    check_theta(theta)?;
    if alleles < 2 {
        return domain(format!(
            "number of alleles K must be at least 2, got {alleles}"
        ));
    }
    let k = a.blocks() as u64;
    if k > alleles {
        return Ok(LogReal::ZERO);
    }
    let n = a.n() as u64;
    let alpha = theta / alleles as f64;
    let mut v = ln_factorial(n) - ln_rising(theta, n as f64)
        + k as f64 * alpha.ln()
        + ln_rising((alleles - k + 1) as f64, k as f64);
    for (j, aj) in a.nonzero() {
        // Γ(j+α) / (Γ(j+1) Γ(α+1)) = (α+1)_(j-1) / j!
        let per_block = ln_rising(alpha + 1.0, (j - 1) as f64) - ln_factorial(j as u64);
        v += aj as f64 * per_block - ln_factorial(aj as u64);
    }
    Ok(LogReal::from_ln(v))
}

/// `ln C(n, a)` with `C(n, a) = n! / Π_j (j!)^{a_j} a_j!`.
pub fn log_partition_factor(a: &AllelePartition) -> f64 {
    let mut v = ln_factorial(a.n() as u64);
    for (j, aj) in a.nonzero() {
        v -= aj as f64 * ln_factorial(j as u64) + ln_factorial(aj as u64);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logspace::log_sum_exp;
    use crate::partition::enumerate_partitions;

    fn part(v: &[u32]) -> AllelePartition {
        AllelePartition::new(v.to_vec()).unwrap()
    }

    /// Probability of a partition by the sequential (Hoppe urn) construction
    /// with blocks filled in order of appearance; sums over block orders.
    fn urn_oracle(theta: f64, sizes: &[u32]) -> f64 {
        // Probability of one particular labelled sequence, times the number
        // of sequences realising the partition.
        let n: u32 = sizes.iter().sum();
        let mut seq_prob = 1.0;
        for i in 0..n {
            let i = i as f64;
            seq_prob /= theta + i;
        }
        // new-block factors: θ each; continuation factors: (size-1)! per block
        for &s in sizes {
            seq_prob *= theta;
            seq_prob *= (1..s).map(|x| x as f64).product::<f64>();
        }
        // number of set partitions with these block sizes
        let mut count = (1..=n).map(|x| x as f64).product::<f64>();
        for &s in sizes {
            count /= (1..=s).map(|x| x as f64).product::<f64>();
        }
        let mut mult = std::collections::HashMap::new();
        for &s in sizes {
            *mult.entry(s).or_insert(0u32) += 1;
        }
        for (_, m) in mult {
            count /= (1..=m).map(|x| x as f64).product::<f64>();
        }
        seq_prob * count
    }

    #[test]
    fn esf_hand_values() {
        let v = esf_log_pmf(1.0, &part(&[3, 0, 0])).unwrap();
        assert!((v.exp() - 1.0 / 6.0).abs() < 1e-15);
        let v = esf_log_pmf(1.0, &part(&[0, 0, 1])).unwrap();
        assert!((v.exp() - 1.0 / 3.0).abs() < 1e-15);
        // urn oracle: 1·(1/2)·(1/3) and 1·(1/2)·(2/3)
        assert!((urn_oracle(1.0, &[1, 1, 1]) - 1.0 / 6.0).abs() < 1e-15);
        assert!((urn_oracle(1.0, &[3]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn esf_agrees_with_urn_oracle() {
        for &theta in &[0.3, 2.0, 17.0] {
            for a in enumerate_partitions(7).unwrap() {
                let want = urn_oracle(theta, &a.block_sizes());
                let got = esf_log_pmf(theta, &a).unwrap().exp();
                assert!(
                    (got - want).abs() < 1e-13 * want.max(1e-300).max(1.0),
                    "{a} θ={theta}"
                );
            }
        }
    }

    #[test]
    fn esf_normalizes() {
        let terms: Vec<f64> = enumerate_partitions(8)
            .unwrap()
            .iter()
            .map(|a| esf_log_pmf(5.0, a).unwrap().ln())
            .collect();
        assert!(log_sum_exp(&terms).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_two_alleles() {
        let v = dirichlet_k_log_pmf(1.0, 2, &part(&[2, 0])).unwrap();
        assert!((v.exp() - 0.25).abs() < 1e-14);
        let v = dirichlet_k_log_pmf(1.0, 2, &part(&[0, 1])).unwrap();
        assert!((v.exp() - 0.75).abs() < 1e-14);
        // three distinct alleles impossible with K = 2
        assert!(dirichlet_k_log_pmf(1.0, 2, &part(&[3, 0, 0]))
            .unwrap()
            .is_zero());
        assert!(dirichlet_k_log_pmf(1.0, 1, &part(&[1])).is_err());
    }

    #[test]
    fn dirichlet_beta_oracle() {
        // E[2 p (1-p)] under Dirichlet(1/2, 1/2) = 2·(1/2·1/2)/(1·2) = 1/4
        let oracle = 2.0 * (0.5 * 0.5) / (1.0 * 2.0);
        let got = dirichlet_k_log_pmf(1.0, 2, &part(&[2, 0])).unwrap().exp();
        assert!((got - oracle).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_tends_to_esf() {
        for a in enumerate_partitions(5).unwrap() {
            let esf = esf_log_pmf(2.0, &a).unwrap().exp();
            let fin = dirichlet_k_log_pmf(2.0, 100_000, &a).unwrap().exp();
            assert!((esf - fin).abs() <= 1e-3);
        }
    }

    #[test]
    fn partition_factor_values() {
        assert_eq!(log_partition_factor(&part(&[3, 0, 0])), 0.0);
        assert!(log_partition_factor(&part(&[0, 1])).abs() < 1e-15);
        assert!((log_partition_factor(&part(&[2, 1, 0, 0])) - 6f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn theta_checked() {
        assert!(esf_log_pmf(0.0, &part(&[1])).is_err());
        assert!(dirichlet_k_log_pmf(-2.0, 5, &part(&[1])).is_err());
    }
}
