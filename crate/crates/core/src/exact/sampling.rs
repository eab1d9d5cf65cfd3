//! Probability of an allelic partition given allele frequencies `p`.
//!
//! The sum over assignments of distinct atoms to blocks is a monomial
//! symmetric polynomial in `p`. It is evaluated by a dynamic program over the
//! atoms whose state is the vector of blocks still to be placed, per block
//! size, so the cost is `m · Π_j (a_j + 1) · (#sizes + 1)` rather than the
//! number of index tuples.

use super::log_partition_factor;
use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, LogReal};
use crate::mass::MassVector;
use crate::partition::AllelePartition;
use crate::special::ln_factorial;

/// Default cap on dynamic-program work units.
pub const DEFAULT_SAMPLING_BUDGET: f64 = 1e7;

/// The printed conditional sampling formula applied to a finite-support `p`:
///
/// `C(n, a) · Σ p_{l_11}···p_{l_1a_1} p_{l_21}^2···p_{l_2a_2}^2 ···`
///
/// with `C(n, a) = n!/Π_j (j!)^{a_j} a_j!` and the sum over distinct indices
/// increasing within each block size. When `Σ p < 1` the raw value is
/// returned. Note that this form is smaller than the true sampling
/// probability by `Π_j a_j!`; see [`sampling_log_prob`].
pub fn conditional_sampling_log_prob(a: &AllelePartition, p: &MassVector) -> Result<LogReal> {
    conditional_sampling_log_prob_with_budget(a, p, DEFAULT_SAMPLING_BUDGET)
}

pub fn conditional_sampling_log_prob_with_budget(
    a: &AllelePartition,
    p: &MassVector,
    budget: f64,
) -> Result<LogReal> {
    let sum = log_monomial_sum(a, p.atoms(), budget)?;
    Ok(LogReal::from_ln(log_partition_factor(a) + sum))
}

/// `P{A_n = a | p}` for `Σ p = 1`: the multinomial sampling probability,
/// `n!/Π_j (j!)^{a_j}` times the same increasing-index sum. Sums to one
/// over `A_n` when `p` has no missing mass.
pub fn sampling_log_prob(a: &AllelePartition, p: &MassVector) -> Result<LogReal> {
    let v = conditional_sampling_log_prob(a, p)?.ln();
    let correction: f64 = a.nonzero().map(|(_, aj)| ln_factorial(aj as u64)).sum();
    Ok(LogReal::from_ln(v + correction))
}

/// `ln Σ Π p^{power}` over injective atom assignments, counted once per
/// set of atoms within each block size.
fn log_monomial_sum(a: &AllelePartition, atoms: &[f64], budget: f64) -> Result<f64> {
    let sizes: Vec<(u32, u32)> = a.nonzero().collect();
    let positive: Vec<f64> = atoms.iter().copied().filter(|&x| x > 0.0).collect();
    if (a.blocks() as usize) > positive.len() {
        return Ok(f64::NEG_INFINITY);
    }

    // mixed-radix state: digit t holds the number of size-j_t blocks left
    let mut strides = Vec::with_capacity(sizes.len());
    let mut states = 1usize;
    for &(_, count) in &sizes {
        strides.push(states);
        states = states
            .checked_mul(count as usize + 1)
            .ok_or(Error::Complexity {
                work: f64::INFINITY,
                budget,
            })?;
    }
    let work = positive.len() as f64 * states as f64 * (sizes.len() + 1) as f64;
    if work > budget {
        return Err(Error::Complexity { work, budget });
    }

    let mut dp = vec![f64::NEG_INFINITY; states];
    dp[states - 1] = 0.0;
    // states visited in ascending order: every transition lowers the index,
    // so a source is always read before it can be written this round
    for &mass in &positive {
        let ln_p = mass.ln();
        for s in 0..states {
            let v = dp[s];
            if v == f64::NEG_INFINITY {
                continue;
            }
            for (t, &(j, count)) in sizes.iter().enumerate() {
                let left = (s / strides[t]) % (count as usize + 1);
                if left > 0 {
                    let target = s - strides[t];
                    dp[target] = log_add_exp(dp[target], v + j as f64 * ln_p);
                }
            }
        }
    }
    Ok(dp[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logspace::log_sum_exp;
    use crate::mass::AtomOrder;
    use crate::partition::enumerate_partitions;

    fn part(v: &[u32]) -> AllelePartition {
        AllelePartition::new(v.to_vec()).unwrap()
    }

    /// Brute force: every ordered injective assignment of atoms to the
    /// block list, divided by Π a_j! to count increasing tuples once.
    fn brute_force(a: &AllelePartition, p: &[f64]) -> f64 {
        let blocks = a.block_sizes();
        fn rec(blocks: &[u32], p: &[f64], used: &mut Vec<bool>) -> f64 {
            if blocks.is_empty() {
                return 1.0;
            }
            let mut acc = 0.0;
            for i in 0..p.len() {
                if !used[i] {
                    used[i] = true;
                    acc += p[i].powi(blocks[0] as i32) * rec(&blocks[1..], p, used);
                    used[i] = false;
                }
            }
            acc
        }
        let ordered = rec(&blocks, p, &mut vec![false; p.len()]);
        let sym: f64 = a
            .nonzero()
            .map(|(_, aj)| (1..=aj).map(|x| x as f64).product::<f64>())
            .product();
        log_partition_factor(a).exp() * ordered / sym
    }

    #[test]
    fn uniform_five_atoms_pair_of_singletons() {
        let v = conditional_sampling_log_prob(&part(&[2, 0]), &MassVector::uniform(5)).unwrap();
        assert!((v.exp() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn one_pair_sums_squares() {
        let p = MassVector::descending(vec![0.5, 0.5]).unwrap();
        let v = conditional_sampling_log_prob(&part(&[0, 1]), &p).unwrap();
        assert!((v.exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dynamic_program_matches_brute_force() {
        let p = vec![0.31, 0.2, 0.17, 0.12, 0.1, 0.06, 0.04];
        let mv = MassVector::new(p.clone(), AtomOrder::Stick, 0.0).unwrap();
        for n in 1..=6 {
            for a in enumerate_partitions(n).unwrap() {
                let want = brute_force(&a, &p);
                let got = conditional_sampling_log_prob(&a, &mv).unwrap().exp();
                assert!(
                    (got - want).abs() < 1e-14 * want.max(1e-300).max(1.0),
                    "{a}"
                );
            }
        }
    }

    #[test]
    fn normalized_form_sums_to_one() {
        let p = MassVector::descending(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let terms: Vec<f64> = enumerate_partitions(4)
            .unwrap()
            .iter()
            .map(|a| sampling_log_prob(a, &p).unwrap().ln())
            .collect();
        assert!((log_sum_exp(&terms).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn printed_form_undercounts_by_block_symmetry() {
        let p = MassVector::descending(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let total: f64 = enumerate_partitions(4)
            .unwrap()
            .iter()
            .map(|a| conditional_sampling_log_prob(a, &p).unwrap().exp())
            .sum();
        // independent enumeration of the printed form at this p
        assert!((total - 0.6205).abs() < 1e-12);
    }

    #[test]
    fn too_many_blocks_is_zero() {
        let p = MassVector::descending(vec![0.5, 0.5]).unwrap();
        assert!(conditional_sampling_log_prob(&part(&[3, 0, 0]), &p)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn budget_is_enforced() {
        let p = MassVector::uniform(1000);
        let a = AllelePartition::singletons(3);
        let err = conditional_sampling_log_prob_with_budget(&a, &p, 100.0).unwrap_err();
        assert!(matches!(err, Error::Complexity { .. }));
    }

    #[test]
    fn defective_mass_returns_raw_value() {
        // Σ p = 0.5: one pair on two atoms of 1/4 gives 2·(1/16)
        let p = MassVector::new(vec![0.25, 0.25], AtomOrder::Descending, 0.0).unwrap();
        let v = conditional_sampling_log_prob(&part(&[0, 1]), &p)
            .unwrap()
            .exp();
        assert!((v - 0.125).abs() < 1e-15);
    }
}
