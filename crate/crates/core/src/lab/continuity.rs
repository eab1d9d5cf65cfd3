//! Sequences in the ordered simplex along which the conditional sampling
//! probability has a limit different from its value at the limit point.

use crate::error::{domain, Result};
use crate::exact::{conditional_sampling_log_prob, log_partition_factor};
use crate::mass::MassVector;
use crate::partition::AllelePartition;
use crate::special::ln_factorial;

/// `m` equal atoms `1/m`.
pub fn uniform_sequence_point(m: usize) -> MassVector {
    MassVector::uniform(m)
}

/// `k - r` atoms `1/(2(k-r))` followed by `m` atoms `1/(2m)`, where `k` is
/// the number of blocks of `a` and `r = a_1`. Needs `1 <= r < k`.
pub fn two_block_sequence_point(a: &AllelePartition, m: usize) -> Result<MassVector> {
    let (k, r) = blocks_and_singletons(a)?;
    let big = k - r;
    let mut atoms = vec![1.0 / (2.0 * big as f64); big as usize];
    atoms.extend(std::iter::repeat_n(1.0 / (2.0 * m as f64), m));
    MassVector::descending(atoms)
}

fn blocks_and_singletons(a: &AllelePartition) -> Result<(u32, u32)> {
    let k = a.blocks();
    let r = a.count(1);
    if r == 0 || r >= k {
        return domain(format!("need 1 <= a_1 < number of blocks, got a = {a}"));
    }
    Ok((k, r))
}

/// `C(n, a) · (k-r)!/Π_{j>=2} a_j! · (1/(2(k-r)))^{n-r} / (2^r r!)`.
pub fn two_block_limit(a: &AllelePartition) -> Result<f64> {
    let (k, r) = blocks_and_singletons(a)?;
    let big = f64::from(k - r);
    let multinomial = ln_factorial(u64::from(k - r))
        - a.nonzero()
            .filter(|&(j, _)| j >= 2)
            .map(|(_, c)| ln_factorial(u64::from(c)))
            .sum::<f64>();
    let ln = log_partition_factor(a) + multinomial
        - f64::from(a.n() - r) * (2.0 * big).ln()
        - f64::from(r) * std::f64::consts::LN_2
        - ln_factorial(u64::from(r));
    Ok(ln.exp())
}

/// `F_a(p_m)` along the uniform sequence (`a` all singletons) and its limit
/// `1/n!`.
pub fn uniform_sequence_value(n: u32, m: usize) -> Result<(f64, f64)> {
    let a = AllelePartition::singletons(n);
    let v = conditional_sampling_log_prob(&a, &uniform_sequence_point(m))?.exp();
    Ok((v, (-ln_factorial(u64::from(n))).exp()))
}

/// `F_a(p_m)` along the two-block sequence and its limit.
pub fn two_block_sequence_value(a: &AllelePartition, m: usize) -> Result<(f64, f64)> {
    let v = conditional_sampling_log_prob(a, &two_block_sequence_point(a, m)?)?.exp();
    Ok((v, two_block_limit(a)?))
}
