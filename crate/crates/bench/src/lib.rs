//! Shared inputs for the kernel benchmarks.

use pdld::partition::enumerate_partitions;
use pdld::{AllelePartition, MassVector};

/// Every allelic partition of `n`.
pub fn all_partitions(n: u32) -> Vec<AllelePartition> {
    enumerate_partitions(n).expect("small n")
}

/// Descending mass vector with geometric atoms `(1-q) q^i`, `i < m`.
pub fn geometric_masses(m: usize, q: f64) -> MassVector {
    let atoms: Vec<f64> = (0..m).map(|i| (1.0 - q) * q.powi(i as i32)).collect();
    MassVector::descending(atoms).expect("geometric masses sum below one")
}
