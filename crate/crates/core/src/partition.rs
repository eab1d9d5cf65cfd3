//! Allelic partitions of a sample: `a = (a_1, …, a_n)` where `a_j` counts
//! the alleles seen exactly `j` times, so that `Σ j·a_j = n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest sample size [`enumerate_partitions`] accepts by default.
pub const DEFAULT_ENUMERATION_CAP: u32 = 25;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct AllelePartition {
    counts: Vec<u32>,
}

impl AllelePartition {
    /// Build from `(a_1, …, a_n)`; the vector length is the sample size.
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        let n = counts.len() as u64;
        if n == 0 {
            return Err(Error::InvalidPartition(
                "sample size must be at least 1".into(),
            ));
        }
        let total: u64 = counts
            .iter()
            .enumerate()
            .map(|(j, &a)| (j as u64 + 1) * a as u64)
            .sum();
        if total != n {
            return Err(Error::InvalidPartition(format!(
                "sum of j*a_j is {total}, expected n = {n}"
            )));
        }
        Ok(AllelePartition { counts })
    }

    /// Build from block sizes in any order, e.g. `[2, 1, 1]` for `n = 4`.
    pub fn from_block_sizes(n: u32, sizes: &[u32]) -> Result<Self> {
        let mut counts = vec![0u32; n as usize];
        for &s in sizes {
            if s == 0 || s > n {
                return Err(Error::InvalidPartition(format!(
                    "block size {s} outside 1..={n}"
                )));
            }
            counts[s as usize - 1] += 1;
        }
        AllelePartition::new(counts)
    }

    /// Every individual carries its own allele.
    pub fn singletons(n: u32) -> Self {
        let mut counts = vec![0; n as usize];
        counts[0] = n;
        AllelePartition { counts }
    }

    /// The whole sample carries one allele.
    pub fn single_block(n: u32) -> Self {
        let mut counts = vec![0; n as usize];
        counts[n as usize - 1] = 1;
        AllelePartition { counts }
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.counts.len() as u32
    }

    /// `(a_1, …, a_n)`.
    #[inline]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// `a_j` for `j` in `1..=n`.
    #[inline]
    pub fn count(&self, j: usize) -> u32 {
        self.counts[j - 1]
    }

    /// Number of distinct alleles `k = Σ a_j`.
    pub fn blocks(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `(j, a_j)` for each `j` with `a_j > 0`, ascending in `j`.
    pub fn nonzero(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(j, &a)| (j as u32 + 1, a))
    }

    /// Block sizes in non-increasing order.
    pub fn block_sizes(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.blocks() as usize);
        for (j, a) in self.nonzero().collect::<Vec<_>>().into_iter().rev() {
            out.extend(std::iter::repeat_n(j, a as usize));
        }
        out
    }
}

impl TryFrom<Vec<u32>> for AllelePartition {
    type Error = Error;

    fn try_from(counts: Vec<u32>) -> Result<Self> {
        AllelePartition::new(counts)
    }
}

impl From<AllelePartition> for Vec<u32> {
    fn from(a: AllelePartition) -> Vec<u32> {
        a.counts
    }
}

impl fmt::Display for AllelePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses the comma-separated form `a_1,…,a_n`.
impl FromStr for AllelePartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidPartition(format!("bad entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        AllelePartition::new(counts)
    }
}

/// All of `A_n` with the default cap.
pub fn enumerate_partitions(n: u32) -> Result<Vec<AllelePartition>> {
    enumerate_partitions_with_cap(n, DEFAULT_ENUMERATION_CAP)
}

/// All of `A_n`, each exactly once, ordered reverse-lexicographically in
/// `(a_n, …, a_1)`: the single block comes first and all singletons last.
pub fn enumerate_partitions_with_cap(n: u32, cap: u32) -> Result<Vec<AllelePartition>> {
    if n == 0 {
        return Err(Error::InvalidPartition(
            "sample size must be at least 1".into(),
        ));
    }
    if n > cap {
        return Err(Error::Size {
            what: "partition enumeration n",
            value: n as u64,
            cap: cap as u64,
        });
    }
    let mut out = Vec::new();
    let mut counts = vec![0u32; n as usize];
    // largest part first, parts non-increasing
    fn rec(rem: u32, max_part: u32, counts: &mut Vec<u32>, out: &mut Vec<AllelePartition>) {
        if rem == 0 {
            out.push(AllelePartition {
                counts: counts.clone(),
            });
            return;
        }
        for part in (1..=max_part.min(rem)).rev() {
            counts[part as usize - 1] += 1;
            rec(rem - part, part, counts, out);
            counts[part as usize - 1] -= 1;
        }
    }
    rec(n, n, &mut counts, &mut out);
    out.sort_by(|x, y| y.counts.iter().rev().cmp(x.counts.iter().rev()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Integer-partition counts p(n) by Euler's pentagonal recurrence.
    fn partition_count(n: usize) -> u64 {
        let mut p = vec![0i64; n + 1];
        p[0] = 1;
        for m in 1..=n {
            let mut k = 1i64;
            let mut acc = 0i64;
            loop {
                let g1 = (k * (3 * k - 1) / 2) as usize;
                if g1 > m {
                    break;
                }
                let sign = if k % 2 == 1 { 1 } else { -1 };
                acc += sign * p[m - g1];
                let g2 = (k * (3 * k + 1) / 2) as usize;
                if g2 <= m {
                    acc += sign * p[m - g2];
                }
                k += 1;
            }
            p[m] = acc;
        }
        p[n] as u64
    }

    #[test]
    fn small_enumerations() {
        let one = enumerate_partitions(1).unwrap();
        assert_eq!(one, vec![AllelePartition::new(vec![1]).unwrap()]);
        assert_eq!(enumerate_partitions(4).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(10).unwrap().len(), 42);
    }

    #[test]
    fn order_is_reverse_lexicographic() {
        let got: Vec<Vec<u32>> = enumerate_partitions(4)
            .unwrap()
            .into_iter()
            .map(Vec::from)
            .collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0, 0, 1],
                vec![1, 0, 1, 0],
                vec![0, 2, 0, 0],
                vec![2, 1, 0, 0],
                vec![4, 0, 0, 0],
            ]
        );
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(enumerate_partitions(26), Err(Error::Size { .. })));
        assert!(enumerate_partitions_with_cap(26, 30).is_ok());
    }

    #[test]
    fn parse_and_validate() {
        let a: AllelePartition = "3,0,0".parse().unwrap();
        assert_eq!(a.blocks(), 3);
        assert!("1,1,1".parse::<AllelePartition>().is_err());
        assert!("".parse::<AllelePartition>().is_err());
        assert_eq!(a.to_string(), "3,0,0");
        let b = AllelePartition::from_block_sizes(4, &[1, 2, 1]).unwrap();
        assert_eq!(b.counts(), &[2, 1, 0, 0]);
        assert_eq!(b.block_sizes(), vec![2, 1, 1]);
    }

    proptest! {
        #[test]
        fn enumeration_matches_partition_numbers(n in 1u32..=18) {
            let all = enumerate_partitions(n).unwrap();
            prop_assert_eq!(all.len() as u64, partition_count(n as usize));
            let mut seen = std::collections::HashSet::new();
            for a in &all {
                prop_assert!(AllelePartition::new(a.counts().to_vec()).is_ok());
                prop_assert!(seen.insert(a.clone()));
            }
        }
    }
}
