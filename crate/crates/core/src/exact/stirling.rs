//! Unsigned Stirling numbers of the first kind in log space.
//!
//! `|S_{m+1}^k| = m·|S_m^k| + |S_m^{k-1}|` has only positive terms, so each
//! step is a single `log_add_exp` with no cancellation.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::logspace::log_add_exp;

pub const DEFAULT_STIRLING_CAP: u32 = 5000;

type RowCache = RwLock<HashMap<u32, Arc<Vec<f64>>>>;

fn cache() -> &'static RowCache {
    static CACHE: OnceLock<RowCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `(ln|S_n^1|, …, ln|S_n^n|)`, cached by `n`.
pub fn stirling1_log_row(n: u32) -> Result<Arc<Vec<f64>>> {
    stirling1_log_row_with_cap(n, DEFAULT_STIRLING_CAP)
}

pub fn stirling1_log_row_with_cap(n: u32, cap: u32) -> Result<Arc<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Domain("Stirling row needs n >= 1".into()));
    }
    if n > cap {
        return Err(Error::Size {
            what: "Stirling row n",
            value: n as u64,
            cap: cap as u64,
        });
    }
    let start = {
        let guard = cache().read().expect("stirling cache poisoned");
        if let Some(row) = guard.get(&n) {
            return Ok(Arc::clone(row));
        }
        // resume from the longest cached row below n
        guard
            .iter()
            .filter(|(&m, _)| m < n)
            .max_by_key(|(&m, _)| m)
            .map(|(&m, row)| (m, Arc::clone(row)))
    };
    let (mut m, mut row) = match start {
        Some((m, row)) => (m, row.as_ref().clone()),
        None => (1, vec![0.0]),
    };
    while m < n {
        let ln_m = (m as f64).ln();
        let mut next = Vec::with_capacity(m as usize + 1);
        next.push(ln_m + row[0]);
        for k in 1..m as usize {
            next.push(log_add_exp(ln_m + row[k], row[k - 1]));
        }
        next.push(row[m as usize - 1]);
        row = next;
        m += 1;
    }
    let row = Arc::new(row);
    cache()
        .write()
        .expect("stirling cache poisoned")
        .entry(n)
        .or_insert_with(|| Arc::clone(&row));
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logspace::log_sum_exp;
    use crate::special::{ln_binomial, ln_factorial};

    /// Exact integer Stirling numbers by the same recurrence in u128.
    fn exact_row(n: usize) -> Vec<u128> {
        let mut row = vec![1u128];
        for m in 1..n {
            let mut next = vec![0u128; m + 1];
            for k in 0..=m {
                let stay = if k < m { m as u128 * row[k] } else { 0 };
                let new = if k > 0 { row[k - 1] } else { 0 };
                next[k] = stay + new;
            }
            row = next;
        }
        row
    }

    #[test]
    fn polynomial_expansion_n3() {
        let row = stirling1_log_row(3).unwrap();
        let want = [2f64.ln(), 3f64.ln(), 0.0];
        for (a, b) in row.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(stirling1_log_row(1).unwrap().as_slice(), &[0.0]);
    }

    #[test]
    fn matches_exact_integers() {
        let exact = exact_row(30);
        let row = stirling1_log_row(30).unwrap();
        for (k, &s) in exact.iter().enumerate() {
            let want = (s as f64).ln();
            assert!(
                (row[k] - want).abs() < 1e-12 * want.abs().max(1.0),
                "k={}",
                k + 1
            );
        }
    }

    #[test]
    fn rows_sum_to_factorial() {
        for n in 1..=20 {
            let row = stirling1_log_row(n).unwrap();
            assert!((log_sum_exp(&row) - ln_factorial(n as u64)).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_bounds_small() {
        for n in 1..=60u32 {
            let row = stirling1_log_row(n).unwrap();
            for k in 1..=n {
                let lower = ln_factorial(n as u64 - 1) - ln_factorial(k as u64 - 1);
                let upper = lower + ln_binomial(n as u64 - 1, k as u64 - 1);
                let v = row[k as usize - 1];
                let tol = 1e-12 * v.abs().max(1.0);
                assert!(v >= lower - tol && v <= upper + tol, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn cap_and_domain() {
        assert!(matches!(stirling1_log_row(5001), Err(Error::Size { .. })));
        assert!(stirling1_log_row(0).is_err());
        assert!(stirling1_log_row_with_cap(40, 30).is_err());
    }

    #[test]
    fn cache_resume_is_consistent() {
        let a = stirling1_log_row(120).unwrap();
        let b = stirling1_log_row(121).unwrap();
        let c = stirling1_log_row_with_cap(121, 200).unwrap();
        assert_eq!(b.len(), 121);
        assert_eq!(a.len(), 120);
        assert_eq!(b.as_slice(), c.as_slice());
    }

    #[test]
    fn concurrent_readers() {
        let handles: Vec<_> = (0..8)
            .map(|i| std::thread::spawn(move || stirling1_log_row(200 + i % 3).unwrap()[5]))
            .collect();
        let vals: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(vals[0], vals[3]);
    }
}
