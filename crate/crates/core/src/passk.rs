// SPDX-License-Identifier: Apache-2.0

//! Unbiased pass@k.
//!
//! For one benchmark case with `n` samples of which `c` pass, pass@k is the
//! probability that a uniformly drawn size-`k` subset of the samples holds at
//! least one passing sample: `1 - C(n-c, k) / C(n, k)`. The ratio of binomials
//! is evaluated as a running product so it never overflows.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PassAtKError {
    #[error("n must be positive")]
    ZeroSamples,
    #[error("correct count c={c} exceeds sample count n={n}")]
    CorrectExceedsTotal { n: u32, c: u32 },
    #[error("k={k} must satisfy 1 <= k <= n={n}")]
    KOutOfRange { n: u32, k: u32 },
    #[error("no cases to aggregate")]
    Empty,
    #[error("cases have different sample counts ({first} vs {other})")]
    MixedSampleCounts { first: u32, other: u32 },
}

/// Unbiased pass@k for a single case.
pub fn pass_at_k(n: u32, c: u32, k: u32) -> Result<f64, PassAtKError> {
    if n == 0 {
        return Err(PassAtKError::ZeroSamples);
    }
    if c > n {
        return Err(PassAtKError::CorrectExceedsTotal { n, c });
    }
    if k == 0 || k > n {
        return Err(PassAtKError::KOutOfRange { n, k });
    }
    if n - c < k {
        return Ok(1.0);
    }
    if k == 1 {
        // The product telescopes to (n-c)/n; return c/n without rounding drift.
        return Ok(f64::from(c) / f64::from(n));
    }
    let k_f = f64::from(k);
    let prod = ((n - c + 1)..=n).fold(1.0_f64, |acc, i| acc * (1.0 - k_f / f64::from(i)));
    Ok(1.0 - prod)
}

/// Mean pass@k over cases given as `(n, c)` pairs.
///
/// All cases must share the same `n` unless `allow_mixed_n` is set, in which
/// case each case is estimated with its own `n` (and `k` must fit every one).
pub fn mean_pass_at_k(
    counts: &[(u32, u32)],
    k: u32,
    allow_mixed_n: bool,
) -> Result<f64, PassAtKError> {
    let (first_n, _) = *counts.first().ok_or(PassAtKError::Empty)?;
    let mut total = 0.0;
    for &(n, c) in counts {
        if !allow_mixed_n && n != first_n {
            return Err(PassAtKError::MixedSampleCounts {
                first: first_n,
                other: n,
            });
        }
        total += pass_at_k(n, c, k)?;
    }
    Ok(total / counts.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Probability that a uniformly chosen k-subset of n samples (the first c
    // of which pass) contains a passing sample, by enumerating bitmasks.
    fn subset_oracle(n: u32, c: u32, k: u32) -> f64 {
        let mut hits = 0u64;
        let mut total = 0u64;
        let passing = (1u32 << c) - 1;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() == k {
                total += 1;
                if mask & passing != 0 {
                    hits += 1;
                }
            }
        }
        hits as f64 / total as f64
    }

    #[test]
    fn edge_rule_is_exact() {
        assert_eq!(pass_at_k(3, 2, 2).unwrap(), 1.0);
        assert_eq!(pass_at_k(5, 5, 1).unwrap(), 1.0);
        assert_eq!(pass_at_k(5, 0, 5).unwrap(), 0.0);
    }

    #[test]
    fn five_two_three_matches_enumeration() {
        // C(5,3) = 10 subsets, 9 contain one of the two passing samples.
        let oracle = subset_oracle(5, 2, 3);
        assert!((oracle - 0.9).abs() < 1e-15);
        assert!((pass_at_k(5, 2, 3).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn matches_oracle_small_grid() {
        for n in 1..=8 {
            for c in 0..=n {
                for k in 1..=n {
                    let got = pass_at_k(n, c, k).unwrap();
                    let want = subset_oracle(n, c, k);
                    assert!((got - want).abs() < 1e-12, "n={n} c={c} k={k}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(pass_at_k(0, 0, 1), Err(PassAtKError::ZeroSamples));
        assert_eq!(
            pass_at_k(3, 4, 1),
            Err(PassAtKError::CorrectExceedsTotal { n: 3, c: 4 })
        );
        assert_eq!(pass_at_k(3, 1, 4), Err(PassAtKError::KOutOfRange { n: 3, k: 4 }));
        assert_eq!(pass_at_k(3, 1, 0), Err(PassAtKError::KOutOfRange { n: 3, k: 0 }));
    }

    #[test]
    fn mean_over_cases() {
        assert_eq!(mean_pass_at_k(&[(5, 5), (5, 0)], 1, false).unwrap(), 0.5);
        assert_eq!(mean_pass_at_k(&[], 1, false), Err(PassAtKError::Empty));
        assert_eq!(
            mean_pass_at_k(&[(5, 1), (4, 1)], 1, false),
            Err(PassAtKError::MixedSampleCounts { first: 5, other: 4 })
        );
        let mixed = mean_pass_at_k(&[(5, 1), (4, 1)], 1, true).unwrap();
        assert!((mixed - (0.2 + 0.25) / 2.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn monotone_in_c_and_k(n in 1u32..40, c in 0u32..40, k in 1u32..40) {
            let c = c % (n + 1);
            let k = (k - 1) % n + 1;
            let base = pass_at_k(n, c, k).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&base));
            if c < n {
                proptest::prop_assert!(pass_at_k(n, c + 1, k).unwrap() >= base - 1e-12);
            }
            if k < n {
                proptest::prop_assert!(pass_at_k(n, c, k + 1).unwrap() >= base - 1e-12);
            }
        }

        #[test]
        fn pass_at_one_is_fraction(n in 1u32..200, c in 0u32..200) {
            let c = c % (n + 1);
            let got = pass_at_k(n, c, 1).unwrap();
            proptest::prop_assert_eq!(got, f64::from(c) / f64::from(n));
        }
    }
}
