//! Enumeration of compositions: nonnegative integer vectors with a fixed sum.
//! These index both simplex grids (`k / r`) and `N`-body multisets.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("need at least one part and a positive total (parts = {parts}, total = {total})")]
    Degenerate { parts: usize, total: usize },
    #[error("{count} states exceed the cap of {cap}")]
    Overflow { count: u128, cap: usize },
}

/// `C(n, k)` in 128-bit arithmetic, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of compositions of `total` into `parts` nonnegative parts.
pub fn composition_count(parts: usize, total: usize) -> u128 {
    if parts == 0 {
        return u128::from(total == 0);
    }
    binomial((parts + total - 1) as u64, total as u64)
}

/// All compositions of `total` into `parts` parts, in lexicographically
/// descending order: `(total, 0, …)` first, `(…, 0, total)` last.
pub fn compositions(parts: usize, total: usize, cap: usize) -> Result<Vec<Vec<u32>>, CountError> {
    if parts == 0 || total == 0 {
        return Err(CountError::Degenerate { parts, total });
    }
    let count = composition_count(parts, total);
    if count > cap as u128 {
        return Err(CountError::Overflow { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; parts];
    fill(&mut current, 0, total as u32, &mut out);
    Ok(out)
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        fill(current, pos + 1, remaining - v, out);
    }
    current[pos] = 0;
}
