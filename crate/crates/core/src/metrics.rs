//! External validation.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Adjusted Rand index of two labelings of the same samples.
///
/// Two labelings that each put every sample in one cluster score 1.
pub fn ari<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Hash + Eq,
    B: Hash + Eq,
{
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "labelings have different lengths ({} and {})",
            a.len(),
            b.len()
        )));
    }
    let mut table: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: u64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: u64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: u64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);
    let (ta, tb, tt) = (sum_a as u128, sum_b as u128, total as u128);
    if tt * (ta + tb) == 2 * ta * tb {
        return Ok(1.0);
    }
    let (index, sum_a, sum_b, total) = (index as f64, sum_a as f64, sum_b as f64, total as f64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    Ok((index - expected) / (max - expected))
}
