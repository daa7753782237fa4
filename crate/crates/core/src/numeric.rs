//! Small numeric helpers: exact binomials, double factorials and a
//! reduction-order-stable summation.

use crate::error::{Error, Result};

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow { n, k })?
            / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::Overflow { n, k });
        }
    }
    Ok(acc as u64)
}

/// `(n)!!` as a float, with the convention `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut m = n;
    while m > 1 {
        acc *= m as f64;
        m -= 2;
    }
    acc
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how the values were produced, which keeps parallel
/// reductions reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Column-wise pairwise sum of equally sized rows.
pub fn pairwise_sum_rows(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    const BLOCK: usize = 32;
    if rows.len() <= BLOCK {
        let mut acc = vec![0.0; width];
        for row in rows {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        return acc;
    }
    let mid = rows.len() / 2;
    let mut left = pairwise_sum_rows(&rows[..mid], width);
    let right = pairwise_sum_rows(&rows[mid..], width);
    for (l, r) in left.iter_mut().zip(right) {
        *l += r;
    }
    left
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sign with `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
