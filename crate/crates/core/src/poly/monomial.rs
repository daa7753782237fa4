//! Multi-indices and the graded-lexicographic monomial ordering.
//!
//! Within one degree, monomials are listed in descending lexicographic order
//! of their exponent vectors: for `d = 2, t = 3` the order is
//! `x₁³, x₁²x₂, x₁x₂², x₂³`. Across degrees (odd-monomial LP rows, mixed
//! bases) lower degrees come first. Every coefficient vector and file
//! record in the crate uses this order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::binomial;

/// Exponent vector of a monomial `∏ xᵢ^{αᵢ}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `∏ αᵢ!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| crate::numeric::factorial(a)).product()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `N_{t,d} = C(t+d−1, d−1)`, the number of degree-`t` monomials in `d`
/// variables.
pub fn dim_homogeneous(t: u32, d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    binomial(t as u64 + d as u64 - 1, d as u64 - 1)
}

fn count(t: u32, d: usize) -> usize {
    if d == 0 {
        return usize::from(t == 0);
    }
    dim_homogeneous(t, d).expect("monomial count fits") as usize
}

/// All monomials of one degree in a fixed number of variables, stored as a
/// flat exponent table in graded-lex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialSet {
    dim: usize,
    degree: u32,
    exps: Vec<u16>,
}

impl MonomialSet {
    pub fn new(degree: u32, dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        let n = count(degree, dim);
        let mut exps = Vec::with_capacity(n * dim);
        let mut cur = vec![0u16; dim];
        fill(&mut exps, &mut cur, 0, degree);
        debug_assert_eq!(exps.len(), n * dim);
        MonomialSet { dim, degree, exps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u16] {
        &self.exps[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> + '_ {
        self.exps.chunks_exact(self.dim)
    }

    pub fn multi_index(&self, i: usize) -> MultiIndex {
        MultiIndex(self.get(i).iter().map(|&e| e as u32).collect())
    }

    pub fn to_multi_indices(&self) -> Vec<MultiIndex> {
        (0..self.len()).map(|i| self.multi_index(i)).collect()
    }

    /// Position of an exponent vector in this set, computed combinatorially.
    pub fn index_of<E: Copy + Into<u32>>(&self, exps: &[E]) -> usize {
        debug_assert_eq!(exps.len(), self.dim);
        let mut idx = 0;
        let mut remaining = self.degree;
        for (i, &e) in exps.iter().enumerate().take(self.dim - 1) {
            let e: u32 = e.into();
            let rest = self.dim - i - 1;
            // monomials whose exponent at position i exceeds e come first
            for larger in (e + 1)..=remaining {
                idx += count(remaining - larger, rest);
            }
            remaining -= e;
        }
        idx
    }
}

fn fill(out: &mut Vec<u16>, cur: &mut [u16], pos: usize, remaining: u32) {
    if pos == cur.len() - 1 {
        cur[pos] = remaining as u16;
        out.extend_from_slice(cur);
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e as u16;
        fill(out, cur, pos + 1, remaining - e);
    }
}

/// Odd-degree monomials of degree `< k`, lower degrees first.
pub fn odd_monomials_below(k: u32, d: usize) -> Vec<MultiIndex> {
    (1..k)
        .step_by(2)
        .flat_map(|deg| MonomialSet::new(deg, d).to_multi_indices())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_counts() {
        for d in 1..6 {
            assert_eq!(dim_homogeneous(1, d).unwrap(), d as u64);
        }
        assert_eq!(dim_homogeneous(3, 2).unwrap(), 4);
        assert_eq!(dim_homogeneous(6, 3).unwrap(), 28);
        assert_eq!(dim_homogeneous(0, 4).unwrap(), 1);
        assert!(dim_homogeneous(40, 40).is_err());
        assert!(dim_homogeneous(1, 0).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let set = MonomialSet::new(3, 2);
        let got: Vec<Vec<u16>> = set.iter().map(|e| e.to_vec()).collect();
        assert_eq!(got, vec![vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
        let set = MonomialSet::new(2, 3);
        assert_eq!(set.get(0), &[2, 0, 0]);
        assert_eq!(set.get(1), &[1, 1, 0]);
        assert_eq!(set.get(2), &[1, 0, 1]);
        assert_eq!(set.get(3), &[0, 2, 0]);
        assert_eq!(set.get(5), &[0, 0, 2]);
    }

    #[test]
    fn index_of_inverts_enumeration() {
        for d in 1..5 {
            for t in 0..6 {
                let set = MonomialSet::new(t, d);
                assert_eq!(set.len() as u64, dim_homogeneous(t, d).unwrap());
                for (i, e) in set.iter().enumerate() {
                    assert_eq!(set.index_of(e), i);
                }
            }
        }
    }

    #[test]
    fn odd_monomial_counts() {
        assert_eq!(odd_monomials_below(2, 3).len(), 3);
        assert_eq!(odd_monomials_below(4, 2).len(), 6);
        assert_eq!(odd_monomials_below(4, 3).len(), 13);
    }
}
