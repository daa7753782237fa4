//! Moments of the uniform distribution on `S^{d−1}` and the induced inner
//! product on homogeneous polynomials.

use nalgebra::DMatrix;

use super::homogeneous::HomogeneousPoly;
use super::monomial::{MonomialSet, MultiIndex};
use crate::error::{Error, Result};

/// `E_{x∼U(S^{d−1})}[x^α]`.
///
/// Zero unless every exponent is even; otherwise
/// `∏ᵢ(αᵢ−1)!! / ∏_{j<|α|/2}(d+2j)`.
pub fn sphere_moment(alpha: &MultiIndex, d: usize) -> Result<f64> {
    if alpha.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: alpha.dim(),
        });
    }
    Ok(sphere_moment_raw(alpha.exponents(), d))
}

pub(crate) fn sphere_moment_raw<E: Copy + Into<u32>>(alpha: &[E], d: usize) -> f64 {
    if alpha.iter().any(|&a| a.into() % 2 == 1) {
        return 0.0;
    }
    // interleave numerator and denominator factors to stay near 1
    let mut acc = 1.0;
    let mut j = 0u32;
    for &a in alpha {
        let a: u32 = a.into();
        for k in 0..a / 2 {
            acc *= (2 * k + 1) as f64 / (d as f64 + 2.0 * j as f64);
            j += 1;
        }
    }
    acc
}

/// `⟨p, q⟩ = E_{x∼U(S^{d−1})}[p(x) q(x)]`.
///
/// Both polynomials must share the dimension and the parity of their
/// degrees; different degrees of equal parity are compared on the sphere,
/// which is the same as homogenizing the lower one with powers of `‖x‖²`.
pub fn sphere_inner(p: &HomogeneousPoly, q: &HomogeneousPoly) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    if p.degree() % 2 != q.degree() % 2 {
        return Err(Error::MixedParity(p.degree(), q.degree()));
    }
    let d = p.dim();
    let mut e = vec![0u32; d];
    let mut acc = 0.0;
    for (ea, &ca) in p.monomials().iter().zip(p.coeffs()) {
        if ca == 0.0 {
            continue;
        }
        for (eb, &cb) in q.monomials().iter().zip(q.coeffs()) {
            if cb == 0.0 {
                continue;
            }
            for i in 0..d {
                e[i] = ea[i] as u32 + eb[i] as u32;
            }
            acc += ca * cb * sphere_moment_raw(&e, d);
        }
    }
    Ok(acc)
}

/// `‖p‖₂ = ⟨p, p⟩^{1/2}`.
pub fn sphere_norm(p: &HomogeneousPoly) -> f64 {
    sphere_inner(p, p).expect("same polynomial").max(0.0).sqrt()
}

/// Gram matrix of the degree-`t` monomials: entry `(α, β)` is
/// `E[x^{α+β}]` on the sphere.
pub fn gram_matrix(t: u32, d: usize) -> DMatrix<f64> {
    let set = MonomialSet::new(t, d);
    gram_of(&set)
}

pub(crate) fn gram_of(set: &MonomialSet) -> DMatrix<f64> {
    let n = set.len();
    let d = set.dim();
    let mut g = DMatrix::zeros(n, n);
    let mut e = vec![0u32; d];
    for i in 0..n {
        for j in i..n {
            let (a, b) = (set.get(i), set.get(j));
            for k in 0..d {
                e[k] = a[k] as u32 + b[k] as u32;
            }
            let m = sphere_moment_raw(&e, d);
            g[(i, j)] = m;
            g[(j, i)] = m;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex(e.to_vec())
    }

    #[test]
    fn closed_form_moments() {
        assert_relative_eq!(sphere_moment(&mi(&[2, 0]), 2).unwrap(), 0.5);
        assert_eq!(sphere_moment(&mi(&[1, 1]), 2).unwrap(), 0.0);
        assert_relative_eq!(sphere_moment(&mi(&[4, 0, 0]), 3).unwrap(), 0.2, epsilon = 1e-15);
        assert_relative_eq!(
            sphere_moment(&mi(&[2, 2, 0]), 3).unwrap(),
            1.0 / 15.0,
            epsilon = 1e-15
        );
        assert!(sphere_moment(&mi(&[2, 0]), 3).is_err());
    }

    #[test]
    fn second_moments_sum_to_one() {
        for d in 1..7 {
            let s: f64 = (0..d)
                .map(|i| {
                    let mut e = vec![0; d];
                    e[i] = 2;
                    sphere_moment(&MultiIndex(e), d).unwrap()
                })
                .sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn inner_products() {
        let x1 = HomogeneousPoly::linear(&[1.0, 0.0]);
        let x2 = HomogeneousPoly::linear(&[0.0, 1.0]);
        assert_relative_eq!(sphere_inner(&x1, &x1).unwrap(), 0.5);
        assert_eq!(sphere_inner(&x1, &x2).unwrap(), 0.0);
        let x1_cubed = HomogeneousPoly::monomial(&mi(&[3, 0]), 1.0);
        // E[cos⁴θ] = 3/8
        assert_relative_eq!(sphere_inner(&x1_cubed, &x1).unwrap(), 0.375, epsilon = 1e-15);
        let quad = HomogeneousPoly::monomial(&mi(&[2, 0]), 1.0);
        assert!(matches!(
            sphere_inner(&quad, &x1),
            Err(Error::MixedParity(2, 1))
        ));
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(1, 2);
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]));
        let g = gram_matrix(1, 3);
        assert_relative_eq!(g, DMatrix::identity(3, 3) / 3.0, epsilon = 1e-15);
        let g = gram_matrix(2, 2);
        // order x₁², x₁x₂, x₂²: the (x₁², x₂²) entry is E[x₁²x₂²] = 1/8
        assert_relative_eq!(g[(0, 2)], 0.125, epsilon = 1e-15);
        assert_relative_eq!(g[(0, 0)], 0.375, epsilon = 1e-15);
        assert_relative_eq!(g[(1, 1)], 0.125, epsilon = 1e-15);
    }
}
