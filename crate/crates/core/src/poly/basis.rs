//! Sphere-orthonormal bases of `P^d_t`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::homogeneous::{monomial_value, power_table, HomogeneousPoly};
use super::moments::gram_of;
use super::monomial::MonomialSet;
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Orthonormal basis `p₁..p_N` of `P^d_t` under the sphere inner product.
///
/// The basis is `G^{−1/2}` applied to the monomials, `G` the monomial Gram
/// matrix: column `j` of [`OrthonormalBasis::coefficients`] holds the
/// graded-lex coefficients of `pⱼ`. The symmetric square root makes the
/// basis independent of eigenvector sign choices.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    monomials: Arc<MonomialSet>,
    gram: DMatrix<f64>,
    coeffs: DMatrix<f64>,
    condition: f64,
}

pub fn orthonormal_basis(t: u32, d: usize) -> Result<OrthonormalBasis> {
    OrthonormalBasis::new(t, d, Tolerances::DEFAULT.gram_condition)
}

impl OrthonormalBasis {
    pub fn new(t: u32, d: usize, condition_limit: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let monomials = Arc::new(MonomialSet::new(t, d));
        let gram = gram_of(&monomials);
        let eig = SymmetricEigen::new(gram.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition <= condition_limit) {
            return Err(Error::IllConditioned {
                condition,
                limit: condition_limit,
            });
        }
        let inv_sqrt = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()),
        );
        let q = &eig.eigenvectors;
        let coeffs = q * DMatrix::from_diagonal(&inv_sqrt) * q.transpose();
        Ok(OrthonormalBasis {
            monomials,
            gram,
            coeffs,
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.monomials.dim()
    }

    pub fn degree(&self) -> u32 {
        self.monomials.degree()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `N × N`, column `j` = monomial coefficients of `pⱼ`.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn monomials(&self) -> &MonomialSet {
        &self.monomials
    }

    pub fn poly(&self, j: usize) -> HomogeneousPoly {
        HomogeneousPoly::from_parts(self.monomials.clone(), self.coeffs.column(j).iter().copied().collect())
    }

    pub fn polys(&self) -> Vec<HomogeneousPoly> {
        (0..self.len()).map(|j| self.poly(j)).collect()
    }

    /// Polynomial `Σ λⱼ pⱼ`.
    pub fn combine(&self, coords: &[f64]) -> HomogeneousPoly {
        let c = &self.coeffs * DVector::from_column_slice(coords);
        HomogeneousPoly::from_parts(self.monomials.clone(), c.iter().copied().collect())
    }

    /// Coordinates `⟨pⱼ, p⟩` of a polynomial in this basis.
    pub fn expand(&self, p: &HomogeneousPoly) -> Result<Vec<f64>> {
        if p.dim() != self.dim() || p.degree() != self.degree() {
            return Err(Error::InvalidArgument(
                "polynomial is not in the span of this basis".into(),
            ));
        }
        let gp = &self.gram * DVector::from_column_slice(p.coeffs());
        Ok((self.coeffs.transpose() * gp).iter().copied().collect())
    }

    /// Values of the monomials at `x`.
    pub fn monomial_values(&self, x: &[f64]) -> Vec<f64> {
        let t = self.degree();
        let w = t as usize + 1;
        let pw = power_table(x, t);
        self.monomials.iter().map(|e| monomial_value(&pw, w, e)).collect()
    }

    /// `(p₁(x), …, p_N(x))`.
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let m = DVector::from_vec(self.monomial_values(x));
        (self.coeffs.transpose() * m).iter().copied().collect()
    }

    /// Gradients of every basis polynomial at `x`, as a `d × N` matrix.
    pub fn gradients(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.len();
        let t = self.degree();
        let mut mono_grad = DMatrix::zeros(d, n);
        if t > 0 {
            let w = t as usize + 1;
            let pw = power_table(x, t);
            let mut e = vec![0u16; d];
            for (k, exps) in self.monomials.iter().enumerate() {
                e.copy_from_slice(exps);
                for i in 0..d {
                    if exps[i] == 0 {
                        continue;
                    }
                    e[i] -= 1;
                    mono_grad[(i, k)] = exps[i] as f64 * monomial_value(&pw, w, &e);
                    e[i] += 1;
                }
            }
        }
        mono_grad * &self.coeffs
    }

    /// Tangential gradients `∇ₒpⱼ(y)` at a unit point, as a `d × N` matrix.
    pub fn tangential_gradients(&self, y: &[f64]) -> DMatrix<f64> {
        let g = self.gradients(y);
        let yv = DVector::from_column_slice(y);
        let radial = yv.transpose() * &g; // 1 × N
        g - yv * radial
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::moments::sphere_inner;
    use approx::assert_relative_eq;

    #[test]
    fn linear_bases() {
        let b = orthonormal_basis(1, 2).unwrap();
        assert_relative_eq!(
            b.coefficients().clone(),
            DMatrix::identity(2, 2) * 2f64.sqrt(),
            epsilon = 1e-14
        );
        let b = orthonormal_basis(1, 3).unwrap();
        assert_relative_eq!(
            b.coefficients().clone(),
            DMatrix::identity(3, 3) * 3f64.sqrt(),
            epsilon = 1e-14
        );
        let b = orthonormal_basis(0, 4).unwrap();
        assert_eq!(b.len(), 1);
        assert_relative_eq!(b.coefficients()[(0, 0)], 1.0);
    }

    #[test]
    fn bases_are_orthonormal() {
        for (t, d) in [(2, 2), (3, 3), (4, 3), (5, 4)] {
            let b = orthonormal_basis(t, d).unwrap();
            let polys = b.polys();
            for i in 0..polys.len() {
                for j in 0..polys.len() {
                    let ip = sphere_inner(&polys[i], &polys[j]).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-10, "t={t} d={d} ({i},{j}) {ip}");
                }
            }
        }
    }

    #[test]
    fn tangential_gradients_match_polynomial_route() {
        let b = orthonormal_basis(3, 3).unwrap();
        let y = [0.48, -0.6, 0.64];
        let tg = b.tangential_gradients(&y);
        for j in 0..b.len() {
            let direct = b.poly(j).tangential_gradient(&y).unwrap();
            for i in 0..3 {
                assert_relative_eq!(tg[(i, j)], direct[i], epsilon = 1e-12);
            }
        }
    }
}
