//! Homogeneous polynomials with coefficients over the graded-lex monomial
//! basis.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::monomial::{MonomialSet, MultiIndex};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Element of `P^d_t`: a homogeneous polynomial of degree `t` in `d`
/// variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRecord", into = "PolyRecord")]
pub struct HomogeneousPoly {
    monomials: Arc<MonomialSet>,
    coeffs: Vec<f64>,
}

/// Text record of a polynomial: dimension, degree, and the coefficient list
/// in graded-lex order (see [`super::monomial`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyRecord {
    pub d: usize,
    pub t: u32,
    pub coefficients: Vec<f64>,
}

impl From<HomogeneousPoly> for PolyRecord {
    fn from(p: HomogeneousPoly) -> Self {
        PolyRecord {
            d: p.dim(),
            t: p.degree(),
            coefficients: p.coeffs,
        }
    }
}

impl TryFrom<PolyRecord> for HomogeneousPoly {
    type Error = Error;

    fn try_from(r: PolyRecord) -> Result<Self> {
        if r.d == 0 {
            return Err(Error::Format("polynomial dimension must be positive".into()));
        }
        HomogeneousPoly::new(r.d, r.t, r.coefficients)
    }
}

/// `x_i^e` for every variable and every `e ≤ t`, row-major by variable.
pub(crate) fn power_table(x: &[f64], t: u32) -> Vec<f64> {
    let w = t as usize + 1;
    let mut pw = vec![1.0; x.len() * w];
    for (i, &xi) in x.iter().enumerate() {
        for e in 1..w {
            pw[i * w + e] = pw[i * w + e - 1] * xi;
        }
    }
    pw
}

#[inline]
pub(crate) fn monomial_value(pw: &[f64], w: usize, exps: &[u16]) -> f64 {
    let mut v = 1.0;
    for (i, &e) in exps.iter().enumerate() {
        if e != 0 {
            v *= pw[i * w + e as usize];
        }
    }
    v
}

impl HomogeneousPoly {
    pub fn new(d: usize, t: u32, coeffs: Vec<f64>) -> Result<Self> {
        let monomials = Arc::new(MonomialSet::new(t, d));
        if coeffs.len() != monomials.len() {
            return Err(Error::DimensionMismatch {
                expected: monomials.len(),
                got: coeffs.len(),
            });
        }
        Ok(HomogeneousPoly { monomials, coeffs })
    }

    pub(crate) fn from_parts(monomials: Arc<MonomialSet>, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(monomials.len(), coeffs.len());
        HomogeneousPoly { monomials, coeffs }
    }

    pub fn zero(d: usize, t: u32) -> Self {
        let monomials = Arc::new(MonomialSet::new(t, d));
        let n = monomials.len();
        HomogeneousPoly {
            monomials,
            coeffs: vec![0.0; n],
        }
    }

    /// `c · x^α`
    pub fn monomial(alpha: &MultiIndex, c: f64) -> Self {
        let mut p = Self::zero(alpha.dim(), alpha.degree());
        let i = p.monomials.index_of(alpha.exponents());
        p.coeffs[i] = c;
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` terms; repeated
    /// exponents accumulate.
    pub fn from_terms(d: usize, t: u32, terms: &[(MultiIndex, f64)]) -> Result<Self> {
        let mut p = Self::zero(d, t);
        for (alpha, c) in terms {
            if alpha.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: alpha.dim(),
                });
            }
            if alpha.degree() != t {
                return Err(Error::InvalidArgument(format!(
                    "term {alpha} has degree {} in a degree-{t} polynomial",
                    alpha.degree()
                )));
            }
            let i = p.monomials.index_of(alpha.exponents());
            p.coeffs[i] += c;
        }
        Ok(p)
    }

    /// The linear form `Σ aᵢ xᵢ`.
    pub fn linear(a: &[f64]) -> Self {
        let d = a.len();
        let mut p = Self::zero(d, 1);
        for (i, &ai) in a.iter().enumerate() {
            let idx = p.monomials.index_of(MultiIndex::unit(d, i).exponents());
            p.coeffs[idx] = ai;
        }
        p
    }

    /// `(x·x)^s`
    pub fn norm_sq_power(s: u32, d: usize) -> Self {
        let mut acc = Self::monomial(&MultiIndex::zeros(d), 1.0);
        if s == 0 {
            return acc;
        }
        let mut sq = Self::zero(d, 2);
        for i in 0..d {
            let mut e = vec![0u32; d];
            e[i] = 2;
            let idx = sq.monomials.index_of(&e);
            sq.coeffs[idx] = 1.0;
        }
        for _ in 0..s {
            acc = acc.mul(&sq);
        }
        acc
    }

    pub fn dim(&self) -> usize {
        self.monomials.dim()
    }

    pub fn degree(&self) -> u32 {
        self.monomials.degree()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn monomials(&self) -> &MonomialSet {
        &self.monomials
    }

    pub fn is_odd(&self) -> bool {
        self.degree() % 2 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.value(x))
    }

    /// Evaluation without the dimension check.
    pub fn value(&self, x: &[f64]) -> f64 {
        let w = self.degree() as usize + 1;
        let pw = power_table(x, self.degree());
        self.monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(e, &c)| c * monomial_value(&pw, w, e))
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        Ok(self.grad(x))
    }

    pub(crate) fn grad(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut g = vec![0.0; d];
        if self.degree() == 0 {
            return g;
        }
        let w = self.degree() as usize + 1;
        let pw = power_table(x, self.degree());
        let mut e = vec![0u16; d];
        for (exps, &c) in self.monomials.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            e.copy_from_slice(exps);
            for i in 0..d {
                let a = exps[i];
                if a == 0 {
                    continue;
                }
                e[i] = a - 1;
                g[i] += c * a as f64 * monomial_value(&pw, w, &e);
                e[i] = a;
            }
        }
        g
    }

    /// `∇ₒp(y) = ∇p(y) − ⟨y, ∇p(y)⟩ y` at a unit point.
    pub fn tangential_gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y.len())?;
        check_unit(y, Tolerances::DEFAULT.unit_norm)?;
        Ok(self.tangential_grad(y))
    }

    pub(crate) fn tangential_grad(&self, y: &[f64]) -> Vec<f64> {
        let mut g = self.grad(y);
        let radial: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
        for (gi, yi) in g.iter_mut().zip(y) {
            *gi -= radial * yi;
        }
        g
    }

    /// `∂p/∂xᵢ` as a polynomial of degree `t − 1` (the zero polynomial of
    /// degree 0 when `t = 0`).
    pub fn partial(&self, i: usize) -> HomogeneousPoly {
        let d = self.dim();
        let t = self.degree();
        if t == 0 {
            return Self::zero(d, 0);
        }
        let mut out = Self::zero(d, t - 1);
        let mut e = vec![0u16; d];
        for (exps, &c) in self.monomials.iter().zip(&self.coeffs) {
            if exps[i] == 0 || c == 0.0 {
                continue;
            }
            e.copy_from_slice(exps);
            e[i] -= 1;
            let idx = out.monomials.index_of(&e);
            out.coeffs[idx] += c * exps[i] as f64;
        }
        out
    }

    /// `Δp = Σᵢ ∂²p/∂xᵢ²`, of degree `t − 2` (zero of degree 0 when `t < 2`).
    pub fn laplacian(&self) -> HomogeneousPoly {
        let d = self.dim();
        if self.degree() < 2 {
            return Self::zero(d, 0);
        }
        let mut acc = Self::zero(d, self.degree() - 2);
        for i in 0..d {
            let second = self.partial(i).partial(i);
            for (a, b) in acc.coeffs.iter_mut().zip(&second.coeffs) {
                *a += b;
            }
        }
        acc
    }

    pub fn mul(&self, other: &HomogeneousPoly) -> HomogeneousPoly {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in product");
        let d = self.dim();
        let mut out = Self::zero(d, self.degree() + other.degree());
        let mut e = vec![0u16; d];
        for (ea, &ca) in self.monomials.iter().zip(&self.coeffs) {
            if ca == 0.0 {
                continue;
            }
            for (eb, &cb) in other.monomials.iter().zip(&other.coeffs) {
                if cb == 0.0 {
                    continue;
                }
                for i in 0..d {
                    e[i] = ea[i] + eb[i];
                }
                let idx = out.monomials.index_of(&e);
                out.coeffs[idx] += ca * cb;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> HomogeneousPoly {
        HomogeneousPoly {
            monomials: self.monomials.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s·other`; both must live in the same `P^d_t`.
    pub fn add_scaled(&self, other: &HomogeneousPoly, s: f64) -> Result<HomogeneousPoly> {
        if self.dim() != other.dim() || self.degree() != other.degree() {
            return Err(Error::InvalidArgument(format!(
                "cannot add P^{}_{} and P^{}_{}",
                self.dim(),
                self.degree(),
                other.dim(),
                other.degree()
            )));
        }
        Ok(HomogeneousPoly {
            monomials: self.monomials.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    /// Multiplies by `(x·x)^{(target − t)/2}`. The result agrees with `self`
    /// on the unit sphere.
    pub fn homogenize(&self, target: u32) -> Result<HomogeneousPoly> {
        let t = self.degree();
        if target < t || !(target - t).is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "cannot homogenize degree {t} to degree {target}"
            )));
        }
        if target == t {
            return Ok(self.clone());
        }
        Ok(self.mul(&Self::norm_sq_power((target - t) / 2, self.dim())))
    }

    /// The polynomial `w ↦ p(M w)` where `M` is `d × e` (row-major rows of
    /// length `e`).
    pub fn compose_linear(&self, rows: &[Vec<f64>]) -> Result<HomogeneousPoly> {
        self.check_dim(rows.len())?;
        let e = rows.first().map(Vec::len).unwrap_or(0);
        if e == 0 || rows.iter().any(|r| r.len() != e) {
            return Err(Error::InvalidArgument("ragged substitution matrix".into()));
        }
        let t = self.degree();
        let forms: Vec<HomogeneousPoly> = rows.iter().map(|r| Self::linear(r)).collect();
        // powers[i][a] = (row_i · w)^a
        let mut powers: Vec<Vec<HomogeneousPoly>> = Vec::with_capacity(rows.len());
        for form in &forms {
            let mut pw = vec![Self::monomial(&MultiIndex::zeros(e), 1.0)];
            for a in 1..=t as usize {
                pw.push(pw[a - 1].mul(form));
            }
            powers.push(pw);
        }
        let mut out = Self::zero(e, t);
        for (exps, &c) in self.monomials.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let mut term = Self::monomial(&MultiIndex::zeros(e), c);
            for (i, &a) in exps.iter().enumerate() {
                if a > 0 {
                    term = term.mul(&powers[i][a as usize]);
                }
            }
            for (o, v) in out.coeffs.iter_mut().zip(&term.coeffs) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Terms with nonzero coefficients.
    pub fn terms(&self) -> Vec<(MultiIndex, f64)> {
        self.monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(e, &c)| (MultiIndex(e.iter().map(|&v| v as u32).collect()), c))
            .collect()
    }
}

pub fn check_unit(y: &[f64], tol: f64) -> Result<()> {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol {
        return Err(Error::NonUnit { norm });
    }
    Ok(())
}
