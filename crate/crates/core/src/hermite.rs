//! Gaussian-side machinery: normalized Hermite polynomials, the Hermite
//! coefficients of `sign`, and correlations `E[p(z) sign(vᵀz)]` under
//! `N(0, I)`.

use std::f64::consts::PI;

use crate::design::WeightedDesign;
use crate::error::{Error, Result};
use crate::numeric::{double_factorial, factorial};
use crate::poly::{check_unit, HomogeneousPoly, MonomialSet, MultiIndex};

/// Normalized probabilists' Hermite polynomial `h_n(x) = He_n(x)/√(n!)`.
pub fn hermite_1d(n: u32, x: f64) -> f64 {
    // recurrence directly on the normalized family
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_0(x), …, h_max(x)`.
pub fn hermite_values(max: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(1.0);
    if max >= 1 {
        out.push(x);
    }
    for k in 1..max as usize {
        let kf = k as f64;
        let next = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
        out.push(next);
    }
    out
}

/// Monomial coefficients `[a₀, …, a_n]` of the normalized `h_n`.
pub fn hermite_coefficients(n: u32) -> Vec<f64> {
    let n = n as usize;
    let mut prev: Vec<f64> = vec![];
    let mut cur = vec![1.0];
    for k in 0..n {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= kf.sqrt() * c;
        }
        let s = (kf + 1.0).sqrt();
        next.iter_mut().for_each(|c| *c /= s);
        prev = cur;
        cur = next;
    }
    cur
}

/// `E_{x∼N(0,1)}[sign(x) h_k(x)]`.
pub fn sign_hermite_coeff(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        return 0.0;
    }
    let mut c = (2.0 / PI).sqrt();
    let mut j = 1;
    while j < k {
        let jf = j as f64;
        c *= -jf / ((jf + 1.0) * (jf + 2.0)).sqrt();
        j += 2;
    }
    c
}

/// Coefficients `ĉ_0 … ĉ_K` of `sign` in the normalized Hermite basis.
#[derive(Debug, Clone)]
pub struct HermiteCoeffTable {
    coeffs: Vec<f64>,
}

impl HermiteCoeffTable {
    pub fn new(max_degree: u32) -> Self {
        HermiteCoeffTable {
            coeffs: (0..=max_degree).map(sign_hermite_coeff).collect(),
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn get(&self, k: u32) -> f64 {
        self.coeffs[k as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// `Σ_{k≤K} ĉ_k²` for every `K`.
    pub fn energy_partial_sums(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c * c;
                Some(*acc)
            })
            .collect()
    }
}

/// `E_{z∼N(0,I)}[z^α]`.
pub fn gaussian_monomial_moment(alpha: &MultiIndex) -> f64 {
    alpha
        .exponents()
        .iter()
        .map(|&a| gaussian_moment_1d(a))
        .product()
}

fn gaussian_moment_1d(a: u32) -> f64 {
    if a % 2 == 1 {
        0.0
    } else {
        double_factorial(a as i64 - 1)
    }
}

/// `E_{x∼N(0,1)}[xⁿ sign(x)] = E|x|ⁿ` for odd `n`, zero for even `n`.
fn signed_moment_1d(n: u32) -> f64 {
    if n.is_multiple_of(2) {
        0.0
    } else {
        (2.0 / PI).sqrt() * double_factorial(n as i64 - 1)
    }
}

/// Householder reflection `R` (symmetric, orthogonal) with `R v = e₁`.
fn reflection_to_first_axis(v: &[f64]) -> Vec<Vec<f64>> {
    let m = v.len();
    let mut u = v.to_vec();
    u[0] -= 1.0;
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let mut r = vec![vec![0.0; m]; m];
    for i in 0..m {
        r[i][i] = 1.0;
    }
    if uu > 1e-30 {
        for i in 0..m {
            for j in 0..m {
                r[i][j] -= 2.0 * u[i] * u[j] / uu;
            }
        }
    }
    r
}

/// `E_{z∼N(0,I)}[p(z) sign(vᵀz)]` for a unit vector `v`.
///
/// The Gaussian is rotated so that `v` becomes the first axis; the
/// expectation then factors into one-dimensional absolute moments along
/// `v` and ordinary Gaussian moments orthogonal to it.
pub fn gaussian_corr_sign(p: &HomogeneousPoly, v: &[f64]) -> Result<f64> {
    if v.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: v.len(),
        });
    }
    check_unit(v, 1e-12)?;
    if p.degree().is_multiple_of(2) {
        return Ok(0.0);
    }
    let rotated = p.compose_linear(&reflection_to_first_axis(v))?;
    let mut acc = 0.0;
    for (exps, &c) in rotated.monomials().iter().zip(rotated.coeffs()) {
        if c == 0.0 {
            continue;
        }
        let mut term = c * signed_moment_1d(exps[0] as u32);
        for &a in &exps[1..] {
            if term == 0.0 {
                break;
            }
            term *= gaussian_moment_1d(a as u32);
        }
        acc += term;
    }
    Ok(acc)
}

/// Coefficient of `He_k` in the expansion of `xⁿ`.
fn power_in_hermite(n: u32, k: u32) -> f64 {
    if k > n || (n - k) % 2 == 1 {
        return 0.0;
    }
    let j = (n - k) / 2;
    factorial(n) / (factorial(k) * factorial(j) * 2f64.powi(j as i32))
}

/// The polynomial `q` with `q(v) = E_{z∼N(0,I)}[p(z) sign(vᵀz)]` for unit `v`.
///
/// Each monomial of `p` is expanded into products of Hermite polynomials;
/// the product `H_J` correlates with `sign(vᵀz)` as
/// `ĉ_{|J|} √(|J|!/J!) v^J`. Lower-degree terms are lifted to degree
/// `deg p` with powers of `‖v‖²`, which equal one on the sphere. Even `p`
/// yields the zero polynomial.
pub fn corr_polynomial_in_v(p: &HomogeneousPoly) -> HomogeneousPoly {
    let d = p.dim();
    let t = p.degree();
    let mut out = HomogeneousPoly::zero(d, t);
    if t.is_multiple_of(2) {
        return out;
    }
    // by lower degree s (same parity as t), coefficients over MonomialSet(s)
    let mut parts: Vec<Vec<f64>> = (0..=t)
        .map(|s| {
            if s % 2 == 1 {
                vec![0.0; MonomialSet::new(s, d).len()]
            } else {
                vec![]
            }
        })
        .collect();
    let sets: Vec<MonomialSet> = (0..=t).map(|s| MonomialSet::new(s, d)).collect();
    let mut k = vec![0u32; d];
    for (alpha, &c) in p.monomials().iter().zip(p.coeffs()) {
        if c == 0.0 {
            continue;
        }
        // enumerate k ≤ α componentwise with αᵢ − kᵢ even
        k.iter_mut().zip(alpha).for_each(|(k, &a)| *k = a as u32 % 2);
        loop {
            let deg: u32 = k.iter().sum();
            let mut w = c * sign_hermite_coeff(deg) * factorial(deg).sqrt();
            if w != 0.0 {
                for (&a, &ki) in alpha.iter().zip(&k) {
                    w *= power_in_hermite(a as u32, ki);
                }
                let idx = sets[deg as usize].index_of(&k[..]);
                parts[deg as usize][idx] += w;
            }
            // next k: odometer stepping by 2
            let mut i = 0;
            loop {
                if i == d {
                    break;
                }
                if k[i] + 2 <= alpha[i] as u32 {
                    k[i] += 2;
                    break;
                }
                k[i] = alpha[i] as u32 % 2;
                i += 1;
            }
            if i == d {
                break;
            }
        }
    }
    for s in (1..=t).step_by(2) {
        let part = HomogeneousPoly::new(d, s, std::mem::take(&mut parts[s as usize]))
            .expect("sizes match");
        if part.is_zero() {
            continue;
        }
        let lifted = part.homogenize(t).expect("same parity");
        out = out.add_scaled(&lifted, 1.0).expect("same space");
    }
    out
}

/// `E[sign(vᵀz) H_J(z)] = ĉ_{|J|} √(|J|!/J!) v^J` for unit `v`.
pub fn hermite_sign_correlation(j: &MultiIndex, v: &[f64]) -> f64 {
    let deg = j.degree();
    let c = sign_hermite_coeff(deg);
    if c == 0.0 {
        return 0.0;
    }
    c * (factorial(deg) / j.factorial()).sqrt() * j.eval(v)
}

/// Homogeneous components of the multivariate Hermite polynomial
/// `H_J(z) = ∏ h_{Jᵢ}(zᵢ)`, indexed by degree (entries of the wrong parity
/// are zero polynomials).
pub fn hermite_product_parts(j: &MultiIndex) -> Vec<HomogeneousPoly> {
    let d = j.dim();
    let top = j.degree();
    let coeffs: Vec<Vec<f64>> = j.exponents().iter().map(|&n| hermite_coefficients(n)).collect();
    let mut parts: Vec<HomogeneousPoly> = (0..=top).map(|s| HomogeneousPoly::zero(d, s)).collect();
    let mut e: Vec<u32> = j.exponents().to_vec();
    loop {
        let c: f64 = e.iter().zip(&coeffs).map(|(&ei, ci)| ci[ei as usize]).product();
        if c != 0.0 {
            let deg: u32 = e.iter().sum();
            let idx = parts[deg as usize].monomials().index_of(&e[..]);
            parts[deg as usize].coeffs_mut()[idx] += c;
        }
        let mut i = 0;
        while i < d {
            if e[i] >= 2 {
                e[i] -= 2;
                break;
            }
            e[i] = j.exponents()[i];
            i += 1;
        }
        if i == d {
            break;
        }
    }
    parts
}

/// Largest `|E_{z∼N(0,I)}[g(z) H_J(z)]|` over Hermite products `H_J` with
/// odd `|J| < k`, where `g(z) = Σ w_ℓ sign(v_ℓᵀz)`.
///
/// The `H_J` with odd `|J| < k` form an orthonormal basis of the odd
/// polynomials of degree below `k` in `L²(N(0, I))`. Each correlation is
/// computed from the homogeneous parts of `H_J` through
/// [`corr_polynomial_in_v`] evaluated at the design points.
pub fn mixture_gaussian_residual(design: &WeightedDesign, k: u32) -> f64 {
    per_degree_gaussian_residual(design, k)
        .into_iter()
        .map(|(_, r)| r)
        .fold(0.0, f64::max)
}

/// As [`mixture_gaussian_residual`], split by odd Hermite degree `s < k`.
pub fn per_degree_gaussian_residual(design: &WeightedDesign, k: u32) -> Vec<(u32, f64)> {
    let m = design.dim();
    let mut out = Vec::new();
    for s in (1..k).step_by(2) {
        let mut worst: f64 = 0.0;
        for j in MonomialSet::new(s, m).to_multi_indices() {
            let corr_parts: Vec<HomogeneousPoly> = hermite_product_parts(&j)
                .iter()
                .filter(|p| p.is_odd() && !p.is_zero())
                .map(corr_polynomial_in_v)
                .collect();
            let value: f64 = design
                .points()
                .iter()
                .zip(design.weights())
                .map(|(v, w)| w * corr_parts.iter().map(|q| q.value(v)).sum::<f64>())
                .sum();
            worst = worst.max(value.abs());
        }
        out.push((s, worst));
    }
    out
}

/// Exact `E[g(z) H_J(z)]` for a weighted set of unit directions.
pub fn design_hermite_correlation(points: &[Vec<f64>], weights: &[f64], j: &MultiIndex) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(v, w)| w * hermite_sign_correlation(j, v))
        .sum()
}
