//! Weight LP over odd-monomial constraints, with infeasibility
//! certificates.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::simplex::{basis_matrix, phase_one};
use super::WeightedDesign;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numeric::{norm, pairwise_sum};
use crate::poly::{check_unit, odd_monomials_below, orthonormal_basis, MonomialSet, MultiIndex};

/// Constraint matrix of the weight LP: an all-ones row followed by every
/// odd monomial of degree `< k` evaluated at each point (one column per
/// point).
pub fn odd_constraint_matrix(points: &[Vec<f64>], k: u32) -> Result<DMatrix<f64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("degree bound k={k} must be at least 2")));
    }
    let Some(first) = points.first() else {
        return Err(Error::InvalidArgument("empty point set".into()));
    };
    let d = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    Ok(constraint_rows(points, &odd_monomials_below(k, d)))
}

/// Odd monomials of the largest odd degree `< k`. On the sphere every lower
/// odd monomial is a combination of these (multiply by `‖x‖²`), so they span
/// the same constraints with full row rank.
fn top_odd_monomials(k: u32, d: usize) -> Vec<MultiIndex> {
    let top = if k.is_multiple_of(2) { k - 1 } else { k - 2 };
    MonomialSet::new(top, d).to_multi_indices()
}

fn constraint_rows(points: &[Vec<f64>], monos: &[MultiIndex]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(monos.len() + 1, points.len());
    for (j, p) in points.iter().enumerate() {
        a[(0, j)] = 1.0;
        for (i, m) in monos.iter().enumerate() {
            a[(i + 1, j)] = m.eval(p);
        }
    }
    a
}

/// An odd polynomial of degree `< k` that is strictly positive on every
/// point, witnessing that no weighting cancels all odd moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub dim: usize,
    pub k: u32,
    pub monomials: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    /// `minᵢ q(vᵢ)`.
    pub margin: f64,
}

impl FarkasCertificate {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.monomials
            .iter()
            .zip(&self.coefficients)
            .map(|(m, c)| c * m.eval(x))
            .sum()
    }

    /// Recomputes the margin on a point set.
    pub fn margin_on(&self, points: &[Vec<f64>]) -> f64 {
        points.iter().map(|p| self.value(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn coefficient_norm(&self) -> f64 {
        norm(&self.coefficients)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WeightOutcome {
    Feasible { design: WeightedDesign, lp_residual: f64 },
    Infeasible { certificate: FarkasCertificate },
}

impl WeightOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, WeightOutcome::Feasible { .. })
    }
}

/// Finds weights making every odd moment of degree `< k` vanish, or a
/// certificate that none exist.
pub fn solve_weights(points: &[Vec<f64>], k: u32) -> Result<WeightOutcome> {
    solve_weights_with(points, k, &Tolerances::DEFAULT)
}

pub fn solve_weights_with(points: &[Vec<f64>], k: u32, tol: &Tolerances) -> Result<WeightOutcome> {
    for p in points {
        check_unit(p, tol.unit_norm)?;
    }
    // validates k and the point dimensions
    odd_constraint_matrix(&points[..points.len().min(1)], k)?;
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    let monomials = top_odd_monomials(k, d);
    let a = constraint_rows(points, &monomials);
    let (m, n) = a.shape();
    let mut b = DVector::zeros(m);
    b[0] = 1.0;
    let res = phase_one(&a, &b, tol.pivot)?;
    log::debug!("phase 1 finished after {} pivots with value {:e}", res.pivots, res.value);
    let negate = vec![false; m];
    let bm = basis_matrix(&a, &res.basis, &negate);
    let lu = bm.clone().lu();

    if res.value <= tol.lp_feasibility {
        let xb = lu
            .solve(&b)
            .ok_or_else(|| Error::Degenerate("singular final basis".into()))?;
        let mut w = vec![0.0; n];
        for (row, &j) in res.basis.iter().enumerate() {
            if j < n {
                w[j] = xb[row];
            }
        }
        if let Some(bad) = w.iter().find(|&&x| x < -tol.lp_feasibility) {
            return Err(Error::Degenerate(format!("polished weight {bad} is negative")));
        }
        w.iter_mut().for_each(|x| *x = x.max(0.0));
        let total = pairwise_sum(&w);
        w.iter_mut().for_each(|x| *x /= total);
        let resid = &a * DVector::from_column_slice(&w) - &b;
        let lp_residual = resid.amax();
        if lp_residual > tol.lp_feasibility {
            return Err(Error::Degenerate(format!(
                "feasible basis but residual {lp_residual:e}"
            )));
        }
        let design = WeightedDesign::with_tolerances(points.to_vec(), w, tol)?;
        return Ok(WeightOutcome::Feasible {
            design,
            lp_residual,
        });
    }

    // phase-1 duals: Bᵀy = c_B with unit cost on artificials
    let cb = DVector::from_iterator(m, res.basis.iter().map(|&j| if j >= n { 1.0 } else { 0.0 }));
    let y = bm
        .transpose()
        .lu()
        .solve(&cb)
        .ok_or_else(|| Error::Degenerate("singular final basis".into()))?;
    let lead = y[0];
    if !(lead > 0.0) {
        return Err(Error::Degenerate(format!(
            "dual multiplier of the weight-sum row is {lead}"
        )));
    }
    let coefficients: Vec<f64> = (1..m).map(|i| -y[i] / lead).collect();
    let mut cert = FarkasCertificate {
        dim: points[0].len(),
        k,
        monomials,
        coefficients,
        margin: 0.0,
    };
    cert.margin = cert.margin_on(points);
    if !certificate_is_sound(&cert, tol) {
        // A degenerate final basis can produce a valid but badly scaled
        // dual; the maximum-margin separator is the well-scaled alternative.
        let alt = FarkasCertificate {
            coefficients: max_margin_certificate(&a),
            ..cert.clone()
        };
        let alt = FarkasCertificate { margin: alt.margin_on(points), ..alt };
        if certificate_is_sound(&alt, tol) {
            cert = alt;
        }
    }
    if certificate_is_sound(&cert, tol) {
        Ok(WeightOutcome::Infeasible { certificate: cert })
    } else {
        Err(Error::Degenerate(format!(
            "phase-1 value {:e} but certificate margin only {:e} at coefficient norm {:e}",
            res.value,
            cert.margin,
            cert.coefficient_norm()
        )))
    }
}

fn certificate_is_sound(cert: &FarkasCertificate, tol: &Tolerances) -> bool {
    cert.margin > tol.certificate_margin * cert.coefficient_norm().max(f64::MIN_POSITIVE)
}

/// Minimum-norm `q` with `q(vᵢ) ≥ 1` at every point, by coordinate ascent
/// on the dual `max Σα − ½‖Σ αᵢ φ(vᵢ)‖²`, `α ≥ 0`, where `φ(vᵢ)` is the
/// column of monomial values.
fn max_margin_certificate(a: &DMatrix<f64>) -> Vec<f64> {
    let feats = a.rows(1, a.nrows() - 1);
    let (m, n) = feats.shape();
    let sq: Vec<f64> = (0..n).map(|j| feats.column(j).norm_squared()).collect();
    let mut alpha = vec![0.0; n];
    let mut q = DVector::<f64>::zeros(m);
    for _ in 0..20_000 {
        let mut change: f64 = 0.0;
        for j in 0..n {
            if sq[j] == 0.0 {
                continue;
            }
            let gap = 1.0 - feats.column(j).dot(&q);
            let next = (alpha[j] + gap / sq[j]).max(0.0);
            let delta = next - alpha[j];
            if delta != 0.0 {
                q.axpy(delta, &feats.column(j), 1.0);
                alpha[j] = next;
                change = change.max(delta.abs() * sq[j].sqrt());
            }
        }
        if change <= 1e-12 * q.norm().max(1.0) {
            break;
        }
    }
    q.iter().copied().collect()
}

/// Residuals `max_j |Σ w_ℓ p_j(v_ℓ)|` over a sphere-orthonormal basis of
/// each odd degree `s < k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedResidualReport {
    pub k: u32,
    /// `(degree, residual)` pairs.
    pub per_degree: Vec<(u32, f64)>,
    pub max: f64,
}

impl WeightedResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max <= tol
    }
}

pub fn verify_weighted_design(design: &WeightedDesign, k: u32) -> Result<WeightedResidualReport> {
    let mut per_degree = Vec::new();
    for s in (1..k).step_by(2) {
        let basis = orthonormal_basis(s, design.dim())?;
        let worst = design
            .basis_means(&basis)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max);
        per_degree.push((s, worst));
    }
    let max = per_degree.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    Ok(WeightedResidualReport { k, per_degree, max })
}

/// `k` points at angles `2πi/k` on the unit circle with equal weights.
pub fn evenly_spaced_circle(k: usize) -> Result<WeightedDesign> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "circle design needs an odd count of at least 3, got {k}"
        )));
    }
    let points = (0..k)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / k as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    WeightedDesign::uniform(points)
}
