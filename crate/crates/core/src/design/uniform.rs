//! Equal-weight odd designs through the gradient perturbation map
//! `zᵢ = (yᵢ + δ∇ₒp(yᵢ)) / ‖yᵢ + δ∇ₒp(yᵢ)‖`.
//!
//! The existence argument behind the map is topological, so the solver is
//! numerical: a damped chord iteration on the coefficients of `p`, always
//! re-applying the map to the original points, followed when that stalls
//! by Gauss-Newton steps directly on the points.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{min_separation, weighted_basis_means};
use crate::error::{Error, Result};
use crate::numeric::{norm, pairwise_sum_rows};
use crate::poly::{check_unit, dim_homogeneous, orthonormal_basis, sphere_norm, HomogeneousPoly, OrthonormalBasis};
use crate::rng::{self, Purpose};

/// `1/N_{2t,d}²`.
pub fn default_delta(t: u32, d: usize) -> Result<f64> {
    let n = dim_homogeneous(2 * t, d)? as f64;
    Ok(1.0 / (n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    /// Step of the perturbation map; `None` selects `1/N_{2t,d}²`.
    pub delta: Option<f64>,
    /// Damping of the coefficient update, in `(0, 1]`.
    pub damping: f64,
    pub max_iterations: usize,
    /// Per-degree residual accepted as converged.
    pub tolerance: f64,
    /// Iterations without halving the best residual before switching to
    /// point-space Gauss-Newton.
    pub stall_window: usize,
    pub max_point_iterations: usize,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            delta: None,
            damping: 0.5,
            max_iterations: 10_000,
            tolerance: 1e-10,
            stall_window: 25,
            max_point_iterations: 500,
        }
    }
}

impl PerturbConfig {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!("damping {} not in (0, 1]", self.damping)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidArgument(format!("step {d} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvePhase {
    /// The input already met the tolerance.
    Initial,
    FixedPoint,
    GaussNewton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolveReport {
    pub t: u32,
    pub d: usize,
    pub r: usize,
    /// `(odd degree, residual)` for every odd degree `≤ t`.
    pub residuals: Vec<(u32, f64)>,
    pub fixed_point_iterations: usize,
    pub point_iterations: usize,
    pub max_displacement: f64,
    pub separation_before: f64,
    pub separation_after: f64,
    pub converged: bool,
    pub finished_in: SolvePhase,
    pub delta: f64,
    pub delta_raised: bool,
    /// `‖p‖₂` of the final polynomial of the fixed-point phase.
    pub poly_norm: f64,
    /// Largest `‖∇p(yᵢ)‖` for that polynomial.
    pub max_gradient: f64,
    pub tolerance: f64,
}

impl DesignSolveReport {
    pub fn iterations(&self) -> usize {
        self.fixed_point_iterations + self.point_iterations
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidArgument("empty point set".into()));
    };
    let d = first.len();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        check_unit(p, 1e-12)?;
    }
    Ok(d)
}

/// Applies the perturbation map to every point.
pub fn perturb_map(y: &[Vec<f64>], p: &HomogeneousPoly, delta: f64) -> Result<Vec<Vec<f64>>> {
    let d = check_points(y)?;
    if d != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: d,
        });
    }
    Ok(y.par_iter().map(|yi| map_point(yi, &p.tangential_grad(yi), delta)).collect())
}

fn map_point(y: &[f64], tangent: &[f64], delta: f64) -> Vec<f64> {
    let mut z: Vec<f64> = y.iter().zip(tangent).map(|(a, g)| a + delta * g).collect();
    let n = norm(&z);
    z.iter_mut().for_each(|v| *v /= n);
    z
}

/// Equal-weight residuals `max_j |(1/r) Σᵢ p_j(zᵢ)|` over a sphere-orthonormal
/// basis of each odd degree `s ≤ t`.
pub fn design_residual(points: &[Vec<f64>], t: u32) -> Result<Vec<(u32, f64)>> {
    if t.is_multiple_of(2) {
        return Err(Error::EvenDegree(t));
    }
    let d = check_points(points)?;
    let mut out = Vec::new();
    for s in (1..=t).step_by(2) {
        let basis = orthonormal_basis(s, d)?;
        let worst = weighted_basis_means(points, None, &basis)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max);
        out.push((s, worst));
    }
    Ok(out)
}

/// `(p(z) − p(y), δ‖∇ₒp(y)‖²)` for the perturbation of a single point.
pub fn increment_check(p: &HomogeneousPoly, y: &[f64], delta: f64) -> Result<(f64, f64)> {
    check_unit(y, 1e-12)?;
    let pn = sphere_norm(p);
    if (pn - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("polynomial norm {pn} is not 1")));
    }
    let bound = default_delta(p.degree(), p.dim())?;
    if !(delta > 0.0 && delta <= bound * (1.0 + 1e-12)) {
        return Err(Error::StepOutOfRange { delta, bound });
    }
    let g = p.tangential_grad(y);
    let z = map_point(y, &g, delta);
    let g2: f64 = g.iter().map(|v| v * v).sum();
    Ok((p.value(&z) - p.value(y), delta * g2))
}

/// `(1/r) Σ basis(zᵢ)` and, optionally, `(1/r²) Σ TᵢᵀTᵢ` with `Tᵢ` the
/// tangential basis gradients at `zᵢ`.
fn residual_and_normal(z: &[Vec<f64>], basis: &OrthonormalBasis, with_normal: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let n = basis.len();
    let r = z.len() as f64;
    let width = if with_normal { n + n * n } else { n };
    let rows: Vec<Vec<f64>> = z
        .par_iter()
        .map(|zi| {
            let mut row = basis.eval_all(zi);
            if with_normal {
                let t = basis.tangential_gradients(zi);
                row.extend((t.transpose() * &t).iter());
            }
            row
        })
        .collect();
    let sums = pairwise_sum_rows(&rows, width);
    let rho = DVector::from_iterator(n, sums[..n].iter().map(|v| v / r));
    let normal = with_normal.then(|| DMatrix::from_column_slice(n, n, &sums[n..]) / (r * r));
    (rho, normal)
}

/// Tangential displacement `−(1/r) Tᵢ μ` of every point.
fn point_steps(z: &[Vec<f64>], basis: &OrthonormalBasis, mu: &DVector<f64>) -> Vec<Vec<f64>> {
    let r = z.len() as f64;
    z.par_iter()
        .map(|zi| {
            let u = basis.tangential_gradients(zi) * mu;
            u.iter().map(|v| -v / r).collect()
        })
        .collect()
}

fn solve_spd(m: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    match m.clone().cholesky() {
        Some(c) => Some(c.solve(b)),
        None => m.clone().lu().solve(b),
    }
}

/// Moves `y` to an equal-weight design for every odd degree `≤ t`.
///
/// Non-convergence is not an error: the best iterate is returned with
/// `converged = false`.
pub fn solve_uniform_design(
    y: &[Vec<f64>],
    t: u32,
    config: &PerturbConfig,
) -> Result<(Vec<Vec<f64>>, DesignSolveReport)> {
    config.validate()?;
    if t.is_multiple_of(2) {
        return Err(Error::EvenDegree(t));
    }
    let d = check_points(y)?;
    let r = y.len();
    let paper_delta = default_delta(t, d)?;
    let delta = config.delta.unwrap_or(paper_delta);
    let delta_raised = delta > paper_delta * (1.0 + 1e-12);

    // degree t on the sphere contains every lower odd degree via ‖x‖² powers
    let basis = orthonormal_basis(t, d)?;
    let n = basis.len();
    let separation_before = if r >= 2 { min_separation(y)? } else { 0.0 };

    let (rho0, jac_normal) = residual_and_normal(y, &basis, true);
    // an input that already meets the tolerance is returned as is, even
    // when r is below the floor that moving the points would require
    let floor = dim_homogeneous(2 * t, d)?;
    if rho0.norm() > config.tolerance {
        if (r as u64) < floor {
            return Err(Error::TooFewPoints {
                needed: floor as usize,
                got: r,
            });
        }
        if (r as f64) < (floor as f64).powi(5) {
            warn!(
                "r = {r} is below the N_(2t,d)^5 = {:.3e} scale of the existence guarantee",
                (floor as f64).powi(5)
            );
        }
    }
    let mut rho = rho0;
    let mut z = y.to_vec();
    let mut coords = DVector::<f64>::zeros(n);
    let mut best = (rho.norm(), z.clone(), coords.clone());
    let mut last_improvement = 0usize;
    let mut fixed_point_iterations = 0;
    let mut phase = SolvePhase::Initial;

    // chord matrix: derivative of the residual in p at p = 0
    let chord = jac_normal.expect("requested") * (delta * r as f64);
    let chord_chol = chord.clone().cholesky();

    if rho.norm() > config.tolerance {
        phase = SolvePhase::FixedPoint;
        let Some(chol) = chord_chol else {
            return Err(Error::Degenerate("tangential gradients at the start points are rank deficient".into()));
        };
        let mut since_halving_ref = best.0;
        for it in 1..=config.max_iterations {
            fixed_point_iterations = it;
            let step = chol.solve(&rho);
            coords -= step * config.damping;
            let p = basis.combine(coords.as_slice());
            z = y.par_iter().map(|yi| map_point(yi, &p.tangential_grad(yi), delta)).collect();
            rho = residual_and_normal(&z, &basis, false).0;
            let res = rho.norm();
            if !res.is_finite() {
                break;
            }
            if res < best.0 {
                best = (res, z.clone(), coords.clone());
            }
            if res <= config.tolerance {
                break;
            }
            if best.0 <= 0.5 * since_halving_ref {
                since_halving_ref = best.0;
                last_improvement = it;
            } else if it - last_improvement >= config.stall_window {
                debug!("fixed-point phase stalled at residual {:.3e} after {it} iterations", best.0);
                break;
            }
        }
    }
    let (mut best_res, mut z, coords) = best;
    let poly = basis.combine(coords.as_slice());
    let poly_norm = coords.norm();
    let max_gradient = y
        .iter()
        .map(|yi| norm(&poly.grad(yi)))
        .fold(0.0, f64::max);

    let mut point_iterations = 0;
    if best_res > config.tolerance {
        phase = SolvePhase::GaussNewton;
        let (mut rho, _) = residual_and_normal(&z, &basis, false);
        for it in 1..=config.max_point_iterations {
            point_iterations = it;
            let (_, normal) = residual_and_normal(&z, &basis, true);
            let Some(mu) = solve_spd(&normal.expect("requested"), &rho) else {
                break;
            };
            let u = point_steps(&z, &basis, &mu);
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<Vec<f64>> = z
                    .par_iter()
                    .zip(&u)
                    .map(|(zi, ui)| {
                        let mut x: Vec<f64> = zi.iter().zip(ui).map(|(a, b)| a + step * b).collect();
                        let nn = norm(&x);
                        x.iter_mut().for_each(|v| *v /= nn);
                        x
                    })
                    .collect();
                let trial_rho = residual_and_normal(&trial, &basis, false).0;
                if trial_rho.norm() < best_res {
                    z = trial;
                    rho = trial_rho;
                    best_res = rho.norm();
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted || best_res <= config.tolerance {
                break;
            }
        }
    }

    let residuals = design_residual(&z, t)?;
    let converged = residuals.iter().all(|&(_, v)| v <= config.tolerance);
    let max_displacement = z
        .iter()
        .zip(y)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let separation_after = if r >= 2 { min_separation(&z)? } else { 0.0 };
    let report = DesignSolveReport {
        t,
        d,
        r,
        residuals,
        fixed_point_iterations,
        point_iterations,
        max_displacement,
        separation_before,
        separation_after,
        converged,
        finished_in: phase,
        delta,
        delta_raised,
        poly_norm,
        max_gradient,
        tolerance: config.tolerance,
    };
    Ok((z, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub r: usize,
    pub t: u32,
    pub d: usize,
    pub eta: f64,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// Binomial standard error of the failure rate.
    pub standard_error: f64,
    /// `N_{t,d}/(r η²)`.
    pub bound: f64,
}

/// Fraction of `trials` uniform samples of size `r` for which some
/// unit-norm `p ∈ P^d_t` has `|(1/r)Σ p(xᵢ) − E p| > η`.
///
/// The supremum over the unit ball equals the Euclidean norm of the
/// centred vector of orthonormal-basis means.
pub fn concentration_check(r: usize, t: u32, d: usize, eta: f64, trials: usize, seed: u64) -> Result<ConcentrationReport> {
    if r == 0 || trials == 0 || !(eta > 0.0) {
        return Err(Error::InvalidArgument("need r ≥ 1, trials ≥ 1 and η > 0".into()));
    }
    let basis = orthonormal_basis(t, d)?;
    let n = basis.len();
    // E[p_j] = ⟨p_j, 1⟩ and 1 = ‖x‖^t on the sphere
    let centre: Vec<f64> = if t.is_multiple_of(2) {
        basis.expand(&HomogeneousPoly::norm_sq_power(t / 2, d))?
    } else {
        vec![0.0; n]
    };
    let failures = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let pts = rng::sphere_points(rng::child_seed(seed, trial as u64), Purpose::Trials, r, d);
            let means = weighted_basis_means(&pts, None, &basis);
            let dev: f64 = means.iter().zip(&centre).map(|(m, c)| (m - c) * (m - c)).sum::<f64>().sqrt();
            usize::from(dev > eta)
        })
        .sum::<usize>();
    let rate = failures as f64 / trials as f64;
    Ok(ConcentrationReport {
        r,
        t,
        d,
        eta,
        trials,
        failures,
        failure_rate: rate,
        standard_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        bound: n as f64 / (r as f64 * eta * eta),
    })
}
