//! Point sets on the sphere whose (weighted) averages of odd low-degree
//! polynomials vanish.

mod simplex;
pub mod uniform;
pub mod weighted;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numeric::{norm, pairwise_sum, pairwise_sum_rows};
use crate::poly::{MultiIndex, OrthonormalBasis};

pub use uniform::{
    concentration_check, default_delta, design_residual, increment_check, perturb_map, solve_uniform_design,
    ConcentrationReport, DesignSolveReport, PerturbConfig, SolvePhase,
};
pub use weighted::{
    evenly_spaced_circle, odd_constraint_matrix, solve_weights, verify_weighted_design,
    FarkasCertificate, WeightOutcome, WeightedResidualReport,
};

/// Unit points on `S^{d−1}` with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DesignRecord", into = "DesignRecord")]
pub struct WeightedDesign {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// On-disk layout of a design: points are stored row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignRecord {
    pub d: usize,
    pub r: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl From<WeightedDesign> for DesignRecord {
    fn from(w: WeightedDesign) -> Self {
        DesignRecord {
            d: w.dim,
            r: w.points.len(),
            points: w.points.concat(),
            weights: w.weights,
        }
    }
}

impl TryFrom<DesignRecord> for WeightedDesign {
    type Error = Error;

    fn try_from(rec: DesignRecord) -> Result<Self> {
        if rec.d == 0 || rec.points.len() != rec.d * rec.r {
            return Err(Error::InvalidDesign(format!(
                "expected {} coordinates for r={} points in d={}, found {}",
                rec.d * rec.r,
                rec.r,
                rec.d,
                rec.points.len()
            )));
        }
        if rec.weights.len() != rec.r {
            return Err(Error::InvalidDesign(format!(
                "expected {} weights, found {}",
                rec.r,
                rec.weights.len()
            )));
        }
        let points = rec.points.chunks(rec.d).map(<[f64]>::to_vec).collect();
        WeightedDesign::new(points, rec.weights)
    }
}

impl WeightedDesign {
    /// Validates unit norms and the weight simplex with the default
    /// tolerances.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(points, weights, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidDesign("no points".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidDesign("points have dimension 0".into()));
        }
        if weights.len() != points.len() {
            return Err(Error::InvalidDesign(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidDesign(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            let n = norm(p);
            if !((n - 1.0).abs() <= tol.unit_norm) {
                return Err(Error::InvalidDesign(format!("point {i} has norm {n}")));
            }
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, &w)| !(w >= 0.0)) {
            return Err(Error::InvalidDesign(format!("weight {i} is {w}")));
        }
        let total = pairwise_sum(&weights);
        if !((total - 1.0).abs() <= tol.weight_sum) {
            return Err(Error::InvalidDesign(format!("weights sum to {total}")));
        }
        Ok(WeightedDesign {
            dim,
            points,
            weights,
        })
    }

    /// Equal weights `1/r`.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let r = points.len();
        Self::new(points, vec![1.0 / r.max(1) as f64; r])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_ℓ v_ℓ^α`.
    pub fn monomial_mean(&self, alpha: &MultiIndex) -> f64 {
        let terms: Vec<f64> = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * alpha.eval(p))
            .collect();
        pairwise_sum(&terms)
    }

    /// `Σ w_ℓ (p₁(v_ℓ), …, p_N(v_ℓ))` for a basis.
    pub fn basis_means(&self, basis: &OrthonormalBasis) -> Vec<f64> {
        weighted_basis_means(&self.points, Some(&self.weights), basis)
    }
}

/// `Σ wᵢ p(xᵢ)` for every basis polynomial, summed pairwise so the result
/// does not depend on thread scheduling. `None` means uniform weights.
pub(crate) fn weighted_basis_means(
    points: &[Vec<f64>],
    weights: Option<&[f64]>,
    basis: &OrthonormalBasis,
) -> Vec<f64> {
    let r = points.len();
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let w = weights.map_or(1.0 / r as f64, |w| w[i]);
            basis.eval_all(x).into_iter().map(|v| w * v).collect()
        })
        .collect();
    pairwise_sum_rows(&rows, basis.len())
}

/// `min_{i≠j} min(‖vᵢ − vⱼ‖, ‖vᵢ + vⱼ‖)`.
pub fn min_separation(points: &[Vec<f64>]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let best = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in i + 1..points.len() {
                let (mut minus, mut plus) = (0.0, 0.0);
                for (a, b) in points[i].iter().zip(&points[j]) {
                    minus += (a - b) * (a - b);
                    plus += (a + b) * (a + b);
                }
                best = best.min(minus.min(plus));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn separation_examples() {
        let s = min_separation(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_relative_eq!(s, 2f64.sqrt(), epsilon = 1e-15);
        let s = min_separation(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(s, 0.0);
        let th: f64 = 0.1;
        let s = min_separation(&[vec![1.0, 0.0], vec![th.cos(), th.sin()]]).unwrap();
        assert_relative_eq!(s, 2.0 * 0.05f64.sin(), epsilon = 1e-15);
        assert!(min_separation(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn validation() {
        assert!(WeightedDesign::new(vec![vec![1.0, 0.0]], vec![1.0]).is_ok());
        assert!(WeightedDesign::new(vec![vec![1.0, 0.1]], vec![1.0]).is_err());
        assert!(WeightedDesign::new(vec![vec![1.0, 0.0]], vec![0.9]).is_err());
        assert!(WeightedDesign::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.5, -0.5]).is_err());
        assert!(WeightedDesign::new(vec![], vec![]).is_err());
    }

    #[test]
    fn record_round_trip() {
        let th = 0.3f64;
        let d = WeightedDesign::new(
            vec![vec![th.cos(), th.sin()], vec![-th.sin(), th.cos()]],
            vec![0.25, 0.75],
        )
        .unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: WeightedDesign = serde_json::from_str(&text).unwrap();
        assert_eq!(d, back);
        let bad = r#"{"d":2,"r":2,"points":[1.0,0.0,0.0],"weights":[0.5,0.5]}"#;
        assert!(serde_json::from_str::<WeightedDesign>(bad).is_err());
    }
}
