//! Numerical tolerances shared across the crate.
//!
//! Every threshold used by a check or a solver verdict lives here so that a
//! run record can embed the exact values it was produced with.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed deviation of `‖x‖₂` from 1 for points on the sphere.
    pub unit_norm: f64,
    /// Allowed deviation of a weight vector's sum from 1.
    pub weight_sum: f64,
    /// Orthonormality of computed polynomial bases.
    pub orthonormality: f64,
    /// Largest accepted condition number of a monomial Gram matrix.
    pub gram_condition: f64,
    /// `‖Aw − b‖∞` accepted as a feasible LP solution.
    pub lp_feasibility: f64,
    /// Relative margin (against `‖q‖₂`) required to emit a Farkas certificate.
    pub certificate_margin: f64,
    /// Smallest pivot magnitude accepted by the simplex method.
    pub pivot: f64,
    /// Per-degree residual accepted as a spherical design.
    pub design_residual: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        unit_norm: 1e-12,
        weight_sum: 1e-12,
        orthonormality: 1e-10,
        gram_condition: 1e12,
        lp_feasibility: 1e-9,
        certificate_margin: 1e-9,
        pivot: 1e-9,
        design_residual: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
