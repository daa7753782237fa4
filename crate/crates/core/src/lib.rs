//! Spherical designs and moment-matching hard instances for mixtures of
//! linear classifiers.
//!
//! - [`poly`]: homogeneous polynomials, sphere moments, orthonormal bases
//!   and tangential gradients.
//! - [`hermite`]: normalized Hermite polynomials and Gaussian correlations
//!   with `sign`.
//! - [`design`]: weighted designs by LP (with infeasibility certificates)
//!   and equal-weight designs by the gradient perturbation map.
//! - [`mixture`]: random embeddings of a design and the resulting labeled
//!   distribution.
//! - [`sq`]: a simulated statistical-query oracle and Hermite
//!   distinguishers.
//!
//! Monomials are ordered graded-lexicographically everywhere: by total
//! degree, then descending lexicographic order of the exponent vector, so
//! `x₁²` precedes `x₁x₂` precedes `x₂²`.

pub mod config;
pub mod design;
pub mod error;
pub mod hermite;
pub mod mixture;
pub mod numeric;
pub mod poly;
pub mod records;
pub mod rng;
pub mod sq;

pub use config::Tolerances;
pub use design::{WeightedDesign, min_separation};
pub use error::{Error, Result};
pub use mixture::MixtureInstance;
pub use poly::{HomogeneousPoly, MultiIndex, OrthonormalBasis};
