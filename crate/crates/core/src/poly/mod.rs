//! Homogeneous polynomial arithmetic over the unit sphere.

mod basis;
mod homogeneous;
mod moments;
mod monomial;

pub use basis::{orthonormal_basis, OrthonormalBasis};
pub use homogeneous::{check_unit, HomogeneousPoly, PolyRecord};
pub use moments::{gram_matrix, sphere_inner, sphere_moment, sphere_norm};
pub use monomial::{dim_homogeneous, odd_monomials_below, MonomialSet, MultiIndex};
