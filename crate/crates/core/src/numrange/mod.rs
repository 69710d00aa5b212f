//! Numerical range geometry: boundary tracing, affine hulls of joint ranges, distances
//! to region complements and the validated stand-in for the essential range.

pub mod boundary;
pub mod hull;
pub mod region;

pub use boundary::{numrange_boundary, support_point, we_model, Boundary, BoundarySample, ModelRegion, BOUNDARY_SAMPLES};
pub use hull::{affine_hull, AffineHull};
pub use region::{convex_hull_2d, ConvexRegion, Halfspace};

use crate::error::{Error, Result};

/// dist{λ, M ∖ R}: the distance to the complement of the region relative to the affine
/// subspace M when one is given.
pub fn dist_to_complement(lambda: &[f64], region: &ConvexRegion, hull: Option<&AffineHull>) -> Result<f64> {
    match hull {
        None => {
            if lambda.len() != region.ambient() {
                return Err(Error::Geometry(format!("point in R^{} but region in R^{}", lambda.len(), region.ambient())));
            }
            Ok(region.dist_to_complement(lambda))
        }
        Some(h) => {
            let r = h.relation_residual(lambda);
            if r > 1e-9 {
                return Err(Error::Geometry(format!("point is off the affine hull by {r:.3e}")));
            }
            let reduced = region.reduce(h)?;
            Ok(reduced.dist_to_complement(&h.to_reduced(lambda)))
        }
    }
}
