//! Leaf shape clustering with circular step densities.
//!
//! A centroid contour distance trace becomes a piecewise-constant density on
//! the circle ([`ccd`]), normalized for scale and rotation. Densities are
//! compared with exact step-function distances ([`distance`]) and grouped by
//! agglomerative clustering ([`hcluster`]). [`io`] and [`viz`] handle files
//! and SVG figures; [`synth`] generates test datasets with known groups.

pub mod ccd;
pub mod distance;
mod error;
pub mod hcluster;
pub mod io;
mod numeric;
pub mod synth;
pub mod viz;

pub use ccd::{
    density_from_ccd, leaf_outline, mean_direction, normalize_leaf, rotate_density, trig_moments,
    CcdSequence, LeafOutline, MeanDirection, StepDensity, TrigMoments,
};
pub use distance::{
    dist_hellinger_sq, dist_l1, dist_moment_euclidean, dist_sup, distance_matrix,
    merge_breakpoints, DistanceKind, DistanceMatrix, Refinement, DEFAULT_MOMENT_ORDER,
};
pub use error::{Error, Result};
pub use hcluster::{adjusted_rand_index, agglomerate, cut, to_newick, Dendrogram, Linkage, Merge};
pub use io::{Dataset, Format};
pub use numeric::wrap_angle;
