//! Domains, star-shaped covers with partitions of unity, and the shrink and
//! squeeze maps with their explicit constants.

mod cover;
mod domain;
mod squeeze;
mod star;

pub use cover::{build_cover, build_partition, CoverPiece, PartitionOfUnity, PieceRegion, StarCover};
pub use domain::{ball_lattice, AxisBox, Domain, Region, Shape};
pub use squeeze::{
    ball_squeeze_point, shrink_factor, squeeze_locality_constant, squeeze_point,
    verify_shrink_distance, ShrinkReport,
};
pub use star::{is_star_shaped, sphere_directions, StarReport};
