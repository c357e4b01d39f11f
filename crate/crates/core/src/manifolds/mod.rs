//! Invariant manifolds, the tangency parameter and the regions built from them.

pub mod critical;
pub mod curve;
pub mod directions;
pub mod leaves;
pub mod regions;
pub mod tangency;

pub use critical::{critical_points_between, find_critical_points, return_depth, CriticalPoint, ReturnDepth};
pub use curve::{grow_stable, grow_unstable, C2Report, Curve};
pub use directions::{stable_direction, stable_direction_capped};
pub use leaves::Leaves;
pub use regions::{build_regions, Piece, RegionSet, RegionSummary};
pub use tangency::{clearance, find_first_tangency, Clearance, Tangency, DEFAULT_BRACKET};
