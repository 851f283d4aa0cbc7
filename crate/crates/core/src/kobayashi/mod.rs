//! Brackets for the directed Kobayashi norm and its integrated distance.

mod bounds;
mod distance;
mod search;

pub use bounds::{directed_norm_lower, minimal_n0, norm_bracket, LowerEstimate, NormBracket};
pub use distance::{cck_distance_upper, DistanceEstimate, QUADRATURE_NODES};
pub use search::{directed_norm_upper, Domain, SearchBudget, UpperEstimate};
