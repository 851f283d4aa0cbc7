//! The standard contact form, exactly horizontal polynomial disks, pullbacks
//! under shear compositions and a constructive horizontal path planner.

mod chow;
mod curve;
mod point;
mod pullback;

pub use chow::{chow_path, chow_path_with, plan_endpoint, Axis, LoopShape, PathPlan, PathSegment};
pub use curve::{
    horizontality_residual, legendrian_from_xy, legendrian_from_xy_exact, legendrian_line, HolomorphicCurve,
    KERNEL_TOLERANCE,
};
pub use point::{alpha0_eval, ContactPoint, TangentVector};
pub use pullback::{pullback_eval, push_forward};
