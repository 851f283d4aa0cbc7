//! Push-out construction of Fatou-Bieberbach maps from shear automorphisms:
//! exponent selection, round building, orbit classification and audits.

mod audit;
mod orbit;
mod round;
mod select;
mod shear;

pub use audit::{audit_round, sample_shell_point, RoundAudit};
pub use orbit::{
    classify_orbit, compose_orbit, fb_map_eval, omega_membership, scaled_distance, FbValue, OmegaVerdict,
    OrbitClass, OrbitRecord,
};
pub use round::{
    build_shear_round, desk_schedule, enclose_standard, EpsSchedule, PushOutState, Round, StepRecord,
    STATE_VERSION,
};
pub use select::{
    revalidate, select_exponent, witness_at, Revalidation, SelectionInput, SelectionWitness, CERT_TOL,
    DEFAULT_EXPONENT_CAP,
};
pub use shear::{
    jacobian_determinant, shear_eval, to_native, ShearComposition, ShearFunction, ShearKind, ShearMap, ShearStep,
    ShearTerm,
};
