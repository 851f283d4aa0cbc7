//! Obstacle cylinder unions, membership, and the derivative-bound certificate
//! for horizontal disks that avoid the standard obstacle.

mod certificate;
mod shells;
mod suite;
mod verify;

pub use certificate::{
    certify_avoidance, derivative_bound_certificate, Avoidance, BoundCertificate, DEFAULT_PIECE_BUDGET,
};
pub use shells::{standard_obstacle, CRule, Orientation, Shell, ShellUnion};
pub use suite::{lemma_suite, random_horizontal_disk, LemmaSuiteConfig, LemmaSuiteResult};
pub(crate) use suite::indexed_rng;
pub use verify::{verify_disk_estimate, DiskReport, Verdict};
