//! Config-driven runs of the verification suites, with JSON and CSV output.

mod config;
mod report;
mod runner;

pub use config::{
    validate_config, EpsConfig, ExperimentConfig, HeightRule, KobayashiConfig, LemmaConfig, ObstacleConfig,
    PushoutConfig, ScheduleKind, SCHEMA_VERSION,
};
pub use report::{config_hash, timed, CheckRecord, EnvStamp, Outcome, RunReport};
pub use runner::{
    bracket_origin_check, build_state, cck_full_space_check, chow_check, classify_points, consistency_check,
    contrapositive_check, divergence_check, full_space_check, horizontality_check, lemma_check, omega_check,
    pullback_check, random_horizontal_pair, read_points, round_outcomes, run_experiment, triangle_check,
    write_artifacts, write_orbits, OrbitRow, RunOutput, Suite,
};
