//! A config-driven run of the push-out suite with artifacts in a temporary directory.

use hypercontact::experiment::{run_experiment, write_artifacts, ExperimentConfig, Suite};

fn main() -> hypercontact::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{"n": 1, "k_max": 4, "pushout": {"samples_per_shell": 200, "identity_samples": 2000}}"#,
    )?;
    let out = run_experiment(&cfg, Suite::Pushout)?;
    for c in &out.report.checks {
        println!("{:5} {:32} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    let dir = std::env::temp_dir().join("hypercontact-example");
    write_artifacts(&out, &dir)?;
    println!("config hash {}; artifacts in {}", out.report.config_hash, dir.display());
    Ok(())
}
