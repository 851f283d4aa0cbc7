//! Derivative bounds at the center for disks that avoid the standard obstacle.

use hypercontact::obstacle::{derivative_bound_certificate, lemma_suite, LemmaSuiteConfig};

fn main() -> hypercontact::Result<()> {
    for n0 in 1..=3 {
        let cert = derivative_bound_certificate(n0, 1)?;
        let r = lemma_suite(&LemmaSuiteConfig::new(1, n0, 100, 7))?;
        println!(
            "N0 = {n0}: bounds {} (x, y) and {} (z); {} disks kept from {} draws; worst ratios {:.3} and {:.3}",
            cert.bound_xy, cert.bound_z, r.accepted, r.attempts, r.max_xy_ratio, r.max_z_ratio
        );
    }
    Ok(())
}
