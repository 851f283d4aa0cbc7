//! Horizontal paths between arbitrary points and the integrated norm bound along them.

use hypercontact::contact::{chow_path, horizontality_residual, plan_endpoint, ContactPoint};
use hypercontact::kobayashi::{cck_distance_upper, Domain, SearchBudget};
use num_complex::Complex64;

fn main() -> hypercontact::Result<()> {
    let p = ContactPoint::zero(1);
    let q = ContactPoint::from_coords(&[Complex64::new(1.0, 1.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 2.0)])?;
    let plan = chow_path(&p, &q)?;
    for s in &plan.segments {
        println!("block {} {:?}: z = {} (residual {})", s.block + 1, s.axis, s.curve.z(), horizontality_residual(&s.curve));
    }
    println!("reached {:?}", plan_endpoint(&plan, &p).to_coords());

    let d = cck_distance_upper(&p, &q, Domain::FullSpace, &SearchBudget::default(), 0)?;
    println!("distance bound in the full space: {:.3e} ({} segments)", d.value, d.segments);
    Ok(())
}
