//! Follows orbits under the composed rounds and sorts them into the domain or escape.

use hypercontact::fatou_bieberbach::{classify_orbit, compose_orbit, desk_schedule, EpsSchedule, PushOutState};
use hypercontact::numeric::ScaledComplex;
use num_complex::Complex64;

fn main() -> hypercontact::Result<()> {
    let state = PushOutState::build(desk_schedule(2, 6)?, EpsSchedule::Geometric { first: 0.25, ratio: 0.5 }, 6, 1_000_000)?;
    let thetas = state.thetas();
    for p in [[0.0, 0.0], [0.3, -0.2], [1.5, 0.0], [2.5, 0.0], [0.0, 40.0]] {
        let start: Vec<ScaledComplex> = p.iter().map(|&x| Complex64::new(x, 0.0).into()).collect();
        let orbit = compose_orbit(&thetas, &start)?;
        let logs: Vec<String> = orbit.log_norms.iter().map(|l| format!("{l:.3}")).collect();
        println!("{p:?}: {} (ln max-norm by round: {})", classify_orbit(&state, &orbit).label(), logs.join(" "));
    }
    Ok(())
}
